"""Exception hierarchy shared by every clockforge module."""


class ClockforgeError(Exception):
    """Base class; the CLI maps these to exit code 2 (data error)."""


class SingularHomography(ClockforgeError):
    pass


class DegeneratePoint(ClockforgeError):
    pass


class DegenerateConfiguration(ClockforgeError):
    pass


class ImageTooSmall(ClockforgeError):
    pass


class NoCircleSupport(ClockforgeError):
    pass


class InsufficientHands(ClockforgeError):
    pass


class FitFailed(ClockforgeError):
    pass


class EmptyDataset(ClockforgeError):
    pass


class EmptyBox(ClockforgeError):
    pass


class ParseError(ClockforgeError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class RangeError(ParseError):
    pass
