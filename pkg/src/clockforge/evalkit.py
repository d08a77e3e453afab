"""Accuracy metrics for time readings.

A reading is *overall* correct when its class lies within one minute of the
truth on the 720-class circle, so 2:59 vs 3:00 and 11:59 vs 0:00 both count.
Hour accuracy compares the hour field strictly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EmptyDataset
from .timecore import ClockTime, check_class, circular_distance, decode_class


def _as_class(t) -> int:
    if isinstance(t, ClockTime):
        return t.index
    return check_class(t)


def minute_correct(pred, truth) -> bool:
    mp = decode_class(_as_class(pred)).minute
    mt = decode_class(_as_class(truth)).minute
    d = abs(mp - mt)
    return min(d, 60 - d) <= 1


def hour_correct(pred, truth) -> bool:
    return decode_class(_as_class(pred)).hour == decode_class(_as_class(truth)).hour


def overall_correct(pred, truth) -> bool:
    return circular_distance(_as_class(pred), _as_class(truth)) <= 1


@dataclass(frozen=True)
class LabeledPrediction:
    truth: int
    candidates: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "truth", _as_class(self.truth))
        cands = tuple(_as_class(c) for c in self.candidates)
        if len(cands) > 3:
            raise ValueError("at most three ranked candidates")
        if len(set(cands)) != len(cands):
            raise ValueError("candidates must be distinct")
        object.__setattr__(self, "candidates", cands)


@dataclass(frozen=True)
class EvalReport:
    n: int
    top1: float
    top2: float
    top3: float
    hour_top1: float
    minute_top1: float

    def to_dict(self) -> dict:
        from . import FORMAT_VERSION

        return {
            "format_version": FORMAT_VERSION,
            "n": self.n,
            "top1": self.top1,
            "top2": self.top2,
            "top3": self.top3,
            "hour_top1": self.hour_top1,
            "minute_top1": self.minute_top1,
        }

    def table(self) -> str:
        rows = [("n", str(self.n))] + [
            (k, f"{100 * getattr(self, k):6.2f}%") for k in ("top1", "top2", "top3", "hour_top1", "minute_top1")
        ]
        w = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{w}}  {v:>8}" for k, v in rows)


def evaluate(items: Iterable[LabeledPrediction]) -> EvalReport:
    """Aggregate top-k, hour and minute accuracy; empty candidate lists score zero."""
    items: Sequence[LabeledPrediction] = list(items)
    if not items:
        raise EmptyDataset("nothing to evaluate")
    hits = [0, 0, 0]
    hour = minute = 0
    for it in items:
        first = next((k for k, c in enumerate(it.candidates) if overall_correct(c, it.truth)), None)
        if first is not None:
            for k in range(first, 3):
                hits[k] += 1
        if it.candidates:
            hour += hour_correct(it.candidates[0], it.truth)
            minute += minute_correct(it.candidates[0], it.truth)
    n = len(items)
    return EvalReport(n, hits[0] / n, hits[1] / n, hits[2] / n, hour / n, minute / n)
