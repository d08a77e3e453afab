"""Tiny deterministic rasteriser for the clock generator.

Shapes are tested against sample points. Anti-aliased drawing uses a
``Canvas`` holding a 4x supersampled float buffer that is box-filtered on
export; hard-edged drawing (artefacts) tests integer pixel centres directly.
All coordinates are output-pixel coordinates with pixel centres on integers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SUPERSAMPLE = 4


@dataclass(frozen=True)
class Capsule:
    """Segment ``p0 -> p1`` thickened to ``radius`` with round caps."""

    p0: tuple[float, float]
    p1: tuple[float, float]
    radius: float

    def bbox(self):
        r = self.radius
        return (min(self.p0[0], self.p1[0]) - r, max(self.p0[0], self.p1[0]) + r,
                min(self.p0[1], self.p1[1]) - r, max(self.p0[1], self.p1[1]) + r)

    def contains(self, X, Y):
        return segment_distance(X, Y, self.p0, self.p1) <= self.radius

    def translated(self, dx, dy):
        return Capsule((self.p0[0] + dx, self.p0[1] + dy), (self.p1[0] + dx, self.p1[1] + dy), self.radius)


@dataclass(frozen=True)
class Polygon:
    """Convex polygon given by its vertices in either winding order."""

    points: tuple[tuple[float, float], ...]

    def bbox(self):
        p = np.asarray(self.points)
        return p[:, 0].min(), p[:, 0].max(), p[:, 1].min(), p[:, 1].max()

    def contains(self, X, Y):
        p = np.asarray(self.points, dtype=np.float64)
        q = np.roll(p, -1, axis=0)
        cross = [(b[0] - a[0]) * (Y - a[1]) - (b[1] - a[1]) * (X - a[0]) for a, b in zip(p, q)]
        cross = np.stack(cross)
        return np.all(cross >= 0, axis=0) | np.all(cross <= 0, axis=0)

    def translated(self, dx, dy):
        return Polygon(tuple((x + dx, y + dy) for x, y in self.points))


@dataclass(frozen=True)
class SuperEllipse:
    """``|dx/rx|^p + |dy/ry|^p <= 1``; ``p = 2`` is an ellipse, larger ``p`` rounds a square."""

    center: tuple[float, float]
    rx: float
    ry: float
    power: float = 2.0

    def bbox(self):
        cx, cy = self.center
        return cx - self.rx, cx + self.rx, cy - self.ry, cy + self.ry

    def contains(self, X, Y):
        if self.rx <= 0 or self.ry <= 0:
            return np.zeros(np.broadcast(X, Y).shape, dtype=bool)
        u = np.abs((X - self.center[0]) / self.rx)
        v = np.abs((Y - self.center[1]) / self.ry)
        if self.power == 2.0:
            return u * u + v * v <= 1.0
        return u ** self.power + v ** self.power <= 1.0

    def boundary_distance(self, angle_deg: float) -> float:
        """Distance from the centre to the boundary along a clock direction."""
        a = np.deg2rad(angle_deg)
        dx, dy = abs(np.sin(a)), abs(np.cos(a))
        p = self.power
        return float(1.0 / ((dx / self.rx) ** p + (dy / self.ry) ** p) ** (1.0 / p))

    def scaled(self, shrink: float):
        return SuperEllipse(self.center, max(self.rx - shrink, 0.0), max(self.ry - shrink, 0.0), self.power)


def segment_distance(X, Y, p0, p1):
    x0, y0 = p0
    dx, dy = p1[0] - x0, p1[1] - y0
    L2 = dx * dx + dy * dy
    if L2 == 0:
        return np.hypot(X - x0, Y - y0)
    t = np.clip(((X - x0) * dx + (Y - y0) * dy) / L2, 0.0, 1.0)
    return np.hypot(X - (x0 + t * dx), Y - (y0 + t * dy))


def _window(coords_x, coords_y, bbox):
    x0, x1, y0, y1 = bbox
    c0 = int(np.searchsorted(coords_x, x0, side="left"))
    c1 = int(np.searchsorted(coords_x, x1, side="right"))
    r0 = int(np.searchsorted(coords_y, y0, side="left"))
    r1 = int(np.searchsorted(coords_y, y1, side="right"))
    return slice(r0, r1), slice(c0, c1)


def shape_mask(shape, coords_x, coords_y):
    """Boolean mask of ``shape`` over the sample grid, restricted to its bbox."""
    rows, cols = _window(coords_x, coords_y, shape.bbox())
    X = coords_x[cols][None, :]
    Y = coords_y[rows][:, None]
    if X.size == 0 or Y.size == 0:
        return rows, cols, np.zeros((Y.shape[0], X.shape[1]), dtype=bool)
    return rows, cols, shape.contains(X, Y)


class Canvas:
    """Supersampled RGB drawing surface of ``width x height`` output pixels."""

    def __init__(self, width: int, height: int, background, supersample: int = SUPERSAMPLE):
        self.width, self.height, self.ss = int(width), int(height), int(supersample)
        self.buf = np.empty((self.height * self.ss, self.width * self.ss, 3), dtype=np.float64)
        self.buf[...] = np.asarray(background, dtype=np.float64)
        self.xs = (np.arange(self.width * self.ss) + 0.5) / self.ss - 0.5
        self.ys = (np.arange(self.height * self.ss) + 0.5) / self.ss - 0.5

    def draw(self, shape, color):
        rows, cols, mask = shape_mask(shape, self.xs, self.ys)
        if mask.any():
            # basic slicing gives a view, so this writes through
            self.buf[rows, cols][mask] = np.asarray(color, dtype=np.float64)

    def to_image(self) -> np.ndarray:
        s = self.ss
        small = self.buf.reshape(self.height, s, self.width, s, 3).mean(axis=(1, 3))
        return np.clip(np.floor(small + 0.5), 0, 255).astype(np.uint8)


def hard_mask(shape, width: int, height: int) -> np.ndarray:
    """Full-size mask of pixels whose centres lie inside ``shape``."""
    xs = np.arange(width, dtype=np.float64)
    ys = np.arange(height, dtype=np.float64)
    rows, cols, m = shape_mask(shape, xs, ys)
    out = np.zeros((height, width), dtype=bool)
    out[rows, cols] = m
    return out


def luma(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    return 0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2]


# --- stroke font ------------------------------------------------------------
# Glyphs are polylines in a unit box (x right, y down) scaled to font size.
# Advance widths are fractions of the font size.

_GLYPHS = {
    "0": [[(0.25, 0), (0.75, 0), (1, 0.2), (1, 0.8), (0.75, 1), (0.25, 1), (0, 0.8), (0, 0.2), (0.25, 0)]],
    "1": [[(0.2, 0.2), (0.55, 0), (0.55, 1)], [(0.2, 1), (0.9, 1)]],
    "2": [[(0, 0.2), (0.25, 0), (0.75, 0), (1, 0.2), (1, 0.4), (0, 1), (1, 1)]],
    "3": [[(0, 0.1), (0.3, 0), (0.8, 0), (1, 0.2), (1, 0.35), (0.75, 0.5), (0.3, 0.5)],
          [(0.75, 0.5), (1, 0.65), (1, 0.85), (0.8, 1), (0.3, 1), (0, 0.9)]],
    "4": [[(0.75, 1), (0.75, 0), (0, 0.7), (1, 0.7)]],
    "5": [[(1, 0), (0.05, 0), (0, 0.45), (0.7, 0.42), (1, 0.6), (1, 0.85), (0.8, 1), (0.2, 1), (0, 0.9)]],
    "6": [[(0.9, 0.05), (0.6, 0), (0.3, 0), (0, 0.3), (0, 0.8), (0.25, 1), (0.75, 1), (1, 0.8), (1, 0.6),
           (0.75, 0.45), (0.25, 0.45), (0, 0.6)]],
    "7": [[(0, 0), (1, 0), (0.35, 1)]],
    "8": [[(0.25, 0), (0.75, 0), (0.95, 0.12), (0.95, 0.35), (0.75, 0.48), (0.25, 0.48), (0.05, 0.35),
           (0.05, 0.12), (0.25, 0)],
          [(0.25, 0.48), (0, 0.62), (0, 0.85), (0.25, 1), (0.75, 1), (1, 0.85), (1, 0.62), (0.75, 0.48)]],
    "9": [[(0.1, 0.95), (0.4, 1), (0.7, 1), (1, 0.7), (1, 0.2), (0.75, 0), (0.25, 0), (0, 0.2), (0, 0.4),
           (0.25, 0.55), (0.75, 0.55), (1, 0.4)]],
    "I": [[(0.5, 0), (0.5, 1)]],
    "V": [[(0, 0), (0.5, 1), (1, 0)]],
    "X": [[(0, 0), (1, 1)], [(1, 0), (0, 1)]],
}
_ADVANCE = {"I": 0.25}
_GLYPH_WIDTH = 0.6
_SPACING = 0.15

ROMAN = ["XII", "I", "II", "III", "IIII", "V", "VI", "VII", "VIII", "IX", "X", "XI"]


def text_strokes(text: str, center, font_size: float, thickness: float) -> list[Capsule]:
    """Capsules drawing ``text`` centred on ``center``."""
    widths = [_ADVANCE.get(ch, _GLYPH_WIDTH) * font_size for ch in text]
    total = sum(widths) + _SPACING * font_size * (len(text) - 1)
    x = center[0] - total / 2.0
    top = center[1] - font_size / 2.0
    r = max(thickness, 0.5) / 2.0
    out = []
    for ch, w in zip(text, widths):
        for line in _GLYPHS[ch]:
            pts = [(x + px * w, top + py * font_size) for px, py in line]
            out.extend(Capsule(a, b, r) for a, b in zip(pts[:-1], pts[1:]))
        x += w + _SPACING * font_size
    return out
