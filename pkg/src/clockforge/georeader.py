"""Classical clock reader: Sobel edges, Hough lines, hand rays, ranked times.

This is a reconstruction of the usual geometry baseline for fronto-parallel
clocks. The hand heuristic (cluster centre-passing lines by direction,
measure ink along both rays, call the longer hand the minute hand) is our
own design; the classical method is only described at the level of "edges
plus Hough".

Typical use::

    result = read_time(img)
    result.top1          # best TimeClass, or None if no hands were found
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter

from . import kernels
from .errors import ImageTooSmall, InsufficientHands, NoCircleSupport
from .raster import luma
from .timecore import (
    N_CLASSES,
    angular_difference,
    decode_angles,
    decode_class,
    hand_angles,
)

_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
_SOBEL_Y = _SOBEL_X.T

# class table used by the overlapping-hands fallback and the score model
_ALL_ANGLES = np.array([hand_angles(decode_class(c)) for c in range(N_CLASSES)])


@dataclass(frozen=True)
class EdgeMap:
    magnitude: np.ndarray
    orientation: np.ndarray  # radians, atan2(gy, gx)
    gray: np.ndarray


@dataclass(frozen=True)
class LineDetection:
    rho: float  # px, signed, relative to the image centre
    theta: float  # radians in [0, pi)
    votes: int


@dataclass(frozen=True)
class HandEstimate:
    angle: float  # degrees clockwise from 12
    length: float  # px from the pivot
    thickness_score: float  # ink width across the hand, px


@dataclass(frozen=True)
class Dial:
    cx: float
    cy: float
    radius: float
    score: float
    fallback: bool = False


@dataclass(frozen=True)
class ReadResult:
    candidates: tuple[tuple[int, float], ...] = ()
    hands: tuple[HandEstimate, HandEstimate] | None = None  # (hour, minute) as assigned for rank 1
    dial: Dial | None = None
    overlapping: bool = False

    @property
    def top1(self) -> int | None:
        return self.candidates[0][0] if self.candidates else None

    @property
    def classes(self) -> list[int]:
        return [c for c, _ in self.candidates]


def to_gray(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim == 2:
        return img.astype(np.float64)
    return luma(img)


def sobel_edges(img: np.ndarray) -> EdgeMap:
    """3x3 Sobel gradients of the luma image (replicated border)."""
    gray = to_gray(img)
    if gray.shape[0] < 8 or gray.shape[1] < 8:
        raise ImageTooSmall(f"image is {gray.shape[1]}x{gray.shape[0]}, need at least 8x8")
    p = np.pad(gray, 1, mode="edge")
    h, w = gray.shape
    gx = np.zeros_like(gray)
    gy = np.zeros_like(gray)
    for dy in range(3):
        for dx in range(3):
            win = p[dy:dy + h, dx:dx + w]
            gx += _SOBEL_X[dy, dx] * win
            gy += _SOBEL_Y[dy, dx] * win
    return EdgeMap(np.hypot(gx, gy), np.arctan2(gy, gx), gray)


def edge_mask(edges: EdgeMap, edge_threshold: float | None = None) -> np.ndarray:
    """Edge pixels: magnitude at least ``edge_threshold`` (default 30% of the peak)."""
    peak = float(edges.magnitude.max())
    if peak <= 0:
        return np.zeros(edges.magnitude.shape, dtype=bool)
    thr = 0.3 * peak if edge_threshold is None else edge_threshold
    return edges.magnitude >= max(thr, 1e-9)


def hough_lines(
    edges: EdgeMap,
    vote_threshold: int,
    n_theta: int = 360,
    n_rho: int | None = None,
    edge_threshold: float | None = None,
) -> list[LineDetection]:
    """Straight lines through thresholded edge pixels, strongest first.

    ``theta`` is sampled uniformly on ``[0, pi)``; ``rho`` is measured from the
    image centre with ``n_rho`` bins spanning the image diagonal (1 px bins by
    default). Peaks are local maxima over a 3x3 accumulator window.
    """
    mask = edge_mask(edges, edge_threshold)
    h, w = mask.shape
    diag = math.hypot(w, h)
    if n_rho is None:
        n_rho = int(math.ceil(diag)) + 1
    rho_res = diag / (n_rho - 1)
    rho_min = -diag / 2.0
    thetas = np.arange(n_theta) * (np.pi / n_theta)
    ys, xs = np.nonzero(mask)
    if xs.size == 0:
        return []
    acc = kernels.hough_accumulate(
        xs.astype(np.float64), ys.astype(np.float64), np.cos(thetas), np.sin(thetas),
        (w - 1) / 2.0, (h - 1) / 2.0, rho_min, rho_res, n_rho,
    )
    peaks = (acc == maximum_filter(acc, size=3, mode="constant", cval=0)) & (acc >= max(vote_threshold, 1))
    ri, ti = np.nonzero(peaks)
    votes = acc[ri, ti]
    order = np.lexsort((ri, ti, -votes))
    return [LineDetection(float(rho_min + ri[k] * rho_res), float(thetas[ti[k]]), int(votes[k])) for k in order]


def detect_center(img: np.ndarray, edges: EdgeMap | None = None, min_score: float = 0.35) -> Dial:
    """Locate the dial by circular edge support around the image centre.

    Searches centres within +-10% of the image size around the image centre
    and radii in ``[0.25, 0.5] * min(w, h)``; the score of a circle is the
    fraction of its perimeter samples that land on a (dilated) edge pixel.
    Raises NoCircleSupport when the best score is below ``min_score``.
    """
    if edges is None:
        edges = sobel_edges(img)
    weight = maximum_filter(edge_mask(edges).astype(np.float64), size=3)
    h, w = weight.shape
    side = min(w, h)
    cx0, cy0 = (w - 1) / 2.0, (h - 1) / 2.0
    if not weight.any():
        raise NoCircleSupport("image has no edges")

    angles = np.linspace(0, 2 * np.pi, 72, endpoint=False)
    cxs = cx0 + np.arange(-0.1 * w, 0.1 * w + 1e-9, 2.0)
    cys = cy0 + np.arange(-0.1 * h, 0.1 * h + 1e-9, 2.0)
    radii = np.arange(0.25 * side, 0.5 * side + 1e-9, 1.0)
    scores = kernels.circle_scores(weight, cxs, cys, radii, np.cos(angles), np.sin(angles))
    iy, ix, ir = _best_index(scores)

    angles = np.linspace(0, 2 * np.pi, 180, endpoint=False)
    fcx = cxs[ix] + np.arange(-2.0, 2.01, 0.5)
    fcy = cys[iy] + np.arange(-2.0, 2.01, 0.5)
    fr = radii[ir] + np.arange(-2.0, 2.01, 0.5)
    fine = kernels.circle_scores(weight, fcx, fcy, fr, np.cos(angles), np.sin(angles))
    jy, jx, jr = _best_index(fine)
    best = float(fine[jy, jx, jr])
    if best < min_score:
        raise NoCircleSupport(f"best circle support {best:.2f} < {min_score}")
    return Dial(float(fcx[jx]), float(fcy[jy]), float(fr[jr]), best)


def _best_index(scores):
    # highest score; ties go to the largest radius, then the most central cell
    top = scores.max()
    cand = np.argwhere(scores >= top - 1e-12)
    cy_mid, cx_mid = (scores.shape[0] - 1) / 2.0, (scores.shape[1] - 1) / 2.0
    best = min(cand, key=lambda c: (-c[2], abs(c[0] - cy_mid) + abs(c[1] - cx_mid), c[0], c[1]))
    return tuple(int(v) for v in best)


def locate_dial(img: np.ndarray, edges: EdgeMap | None = None) -> Dial:
    """:func:`detect_center`, falling back to the image centre and ``0.4 * min(w, h)``."""
    try:
        return detect_center(img, edges)
    except NoCircleSupport:
        h, w = np.asarray(img).shape[:2]
        return Dial((w - 1) / 2.0, (h - 1) / 2.0, 0.4 * min(w, h), 0.0, fallback=True)


# ---------------------------------------------------------------------------
# hands
# ---------------------------------------------------------------------------


def hand_edges(edges: EdgeMap, dial: Dial, inner: float = 0.75, max_radial_cos: float = 0.5) -> EdgeMap:
    """Keep edges that could belong to a hand.

    Hands are radial bars, so their edge gradients are roughly tangential;
    rim, tick ring and hub edges have radial gradients and are dropped, as
    is everything beyond ``inner * radius``.
    """
    h, w = edges.magnitude.shape
    yy, xx = np.mgrid[0:h, 0:w]
    dx, dy = xx - dial.cx, yy - dial.cy
    r = np.hypot(dx, dy)
    radial = np.arctan2(dy, dx)
    cos_rad = np.abs(np.cos(edges.orientation - radial))
    keep = (r <= inner * dial.radius) & (cos_rad <= max_radial_cos)
    return EdgeMap(np.where(keep, edges.magnitude, 0.0), edges.orientation, edges.gray)


def ink_mask(gray: np.ndarray, dial: Dial, min_contrast: float = 30.0) -> np.ndarray:
    """Pixels that differ clearly from the face colour (median luma inside the dial)."""
    h, w = gray.shape
    yy, xx = np.mgrid[0:h, 0:w]
    inside = (xx - dial.cx) ** 2 + (yy - dial.cy) ** 2 <= (0.85 * dial.radius) ** 2
    face = float(np.median(gray[inside])) if inside.any() else float(np.median(gray))
    return np.abs(gray - face) >= min_contrast


def _sample(mask, x, y):
    h, w = mask.shape
    xi = np.floor(np.asarray(x) + 0.5).astype(np.int64)
    yi = np.floor(np.asarray(y) + 0.5).astype(np.int64)
    ok = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
    out = np.zeros(xi.shape, dtype=bool)
    out[ok] = mask[yi[ok], xi[ok]]
    return out


def ray_lengths(ink: np.ndarray, center, angles_deg, max_len: float, max_gap: float = 3.0) -> np.ndarray:
    """Ink run length from ``center`` along each clock direction.

    A run ends once more than ``max_gap`` px pass without ink; anti-aliased
    hand edges and thin hubs leave short gaps that must not cut a hand.
    """
    a = np.radians(np.atleast_1d(np.asarray(angles_deg, dtype=np.float64)))[:, None]
    r = np.arange(0.0, max_len, 0.5)[None, :]
    hit = _sample(ink, center[0] + r * np.sin(a), center[1] - r * np.cos(a))
    # index of the latest ink sample so far; the pivot counts as ink
    idx = np.arange(hit.shape[1])
    last = np.maximum.accumulate(np.where(hit, idx, 0), axis=1)
    # a run breaks when the next ink sample would lie more than max_gap past the last one
    broken = ~hit & ((idx + 1 - last) * 0.5 > max_gap)
    stop = np.where(broken.any(axis=1), broken.argmax(axis=1), hit.shape[1] - 1)
    return last[np.arange(hit.shape[0]), stop] * 0.5


def ray_length(ink: np.ndarray, center, angle_deg: float, max_len: float, max_gap: float = 3.0) -> float:
    return float(ray_lengths(ink, center, [angle_deg], max_len, max_gap)[0])


def _refine_angle(ink, center, angle_deg, max_len, window=6.0, step=0.25):
    """Direction and length of the longest ink ray near ``angle_deg``.

    A thick hand gives a noisy plateau of near-maximal lengths; the midpoint
    of the run within 10% of the maximum is the hand axis.
    """
    offs = np.arange(-window, window + 1e-9, step)
    lengths = ray_lengths(ink, center, angle_deg + offs, max_len)
    top = lengths.max()
    if top <= 0:
        return angle_deg % 360.0, 0.0
    best = int(np.argmax(lengths))
    good = lengths >= 0.9 * top
    lo = best
    while lo > 0 and good[lo - 1]:
        lo -= 1
    hi = best
    while hi < len(offs) - 1 and good[hi + 1]:
        hi += 1
    return float((angle_deg + 0.5 * (offs[lo] + offs[hi])) % 360.0), float(top)


def _thickness(ink, center, angle_deg, length):
    a = math.radians(angle_deg)
    ux, uy = math.sin(a), -math.cos(a)
    mx, my = center[0] + 0.6 * length * ux, center[1] + 0.6 * length * uy
    t = np.arange(-15.0, 15.01, 0.5)
    hit = _sample(ink, mx + t * -uy, my + t * ux)
    mid = len(t) // 2
    if not hit[mid]:
        return 0.0
    lo = mid
    while lo > 0 and hit[lo - 1]:
        lo -= 1
    hi = mid
    while hi < len(t) - 1 and hit[hi + 1]:
        hi += 1
    return float((hi - lo + 1) * 0.5)


def _line_clock_angle(theta):
    # line normal (cos t, sin t); direction (-sin t, cos t) in image coords
    dx, dy = -math.sin(theta), math.cos(theta)
    return math.degrees(math.atan2(dx, -dy)) % 360.0


def hand_candidates(lines, dial: Dial, img, ink=None) -> list[HandEstimate]:
    """Measured hand rays from centre-passing lines, one or two per direction cluster."""
    gray = to_gray(img)
    if ink is None:
        ink = ink_mask(gray, dial)
    h, w = gray.shape
    icx, icy = (w - 1) / 2.0, (h - 1) / 2.0
    near = 0.08 * dial.radius
    passing = [
        ln for ln in lines
        if abs((dial.cx - icx) * math.cos(ln.theta) + (dial.cy - icy) * math.sin(ln.theta) - ln.rho) <= near
    ]
    clusters: list[list[LineDetection]] = []
    for ln in passing:
        for cl in clusters:
            d = abs(math.degrees(ln.theta - cl[0].theta)) % 180.0
            if min(d, 180.0 - d) <= 5.0:
                cl.append(ln)
                break
        else:
            clusters.append([ln])

    center = (dial.cx, dial.cy)
    min_len = 0.15 * dial.radius
    out: list[HandEstimate] = []
    for cl in clusters:
        base = _line_clock_angle(cl[0].theta)
        rays = []
        for a in (base, (base + 180.0) % 360.0):
            # walk uphill until the search window is centred on the hand axis
            for _ in range(6):
                a_new, L = _refine_angle(ink, center, a, dial.radius)
                moved = angular_difference(a_new, a)
                a = a_new
                if moved < 0.3:
                    break
            rays.append((L, a))
        rays.sort(reverse=True)
        (L1, a1), (L2, a2) = rays
        if L1 >= min_len:
            out.append(HandEstimate(a1, L1, _thickness(ink, center, a1, L1)))
        # a long opposite ray is a second hand pointing the other way, not a tail
        if L2 >= 0.32 * dial.radius:
            out.append(HandEstimate(a2, L2, _thickness(ink, center, a2, L2)))
    return _suppress(out, ink, center, dial.radius)


def _suppress(hands, ink, center, max_len, reach=20.0, keep_ratio=0.8):
    """Drop rays that are really the flank of a longer hand.

    A shorter candidate is merged into a longer one when every ray on the
    arc between them still carries at least ``keep_ratio`` of its length,
    i.e. the two directions lie on one connected blob of ink.
    """
    kept: list[HandEstimate] = []
    for hnd in sorted(hands, key=lambda e: (-e.length, e.angle)):
        merged = False
        for k in kept:
            gap = angular_difference(hnd.angle, k.angle)
            if gap > reach:
                continue
            sweep = ((k.angle - hnd.angle + 180.0) % 360.0) - 180.0
            arc = hnd.angle + np.linspace(0.0, sweep, max(int(abs(sweep) / 0.5), 1) + 1)
            if gap <= 1.0 or ray_lengths(ink, center, arc, max_len).min() >= keep_ratio * hnd.length:
                merged = True
                break
        if not merged:
            kept.append(hnd)
    return kept


def extract_hands(lines, dial: Dial, img, ink=None) -> tuple[HandEstimate, HandEstimate]:
    """Pick the hour and minute hands among the measured rays.

    With three or more candidates the thinnest is dropped (second hands are
    thin); the two longest remaining become the hands, the longer being the
    minute hand. Raises InsufficientHands with ``.candidates`` attached when
    fewer than two survive.
    """
    cands = hand_candidates(lines, dial, img, ink)
    if len(cands) >= 3:
        thinnest = min(range(len(cands)), key=lambda i: (cands[i].thickness_score, -cands[i].length))
        cands = [c for i, c in enumerate(cands) if i != thinnest]
    if len(cands) < 2:
        err = InsufficientHands(f"found {len(cands)} hand candidate(s)")
        err.candidates = cands
        raise err
    cands = sorted(cands, key=lambda e: -e.length)[:2]
    minute, hour = cands
    return hour, minute


# ---------------------------------------------------------------------------
# reading
# ---------------------------------------------------------------------------


def _residual(cls, hour_angle, minute_angle):
    ha, ma = _ALL_ANGLES[cls]
    return angular_difference(ha, hour_angle) / 30.0 + angular_difference(ma, minute_angle) / 6.0


def _score(res):
    return float(math.exp(-res))


def _ranked(pairs):
    out, best = [], 1.0
    seen = set()
    for cls, raw in pairs:
        if cls in seen:
            continue
        seen.add(cls)
        best = min(best, raw)
        out.append((int(cls), best))
    return tuple(out[:3])


def candidates_from_hands(hour: HandEstimate, minute: HandEstimate):
    """Rank 1 direct, rank 2 swapped, rank 3 the minute neighbour on the residual side."""
    direct = decode_angles(hour.angle, minute.angle)
    swapped = decode_angles(minute.angle, hour.angle)
    frac = (minute.angle % 360.0) / 6.0
    step = 1 if frac - math.floor(frac + 0.5) >= 0 else -1
    neighbour = (direct + step) % N_CLASSES
    return _ranked([
        (direct, _score(_residual(direct, hour.angle, minute.angle))),
        (swapped, _score(_residual(swapped, minute.angle, hour.angle))),
        (neighbour, _score(_residual(neighbour, hour.angle, minute.angle))),
    ])


def overlapping_candidates(angle: float):
    """Classes whose two hands both point along ``angle``, best three."""
    d_h = np.abs((_ALL_ANGLES[:, 0] - angle + 180.0) % 360.0 - 180.0)
    d_m = np.abs((_ALL_ANGLES[:, 1] - angle + 180.0) % 360.0 - 180.0)
    total = d_h + d_m
    order = np.lexsort((np.arange(N_CLASSES), total))[:3]
    return _ranked([(int(c), _score(total[c] / 6.0)) for c in order])


def read_time(img: np.ndarray, vote_fraction: float = 0.3, min_votes: int = 8) -> ReadResult:
    """Read a cropped, roughly fronto-parallel clock image.

    Returns up to three ranked ``(TimeClass, score)`` candidates; an empty
    result means no hands were found.
    """
    edges = sobel_edges(img)
    dial = locate_dial(img, edges)
    lines = hough_lines(hand_edges(edges, dial), vote_threshold=min_votes)
    if lines:
        cut = max(min_votes, int(math.ceil(vote_fraction * lines[0].votes)))
        lines = [ln for ln in lines if ln.votes >= cut]
    ink = ink_mask(edges.gray, dial)
    try:
        hour, minute = extract_hands(lines, dial, img, ink)
    except InsufficientHands as err:
        if len(err.candidates) == 1:
            return ReadResult(overlapping_candidates(err.candidates[0].angle), None, dial, overlapping=True)
        return ReadResult((), None, dial)
    return ReadResult(candidates_from_hands(hour, minute), (hour, minute), dial)
