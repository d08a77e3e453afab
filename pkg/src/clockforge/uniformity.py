"""Cyclic RANSAC over per-frame time predictions.

A clock in a timelapse advances at a constant rate, so predictions follow a
line in (frame, minutes) wrapped modulo 720: a sawtooth. Each RANSAC
iteration draws two entries, assumes they lie in the same period (so the
slope uses the shorter way round the dial), and counts entries within a
circular margin of the wrapped line. The best model is then refined by least
squares on inliers lifted onto the unwrapped line.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import FitFailed
from .timecore import N_CLASSES, check_class

DEFAULT_ITERATIONS = 10_000
DEFAULT_MARGIN = 3
MIN_INLIER_RATIO = 0.7
MIN_SPAN_MINUTES = 10.0
# thresholds are inclusive; this slack absorbs binary rounding of e.g. 10/99*99
_EPS = 1e-9


@dataclass(frozen=True)
class PredictionSeries:
    frames: np.ndarray
    preds: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frames, dtype=np.int64).ravel()
        p = np.asarray(self.preds, dtype=np.int64).ravel()
        if f.shape != p.shape:
            raise ValueError("frames and predictions differ in length")
        if f.size < 2:
            raise ValueError("a series needs at least two entries")
        if f[0] < 0 or np.any(np.diff(f) <= 0):
            raise ValueError("frame indices must be non-negative and strictly increasing")
        if np.any((p < 0) | (p >= N_CLASSES)):
            raise ValueError("predictions must be time classes in [0, 719]")
        f.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "frames", f)
        object.__setattr__(self, "preds", p)

    @classmethod
    def from_pairs(cls, pairs) -> PredictionSeries:
        pairs = list(pairs)
        return cls([f for f, _ in pairs], [check_class(p) for _, p in pairs])

    def __len__(self):
        return int(self.frames.size)

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(f), int(p)) for f, p in zip(self.frames, self.preds)]


@dataclass(frozen=True)
class SawtoothFit:
    slope: float
    intercept: float  # reported in [0, 720)
    inlier_mask: np.ndarray = field(repr=False)
    inlier_ratio: float
    iterations_used: int
    refined: bool = False

    @property
    def inlier_count(self) -> int:
        return int(self.inlier_mask.sum())

    def value(self, frame) -> int:
        return sawtooth_value(self, frame)


@dataclass(frozen=True)
class AcceptanceDecision:
    accepted: bool
    reasons: frozenset[str] = frozenset()
    span: float = 0.0


def _round(x):
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5)


def sawtooth_values(slope: float, intercept: float, frames) -> np.ndarray:
    return (_round(intercept + slope * np.asarray(frames, dtype=np.float64)).astype(np.int64)) % N_CLASSES


def sawtooth_value(fit: SawtoothFit, frame) -> int:
    """``round(intercept + slope * frame) mod 720``."""
    return int(sawtooth_values(fit.slope, fit.intercept, [frame])[0])


def _circular(a, b):
    d = np.abs(np.asarray(a, dtype=np.int64) - np.asarray(b, dtype=np.int64)) % N_CLASSES
    return np.minimum(d, N_CLASSES - d)


def inlier_mask(series: PredictionSeries, slope: float, intercept: float, margin: float = DEFAULT_MARGIN):
    model = sawtooth_values(slope, intercept, series.frames)
    return _circular(series.preds, model) <= margin


def count_inliers(series: PredictionSeries, fit: SawtoothFit, margin: float = DEFAULT_MARGIN):
    """Mask and ratio of entries within ``margin`` minutes (inclusive, circular) of the model."""
    mask = inlier_mask(series, fit.slope, fit.intercept, margin)
    return mask, float(mask.mean())


def sample_pairs(rng_seed, n: int, iterations: int):
    """Ordered index pairs drawn uniformly without replacement, one per iteration."""
    rng = np.random.default_rng(rng_seed)
    i = rng.integers(0, n, size=iterations)
    j = rng.integers(0, n - 1, size=iterations)
    j = j + (j >= i)
    return i.astype(np.int64), j.astype(np.int64)


def two_point_model(f1, p1, f2, p2):
    """Slope and intercept through two entries assumed to share a period.

    The second prediction is lifted by a multiple of 720 so that the slope
    has the smallest magnitude, i.e. the wrapped difference lies in
    ``(-360, 360]``.
    """
    d = (p2 - p1) % N_CLASSES
    if d > N_CLASSES / 2:
        d -= N_CLASSES
    slope = d / (f2 - f1)
    return slope, p1 - slope * f1


def _refine(series, slope, intercept, mask):
    f = series.frames[mask].astype(np.float64)
    p = series.preds[mask].astype(np.float64)
    model = intercept + slope * f
    lifted = p + N_CLASSES * np.floor((model - p) / N_CLASSES + 0.5)
    # centred closed form: exact zero slope for a static clock
    fm, pm = f.mean(), lifted.mean()
    s = float(((f - fm) * (lifted - pm)).sum() / ((f - fm) ** 2).sum())
    return s, float(pm - s * fm)


def fit_sawtooth_ransac(
    series: PredictionSeries,
    iterations: int = DEFAULT_ITERATIONS,
    margin: float = DEFAULT_MARGIN,
    rng_seed=0,
    refine: bool = True,
) -> SawtoothFit:
    """Robustly fit ``pred ~ (intercept + slope * frame) mod 720``.

    The winner maximises the inlier count; ties go to the smaller ``|slope|``
    and then the earlier iteration. The search stops early once every entry
    is an inlier. With ``refine`` the winner is re-fitted by least squares on
    its inliers and the refined model is kept unless it loses inliers.

    Raises
    ------
    FitFailed
        If no candidate gathers at least two inliers.
    """
    n = len(series)
    if iterations < 1:
        raise FitFailed("no iterations")
    frames = series.frames.astype(np.float64)
    preds = series.preds.astype(np.float64)
    idx1, idx2 = sample_pairs(rng_seed, n, iterations)
    best_it, best_count, used = kernels.ransac_search(frames, preds, idx1, idx2, float(margin), float(N_CLASSES))
    if best_it < 0 or best_count < 2:
        raise FitFailed(f"best candidate has {max(best_count, 0)} inliers")
    i, j = idx1[best_it], idx2[best_it]
    slope, intercept = two_point_model(frames[i], preds[i], frames[j], preds[j])
    mask = inlier_mask(series, slope, intercept, margin)
    refined = False
    if refine and mask.sum() >= 2:
        s2, b2 = _refine(series, slope, intercept, mask)
        mask2 = inlier_mask(series, s2, b2, margin)
        if mask2.sum() >= mask.sum():
            slope, intercept, mask, refined = s2, b2, mask2, True
    mask.setflags(write=False)
    return SawtoothFit(
        slope=float(slope),
        intercept=float(intercept % N_CLASSES),
        inlier_mask=mask,
        inlier_ratio=float(mask.mean()),
        iterations_used=int(used),
        refined=refined,
    )


def frame_span(frames) -> float:
    """Frames covered: an int count means frames ``0..count-1``."""
    if np.isscalar(frames):
        return max(float(frames) - 1.0, 0.0)
    f = np.asarray(frames)
    return float(f[-1] - f[0]) if f.size else 0.0


def accept_video(
    fit: SawtoothFit | None,
    frames,
    min_inlier_ratio: float = MIN_INLIER_RATIO,
    min_span_minutes: float = MIN_SPAN_MINUTES,
) -> AcceptanceDecision:
    """Keep a video for pseudo-labelling if it is consistent and moves enough.

    ``fit`` is ``None`` when fitting failed. ``frames`` is either the frame
    index array of the series or a frame count. Both thresholds are
    inclusive.
    """
    if fit is None:
        return AcceptanceDecision(False, frozenset({"fit_failed"}), 0.0)
    reasons = set()
    span = abs(fit.slope) * frame_span(frames)
    if fit.inlier_ratio < min_inlier_ratio - _EPS:
        reasons.add("low_inlier_ratio")
    if span < min_span_minutes - _EPS:
        reasons.add("span_too_small")
    return AcceptanceDecision(not reasons, frozenset(reasons), float(span))


def calibrate(series: PredictionSeries, fit: SawtoothFit) -> PredictionSeries:
    """Replace every prediction with the fitted sawtooth value at its frame."""
    return PredictionSeries(series.frames, sawtooth_values(fit.slope, fit.intercept, series.frames))


@dataclass(frozen=True)
class CalibrationReport:
    fit: SawtoothFit | None
    decision: AcceptanceDecision
    calibrated: PredictionSeries | None
    seed: int

    def to_dict(self) -> dict:
        from . import FORMAT_VERSION

        fit = self.fit
        return {
            "format_version": FORMAT_VERSION,
            "slope": None if fit is None else fit.slope,
            "intercept": None if fit is None else fit.intercept,
            "inlier_ratio": 0.0 if fit is None else fit.inlier_ratio,
            "iterations_used": 0 if fit is None else fit.iterations_used,
            "accepted": self.decision.accepted,
            "reasons": sorted(self.decision.reasons),
            "span_minutes": self.decision.span,
            "seed": self.seed,
        }


def run_calibration(
    series: PredictionSeries,
    rng_seed=0,
    iterations: int = DEFAULT_ITERATIONS,
    margin: float = DEFAULT_MARGIN,
    min_inlier_ratio: float = MIN_INLIER_RATIO,
    min_span_minutes: float = MIN_SPAN_MINUTES,
) -> CalibrationReport:
    """Fit, decide, and (when accepted) produce pseudo-labels for one series."""
    try:
        fit = fit_sawtooth_ransac(series, iterations, margin, rng_seed)
    except FitFailed:
        fit = None
    decision = accept_video(fit, series.frames, min_inlier_ratio, min_span_minutes)
    calibrated = calibrate(series, fit) if decision.accepted else None
    return CalibrationReport(fit, decision, calibrated, int(rng_seed))


def sawtooth_svg(series: PredictionSeries, fit: SawtoothFit | None, width: int = 640, height: int = 360) -> str:
    """Scatter of predictions with the fitted sawtooth overlaid, as an SVG document."""
    pad = 40
    f0, f1 = float(series.frames[0]), float(series.frames[-1])
    fspan = max(f1 - f0, 1.0)

    def X(f):
        return pad + (f - f0) / fspan * (width - 2 * pad)

    def Y(v):
        return height - pad - v / N_CLASSES * (height - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
        'fill="none" stroke="#888"/>',
        f'<text x="{width / 2:.1f}" y="{height - 8}" font-size="12" text-anchor="middle">frame</text>',
        f'<text x="12" y="{height / 2:.1f}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 12 {height / 2:.1f})">minutes (mod 720)</text>',
    ]
    for v in (0, 180, 360, 540, 720):
        parts.append(f'<text x="{pad - 4}" y="{Y(v) + 4:.1f}" font-size="10" text-anchor="end">{v}</text>')
    inl = fit.inlier_mask if fit is not None else np.zeros(len(series), dtype=bool)
    for f, p, ok in zip(series.frames, series.preds, inl):
        color = "#1f77b4" if ok else "#d62728"
        parts.append(f'<circle cx="{X(f):.2f}" cy="{Y(p):.2f}" r="2.5" fill="{color}"/>')
    if fit is not None:
        # break the polyline at every wrap so the sawtooth drops vertically
        fs = np.linspace(f0, f1, 600)
        vals = (fit.intercept + fit.slope * fs) % N_CLASSES
        seg: list[str] = []
        for k, (f, v) in enumerate(zip(fs, vals)):
            if k and abs(v - vals[k - 1]) > N_CLASSES / 2:
                parts.append(_polyline(seg))
                seg = []
            seg.append(f"{X(f):.2f},{Y(v):.2f}")
        parts.append(_polyline(seg))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _polyline(points):
    return f'<polyline fill="none" stroke="#2ca02c" stroke-width="1.5" points="{" ".join(points)}"/>'
