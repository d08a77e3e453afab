"""Procedural analog-clock generator with labelled time and warp.

A sample is produced by the fixed pipeline
``style -> time -> render -> artefacts -> perspective warp -> augment``.
Every random draw comes from a sub-seed derived from ``(master seed, index)``,
so samples can be generated in any order or in parallel and regenerated from
their record.

Pixel-valued style fields (thicknesses, gaps, font size) are expressed for a
224 px canvas and scaled linearly for other sizes. Parameter ranges live in
``data/style_ranges.json``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np
from scipy.ndimage import gaussian_filter

from .homography import Homography, PerspectiveParams, random_homography, scale_homography, warp_image
from .raster import (
    ROMAN,
    Canvas,
    Capsule,
    Polygon,
    SuperEllipse,
    hard_mask,
    luma,
    text_strokes,
)
from .timecore import N_CLASSES, ClockTime, decode_class, encode_time, hand_angles

HAND_NAMES = ("hour", "minute", "second", "alarm")
# later hands are drawn on top
_DRAW_ORDER = ("alarm", "hour", "minute", "second")


@lru_cache(maxsize=1)
def load_ranges() -> dict:
    text = resources.files("clockforge").joinpath("data/style_ranges.json").read_text(encoding="utf-8")
    return json.loads(text)


# ---------------------------------------------------------------------------
# style
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HandStyle:
    length: float  # fraction of the face radius
    back_length: float  # fraction of the face radius behind the pivot
    thickness: float  # px at 224
    color: tuple[int, int, int]
    arrow: bool = False
    arrow_tip_length: float = 0.0
    arrow_size: float = 0.0


@dataclass(frozen=True)
class ClockStyle:
    background_color: tuple[int, int, int]
    face_size: float
    face_shape: str
    face_color: tuple[int, int, int]
    border_thickness: float
    border_color: tuple[int, int, int]
    tick_mode: str
    tick_gap: float
    tick_length: float
    tick_thickness: float
    tick_color: tuple[int, int, int]
    numerals: str
    numeral_gap: float
    font_size: float
    font_thickness: float
    numeral_color: tuple[int, int, int]
    hands: dict = field(default_factory=dict)
    face_aspect: float = 1.0
    distractor_seed: int = 0

    def __post_init__(self):
        if self.face_shape not in ("circle", "rounded-square", "ellipse"):
            raise ValueError(f"unknown face_shape {self.face_shape!r}")
        if self.tick_mode not in ("none", "hour-only", "every-minute"):
            raise ValueError(f"unknown tick_mode {self.tick_mode!r}")
        if self.numerals not in ("none", "arabic", "roman"):
            raise ValueError(f"unknown numerals {self.numerals!r}")
        if not {"hour", "minute"} <= set(self.hands) <= set(HAND_NAMES):
            raise ValueError("hands must include hour and minute and only known hand names")
        lo, hi = load_ranges()["style"]["face_size"]
        if not lo <= self.face_size <= hi:
            raise ValueError(f"face_size must be in [{lo}, {hi}]")
        if self.face_aspect <= 0 or self.face_aspect > 1:
            raise ValueError("face_aspect must be in (0, 1]")
        if self.hands["minute"].length < self.hands["hour"].length + 0.1 - 1e-12:
            raise ValueError("minute hand must be at least 0.1 face radius longer than the hour hand")
        for name, hand in self.hands.items():
            if hand.length <= 0 or hand.thickness <= 0:
                raise ValueError(f"{name} hand needs positive length and thickness")
        for name in ("background_color", "face_color", "border_color", "tick_color", "numeral_color"):
            _check_rgb(getattr(self, name), name)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hands"] = {k: asdict(v) for k, v in self.hands.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ClockStyle:
        d = dict(d)
        hands = {}
        for k, v in d.pop("hands").items():
            v = dict(v)
            v["color"] = tuple(v["color"])
            hands[k] = HandStyle(**v)
        for k, v in list(d.items()):
            if k.endswith("_color"):
                d[k] = tuple(v)
        return cls(hands=hands, **d)


def _check_rgb(c, name):
    if len(c) != 3 or any(not 0 <= int(v) <= 255 for v in c):
        raise ValueError(f"{name} is not a valid RGB triple: {c!r}")


def simple_style() -> ClockStyle:
    """Clean canonical design used by the geometric reader checks."""
    black = (0, 0, 0)
    return ClockStyle(
        background_color=(200, 200, 200),
        face_size=0.9,
        face_shape="circle",
        face_color=(255, 255, 255),
        border_thickness=4,
        border_color=black,
        tick_mode="every-minute",
        tick_gap=2,
        tick_length=5,
        tick_thickness=1.5,
        tick_color=black,
        numerals="arabic",
        numeral_gap=3,
        font_size=12,
        font_thickness=1.6,
        numeral_color=black,
        hands={
            "hour": HandStyle(length=0.45, back_length=0.1, thickness=7, color=black),
            "minute": HandStyle(length=0.68, back_length=0.1, thickness=4.5, color=black),
        },
    )


def _uniform(rng, lo_hi):
    lo, hi = lo_hi
    return float(lo) if lo == hi else float(rng.uniform(lo, hi))


def _color(rng):
    return tuple(int(v) for v in rng.integers(0, 256, size=3))


def _contrasting_color(rng, against, min_contrast):
    ref = float(luma(np.array(against)))
    for _ in range(50):
        c = _color(rng)
        if abs(float(luma(np.array(c))) - ref) >= min_contrast:
            return c
    return (0, 0, 0) if ref > 127.5 else (255, 255, 255)


def sample_style(rng_seed, preset: str = "full") -> ClockStyle:
    """Draw a clock design.

    ``simple`` ignores the seed and returns :func:`simple_style`. ``full``
    draws every field uniformly from the shipped range file.
    """
    if preset == "simple":
        return simple_style()
    if preset != "full":
        raise ValueError(f"unknown preset {preset!r}")
    r = load_ranges()["style"]
    rng = np.random.default_rng(rng_seed)
    contrast = r["min_hand_contrast"]

    face_color = _color(rng)
    style = dict(
        background_color=_color(rng),
        face_size=_uniform(rng, r["face_size"]),
        face_shape=str(rng.choice(r["face_shape"])),
        face_aspect=_uniform(rng, r["face_aspect"]),
        face_color=face_color,
        border_thickness=_uniform(rng, r["border_thickness"]),
        border_color=_color(rng),
        tick_mode=str(rng.choice(r["tick_mode"])),
        tick_gap=_uniform(rng, r["tick_gap"]),
        tick_length=_uniform(rng, r["tick_length"]),
        tick_thickness=_uniform(rng, r["tick_thickness"]),
        tick_color=_contrasting_color(rng, face_color, contrast),
        numerals=str(rng.choice(r["numerals"])),
        numeral_gap=_uniform(rng, r["numeral_gap"]),
        font_size=_uniform(rng, r["font_size"]),
        font_thickness=_uniform(rng, r["font_thickness"]),
        numeral_color=_contrasting_color(rng, face_color, contrast),
    )
    if style["face_shape"] != "ellipse":
        style["face_aspect"] = 1.0

    names = r["hand_sets"][int(rng.integers(len(r["hand_sets"])))]
    hour_len = _uniform(rng, r["hour_length"])
    minute_len = min(hour_len + _uniform(rng, r["minute_length_margin"]), 0.95)
    lengths = {
        "hour": hour_len,
        "minute": minute_len,
        "second": _uniform(rng, r["second_length"]),
        "alarm": _uniform(rng, r["alarm_length"]),
    }
    hand_color = _contrasting_color(rng, face_color, contrast)
    hands = {}
    for name in HAND_NAMES:
        if name not in names:
            continue
        arrow = bool(rng.random() < r["arrow_probability"])
        thickness = _uniform(rng, r["hand_thickness"][name])
        # hour and minute share a colour on most real clocks; extras get their own
        color = hand_color if name in ("hour", "minute") else _contrasting_color(rng, face_color, contrast)
        hands[name] = HandStyle(
            length=lengths[name],
            back_length=_uniform(rng, r["back_length"]),
            thickness=thickness,
            color=color,
            arrow=arrow,
            arrow_tip_length=_uniform(rng, r["arrow_tip_length"]) if arrow else 0.0,
            arrow_size=max(_uniform(rng, r["arrow_size"]), thickness) if arrow else 0.0,
        )
    style["hands"] = hands
    style["distractor_seed"] = int(rng.integers(0, 2**31 - 1))
    return ClockStyle(**style)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FaceGeometry:
    center: tuple[float, float]
    outer: SuperEllipse
    inner: SuperEllipse
    hand_radius: float  # hand lengths are fractions of this
    scale: float  # px multiplier relative to the 224 reference


def face_geometry(style: ClockStyle, size: int) -> FaceGeometry:
    k = size / load_ranges()["reference_size"]
    c = ((size - 1) / 2.0, (size - 1) / 2.0)
    R = style.face_size * size / 2.0
    power = {"circle": 2.0, "ellipse": 2.0, "rounded-square": load_ranges()["style"]["rounded_square_power"]}
    outer = SuperEllipse(c, R, R * style.face_aspect, power[style.face_shape])
    inner = outer.scaled(style.border_thickness * k)
    return FaceGeometry(c, outer, inner, min(inner.rx, inner.ry), k)


def _direction(angle_deg):
    """Unit vector for a clock angle (y grows downwards).

    The angle is folded into [0, 90] before calling sin/cos so that mirrored
    angles give exactly mirrored vectors and the axes are exact.
    """
    a = angle_deg % 360.0
    sx = -1.0 if a > 180.0 else 1.0
    a = 360.0 - a if a > 180.0 else a
    sy = 1.0 if a > 90.0 else -1.0
    b = 180.0 - a if a > 90.0 else a
    if b == 90.0:
        return sx, 0.0
    if b == 0.0:
        return 0.0, sy
    r = math.radians(b)
    return sx * math.sin(r), sy * math.cos(r)


def _bar(p0, p1, half_width) -> Polygon:
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    L = math.hypot(dx, dy) or 1.0
    nx, ny = -dy / L * half_width, dx / L * half_width
    return Polygon(((p0[0] + nx, p0[1] + ny), (p1[0] + nx, p1[1] + ny),
                    (p1[0] - nx, p1[1] - ny), (p0[0] - nx, p0[1] - ny)))


def extra_hand_angles(style: ClockStyle, time: ClockTime) -> dict[str, float]:
    """Directions of the second and alarm hands; random, but fixed per (style, time)."""
    rng = np.random.default_rng([style.distractor_seed, encode_time(time)])
    angles = rng.uniform(0.0, 360.0, size=2)
    return {"second": float(angles[0]), "alarm": float(angles[1])}


def hand_angle_map(style: ClockStyle, time: ClockTime) -> dict[str, float]:
    a = hand_angles(time)
    angles = {"hour": a.hour_angle, "minute": a.minute_angle}
    angles.update(extra_hand_angles(style, time))
    return {k: angles[k] for k in style.hands}


def hand_shapes(style: ClockStyle, time: ClockTime, size: int) -> dict[str, tuple[Polygon, ...]]:
    """Polygons outlining each hand of the rendered clock, keyed by hand name."""
    geo = face_geometry(style, size)
    cx, cy = geo.center
    out = {}
    for name, angle in hand_angle_map(style, time).items():
        hand = style.hands[name]
        ux, uy = _direction(angle)
        L = hand.length * geo.hand_radius
        B = hand.back_length * geo.hand_radius
        half = hand.thickness * geo.scale / 2.0
        tip = min(hand.arrow_tip_length * geo.scale, 0.5 * L) if hand.arrow else 0.0
        base = (cx + (L - tip) * ux, cy + (L - tip) * uy)
        shapes = [_bar((cx - B * ux, cy - B * uy), base, half)]
        if hand.arrow:
            w = max(hand.arrow_size * geo.scale, hand.thickness * geo.scale) / 2.0
            shapes.append(Polygon(((base[0] - w * uy, base[1] + w * ux),
                                   (cx + L * ux, cy + L * uy),
                                   (base[0] + w * uy, base[1] - w * ux))))
        out[name] = tuple(shapes)
    return out


def render_clock(style: ClockStyle, time: ClockTime, size: int = 224) -> np.ndarray:
    """Fronto-parallel clock with '12' at the top, as a ``(size, size, 3)`` uint8 array."""
    geo = face_geometry(style, size)
    k = geo.scale
    cv = Canvas(size, size, style.background_color)
    if style.border_thickness > 0:
        cv.draw(geo.outer, style.border_color)
    cv.draw(geo.inner, style.face_color)

    tick_extent = 0.0
    if style.tick_mode != "none":
        step = 1 if style.tick_mode == "every-minute" else 5
        for m in range(0, 60, step):
            major = m % 5 == 0 and style.tick_mode == "every-minute"
            length = style.tick_length * k * (1.6 if major else 1.0)
            thick = style.tick_thickness * k * (1.5 if major else 1.0)
            angle = 6.0 * m
            ux, uy = _direction(angle)
            r_out = geo.inner.boundary_distance(angle) - style.tick_gap * k
            r_in = max(r_out - length, 0.0)
            cv.draw(_bar((geo.center[0] + r_in * ux, geo.center[1] + r_in * uy),
                         (geo.center[0] + r_out * ux, geo.center[1] + r_out * uy), thick / 2.0),
                    style.tick_color)
            tick_extent = max(tick_extent, style.tick_gap * k + length)

    if style.numerals != "none":
        # oversized glyphs on a small face would bury the pivot
        fs = min(style.font_size * k, 0.2 * geo.hand_radius)
        for h in range(1, 13):
            label = str(h) if style.numerals == "arabic" else ROMAN[h % 12]
            angle = 30.0 * h
            ux, uy = _direction(angle)
            width = fs * (0.6 * len(label) + 0.15 * (len(label) - 1))
            # pull the glyph box fully inside the tick ring along this direction
            reach = 0.5 * (abs(ux) * width + abs(uy) * fs)
            r = geo.inner.boundary_distance(angle) - tick_extent - style.numeral_gap * k - reach
            r = max(r, 0.0)
            for stroke in text_strokes(label, (geo.center[0] + r * ux, geo.center[1] + r * uy),
                                       fs, style.font_thickness * k):
                cv.draw(stroke, style.numeral_color)

    shapes = hand_shapes(style, time, size)
    for name in _DRAW_ORDER:
        if name in shapes:
            for s in shapes[name]:
                cv.draw(s, style.hands[name].color)
    hub = 0.6 * max(style.hands["hour"].thickness, style.hands["minute"].thickness) * k
    cv.draw(SuperEllipse(geo.center, hub, hub), style.hands["hour"].color)
    return cv.to_image()


# ---------------------------------------------------------------------------
# artefacts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShadowSpec:
    hand: str
    offset: tuple[float, float]
    opacity: float
    color: tuple[int, int, int]
    shapes: tuple[Polygon, ...]

    def __post_init__(self):
        if not 0 < self.opacity <= 1:
            raise ValueError("shadow opacity must be in (0, 1]")


@dataclass(frozen=True)
class LineSpec:
    p0: tuple[float, float]
    p1: tuple[float, float]
    thickness: float
    color: tuple[int, int, int]


@dataclass(frozen=True)
class ArtefactSpec:
    shadow: ShadowSpec | None = None
    lines: tuple[LineSpec, ...] = ()

    def __post_init__(self):
        if len(self.lines) > 5:
            raise ValueError("at most 5 random lines")

    @property
    def empty(self) -> bool:
        return self.shadow is None and not self.lines

    def to_dict(self) -> dict:
        shadow = None
        if self.shadow is not None:
            s = self.shadow
            shadow = {
                "hand": s.hand,
                "offset": list(s.offset),
                "opacity": s.opacity,
                "color": list(s.color),
                "shapes": [[list(p) for p in poly.points] for poly in s.shapes],
            }
        lines = [
            {"p0": list(l.p0), "p1": list(l.p1), "thickness": l.thickness, "color": list(l.color)}
            for l in self.lines
        ]
        return {"shadow": shadow, "lines": lines}

    @classmethod
    def from_dict(cls, d: dict) -> ArtefactSpec:
        shadow = None
        if d.get("shadow"):
            s = d["shadow"]
            shadow = ShadowSpec(
                hand=s["hand"],
                offset=tuple(s["offset"]),
                opacity=s["opacity"],
                color=tuple(s["color"]),
                shapes=tuple(Polygon(tuple(tuple(p) for p in poly)) for poly in s["shapes"]),
            )
        lines = tuple(
            LineSpec(tuple(l["p0"]), tuple(l["p1"]), l["thickness"], tuple(l["color"])) for l in d.get("lines", [])
        )
        return cls(shadow, lines)


def sample_artefacts(rng_seed, style: ClockStyle, time: ClockTime, size: int = 224) -> ArtefactSpec:
    r = load_ranges()["artefacts"]
    rng = np.random.default_rng(rng_seed)
    k = size / load_ranges()["reference_size"]
    shadow = None
    if rng.random() < r["shadow_probability"]:
        shapes = hand_shapes(style, time, size)
        name = str(rng.choice(sorted(shapes)))
        dist = _uniform(rng, r["shadow_offset"]) * k
        phi = rng.uniform(0, 2 * np.pi)
        gray = int(rng.integers(r["shadow_color"][0], r["shadow_color"][1] + 1))
        shadow = ShadowSpec(
            hand=name,
            offset=(float(dist * np.cos(phi)), float(dist * np.sin(phi))),
            opacity=_uniform(rng, r["shadow_opacity"]),
            color=(gray, gray, gray),
            shapes=shapes[name],
        )
    n_lines = int(rng.integers(0, r["max_lines"] + 1))
    lines = []
    for _ in range(n_lines):
        ends = rng.uniform(-0.25 * size, 1.25 * size, size=(2, 2))
        lines.append(LineSpec(
            (float(ends[0, 0]), float(ends[0, 1])),
            (float(ends[1, 0]), float(ends[1, 1])),
            _uniform(rng, r["line_thickness"]) * k,
            _color(rng),
        ))
    return ArtefactSpec(shadow, tuple(lines))


def apply_artefacts(img: np.ndarray, spec: ArtefactSpec) -> np.ndarray:
    """Draw a hand shadow and random lines with hard edges.

    The shadow blends ``color`` over the offset hand silhouette with the
    given opacity; lines overwrite every pixel whose centre is within
    ``thickness / 2`` of the segment.
    """
    img = np.asarray(img)
    if spec.empty:
        return img.copy()
    h, w = img.shape[:2]
    out = img.astype(np.float64)
    if spec.shadow is not None:
        s = spec.shadow
        mask = np.zeros((h, w), dtype=bool)
        for poly in s.shapes:
            mask |= hard_mask(poly.translated(*s.offset), w, h)
        out[mask] = out[mask] * (1.0 - s.opacity) + np.asarray(s.color, dtype=np.float64) * s.opacity
    for line in spec.lines:
        mask = hard_mask(Capsule(line.p0, line.p1, line.thickness / 2.0), w, h)
        out[mask] = line.color
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


# ---------------------------------------------------------------------------
# augmentation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AugmentParams:
    """Ranges for blur sigma and per-channel gain/bias; equal ends pin a value."""

    blur_sigma: tuple[float, float] = (0.0, 2.0)
    gain: tuple[float, float] = (0.8, 1.2)
    bias: tuple[float, float] = (-20.0, 20.0)

    @classmethod
    def fixed(cls, sigma=0.0, gain=1.0, bias=0.0) -> AugmentParams:
        return cls((sigma, sigma), (gain, gain), (bias, bias))


MILD_JITTER = AugmentParams(blur_sigma=(0.0, 0.6), gain=(1.0, 1.0), bias=(-8.0, 8.0))


@dataclass(frozen=True)
class AugmentState:
    sigma: float
    gain: tuple[float, float, float]
    bias: tuple[float, float, float]

    def to_dict(self):
        return {"sigma": self.sigma, "gain": list(self.gain), "bias": list(self.bias)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["sigma"], tuple(d["gain"]), tuple(d["bias"]))


def sample_augmentation(rng_seed, params: AugmentParams = AugmentParams()) -> AugmentState:
    rng = np.random.default_rng(rng_seed)
    sigma = _uniform(rng, params.blur_sigma)
    gain = tuple(_uniform(rng, params.gain) for _ in range(3))
    bias = tuple(_uniform(rng, params.bias) for _ in range(3))
    return AugmentState(sigma, gain, bias)


def apply_augmentation(img: np.ndarray, state: AugmentState) -> np.ndarray:
    x = np.asarray(img, dtype=np.float64)
    if state.sigma > 0:
        x = gaussian_filter(x, sigma=(state.sigma, state.sigma, 0.0), mode="reflect", truncate=3.0)
    x = x * np.asarray(state.gain) + np.asarray(state.bias)
    return np.clip(np.floor(x + 0.5), 0, 255).astype(np.uint8)


def augment(img: np.ndarray, rng_seed, params: AugmentParams = AugmentParams()) -> np.ndarray:
    """Gaussian blur then per-channel affine colour jitter, clamped to [0, 255]."""
    return apply_augmentation(img, sample_augmentation(rng_seed, params))


# ---------------------------------------------------------------------------
# dataset generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GenerateConfig:
    preset: str = "full"
    size: int = 224
    warp: bool = True
    artefacts: bool = True
    augment: bool = True


@dataclass
class SynSample:
    index: int
    seed: int
    image: np.ndarray
    canonical: np.ndarray  # after artefacts, before warp and augmentation
    time: ClockTime
    homography: Homography
    style: ClockStyle
    artefacts: ArtefactSpec
    augmentation: AugmentState | None

    def meta(self) -> dict:
        return {
            "index": self.index,
            "seed": self.seed,
            "hour": self.time.hour,
            "minute": self.time.minute,
            "class": encode_time(self.time),
            "homography": self.homography.to_list(),
            "style": self.style.to_dict(),
            "artefacts": self.artefacts.to_dict(),
            "augmentation": None if self.augmentation is None else self.augmentation.to_dict(),
        }


def stage_seeds(rng_seed: int, index: int, n: int = 5) -> list[int]:
    """Independent per-stage seeds for sample ``index`` of a dataset."""
    return [int(v) for v in np.random.SeedSequence([int(rng_seed), int(index)]).generate_state(n)]


def sample_time_class(rng_seed: int, index: int) -> int:
    """The uniformly drawn time class of sample ``index``, without rendering it."""
    return int(np.random.default_rng(stage_seeds(rng_seed, index)[1]).integers(0, N_CLASSES))


def generate_sample(rng_seed: int, index: int, config: GenerateConfig = GenerateConfig()) -> SynSample:
    s_style, _, s_art, s_warp, s_aug = stage_seeds(rng_seed, index)
    style = sample_style(s_style, config.preset)
    time = decode_class(sample_time_class(rng_seed, index))
    img = render_clock(style, time, config.size)
    art = sample_artefacts(s_art, style, time, config.size) if config.artefacts else ArtefactSpec()
    canonical = apply_artefacts(img, art)
    if config.warp:
        ranges = load_ranges()["perspective"]
        H = scale_homography(random_homography(s_warp, PerspectiveParams(**ranges)), config.size)
        img = warp_image(canonical, H, (config.size, config.size), fill=style.background_color)
    else:
        H = Homography.identity()
        img = canonical.copy()
    state = None
    if config.augment:
        r = load_ranges()["augment"]
        state = sample_augmentation(s_aug, AugmentParams(tuple(r["blur_sigma"]), tuple(r["gain"]), tuple(r["bias"])))
        img = apply_augmentation(img, state)
    return SynSample(index, int(rng_seed), img, canonical, time, H, style, art, state)


def generate(rng_seed: int, n: int, config: GenerateConfig = GenerateConfig(), threads: int = 1) -> list[SynSample]:
    """``n`` independent samples; output is identical for any ``threads``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if threads <= 1:
        return [generate_sample(rng_seed, i, config) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda i: generate_sample(rng_seed, i, config), range(n)))


@dataclass(frozen=True)
class TimelapseTruth:
    frames: np.ndarray
    times: np.ndarray  # class shown in each frame
    schedule: np.ndarray  # round(start + rate * i) mod 720
    outlier_mask: np.ndarray


def timelapse_schedule(start: int, rate: float, frames: int) -> np.ndarray:
    i = np.arange(frames, dtype=np.float64)
    return (np.floor(start + rate * i + 0.5).astype(np.int64)) % N_CLASSES


def decoy_hands(rng_seed, style: ClockStyle, size: int = 224, count: int = 2) -> ArtefactSpec:
    """Lines from the pivot at random angles, longer than the real minute hand."""
    geo = face_geometry(style, size)
    hand = style.hands["minute"]
    rng = np.random.default_rng(rng_seed)
    cx, cy = geo.center
    lines = []
    for _ in range(count):
        ux, uy = _direction(rng.uniform(0.0, 360.0))
        r = geo.hand_radius * min(hand.length * rng.uniform(1.05, 1.25), 0.98)
        lines.append(LineSpec((cx, cy), (cx + r * ux, cy + r * uy), hand.thickness * geo.scale, hand.color))
    return ArtefactSpec(lines=tuple(lines))


def generate_timelapse(
    rng_seed,
    style: ClockStyle,
    start: int,
    rate: float,
    frames: int,
    outlier_fraction: float = 0.0,
    jitter: AugmentParams | None = MILD_JITTER,
    size: int = 224,
):
    """Frames of a clock advancing ``rate`` minutes per frame.

    Every frame shows the scheduled time. A fraction of frames, flagged in
    ``outlier_mask``, also carry decoy hands (long strokes from the pivot in
    the minute hand's colour) so a reader is likely to misread them.
    ``jitter`` applies a mild per-frame augmentation.
    """
    if rate <= 0:
        raise ValueError("rate must be > 0")
    if not 0 <= outlier_fraction < 1:
        raise ValueError("outlier_fraction must be in [0, 1)")
    if frames < 1:
        raise ValueError("frames must be >= 1")
    schedule = timelapse_schedule(start, rate, frames)
    rng = np.random.default_rng(rng_seed)
    n_out = int(math.floor(outlier_fraction * frames + 0.5))
    outlier_mask = np.zeros(frames, dtype=bool)
    outlier_mask[rng.permutation(frames)[:n_out]] = True
    frame_seeds = rng.integers(0, 2**31 - 1, size=frames)

    cache: dict[int, np.ndarray] = {}
    images = []
    for i in range(frames):
        c = int(schedule[i])
        if c not in cache:
            cache[c] = render_clock(style, decode_class(c), size)
        img = cache[c]
        if outlier_mask[i]:
            img = apply_artefacts(img, decoy_hands(int(frame_seeds[i]), style, size))
        if jitter is not None:
            img = augment(img, int(frame_seeds[i]), jitter)
        images.append(img)
    truth = TimelapseTruth(np.arange(frames), schedule.copy(), schedule, outlier_mask)
    return images, truth


__all__ = [
    "AugmentParams", "AugmentState", "ArtefactSpec", "ClockStyle", "GenerateConfig", "HandStyle", "LineSpec",
    "MILD_JITTER", "ShadowSpec", "SynSample", "TimelapseTruth", "apply_artefacts", "apply_augmentation",
    "augment", "decoy_hands", "face_geometry", "generate", "generate_sample", "generate_timelapse", "hand_shapes",
    "render_clock", "sample_artefacts", "sample_time_class", "sample_augmentation", "sample_style", "simple_style",
]
