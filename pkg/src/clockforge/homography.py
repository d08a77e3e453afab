"""Projective transforms on the image plane.

Pixel ``(x, y)`` is column ``x``, row ``y``; integer coordinates sit on pixel
centres. Images are ``uint8`` arrays of shape ``(height, width, 3)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateConfiguration, DegeneratePoint, SingularHomography

_DET_EPS = 1e-9
_DEN_EPS = 1e-9


class Homography:
    """A 3x3 projective transform stored with ``h[2, 2] == 1``."""

    __slots__ = ("_m",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=np.float64).reshape(3, 3)
        if not np.all(np.isfinite(m)):
            raise SingularHomography("homography has non-finite entries")
        if abs(m[2, 2]) < 1e-12:
            raise SingularHomography("h33 is zero; cannot normalise to h33 = 1")
        m = m / m[2, 2]
        if abs(np.linalg.det(m)) <= _DET_EPS:
            raise SingularHomography(f"|det H| = {abs(np.linalg.det(m)):.3g} is not invertible")
        m.setflags(write=False)
        self._m = m

    @classmethod
    def identity(cls) -> Homography:
        return cls(np.eye(3))

    @classmethod
    def translation(cls, tx: float, ty: float) -> Homography:
        return cls([[1, 0, tx], [0, 1, ty], [0, 0, 1]])

    @classmethod
    def rotation(cls, degrees: float, center=(0.0, 0.0)) -> Homography:
        """Rotation by ``degrees`` about ``center`` (clockwise on screen, since y points down)."""
        a = np.deg2rad(degrees)
        c, s = np.cos(a), np.sin(a)
        cx, cy = center
        rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
        return cls(_translate(cx, cy) @ rot @ _translate(-cx, -cy))

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    def inverse(self) -> Homography:
        return Homography(np.linalg.inv(self._m))

    def __matmul__(self, other: Homography) -> Homography:
        return Homography(self._m @ other._m)

    def __eq__(self, other):
        return isinstance(other, Homography) and np.array_equal(self._m, other._m)

    def __hash__(self):
        return hash(self._m.tobytes())

    def allclose(self, other: Homography, atol: float = 1e-9) -> bool:
        return bool(np.allclose(self._m, other._m, rtol=0.0, atol=atol))

    def to_list(self) -> list[float]:
        return [float(v) for v in self._m.ravel()]

    @classmethod
    def from_list(cls, values) -> Homography:
        values = list(values)
        if len(values) != 9:
            raise ValueError(f"expected 9 homography entries, got {len(values)}")
        return cls(values)

    def to_json(self) -> str:
        return json.dumps(self.to_list())

    @classmethod
    def from_json(cls, text: str) -> Homography:
        return cls.from_list(json.loads(text))

    def __repr__(self):
        rows = ", ".join("[" + ", ".join(f"{v:.6g}" for v in row) + "]" for row in self._m)
        return f"Homography([{rows}])"


def _translate(tx, ty):
    return np.array([[1.0, 0.0, tx], [0.0, 1.0, ty], [0.0, 0.0, 1.0]])


def as_homography(h) -> Homography:
    return h if isinstance(h, Homography) else Homography(h)


def warp_point(H, p) -> tuple[float, float]:
    m = as_homography(H).matrix
    x, y = float(p[0]), float(p[1])
    den = m[2, 0] * x + m[2, 1] * y + m[2, 2]
    if abs(den) < _DEN_EPS:
        raise DegeneratePoint(f"point ({x}, {y}) maps to infinity")
    return (
        (m[0, 0] * x + m[0, 1] * y + m[0, 2]) / den,
        (m[1, 0] * x + m[1, 1] * y + m[1, 2]) / den,
    )


def warp_points(H, pts) -> np.ndarray:
    """Vectorised :func:`warp_point` for an ``(n, 2)`` array."""
    m = as_homography(H).matrix
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    hom = np.column_stack([pts, np.ones(len(pts))]) @ m.T
    if np.any(np.abs(hom[:, 2]) < _DEN_EPS):
        raise DegeneratePoint("a point maps to infinity")
    return hom[:, :2] / hom[:, 2:3]


def warp_image(src: np.ndarray, H, out_size=None, fill=(0, 0, 0)) -> np.ndarray:
    """Resample ``src`` so that ``dst(p) = src(H^-1 p)`` with bilinear taps.

    Parameters
    ----------
    src : ndarray, uint8, (h, w, 3)
    H : Homography or 3x3 array
        Maps source pixel coordinates to destination pixel coordinates.
    out_size : (width, height), optional
        Defaults to the source size.
    fill : RGB triple
        Value used for taps that land outside the source.
    """
    src = np.asarray(src)
    if src.ndim != 3 or src.shape[0] < 1 or src.shape[1] < 1:
        raise ValueError(f"expected an (h, w, c) image, got shape {src.shape}")
    try:
        hinv = as_homography(H).inverse().matrix
    except np.linalg.LinAlgError as exc:  # pragma: no cover - caught by det check
        raise SingularHomography(str(exc)) from exc
    if out_size is None:
        out_w, out_h = src.shape[1], src.shape[0]
    else:
        out_w, out_h = int(out_size[0]), int(out_size[1])
    fill = np.broadcast_to(np.asarray(fill, dtype=np.float64), (src.shape[2],)).copy()
    out = kernels.warp_bilinear(
        np.ascontiguousarray(src, dtype=np.float64), np.ascontiguousarray(hinv), out_h, out_w, fill
    )
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def unit_grid_factors(image_size: float, t: float = 1.0):
    """The left and right conjugating factors that move between pixels and the [-1, 1] grid.

    ``left`` sends grid coordinates to pixels (``(-1, -1) -> (0, 0)``),
    ``right`` sends pixels to grid coordinates.
    """
    if image_size < 2:
        raise ValueError(f"image_size must be >= 2, got {image_size}")
    s = image_size / 2.0
    left = np.array([[s, 0.0, s * t], [0.0, s, s * t], [0.0, 0.0, 1.0]])
    right = np.array([[1.0 / s, 0.0, -t], [0.0, 1.0 / s, -t], [0.0, 0.0, 1.0]])
    return left, right


def normalize_to_unit_grid(H, image_size: float = 224) -> Homography:
    """Lift a homography acting on the [-1, 1] grid into pixel coordinates.

    Returns ``left @ H @ right`` with scale ``image_size / 2`` and unit
    translation, so the identity is preserved exactly and products are
    preserved up to rounding.
    """
    left, right = unit_grid_factors(image_size)
    return Homography(left @ as_homography(H).matrix @ right)


def denormalize_from_unit_grid(H, image_size: float = 224) -> Homography:
    """Inverse of :func:`normalize_to_unit_grid`."""
    left, right = unit_grid_factors(image_size)
    return Homography(right @ as_homography(H).matrix @ left)


def scale_homography(H, size: float) -> Homography:
    """Conjugate a unit-square homography into a ``size``-pixel frame.

    The unit square covers the image extent ``[-0.5, size - 0.5]`` because
    integer pixel coordinates are pixel centres.
    """
    s = np.array([[size, 0.0, -0.5], [0.0, size, -0.5], [0.0, 0.0, 1.0]])
    return Homography(s @ as_homography(H).matrix @ np.linalg.inv(s))


def _collinear(a, b, c, eps=1e-9) -> bool:
    area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    scale = max(1.0, np.abs(np.array([a, b, c])).max() ** 2)
    return abs(area) <= eps * scale


def _hartley(pts):
    centroid = pts.mean(axis=0)
    spread = np.sqrt(((pts - centroid) ** 2).sum(axis=1)).mean()
    if spread <= 0:
        raise DegenerateConfiguration("all points coincide")
    k = np.sqrt(2.0) / spread
    return np.array([[k, 0, -k * centroid[0]], [0, k, -k * centroid[1]], [0, 0, 1.0]])


def solve_dlt(src_pts, dst_pts) -> Homography:
    """Homography taking four source points onto four destination points.

    Both point sets are similarity-normalised before the 8x9 system is
    solved through its SVD null vector.
    """
    src = np.asarray(src_pts, dtype=np.float64).reshape(-1, 2)
    dst = np.asarray(dst_pts, dtype=np.float64).reshape(-1, 2)
    if src.shape != (4, 2) or dst.shape != (4, 2):
        raise ValueError("solve_dlt needs exactly four point pairs")
    for pts, name in ((src, "source"), (dst, "destination")):
        for i in range(4):
            a, b, c = (pts[j] for j in range(4) if j != i)
            if _collinear(a, b, c):
                raise DegenerateConfiguration(f"three {name} points are collinear")

    ts, td = _hartley(src), _hartley(dst)
    sn = np.column_stack([src, np.ones(4)]) @ ts.T
    dn = np.column_stack([dst, np.ones(4)]) @ td.T
    rows = []
    for (x, y, _), (u, v, _) in zip(sn, dn):
        rows.append([x, y, 1, 0, 0, 0, -u * x, -u * y, -u])
        rows.append([0, 0, 0, x, y, 1, -v * x, -v * y, -v])
    _, sv, vt = np.linalg.svd(np.array(rows))
    if sv[-2] < 1e-12:
        raise DegenerateConfiguration("DLT system is rank deficient")
    hn = vt[-1].reshape(3, 3)
    m = np.linalg.inv(td) @ hn @ ts
    try:
        return Homography(m)
    except SingularHomography as exc:
        raise DegenerateConfiguration(str(exc)) from exc


@dataclass(frozen=True)
class PerspectiveParams:
    """Ranges for :func:`random_homography`, in unit-square coordinates.

    ``max_corner_shift`` is the largest per-axis corner displacement as a
    fraction of the image side; ``max_rotation_deg`` bounds the in-plane
    rotation about the square's centre.
    """

    max_corner_shift: float = 0.15
    max_rotation_deg: float = 30.0

    def __post_init__(self):
        if not 0 <= self.max_corner_shift < 0.5:
            raise ValueError("max_corner_shift must be in [0, 0.5)")
        if not 0 <= self.max_rotation_deg <= 180:
            raise ValueError("max_rotation_deg must be in [0, 180]")


UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
_MAX_ATTEMPTS = 100


def random_homography(rng_seed, params: PerspectiveParams = PerspectiveParams()) -> Homography:
    """Random mild perspective on the unit square.

    The four corners of ``[0, 1]^2`` are displaced by i.i.d. uniform offsets,
    the resulting quad is solved by DLT, and a uniform in-plane rotation about
    ``(0.5, 0.5)`` is applied first. Use :func:`scale_homography` to move the
    result into pixel coordinates.
    """
    rng = np.random.default_rng(rng_seed)
    d = params.max_corner_shift
    for _ in range(_MAX_ATTEMPTS):
        shift = rng.uniform(-d, d, size=(4, 2)) if d > 0 else np.zeros((4, 2))
        angle = (
            rng.uniform(-params.max_rotation_deg, params.max_rotation_deg)
            if params.max_rotation_deg > 0
            else 0.0
        )
        try:
            persp = solve_dlt(UNIT_SQUARE, UNIT_SQUARE + shift) if shift.any() else Homography.identity()
            H = persp @ Homography.rotation(angle, center=(0.5, 0.5))
        except (DegenerateConfiguration, SingularHomography):
            continue
        if abs(np.linalg.det(H.matrix)) > _DET_EPS:
            return H
    raise DegenerateConfiguration(f"no invertible homography after {_MAX_ATTEMPTS} attempts")
