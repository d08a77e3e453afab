"""The numba and numpy flavours of every kernel must agree."""

import numpy as np
import pytest

from clockforge import _accel, kernels
from clockforge.homography import random_homography, scale_homography

pytestmark = pytest.mark.skipif(not _accel.NUMBA_AVAILABLE, reason="numba not installed")


def both(name):
    return kernels.IMPLEMENTATIONS[name]


def test_warp_parity(rng):
    nb, npy = both("warp_bilinear")
    src = rng.integers(0, 256, (40, 50, 3)).astype(np.float64)
    for seed in range(5):
        hinv = scale_homography(random_homography(seed), 50).inverse().matrix
        fill = np.array([1.0, 2.0, 3.0])
        a, b = nb(src, hinv, 45, 55, fill), npy(src, hinv, 45, 55, fill)
        assert np.allclose(a, b, atol=1e-9, rtol=0)


def test_hough_parity(rng):
    nb, npy = both("hough_accumulate")
    xs, ys = rng.uniform(0, 80, 300), rng.uniform(0, 60, 300)
    th = np.arange(360) * np.pi / 360
    a = nb(xs, ys, np.cos(th), np.sin(th), 39.5, 29.5, -50.0, 1.0, 101)
    b = npy(xs, ys, np.cos(th), np.sin(th), 39.5, 29.5, -50.0, 1.0, 101)
    assert np.array_equal(a, b) and a.sum() > 0
    empty = np.zeros(0)
    assert np.array_equal(nb(empty, empty, np.cos(th), np.sin(th), 0, 0, -1, 1, 3),
                          npy(empty, empty, np.cos(th), np.sin(th), 0, 0, -1, 1, 3))


def test_circle_parity(rng):
    nb, npy = both("circle_scores")
    w = rng.random((64, 64))
    ang = np.linspace(0, 2 * np.pi, 72, endpoint=False)
    args = (w, np.arange(20.0, 44.0, 2.0), np.arange(22.0, 40.0, 2.0), np.arange(10.0, 30.0), np.cos(ang), np.sin(ang))
    assert np.array_equal(nb(*args), npy(*args))


@pytest.mark.parametrize("seed", range(5))
def test_ransac_parity(seed):
    nb, npy = both("ransac_search")
    r = np.random.default_rng(seed)
    n = 150
    f = np.sort(r.choice(1000, n, replace=False)).astype(np.float64)
    p = np.floor(r.uniform(0, 720) + r.uniform(-5, 5) * f + 0.5) % 720
    noise = r.random(n) < 0.4
    p[noise] = r.integers(0, 720, noise.sum())
    i = r.integers(0, n, 3000)
    j = (i + 1 + r.integers(0, n - 1, 3000)) % n
    assert nb(f, p, i, j, 3.0, 720.0) == npy(f, p, i, j, 3.0, 720.0)


def test_ransac_early_exit_parity():
    nb, npy = both("ransac_search")
    f = np.arange(30, dtype=np.float64)
    p = (2 * f) % 720
    i, j = np.zeros(600, np.int64), np.ones(600, np.int64)
    assert nb(f, p, i, j, 3.0, 720.0) == npy(f, p, i, j, 3.0, 720.0) == (0, 30, 1)


def test_env_flag_selects_numpy(monkeypatch):
    monkeypatch.setenv("CLOCKFORGE_DISABLE_NUMBA", "1")
    assert _accel._env_disabled()
    monkeypatch.setenv("CLOCKFORGE_DISABLE_NUMBA", "0")
    assert not _accel._env_disabled()
    assert _accel.pick(1, 2) == (1 if _accel.USE_NUMBA else 2)
