"""Time each kernel in its numba and numpy flavour on realistic input sizes.

    python benchmarks/bench_kernels.py [--repeat 5]

The numba timings exclude compilation (one warm-up call first).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from clockforge import _accel, kernels
from clockforge.homography import random_homography, scale_homography


def _inputs(rng):
    size = 224
    src = rng.integers(0, 256, (size, size, 3)).astype(np.float64)
    hinv = scale_homography(random_homography(1), size).inverse().matrix
    warp = (src, hinv, size, size, np.zeros(3))

    xs, ys = rng.uniform(0, size, 4000), rng.uniform(0, size, 4000)
    th = np.arange(360) * np.pi / 360
    diag = float(np.hypot(size, size))
    hough = (xs, ys, np.cos(th), np.sin(th), size / 2 - 0.5, size / 2 - 0.5, -diag / 2, 1.0, int(diag) + 1)

    ang = np.linspace(0, 2 * np.pi, 180, endpoint=False)
    centres = np.arange(80.0, 144.0, 2.0)
    circle = (rng.random((size, size)), centres, centres, np.arange(40.0, 110.0), np.cos(ang), np.sin(ang))

    n, iters = 300, 10_000
    f = np.arange(n, dtype=np.float64)
    p = np.floor(rng.uniform(0, 720) + 3.0 * f + 0.5) % 720
    noise = rng.random(n) < 0.3
    p[noise] = rng.integers(0, 720, noise.sum())
    i = rng.integers(0, n, iters)
    j = (i + 1 + rng.integers(0, n - 1, iters)) % n
    ransac = (f, p, i, j, 3.0, 720.0)
    return {"warp_bilinear": warp, "hough_accumulate": hough, "circle_scores": circle, "ransac_search": ransac}


def _best(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args(argv)
    if not _accel.NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")

    inputs = _inputs(np.random.default_rng(a.seed))
    print(f"{'kernel':<18} {'numba ms':>10} {'numpy ms':>10} {'speed-up':>9}")
    for name, (nb, npy) in kernels.IMPLEMENTATIONS.items():
        args = inputs[name]
        nb(*args)  # compile
        t_nb, t_np = _best(nb, args, a.repeat), _best(npy, args, a.repeat)
        print(f"{name:<18} {1e3 * t_nb:>10.3f} {1e3 * t_np:>10.3f} {t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
