"""Inner loops, each in a numba and a numpy flavour.

The two flavours perform the same floating-point operations in the same order
so their outputs agree (bit-exactly for the integer-valued kernels; to the
last ulp for the warp sampler). Public callers go through the module-level
names at the bottom, which honour ``CLOCKFORGE_DISABLE_NUMBA``.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import jit, pick

# ---------------------------------------------------------------------------
# bilinear inverse-mapping warp
# ---------------------------------------------------------------------------


@jit
def _warp_bilinear_nb(src, hinv, out_h, out_w, fill):
    h, w, c = src.shape
    out = np.empty((out_h, out_w, c), dtype=np.float64)
    for y in range(out_h):
        for x in range(out_w):
            den = hinv[2, 0] * x + hinv[2, 1] * y + hinv[2, 2]
            if abs(den) < 1e-12:
                for k in range(c):
                    out[y, x, k] = fill[k]
                continue
            sx = (hinv[0, 0] * x + hinv[0, 1] * y + hinv[0, 2]) / den
            sy = (hinv[1, 0] * x + hinv[1, 1] * y + hinv[1, 2]) / den
            if not (sx > -1.0 and sx < w and sy > -1.0 and sy < h):
                for k in range(c):
                    out[y, x, k] = fill[k]
                continue
            x0 = math.floor(sx)
            y0 = math.floor(sy)
            fx = sx - x0
            fy = sy - y0
            x0 = int(x0)
            y0 = int(y0)
            for k in range(c):
                v00 = fill[k]
                v01 = fill[k]
                v10 = fill[k]
                v11 = fill[k]
                if 0 <= y0 < h:
                    if 0 <= x0 < w:
                        v00 = src[y0, x0, k]
                    if 0 <= x0 + 1 < w:
                        v01 = src[y0, x0 + 1, k]
                if 0 <= y0 + 1 < h:
                    if 0 <= x0 < w:
                        v10 = src[y0 + 1, x0, k]
                    if 0 <= x0 + 1 < w:
                        v11 = src[y0 + 1, x0 + 1, k]
                top = v00 * (1.0 - fx) + v01 * fx
                bot = v10 * (1.0 - fx) + v11 * fx
                out[y, x, k] = top * (1.0 - fy) + bot * fy
    return out


def _warp_bilinear_np(src, hinv, out_h, out_w, fill):
    h, w, c = src.shape
    ys, xs = np.mgrid[0:out_h, 0:out_w].astype(np.float64)
    den = hinv[2, 0] * xs + hinv[2, 1] * ys + hinv[2, 2]
    bad = np.abs(den) < 1e-12
    safe = np.where(bad, 1.0, den)
    sx = (hinv[0, 0] * xs + hinv[0, 1] * ys + hinv[0, 2]) / safe
    sy = (hinv[1, 0] * xs + hinv[1, 1] * ys + hinv[1, 2]) / safe
    outside = bad | ~((sx > -1.0) & (sx < w) & (sy > -1.0) & (sy < h))
    sx = np.where(outside, 0.0, sx)
    sy = np.where(outside, 0.0, sy)
    x0 = np.floor(sx)
    y0 = np.floor(sy)
    fx = (sx - x0)[..., None]
    fy = (sy - y0)[..., None]
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)

    # pad by one pixel of fill on every side so the four taps never go out of range
    padded = np.empty((h + 2, w + 2, c), dtype=np.float64)
    padded[...] = fill
    padded[1:-1, 1:-1] = src
    v00 = padded[y0 + 1, x0 + 1]
    v01 = padded[y0 + 1, x0 + 2]
    v10 = padded[y0 + 2, x0 + 1]
    v11 = padded[y0 + 2, x0 + 2]
    top = v00 * (1.0 - fx) + v01 * fx
    bot = v10 * (1.0 - fx) + v11 * fx
    out = top * (1.0 - fy) + bot * fy
    out[outside] = fill
    return out


# ---------------------------------------------------------------------------
# Hough accumulator
# ---------------------------------------------------------------------------


@jit
def _hough_accumulate_nb(xs, ys, cos_t, sin_t, cx, cy, rho_min, rho_res, n_rho):
    n_theta = cos_t.shape[0]
    acc = np.zeros((n_rho, n_theta), dtype=np.int64)
    for i in range(xs.shape[0]):
        dx = xs[i] - cx
        dy = ys[i] - cy
        for t in range(n_theta):
            r = int(math.floor((dx * cos_t[t] + dy * sin_t[t] - rho_min) / rho_res + 0.5))
            if 0 <= r < n_rho:
                acc[r, t] += 1
    return acc


def _hough_accumulate_np(xs, ys, cos_t, sin_t, cx, cy, rho_min, rho_res, n_rho):
    n_theta = cos_t.shape[0]
    acc = np.zeros((n_rho, n_theta), dtype=np.int64)
    if xs.shape[0] == 0:
        return acc
    dx = (xs - cx)[:, None]
    dy = (ys - cy)[:, None]
    r = np.floor((dx * cos_t[None, :] + dy * sin_t[None, :] - rho_min) / rho_res + 0.5).astype(np.int64)
    t = np.broadcast_to(np.arange(n_theta), r.shape)
    ok = (r >= 0) & (r < n_rho)
    flat = r[ok] * n_theta + t[ok]
    acc += np.bincount(flat, minlength=n_rho * n_theta).reshape(n_rho, n_theta)
    return acc


# ---------------------------------------------------------------------------
# circle support search
# ---------------------------------------------------------------------------


@jit
def _circle_scores_nb(weight, cxs, cys, radii, cos_a, sin_a):
    h, w = weight.shape
    n_a = cos_a.shape[0]
    out = np.zeros((cys.shape[0], cxs.shape[0], radii.shape[0]), dtype=np.float64)
    for iy in range(cys.shape[0]):
        for ix in range(cxs.shape[0]):
            for ir in range(radii.shape[0]):
                s = 0.0
                for a in range(n_a):
                    px = int(math.floor(cxs[ix] + radii[ir] * cos_a[a] + 0.5))
                    py = int(math.floor(cys[iy] + radii[ir] * sin_a[a] + 0.5))
                    if 0 <= px < w and 0 <= py < h:
                        s += weight[py, px]
                out[iy, ix, ir] = s / n_a
    return out


def _circle_scores_np(weight, cxs, cys, radii, cos_a, sin_a):
    h, w = weight.shape
    n_a = cos_a.shape[0]
    # (cy, cx, r, angle) broadcast, evaluated one centre row at a time to bound memory
    out = np.zeros((cys.shape[0], cxs.shape[0], radii.shape[0]), dtype=np.float64)
    rc = radii[:, None] * cos_a[None, :]
    rs = radii[:, None] * sin_a[None, :]
    for iy in range(cys.shape[0]):
        px = np.floor(cxs[:, None, None] + rc[None] + 0.5).astype(np.int64)
        py = np.floor(cys[iy] + rs + 0.5).astype(np.int64)
        py = np.broadcast_to(py[None], px.shape)
        ok = (px >= 0) & (px < w) & (py >= 0) & (py < h)
        vals = np.where(ok, weight[np.clip(py, 0, h - 1), np.clip(px, 0, w - 1)], 0.0)
        # sequential sum over angles keeps the accumulation order of the loop version
        s = np.zeros(vals.shape[:2])
        for a in range(n_a):
            s = s + vals[..., a]
        out[iy] = s / n_a
    return out


# ---------------------------------------------------------------------------
# cyclic RANSAC scoring
# ---------------------------------------------------------------------------


@jit
def _ransac_search_nb(frames, preds, idx1, idx2, margin, period):
    n = frames.shape[0]
    half = period / 2.0
    best_it = -1
    best_count = -1
    best_abs_slope = np.inf
    used = 0
    for it in range(idx1.shape[0]):
        used = it + 1
        i = idx1[it]
        j = idx2[it]
        d = (preds[j] - preds[i]) % period
        if d > half:
            d -= period
        slope = d / (frames[j] - frames[i])
        intercept = preds[i] - slope * frames[i]
        count = 0
        for k in range(n):
            v = math.floor(intercept + slope * frames[k] + 0.5) % period
            e = abs(v - preds[k])
            if period - e < e:
                e = period - e
            if e <= margin:
                count += 1
        a = abs(slope)
        if count > best_count or (count == best_count and a < best_abs_slope):
            best_it = it
            best_count = count
            best_abs_slope = a
        if best_count == n:
            break
    return best_it, best_count, used


def _ransac_search_np(frames, preds, idx1, idx2, margin, period, chunk=512):
    n = frames.shape[0]
    half = period / 2.0
    best_it = -1
    best_count = -1
    best_abs_slope = np.inf
    used = 0
    for start in range(0, idx1.shape[0], chunk):
        i = idx1[start:start + chunk]
        j = idx2[start:start + chunk]
        d = (preds[j] - preds[i]) % period
        d = np.where(d > half, d - period, d)
        slope = d / (frames[j] - frames[i])
        intercept = preds[i] - slope * frames[i]
        v = np.floor(intercept[:, None] + slope[:, None] * frames[None, :] + 0.5) % period
        e = np.abs(v - preds[None, :])
        e = np.minimum(e, period - e)
        counts = (e <= margin).sum(axis=1)
        a = np.abs(slope)
        # replay the sequential "strictly better" rule over this chunk
        for k in range(counts.shape[0]):
            c = counts[k]
            if c > best_count or (c == best_count and a[k] < best_abs_slope):
                best_it = start + k
                best_count = int(c)
                best_abs_slope = a[k]
            if best_count == n:
                return best_it, best_count, start + k + 1
        used = start + counts.shape[0]
    return best_it, best_count, used


warp_bilinear = pick(_warp_bilinear_nb, _warp_bilinear_np)
hough_accumulate = pick(_hough_accumulate_nb, _hough_accumulate_np)
circle_scores = pick(_circle_scores_nb, _circle_scores_np)
ransac_search = pick(_ransac_search_nb, _ransac_search_np)

IMPLEMENTATIONS = {
    "warp_bilinear": (_warp_bilinear_nb, _warp_bilinear_np),
    "hough_accumulate": (_hough_accumulate_nb, _hough_accumulate_np),
    "circle_scores": (_circle_scores_nb, _circle_scores_np),
    "ransac_search": (_ransac_search_nb, _ransac_search_np),
}
