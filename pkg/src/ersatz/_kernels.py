"""Hot nearest-neighbor loops, max-norm throughout.

Every kernel exists twice: a numba loop (``*_nb``) and a vectorized numpy
version (``*_np``).  The public name is bound to one of them at import time
according to :mod:`ersatz._accel`.  Both paths return identical results; the
test-suite checks this, and ``benchmarks/bench_kernels.py`` times them.
"""

import numpy as np

from ._accel import USE_NUMBA, jit

__all__ = [
    "knn_radius_1d",
    "count_within_1d",
    "brute_knn_radius",
    "brute_count_within",
]

_NUMPY_CHUNK = 256


# --------------------------------------------------------------------------
# 1-D: k-th neighbor distance on a sorted sample
# --------------------------------------------------------------------------
def _knn_radius_1d_loop(xs, k):
    n = xs.shape[0]
    out = np.empty(n)
    for i in range(n):
        lo = i - 1
        hi = i + 1
        d = 0.0
        for _ in range(k):
            if lo < 0:
                d = xs[hi] - xs[i]
                hi += 1
            elif hi >= n:
                d = xs[i] - xs[lo]
                lo -= 1
            else:
                dl = xs[i] - xs[lo]
                dh = xs[hi] - xs[i]
                if dl <= dh:
                    d = dl
                    lo -= 1
                else:
                    d = dh
                    hi += 1
        out[i] = d
    return out


_knn_radius_1d_nb = jit(_knn_radius_1d_loop)


def _knn_radius_1d_np(xs, k):
    n = xs.shape[0]
    padded = np.concatenate([np.full(k, -np.inf), xs, np.full(k, np.inf)])
    offsets = np.concatenate([np.arange(-k, 0), np.arange(1, k + 1)])
    idx = np.arange(n)[:, None] + k + offsets[None, :]
    dist = np.abs(padded[idx] - xs[:, None])
    return np.partition(dist, k - 1, axis=1)[:, k - 1]


# --------------------------------------------------------------------------
# 1-D: strict range counts against a sorted reference sample
# --------------------------------------------------------------------------
def _count_within_1d_loop(xs, query, radius):
    n = query.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        lo = np.searchsorted(xs, query[i] - radius[i], side="right")
        hi = np.searchsorted(xs, query[i] + radius[i], side="left")
        out[i] = hi - lo
    return out


_count_within_1d_nb = jit(_count_within_1d_loop)


def _count_within_1d_np(xs, query, radius):
    lo = np.searchsorted(xs, query - radius, side="right")
    hi = np.searchsorted(xs, query + radius, side="left")
    return (hi - lo).astype(np.int64)


# --------------------------------------------------------------------------
# d-D brute force (small N, and the oracle for the tree path)
# --------------------------------------------------------------------------
def _brute_knn_radius_loop(points, k):
    n, d = points.shape
    out = np.empty(n)
    best = np.empty(k)
    for i in range(n):
        for q in range(k):
            best[q] = np.inf
        for j in range(n):
            if j == i:
                continue
            dist = 0.0
            for c in range(d):
                v = abs(points[i, c] - points[j, c])
                if v > dist:
                    dist = v
            if dist < best[k - 1]:
                # insertion into the sorted buffer of the k smallest
                q = k - 1
                while q > 0 and best[q - 1] > dist:
                    best[q] = best[q - 1]
                    q -= 1
                best[q] = dist
        out[i] = best[k - 1]
    return out


_brute_knn_radius_nb = jit(_brute_knn_radius_loop)


def _pairwise_chebyshev(block, points):
    return np.max(np.abs(block[:, None, :] - points[None, :, :]), axis=2)


def _brute_knn_radius_np(points, k):
    n = points.shape[0]
    out = np.empty(n)
    for start in range(0, n, _NUMPY_CHUNK):
        stop = min(start + _NUMPY_CHUNK, n)
        dist = _pairwise_chebyshev(points[start:stop], points)
        dist[np.arange(stop - start), np.arange(start, stop)] = np.inf
        out[start:stop] = np.partition(dist, k - 1, axis=1)[:, k - 1]
    return out


def _brute_count_within_loop(points, radius):
    n, d = points.shape
    out = np.zeros(n, dtype=np.int64)
    for i in range(n):
        r = radius[i]
        cnt = 0
        for j in range(n):
            if j == i:
                continue
            dist = 0.0
            for c in range(d):
                v = abs(points[i, c] - points[j, c])
                if v > dist:
                    dist = v
                    if dist >= r:
                        break
            if dist < r:
                cnt += 1
        out[i] = cnt
    return out


_brute_count_within_nb = jit(_brute_count_within_loop)


def _brute_count_within_np(points, radius):
    n = points.shape[0]
    out = np.empty(n, dtype=np.int64)
    for start in range(0, n, _NUMPY_CHUNK):
        stop = min(start + _NUMPY_CHUNK, n)
        dist = _pairwise_chebyshev(points[start:stop], points)
        dist[np.arange(stop - start), np.arange(start, stop)] = np.inf
        out[start:stop] = np.sum(dist < radius[start:stop, None], axis=1)
    return out


if USE_NUMBA:
    knn_radius_1d = _knn_radius_1d_nb
    count_within_1d = _count_within_1d_nb
    brute_knn_radius = _brute_knn_radius_nb
    brute_count_within = _brute_count_within_nb
else:
    knn_radius_1d = _knn_radius_1d_np
    count_within_1d = _count_within_1d_np
    brute_knn_radius = _brute_knn_radius_np
    brute_count_within = _brute_count_within_np
