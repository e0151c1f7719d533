"""Max-norm neighbor queries: k-th neighbor radii and strict range counts.

Three routes share one contract.  One-dimensional data goes through the
sorted-array kernels, small sets (``N < BRUTE_FORCE_BELOW``) through the
brute-force kernels, and everything else through a ``scipy`` kd-tree.  The
brute-force route doubles as the reference the tree is tested against.
"""

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels
from .errors import DomainError

BRUTE_FORCE_BELOW = 2048
METHODS = ("auto", "tree", "brute")


def _as_points(points):
    p = np.ascontiguousarray(points, dtype=float)
    if p.ndim == 1:
        p = p[:, None]
    if p.ndim != 2:
        raise DomainError("points must be an (N, d) array")
    return p


def _route(p, method):
    if method not in METHODS:
        raise DomainError(f"method must be one of {METHODS}, got {method!r}")
    if method != "auto":
        return method
    if p.shape[1] == 1:
        return "sorted"
    return "brute" if p.shape[0] < BRUTE_FORCE_BELOW else "tree"


def _tree(p):
    return cKDTree(p, leafsize=16, balanced_tree=False, compact_nodes=False)


def kth_neighbor_radii(points, ks, method="auto"):
    """Distance from each point to its ``k``-th nearest other point, for each k.

    Returns an ``(N, len(ks))`` array.  Distances are max-norm.
    """
    p = _as_points(points)
    ks = [int(k) for k in np.atleast_1d(ks)]
    n = p.shape[0]
    if min(ks) < 1 or max(ks) >= n:
        raise DomainError(f"need 1 <= k < N = {n}, got k = {ks}")
    route = _route(p, method)
    out = np.empty((n, len(ks)))
    if route == "sorted":
        order = np.argsort(p[:, 0], kind="stable")
        xs = p[order, 0]
        for j, k in enumerate(ks):
            out[order, j] = _kernels.knn_radius_1d(xs, k)
    elif route == "brute":
        for j, k in enumerate(ks):
            out[:, j] = _kernels.brute_knn_radius(p, k)
    else:
        kmax = max(ks)
        dist, _ = _tree(p).query(p, k=kmax + 1, p=np.inf)
        dist = dist.reshape(n, kmax + 1)
        out[:] = dist[:, ks]
    return out


def count_within(points, radius, method="auto"):
    """Number of other points at max-norm distance strictly below ``radius[i]``."""
    p = _as_points(points)
    r = np.ascontiguousarray(np.broadcast_to(np.asarray(radius, dtype=float), (p.shape[0],)))
    route = _route(p, method)
    if route == "sorted":
        xs = np.sort(p[:, 0])
        cnt = _kernels.count_within_1d(xs, p[:, 0], r)
        # self lies strictly inside any positive radius
        return np.where(r > 0, cnt - 1, 0)
    if route == "brute":
        return _kernels.brute_count_within(p, r)
    rr = np.nextafter(r, 0.0)
    cnt = _tree(p).query_ball_point(p, rr, p=np.inf, return_length=True)
    return np.where(r > 0, np.asarray(cnt) - 1, 0)
