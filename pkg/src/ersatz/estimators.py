"""Nearest-neighbor information estimators and the time-averaged quantities.

Entropy uses the Kozachenko-Leonenko estimator with the max-norm,

    H = psi(N) - psi(k) + d * < ln(2 eps_i) >,

and mutual information the Kraskov-Stoegbauer-Grassberger estimator
(algorithm 1),

    I = psi(k) + psi(N) - < psi(n_x + 1) + psi(n_y + 1) >.

All values are in nats.  The ``ersatz_*`` functions pool the embedded
points of a window of length ``T`` and estimate as if the window were drawn
from a stationary process.  At scale ``tau`` only one point every ``tau``
samples is kept (``EstimatorConfig.decimate``), so a window yields about
``T / tau`` points.
"""

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.special import digamma

from .embedding import EmbeddedPointSet, EmbeddingSpec, increment_std, takens_embed
from .errors import DegenerateEstimateError, DomainError
from .neighbors import METHODS, count_within, kth_neighbor_radii
from .synthesis import Trajectory, as_samples

QUANTITIES = ("entropy", "ami", "entropy_rate", "entropy_rate_normalized")
BOUNDARY_RTOL = 1e-9
MAX_ZERO_FRACTION = 0.01


@dataclass(frozen=True)
class EstimatorConfig:
    """k-NN parameters.  The metric is always the max-norm.

    ``decimate=True`` down-samples the delay vectors of scale ``tau`` to one
    every ``tau`` samples before estimating; ``False`` keeps all
    ``T - (m-1) tau`` overlapping vectors.
    """

    k: int = 5
    metric: str = "chebyshev"
    duplicate_jitter: float = 1e-10
    jitter_seed: int = 0
    neighbor_method: str = "auto"
    decimate: bool = True

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be a positive integer, got {self.k}")
        if self.metric != "chebyshev":
            raise DomainError("only the max-norm ('chebyshev') metric is supported")
        if not self.duplicate_jitter > 0:
            raise DomainError("duplicate_jitter must be positive")
        if self.neighbor_method not in METHODS:
            raise DomainError(f"neighbor_method must be one of {METHODS}")


@dataclass(frozen=True)
class InfoEstimate:
    value: float
    quantity: str
    m: int
    n: int
    tau: int
    T: int
    k: int
    seed: Optional[int] = None

    def row(self):
        d = asdict(self)
        return {
            "quantity": d["quantity"],
            "value_nats": d["value"],
            "m": d["m"],
            "n": d["n"],
            "tau": d["tau"],
            "T": d["T"],
            "k": d["k"],
            "seed": d["seed"],
        }


# --------------------------------------------------------------------------
# raw estimators on point clouds
# --------------------------------------------------------------------------
def _points(p):
    if isinstance(p, EmbeddedPointSet):
        return p.points
    arr = np.asarray(p, dtype=float)
    return arr[:, None] if arr.ndim == 1 else arr


def _radii_with_jitter(points, ks, cfg):
    """k-th neighbor radii, re-drawn on a jittered copy when exact ties occur."""
    radii = kth_neighbor_radii(points, ks, cfg.neighbor_method)
    if np.all(radii > 0):
        return points, radii
    scale = float(np.std(points))
    if scale == 0.0:
        raise DegenerateEstimateError("all points coincide")
    rng = np.random.Generator(np.random.Philox(cfg.jitter_seed))
    amp = cfg.duplicate_jitter * scale
    points = points + rng.uniform(-amp, amp, size=points.shape)
    radii = kth_neighbor_radii(points, ks, cfg.neighbor_method)
    zero_frac = float(np.mean(radii[:, -1] == 0))
    if zero_frac > MAX_ZERO_FRACTION:
        raise DegenerateEstimateError(
            f"{100 * zero_frac:.1f}% of points have a zero neighbor distance after jitter"
        )
    return points, radii


def _check_k(n, ks):
    if max(ks) >= n:
        raise DomainError(f"k = {max(ks)} must be smaller than the number of points {n}")


def kl_entropy_scan(points, ks, cfg=None):
    """Kozachenko-Leonenko entropy for each ``k`` in ``ks`` (one neighbor query)."""
    cfg = cfg or EstimatorConfig()
    p = _points(points)
    ks = [int(k) for k in np.atleast_1d(ks)]
    n, d = p.shape
    _check_k(n, ks)
    _, radii = _radii_with_jitter(p, ks, cfg)
    out = np.empty(len(ks))
    for j, k in enumerate(ks):
        r = radii[:, j]
        r = r[r > 0]
        out[j] = digamma(n) - digamma(k) + d * np.mean(np.log(2.0 * r))
    return out


def ksg_mi_scan(x_points, y_points, ks, cfg=None):
    """KSG (algorithm 1) mutual information for each ``k`` in ``ks``."""
    cfg = cfg or EstimatorConfig()
    x = _points(x_points)
    y = _points(y_points)
    if x.shape[0] != y.shape[0]:
        raise DomainError("x and y must hold the same number of points")
    if x.shape == y.shape and np.array_equal(x, y):
        raise DegenerateEstimateError(
            "y is an exact copy of x; mutual information of a continuous "
            "variable with itself diverges"
        )
    ks = [int(k) for k in np.atleast_1d(ks)]
    n = x.shape[0]
    _check_k(n, ks)
    joint, radii = _radii_with_jitter(np.hstack([x, y]), ks, cfg)
    dx = x.shape[1]
    xj, yj = joint[:, :dx], joint[:, dx:]
    out = np.empty(len(ks))
    for j, k in enumerate(ks):
        # the marginal distance of the point that sets eps equals eps up to
        # rounding; shrink slightly so the strict count does not depend on it
        eps = radii[:, j] * (1.0 - BOUNDARY_RTOL)
        nx = count_within(xj, eps, cfg.neighbor_method)
        ny = count_within(yj, eps, cfg.neighbor_method)
        out[j] = digamma(k) + digamma(n) - np.mean(digamma(nx + 1) + digamma(ny + 1))
    return out


def entropy_knn(pts, cfg=None):
    """Kozachenko-Leonenko entropy (nats) of an embedded point set or ``(N, d)`` array."""
    cfg = cfg or EstimatorConfig()
    value = float(kl_entropy_scan(pts, [cfg.k], cfg)[0])
    m, tau, T = _provenance(pts)
    return InfoEstimate(value, "entropy", m, 0, tau, T, cfg.k)


def mutual_information_ksg(x_pts, y_pts, cfg=None):
    """KSG mutual information (nats) between two aligned point sets."""
    cfg = cfg or EstimatorConfig()
    value = float(ksg_mi_scan(x_pts, y_pts, [cfg.k], cfg)[0])
    m, tau, T = _provenance(y_pts)
    n, _, _ = _provenance(x_pts)
    return InfoEstimate(value, "ami", m, n, tau, T, cfg.k)


def _provenance(pts):
    if isinstance(pts, EmbeddedPointSet):
        return pts.spec.m, pts.spec.tau, pts.source_length
    p = _points(pts)
    return p.shape[1], 0, p.shape[0]


# --------------------------------------------------------------------------
# windows
# --------------------------------------------------------------------------
def split_windows(x, window=None):
    """Non-overlapping windows of size ``window``, each re-based to start from 0.

    Window ``j`` covers samples ``[jT, (j+1)T)`` and has the sample just
    before it subtracted, so it reads like a motion started at the origin.
    A trailing partial window is dropped.
    """
    x = as_samples(x)
    if window is None or window >= x.shape[0]:
        return [x]
    if window < 2:
        raise DomainError("window must hold at least two samples")
    segs = []
    for j in range(x.shape[0] // window):
        seg = x[j * window : (j + 1) * window]
        segs.append(seg - x[j * window - 1] if j else seg)
    return segs


def _pooled(segs, spec, decimate):
    step = spec.tau if decimate else 1
    return np.vstack([takens_embed(s, spec).points[::step] for s in segs])


def _over_windows(x, window, pool, fn):
    segs = split_windows(x, window)
    if pool or len(segs) == 1:
        return fn(segs)
    return np.mean([fn([s]) for s in segs], axis=0)


def _seed(traj):
    if isinstance(traj, Trajectory) and traj.spec is not None:
        return traj.spec.seed
    return None


def _window_length(traj, window):
    n = as_samples(traj).shape[0]
    return n if window is None or window >= n else int(window)


# --------------------------------------------------------------------------
# ersatz quantities
# --------------------------------------------------------------------------
def _entropy_values(x, m, tau, ks, cfg, window=None, pool=False):
    spec = EmbeddingSpec(m, tau)
    return _over_windows(x, window, pool, lambda segs: kl_entropy_scan(_pooled(segs, spec, cfg.decimate), ks, cfg))


def _ami_values(x, m, n, tau, ks, cfg, window=None, pool=False):
    spec = EmbeddingSpec(m + n, tau)

    def fn(segs):
        pts = _pooled(segs, spec, cfg.decimate)
        return ksg_mi_scan(pts[:, :n], pts[:, n:], ks, cfg)

    return _over_windows(x, window, pool, fn)


def ersatz_entropy(traj, m=1, tau=1, cfg=None, *, window=None, pool=False):
    """Time-averaged entropy of the ``(m, tau)`` delay vectors of one window.

    With ``window`` smaller than the series, the series is cut into
    non-overlapping windows; estimates are averaged, or with ``pool=True``
    all windows feed one estimate.
    """
    cfg = cfg or EstimatorConfig()
    v = _entropy_values(as_samples(traj), m, tau, [cfg.k], cfg, window, pool)
    return InfoEstimate(float(v[0]), "entropy", m, 0, tau, _window_length(traj, window), cfg.k, _seed(traj))


def ersatz_ami(traj, m=1, n=1, tau=1, cfg=None, *, window=None, pool=False):
    """Time-averaged auto-mutual information between ``x_t^(n)`` and ``x_{t-n tau}^(m)``."""
    cfg = cfg or EstimatorConfig()
    if n < 1:
        raise DomainError("n must be >= 1")
    v = _ami_values(as_samples(traj), m, n, tau, [cfg.k], cfg, window, pool)
    return InfoEstimate(float(v[0]), "ami", m, n, tau, _window_length(traj, window), cfg.k, _seed(traj))


def _rate_values(x, m, tau, ks, cfg, window, pool, assembly):
    if assembly == "mi":
        h1 = _entropy_values(x, 1, tau, ks, cfg, window, pool)
        return h1 - _ami_values(x, m, 1, tau, ks, cfg, window, pool)
    if assembly == "diff":
        hi = _entropy_values(x, m + 1, tau, ks, cfg, window, pool)
        return hi - _entropy_values(x, m, tau, ks, cfg, window, pool)
    raise DomainError(f"assembly must be 'mi' or 'diff', got {assembly!r}")


def ersatz_entropy_rate(traj, m=1, tau=1, cfg=None, *, assembly="mi", window=None, pool=False):
    """Time-averaged entropy rate of order ``m``.

    ``assembly="mi"`` (default) computes ``H^(1) - I^(m,1,tau)``;
    ``assembly="diff"`` computes ``H^(m+1,tau) - H^(m,tau)``.
    """
    cfg = cfg or EstimatorConfig()
    v = _rate_values(as_samples(traj), m, tau, [cfg.k], cfg, window, pool, assembly)
    return InfoEstimate(float(v[0]), "entropy_rate", m, 1, tau, _window_length(traj, window), cfg.k, _seed(traj))


def ersatz_entropy_rate_scan_k(traj, ks, m=1, tau=1, cfg=None, *, assembly="mi", window=None, pool=False):
    """:func:`ersatz_entropy_rate` for several ``k`` from a single neighbor query."""
    cfg = cfg or EstimatorConfig()
    ks = [int(k) for k in ks]
    v = _rate_values(as_samples(traj), m, tau, ks, cfg, window, pool, assembly)
    T = _window_length(traj, window)
    return {k: InfoEstimate(float(val), "entropy_rate", m, 1, tau, T, k, _seed(traj)) for k, val in zip(ks, v)}


def normalized_entropy_rate(traj, m=1, tau=1, cfg=None, **kwargs):
    """Entropy rate minus ``ln`` of the increment std at scale ``tau``."""
    h = ersatz_entropy_rate(traj, m, tau, cfg, **kwargs)
    value = h.value - np.log(increment_std(traj, tau))
    return InfoEstimate(value, "entropy_rate_normalized", h.m, h.n, h.tau, h.T, h.k, h.seed)
