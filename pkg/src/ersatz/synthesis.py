"""Synthesis of stationary noises and the motions obtained by integrating them.

Four noise classes are supported: fractional Gaussian noise, two log-normal
noises with the fGn correlation (Hermitian rank-1 and even-Hermitian rank-2
transforms of a Gaussian process), and the multifractal random walk noise
``w_fGn * exp(omega)``.  Gaussian sequences are drawn exactly by circulant
embedding.  Randomness comes from a Philox counter-based generator keyed by
the ``NoiseSpec`` seed, so a ``NoiseSpec`` fully determines its trajectory.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import hermite
from .errors import DomainError, SynthesisError

KINDS = ("fgn", "lognormal_h1", "lognormal_h2", "mrw")
ROLES = ("noise", "motion")

DEFAULT_LOGNORMAL_MEAN = math.exp(0.5)
DEFAULT_LOGNORMAL_STD = math.sqrt(math.e * (math.e - 1.0))

EIGEN_CLIP_RTOL = 1e-10
_SEED_LIMIT = 2**64


def is_power_of_two(n):
    return isinstance(n, (int, np.integer)) and n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class NoiseSpec:
    """Full, serializable description of one synthesized noise.

    ``integral_scale`` defaults to ``length`` (only used by ``kind="mrw"``).
    """

    kind: str = "fgn"
    hurst: float = 0.7
    sigma1: float = 1.0
    length: int = 2**16
    seed: int = 0
    c2: float = 0.025
    integral_scale: Optional[int] = None
    lognormal_mu: float = DEFAULT_LOGNORMAL_MEAN
    lognormal_sigma: float = DEFAULT_LOGNORMAL_STD

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not 0.0 < self.hurst < 1.0:
            raise DomainError(f"hurst must lie in (0, 1), got {self.hurst}")
        if not self.sigma1 > 0:
            raise DomainError(f"sigma1 must be positive, got {self.sigma1}")
        if not is_power_of_two(self.length):
            raise DomainError(f"length must be a power of two, got {self.length}")
        if not 0 <= self.seed < _SEED_LIMIT:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if self.c2 < 0:
            raise DomainError(f"c2 must be non-negative, got {self.c2}")
        if self.integral_scale is None:
            object.__setattr__(self, "integral_scale", int(self.length))
        if not 0 < self.integral_scale <= self.length:
            raise DomainError(
                f"integral_scale must lie in [1, length={self.length}], "
                f"got {self.integral_scale}"
            )
        if self.kind == "mrw" and not self.hurst + self.c2 < 1.0:
            raise DomainError("mrw needs hurst + c2 < 1 for its fGn factor")
        if not (self.lognormal_mu > 0 and self.lognormal_sigma > 0):
            raise DomainError("lognormal_mu and lognormal_sigma must be positive")

    def replace(self, **changes):
        d = asdict(self)
        if "length" in changes and "integral_scale" not in changes:
            # keep L tied to T unless it was set independently
            if self.integral_scale == self.length:
                d["integral_scale"] = None
        d.update(changes)
        return NoiseSpec(**d)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass(frozen=True)
class Trajectory:
    """An equi-sampled (dt = 1) noise or motion with its generating spec."""

    samples: np.ndarray
    role: str
    spec: Optional[NoiseSpec] = field(default=None, compare=False)

    def __post_init__(self):
        if self.role not in ROLES:
            raise DomainError(f"role must be one of {ROLES}, got {self.role!r}")
        arr = np.array(self.samples, dtype=float)
        if arr.ndim != 1:
            raise DomainError("trajectory samples must be one-dimensional")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return self.role == other.role and np.array_equal(self.samples, other.samples)

    __hash__ = None


def as_samples(x):
    """Return the sample array of a :class:`Trajectory` or array-like."""
    if isinstance(x, Trajectory):
        return x.samples
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DomainError("expected a one-dimensional series")
    return arr


# --------------------------------------------------------------------------
# covariances
# --------------------------------------------------------------------------
def fgn_autocovariance(tau, hurst, sigma1=1.0):
    """Autocovariance of fractional Gaussian noise at integer lag(s) ``tau``.

    ``(sigma1**2 / 2) * (|tau-1|**2H - 2 tau**2H + (tau+1)**2H)``
    """
    if not 0.0 < hurst < 1.0:
        raise DomainError(f"hurst must lie in (0, 1), got {hurst}")
    if not sigma1 > 0:
        raise DomainError(f"sigma1 must be positive, got {sigma1}")
    t = np.asarray(tau, dtype=float)
    if np.any(t < 0):
        raise DomainError("lag must be non-negative")
    h2 = 2.0 * hurst
    c = 0.5 * sigma1**2 * (np.abs(t - 1.0) ** h2 - 2.0 * t**h2 + (t + 1.0) ** h2)
    return float(c) if c.ndim == 0 else c


def mrw_log_covariance(tau, c2, integral_scale):
    """Covariance of the log-volatility field ``omega`` of the MRW.

    ``c2 * ln(L / (|tau| + 1))`` for ``|tau| < L`` and 0 beyond.
    """
    t = np.abs(np.asarray(tau, dtype=float))
    inside = t < integral_scale
    c = np.where(inside, c2 * np.log(integral_scale / np.where(inside, t + 1.0, 1.0)), 0.0)
    return float(c) if c.ndim == 0 else c


# --------------------------------------------------------------------------
# circulant embedding
# --------------------------------------------------------------------------
def circulant_eigenvalues(acov):
    """Eigenvalues of the minimal circulant embedding of ``acov[0..n]``.

    Returns ``2n`` eigenvalues.  Negative values with magnitude at most
    ``EIGEN_CLIP_RTOL * max`` are clipped to zero; larger ones raise
    :class:`SynthesisError`.
    """
    acov = np.asarray(acov, dtype=float)
    n = acov.shape[0] - 1
    if n < 1:
        raise DomainError("need autocovariance at lags 0..n with n >= 1")
    row = np.concatenate([acov, acov[-2:0:-1]])
    lam = np.fft.rfft(row).real
    top = lam.max()
    if top <= 0:
        if np.all(acov == 0):
            return np.zeros(2 * n)
        raise SynthesisError("circulant embedding has no positive eigenvalue")
    neg = lam < 0
    if np.any(lam[neg] < -EIGEN_CLIP_RTOL * top):
        worst = lam.min() / top
        raise SynthesisError(
            "covariance is not embeddable: relative negative eigenvalue "
            f"{worst:.3g} exceeds tolerance {EIGEN_CLIP_RTOL:g}"
        )
    lam = np.where(neg, 0.0, lam)
    # full spectrum of the symmetric circulant from its half spectrum
    return np.concatenate([lam, lam[-2:0:-1]])


def circulant_sample(acov, rng):
    """One exact Gaussian draw of length ``len(acov) - 1`` with autocovariance ``acov``."""
    lam = circulant_eigenvalues(acov)
    m = lam.shape[0]
    n = m // 2
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    y = np.fft.fft(np.sqrt(lam / m) * z)
    return y.real[:n].copy()


def _rng(seed, stream=0):
    bitgen = np.random.Philox(seed)
    for _ in range(stream):
        bitgen = bitgen.jumped()
    return np.random.Generator(bitgen)


def _standardize(x, scale):
    x = x - x.mean()
    sd = x.std()
    if sd == 0:
        raise SynthesisError("synthesized noise is constant")
    return x * (scale / sd)


# --------------------------------------------------------------------------
# synthesizers
# --------------------------------------------------------------------------
def _raw_fgn(hurst, length, rng):
    lags = np.arange(length + 1)
    return circulant_sample(fgn_autocovariance(lags, hurst, 1.0), rng)


def synth_fgn(spec, normalize=True):
    """Fractional Gaussian noise, centered and scaled to sample std ``sigma1``.

    ``normalize=False`` skips the per-path centering and rescaling and returns
    the exact process with standard deviation ``sigma1``, as needed when
    statistics are taken across realizations rather than along one path.
    """
    if spec.kind != "fgn":
        raise DomainError(f"synth_fgn needs kind='fgn', got {spec.kind!r}")
    x = _raw_fgn(spec.hurst, spec.length, _rng(spec.seed))
    x = _standardize(x, spec.sigma1) if normalize else spec.sigma1 * x
    return Trajectory(x, "noise", spec)


def integrate_to_motion(noise):
    """Cumulative sum ``m_t = sum_{k<=t} w_k`` (with ``m_0 = 0`` implicit)."""
    if isinstance(noise, Trajectory):
        if noise.role != "noise":
            raise DomainError("integrate_to_motion expects a noise trajectory")
        return Trajectory(np.cumsum(noise.samples), "motion", noise.spec)
    return np.cumsum(as_samples(noise))


def lognormal_gaussian_correlation(rank, hurst, length, mean, std):
    """Correlation of the Gaussian driver for the rank-1/rank-2 log-normal noise."""
    cmap = hermite.lognormal_correlation_map(rank, float(mean), float(std))
    target = fgn_autocovariance(np.arange(1, length + 1), hurst, 1.0)
    return np.concatenate([[1.0], cmap.invert(target)])


def synth_lognormal_noise(spec, rank=None, center=True):
    """Log-normal noise with the fGn correlation, centered by its sample mean.

    ``rank`` defaults from ``spec.kind`` (``lognormal_h1`` -> 1,
    ``lognormal_h2`` -> 2).  The marginal before centering is the log-normal
    law with mean ``spec.lognormal_mu`` and std ``spec.lognormal_sigma``;
    ``center=False`` returns those raw values.
    """
    kinds = {1: "lognormal_h1", 2: "lognormal_h2"}
    if rank is None:
        rank = {v: k for k, v in kinds.items()}.get(spec.kind)
    if rank not in kinds or spec.kind != kinds[rank]:
        raise DomainError(
            f"synth_lognormal_noise(rank={rank}) does not match kind {spec.kind!r}"
        )
    rho = lognormal_gaussian_correlation(
        rank, spec.hurst, spec.length, spec.lognormal_mu, spec.lognormal_sigma
    )
    z = circulant_sample(rho, _rng(spec.seed))
    mu_g, s_g = hermite.lognormal_params(spec.lognormal_mu, spec.lognormal_sigma)
    if rank == 1:
        f = hermite.hermitian_rank1(mu_g, s_g)
    else:
        f = hermite.even_hermitian_rank2(mu_g, s_g)
    x = f(z)
    return Trajectory(x - x.mean() if center else x, "noise", spec)


def synth_mrw(spec, normalize=True):
    """Multifractal random walk noise ``w_fGn(H + c2) * exp(omega)``.

    ``omega`` is an independent Gaussian field with the log covariance of
    :func:`mrw_log_covariance`.  The product is centered and scaled to sample
    std ``sigma1``; with ``c2 = 0`` this is exactly :func:`synth_fgn`.
    ``normalize=False`` only multiplies the raw product by ``sigma1``.
    """
    if spec.kind != "mrw":
        raise DomainError(f"synth_mrw needs kind='mrw', got {spec.kind!r}")
    w = _raw_fgn(spec.hurst + spec.c2, spec.length, _rng(spec.seed))
    if spec.c2 > 0:
        lags = np.arange(spec.length + 1)
        acov = mrw_log_covariance(lags, spec.c2, spec.integral_scale)
        omega = circulant_sample(acov, _rng(spec.seed, stream=1))
        w = w * np.exp(omega)
    w = _standardize(w, spec.sigma1) if normalize else spec.sigma1 * w
    return Trajectory(w, "noise", spec)


def synth_noise(spec, normalize=True):
    """Dispatch on ``spec.kind``; ``normalize=False`` skips per-path normalization."""
    if spec.kind == "fgn":
        return synth_fgn(spec, normalize)
    if spec.kind == "mrw":
        return synth_mrw(spec, normalize)
    return synth_lognormal_noise(spec, center=normalize)


def synth_motion(spec, normalize=True):
    return integrate_to_motion(synth_noise(spec, normalize))


def realization_seed(base_seed, index):
    """Seed of realization ``index`` in an ensemble: ``base_seed XOR index``."""
    return int(base_seed) ^ int(index)
