"""Correlation mapping for pointwise transforms of a Gaussian process.

If ``z`` is a stationary standard Gaussian sequence with correlation ``r`` and
``x = f(z)``, the correlation of ``x`` is a power series in ``r`` whose
coefficients are the squared Hermite projections of ``f``:

    corr_x(r) = sum_{n>=1} b_n**2 r**n / Var f(Z),
    b_n = E[f(Z) h_n(Z)],

with ``h_n`` the orthonormal (probabilists') Hermite polynomials.  To
synthesize ``x`` with a prescribed correlation one inverts this map lag by
lag and synthesizes ``z`` with the resulting correlation.
"""

from functools import lru_cache

import numpy as np
from scipy.special import erfc, ndtri

from .errors import ConvergenceError, DomainError

N_TERMS = 256
_GRID_HALF_WIDTH = 12.0
_GRID_POINTS = 2**17 + 1


def lognormal_params(mean, std):
    """Location and scale of ``log X`` for a log-normal ``X`` of given mean/std."""
    if mean <= 0 or std <= 0:
        raise DomainError("log-normal mean and std must be positive")
    s2 = np.log1p((std / mean) ** 2)
    return np.log(mean) - 0.5 * s2, np.sqrt(s2)


def hermitian_rank1(mu_g, s_g):
    """``F^-1(F_Z(z))`` for the log-normal ``F`` with log-location ``mu_g``."""

    def f(z):
        return np.exp(mu_g + s_g * z)

    return f


def even_hermitian_rank2(mu_g, s_g):
    """``F^-1(2 (F_Z(|z|) - 1/2))``, an even map onto the log-normal law."""

    def f(z):
        # Phi^-1(2 Phi(|z|) - 1) == -Phi^-1(erfc(|z|/sqrt 2)), exact in the tail
        with np.errstate(divide="ignore", over="ignore"):
            g = -ndtri(erfc(np.abs(z) / np.sqrt(2.0)))
            return np.exp(mu_g + s_g * g)

    return f


def hermite_projections(f, n_terms=N_TERMS):
    """Projections ``b_n = E[f(Z) h_n(Z)]`` for ``n < n_terms``.

    Returns ``(b, mean, var)`` where ``mean`` and ``var`` are the exact first
    two moments of ``f(Z)`` from the same quadrature (not from the series).
    """
    z = np.linspace(-_GRID_HALF_WIDTH, _GRID_HALF_WIDTH, _GRID_POINTS)
    dz = z[1] - z[0]
    w = np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi) * dz
    w[0] *= 0.5
    w[-1] *= 0.5
    fz = f(z)
    fw = fz * w

    b = np.empty(n_terms)
    h_prev = np.zeros_like(z)
    h = np.ones_like(z)
    for n in range(n_terms):
        b[n] = fw @ h
        h_next = (z * h - np.sqrt(n) * h_prev) / np.sqrt(n + 1.0)
        h_prev, h = h, h_next
    mean = float(np.sum(fw))
    var = float(np.sum(fz * fw)) - mean**2
    return b, mean, var


class CorrelationMap:
    """Gaussian-to-output correlation map of a pointwise transform."""

    def __init__(self, f, n_terms=N_TERMS):
        b, self.mean, self.var = hermite_projections(f, n_terms)
        self.coef = b**2 / self.var
        self.coef[0] = 0.0
        self._dcoef = self.coef[1:] * np.arange(1, n_terms)

    def __call__(self, r):
        return np.polynomial.polynomial.polyval(r, self.coef)

    def derivative(self, r):
        return np.polynomial.polynomial.polyval(r, self._dcoef)

    @property
    def is_even(self):
        return bool(np.all(self.coef[1::2] < 1e-14))

    def invert(self, target, tol=1e-12, max_iter=60):
        """Gaussian correlations whose image is ``target`` (vectorized).

        Newton iteration from a tabulated initial guess, safeguarded by
        bisection on the monotone branch.  Even maps are inverted on
        ``[0, 1]``; odd-containing maps on ``[-1, 1]``.
        """
        target = np.asarray(target, dtype=float)
        lo_edge = 0.0 if self.is_even else -1.0
        lo_val = float(self(lo_edge))
        if np.any(target < lo_val - tol) or np.any(target > 1.0 + tol):
            raise ConvergenceError(
                "target correlation outside the range attainable by the "
                f"transform [{lo_val:.4g}, 1]"
            )
        grid = np.linspace(lo_edge, 1.0, 4097)
        vals = self(grid)
        if np.any(np.diff(vals) <= 0):
            raise ConvergenceError("correlation map is not monotone")
        r = np.interp(target, vals, grid)
        lo = np.full_like(r, lo_edge)
        hi = np.ones_like(r)
        for _ in range(max_iter):
            resid = self(r) - target
            if np.max(np.abs(resid), initial=0.0) < tol:
                return r
            lo = np.where(resid < 0, r, lo)
            hi = np.where(resid > 0, r, hi)
            step = resid / np.maximum(self.derivative(r), 1e-300)
            cand = r - step
            bad = (cand <= lo) | (cand >= hi)
            r = np.where(bad, 0.5 * (lo + hi), cand)
        raise ConvergenceError(
            f"correlation mapping did not converge to {tol:g} in {max_iter} iterations"
        )


@lru_cache(maxsize=16)
def lognormal_correlation_map(rank, mean, std):
    """Cached :class:`CorrelationMap` for the rank-1 or rank-2 log-normal transform."""
    mu_g, s_g = lognormal_params(mean, std)
    if rank == 1:
        return CorrelationMap(hermitian_rank1(mu_g, s_g))
    if rank == 2:
        return CorrelationMap(even_hermitian_rank2(mu_g, s_g))
    raise DomainError(f"rank must be 1 or 2, got {rank}")
