"""Closed-form reference values for self-similar processes and the fBm.

All logarithms are natural; entropies are in nats.
"""

import math

import numpy as np

from .errors import DomainError

LN_2PI_E = math.log(2.0 * math.pi * math.e)


def _check_hurst(hurst):
    if not 0.0 < hurst < 1.0:
        raise DomainError(f"hurst must lie in (0, 1), got {hurst}")


def _check_sigma(sigma1):
    if not sigma1 > 0:
        raise DomainError(f"sigma1 must be positive, got {sigma1}")


def fbm_covariance(t, tau, hurst, sigma1=1.0):
    """``E[B_t B_{t-tau}] = (sigma1**2/2) (t**2H + (t-tau)**2H - tau**2H)`` for ``0 <= tau < t``."""
    _check_hurst(hurst)
    _check_sigma(sigma1)
    if not 0 <= tau < t:
        raise DomainError(f"need 0 <= tau < t, got t={t}, tau={tau}")
    h2 = 2.0 * hurst
    return 0.5 * sigma1**2 * (t**h2 + (t - tau) ** h2 - tau**h2)


def fbm_embedded_covariance(t, tau, m, hurst, sigma1=1.0):
    """Covariance matrix of ``(B_t, B_{t-tau}, ..., B_{t-(m-1)tau})``."""
    times = t - tau * np.arange(m)
    if times[-1] <= 0:
        raise DomainError("all embedded times must be positive")
    h2 = 2.0 * hurst
    s, u = np.meshgrid(times, times, indexing="ij")
    return 0.5 * sigma1**2 * (s**h2 + u**h2 - np.abs(s - u) ** h2)


def gaussian_entropy(cov):
    """``0.5 ln((2 pi e)^d det cov)`` for a positive-definite matrix (or variance)."""
    c = np.atleast_2d(np.asarray(cov, dtype=float))
    if c.shape[0] != c.shape[1] or not np.allclose(c, c.T):
        raise DomainError("covariance must be a symmetric square matrix")
    try:
        chol = np.linalg.cholesky(c)
    except np.linalg.LinAlgError:
        raise DomainError("covariance is not positive definite") from None
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    return 0.5 * (c.shape[0] * LN_2PI_E + logdet)


def fbm_unit_entropy(sigma1=1.0):
    """Entropy of the fBm at unit time, ``0.5 ln(2 pi e sigma1**2)``."""
    _check_sigma(sigma1)
    return 0.5 * LN_2PI_E + math.log(sigma1)


def fbm_ersatz_entropy_pred(T, hurst, sigma1=1.0):
    """Time-averaged entropy of an fBm window: ``H1 + H ln T``."""
    _check_hurst(hurst)
    return fbm_unit_entropy(sigma1) + hurst * math.log(T)


def correction_term(tau_over_T, hurst):
    """The finite-window correction ``C(tau/T)`` (always <= 0)."""
    _check_hurst(hurst)
    r = np.asarray(tau_over_T, dtype=float)
    if np.any(r < 0) or np.any(r >= 1):
        raise DomainError("tau/T must lie in [0, 1)")
    a = 1.0 / (2.0 * hurst + 1.0)
    c = 0.5 * np.log((0.5 * r + a) / (r + a))
    return float(c) if c.ndim == 0 else c


def correction_term_first_order(tau_over_T, hurst):
    """Leading term ``-(2H+1)/4 * tau/T`` of :func:`correction_term`."""
    return -(2.0 * hurst + 1.0) / 4.0 * np.asarray(tau_over_T, dtype=float)


def fbm_ersatz_ami_pred(tau, T, hurst):
    """Time-averaged auto-mutual information of the fBm, ``-H ln(tau/T) + C(tau/T)``."""
    r = tau / T
    return -hurst * math.log(r) + correction_term(r, hurst)


def fbm_ersatz_rate_pred(tau, T, hurst, sigma1=1.0):
    """Time-averaged entropy rate of the fBm, ``H1 + H ln tau - C(tau/T)``."""
    return fbm_unit_entropy(sigma1) + hurst * math.log(tau) - correction_term(tau / T, hurst)


def lognormal_unit_entropy(mu, sigma, mode="textbook"):
    """Entropy of a log-normal variable with mean ``mu`` and std ``sigma``.

    ``mode="textbook"`` uses ``0.5 ln(2 pi e s2) + mu_log`` with
    ``s2 = ln(1 + sigma**2/mu**2)``.  ``mode="footnote"`` uses the variant
    ``0.5 ln(2 pi e s') + mu_log`` with ``s' = 2 ln(1 + sigma**2/mu**2)``;
    it is kept for comparison and is not the exact entropy.
    """
    if not (mu > 0 and sigma > 0):
        raise DomainError("mu and sigma must be positive")
    mu_log = math.log(mu**2 / math.sqrt(mu**2 + sigma**2))
    ratio = math.log1p(sigma**2 / mu**2)
    if mode == "textbook":
        return 0.5 * math.log(2.0 * math.pi * math.e * ratio) + mu_log
    if mode == "footnote":
        return 0.5 * math.log(2.0 * math.pi * math.e * 2.0 * ratio) + mu_log
    raise DomainError(f"mode must be 'textbook' or 'footnote', got {mode!r}")


def selfsimilar_entropy_offset(t, tau, m, hurst):
    """Dominant offset ``H ln t + (m-1) H ln tau`` of the entropy at time ``t``."""
    _check_hurst(hurst)
    return hurst * math.log(t) + (m - 1) * hurst * math.log(tau)


def selfsimilar_rate_offset(tau, hurst):
    """Dominant offset ``H ln tau`` of the entropy rate."""
    _check_hurst(hurst)
    return hurst * math.log(tau)


def noise_autocorrelation(spec, lags):
    """Analytic autocorrelation of the noise described by ``spec``.

    fGn and both log-normal noises share the fGn correlation; the MRW noise
    has ``rho_fGn(H + c2)(tau) * exp(c_omega(tau) - c_omega(0))``.
    """
    from .synthesis import fgn_autocovariance, mrw_log_covariance

    lags = np.asarray(lags)
    if spec.kind == "mrw":
        base = fgn_autocovariance(lags, spec.hurst + spec.c2, 1.0)
        w = mrw_log_covariance(lags, spec.c2, spec.integral_scale)
        w0 = mrw_log_covariance(0, spec.c2, spec.integral_scale)
        return base * np.exp(w - w0)
    return fgn_autocovariance(lags, spec.hurst, 1.0)
