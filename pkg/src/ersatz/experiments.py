"""Ensembles and parameter sweeps over synthesized motions.

Realization ``r`` of an ensemble uses seed ``base_seed XOR r``, so every row
of a result can be recomputed in isolation from the parameters it echoes.
Work items run on a thread pool and are reduced in a fixed order; results do
not depend on the number of threads.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations

import numpy as np
from scipy import stats

from . import oracles
from .embedding import EmbeddingSpec, increment_series, increment_std
from .errors import DomainError, ErsatzError
from .estimators import (
    EstimatorConfig,
    _ami_values,
    _entropy_values,
    _rate_values,
    kl_entropy_scan,
)
from .io import write_rows
from .synthesis import NoiseSpec, is_power_of_two, realization_seed, synth_motion

AXES = ("window_T", "scale_tau", "neighbors_k", "embedding_m")
SWEEP_QUANTITIES = ("entropy", "ami", "rate", "rate_normalized", "rate_diff")
KS_C_ALPHA_1PCT = 1.628

SPEC_COLUMNS = ("kind", "hurst", "sigma1", "c2", "integral_scale", "lognormal_mu", "lognormal_sigma")


class SweepError(ErsatzError):
    """A grid point failed; the message names the offending point."""


def default_threads():
    return os.cpu_count() or 1


def _map(fn, items, threads):
    threads = threads or default_threads()
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# fitting
# --------------------------------------------------------------------------
def fit_slope(x, y, yerr=None):
    """Least-squares line ``y = a x + b``; returns ``(a, b, a_err)``.

    With strictly positive ``yerr`` the fit is weighted by ``1/yerr**2`` and
    the slope error follows from those errors.  Otherwise an ordinary fit is
    used and the slope error comes from the residual scatter.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[0] < 2:
        raise DomainError("need at least two points to fit a slope")
    if yerr is not None and np.all(np.asarray(yerr) > 0):
        w = 1.0 / np.asarray(yerr, dtype=float) ** 2
        xm = np.sum(w * x) / np.sum(w)
        ym = np.sum(w * y) / np.sum(w)
        sxx = np.sum(w * (x - xm) ** 2)
        a = np.sum(w * (x - xm) * (y - ym)) / sxx
        return float(a), float(ym - a * xm), float(math.sqrt(1.0 / sxx))
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    a = np.sum((x - xm) * (y - ym)) / sxx
    b = ym - a * xm
    if x.shape[0] > 2:
        s2 = np.sum((y - a * x - b) ** 2) / (x.shape[0] - 2)
        err = math.sqrt(s2 / sxx)
    else:
        err = float("nan")
    return float(a), float(b), err


# --------------------------------------------------------------------------
# results
# --------------------------------------------------------------------------
@dataclass
class SweepResult:
    """Tabulated ensemble statistics.

    ``rows`` is a list of dicts sharing ``columns``; ``values`` optionally
    keeps the raw per-realization estimates, shaped ``(R, grid, quantity)``.
    """

    rows: list
    columns: list
    meta: dict = field(default_factory=dict)
    values: object = None

    def column(self, name, **where):
        return np.array([r[name] for r in self.select(**where)])

    def select(self, **where):
        return [r for r in self.rows if all(r.get(k) == v for k, v in where.items())]

    def to_csv(self, path):
        return write_rows(path, self.rows, self.columns)


def _spec_echo(spec):
    d = spec.to_dict()
    return {c: d[c] for c in SPEC_COLUMNS}


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class SweepPlan:
    """One axis varied over ``grid``, everything else fixed.

    ``T`` is the window length (ignored when ``axis == "window_T"``), ``k``
    comes from ``estimator`` (ignored when ``axis == "neighbors_k"``).
    ``fit_exclude_largest`` drops that many of the largest grid points from
    the slope fit.
    """

    process: NoiseSpec
    axis: str
    grid: tuple
    quantities: tuple = ("rate",)
    m: int = 1
    n: int = 1
    tau: int = 1
    T: int = 2**16
    realizations: int = 20
    base_seed: int = 0
    estimator: EstimatorConfig = EstimatorConfig()
    fit_exclude_largest: int = 0

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(int(g) for g in self.grid))
        object.__setattr__(self, "quantities", tuple(self.quantities))
        if self.axis not in AXES:
            raise DomainError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.grid:
            raise DomainError("grid must not be empty")
        if self.realizations < 1:
            raise DomainError("realizations must be >= 1")
        bad = [q for q in self.quantities if q not in SWEEP_QUANTITIES]
        if bad or not self.quantities:
            raise DomainError(f"quantities must be drawn from {SWEEP_QUANTITIES}, got {bad}")
        for g in self.grid:
            self._check_point(**self.point(g))

    def point(self, value):
        p = {"m": self.m, "n": self.n, "tau": self.tau, "T": self.T, "k": self.estimator.k}
        key = {"window_T": "T", "scale_tau": "tau", "neighbors_k": "k", "embedding_m": "m"}[self.axis]
        p[key] = int(value)
        return p

    def _check_point(self, m, n, tau, T, k):
        if not is_power_of_two(T):
            raise DomainError(f"window T must be a power of two, got {T}")
        EmbeddingSpec(m, tau)
        span = m + max(n, 1)
        if "rate_diff" in self.quantities:
            span = max(span, m + 1)
        if (span - 1) * tau >= T:
            raise DomainError(f"grid point m={m}, n={n}, tau={tau} does not fit in T={T}")
        count = T - (span - 1) * tau
        if self.estimator.decimate:
            count = -(-count // tau)
        if not 1 <= k < count:
            raise DomainError(f"k={k} invalid for T={T}, tau={tau} ({count} points)")
        if not 0 <= self.fit_exclude_largest < len(self.grid):
            raise DomainError("fit_exclude_largest must leave at least one grid point")

    def to_dict(self):
        d = asdict(self)
        d["process"] = self.process.to_dict()
        d["estimator"] = asdict(self.estimator)
        d["grid"] = list(self.grid)
        d["quantities"] = list(self.quantities)
        return d


def evaluate(x, quantity, m, n, tau, ks, cfg):
    """Estimate one sweep quantity on motion samples ``x`` for every k in ``ks``."""
    if quantity == "entropy":
        return _entropy_values(x, m, tau, ks, cfg)
    if quantity == "ami":
        return _ami_values(x, m, n, tau, ks, cfg)
    if quantity == "rate":
        return _rate_values(x, m, tau, ks, cfg, None, False, "mi")
    if quantity == "rate_diff":
        return _rate_values(x, m, tau, ks, cfg, None, False, "diff")
    if quantity == "rate_normalized":
        return _rate_values(x, m, tau, ks, cfg, None, False, "mi") - math.log(increment_std(x, tau))
    raise DomainError(f"unknown quantity {quantity!r}")


def _realization(plan, r, T):
    seed = realization_seed(plan.base_seed, r)
    return synth_motion(plan.process.replace(length=T, seed=seed)).samples


def _sweep_item(plan, r, grid_idx):
    """Values for realization ``r`` over the grid points ``grid_idx``."""
    cfg = plan.estimator
    out = np.empty((len(grid_idx), len(plan.quantities)))
    if plan.axis == "window_T":
        for row, g in enumerate(grid_idx):
            p = plan.point(plan.grid[g])
            x = _realization(plan, r, p["T"])
            for qi, q in enumerate(plan.quantities):
                out[row, qi] = evaluate(x, q, p["m"], p["n"], p["tau"], [p["k"]], cfg)[0]
        return out
    x = _realization(plan, r, plan.T)
    if plan.axis == "neighbors_k":
        ks = [plan.grid[g] for g in grid_idx]
        for qi, q in enumerate(plan.quantities):
            out[:, qi] = evaluate(x, q, plan.m, plan.n, plan.tau, ks, cfg)
        return out
    for row, g in enumerate(grid_idx):
        p = plan.point(plan.grid[g])
        for qi, q in enumerate(plan.quantities):
            out[row, qi] = evaluate(x, q, p["m"], p["n"], p["tau"], [p["k"]], cfg)[0]
    return out


def run_sweep(plan, threads=None):
    """Synthesize ``plan.realizations`` motions and tabulate mean/std per grid point."""
    G, Q, R = len(plan.grid), len(plan.quantities), plan.realizations
    if plan.axis == "window_T":
        items = [(r, [g]) for r in range(R) for g in range(G)]
    else:
        items = [(r, list(range(G))) for r in range(R)]

    def work(item):
        r, gi = item
        try:
            return _sweep_item(plan, r, gi)
        except ErsatzError as exc:
            pts = [plan.point(plan.grid[g]) for g in gi]
            raise type(exc)(f"{exc} [realization {r}, grid point(s) {pts}]") from exc

    results = _map(work, items, threads)
    values = np.empty((R, G, Q))
    for (r, gi), res in zip(items, results):
        values[r, gi, :] = res

    mean = values.mean(axis=0)
    std = values.std(axis=0, ddof=1) if R > 1 else np.zeros((G, Q))

    fits = {}
    if plan.axis in ("window_T", "scale_tau") and G >= 2:
        keep = G - plan.fit_exclude_largest
        keep = max(keep, 2)
        order = np.argsort(plan.grid)[:keep]
        lx = np.log(np.array(plan.grid, dtype=float))[order]
        for qi, q in enumerate(plan.quantities):
            err = std[order, qi] / math.sqrt(R) if R > 1 else None
            fits[q] = fit_slope(lx, mean[order, qi], err)

    echo = _spec_echo(plan.process)
    rows = []
    for g, v in enumerate(plan.grid):
        p = plan.point(v)
        for qi, q in enumerate(plan.quantities):
            slope, _, slope_err = fits.get(q, (float("nan"),) * 3)
            rows.append(
                {
                    "axis": plan.axis,
                    "axis_value": v,
                    "quantity": q,
                    "mean": mean[g, qi],
                    "std": std[g, qi],
                    "R": R,
                    **echo,
                    **p,
                    "base_seed": plan.base_seed,
                    "fit_slope": slope,
                    "fit_slope_err": slope_err,
                }
            )
    columns = ["axis", "axis_value", "quantity", "mean", "std", "R", *SPEC_COLUMNS,
               "m", "n", "tau", "T", "k", "base_seed", "fit_slope", "fit_slope_err"]
    meta = {"plan": plan.to_dict(), "fits": {q: list(f) for q, f in fits.items()}}
    return SweepResult(rows, columns, meta, values)


def std_vs_T(spec, T_grid, realizations=20, quantities=("entropy", "ami", "rate"), m=1, tau=1,
             cfg=None, base_seed=0, threads=None):
    """Ensemble standard deviation of each quantity as the window grows."""
    plan = SweepPlan(spec, "window_T", tuple(T_grid), tuple(quantities), m=m, tau=tau,
                     realizations=realizations, base_seed=base_seed,
                     estimator=cfg or EstimatorConfig())
    return run_sweep(plan, threads)


# --------------------------------------------------------------------------
# bias grid
# --------------------------------------------------------------------------
def reference_rate(spec, tau, T, m=1):
    """Asymptotic entropy rate used as the zero of the bias, or NaN."""
    if spec.kind == "fgn":
        return oracles.fbm_ersatz_rate_pred(tau, T, spec.hurst, spec.sigma1)
    if spec.kind in ("lognormal_h1", "lognormal_h2") and tau == 1:
        return oracles.lognormal_unit_entropy(spec.lognormal_mu, spec.lognormal_sigma)
    return float("nan")


def bias_grid(spec, k_grid, T_grid, m=1, tau=1, realizations=20, base_seed=0, cfg=None,
              reference=None, threads=None):
    """Entropy rate over the ``(k, T)`` grid with its collapse coordinate.

    Rows carry ``ratio = k / T**(1/(m+1))`` and ``bias = mean - reference``.
    ``reference`` may be a number or a callable ``(T) -> number``; by default
    :func:`reference_rate` is used.
    """
    cfg = cfg or EstimatorConfig()
    ks = sorted(int(k) for k in k_grid)
    Ts = sorted(int(T) for T in T_grid)
    for T in Ts:
        SweepPlan(spec, "neighbors_k", tuple(ks), ("rate",), m=m, tau=tau, T=T, estimator=cfg)
    items = [(r, T) for T in Ts for r in range(realizations)]

    def work(item):
        r, T = item
        x = synth_motion(spec.replace(length=T, seed=realization_seed(base_seed, r))).samples
        return _rate_values(x, m, tau, ks, cfg, None, False, "mi")

    results = _map(work, items, threads)
    values = np.empty((realizations, len(Ts), len(ks)))
    for (r, T), res in zip(items, results):
        values[r, Ts.index(T), :] = res

    rows = []
    echo = _spec_echo(spec)
    for ti, T in enumerate(Ts):
        if reference is None:
            ref = reference_rate(spec, tau, T, m)
        elif callable(reference):
            ref = float(reference(T))
        else:
            ref = float(reference)
        for ki, k in enumerate(ks):
            v = values[:, ti, ki]
            mean = float(v.mean())
            rows.append({
                "T": T, "log2_T": int(round(math.log2(T))), "k": k,
                "ratio": k / T ** (1.0 / (m + 1)),
                "mean": mean,
                "std": float(v.std(ddof=1)) if realizations > 1 else 0.0,
                "reference": ref, "bias": mean - ref,
                "R": realizations, **echo, "m": m, "tau": tau, "base_seed": base_seed,
            })
    columns = ["T", "log2_T", "k", "ratio", "mean", "std", "reference", "bias", "R",
               *SPEC_COLUMNS, "m", "tau", "base_seed"]
    meta = {"process": spec.to_dict(), "k_grid": ks, "T_grid": Ts, "m": m, "tau": tau,
            "realizations": realizations, "base_seed": base_seed}
    return SweepResult(rows, columns, meta, values)


# --------------------------------------------------------------------------
# increment PDFs
# --------------------------------------------------------------------------
def ks_critical(n1, n2, c_alpha=KS_C_ALPHA_1PCT):
    """Two-sample KS critical distance (1% level by default)."""
    return c_alpha * math.sqrt((n1 + n2) / (n1 * n2))


@dataclass
class IncrementPdfResult:
    histograms: SweepResult
    ks: SweepResult
    moments: SweepResult


def increment_pdf(spec, tau_grid, realizations=1, base_seed=None, bins="fd"):
    """Unit-std histograms of the motion's increments at each scale.

    Increments are pooled over ``realizations`` motions (seeds
    ``base_seed XOR r``, ``base_seed`` defaulting to ``spec.seed``).  Bin
    edges are shared across scales and chosen on the pooled normalized
    increments (Freedman-Diaconis by default; any ``numpy.histogram_bin_edges``
    rule or an integer count is accepted).
    """
    base_seed = spec.seed if base_seed is None else base_seed
    taus = sorted(int(t) for t in tau_grid)
    motions = [synth_motion(spec.replace(seed=realization_seed(base_seed, r))).samples
               for r in range(realizations)]
    incs = {}
    for tau in taus:
        d = np.concatenate([increment_series(x, tau) for x in motions])
        d = d - d.mean()
        incs[tau] = d / d.std()
    edges = np.histogram_bin_edges(np.concatenate(list(incs.values())), bins=bins)

    echo = _spec_echo(spec)
    hist_rows, mom_rows, ks_rows = [], [], []
    for tau in taus:
        dens, _ = np.histogram(incs[tau], bins=edges, density=True)
        for lo, hi, p in zip(edges[:-1], edges[1:], dens):
            hist_rows.append({"tau": tau, "bin_left": lo, "bin_right": hi, "density": p, **echo})
        mom_rows.append({
            "tau": tau, "count": incs[tau].shape[0],
            "skewness": float(stats.skew(incs[tau])),
            "excess_kurtosis": float(stats.kurtosis(incs[tau])),
            **echo,
        })
    for a, b in combinations(taus, 2):
        ks = stats.ks_2samp(incs[a], incs[b]).statistic
        crit = ks_critical(incs[a].shape[0], incs[b].shape[0])
        ks_rows.append({"tau_a": a, "tau_b": b, "ks": float(ks), "critical_1pct": crit,
                        "within": bool(ks <= crit), **echo})
    meta = {"process": spec.to_dict(), "tau_grid": taus, "realizations": realizations,
            "base_seed": base_seed, "n_bins": len(edges) - 1}
    return IncrementPdfResult(
        SweepResult(hist_rows, ["tau", "bin_left", "bin_right", "density", *SPEC_COLUMNS], meta),
        SweepResult(ks_rows, ["tau_a", "tau_b", "ks", "critical_1pct", "within", *SPEC_COLUMNS], meta),
        SweepResult(mom_rows, ["tau", "count", "skewness", "excess_kurtosis", *SPEC_COLUMNS], meta),
    )


# --------------------------------------------------------------------------
# general framework: statistics across realizations at fixed time
# --------------------------------------------------------------------------
def ensemble_fixed_time(spec, t_list, m=1, tau=1, realizations=10_000, base_seed=0, cfg=None,
                        threads=None, chunk=256):
    """Entropy of ``x_t^(m, tau)`` over an ensemble of motions, for each ``t``.

    Times are 1-based (``x_1`` is the first sample).  Each realization is
    synthesized with the smallest power-of-two length covering ``max(t_list)``,
    without per-path normalization: centering a path would pin its last
    sample to zero and distort the law of ``x_t`` near the end.
    """
    cfg = cfg or EstimatorConfig()
    ts = sorted(int(t) for t in t_list)
    if ts[0] - (m - 1) * tau < 1:
        raise DomainError("every t must satisfy t - (m-1) tau >= 1")
    length = max(2, 1 << (ts[-1] - 1).bit_length())
    cols = np.array([[t - 1 - j * tau for j in range(m)] for t in ts])

    def work(start):
        block = np.empty((min(chunk, realizations - start), len(ts), m))
        for i in range(block.shape[0]):
            s = spec.replace(length=length, seed=realization_seed(base_seed, start + i))
            block[i] = synth_motion(s, normalize=False).samples[cols]
        return block

    blocks = _map(work, list(range(0, realizations, chunk)), threads)
    samples = np.concatenate(blocks, axis=0)

    values = np.array([kl_entropy_scan(samples[:, i, :], [cfg.k], cfg)[0] for i in range(len(ts))])
    h1 = oracles.fbm_unit_entropy(spec.sigma1)
    slope, intercept, slope_err = fit_slope(np.log(ts), values)
    echo = _spec_echo(spec)
    rows = []
    for t, v in zip(ts, values):
        offset = oracles.selfsimilar_entropy_offset(t, tau, m, spec.hurst)
        rows.append({
            "t": t, "entropy": float(v), "offset_pred": offset,
            "fbm_pred": m * h1 + offset if spec.kind == "fgn" else float("nan"),
            "R": realizations, **echo, "m": m, "tau": tau, "k": cfg.k, "base_seed": base_seed,
            "fit_slope": slope, "fit_slope_err": slope_err,
        })
    columns = ["t", "entropy", "offset_pred", "fbm_pred", "R", *SPEC_COLUMNS, "m", "tau", "k",
               "base_seed", "fit_slope", "fit_slope_err"]
    meta = {"process": spec.to_dict(), "t_list": ts, "m": m, "tau": tau,
            "realizations": realizations, "base_seed": base_seed,
            "fit": [slope, intercept, slope_err]}
    return SweepResult(rows, columns, meta, values)
