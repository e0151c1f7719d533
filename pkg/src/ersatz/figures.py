"""Figure-by-figure data reproduction (desk scale by default).

Each figure id maps to a list of tables written as
``<figure-id>_<process>_<axis>.csv`` next to one
``<figure-id>.manifest.json``.
"""

import time
from dataclasses import dataclass

from . import __version__
from .experiments import SweepPlan, SweepResult, bias_grid, increment_pdf, run_sweep
from .io import write_json
from .synthesis import NoiseSpec

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Scale:
    realizations: int
    T: int
    T_grid: tuple
    tau_grid: tuple
    m_list: tuple
    bias_k: tuple
    bias_T: tuple


DESK = Scale(
    realizations=20,
    T=2**16,
    T_grid=tuple(2**j for j in range(10, 17)),
    tau_grid=tuple(2**j for j in range(0, 8)),
    m_list=(1, 2, 3),
    bias_k=tuple(range(4, 19)),
    bias_T=tuple(2**j for j in range(9, 16)),
)

FULL = Scale(
    realizations=100,
    T=2**16,
    T_grid=tuple(2**j for j in range(9, 18)),
    tau_grid=tuple(2**j for j in range(0, 8)),
    m_list=(1, 2, 3, 4, 5),
    bias_k=tuple(range(4, 19)),
    bias_T=tuple(2**j for j in range(9, 18)),
)

PDF_TAUS = tuple(2**j for j in range(0, 7))

PROCESS = {
    "fgn": NoiseSpec(kind="fgn"),
    "lognormal_h1": NoiseSpec(kind="lognormal_h1"),
    "lognormal_h2": NoiseSpec(kind="lognormal_h2"),
    "mrw": NoiseSpec(kind="mrw"),
}


def _m_sweep(kind, axis, quantity, scale, R, seed, threads, m_list=None, n=1):
    """One sweep per embedding dimension, rows concatenated."""
    spec = PROCESS[kind]
    grid = scale.T_grid if axis == "window_T" else scale.tau_grid
    rows, plans = [], []
    columns = None
    for m in m_list or scale.m_list:
        plan = SweepPlan(spec.replace(length=scale.T), axis, grid, (quantity,), m=m, n=n,
                         T=scale.T, realizations=R, base_seed=seed)
        res = run_sweep(plan, threads)
        rows.extend(res.rows)
        columns = res.columns
        plans.append(plan.to_dict())
    return SweepResult(rows, columns, {"plans": plans})


def _sweeps(specs):
    def run(scale, R, seed, threads):
        out = []
        for kind, axis, quantity, m_list in specs:
            out.append((kind, axis, _m_sweep(kind, axis, quantity, scale, R, seed, threads, m_list)))
        return out

    return run


def _bias(kind):
    def run(scale, R, seed, threads):
        res = bias_grid(PROCESS[kind], scale.bias_k, scale.bias_T, realizations=R,
                        base_seed=seed, threads=threads)
        return [(kind, "k_T", res)]

    return run


def _std(kind):
    def run(scale, R, seed, threads):
        plan = SweepPlan(PROCESS[kind], "window_T", scale.T_grid, ("entropy", "ami", "rate"),
                         realizations=R, base_seed=seed)
        return [(kind, "window_T", run_sweep(plan, threads))]

    return run


def _pdf(kind):
    def run(scale, R, seed, threads):
        res = increment_pdf(PROCESS[kind].replace(length=scale.T), PDF_TAUS, base_seed=seed)
        return [(kind, "tau", res.histograms), (kind, "ks", res.ks), (kind, "moments", res.moments)]

    return run


_ONE = (1,)

FIGURES = {
    "fig1a": _bias("fgn"),
    "fig1b": _bias("lognormal_h1"),
    "fig1c": _bias("lognormal_h2"),
    "fig2a": _std("fgn"),
    "fig2b": _std("lognormal_h1"),
    "fig2c": _std("lognormal_h2"),
    "fig3a": _sweeps([("fgn", "window_T", "entropy", None)]),
    "fig3b": _sweeps([("fgn", "scale_tau", "entropy", None)]),
    "fig3c": _sweeps([("fgn", "window_T", "ami", None)]),
    "fig3d": _sweeps([("fgn", "scale_tau", "ami", None)]),
    "fig4a": _sweeps([("fgn", "window_T", "rate", None)]),
    "fig4b": _sweeps([("fgn", "scale_tau", "rate", None)]),
    "fig5": _sweeps([("fgn", "scale_tau", "rate_normalized", None)]),
    "fig6a": _sweeps([(k, "window_T", "rate", _ONE) for k in ("lognormal_h1", "lognormal_h2", "fgn")]),
    "fig6b": _sweeps([(k, "scale_tau", "rate", _ONE) for k in ("lognormal_h1", "lognormal_h2", "fgn")]),
    "fig7": _sweeps([(k, "scale_tau", "rate_normalized", _ONE) for k in ("lognormal_h1", "lognormal_h2", "fgn")]),
    "fig8a": _pdf("lognormal_h1"),
    "fig8b": _pdf("lognormal_h2"),
    "fig9a": _pdf("fgn"),
    "fig9b": _pdf("mrw"),
    "fig10a": _sweeps([("mrw", "window_T", "rate", _ONE)]),
    "fig10b": _sweeps([("mrw", "scale_tau", "rate", _ONE)]),
    "fig11": _sweeps([("mrw", "scale_tau", "rate_normalized", _ONE)]),
}


def reproduce(figure_id, out_dir, full_scale=False, realizations=None, base_seed=0, threads=None):
    """Compute and write the tables of one figure; returns the written paths."""
    if figure_id not in FIGURES:
        raise KeyError(figure_id)
    started = time.time()
    scale = FULL if full_scale else DESK
    R = realizations or scale.realizations
    tables = FIGURES[figure_id](scale, R, base_seed, threads)
    files = []
    for process, axis, res in tables:
        files.append(res.to_csv(out_dir / f"{figure_id}_{process}_{axis}.csv"))
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "figure": figure_id,
        "library_version": __version__,
        "full_scale": full_scale,
        "realizations": R,
        "base_seed": base_seed,
        "scale": scale.__dict__,
        "tables": [{"process": p, "axis": a, "meta": r.meta} for p, a, r in tables],
        "files": [str(f) for f in files],
        "wall_time_s": time.time() - started,
    }
    files.append(write_json(out_dir / f"{figure_id}.manifest.json", manifest))
    return files
