"""Command-line interface.

Exit codes: 0 success, 2 usage or validation error, 3 I/O or parse error,
4 numerical failure.  ``ERSATZ_OUTPUT_DIR`` sets the default output
directory.
"""

import argparse
import math
import os
import sys
import time
from pathlib import Path

from . import __version__
from .errors import DomainError, ErsatzError, LengthError, NumericalError
from .estimators import (
    EstimatorConfig,
    ersatz_ami,
    ersatz_entropy,
    ersatz_entropy_rate,
    normalized_entropy_rate,
)
from .experiments import AXES, SWEEP_QUANTITIES, SweepPlan, bias_grid, increment_pdf, run_sweep
from .io import FileFormatError, load_trajectory, save_trajectory, write_json
from .synthesis import KINDS, NoiseSpec, synth_noise, integrate_to_motion

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4
SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


def parse_int(text):
    """Base-10 integer, or ``2^N``."""
    s = str(text).strip()
    if "^" in s:
        base, exp = s.split("^", 1)
        if base.strip() != "2":
            raise argparse.ArgumentTypeError(f"only 2^N powers are accepted, got {text!r}")
        return 2 ** int(exp, 10)
    try:
        return int(s, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def parse_int_list(text):
    """Comma list and/or ``a:b`` ranges; ``2^a:2^b`` expands to powers of two."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            lo, hi = part.split(":", 1)
            if lo.strip().startswith("2^") and hi.strip().startswith("2^"):
                a, b = int(lo.strip()[2:]), int(hi.strip()[2:])
                out.extend(2**j for j in range(a, b + 1))
            else:
                out.extend(range(parse_int(lo), parse_int(hi) + 1))
        else:
            out.append(parse_int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty list: {text!r}")
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _out_dir(args):
    return Path(args.out or os.environ.get("ERSATZ_OUTPUT_DIR") or ".")


def _add_process_flags(p, length_default=2**16):
    p.add_argument("--kind", choices=KINDS, default="fgn")
    p.add_argument("--hurst", type=float, default=0.7)
    p.add_argument("--sigma1", type=float, default=1.0)
    p.add_argument("--length", type=parse_int, default=length_default)
    p.add_argument("--seed", type=parse_int, default=0)
    p.add_argument("--c2", type=float, default=0.025)
    p.add_argument("--L", dest="integral_scale", type=parse_int, default=None)
    p.add_argument("--mu", type=float, default=None, help="log-normal target mean")
    p.add_argument("--sigma", type=float, default=None, help="log-normal target std")


def _spec_from(args, **override):
    kw = dict(kind=args.kind, hurst=args.hurst, sigma1=args.sigma1, length=args.length,
              seed=args.seed, c2=args.c2, integral_scale=args.integral_scale)
    if args.mu is not None:
        kw["lognormal_mu"] = args.mu
    if args.sigma is not None:
        kw["lognormal_sigma"] = args.sigma
    kw.update(override)
    flag_of = {"hurst": "--hurst", "sigma1": "--sigma1", "length": "--length", "seed": "--seed",
               "c2": "--c2", "integral_scale": "--L", "lognormal": "--mu/--sigma", "kind": "--kind"}
    try:
        return NoiseSpec(**kw)
    except DomainError as exc:
        msg = str(exc)
        flag = next((f for key, f in flag_of.items() if msg.startswith(key)), None)
        if flag is None and "hurst + c2" in msg:
            flag = "--hurst/--c2"
        raise UsageError(f"invalid {flag or 'parameter'}: {msg}") from None


def _check_k(k, decimate=True):
    if k < 1:
        raise UsageError(f"invalid --k: must be a positive integer, got {k}")
    return EstimatorConfig(k=k, decimate=decimate)


def _add_decimate_flag(p):
    p.add_argument("--no-decimate", dest="decimate", action="store_false",
                   help="keep every delay vector at scale tau instead of one every tau samples")


def build_parser():
    parser = _Parser(prog="ersatz", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ersatz {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="synthesize a noise or motion to CSV")
    _add_process_flags(p)
    p.add_argument("--role", choices=("motion", "noise"), default="motion")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--name", default=None, help="file stem (default derived from the process parameters)")

    p = sub.add_parser("estimate", help="estimate an ersatz quantity from a trajectory CSV")
    p.add_argument("input")
    p.add_argument("--quantity", choices=("entropy", "ami", "rate", "rate-normalized"), required=True)
    p.add_argument("--m", type=parse_int, default=1)
    p.add_argument("--n", type=parse_int, default=1)
    p.add_argument("--tau", type=parse_int, default=1)
    p.add_argument("--k", type=parse_int, default=5)
    p.add_argument("--window", type=parse_int, default=None)
    p.add_argument("--pool", action="store_true", help="pool windows instead of averaging")
    p.add_argument("--csv", default=None, help="also append the estimate to this CSV")
    _add_decimate_flag(p)

    p = sub.add_parser("sweep", help="ensemble sweep along one axis")
    _add_process_flags(p)
    p.add_argument("--axis", choices=AXES, required=True)
    p.add_argument("--grid", type=parse_int_list, required=True)
    p.add_argument("--quantity", dest="quantities", type=lambda s: s.split(","), default=["rate"])
    p.add_argument("--m", type=parse_int, default=1)
    p.add_argument("--n", type=parse_int, default=1)
    p.add_argument("--tau", type=parse_int, default=1)
    p.add_argument("--T", type=parse_int, default=2**16)
    p.add_argument("--k", type=parse_int, default=5)
    p.add_argument("--realizations", type=parse_int, default=20)
    p.add_argument("--threads", type=parse_int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--name", default="sweep")
    _add_decimate_flag(p)

    p = sub.add_parser("bias-grid", help="entropy rate over a (k, T) grid")
    _add_process_flags(p)
    p.add_argument("--k-grid", type=parse_int_list, default=list(range(4, 19)))
    p.add_argument("--T-grid", type=parse_int_list, default=[2**j for j in range(9, 16)])
    p.add_argument("--m", type=parse_int, default=1)
    p.add_argument("--tau", type=parse_int, default=1)
    p.add_argument("--realizations", type=parse_int, default=20)
    p.add_argument("--threads", type=parse_int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--name", default="bias")

    p = sub.add_parser("pdf", help="normalized increment histograms and KS distances")
    _add_process_flags(p)
    p.add_argument("--tau-grid", type=parse_int_list, default=[2**j for j in range(7)])
    p.add_argument("--realizations", type=parse_int, default=1)
    p.add_argument("--bins", default="fd")
    p.add_argument("--out", default=None)
    p.add_argument("--name", default="pdf")

    p = sub.add_parser("reproduce", help="write the data behind one figure")
    p.add_argument("figure")
    p.add_argument("--full-scale", action="store_true")
    p.add_argument("--realizations", type=parse_int, default=None)
    p.add_argument("--seed", type=parse_int, default=0)
    p.add_argument("--threads", type=parse_int, default=None)
    p.add_argument("--out", default=None)
    return parser


# --------------------------------------------------------------------------
# verbs
# --------------------------------------------------------------------------
def cmd_synth(args):
    spec = _spec_from(args)
    traj = synth_noise(spec)
    if args.role == "motion":
        traj = integrate_to_motion(traj)
    stem = args.name or f"{spec.kind}_H{spec.hurst:g}_T{spec.length}_seed{spec.seed}_{args.role}"
    path = save_trajectory(traj, _out_dir(args) / f"{stem}.csv")
    print(f"wrote {path} ({len(traj)} samples, role={traj.role})")
    return EXIT_OK


def cmd_estimate(args):
    cfg = _check_k(args.k, args.decimate)
    for flag in ("m", "n", "tau"):
        if getattr(args, flag) < 1:
            raise UsageError(f"invalid --{flag}: must be >= 1")
    traj = load_trajectory(args.input)
    kw = {"window": args.window, "pool": args.pool}
    if args.quantity == "entropy":
        est = ersatz_entropy(traj, args.m, args.tau, cfg, **kw)
    elif args.quantity == "ami":
        est = ersatz_ami(traj, args.m, args.n, args.tau, cfg, **kw)
    elif args.quantity == "rate":
        est = ersatz_entropy_rate(traj, args.m, args.tau, cfg, **kw)
    else:
        est = normalized_entropy_rate(traj, args.m, args.tau, cfg, **kw)
    row = est.row()
    print(" ".join(f"{k}={v}" for k, v in row.items()))
    if args.csv:
        from .io import write_rows, read_rows

        path = Path(args.csv)
        rows = [dict(r) for r in read_rows(path)] if path.exists() else []
        write_rows(path, rows + [row], list(row))
    return EXIT_OK


def _manifest(path, kind, params, files, started, extra=None):
    obj = {
        "schema_version": SCHEMA_VERSION,
        "command": kind,
        "library_version": __version__,
        "params": params,
        "files": [str(f) for f in files],
        "wall_time_s": time.time() - started,
    }
    obj.update(extra or {})
    return write_json(path, obj)


def cmd_sweep(args):
    started = time.time()
    bad = [q for q in args.quantities if q not in SWEEP_QUANTITIES]
    if bad:
        raise UsageError(f"invalid --quantity {bad}; choose from {SWEEP_QUANTITIES}")
    spec = _spec_from(args, length=args.T)
    try:
        plan = SweepPlan(spec, args.axis, tuple(args.grid), tuple(args.quantities), m=args.m,
                         n=args.n, tau=args.tau, T=args.T, realizations=args.realizations,
                         base_seed=args.seed, estimator=_check_k(args.k, args.decimate))
    except DomainError as exc:
        raise UsageError(f"invalid sweep: {exc}") from None
    res = run_sweep(plan, args.threads)
    out = _out_dir(args)
    path = res.to_csv(out / f"{args.name}_{spec.kind}_{args.axis}.csv")
    _manifest(out / f"{args.name}_{spec.kind}_{args.axis}.manifest.json", "sweep", plan.to_dict(), [path], started)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_bias_grid(args):
    started = time.time()
    spec = _spec_from(args)
    cfg = _check_k(min(args.k_grid))
    try:
        res = bias_grid(spec, args.k_grid, args.T_grid, m=args.m, tau=args.tau,
                        realizations=args.realizations, base_seed=args.seed, cfg=cfg, threads=args.threads)
    except DomainError as exc:
        raise UsageError(f"invalid grid: {exc}") from None
    out = _out_dir(args)
    path = res.to_csv(out / f"{args.name}_{spec.kind}_k_T.csv")
    _manifest(out / f"{args.name}_{spec.kind}_k_T.manifest.json", "bias-grid", res.meta, [path], started)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_pdf(args):
    started = time.time()
    spec = _spec_from(args)
    bins = int(args.bins) if args.bins.isdigit() else args.bins
    res = increment_pdf(spec, args.tau_grid, realizations=args.realizations, bins=bins)
    out = _out_dir(args)
    files = [
        res.histograms.to_csv(out / f"{args.name}_{spec.kind}_tau.csv"),
        res.ks.to_csv(out / f"{args.name}_{spec.kind}_ks.csv"),
        res.moments.to_csv(out / f"{args.name}_{spec.kind}_moments.csv"),
    ]
    _manifest(out / f"{args.name}_{spec.kind}_tau.manifest.json", "pdf", res.histograms.meta, files, started)
    for f in files:
        print(f"wrote {f}")
    return EXIT_OK


def cmd_reproduce(args):
    from .figures import FIGURES, reproduce

    if args.figure not in FIGURES:
        raise UsageError(
            f"unknown figure id {args.figure!r}; choose from {', '.join(sorted(FIGURES, key=_fig_key))}"
        )
    if args.realizations is not None and args.realizations < 1:
        raise UsageError("invalid --realizations: must be >= 1")
    files = reproduce(args.figure, _out_dir(args), full_scale=args.full_scale,
                      realizations=args.realizations, base_seed=args.seed, threads=args.threads)
    for f in files:
        print(f"wrote {f}")
    return EXIT_OK


def _fig_key(fid):
    digits = "".join(c for c in fid if c.isdigit())
    return (int(digits), fid)


VERBS = {
    "synth": cmd_synth,
    "estimate": cmd_estimate,
    "sweep": cmd_sweep,
    "bias-grid": cmd_bias_grid,
    "pdf": cmd_pdf,
    "reproduce": cmd_reproduce,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return VERBS[args.verb](args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except (FileFormatError, OSError) as exc:
        print(f"ersatz: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"ersatz: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, LengthError) as exc:
        print(f"ersatz: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ErsatzError as exc:  # pragma: no cover - every subclass is mapped above
        print(f"ersatz: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
