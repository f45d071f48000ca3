"""Command-line front end.

Every command writes CSV files into ``--out-dir`` (default: ``$TSFN_OUT_DIR``
or the working directory). The first line of each file is a ``#`` comment
holding the invocation and seed, so identical invocations produce
byte-identical files.

Exit codes: 0 success or convergence, 2 iteration cap reached, 3 divergence
or numerical failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import shlex
import sys

import numpy as np

from . import linalg, objectives, optimizer, rmt, rsvd
from .dataio import atomic_write_text, load_csv, outlier_vs_pca_report, variance_explained
from .errors import ConfigError, TsfnError
from .qsim import PipelineConfig, cosine, hybrid_step, shots_for
from .rng import make_rng, spawn_seeds

EXIT_OK, EXIT_MAX_ITER, EXIT_FAILURE, EXIT_USAGE = 0, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class Output:
    def __init__(self, args, argv):
        self.dir = args.out_dir or os.environ.get("TSFN_OUT_DIR") or "."
        os.makedirs(self.dir, exist_ok=True)
        self.header = f"# tsfn {shlex.join(argv)} seed={args.seed}"

    def write(self, name: str, columns, rows) -> str:
        lines = [self.header, ",".join(columns)]
        lines.extend(",".join(_fmt(r[c]) for c in columns) for r in rows)
        path = os.path.join(self.dir, name)
        atomic_write_text(path, "\n".join(lines) + "\n")
        return path


# --- optimize -------------------------------------------------------------

def _build_objective(args):
    if args.objective == "rosenbrock":
        return objectives.rosenbrock(args.n)
    if args.objective == "morse":
        lambdas = args.lambdas if args.lambdas is not None else [1.0, -1.0]
        return objectives.morse_quadratic(lambdas)
    raise UsageError(f"unknown objective {args.objective!r}")


def cmd_optimize(args, out: Output) -> int:
    obj = _build_objective(args)
    x0 = np.zeros(obj.dim) if args.x0 is None else np.asarray(args.x0, dtype=float)
    if x0.shape != (obj.dim,):
        raise UsageError(f"--x0 has {x0.shape[0]} entries, objective has dimension {obj.dim}")
    config = optimizer.OptimizerConfig(
        method=args.method, eta=args.eta, threshold=args.threshold, k=args.k,
        max_iter=args.max_iter, grad_tol=args.grad_tol, step_scale=args.step_scale,
        seed=args.seed)
    traj = optimizer.run(obj, config, x0)
    cols = ("iter", "f", "grad_norm", "k_used", "kappa_eff", "step_norm")
    path = out.write("trajectory.csv", cols, traj.rows())
    x = traj.iterates[-1]
    print(f"status={traj.status} iterations={traj.n_iter} f={traj.values[-1]:.6e} "
          f"grad_norm={traj.grad_norms[-1]:.3e}")
    print("x=" + ",".join(f"{v:.12g}" for v in x))
    if traj.message:
        print(traj.message, file=sys.stderr)
    print(f"wrote {path}")
    return {"converged": EXIT_OK, "max_iter": EXIT_MAX_ITER}.get(traj.status, EXIT_FAILURE)


# --- mp -------------------------------------------------------------------

def cmd_mp(args, out: Output) -> int:
    model = rmt.MPModel(c=args.m / args.n, sigma2=args.sigma ** 2)
    lo, hi = model.edges
    lam, dens = rmt.density_curve(model, args.points)
    out.write("mp_density.csv", ("lambda", "density"),
              ({"lambda": a, "density": b} for a, b in zip(lam, dens)))
    eigs = rmt.wishart_spectra(args.m, args.n, args.samples, args.sigma, args.seed) \
        if args.samples > 0 else np.empty(0)
    top = max(hi, float(eigs.max())) if eigs.size else hi
    edges = np.linspace(0.0, top * 1.05, args.bins + 1)
    counts = np.histogram(eigs, bins=edges)[0] if eigs.size else np.zeros(args.bins, dtype=int)
    width = edges[1] - edges[0]
    rows = ({"bin_left": edges[i], "bin_right": edges[i + 1], "count": int(counts[i]),
             "density": counts[i] / (eigs.size * width) if eigs.size else 0.0}
            for i in range(args.bins))
    out.write("mp_histogram.csv", ("bin_left", "bin_right", "count", "density"), rows)
    print(f"c={model.c:.6g} edges=({lo:.6f}, {hi:.6f}) point_mass={model.point_mass_at_zero:.6g}")
    if eigs.size:
        print(f"eigenvalues={eigs.size} ks={rmt.ks_distance(eigs, model):.6f}")
    else:
        print("eigenvalues=0 (empty histogram)")
    return EXIT_OK


# --- qverify --------------------------------------------------------------

def _instance(seed, n):
    rng = make_rng(seed)
    a = rng.standard_normal((n, n))
    return 0.5 * (a + a.T), rng.standard_normal(n)


def cmd_qverify(args, out: Output) -> int:
    if args.mode == "circuit" and args.n > 16:
        raise UsageError("circuit mode supports --n up to 16")
    pe_bits = args.pe_bits if args.pe_bits is not None else (12 if args.mode == "oracle" else 6)
    sweep = args.sweep if args.sweep is not None else []
    rows, diag_rows, sweep_rows = [], [], []
    cosines, sign_ok, gaps = [], [], []
    for inst, seed in enumerate(spawn_seeds(args.seed, args.instances)):
        h, g = _instance(seed, args.n)
        eig = linalg.sym_eig(h)
        k = min(args.rank, args.n)
        thr = linalg.threshold_for_rank(eig, k)
        classical, spec = optimizer.tsfn_direction(h, g, threshold=thr)
        shots = args.shots
        cfg = PipelineConfig(pe_bits=pe_bits, threshold=thr, shots=shots, mode=args.mode,
                             seed=seed, n_trotter=args.n_trotter)
        direction, diag = hybrid_step(h, g, cfg)
        cs = cosine(direction, classical)
        cosines.append(cs)
        row = {"instance": inst, "n": args.n, "pe_bits": pe_bits, "k": diag.k,
               "kappa_eff": spec.kappa_eff, "p_success": diag.p_success, "cosine": cs,
               "shots": shots, "sign_agreement": math.nan, "unresolved": 0,
               "circuit_oracle_gap": math.nan}
        if shots > 0:
            exact = np.sign(classical)
            agree = float(np.mean(np.sign(direction) == exact))
            row["sign_agreement"] = agree
            row["unresolved"] = int(np.sum(diag.signed.unresolved))
            sign_ok.append(agree == 1.0)
        if args.mode == "circuit":
            ref, _ = hybrid_step(h, g, PipelineConfig(pe_bits=pe_bits, threshold=thr,
                                                      shots=shots, seed=seed))
            gap = float(np.max(np.abs(direction - ref)))
            row["circuit_oracle_gap"] = gap
            gaps.append(gap)
        rows.append(row)
        for r in diag.rows(classical):
            diag_rows.append({"instance": inst, **r})
        for b in sweep:
            d_b, diag_b = hybrid_step(h, g, PipelineConfig(pe_bits=b, threshold=thr, mode="oracle"))
            sweep_rows.append({"instance": inst, "pe_bits": b, "k": diag_b.k,
                               "p_success": diag_b.p_success, "cosine": cosine(d_b, classical)})
    cols = ("instance", "n", "pe_bits", "k", "kappa_eff", "p_success", "cosine", "shots",
            "sign_agreement", "unresolved", "circuit_oracle_gap")
    out.write("qverify.csv", cols, rows)
    out.write("qverify_diagnostics.csv",
              ("instance", "stage", "k", "p_success", "pe_bits", "fidelity_to_classical"),
              diag_rows)
    if sweep_rows:
        out.write("qverify_sweep.csv", ("instance", "pe_bits", "k", "p_success", "cosine"),
                  sweep_rows)
        for b in sweep:
            cs_b = [r["cosine"] for r in sweep_rows if r["pe_bits"] == b]
            print(f"pe_bits={b} min_cosine={min(cs_b):.8f}")
    print(f"instances={args.instances} n={args.n} mode={args.mode} pe_bits={pe_bits} "
          f"min_cosine={min(cosines):.8f}")
    if sign_ok:
        print(f"sign_agreement_rate={np.mean(sign_ok):.4f} "
              f"(shots={args.shots}; suggested 10·N·log2N·κ²≈"
              f"{shots_for(args.n, rows[0]['kappa_eff'])} for instance 0)")
    if gaps:
        print(f"max_circuit_oracle_gap={max(gaps):.3e}")
    return EXIT_OK


# --- rsvd -----------------------------------------------------------------

def cmd_rsvd(args, out: Output) -> int:
    a = make_rng(args.seed).standard_normal((args.m, args.n))
    c = args.c if args.c is not None else rsvd.required_columns(
        "fro_high_prob", args.k, args.eps, args.beta, args.delta)
    config = rsvd.RsvdConfig(c=c, k=args.k, beta=args.beta, delta=args.delta, seed=args.seed)
    report = rsvd.verify_bounds(a, config, args.trials, args.eps)
    out.write("rsvd.csv", ("trial", "fro_err_sq", "opt_err_sq", "bound_rhs", "pass"),
              report.rows())
    summary = list(report.summary_rows())
    cols = ("variant", "c_required", "c_used", "applicable", "pass_rate", "mean_err_sq",
            "bound_rhs", "holds")
    out.write("rsvd_summary.csv", cols, summary)
    print(f"{'variant':<18}{'c_req':>7}{'c':>7}{'applies':>9}{'pass_rate':>11}{'holds':>7}")
    for r in summary:
        print(f"{r['variant']:<18}{r['c_required']:>7}{r['c_used']:>7}"
              f"{'yes' if r['applicable'] else 'no':>9}{r['pass_rate']:>11.3f}"
              f"{'yes' if r['holds'] else 'no':>7}")
    return EXIT_OK


# --- pca ------------------------------------------------------------------

def _parse_synthetic(spec: str) -> dict:
    fields = {"rank": 3, "spike": 25.0, "dim": 50, "n": 500}
    for part in spec.split(","):
        if not part.strip():
            continue
        key, _, val = part.partition("=")
        key = key.strip()
        if key not in fields or not val:
            raise UsageError(f"bad --synthetic field {part!r}; use rank=,spike=,dim=,n=")
        fields[key] = float(val) if key == "spike" else int(val)
    return fields


def cmd_pca(args, out: Output) -> int:
    if (args.input is None) == (args.synthetic is None):
        raise UsageError("give exactly one of --input or --synthetic")
    if args.input is not None:
        ds = load_csv(args.input, has_header=args.has_header, target_column=args.target_column,
                      delimiter=args.delimiter)
    else:
        f = _parse_synthetic(args.synthetic)
        ds = objectives.synthetic_correlated_data(f["n"], f["dim"], f["rank"], f["spike"],
                                                  seed=args.seed,
                                                  with_targets=args.widths is not None)
    ve = variance_explained(ds)
    out.write("pca.csv", ("component", "eigenvalue", "cumulative"),
              ({"component": i + 1, "eigenvalue": e, "cumulative": c}
               for i, (e, c) in enumerate(zip(ve.eigenvalues, ve.cumulative))))
    print(f"samples={ds.n_samples} dim={ds.dim} n90={ve.n90}")
    if args.widths is not None:
        report = outlier_vs_pca_report(ds, args.widths, seed=args.seed)
        out.write("outliers.csv", ("n90", "n_outliers", "widths", "seed"), [report.row()])
        print(f"n_outliers={report.n_outliers} difference={report.difference}")
    return EXIT_OK


# --- parser ---------------------------------------------------------------

REQUIRED = {
    "optimize": ("objective", "method"),
    "mp": ("m", "n"),
    "rsvd": ("m", "n", "k", "eps"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tsfn", description="Truncated saddle-free Newton toolkit.")
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out-dir", default=None)
    common.add_argument("--config", default=None, help="JSON file of flag values; flags win")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("optimize", parents=[common], help="run an optimizer")
    p.add_argument("--objective", choices=("rosenbrock", "morse"))
    p.add_argument("--n", type=int, default=2, help="rosenbrock dimension")
    p.add_argument("--lambdas", type=_floats, help="morse eigenvalues, e.g. 1,-1")
    p.add_argument("--method", choices=optimizer.METHODS)
    p.add_argument("--threshold", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--eta", type=float, default=1e-3)
    p.add_argument("--x0", type=_floats)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--grad-tol", type=float, default=1e-8)
    p.add_argument("--step-scale", type=float, default=1.0)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("mp", parents=[common], help="Wishart spectra vs the MP law")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--points", type=int, default=400)
    p.set_defaults(func=cmd_mp)

    p = sub.add_parser("qverify", parents=[common], help="quantum vs classical tsfn steps")
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--rank", type=int, default=4, help="threshold = |λ_rank|")
    p.add_argument("--pe-bits", type=int)
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--mode", choices=("oracle", "circuit"), default="oracle")
    p.add_argument("--n-trotter", type=int)
    p.add_argument("--sweep", type=_ints, help="pe_bits values for a sweep table, e.g. 4,8,12")
    p.set_defaults(func=cmd_qverify)

    p = sub.add_parser("rsvd", parents=[common], help="column-sampling SVD bound checks")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--c", type=int, help="sampled columns (default: high-probability requirement)")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--beta", type=float, default=1.0)
    p.set_defaults(func=cmd_rsvd)

    p = sub.add_parser("pca", parents=[common], help="variance explained and Hessian outliers")
    p.add_argument("--input")
    p.add_argument("--has-header", action="store_true")
    p.add_argument("--target-column")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--synthetic", help="rank=3,spike=25,dim=50,n=500")
    p.add_argument("--widths", type=_ints, help="MLP hidden+output widths, e.g. 8,8,1")
    p.set_defaults(func=cmd_pca)
    return parser


def _apply_config(parser, argv):
    """Parse twice so a JSON config fills in flags the command line left out."""
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    try:
        with open(args.config) as fh:
            values = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {args.config}: {exc}")
    if not isinstance(values, dict):
        parser.error("config file must hold a JSON object")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    values = {k.replace("-", "_"): v for k, v in values.items()}
    unknown = sorted(set(values) - known)
    if unknown:
        parser.error(f"unknown config keys for {args.command}: {', '.join(unknown)}")
    for action in sub._actions:
        if action.dest in values and action.type is not None and isinstance(values[action.dest], str):
            values[action.dest] = action.type(values[action.dest])
    sub.set_defaults(**values)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = _apply_config(parser, argv)
    missing = [f"--{name.replace('_', '-')}" for name in REQUIRED.get(args.command, ())
               if getattr(args, name) is None]
    if missing:
        parser.error(f"{args.command}: missing required flag(s): {' '.join(missing)}")
    try:
        out = Output(args, argv)
        return args.func(args, out)
    except (UsageError, ConfigError) as exc:
        parser.error(str(exc))
    except OSError as exc:
        parser.error(f"{exc.filename or ''}: {exc.strerror or exc}")
    except TsfnError as exc:
        print(f"tsfn {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
