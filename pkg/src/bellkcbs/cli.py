from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any

from . import __version__
from .dataset import dump_dataset, load_dataset
from .errors import DatasetError, DomainError, NumericError, StructuralError
from .figures import CURVE_HEADER, emit_figure_data, write_csv
from .hidden import classical_bounds
from .inequalities import ALPHA_BOUND, BETA_BOUND, correlators_from_behavior, alpha_chsh, beta_kcbs, region_of
from .quantum import THETA_U, THETA_V, QuantumModel
from .scenario import DEFAULT_TOL, behavior_from_json, check_no_disturbance, check_no_signalling, marginalize_bob
from .search import OBJECTIVES, TABULATED_PHIS, joint_violation_window, optimize_state_params, phi_scan
from .shotnoise import N_PER_SETTING, N_RESAMPLES, simulate_experiment
from .verify import THEORY_TOL, verify_paper

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


def _emit(args, name: str, payload: Any) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if args.output_dir:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_csv(args, name: str, header, rows) -> None:
    if args.output_dir:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / name, "w", encoding="utf-8", newline="") as fh:
            write_csv(fh, header, rows)
    else:
        write_csv(sys.stdout, header, rows)


def cmd_scan(args) -> int:
    points = phi_scan(args.phi_min, args.phi_max, args.steps, args.theta_u, args.theta_v)
    _emit_csv(args, "scan.csv", CURVE_HEADER + ("region",), [(p.phi, p.alpha, p.beta, p.region) for p in points])
    if args.window:
        w = joint_violation_window(args.theta_u, args.theta_v)
        print(f"joint-violation window: {'none' if w is None else f'[{w[0]:.4f}, {w[1]:.4f}]'}", file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    tol = DEFAULT_TOL if args.tol is None else args.tol
    if args.behavior:
        text = Path(args.behavior).read_text(encoding="utf-8")
        behavior = behavior_from_json(json.loads(text))
        source = {"behavior_file": str(args.behavior)}
    else:
        if args.phi is None:
            raise DomainError("evaluate needs --phi or --behavior")
        behavior = QuantumModel(args.phi, args.theta_u, args.theta_v).behavior()
        source = {"phi": args.phi, "theta_u": args.theta_u, "theta_v": args.theta_v}
    ns = check_no_signalling(behavior, tol)
    marginal = marginalize_bob(behavior)
    nd = check_no_disturbance(marginal, tol)
    c = correlators_from_behavior(behavior, marginal)
    a, b = alpha_chsh(c), beta_kcbs(c)
    _emit(args, "evaluate.json", {
        **source,
        "alpha": a,
        "beta": b,
        "region": region_of(a, b),
        "alpha_bound": ALPHA_BOUND,
        "beta_bound": BETA_BOUND,
        "correlators": c.as_labels(),
        "tol": tol,
        "no_signalling_max_violation": ns.max_violation,
        "no_disturbance_max_violation": nd.max_violation,
    })
    return EXIT_OK if ns.ok and nd.ok else EXIT_CHECK


def cmd_bounds(args) -> int:
    b = classical_bounds()
    _emit(args, "bounds.json", b)
    ok = b["max_alpha_local"] == 2 and b["max_beta_noncontextual"] == 3
    return EXIT_OK if ok else EXIT_CHECK


def cmd_optimize(args) -> int:
    phis = TABULATED_PHIS if args.phi is None else (args.phi,)
    results = [
        optimize_state_params(p, args.objective, args.weight, args.delta, witness=(args.theta_u, args.theta_v))
        for p in phis
    ]
    payload = results[0].as_dict() if args.phi is not None else [r.as_dict() for r in results]
    _emit(args, "optimize.json", payload)
    return EXIT_OK if all(r.objective_value >= r.witness_value for r in results) else EXIT_CHECK


def cmd_simulate(args) -> int:
    model = QuantumModel(args.phi, args.theta_u, args.theta_v)
    report = simulate_experiment(model, args.counts, args.seed, args.resamples)
    _emit(args, "simulate.json", report.as_dict())
    return EXIT_OK


def cmd_ingest(args) -> int:
    records = load_dataset(args.input)
    _emit(args, "experiment.json", dump_dataset(records))
    print(f"{len(records)} records ok", file=sys.stderr)
    return EXIT_OK


def cmd_verify_paper(args) -> int:
    tol = THEORY_TOL if args.tol is None else args.tol
    report = verify_paper(load_dataset(args.input), args.theta_u, args.theta_v, tol, strict=args.strict)
    _emit(args, "verification.json", report.as_dict())
    for c in report.checks:
        if c.status != "pass":
            print(f"{c.status.upper():8s} {c.state_id:6s} {c.field:24s} recomputed {c.recomputed:.4f}"
                  f" reported {c.reported:.4f}", file=sys.stderr)
    print(f"{report.count('pass')} pass, {report.count('fail')} fail, {report.count('flagged')} flagged",
          file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_CHECK


def cmd_emit_figure(args) -> int:
    scan = phi_scan(0.0, math.pi / 4, args.steps, args.theta_u, args.theta_v)
    out = args.output_dir or "."
    paths = emit_figure_data(scan, load_dataset(args.input), out)
    for p in paths.values():
        print(p, file=sys.stderr)
    return EXIT_OK


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--theta-u", type=float, default=d(THETA_U), help="state angle theta_u (default %(default)s)")
    parser.add_argument("--theta-v", type=float, default=d(THETA_V), help="state angle theta_v")
    parser.add_argument("--tol", type=float, default=d(None), help="check tolerance (command specific default)")
    parser.add_argument("--seed", type=int, default=d(0), help="RNG seed")
    parser.add_argument("--output-dir", default=d(None), help="write files here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellkcbs",
        description="Joint CHSH and KCBS violation: simulator and verification toolkit.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("scan", cmd_scan, "alpha and beta along the state family (CSV)")
    p.add_argument("--phi-min", type=float, default=0.0)
    p.add_argument("--phi-max", type=float, default=math.pi / 4)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--window", action="store_true", help="also report the joint-violation window on stderr")

    p = add("evaluate", cmd_evaluate, "classify one state or a behavior file (JSON)")
    p.add_argument("--phi", type=float)
    p.add_argument("--behavior", help="behavior JSON instead of a quantum state")

    add("bounds", cmd_bounds, "exhaustive classical bounds with maximizing strategies (JSON)")

    p = add("optimize", cmd_optimize, "re-optimize (theta_u, theta_v) at fixed phi (JSON)")
    p.add_argument("--phi", type=float, help="default: every tabulated phi")
    p.add_argument("--objective", choices=OBJECTIVES, default="max_min_margin")
    p.add_argument("--weight", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=0.0)

    p = add("simulate", cmd_simulate, "finite-count experiment simulation (JSON)")
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--counts", type=int, default=N_PER_SETTING)
    p.add_argument("--resamples", type=int, default=N_RESAMPLES)

    p = add("ingest", cmd_ingest, "validate a dataset file and print it normalized")
    p.add_argument("--input", help="dataset JSON (default: bundled)")

    p = add("verify-paper", cmd_verify_paper, "recompute published alpha, beta and sigmas")
    p.add_argument("--input", help="dataset JSON (default: bundled)")
    p.add_argument("--strict", action="store_true", help="treat flagged inconsistencies as failures")

    p = add("emit-figure", cmd_emit_figure, "write curve.csv, points.csv and bounds.csv")
    p.add_argument("--input", help="dataset JSON (default: bundled)")
    p.add_argument("--steps", type=int, default=201)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DatasetError, DomainError, StructuralError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
