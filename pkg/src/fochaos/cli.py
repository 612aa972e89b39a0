"""Command-line interface: simulate, compare, validate-gains, sweep.

Exit codes: 0 success (and admissible gains for validate-gains), 1 gains
rejected, 2 configuration error, 3 solver divergence.
"""

import argparse
import dataclasses
import sys
from pathlib import Path

import yaml

from .experiments import (ScenarioConfig, compare_controllers, compute_metrics,
                          emit_comparison, emit_outputs, run_closed_loop)
from .fde_solver import SolverDivergenceError
from .frac_calc import validate_sliding_gains

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="fochaos",
        description="Simulation and control of fractional-order chaotic "
                    "systems via adaptive delayed feedback.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one closed-loop scenario")
    p_sim.add_argument("--config", required=True, help="YAML scenario file")
    p_sim.add_argument("--plot", action="store_true",
                       help="also render figures (PDF)")
    p_sim.add_argument("--out-dir", default=None,
                       help="override the config's output directory")

    p_cmp = sub.add_parser(
        "compare",
        help="run the configured controller against the linear baseline")
    p_cmp.add_argument("--config", required=True, help="YAML scenario file")
    p_cmp.add_argument("--plot", action="store_true")
    p_cmp.add_argument("--out-dir", default=None)

    p_val = sub.add_parser("validate-gains",
                           help="check sliding-gain admissibility")
    p_val.add_argument("--alpha", type=float, required=True)
    p_val.add_argument("--eta", required=True,
                       help="comma-separated gains, e.g. 1,2")

    p_swp = sub.add_parser("sweep",
                           help="rerun a scenario over several values of one "
                                "config key")
    p_swp.add_argument("--config", required=True)
    p_swp.add_argument("--param", required=True, help="flat config key")
    p_swp.add_argument("--values", required=True,
                       help="comma-separated YAML scalars/lists")
    p_swp.add_argument("--plot", action="store_true")
    p_swp.add_argument("--out-dir", default=None)
    return parser


def _load_config(path, out_dir=None):
    config = ScenarioConfig.from_yaml(path)
    if out_dir is not None:
        config = dataclasses.replace(config, out_dir=out_dir)
    if config.out_dir is None:
        config = dataclasses.replace(config, out_dir="runs/" + Path(path).stem)
    return config


def _print_metrics(metrics, prefix=""):
    for key, value in metrics.as_dict().items():
        print(f"{prefix}{key}={value:.6g}")


def _cmd_simulate(args):
    config = _load_config(args.config, args.out_dir)
    trajectory = run_closed_loop(config)
    metrics = compute_metrics(trajectory)
    written = emit_outputs(trajectory, metrics, config.out_dir, plots=args.plot)
    _print_metrics(metrics)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_compare(args):
    config = _load_config(args.config, args.out_dir)
    if config.controller == "linear_delayed":
        adaptive = dataclasses.replace(config, controller="adaptive_delayed")
        linear = config
    else:
        adaptive = dataclasses.replace(config, controller="adaptive_delayed")
        linear = dataclasses.replace(config, controller="linear_delayed")
    report = compare_controllers(adaptive, linear)
    written = emit_comparison(report, config.out_dir, plots=args.plot)
    for kind, metrics in zip(report.kinds, report.metrics):
        _print_metrics(metrics, prefix=f"{kind}.")
    print(f"lower steady-state error: {report.winner_steady_state()}")
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_validate_gains(args):
    try:
        eta = [float(v) for v in args.eta.split(",") if v.strip() != ""]
    except ValueError:
        raise ValueError(f"could not parse --eta {args.eta!r}") from None
    check = validate_sliding_gains(args.alpha, eta)
    verdict = "admissible" if check.admissible else "inadmissible"
    print(f"eta={tuple(eta)} alpha={args.alpha}: {verdict}")
    for root, margin, arg_s in zip(check.roots, check.margins,
                                   check.implied_s_args):
        print(f"  root w={root:.6g}  |arg w|-a*pi/2={margin:+.6g}  "
              f"implied |arg s|={arg_s:.6g}")
    return EXIT_OK if check.admissible else EXIT_REJECTED


def _cmd_sweep(args):
    base = _load_config(args.config, args.out_dir)
    values = [yaml.safe_load(v) for v in args.values.split(",")]
    if args.param not in {f.name for f in dataclasses.fields(ScenarioConfig)} \
            or args.param in ("system", "out_dir"):
        raise ValueError(f"cannot sweep over {args.param!r}")
    rows = []
    root = Path(base.out_dir)
    for value in values:
        config = dataclasses.replace(
            base, **{args.param: value},
            out_dir=str(root / f"{args.param}={value}"))
        trajectory = run_closed_loop(config)
        metrics = compute_metrics(trajectory)
        emit_outputs(trajectory, metrics, config.out_dir, plots=args.plot)
        rows.append((value, metrics))
        print(f"{args.param}={value}:")
        _print_metrics(metrics, prefix="  ")
    root.mkdir(parents=True, exist_ok=True)
    lines = [f"{args.param},steady_state_error,convergence_time,k_hat_final,"
             "control_effort"]
    for value, metrics in rows:
        m = metrics.as_dict()
        lines.append(f"{value},{m['steady_state_error']:.12g},"
                     f"{m['convergence_time']:.12g},{m['k_hat_final']:.12g},"
                     f"{m['control_effort']:.12g}")
    summary = root / "sweep_summary.csv"
    summary.write_text("\n".join(lines) + "\n")
    print(f"wrote {summary}")
    return EXIT_OK


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "compare": _cmd_compare,
        "validate-gains": _cmd_validate_gains,
        "sweep": _cmd_sweep,
    }
    try:
        return handlers[args.command](args)
    except SolverDivergenceError as exc:
        print(f"error: solver diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ValueError, OSError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
