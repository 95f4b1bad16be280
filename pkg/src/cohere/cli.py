"""Command-line front end.

Subcommands: solve, autocorr, grid, levels, verify, weights.  Numeric
output uses 17 significant digits so downstream plotting reproduces runs
without loss; every subcommand is deterministic for a fixed configuration.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 budget
refusal.

Environment: COHERE_THREADS caps the linear-algebra thread pools;
COHERE_GRID_BUDGET overrides the planar-grid resource budget.  An optional
--config file holds flat key=value lines whose keys are the long option
names (dashes or underscores); explicit flags win.
"""
from __future__ import annotations

import argparse
import os
import sys

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_BUDGET = 3

_FMT = "%.17g"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _apply_thread_env() -> None:
    threads = os.environ.get("COHERE_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)


def _load_config(path: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"malformed config line: {line!r}")
            key, value = line.split("=", 1)
            entries[key.strip().replace("-", "_")] = value.strip()
    return entries


def _merge_config(args: argparse.Namespace, defaults: dict) -> None:
    """Fill options still at None from the config file, then from the
    built-in defaults."""
    config = _load_config(args.config) if getattr(args, "config", None) else {}
    for key, fallback in defaults.items():
        if getattr(args, key, None) is None:
            if key in config:
                setattr(args, key, type(fallback)(config[key]) if fallback is not None else config[key])
            else:
                setattr(args, key, fallback)


def _weight_from_args(args) -> "object":
    from cohere.weights import WeightSpec

    family = args.family
    if family == "exponential":
        return WeightSpec.exponential()
    if family == "stretched":
        if args.alpha is None:
            raise UsageError("the stretched family requires --alpha")
        return WeightSpec.stretched(float(args.alpha))
    raise UsageError(f"unknown weight family {family!r}")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="cohere",
        description="Coherent states for the hydrogen atom: solving, traces, fields, verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve for the scale matching a target mean level")
    p.add_argument("--alpha", type=float, required=True, help="stretch exponent of the weight")
    p.add_argument("--mean", type=float, required=True, help="target mean principal quantum number")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--eccentricity", type=float, default=None, help="Kepler eccentricity for the angular factor")
    p.add_argument("--tail-eps", type=float, default=None)
    p.add_argument("--tol", type=float, default=None, help="relative tolerance on the mean")
    p.add_argument("--config", default=None)
    p.add_argument("--output", "-o", default=None, help="state descriptor path")

    p = sub.add_parser("autocorr", help="autocorrelation trace to CSV")
    p.add_argument("--descriptor", required=True)
    p.add_argument("--t-start", type=float, default=None)
    p.add_argument("--t-end", type=float, default=None, help="defaults to 1.1x the revival time")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--refine-near-revivals", type=int, default=None,
                   help="extra samples added around each fractional revival time")
    p.add_argument("--config", default=None)
    p.add_argument("--output", "-o", required=True)

    p = sub.add_parser("grid", help="planar field files at selected times")
    p.add_argument("--descriptor", required=True)
    p.add_argument("--width", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--times", default=None,
                   help="comma-separated times; default: the fractional revival times")
    p.add_argument("--format", choices=("csv", "bin"), default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--output-prefix", "-o", required=True)

    p = sub.add_parser("levels", help="level distribution to CSV")
    p.add_argument("--descriptor", required=True)
    p.add_argument("--output", "-o", required=True)

    p = sub.add_parser("verify", help="resolution-of-identity verification suite")
    p.add_argument("--family", choices=("exponential", "stretched"), default="exponential")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--su2-max-two-j", type=int, default=None)
    p.add_argument("--polar-order", type=int, default=None)
    p.add_argument("--azimuthal-count", type=int, default=None)
    p.add_argument("--full-tol", type=float, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--output", "-o", default=None, help="write the JSON report here")

    p = sub.add_parser("weights", help="weight-function utilities")
    wsub = p.add_subparsers(dest="weights_command", required=True)
    m = wsub.add_parser("moments", help="log-moment table")
    m.add_argument("--family", choices=("exponential", "stretched"), default="exponential")
    m.add_argument("--alpha", type=float, default=None)
    m.add_argument("--n-max", type=int, required=True)
    m.add_argument("--output", "-o", default=None, help="CSV path (stdout if omitted)")

    return parser


def cmd_solve(args) -> int:
    from cohere import hydrogen
    from cohere.position import ellipse_to_angular
    from cohere.state import (
        build_state,
        level_spread,
        mean_level,
        solve_scale_ln,
        write_descriptor,
    )
    from cohere.su2 import AngularParams
    from cohere.weights import WeightSpec

    _merge_config(args, {
        "gamma": 0.0, "eccentricity": 0.0, "tail_eps": 1e-12,
        "tol": 1e-9, "output": "state.desc",
    })
    if args.alpha <= 0:
        raise UsageError("--alpha must be positive")
    if args.mean <= 0:
        raise UsageError("--mean must be positive")
    if not 0.0 <= args.eccentricity < 1.0:
        raise UsageError("--eccentricity must lie in [0, 1)")

    ln_s = solve_scale_ln(args.alpha, args.mean, tol=args.tol, tail_eps=args.tail_eps)
    if args.eccentricity > 0:
        angular = ellipse_to_angular(args.eccentricity, max(2, round(args.mean)))
    else:
        angular = AngularParams(0.0, 0.0)
    state = build_state(
        WeightSpec.stretched(args.alpha), None, args.gamma, angular,
        tail_eps=args.tail_eps, ln_s=ln_s,
    )
    mean = mean_level(state, principal=True)
    spread = level_spread(state)
    t_revival = hydrogen.revival_time(mean)
    ratio = hydrogen.revival_ratio(mean, spread)
    write_descriptor(args.output, state)

    print(f"descriptor={args.output}")
    print(f"ln_s={_FMT % ln_s}")
    print(f"s={_FMT % state.s}")
    print(f"mean_principal={_FMT % mean}")
    print(f"spread={_FMT % spread}")
    print(f"revival_time={_FMT % t_revival}")
    print(f"revival_ratio={_FMT % ratio}")
    print("revival_quality=" + ("clean revival expected" if ratio < 1.0 else "no clean revival"))
    return EXIT_OK


def cmd_autocorr(args) -> int:
    import numpy as np

    from cohere import hydrogen
    from cohere.state import autocorrelation, mean_level, read_descriptor, write_trace_csv

    state = read_descriptor(args.descriptor)
    t_revival = hydrogen.revival_time(mean_level(state, principal=True))
    _merge_config(args, {
        "t_start": 0.0, "t_end": 1.1 * t_revival, "samples": 10001,
        "refine_near_revivals": 0,
    })
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    times = np.linspace(args.t_start, args.t_end, args.samples)
    if args.refine_near_revivals > 0:
        extras = []
        for _, t in hydrogen.fractional_revival_times(t_revival):
            if args.t_start <= t <= args.t_end and t > 0:
                extras.append(np.linspace(0.99 * t, 1.01 * t, args.refine_near_revivals))
        if extras:
            times = np.unique(np.concatenate([times] + extras))
    values = autocorrelation(state, times)
    write_trace_csv(args.output, times, values)
    print(f"wrote {times.size} rows to {args.output}")
    return EXIT_OK


def _safe_label(label: str) -> str:
    return label.replace("/", "_over_").replace(" ", "")


def cmd_grid(args) -> int:
    from cohere import hydrogen
    from cohere.position import (
        DEFAULT_GRID_BUDGET,
        GridSpec,
        field_on_grid,
        write_field_binary,
        write_field_csv,
    )
    from cohere.state import mean_level, read_descriptor

    env_budget = os.environ.get("COHERE_GRID_BUDGET")
    _merge_config(args, {
        "times": None, "format": "csv",
        "budget": int(env_budget) if env_budget else DEFAULT_GRID_BUDGET,
    })
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    if args.width <= 0:
        raise UsageError("--width must be positive")

    state = read_descriptor(args.descriptor)
    grid = GridSpec(width=args.width, samples=args.samples)
    if args.times:
        schedule = [
            (f"t{i}", float(v)) for i, v in enumerate(str(args.times).split(","))
        ]
    else:
        t_revival = hydrogen.revival_time(mean_level(state, principal=True))
        schedule = hydrogen.fractional_revival_times(t_revival)

    written = []
    for label, t in schedule:
        field = field_on_grid(state, grid, t, budget=args.budget)
        suffix = "csv" if args.format == "csv" else "bin"
        path = f"{args.output_prefix}_{_safe_label(label)}.{suffix}"
        if args.format == "csv":
            write_field_csv(path, field)
        else:
            write_field_binary(path, field)
        written.append(path)
        print(f"wrote {path} (t={_FMT % t})")
    return EXIT_OK


def cmd_levels(args) -> int:
    from cohere.state import level_distribution, read_descriptor

    state = read_descriptor(args.descriptor)
    with open(args.output, "w") as fh:
        fh.write("n,p_n\n")
        for n, p in level_distribution(state):
            fh.write(f"{n},{_FMT % p}\n")
    print(f"wrote {len(level_distribution(state))} rows to {args.output}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from cohere.identity import report_json, report_text, standard_verification
    from cohere.weights import WeightSpec

    _merge_config(args, {
        "n_max": 3, "su2_max_two_j": 10, "polar_order": 24,
        "azimuthal_count": 48, "full_tol": 1e-8,
    })
    if args.family == "stretched":
        if args.alpha is None:
            raise UsageError("the stretched family requires --alpha")
        spec = WeightSpec.stretched(args.alpha)
    else:
        spec = WeightSpec.exponential()
    results = standard_verification(
        spec=spec,
        n_max=args.n_max,
        su2_max_two_j=args.su2_max_two_j,
        polar_order=args.polar_order,
        azimuthal_count=args.azimuthal_count,
        full_tol=args.full_tol,
    )
    print(report_text(results))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(report_json(results) + "\n")
        print(f"report written to {args.output}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


def cmd_weights_moments(args) -> int:
    from cohere.weights import log_moment

    if args.n_max < 0:
        raise UsageError("--n-max must be nonnegative")
    spec = _weight_from_args(args)
    lines = ["n,log_moment"]
    for n in range(args.n_max + 1):
        lines.append(f"{n},{_FMT % log_moment(spec, n)}")
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        print(f"wrote {args.n_max + 1} rows to {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    _apply_thread_env()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "autocorr":
            return cmd_autocorr(args)
        if args.command == "grid":
            return cmd_grid(args)
        if args.command == "levels":
            return cmd_levels(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "weights":
            return cmd_weights_moments(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # numerical and budget failures
        from cohere.position import BudgetExceededError

        if isinstance(exc, BudgetExceededError):
            print(f"budget refusal: {exc}", file=sys.stderr)
            return EXIT_BUDGET
        if isinstance(exc, (ArithmeticError, ValueError)):
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        raise


if __name__ == "__main__":
    sys.exit(main())
