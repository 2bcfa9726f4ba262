"""Command line interface.

Subcommands: run, verify, compare, density.  Exit codes: 0 success,
2 configuration/input error, 3 numerical failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, GridMismatchError, NumericalError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFICATION = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraclind",
        description="Fractional-power Lindblad evolutions, verification and kernel tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="evolve a configured scenario and write series/report")
    p_run.add_argument("config", help="path to a JSON scenario config")

    p_verify = sub.add_parser("verify", help="run the verification battery for a scenario")
    p_verify.add_argument("config", help="path to a JSON scenario config")

    p_cmp = sub.add_parser("compare", help="compare two series files column by column")
    p_cmp.add_argument("series_a")
    p_cmp.add_argument("series_b")
    p_cmp.add_argument("--tol", type=float, required=True, help="max-abs-error threshold")

    p_den = sub.add_parser("density", help="tabulate the subordination kernel f_alpha(t, s)")
    p_den.add_argument("--alpha", type=float, required=True)
    p_den.add_argument("--t", type=float, required=True)
    p_den.add_argument("--s-grid", required=True,
                       help="grid spec lo:hi:count[:lin|log] (default log spacing)")
    p_den.add_argument("--theta", type=float, default=None,
                       help="contour angle in [pi/2, pi] (default pi)")
    p_den.add_argument("--out", default=None, help="write CSV here instead of stdout")
    return parser


def _parse_s_grid(spec: str):
    import numpy as np

    parts = spec.split(":")
    if len(parts) not in (3, 4):
        raise ConfigError(f"--s-grid: expected lo:hi:count[:lin|log], got {spec!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError:
        raise ConfigError(f"--s-grid: bad numbers in {spec!r}") from None
    mode = parts[3] if len(parts) == 4 else "log"
    if mode not in ("lin", "log"):
        raise ConfigError(f"--s-grid: spacing must be 'lin' or 'log', got {mode!r}")
    if lo <= 0 or hi <= lo or count < 2:
        raise ConfigError("--s-grid: need 0 < lo < hi and count >= 2")
    if mode == "log":
        import math
        return np.logspace(math.log10(lo), math.log10(hi), count)
    return np.linspace(lo, hi, count)


def _print_report(report, stream=sys.stdout) -> None:
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        stream.write(
            f"{status}  {check.name}: residual {check.residual:.3e} "
            f"(tolerance {check.tolerance:.1e})\n"
        )
    stream.write("overall: %s\n" % ("PASS" if report.overall_pass else "FAIL"))


def _cmd_run(args) -> int:
    from .config import load_config
    from .runner import run_scenario

    config = load_config(args.config)
    report = run_scenario(config)
    _print_report(report)
    for path in report.series_files:
        print(f"series written: {path}")
    print(f"report written: {config.outputs.report_path}")
    return EXIT_OK if report.overall_pass else EXIT_VERIFICATION


def _cmd_verify(args) -> int:
    from .config import load_config
    from .runner import verify_scenario

    config = load_config(args.config)
    report = verify_scenario(config)
    _print_report(report)
    print(f"report written: {config.outputs.report_path}")
    return EXIT_OK if report.overall_pass else EXIT_VERIFICATION


def _cmd_compare(args) -> int:
    from .runner import compare_series

    result = compare_series(args.series_a, args.series_b, args.tol)
    for lab, entry in result["columns"].items():
        print(f"{lab}: max {entry['max']:.6e}  rms {entry['rms']:.6e}")
    print(f"max abs error {result['max_abs_error']:.6e} vs tolerance {args.tol:.6e}: "
          + ("PASS" if result["pass"] else "FAIL"))
    return EXIT_OK if result["pass"] else EXIT_VERIFICATION


def _cmd_density(args) -> int:
    from .subordinator import SubordinatorSpec, density

    kwargs = {"alpha": args.alpha}
    if args.theta is not None:
        kwargs["theta"] = args.theta
    try:
        spec = SubordinatorSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    grid = _parse_s_grid(args.s_grid)
    lines = ["s,f"]
    for s in grid:
        lines.append(f"{format(float(s), '.17g')},{format(density(spec, args.t, float(s)), '.17g')}")
    payload = "\n".join(lines) + "\n"
    if args.out:
        import os
        parent = os.path.dirname(os.path.abspath(args.out))
        os.makedirs(parent, exist_ok=True)
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(payload)
        print(f"density table written: {args.out}")
    else:
        sys.stdout.write(payload)
    return EXIT_OK


def main(argv=None) -> int:
    # Cap BLAS pools before numpy-heavy work when a thread limit is requested.
    import os

    threads = os.environ.get("FRACLIND_THREADS", "").strip()
    if threads.isdigit():
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)

    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "verify": _cmd_verify,
        "compare": _cmd_compare,
        "density": _cmd_density,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, GridMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
