"""Command-line entry point.

    cdnozzle solve  --config demo --out runs/demo
    cdnozzle verify --out runs/demo
    cdnozzle study stability   --config demo --out runs/stab --amplitudes 0.1,0.2,0.25,0.5,1
    cdnozzle study convergence --config demo --out runs/conv --grids 32,64,128

``--config`` takes a YAML file or the name of a bundled configuration
(``background``, ``demo``).  Exit codes: 0 success, 2 configuration error or
missing input, 3 Picard non-convergence, 4 breakdown (hyperbolicity loss,
perturbation too large, invalid solution), 5 failed verification checks.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
import warnings
from pathlib import Path

from . import __version__
from .diagnostics import convergence_study, stability_study, verify_field
from .errors import BreakdownError, ConfigError, DomainError, IterationError, SolutionInvalidError
from .io import add_to_manifest, check_manifest, read_config, read_solution, write_json, write_solution, \
    write_table
from .lagrangian import to_physical_field
from .problem import load_and_validate
from .solver import solve

log = logging.getLogger("cdnozzle")

EXIT_OK, EXIT_CONFIG, EXIT_ITERATION, EXIT_BREAKDOWN, EXIT_CHECKS = 0, 2, 3, 4, 5


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def cmd_solve(args) -> int:
    problem = load_and_validate(read_config(args.config))
    t0 = time.perf_counter()
    sol = solve(problem)
    t1 = time.perf_counter()
    phys = to_physical_field(sol, problem.geom, problem.bg.coriolis)
    manifest = write_solution(args.out, problem, sol, phys,
                              timings={"solve_s": t1 - t0, "total_s": time.perf_counter() - t0})
    print(f"{sol.mode}: {sol.iterations} sweep(s), deviation norm {sol.deviation_norm:.4e}, "
          f"grid N1={sol.grid.N1} N2={sol.grid.N2}; wrote {len(manifest['files'])} files to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    out = Path(args.field_dir or args.out)
    problem, sol, _ = read_solution(out)
    bad = check_manifest(out)
    report = verify_field(sol, problem)
    report.add("manifest_checksums", len(bad), 0, note=", ".join(bad))
    write_json(out / "report.json", report.to_dict())
    add_to_manifest(out, ["report.json"])
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:24s} {c.value:.3e} (threshold {c.threshold:.3e})")
    if not report.passed:
        print(f"failed checks: {', '.join(report.failed)}", file=sys.stderr)
        return EXIT_CHECKS
    return EXIT_OK


def cmd_study(args) -> int:
    config = read_config(args.config)
    problem = load_and_validate(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    if args.kind == "stability":
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            res = stability_study(config, args.amplitudes or [0.1, 0.2, 0.25, 0.5, 1.0], N2=args.N2)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        rows = res["rows"]
        write_table(out / "stability.csv", ("amplitude", "sigma", "deviation", "iterations"),
                    [[r[c] for r in rows] for c in ("amplitude", "sigma", "deviation", "iterations")])
        table = "stability.csv"
        print(f"slope {res['slope']:.4f}, ratios {[round(q['ratio'], 4) for q in res['ratios']]}, "
              f"empirical constant {res['constant']:.4e}, excluded {len(res['excluded'])}")
    else:
        res = convergence_study(problem, args.grids or [32, 64, 128], direct=not args.no_direct)
        rows = res["rows"]
        cols = [c for c in ("N2", "N1", "h", "iterations", "residual", "physical_residual", "streamline_drift",
                            "g_cd_slope_defect", "error", "gap") if c in rows[0]]
        write_table(out / "convergence.csv", cols, [[r.get(c, float("nan")) for r in rows] for c in cols])
        table = "convergence.csv"
        print("orders: " + ", ".join(f"{k} {v:.3f}" for k, v in res["orders"].items()))
    write_json(out / "report.json", {"kind": args.kind, **res})
    add_to_manifest(out, [table, "report.json"], config=config, study=args.kind,
                    timings={"total_s": time.perf_counter() - t0})
    if not res["passed"]:
        print(f"{args.kind} study: acceptance thresholds not met", file=sys.stderr)
        return EXIT_CHECKS
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="cdnozzle", description="Two-layer supersonic nozzle flow with a contact "
                                                             "discontinuity: solve, verify, study.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="solve a configuration and write tables")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_solve)
    v = sub.add_parser("verify", help="run diagnostics on a solve directory")
    v.add_argument("field_dir", nargs="?")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)
    st = sub.add_parser("study", help="stability or grid-convergence study")
    st.add_argument("kind", choices=("stability", "convergence"))
    st.add_argument("--config", required=True)
    st.add_argument("--out", required=True)
    st.add_argument("--grids", type=_ints, help="N2 values, each double the previous (default 32,64,128)")
    st.add_argument("--amplitudes", type=_floats, help="amplitude factors (default 0.1,0.2,0.25,0.5,1)")
    st.add_argument("--N2", type=int, help="grid for the stability study (default: config)")
    st.add_argument("--no-direct", action="store_true", help="skip the direct-march oracle")
    st.set_defaults(func=cmd_study)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify" and not (args.field_dir or args.out):
        parser.error("verify needs a solve directory")
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except IterationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ITERATION
    except (BreakdownError, DomainError, SolutionInvalidError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_BREAKDOWN


if __name__ == "__main__":
    sys.exit(main())
