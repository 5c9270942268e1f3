"""Command line entry point: ``gcverify run <scenario> [options]``.

Exit status: 0 when every check's verdict matches its ``expect`` flag, 1 when
some check fails or errors, 2 when the scenario itself cannot be loaded.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .scenario import ScenarioError, Scenario


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gcverify", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"gcverify {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute a scenario file and write a report")
    run.add_argument("scenario", type=Path)
    run.add_argument("--tol", type=float, help="linear-algebra tolerance (overrides the scenario)")
    run.add_argument("--fd-step", type=float, help="fixed finite-difference step")
    run.add_argument("--seed", type=int, help="random seed (overrides the scenario)")
    run.add_argument("--report", type=Path, help="report path (default: stdout)")
    run.add_argument("--format", choices=("structured", "tabular"), default="structured",
                     help="JSON report or CSV rows per (check, sample)")
    run.add_argument("--quiet", action="store_true", help="suppress the per-check summary on stderr")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"tol": args.tol, "fd_step": args.fd_step, "seed": args.seed}
    try:
        scenario = Scenario.from_file(args.scenario, overrides)
        report = scenario.run()
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = report.dumps() if args.format == "structured" else report.to_csv()
    if args.report is None:
        sys.stdout.write(text)
    else:
        args.report.parent.mkdir(parents=True, exist_ok=True)
        args.report.write_text(text)
    if not args.quiet:
        for c in report.checks:
            mark = {"pass": "ok  ", "fail": "FAIL", "error": "ERR "}[c.status]
            extra = f"  ({c.error})" if c.error else ""
            print(f"{mark} {c.name} [{c.op}] verdict={c.verdict} expect={c.expect}{extra}",
                  file=sys.stderr)
        n_ok = sum(c.status == "pass" for c in report.checks)
        print(f"{n_ok}/{len(report.checks)} checks matched", file=sys.stderr)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
