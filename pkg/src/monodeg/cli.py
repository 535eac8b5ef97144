"""``degree-tool``: run, validate, and list scenario computations.

Exit codes: 0 on success, 1 on I/O or schema problems, 2 on a named
mathematical failure (which is also recorded verbatim in the report).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from .errors import MonodegError, ParseError, SchemaError
from .scenario import (
    emit_scenario,
    load_scenario,
    run_scenario,
    stabilization_rows,
)
from .setval import gallery_doc, gallery_names


def _slug(label: str) -> str:
    out = "".join(c if c.isalnum() or c in "-_" else "-" for c in label)
    return out.strip("-") or "scenario"


def _write_report(report: dict, out_dir: Path, fmt: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    report = dict(report)
    report["timestamp"] = datetime.now(timezone.utc).isoformat()
    path = out_dir / "report.json"
    path.write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    if fmt == "json+csv":
        with open(out_dir / "stabilization.csv", "w", encoding="utf-8",
                  newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("n", "eps_n", "degree", "boundary_margin"))
            for row in stabilization_rows(report):
                writer.writerow(row)
    return path


def _cmd_run(args) -> int:
    try:
        scn = load_scenario(args.scenario)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    except SchemaError as exc:
        for v in exc.violations:
            print(f"schema error: {v}", file=sys.stderr)
        return 1
    if args.seed is not None:
        scn = dataclasses.replace(scn, seed=args.seed)
    out_dir = Path(args.out) if args.out else Path("reports") / _slug(scn.label)
    try:
        report = run_scenario(scn)
    except MonodegError as exc:
        report = getattr(exc, "report", None) or {
            "label": scn.label,
            "mode": scn.mode,
            "scenario": emit_scenario(scn),
            "seed": scn.seed,
        }
        report = dict(report)
        report["error"] = type(exc).__name__
        report["error_message"] = str(exc)
        path = _write_report(report, out_dir, args.format)
        print(f"{scn.label}: {type(exc).__name__}: {exc}", file=sys.stderr)
        print(f"report: {path}")
        return 2
    path = _write_report(report, out_dir, args.format)
    headline = report.get("value")
    print(f"{scn.label}: mode={scn.mode} value={headline} "
          f"backend={report['backend']}")
    print(f"report: {path}")
    return 0


def _cmd_validate(args) -> int:
    worst = 0
    for name in args.scenario:
        try:
            load_scenario(name)
        except ParseError as exc:
            print(f"{name}: parse error: {exc}", file=sys.stderr)
            worst = 1
        except SchemaError as exc:
            for v in exc.violations:
                print(f"{name}: {v}", file=sys.stderr)
            worst = 1
        else:
            print(f"{name}: OK")
    return worst


def _cmd_gallery(args) -> int:
    if args.action != "list":
        print(f"unknown gallery action {args.action!r}", file=sys.stderr)
        return 1
    for name in gallery_names():
        print(f"{name:22s} {gallery_doc(name)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="degree-tool",
        description="Topological degree of monotone set-valued operators "
        "via stabilized finite-rank sections.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario file")
    run.add_argument("scenario", help="path to a scenario JSON file")
    run.add_argument("--out", default=None, help="report output directory")
    run.add_argument("--seed", type=int, default=None,
                     help="override the scenario seed")
    run.add_argument("--format", choices=("json", "json+csv"),
                     default="json+csv", help="report artifacts to write")
    run.set_defaults(fn=_cmd_run)

    val = sub.add_parser("validate", help="check scenario files against the schema")
    val.add_argument("scenario", nargs="+", help="scenario JSON files")
    val.set_defaults(fn=_cmd_validate)

    gal = sub.add_parser("gallery", help="inspect the operator gallery")
    gal.add_argument("action", choices=("list",))
    gal.set_defaults(fn=_cmd_gallery)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
