"""Command-line entry point: ``pnr-scope run|validate|list-scenarios``."""
import argparse
import copy
import sys
from pathlib import Path

from . import scenario
from .errors import PnrScopeError
from .runner import run_scenario

EXIT_OK = 0
EXIT_WARNINGS = 1
EXIT_PARSE = 3
EXIT_SCHEMA = 4
EXIT_NUMERICAL = 5
EXIT_IO = 6


def _load(path):
    try:
        return scenario.load(path), None
    except scenario.ScenarioParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return None, EXIT_PARSE


def _report(diags):
    for d in diags:
        print(str(d), file=sys.stderr)
    return any(d.level == "error" for d in diags)


def cmd_validate(args):
    doc, code = _load(args.scenario)
    if doc is None:
        return code
    diags = scenario.validate(doc)
    if _report(diags):
        return EXIT_SCHEMA
    if diags and args.strict:
        return EXIT_WARNINGS
    print(f"{doc['name']}: ok" + (f" ({len(diags)} warning(s))" if diags else ""))
    return EXIT_OK


def cmd_run(args):
    doc, code = _load(args.scenario)
    if doc is None:
        return code
    if args.seed is not None:
        doc = copy.deepcopy(doc)
        doc.setdefault("scan", {})["seed"] = args.seed
    if _report(scenario.validate(doc)):
        return EXIT_SCHEMA
    try:
        result = run_scenario(doc)
    except PnrScopeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    out_dir = Path(args.out_dir or doc.get("output", {}).get("dir", "."))
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for fname, text in result.files().items():
            (out_dir / fname).write_text(text)
    except OSError as exc:
        print(f"cannot write outputs to {out_dir}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO

    print(f"== {doc['name']} ({doc['experiment']})")
    for line in result.summary:
        print(line)
    print("wrote " + ", ".join(sorted(result.files())) + f" to {out_dir}")
    return EXIT_OK


def cmd_list(args):
    for name in scenario.bundled_names():
        doc = scenario.load(name)
        print(f"{name:16s} {doc['experiment']}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="pnr-scope",
                                     description="Photon-number-resolved imaging scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and write its tables")
    p.add_argument("scenario", help="scenario JSON file or bundled scenario name")
    p.add_argument("--out-dir", help="output directory (default: scenario output.dir or .)")
    p.add_argument("--seed", type=int, help="override scan.seed")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check a scenario without running it")
    p.add_argument("scenario")
    p.add_argument("--strict", action="store_true", help="treat warnings as failures (exit 1)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("list-scenarios", help="list bundled scenarios")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
