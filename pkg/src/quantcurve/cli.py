"""Command-line entry point.

Exit codes: 0 success, 1 verification failed, 2 precondition or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .catalog import CATALOG
from .config import ConfigError, parse_curve_config
from .report import COMMANDS, EXIT_PRECONDITION, run_command


def _parser():
    p = argparse.ArgumentParser(prog="quantcurve", description=__doc__.splitlines()[0])
    p.add_argument("--curve", help="config file (JSON) or catalog name: " + ", ".join(sorted(CATALOG)))
    p.add_argument("--order", type=int, help="truncation order N")
    p.add_argument("--mode", choices=("exact", "float"), help="scalar mode")
    p.add_argument("--precision", type=int, help="precision in bits (float mode)")
    p.add_argument("--tolerance", help="zero tolerance (float mode)")
    p.add_argument("--command", required=True, choices=COMMANDS)
    p.add_argument("--output", help="report file (default: stdout)")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings (breaks byte-identity)")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def load_document(curve: str):
    if os.path.isfile(curve):
        with open(curve, encoding="utf-8") as fh:
            text = fh.read()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{curve}:{e.lineno}:{e.colno}", f"malformed JSON: {e.msg}") from None
        return doc
    if curve in CATALOG:
        return {"curve": curve}
    raise ConfigError("--curve", f"{curve!r} is neither a file nor a catalog name")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = None
        if args.curve is not None:
            doc = load_document(args.curve)
            if not isinstance(doc, dict):
                raise ConfigError("$", "expected a JSON object")
            for k in ("order", "mode", "precision", "tolerance"):
                v = getattr(args, k)
                if v is not None:
                    doc[k] = v
            cfg = parse_curve_config(doc)
        elif args.command != "catalog":
            raise ConfigError("--curve", "required for this command")
        report = run_command(args.command, cfg)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    text = report.to_json(timings=args.timings)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not report.verified:
        print(f"verification failed: {args.command}", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
