"""Command-line entry point: read a framework-native saved model, write the
shared model JSON, print the export report as JSON on stdout."""

from __future__ import annotations

import argparse
import json
import sys

from .forest import export_forest
from .mlp import export_mlp


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfslogic-export")
    sub = p.add_subparsers(dest="command", required=True)

    mlp = sub.add_parser("mlp", help="export a dense ReLU network")
    mlp.add_argument("model", help="saved model (.pt/.pth torch, .keras/.h5 keras)")
    mlp.add_argument("--out", required=True, help="model JSON output path")

    forest = sub.add_parser("forest", help="export a fitted sklearn forest")
    forest.add_argument("model", help="joblib/pickle file with the fitted classifier")
    forest.add_argument("--out", required=True, help="model JSON output path")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "mlp":
            obj, report = export_mlp(args.model)
        else:
            import joblib

            obj, report = export_forest(joblib.load(args.model))
        with open(args.out, "w") as f:
            json.dump(obj, f)
            f.write("\n")
        print(json.dumps(report.to_json()))
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
