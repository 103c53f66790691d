"""plots <kind> --in <dir> --out <file.png>

Renders nmqsd CSV artifacts into figures.  Exit codes: 0 on success,
2 on usage errors or schema mismatches (with column diagnostics).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import KINDS, FigureSpec, render
from .schemas import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots", description="Render nmqsd CSV artifacts into figures."
    )
    parser.add_argument("kind", choices=KINDS, help="figure kind")
    parser.add_argument("--in", dest="input_dir", required=True, help="artifact directory")
    parser.add_argument("--out", dest="output", required=True, help="output image path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.output)
    try:
        # all input reading/validation happens before any drawing, so a
        # schema failure never leaves a partial image behind
        render(FigureSpec(input_dir=Path(args.input_dir), kind=args.kind, output=out))
    except SchemaError as exc:
        print(f"plots: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
