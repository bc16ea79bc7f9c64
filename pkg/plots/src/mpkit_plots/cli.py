"""Command line for figure rendering: mpkit-plots render --kind K --in ... --out F.

Exit codes: 0 success, 2 schema or usage error, 4 i/o error.
"""

from __future__ import annotations

import argparse
import sys

import matplotlib.pyplot as plt

from .render import KINDS, FigureSpec, render
from .schemas import SchemaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mpkit-plots",
                                     description="figures from experiment output files")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--in", dest="inputs", required=True, action="append",
                   help="input file (repeatable; order matters)")
    p.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        fig = render(FigureSpec(args.kind, tuple(args.inputs), args.out))
        plt.close(fig)
    except SchemaError as e:
        print(f"mpkit-plots: schema error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"mpkit-plots: i/o error: {e}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
