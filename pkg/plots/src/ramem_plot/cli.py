"""Command-line figure renderer: ramem-plot <kind> --in ... --out ...

Exit codes: 0 on success, 2 on bad inputs.
"""

from __future__ import annotations

import argparse
import sys

from .errors import PlotError
from .figures import KINDS, FigureSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ramem-plot",
        description="Render simulator CSV outputs into figures",
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV file(s)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--label", action="append", default=[],
                        help="series/axis label (repeatable)")
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    spec = FigureSpec(kind=args.kind, inputs=tuple(args.inputs),
                      output=args.out, labels=tuple(args.label), dpi=args.dpi)
    try:
        render(spec)
    except (PlotError, OSError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    print(f"{args.kind}: wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
