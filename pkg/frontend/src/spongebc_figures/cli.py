"""Command line: spongebc-figures --kind <k> --in <csv> --out <png>."""

from __future__ import annotations

import argparse
import sys

from .reader import SchemaError
from .render import FIGURE_KINDS, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="spongebc-figures",
                                     description="Render figures from spongebc CSVs")
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--in", dest="csv_path", required=True)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    try:
        render(args.kind, args.csv_path, args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
