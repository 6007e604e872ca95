"""Standalone figure renderer for experiment CSVs."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, STATISTICS, PlotJob, SchemaError, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="consensus-plots", description=__doc__)
    ap.add_argument("input_csv")
    ap.add_argument("--kind", required=True, choices=KINDS)
    ap.add_argument("--out", required=True, help="output image/table path")
    ap.add_argument("--statistic", choices=STATISTICS, default="mean")
    ap.add_argument("--log-y", action="store_true")
    ap.add_argument("--family", default=None,
                    help="restrict rounds_histogram to one family")
    args = ap.parse_args(argv)
    job = PlotJob(
        input_csv=args.input_csv,
        kind=args.kind,
        output_path=args.out,
        statistic=args.statistic,
        log_y=args.log_y,
        family=args.family,
    )
    try:
        result = render(job)
    except SchemaError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(result.output_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
