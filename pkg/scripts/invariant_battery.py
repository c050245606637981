#!/usr/bin/env python3
"""Run the structural invariant battery and write the JSON verdict."""

import argparse
import sys

from focklab import run_invariant_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--level", choices=("quick", "full"), default="quick")
    ap.add_argument("--out", default=None, help="path for the JSON verdict")
    args = ap.parse_args()
    report = run_invariant_suite(level=args.level)
    print(report.summary())
    if args.out:
        report.to_json(args.out)
        print(f"wrote {args.out}")
    sys.exit(0 if report.passed else 1)


if __name__ == "__main__":
    main()
