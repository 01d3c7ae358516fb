"""Grid estimate of sup |z| f^# for truncated Lehto products at several t."""
import argparse
import math

from holocurve.config import GridSpec
from holocurve.ostrowski import lehto_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--log-t", type=float, nargs="+", default=[2.0, 3.0, 4.0, 6.0])
    ap.add_argument("--k-range", type=int, default=40)
    ap.add_argument("--grid", type=int, default=128)
    args = ap.parse_args()

    rows = lehto_experiment([math.exp(s) for s in args.log_t], args.k_range, GridSpec(args.grid, args.grid))
    print(f"{'log t':>6} {'sup':>9} {'|z*|':>10}")
    for s, row in zip(args.log_t, rows):
        print(f"{s:6.2f} {row['sup']:9.5f} {abs(row['argmax']):10.4g}")


if __name__ == "__main__":
    main()
