"""Order of growth fitted from log T against log r for a few builtin curves."""
import argparse

from holocurve.characteristics import order_estimate
from holocurve.curves import builtin_curve

CASES = [
    ("exp", {}, 2.0, 20.0),
    ("exp", {}, 20.0, 200.0),
    ("fryntov", {"rho": 0.5, "k_max": 20}, 4.0, 256.0),
    ("fryntov", {"rho": 0.5, "k_max": 20}, 2.0 ** 8, 2.0 ** 14),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=12)
    args = ap.parse_args()
    for name, kw, r0, r1 in CASES:
        fit = order_estimate(builtin_curve(name, **kw), r0, r1, points=args.points)
        label = name + "".join(f" {k}={v}" for k, v in kw.items())
        print(f"{label:28s} [{r0:g}, {r1:g}]  rho={fit.rho:.4f}  r2={fit.r2:.6f}")


if __name__ == "__main__":
    main()
