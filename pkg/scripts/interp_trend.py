"""Interpolation on square lattices of growing size: sweeps, residual and C = K sup f^#.

Both the direct construction and the normalized one (shrink to K_ref, then
rescale) are reported.
"""
import argparse

import numpy as np

from holocurve.config import GridSpec
from holocurve.curves import Rect
from holocurve.interpolation import InterpProblem, solution_quality, solve_interpolation, solve_normalized


def lattice(side: int, K: float):
    return [K * (i + 1j * j) for i in range(side) for j in range(side)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sides", type=int, nargs="+", default=[1, 3, 5])
    ap.add_argument("--K", type=float, nargs="+", default=[30.0, 60.0])
    ap.add_argument("--dimension", type=int, default=1)
    ap.add_argument("--grid", type=int, default=96)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    grid = GridSpec(args.grid, args.grid)
    n = args.dimension
    print(f"{'|E|':>4} {'K':>6} {'sweeps':>6} {'residual':>10} {'C direct':>10} {'C normalized':>12}")
    for side in args.sides:
        for K in args.K:
            pts = lattice(side, K)
            tg = [rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1) for _ in pts]
            prob = InterpProblem.build(pts, tg)
            pad = 5.0
            region = Rect(-pad, K * (side - 1) + pad, -pad, K * (side - 1) + pad)
            st = solve_interpolation(prob)
            q = solution_quality(prob, st, region, grid)
            st_n, lam = solve_normalized(prob)
            q_n = solution_quality(prob, st_n, region, grid, scale=lam)
            c, c_n = q["C"], q_n["C"]
            fmt = lambda v: f"{v:.4g}" if v is not None else "inf"
            print(f"{len(pts):4d} {K:6g} {st.iterations:6d} {st.max_residual:10.2e} {fmt(c):>10} {fmt(c_n):>12}")


if __name__ == "__main__":
    main()
