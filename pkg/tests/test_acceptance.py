"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from holocurve.characteristics import (
    ahlfors_A,
    cartan_T,
    jensen_consistency,
    order_estimate,
    winding_count,
)
from holocurve.config import GridSpec
from holocurve.curves import Annulus, Curve, Disc, builtin_curve, sup_sphderiv_grid
from holocurve.diagnostics import chpm_checks
from holocurve.interpolation import (
    CONTRACTION,
    InterpProblem,
    g_properties_check,
    solve_interpolation,
    square_lattice_sums,
    two_point_g,
)
from holocurve.ostrowski import (
    OstrowskiData,
    build_phi,
    check_conditions,
    curve_from_data,
    lehto_data,
    lehto_experiment,
    phi_crosscheck,
)
from holocurve.projective import VPoint, big_psi, fs_distance
from holocurve.rescaling import brody_extract, verify_rescaled


@contextmanager
def criterion(num: int, title: str, budget: float):
    """Print one status line; a criterion also fails when it overruns its time budget."""
    t0 = time.perf_counter()
    status = "FAIL"
    detail = ""
    try:
        yield
        elapsed = time.perf_counter() - t0
        if elapsed > budget:
            detail = f" (over budget {budget:g} s)"
            raise AssertionError(f"criterion {num} took {elapsed:.2f} s > {budget:g} s")
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - t0
        print(f"\n[{status}] criterion {num:2d}: {title} ({elapsed:.2f} s){detail}")


def _rand_point(rng, n):
    return rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)


def test_c01_fubini_study_metric():
    rng = np.random.default_rng(1)
    with criterion(1, "Fubini-Study symmetry, triangle inequality and diameter", 1.0):
        worst_tri = -math.inf
        max_d = 0.0
        for k in range(1000):
            n = (1, 2, 5)[k % 3]
            p, q, r = (_rand_point(rng, n) for _ in range(3))
            d_pq, d_qp = fs_distance(p, q), fs_distance(q, p)
            assert d_pq == d_qp
            worst_tri = max(worst_tri, fs_distance(p, r) - d_pq - fs_distance(q, r))
            max_d = max(max_d, d_pq)
        assert worst_tri <= 1e-12
        assert max_d <= math.pi / 2 + 1e-15
        assert fs_distance([1, 0], [0, 1]) == pytest.approx(math.pi / 2, abs=1e-15)


def test_c02_characteristics_identity():
    c = builtin_curve("identity")
    with criterion(2, "T, A and the Jensen identity for (1:z)", 5.0):
        for r in (0.5, 1.0, 2.0, 5.0):
            assert abs(cartan_T(c, r) - 0.5 * math.log1p(r * r)) <= 1e-6
            assert abs(ahlfors_A(c, r) - r * r / (1 + r * r)) <= 1e-6
        assert max(abs(x) for x in jensen_consistency(c, [0.5, 1.0, 2.0, 5.0])) < 1e-6


def test_c03_order_estimation():
    with criterion(3, "order of exp in [0.95, 1.05] and of Fryntov rho=0.5 within 0.1", 60.0):
        exp_fit = order_estimate(builtin_curve("exp"), 20.0, 200.0)
        fry_fit = order_estimate(builtin_curve("fryntov", rho=0.5, k_max=20), 2.0 ** 8, 2.0 ** 14)
        print(f"\n  exp rho = {exp_fit.rho:.4f}, fryntov rho = {fry_fit.rho:.4f}")
        assert 0.95 <= exp_fit.rho <= 1.05
        assert abs(fry_fit.rho - 0.5) <= 0.1


def test_c04_punctured_plane_lower_bound():
    with criterion(4, "sup |z| f^# >= 1/2 on C*, Lehto table decreasing", 60.0):
        grid = GridSpec(128, 128)
        catalog = [
            (builtin_curve("cstar_identity"), Annulus(1e-2, 1e2)),
            (builtin_curve("cstar_power", m=2), Annulus(1e-2, 1e2)),
            (builtin_curve("cstar_power", m=3), Annulus(1e-2, 1e2)),
            (builtin_curve("lehto_product", t=math.e ** 2, k_range=40), Annulus(1.0, math.e ** 2)),
            (builtin_curve("lehto_product", t=math.e ** 3, k_range=40), Annulus(1.0, math.e ** 3)),
            (curve_from_data(OstrowskiData(1, 0, (2.0, 8.0), (-4.0, -16.0))), Annulus(1e-2, 1e3)),
        ]
        for curve, region in catalog:
            assert sup_sphderiv_grid(curve, region, grid).value >= 0.5 - 1e-3
        ident = sup_sphderiv_grid(builtin_curve("cstar_identity"), Annulus(0.1, 10.0), grid)
        assert abs(ident.value - 0.5) <= 1e-6
        assert abs(abs(ident.point) - 1.0) <= 1e-2
        rows = lehto_experiment([math.e ** 2, math.e ** 3, math.e ** 4], 40, grid)
        sups = [r["sup"] for r in rows]
        print("\n  lehto sups: " + ", ".join(f"{s:.4f}" for s in sups))
        assert sups[0] > sups[1] > sups[2] >= 0.5 - 1e-3


def test_c05_lattice_sum_bounds():
    with criterion(5, "lattice sums below 200 K^-3 and 800 K^-4", 10.0):
        for K in (26.0, 50.0):
            for z in (0.0, K / 2, K * (1 + 1j) / 2):
                r = square_lattice_sums(K, z, radius_factor=2000)
                assert r["sum3"] + r["tail3"] <= 200 * K ** -3
                assert r["sum4"] + r["tail4"] <= 800 * K ** -4


def test_c06_two_point_curve():
    rng = np.random.default_rng(6)
    with criterion(6, "two-point curve far-field bounds and g(0, a) = Psi(a)", 10.0):
        for n in (1, 2, 3):
            zs, pairs = [], []
            for _ in range(500):
                zs.append(rng.uniform(3, 30) * np.exp(2j * np.pi * rng.uniform()))
                sheet = int(rng.integers(0, n + 1))
                pair = []
                for _ in range(2):
                    while True:
                        v = rng.uniform(-2, 2, n) + 1j * rng.uniform(-2, 2, n)
                        if np.linalg.norm(v) < 2:
                            break
                    pair.append(VPoint(v, sheet))
                pairs.append(tuple(pair))
                np.testing.assert_array_equal(two_point_g(0.0, pair[0]), big_psi(pair[0]))
            rep = g_properties_check(n, zs, pairs)
            assert rep.violations["c"] == 0 and rep.violations["d"] == 0


def test_c07_interpolation_end_to_end():
    rng = np.random.default_rng(7)
    K = 30.0
    pts = [K * (i + 1j * j) for i in range(5) for j in range(5)]
    with criterion(7, "5x5 lattice interpolation: contraction, residual, displacement, tail", 120.0):
        worst = {"ratio": 0.0, "residual": 0.0, "disp": 0.0, "tail": 0.0}
        for n in (1, 2):
            for _ in range(20):
                tg = [rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1) for _ in pts]
                st = solve_interpolation(InterpProblem.build(pts, tg))
                assert st.converged
                worst["ratio"] = max([worst["ratio"]] + st.ratios)
                worst["residual"] = max(worst["residual"], st.max_residual)
                worst["disp"] = max(worst["disp"], st.displacement)
                worst["tail"] = max(worst["tail"], st.phi_tail_max)
        print("\n  worst: " + ", ".join(f"{k}={v:.3g}" for k, v in worst.items()))
        assert worst["ratio"] <= CONTRACTION + 0.05
        assert worst["residual"] <= 1e-8
        assert worst["disp"] <= 5 / 6
        assert worst["tail"] <= 1400 * K ** -3


def test_c08_brody_extraction():
    curves = [builtin_curve("exp"), builtin_curve("identity"), Curve(("1", "z^3 - z"))]
    with criterion(8, "rescaled curves normalised at 0 and within the pre-limit bound", 30.0):
        for c in curves:
            for n in (5, 10, 20):
                rep = verify_rescaled(brody_extract(c, n), 1.0, slack=0.05)
                assert abs(rep.g0 - 1) <= 1e-6
                assert rep.bound_holds


def test_c09_ostrowski_consistency():
    data = [
        lehto_data(math.e ** 2, 10),
        OstrowskiData(1, 0, tuple(2.0 ** k for k in range(8)), tuple(-(2.0 ** k) * math.sqrt(2) for k in range(8))),
        OstrowskiData(2 - 1j, 1, (0.5, 3j, -7), (1.5j, 20)),
    ]
    with criterion(9, "phi profile against quadrature, winding against slopes, planted pair", 30.0):
        for d in data:
            mods = sorted({abs(c) for c in d.zeros + d.poles})
            # three radii strictly between breakpoints
            ts = [math.log(math.sqrt(mods[i] * mods[i + 1])) for i in (0, len(mods) // 2, len(mods) - 2)]
            for t, prof, quad in phi_crosscheck(d, ts):
                assert abs(prof - quad) <= 1e-6
            c = curve_from_data(d)
            p = build_phi(d)
            for t in ts:
                assert winding_count(c, 0, math.exp(t)) == int(p.slope_at(t))
        planted = OstrowskiData(1, 0, (1.0, 4.0, 16.0), (1.0 + 1e-9, -4.0, -16.0))
        rep = check_conditions(planted)
        assert not rep.passes["iv"]


def test_c10_chpm_checks():
    with criterion(10, "exp passes the grid checks, exp(3z) violates the log-gradient bound", 10.0):
        rep = chpm_checks(builtin_curve("exp"), Disc(5.0), n_grid=200)
        for k in ("sphderiv", "small_values", "log_gradient", "growth"):
            assert rep.checks[k]
        bad = chpm_checks(builtin_curve("exp", a=3), Disc(5.0), n_grid=200)
        assert not bad.checks["log_gradient"] and bad.counterexamples["log_gradient"]
