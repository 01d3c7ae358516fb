import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holocurve.config import GridSpec
from holocurve.curves import Disc, Rect
from holocurve.interpolation import (
    CONTRACTION,
    InterpProblem,
    InterpState,
    Interpolant,
    SparsenessError,
    assemble_f,
    g_properties_check,
    lattice_bounds_check,
    phi_lipschitz_check,
    solution_quality,
    solve_interpolation,
    solve_normalized,
    square_lattice_sums,
    two_point_g,
    validate_sparse,
)
from holocurve.projective import VPoint, big_psi, fs_distance, q_reflection, same_point


def lattice(K, a=5, b=5):
    return [K * (i + 1j * j) for i in range(a) for j in range(b)]


def rand_targets(rng, count, n):
    return [rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1) for _ in range(count)]


def rand_v(rng, n, radius=2.0, sheet=None):
    while True:
        v = rng.uniform(-radius, radius, n) + 1j * rng.uniform(-radius, radius, n)
        if np.linalg.norm(v) < radius:
            return VPoint(v, int(rng.integers(0, n + 1)) if sheet is None else sheet)


def test_validate_sparse():
    assert validate_sparse([0, 30, 60j]).K == pytest.approx(30)
    assert validate_sparse([0, 1]).K == pytest.approx(1)
    assert validate_sparse(lattice(30)).K == pytest.approx(30)
    with pytest.raises(ValueError):
        validate_sparse([1, 2, 1])
    with pytest.raises(ValueError):
        validate_sparse([])


def test_nearest_tie_break():
    E = validate_sparse([30, 0, 30j])
    # z = 15 is equidistant from 0 and 30; (Re, Im) order prefers 0
    assert E.points[E.nearest(15.0)[0]] == 0
    assert E.points[E.nearest(15 + 15j)[0]] == 0


@given(st.integers(1, 4), st.data())
def test_g_at_zero_is_big_psi(n, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2 ** 32 - 1)))
    a = rand_v(rng, n)
    np.testing.assert_array_equal(two_point_g(0.0, a), big_psi(a))


def test_g_no_common_zeros(rng):
    x = np.linspace(-4, 4, 161)
    Z = (x[:, None] + 1j * x[None, :]).ravel()
    Z = Z[np.abs(Z) <= 4]
    worst = math.inf
    for _ in range(200):
        a = rand_v(rng, 2, sheet=0)
        g = two_point_g(Z, a)
        worst = min(worst, float(np.min(np.abs(g[0]) + np.abs(g[1]))))
    assert worst > 0


def test_g_far_field_examples():
    q = np.ones(3)
    a = VPoint(np.array([1.9, 0.0]), 0)
    assert fs_distance(two_point_g(3.0, a), q) <= 25 / 108
    assert fs_distance(two_point_g(10.0, a), q) <= 0.00625
    a1, a2 = VPoint(np.array([0.5, 0.0]), 1), VPoint(np.array([-0.5, 0.0]), 1)
    assert fs_distance(two_point_g(5.0, a1), two_point_g(5.0, a2)) <= 0.002
    rep = g_properties_check(2, [3.0], [(a1, a1)])
    assert rep.ok


@pytest.mark.parametrize("n", [1, 2, 3])
def test_g_properties_random(rng, n):
    zs, pairs = [], []
    for _ in range(500):
        zs.append(rng.uniform(3, 30) * np.exp(2j * np.pi * rng.uniform()))
        sheet = int(rng.integers(0, n + 1))
        pairs.append((rand_v(rng, n, sheet=sheet), rand_v(rng, n, sheet=sheet)))
    rep = g_properties_check(n, zs, pairs)
    assert rep.ok, rep.to_json()


def test_lattice_sums_examples():
    r = lattice_bounds_check(validate_sparse([0]), 5 + 1j)
    assert r["sum3"] == 0 and r["sum4"] == 0
    K = 40.0
    r = lattice_bounds_check(validate_sparse([0, K]), K / 4)
    assert r["sum3"] == pytest.approx((3 * K / 4) ** -3)
    assert r["ok"]


@pytest.mark.parametrize("K", [26.0, 50.0])
def test_square_lattice_sums(K):
    for z in (0, K / 2, K * (1 + 1j) / 2, 3.3 + 7j):
        r = square_lattice_sums(K, z, radius_factor=200)
        assert r["ok"]


@settings(max_examples=30)
@given(st.floats(0, 150), st.floats(0, 150))
def test_finite_lattice_sums_property(x, y):
    r = lattice_bounds_check(validate_sparse(lattice(30.0, 6, 6)), complex(x, y))
    assert r["ok"]


def test_single_point_assembly_matches_g(rng):
    n = 2
    U = q_reflection(n)
    a = rand_v(rng, n)
    E = validate_sparse([0])
    for z in (0.3, -2 + 1j, 7j):
        f = assemble_f(z, E, [a], U)
        assert same_point(f, U(two_point_g(-z, a)), tol=1e-12)


def test_single_point_solve():
    b = np.array([0.3, 1 + 2j, -1])
    st_ = solve_interpolation(InterpProblem.build([0], [b]))
    assert st_.iterations == 1
    assert st_.max_residual < 1e-12


def test_constant_targets_stay_near_start():
    n = 2
    e0 = np.eye(n + 1)[0]
    st_ = solve_interpolation(InterpProblem.build(lattice(30.0), [e0] * 25))
    assert st_.max_residual < 1e-12
    for k, s in enumerate(st_.steps[1:], start=1):
        assert s <= CONTRACTION ** k * max(st_.steps[0], 1e-300) * 1.05 + 1e-13


@pytest.mark.parametrize("n", [1, 2])
def test_random_targets_converge(rng, n):
    K = 30.0
    for _ in range(5):
        p = InterpProblem.build(lattice(K), rand_targets(rng, 25, n))
        st_ = solve_interpolation(p)
        assert st_.converged and st_.iterations <= 30
        assert all(r <= CONTRACTION + 0.05 for r in st_.ratios)
        assert st_.max_residual <= 1e-8
        assert st_.displacement <= 5 / 6
        assert st_.phi_tail_max <= 1400 * K ** -3


def test_phi_lipschitz(rng):
    K = 30.0
    n = 2
    p = InterpProblem.build(lattice(K, 3, 3), rand_targets(rng, 9, n))
    pairs = []
    for _ in range(20):
        sheets = [int(rng.integers(0, n + 1)) for _ in range(9)]
        a1 = [rand_v(rng, n, sheet=s) for s in sheets]
        a2 = [rand_v(rng, n, sheet=s) for s in sheets]
        pairs.append((a1, a2))
    rep = phi_lipschitz_check(p, pairs)
    assert rep["ok"], rep


def test_sparseness_enforced(rng):
    with pytest.raises(SparsenessError):
        solve_interpolation(InterpProblem.build([0, 20], rand_targets(rng, 2, 1)))


def test_problem_validation():
    with pytest.raises(ValueError):
        InterpProblem.build([0, 30], [np.array([1, 0])])
    with pytest.raises(ValueError):
        InterpProblem.build([0, 30], [np.array([1, 0]), np.array([1, 0, 0])])


def test_json_roundtrips(rng):
    p = InterpProblem.build(lattice(30.0, 2, 2), rand_targets(rng, 4, 2))
    p2 = InterpProblem.from_json(p.to_json())
    np.testing.assert_array_equal(p2.E.points, p.E.points)
    st_ = solve_interpolation(p)
    st2 = InterpState.from_json(st_.to_json())
    assert st2.residuals == st_.residuals and st2.steps == st_.steps
    for a, b in zip(st2.assignment, st_.assignment):
        assert a.sheet == b.sheet and np.array_equal(a.zeta, b.zeta)


def test_quality_single_point():
    p = InterpProblem.build([0], [np.array([1, 2j])])
    st_ = solve_interpolation(p)
    q = solution_quality(p, st_, Disc(10.0), GridSpec(64, 128))
    assert abs(q["argmax"]) <= 4
    assert q["max_residual"] < 1e-12


def test_quality_constant_targets_small():
    e0 = np.array([1, 0, 0])
    p = InterpProblem.build(lattice(30.0, 3, 3), [e0] * 9)
    st_ = solve_interpolation(p)
    q = solution_quality(p, st_, Rect(-5, 65, -5, 65), GridSpec(64, 64))
    # f is the curve U g(s - z, a_s) plus tiny tails; far from E it is nearly constant
    f = Interpolant(p.E, st_.assignment, q_reflection(2))
    far = np.array([15 + 15j, 45 + 15j])
    from holocurve.curves import sphderiv_from_jet
    assert np.all(sphderiv_from_jet(f.jet(far)) < 1e-2)
    assert q["phi_tail_max"] <= 1400 * 30.0 ** -3


def test_direct_construction_sup_independent_of_K(rng):
    tg = rand_targets(rng, 9, 1)
    sups = []
    for K in (30.0, 60.0):
        p = InterpProblem.build(lattice(K, 3, 3), tg)
        q = solution_quality(p, solve_interpolation(p), Rect(-5, 2 * K + 5, -5, 2 * K + 5), GridSpec(96, 96))
        sups.append(q["sup_sphderiv"])
    assert sups[1] == pytest.approx(sups[0], rel=0.1)


def test_normalized_construction_constant_C(rng):
    tg = rand_targets(rng, 9, 1)
    Cs = []
    for K in (30.0, 60.0):
        p = InterpProblem.build(lattice(K, 3, 3), tg)
        st_, lam = solve_normalized(p)
        q = solution_quality(p, st_, Rect(-5, 2 * K + 5, -5, 2 * K + 5), GridSpec(96, 96), scale=lam)
        assert q["max_residual"] < 1e-10
        Cs.append(q["C"])
    assert 0.5 <= Cs[1] / Cs[0] <= 2.0
