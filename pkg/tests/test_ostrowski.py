import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holocurve.characteristics import winding_count
from holocurve.config import GridSpec
from holocurve.curves import Annulus, builtin_curve
from holocurve.expr import PoleError, eval_jet
from holocurve.ostrowski import (
    OstrowskiData,
    PhiProfile,
    binormal_condition_v,
    build_phi,
    check_conditions,
    circle_mean_log_abs,
    curve_from_data,
    eval_repr,
    lehto_data,
    lehto_experiment,
    montel_three_point_test,
    phi_admissible,
    phi_crosscheck,
)


def geometric(k_max=10):
    return OstrowskiData(1, 0, tuple(2.0 ** k for k in range(k_max + 1)), tuple(-(2.0 ** k) for k in range(k_max + 1)))


def test_eval_examples():
    d = OstrowskiData(1, 1)
    assert eval_repr(d, 2 + 1j) == pytest.approx(2 + 1j)
    g = geometric()
    for c in g.zeros:
        assert eval_repr(g, c) == 0
    with pytest.raises(PoleError):
        eval_repr(g, g.poles[0])


def test_lehto_data_matches_builtin():
    t = math.e ** 2
    d = lehto_data(t, 12)
    c = builtin_curve("lehto_product", t=t, k_range=12)
    for z in (0.7 + 0.2j, 3 - 1j, -20 + 5j, 0.05j):
        ref = eval_jet(c.coordinates[1], z).value
        assert eval_repr(d, z) == pytest.approx(ref, rel=1e-9)


def test_data_validation_and_json():
    with pytest.raises(ValueError):
        OstrowskiData(0, 0)
    with pytest.raises(ValueError):
        OstrowskiData(1, 0, (1,), (1,))
    d = geometric(4)
    assert OstrowskiData.from_json(d.to_json()) == d


def test_conditions_geometric():
    rep = check_conditions(geometric())
    assert rep.c1 == 2 and rep.c2 <= 1 and rep.c4 == pytest.approx(2.0)
    assert all(rep.passes.values())


def test_conditions_flag_planted_pair():
    d = OstrowskiData(1, 0, (1.0, 4.0, 16.0), (1.0 + 1e-9, -4.0, -16.0))
    rep = check_conditions(d)
    assert rep.c4 == pytest.approx(1e-9, rel=1e-6)
    assert not rep.passes["iv"]


def test_conditions_zeros_only_imbalanced():
    d = OstrowskiData(1, 0, tuple(2.0 ** k for k in range(40)), ())
    rep = check_conditions(d)
    assert not rep.passes["ii"]


def test_condition_v():
    d = OstrowskiData(1, 0, tuple(2.0 ** k for k in range(11)), tuple(-(2.0 ** k) * math.sqrt(2) for k in range(11)))
    assert binormal_condition_v(d)[1] == pytest.approx(2.0, rel=1e-9)
    ok, _ = binormal_condition_v(OstrowskiData(1, 0, (1.0, 2.0), ()))
    assert not ok
    alt = OstrowskiData(1, 0, tuple(1.1 ** (2 * k) for k in range(10)), tuple(-(1.1 ** (2 * k + 1)) for k in range(10)))
    assert binormal_condition_v(alt)[1] == pytest.approx(1.21, rel=1e-9)


def test_phi_examples():
    p = build_phi(OstrowskiData(1, 1))
    assert p(3.0) == pytest.approx(3.0) and int(p.slope_at(-5.0)) == 1
    p = build_phi(OstrowskiData(1, 0, (math.e,)))
    assert p(0.0) == pytest.approx(0.0) and p(2.5) == pytest.approx(1.5)
    assert list(p.jumps) == [1]
    lehto = build_phi(lehto_data(math.e ** 2, 10))
    ts = np.linspace(-10, 10, 201)
    assert np.ptp(lehto(ts)) < 3.0


@settings(max_examples=20)
@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(0, 2 * math.pi), st.booleans()), min_size=1, max_size=6),
       st.integers(-2, 2))
def test_phi_matches_quadrature(roots, m):
    zeros = tuple(math.exp(r) * complex(math.cos(a), math.sin(a)) for r, a, z in roots if z)
    poles = tuple(math.exp(r) * complex(math.cos(a), math.sin(a)) for r, a, z in roots if not z)
    try:
        d = OstrowskiData(1.5, m, zeros, poles)
    except ValueError:
        return
    mods = [abs(c) for c in zeros + poles]
    for t in (-3.7, 0.37, 3.6):
        if min(abs(math.exp(t) - x) for x in mods) < 1e-3:
            continue
        _, prof, q = phi_crosscheck(d, [t])[0]
        assert prof == pytest.approx(q, abs=1e-6)


def test_winding_matches_slopes():
    d = OstrowskiData(2, 1, (0.5, 3j, -7), (1.5j, 20))
    p = build_phi(d)
    c = curve_from_data(d)
    for t in (-1.0, 0.2, 1.3, 2.5, 3.5):
        # slope at log r is zeros - poles inside |z| < r plus the z^m factor
        assert winding_count(c, 0, math.exp(t)) == int(p.slope_at(t))


def test_phi_csv_roundtrip():
    p = build_phi(geometric(5))
    text = p.to_csv()
    rows = [tuple(map(float, line.split(","))) for line in text.strip().splitlines()[1:]]
    q = PhiProfile.from_rows(rows)
    np.testing.assert_allclose(q.breakpoints, p.breakpoints)
    np.testing.assert_array_equal(q.slopes[1:], p.slopes[1:])


def test_phi_admissible_examples():
    ok, H = phi_admissible(build_phi(OstrowskiData(1, 1)))
    assert ok and H == 0.0
    # |t|: slope -1 then +1 with value 0 at the kink
    ok, H = phi_admissible(PhiProfile([0.0], [-1, 1], [0.0]))
    assert ok and H == 0.0
    # sawtooth whose convex kinks climb without bound
    bps = np.arange(0.0, 16.0)
    slopes = np.array([0] + [2 if k % 2 == 0 else -1 for k in range(16)])
    vals = np.concatenate([[0.0], np.cumsum(slopes[1:-1] * 1.0)])
    ok, H = phi_admissible(PhiProfile(bps, slopes, vals))
    assert not ok


def test_montel_examples():
    ident = builtin_curve("cstar_identity")
    rep = montel_three_point_test(ident, [0, float("inf"), 1], 0.5, Annulus(0.2, 5))
    assert rep["max_count"] == 1
    pair = curve_from_data(OstrowskiData(1, 0, (1.0,), (1.001,)))
    # f = 1 only at z = 0, outside C*; zero and pole share one disc
    rep = montel_three_point_test(pair, [0, float("inf"), 1], 0.1, Annulus(0.5, 2))
    assert rep["max_count"] == 2
    # any other value is taken right next to the pair as well
    rep = montel_three_point_test(pair, [0, float("inf"), 2], 0.1, Annulus(0.5, 2))
    assert rep["max_count"] == 3
    const = builtin_curve("constant", c=0.5, domain="punctured")
    rep = montel_three_point_test(const, [0, float("inf"), 1], 0.5, Annulus(0.5, 2))
    assert rep["max_count"] <= 1


def test_lehto_table():
    ts = [math.e ** 2, math.e ** 3, math.e ** 4]
    rows = lehto_experiment(ts, 40, GridSpec(128, 128))
    sups = [r["sup"] for r in rows]
    assert all(s >= 0.5 - 1e-3 for s in sups)
    assert sups[0] > sups[1] > sups[2]
