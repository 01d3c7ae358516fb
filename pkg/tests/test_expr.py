import cmath

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holocurve.expr import ExprSyntaxError, PoleError, eval_jet, evaluate, parse_expr, to_source

SOURCES = [
    "z^4+1",
    "cos(0.7*z)",
    "exp(-2*z) + sin(z)/z",
    "(1 - z/2)^3 * (1 - z/4)",
    "1/(z - 1) - 1/(z + 1)",
    "-z^2 + (2+3*i)*z",
]


@pytest.mark.parametrize("src", SOURCES)
def test_source_roundtrip(src):
    e = parse_expr(src)
    e2 = parse_expr(to_source(e))
    z = 0.3 + 0.7j
    assert eval_jet(e, z).value == pytest.approx(eval_jet(e2, z).value, rel=1e-14)


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("z^^2")
    assert info.value.position == 2


@pytest.mark.parametrize("bad", ["", "z +", "foo(z)", "(z", "z)"])
def test_syntax_errors(bad):
    with pytest.raises(ExprSyntaxError):
        parse_expr(bad)


def test_jet_examples():
    j = eval_jet(parse_expr("z^2"), 3)
    assert j.value == pytest.approx(9, rel=1e-14) and j.derivative == pytest.approx(6, rel=1e-14)
    j = eval_jet(parse_expr("exp(z)"), 0)
    assert j.value == pytest.approx(1) and j.derivative == pytest.approx(1)
    j = eval_jet(parse_expr("cos(z)"), 0)
    assert j.value == pytest.approx(1) and j.derivative == pytest.approx(0)


def test_pole_detected():
    with pytest.raises(PoleError):
        eval_jet(parse_expr("1/z"), 0)


@pytest.mark.parametrize("src", SOURCES)
@given(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False))
def test_derivative_matches_central_difference(src, z):
    e = parse_expr(src)
    if min(abs(z), abs(z - 1), abs(z + 1)) < 0.1:
        return
    h = 1e-6
    fd = (eval_jet(e, z + h).value - eval_jet(e, z - h).value) / (2 * h)
    d = eval_jet(e, z).derivative
    assert abs(fd - d) <= 1e-6 * max(1.0, abs(d))


def test_large_exponent_log_scale():
    # exp(800) overflows a double; the log scale keeps the modulus representable
    f = evaluate(parse_expr("exp(z)"), np.array([800 + 0j]))
    log_mod = f.ln[0] - f.ld[0] + np.log(abs(f.nv[0] / f.dv[0]))
    assert log_mod == pytest.approx(800.0, rel=1e-14)


def test_vectorised_matches_scalar():
    e = parse_expr("exp(z)*(z-1)^2")
    zs = np.array([0.1, 1j, -2 + 0.5j])
    f = evaluate(e, zs)
    v, d = f.value_jet()
    for k, z in enumerate(zs):
        assert v[k] == pytest.approx(cmath.exp(z) * (z - 1) ** 2)
