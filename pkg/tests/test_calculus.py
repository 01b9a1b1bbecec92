import json

import numpy as np
import pytest

from extcalc.calculus import (
    VectorFieldProxy, classical_curl, classical_divergence, classical_gradient,
    complex_report, curl_as_two_form, divergence_as_volume_form, exterior_derivative,
    field_from_one_form, field_from_two_form, gradient_as_one_form, one_form_from_field,
    two_form_from_field, volume_coefficient,
)
from extcalc.errors import DimensionError
from extcalc.expr import eval_scalar, parse_scalar
from extcalc.forms import basis_form, form_to_text, make_form, parse_form, scalar_form, scale, wedge
from extcalc.sampling import random_coefficient, random_field, random_form
from extcalc.verify import expr_residual, form_residual

from helpers import central_difference, coefficient_gap

XYZ = ("x", "y", "z")
d = exterior_derivative


def test_d_of_coordinate_function():
    assert d(parse_form("x", 3)) == basis_form((0,), 3)


def test_d_of_x_dy():
    assert form_to_text(d(parse_form("{x} dy", 3))) == "{1} dx^dy"


def test_dd_of_fixed_function_is_symbolically_zero():
    f = parse_form("x^2*y + sin(z)", 3)
    assert d(d(f)).is_zero and d(d(f)).degree == 2


def test_d_at_top_degree_is_zero_form():
    top = d(parse_form("{x*y*z} dx^dy^dz", 3))
    assert top.is_zero and top.degree == 4


def test_d_sign_from_basis_reordering():
    # d(x dz^dy) = dx^dz^dy = -dx^dy^dz
    assert form_to_text(d(parse_form("{x} dz^dy", 3))) == "{-1} dx^dy^dz"


def test_gradient_curl_divergence_examples():
    assert form_to_text(gradient_as_one_form(parse_form("x^2", 3))) == "{2*x} dx"
    curl = curl_as_two_form(VectorFieldProxy(["-y", "x", "0"]))
    assert form_to_text(curl) == "{2} dx^dy"
    assert [eval_scalar(c, (0.1, 0.2, 0.3)) for c in field_from_two_form(curl).components] \
        == [0.0, 0.0, 2.0]
    div = divergence_as_volume_form(VectorFieldProxy(["x", "y", "z"]))
    assert form_to_text(div) == "{3} dx^dy^dz"


def test_bridge_needs_r3():
    with pytest.raises(DimensionError):
        gradient_as_one_form(parse_form("x", 2))
    with pytest.raises(DimensionError):
        field_from_one_form(basis_form((0,), 2))
    with pytest.raises((DimensionError, ValueError)):
        VectorFieldProxy(["x", "y"])


def test_field_and_form_identifications_invert():
    v = VectorFieldProxy(["x*y", "sin(z)", "exp(x)"])
    assert field_from_one_form(one_form_from_field(v)).components == v.components
    assert field_from_two_form(two_form_from_field(v)).components == v.components
    b = two_form_from_field(v)
    assert form_to_text(b) == "{x*y} dy^dz + {sin(z)} dz^dx + {exp(x)} dx^dy"
    assert volume_coefficient(divergence_as_volume_form(v)) == parse_scalar("y", XYZ)


@pytest.mark.parametrize("n, degrees, text", [
    (1, [0, 1], "Omega^0 -d-> Omega^1 -d-> 0"),
    (2, [0, 1, 2], "Omega^0 -d-> Omega^1 -d-> Omega^2 -d-> 0"),
    (3, [0, 1, 2, 3], "Omega^0 -d-> Omega^1 -d-> Omega^2 -d-> Omega^3 -d-> 0"),
])
def test_complex_report(n, degrees, text):
    r = complex_report(n)
    assert list(r.degrees) == degrees
    assert str(r) == text
    data = json.loads(json.dumps(r.to_json()))
    assert data["dimension"] == n


def test_complex_report_rejects_zero_dimension():
    with pytest.raises((DimensionError, ValueError)):
        complex_report(0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_dd_zero_random(n, rng):
    for k in range(n):
        for _ in range(15):
            a = random_form(rng, k, n)
            dda = d(d(a))
            assert dda.degree == k + 2
            assert form_residual(dda, rng, points=20) < 1e-10


def test_dd_zero_is_symbolic_for_polynomials(rng):
    for k in range(3):
        for _ in range(20):
            assert d(d(random_form(rng, k, 3, "poly"))).is_zero


@pytest.mark.parametrize("k, l", [(0, 0), (0, 1), (1, 1), (1, 2), (2, 1), (0, 2)])
def test_leibniz_rule(k, l, rng):
    for _ in range(8):
        a = random_form(rng, k, 3)
        b = random_form(rng, l, 3)
        lhs = d(wedge(a, b))
        rhs = wedge(d(a), b) + scale((-1) ** k, wedge(a, d(b)))
        if lhs.degree > 3:
            assert lhs.is_zero and rhs.is_zero
            continue
        assert coefficient_gap(lhs, rhs, rng, points=30) < 1e-9


def test_linearity(rng):
    for k in range(3):
        for _ in range(10):
            a = random_form(rng, k, 3, "poly")
            b = random_form(rng, k, 3, "poly")
            c = float(rng.uniform(-3, 3))
            assert d(a + scale(c, b)) == d(a) + scale(c, d(b))


def test_components_match_finite_differences(rng):
    for k in range(3):
        for _ in range(10):
            a = random_form(rng, k, 3)
            da = d(a)
            for q in rng.uniform(-1, 1, size=(5, 3)):
                for idx in da.coefficients:
                    # coefficient of dx^idx: alternating sum of partials
                    expected = 0.0
                    for pos, j in enumerate(idx):
                        rest = idx[:pos] + idx[pos + 1:]
                        if rest in a.coefficients or k == 0:
                            c = a.coefficient(rest)
                            expected += (-1) ** pos * central_difference(c, q, j)
                    exact = eval_scalar(da.coefficient(idx), q)
                    assert abs(exact - expected) <= 1e-6 * max(1.0, abs(exact))


def test_bridge_against_classical_formulas(rng):
    for _ in range(20):
        f = random_coefficient(rng, 3, "mixed", XYZ)
        v = random_field(rng)
        grad = field_from_one_form(gradient_as_one_form(scalar_form(f, 3))).components
        assert max(expr_residual(g - e, 3, rng) for g, e in zip(grad, classical_gradient(f))) < 1e-10
        curl = field_from_two_form(curl_as_two_form(v)).components
        assert max(expr_residual(g - e, 3, rng) for g, e in zip(curl, classical_curl(v))) < 1e-10
        div = volume_coefficient(divergence_as_volume_form(v))
        assert expr_residual(div - classical_divergence(v), 3, rng) < 1e-10


def test_classical_oracles_by_finite_differences(rng):
    # the classical formulas themselves, checked without any form machinery
    v = VectorFieldProxy(["x*y^2", "sin(x*z)", "exp(y)*z"])
    comps = v.components
    for q in rng.uniform(-1, 1, size=(5, 3)):
        J = np.array([[central_difference(c, q, j) for j in range(3)] for c in comps])
        curl = [J[2, 1] - J[1, 2], J[0, 2] - J[2, 0], J[1, 0] - J[0, 1]]
        got = [eval_scalar(c, q) for c in classical_curl(v)]
        assert np.allclose(got, curl, atol=1e-6)
        assert eval_scalar(classical_divergence(v), q) == pytest.approx(np.trace(J), abs=1e-6)


def test_curl_grad_and_div_curl_vanish(rng):
    for _ in range(20):
        f = random_coefficient(rng, 3, "mixed", XYZ)
        v = random_field(rng)
        grad = field_from_one_form(gradient_as_one_form(scalar_form(f, 3)))
        assert form_residual(curl_as_two_form(grad), rng, 20) < 1e-10
        curl = field_from_two_form(curl_as_two_form(v))
        assert form_residual(divergence_as_volume_form(curl), rng, 20) < 1e-10


def test_d_on_higher_dimension():
    # d(x1*x4 dx2^dx3) = x4 dx1^dx2^dx3 + x1 dx4^dx2^dx3, and dx4 moves past two factors
    a = make_form(2, 4, [((1, 2), "x1*x4")])
    assert form_to_text(d(a)) == "{x4} dx1^dx2^dx3 + {x1} dx2^dx3^dx4"
