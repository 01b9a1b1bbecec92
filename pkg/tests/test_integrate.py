import json
import math

import numpy as np
import pytest

from extcalc.calculus import VectorFieldProxy, one_form_from_field, two_form_from_field
from extcalc.errors import DimensionError
from extcalc.expr import parse_scalar
from extcalc.forms import basis_form, parse_form, zero_form
from extcalc.integrate import (
    ParamPatch, QuadratureSpec, boundary_faces, convergence_study, flux_classical,
    integrate_form, integrate_function, integrate_volume_form, line_integral_classical,
    orientation_flip_check, sphere_patch, verify_stokes,
)
from extcalc.maps import compose, identity_map, parse_map
from extcalc.sampling import random_field, random_form, random_polynomial_map

CIRCLE = ParamPatch(parse_map("(t) -> (cos(t), sin(t), 0)"), [(0.0, 2 * math.pi)])
SEGMENT = ParamPatch(parse_map("(t) -> (t, 0, 0)"), [(0.0, 1.0)])
UNIT_SQUARE = ParamPatch(identity_map(2), [(0, 1), (0, 1)])
UNIT_CUBE = ParamPatch(identity_map(3), [(0, 1)] * 3)
FLAT_SQUARE = ParamPatch(parse_map("(u, v) -> (u, v, 0)"), [(0, 1), (0, 1)])
SPHERE_FLUX = parse_form("{x} dy^dz + {y} dz^dx + {z} dx^dy", 3)


def _patch(rng, k, n, degree=2):
    f = random_polynomial_map(rng, k, n, degree)
    return ParamPatch(f, [tuple(sorted(rng.uniform(-1, 1, 2))) for _ in range(k)])


# -- integrate_form ----------------------------------------------------------

def test_unit_displacement():
    assert integrate_form(basis_form((0,), 3), SEGMENT) == 1.0


def test_circle_y_dx():
    assert integrate_form(parse_form("{y} dx", 3), CIRCLE) == pytest.approx(-math.pi, abs=1e-12)


def test_circle_self_consistent_across_orders():
    a = parse_form("{y} dx", 3)
    values = [integrate_form(a, CIRCLE, QuadratureSpec(p)) for p in (16, 32, 64)]
    assert max(values) - min(values) < 1e-12


def test_sphere_flux():
    value = integrate_form(SPHERE_FLUX, sphere_patch(), QuadratureSpec(32))
    assert value == pytest.approx(4 * math.pi, abs=1e-6)


def test_azimuth_first_chart_has_inward_normal():
    # the same chart with (phi, theta) ordered first-azimuth: r_phi x r_theta
    # points inward, so the integral is -4 pi unless the orientation is flipped
    f = parse_map("(phi, theta) -> (sin(theta)*cos(phi), sin(theta)*sin(phi), cos(theta))")
    box = [(0.0, 2 * math.pi), (0.0, math.pi)]
    q = QuadratureSpec(32)
    assert integrate_form(SPHERE_FLUX, ParamPatch(f, box), q) == pytest.approx(-4 * math.pi, abs=1e-6)
    assert integrate_form(SPHERE_FLUX, ParamPatch(f, box, -1), q) == pytest.approx(4 * math.pi, abs=1e-6)


def test_integrate_form_checks():
    with pytest.raises(DimensionError):
        integrate_form(parse_form("{1} dx^dy", 3), SEGMENT)
    with pytest.raises(DimensionError):
        integrate_form(basis_form((0,), 2), SEGMENT)
    with pytest.raises(ValueError):
        integrate_form(basis_form((0,), 3), SEGMENT, quad=16)


def test_zero_form_is_not_integrated():
    with pytest.raises(DimensionError):
        integrate_form(parse_form("x", 1), ParamPatch(identity_map(1), [(0, 1)]))


# -- integrate_volume_form ---------------------------------------------------

def test_volume_forms():
    box = [(0, 1)] * 3
    assert integrate_volume_form(parse_form("{1} dx^dy^dz", 3), box) == pytest.approx(1.0, abs=1e-15)
    assert integrate_volume_form(parse_form("{x} dx^dy^dz", 3), box) == pytest.approx(0.5, abs=1e-15)
    assert integrate_volume_form(zero_form(3, 3), [(-1, 2)] * 3) == 0.0


def test_volume_form_matches_identity_patch(rng):
    for _ in range(5):
        g = random_form(rng, 3, 3, "poly")
        box = [tuple(sorted(rng.uniform(-1, 1, 2))) for _ in range(3)]
        assert integrate_volume_form(g, box) == pytest.approx(
            integrate_form(g, ParamPatch(identity_map(3), box)), abs=1e-12)


def test_volume_form_checks():
    with pytest.raises(DimensionError):
        integrate_volume_form(parse_form("{1} dx^dy", 3), [(0, 1)] * 3)
    with pytest.raises(DimensionError):
        integrate_volume_form(parse_form("{1} dx^dy", 2), [(0, 1)] * 3)


# -- classical formulas ------------------------------------------------------

def test_line_integral_examples():
    assert line_integral_classical(VectorFieldProxy(["1", "0", "0"]), SEGMENT) == 1.0
    v = VectorFieldProxy(["y", "0", "0"])
    assert line_integral_classical(v, CIRCLE) == pytest.approx(
        integrate_form(one_form_from_field(v), CIRCLE), abs=1e-14)
    flat = ParamPatch(parse_map("(t) -> (t^2, 3*t - 1, 0)"), [(0, 2)])
    assert line_integral_classical(VectorFieldProxy(["0", "0", "1"]), flat) == 0.0


def test_flux_examples():
    assert flux_classical(VectorFieldProxy(["0", "0", "1"]), FLAT_SQUARE) == pytest.approx(1.0, abs=1e-15)
    sphere = flux_classical(VectorFieldProxy(["x", "y", "z"]), sphere_patch(), QuadratureSpec(32))
    assert sphere == pytest.approx(4 * math.pi, abs=1e-6)
    tangent = VectorFieldProxy(["x*y", "exp(x)", "0"])
    assert flux_classical(tangent, FLAT_SQUARE) == 0.0


def test_classical_needs_right_shapes():
    with pytest.raises(DimensionError):
        line_integral_classical(VectorFieldProxy(["1", "0", "0"]), FLAT_SQUARE)
    with pytest.raises(DimensionError):
        flux_classical(VectorFieldProxy(["1", "0", "0"]), SEGMENT)


def test_classical_equivalence(rng):
    for _ in range(20):
        v = random_field(rng, "poly")
        curve = _patch(rng, 1, 3, 3)
        assert integrate_form(one_form_from_field(v), curve) == pytest.approx(
            line_integral_classical(v, curve), abs=1e-10)
        surface = _patch(rng, 2, 3)
        assert integrate_form(two_form_from_field(v), surface) == pytest.approx(
            flux_classical(v, surface), abs=1e-9)


# -- Stokes --------------------------------------------------------------------

def test_stokes_unit_square():
    r = verify_stokes(parse_form("{x} dy", 2), UNIT_SQUARE)
    assert r.lhs == pytest.approx(1.0, abs=1e-14)
    assert r.rhs == pytest.approx(1.0, abs=1e-14)
    assert r.abs_error < 1e-8


def test_stokes_zero_form():
    r = verify_stokes(zero_form(1, 2), UNIT_SQUARE)
    assert (r.lhs, r.rhs, r.abs_error) == (0.0, 0.0, 0.0)


def test_stokes_unit_cube():
    r = verify_stokes(parse_form("{x} dy^dz", 3), UNIT_CUBE)
    assert r.lhs == pytest.approx(1.0, abs=1e-14)
    assert r.abs_error < 1e-8
    assert set(json.loads(json.dumps(r.to_json()))) == {"lhs", "rhs", "abs_error"}


def test_boundary_of_unit_square_is_counterclockwise():
    faces = boundary_faces(UNIT_SQUARE)
    assert len(faces) == 4
    assert [f.orientation for f in faces] == [1, -1, -1, 1]


def test_stokes_random_polynomial_patches(rng):
    for k, n in [(2, 2), (2, 3), (3, 3), (2, 4)]:
        for _ in range(4):
            a = random_form(rng, k - 1, n, "poly")
            assert verify_stokes(a, _patch(rng, k, n)).abs_error < 1e-6


def test_stokes_with_trig_coefficients(rng):
    patch = ParamPatch(parse_map("(u, v) -> (u*cos(v), u*sin(v), u^2)"), [(0.5, 1.5), (0, 3)])
    for _ in range(4):
        a = random_form(rng, 1, 3, "trig")
        assert verify_stokes(a, patch, QuadratureSpec(24)).abs_error < 1e-8


def test_stokes_on_reversed_patch():
    r = verify_stokes(parse_form("{x} dy", 2), UNIT_SQUARE.reversed())
    assert r.lhs == pytest.approx(-1.0) and r.abs_error < 1e-12


def test_stokes_degree_checks():
    with pytest.raises(DimensionError):
        verify_stokes(parse_form("{x} dx^dy", 3), FLAT_SQUARE)
    with pytest.raises(DimensionError):
        verify_stokes(parse_form("{x} dy", 3), SEGMENT)


# -- orientation ---------------------------------------------------------------

def test_orientation_examples():
    r = orientation_flip_check(parse_form("{1} dx^dy", 2), UNIT_SQUARE)
    assert r.positive == pytest.approx(1.0, abs=1e-14)
    assert r.negative == -r.positive and r.passed
    r = orientation_flip_check(parse_form("{y} dx", 3), CIRCLE)
    assert r.positive == pytest.approx(-math.pi) and r.negative == -r.positive
    r = orientation_flip_check(zero_form(1, 3), CIRCLE)
    assert (r.positive, r.negative) == (0.0, 0.0)


def test_orientation_flip_random(rng):
    for k in (1, 2, 3):
        for _ in range(5):
            r = orientation_flip_check(random_form(rng, k, 3), _patch(rng, k, 3))
            assert abs(r.positive + r.negative) <= 1e-12 and r.passed


def test_patch_validation():
    f = parse_map("(t) -> (t, t)")
    with pytest.raises(ValueError):
        ParamPatch(f, [(1, 0)])
    with pytest.raises(ValueError):
        ParamPatch(f, [(0, math.inf)])
    with pytest.raises(DimensionError):
        ParamPatch(f, [(0, 1), (0, 1)])
    with pytest.raises(ValueError):
        ParamPatch(f, [(0, 1)], orientation=2)


# -- quadrature ----------------------------------------------------------------

@pytest.mark.parametrize("points, rule", [(0, "gauss-legendre"), (-3, "midpoint"), (4, "simpson")])
def test_quadrature_spec_validation(points, rule):
    with pytest.raises(ValueError):
        QuadratureSpec(points, rule)


def test_quadrature_nodes():
    x, w = QuadratureSpec(5).nodes_weights(0.0, 2.0)
    assert w.sum() == pytest.approx(2.0, abs=1e-15)
    assert all(0 < t < 2 for t in x)
    x, w = QuadratureSpec(4, "midpoint").nodes_weights(0.0, 1.0)
    assert list(x) == [0.125, 0.375, 0.625, 0.875] and list(w) == [0.25] * 4
    assert QuadratureSpec(8).to_json() == {"points": 8, "rule": "gauss-legendre"}


def test_gauss_legendre_is_exact_for_polynomials():
    # n points integrate degree 2n - 1 exactly
    c = parse_scalar("x^7 - 3*x^2 + 1", ["x"])
    assert integrate_function(c, [(0, 2)], QuadratureSpec(4)) == pytest.approx(32 - 8 + 2, abs=1e-12)


def test_repeated_runs_are_bit_identical():
    patch = sphere_patch()
    values = {integrate_form(SPHERE_FLUX, patch, QuadratureSpec(32)) for _ in range(3)}
    assert len(values) == 1


def test_reparameterisation_invariance(rng):
    s_map = "(s) -> ({a} + ({b} - {a})*s^2)"
    for _ in range(10):
        curve = random_polynomial_map(rng, 1, 3, 3)
        a0, b0 = sorted(float(t) for t in rng.uniform(-1, 1, 2))
        form = random_form(rng, 1, 3)
        direct = integrate_form(form, ParamPatch(curve, [(a0, b0)]), QuadratureSpec(32))
        reparam = compose(parse_map(s_map.format(a=repr(a0), b=repr(b0))), curve)
        slow = integrate_form(form, ParamPatch(reparam, [(0, 1)]), QuadratureSpec(32))
        assert slow == pytest.approx(direct, abs=1e-8)


def test_surface_reparameterisation_invariance():
    cap = parse_map("(r, s) -> (r*cos(s), r*sin(s), 1 - r^2)")
    stretched = compose(parse_map("(u, v) -> (u^2, 2*v)"), cap)
    b = parse_form("{x*z} dy^dz + {exp(y)} dz^dx + {1} dx^dy", 3)
    q = QuadratureSpec(32)
    first = integrate_form(b, ParamPatch(cap, [(0, 1), (0, 2)]), q)
    second = integrate_form(b, ParamPatch(stretched, [(0, 1), (0, 1)]), q)
    assert second == pytest.approx(first, abs=1e-8)


def test_additivity(rng):
    for k in (1, 2, 3):
        for _ in range(4):
            patch = _patch(rng, k, 3)
            a = random_form(rng, k, 3)
            axis = int(rng.integers(k))
            lo, hi = patch.box[axis]
            cut = lo + (hi - lo) * float(rng.uniform(0.2, 0.8))
            left = [tuple(b) for b in patch.box]
            right = list(left)
            left[axis], right[axis] = (lo, cut), (cut, hi)
            whole = integrate_form(a, patch)
            parts = integrate_form(a, ParamPatch(patch.map, left)) + \
                integrate_form(a, ParamPatch(patch.map, right))
            assert parts == pytest.approx(whole, abs=1e-10)


@pytest.mark.parametrize("form, patch", [
    ("{1/(1 + 25*x^2)} dx", ParamPatch(parse_map("(t) -> (t, 0, 0)"), [(-1, 1)])),
    ("{exp(x)/(1 + 16*y^2)} dx^dy", ParamPatch(identity_map(2), [(-1, 1), (-1, 1)])),
    ("{1/(1.1 - sin(z))} dz", ParamPatch(parse_map("(t) -> (0, 0, t)"), [(-1.5, 1.5)])),
])
def test_convergence_is_monotone(form, patch):
    a = parse_form(form, patch.map.codomain_dim)
    report = convergence_study(a, patch)
    assert report.points == (4, 8, 16, 32) and report.reference_points == 64
    assert report.monotone, report.errors
    assert report.errors[-1] < 1e-4


def test_midpoint_rule_converges_quadratically():
    a = parse_form("{exp(x)} dx", 3)
    patch = ParamPatch(parse_map("(t) -> (t, 0, 0)"), [(0, 1)])
    exact = math.e - 1
    errs = [abs(integrate_form(a, patch, QuadratureSpec(p, "midpoint")) - exact) for p in (8, 16, 32)]
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.05)
    assert np.all(np.diff(errs) < 0)
