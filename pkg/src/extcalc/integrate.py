"""Integration of k-forms over parameterised box patches.

A k-form on R^n is pulled back along the patch map to the k-dimensional
parameter box, where it becomes ``c(u) du_1 ^ ... ^ du_k``; the function
``c`` is then integrated with a tensor-product quadrature rule.  The
classical line-integral and flux formulas are implemented separately from
the pullback so the two routes can be checked against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .calculus import VectorFieldProxy, exterior_derivative, volume_coefficient
from .errors import DimensionError
from .expr import Const, Expr, Var, eval_array, substitute
from .forms import DifferentialForm
from .maps import SmoothMap, jacobian, pullback, sphere_chart

__all__ = [
    "QuadratureSpec", "ParamPatch", "integrate_form", "integrate_function",
    "integrate_volume_form", "line_integral_classical", "flux_classical",
    "boundary_faces", "StokesReport", "verify_stokes", "OrientationReport",
    "orientation_flip_check", "sphere_patch", "RULES", "ConvergenceReport",
    "convergence_study",
]

RULES = ("gauss-legendre", "midpoint")


@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor-product rule with ``points`` nodes along every axis."""

    points: int = 16
    rule: str = "gauss-legendre"

    def __post_init__(self):
        if not isinstance(self.points, int) or self.points < 1:
            raise ValueError(f"points per axis must be a positive integer, got {self.points!r}")
        if self.rule not in RULES:
            raise ValueError(f"unknown quadrature rule {self.rule!r}; choose from {RULES}")

    def nodes_weights(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights on the interval [a, b]."""
        if self.rule == "gauss-legendre":
            x, w = np.polynomial.legendre.leggauss(self.points)
        else:
            x = (2.0 * np.arange(self.points) + 1.0) / self.points - 1.0
            w = np.full(self.points, 2.0 / self.points)
        half = 0.5 * (b - a)
        return half * x + 0.5 * (a + b), half * w

    def to_json(self) -> dict:
        return {"points": self.points, "rule": self.rule}


@dataclass(frozen=True)
class ParamPatch:
    """A map from the box ``[a1, b1] x ... x [ak, bk]`` with an orientation sign."""

    map: SmoothMap
    box: tuple[tuple[float, float], ...]
    orientation: int = 1

    def __init__(self, map: SmoothMap, box: Sequence[Sequence[float]], orientation: int = 1):
        box = tuple((float(a), float(b)) for a, b in box)
        for a, b in box:
            if not (math.isfinite(a) and math.isfinite(b) and a < b):
                raise ValueError(f"invalid box interval [{a}, {b}]")
        if len(box) != map.domain_dim:
            raise DimensionError(
                f"box has {len(box)} axes but the map has {map.domain_dim} parameters")
        if orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        object.__setattr__(self, "map", map)
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "orientation", int(orientation))

    @property
    def dimension(self) -> int:
        return len(self.box)

    def reversed(self) -> "ParamPatch":
        return ParamPatch(self.map, self.box, -self.orientation)


def sphere_patch() -> ParamPatch:
    """The unit sphere as a single chart over [0, pi] x [0, 2pi]."""
    return ParamPatch(sphere_chart(), [(0.0, math.pi), (0.0, 2.0 * math.pi)])


def _grid(box, quad: QuadratureSpec):
    """Flattened tensor grid in lexicographic (C) order and matching weights."""
    axes = [quad.nodes_weights(a, b) for a, b in box]
    coords = np.meshgrid(*(x for x, _ in axes), indexing="ij")
    weights = np.ones_like(coords[0]) if coords else np.ones(())
    for g in np.meshgrid(*(w for _, w in axes), indexing="ij"):
        weights = weights * g
    return [c.ravel() for c in coords], weights.ravel()


def _weighted_sum(values: np.ndarray, weights: np.ndarray) -> float:
    # exactly rounded, so the result does not depend on summation order
    return math.fsum((np.asarray(values) * weights).tolist())


def integrate_function(c: Expr, box: Sequence[Sequence[float]],
                       quad: QuadratureSpec | None = None) -> float:
    """Integrate the scalar function ``c`` over ``box`` (variables = box axes)."""
    quad = quad or QuadratureSpec()
    coords, weights = _grid(tuple(box), quad)
    return _weighted_sum(eval_array(c, coords), weights)


def _check_patch(a: DifferentialForm, patch: ParamPatch, quad):
    if not isinstance(quad, QuadratureSpec):
        raise ValueError("quadrature must be a QuadratureSpec")
    if a.dimension != patch.map.codomain_dim:
        raise DimensionError(
            f"form on R^{a.dimension} but the patch lies in R^{patch.map.codomain_dim}")
    if a.degree != patch.dimension or a.degree < 1:
        raise DimensionError(
            f"a {a.degree}-form cannot be integrated over a {patch.dimension}-dimensional patch")


def integrate_form(a: DifferentialForm, patch: ParamPatch,
                   quad: QuadratureSpec | None = None) -> float:
    """Integral of the k-form ``a`` over the k-dimensional ``patch``."""
    quad = quad or QuadratureSpec()
    _check_patch(a, patch, quad)
    pulled = pullback(patch.map, a)
    density = pulled.coefficient(tuple(range(patch.dimension)))
    return patch.orientation * integrate_function(density, patch.box, quad)


def integrate_volume_form(g: DifferentialForm, box: Sequence[Sequence[float]],
                          quad: QuadratureSpec | None = None) -> float:
    """Integral of an n-form on R^n over a box of R^n; no pullback involved."""
    if g.degree != g.dimension:
        raise DimensionError(f"a {g.degree}-form on R^{g.dimension} is not a volume form")
    box = tuple(box)
    if len(box) != g.dimension:
        raise DimensionError(f"box has {len(box)} axes, expected {g.dimension}")
    return integrate_function(volume_coefficient(g), box, quad)


def _field_and_tangents(v: VectorFieldProxy, patch: ParamPatch, quad, k: int):
    if patch.map.codomain_dim != 3:
        raise DimensionError("classical formulas need a patch in R^3")
    if patch.dimension != k:
        raise DimensionError(f"expected a {k}-dimensional patch, got {patch.dimension}")
    coords, weights = _grid(patch.box, quad)
    position = patch.map.evaluate_grid(coords)
    field_values = np.array([eval_array(c, position) for c in v.components])
    jac = jacobian(patch.map)
    tangents = [np.array([eval_array(e, coords) for e in jac.column(j)]) for j in range(k)]
    return field_values, tangents, weights


def line_integral_classical(v: VectorFieldProxy, patch: ParamPatch,
                            quad: QuadratureSpec | None = None) -> float:
    """Integral of (A . X) dt with X the curve's velocity."""
    quad = quad or QuadratureSpec()
    field_values, (velocity,), weights = _field_and_tangents(v, patch, quad, 1)
    integrand = np.sum(field_values * velocity, axis=0)
    return patch.orientation * _weighted_sum(integrand, weights)


def flux_classical(v: VectorFieldProxy, patch: ParamPatch,
                   quad: QuadratureSpec | None = None) -> float:
    """Integral of B . (r_u x r_v) du dv."""
    quad = quad or QuadratureSpec()
    field_values, (ru, rv), weights = _field_and_tangents(v, patch, quad, 2)
    normal = np.cross(ru, rv, axis=0)
    integrand = np.sum(field_values * normal, axis=0)
    return patch.orientation * _weighted_sum(integrand, weights)


def boundary_faces(patch: ParamPatch) -> list[ParamPatch]:
    """The 2k faces of a k-dimensional box patch with induced orientations.

    The face x_i = b_i carries sign (-1)^i (axes counted from 0) and the
    face x_i = a_i the opposite sign, both times the patch orientation.
    """
    k = patch.dimension
    faces = []
    for i, (a, b) in enumerate(patch.box):
        rest = [j for j in range(k) if j != i]
        names = [patch.map.domain_vars[j] for j in rest]
        for value, sign in ((b, (-1) ** i), (a, -(-1) ** i)):
            repl: list[Expr] = []
            for j in range(k):
                repl.append(Const(value) if j == i else Var(rest.index(j), patch.map.domain_vars[j]))
            face_map = SmoothMap(names, [substitute(c, repl) for c in patch.map.components])
            faces.append(ParamPatch(face_map, [patch.box[j] for j in rest],
                                    sign * patch.orientation))
    return faces


@dataclass(frozen=True)
class StokesReport:
    lhs: float
    rhs: float
    abs_error: float

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "abs_error": self.abs_error}


def verify_stokes(a: DifferentialForm, patch: ParamPatch,
                  quad: QuadratureSpec | None = None) -> StokesReport:
    """Compare the integral of ``da`` over the patch with that of ``a`` over
    its boundary faces."""
    quad = quad or QuadratureSpec()
    k = patch.dimension
    if not 2 <= k <= a.dimension:
        raise DimensionError(f"Stokes check needs 2 <= patch dimension <= {a.dimension}")
    if a.degree != k - 1:
        raise DimensionError(f"expected a {k - 1}-form for a {k}-dimensional patch")
    lhs = integrate_form(exterior_derivative(a), patch, quad)
    rhs = math.fsum(integrate_form(a, face, quad) for face in boundary_faces(patch))
    return StokesReport(lhs, rhs, abs(lhs - rhs))


@dataclass(frozen=True)
class OrientationReport:
    positive: float
    negative: float
    passed: bool
    tolerance: float = field(default=1e-12)

    def to_json(self) -> dict:
        return {"positive": self.positive, "negative": self.negative,
                "passed": self.passed, "tolerance": self.tolerance}


def orientation_flip_check(a: DifferentialForm, patch: ParamPatch,
                           quad: QuadratureSpec | None = None,
                           tol: float = 1e-12) -> OrientationReport:
    """Integrate over the patch with both orientations; the values must be
    negatives of each other."""
    quad = quad or QuadratureSpec()
    pos = integrate_form(a, ParamPatch(patch.map, patch.box, 1), quad)
    neg = integrate_form(a, ParamPatch(patch.map, patch.box, -1), quad)
    return OrientationReport(pos, neg, abs(pos + neg) <= tol, tol)


@dataclass(frozen=True)
class ConvergenceReport:
    points: tuple[int, ...]
    values: tuple[float, ...]
    errors: tuple[float, ...]
    reference_points: int
    reference: float

    @property
    def monotone(self) -> bool:
        """True when every refinement strictly reduces the error."""
        return all(b < a for a, b in zip(self.errors, self.errors[1:]))

    def to_json(self) -> dict:
        return {"points": list(self.points), "values": list(self.values),
                "errors": list(self.errors), "reference_points": self.reference_points,
                "reference": self.reference, "monotone": self.monotone}


def convergence_study(a: DifferentialForm, patch: ParamPatch,
                      points: Sequence[int] = (4, 8, 16, 32),
                      reference_points: int = 64,
                      rule: str = "gauss-legendre") -> ConvergenceReport:
    """Errors of the integral at each points-per-axis count against a
    finer reference rule."""
    reference = integrate_form(a, patch, QuadratureSpec(reference_points, rule))
    values = tuple(integrate_form(a, patch, QuadratureSpec(p, rule)) for p in points)
    return ConvergenceReport(tuple(points), values,
                             tuple(abs(v - reference) for v in values),
                             reference_points, reference)
