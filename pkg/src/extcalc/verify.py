"""Randomised verification batteries behind ``extcalc verify``.

Each battery returns a :class:`VerifyReport` with one line per case: the
largest residual seen and the tolerance it was held to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .calculus import (
    VectorFieldProxy, classical_curl, classical_divergence, classical_gradient,
    complex_report, curl_as_two_form, divergence_as_volume_form, exterior_derivative,
    field_from_one_form, field_from_two_form, gradient_as_one_form, one_form_from_field,
    two_form_from_field, volume_coefficient,
)
from .errors import DomainError
from .expr import Const, Expr, eval_scalar, simplify
from .forms import DifferentialForm, pair, parse_form, scalar_form
from .integrate import (
    ParamPatch, QuadratureSpec, flux_classical, integrate_form,
    line_integral_classical, orientation_flip_check, sphere_patch, verify_stokes,
)
from .maps import identity_map, parse_map
from .sampling import random_coefficient, random_field, random_form, random_polynomial_map

__all__ = ["CaseResult", "VerifyReport", "KINDS", "run_suite", "form_residual",
           "expr_residual", "verify_ddzero", "verify_bridge", "verify_stokes_suite",
           "verify_orientation", "verify_classical"]

KINDS = ("ddzero", "stokes", "bridge", "orientation", "classical")


@dataclass(frozen=True)
class CaseResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual < self.tolerance

    def to_json(self) -> dict:
        return {"name": self.name, "residual": self.residual,
                "tolerance": self.tolerance, "passed": self.passed}


@dataclass
class VerifyReport:
    kind: str
    seed: int
    cases: list[CaseResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def add(self, name: str, residual: float, tolerance: float) -> None:
        self.cases.append(CaseResult(name, float(residual), tolerance))

    def to_json(self) -> dict:
        return {"kind": self.kind, "seed": self.seed, "passed": self.passed,
                "cases": [c.to_json() for c in self.cases]}

    def to_text(self) -> str:
        lines = [f"{self.kind}: {'PASS' if self.passed else 'FAIL'} (seed {self.seed})"]
        for c in self.cases:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"  {status}  {c.name:<40s} max residual {c.residual:.3e} "
                         f"(tol {c.tolerance:.0e})")
        return "\n".join(lines)


def expr_residual(e: Expr, n: int, rng: np.random.Generator, points: int = 100) -> float:
    """0 for a symbolic zero, else the largest |e| over random points in [-1, 1]^n."""
    s = simplify(e)
    if isinstance(s, Const):
        return abs(s.value)
    worst = 0.0
    for q in rng.uniform(-1.0, 1.0, size=(points, n)):
        try:
            worst = max(worst, abs(eval_scalar(s, q)))
        except DomainError:
            continue
    return worst


def form_residual(a: DifferentialForm, rng: np.random.Generator, points: int = 100) -> float:
    """0 for the canonical zero form, else the largest |a(q)(v1..vk)| over
    random points q and random vectors."""
    if a.is_zero:
        return 0.0
    n, k = a.dimension, a.degree
    worst = 0.0
    for q in rng.uniform(-1.0, 1.0, size=(points, n)):
        vecs = list(rng.normal(size=(k, n)))
        try:
            worst = max(worst, abs(pair(a, q, vecs)))
        except DomainError:
            continue
    return worst


def verify_ddzero(dim: int = 3, degrees=None, trials: int = 50, seed: int = 0,
                  points: int = 100, tol: float = 1e-10) -> VerifyReport:
    rng = np.random.default_rng(seed)
    report = VerifyReport("ddzero", seed)
    spaces = complex_report(dim)
    degrees = [k for k in spaces.degrees if k < dim] if degrees is None else list(degrees)
    for k in degrees:
        worst = 0.0
        for _ in range(trials):
            a = random_form(rng, k, dim, "mixed")
            worst = max(worst, form_residual(exterior_derivative(exterior_derivative(a)),
                                             rng, points))
        report.add(f"d(d a) = 0, degree {k}, dim {dim}, {trials} forms", worst, tol)
    return report


def _components_residual(got, expected, rng, points) -> float:
    return max(expr_residual(g - e, 3, rng, points) for g, e in zip(got, expected))


def verify_bridge(trials: int = 50, seed: int = 0, points: int = 100,
                  tol: float = 1e-10) -> VerifyReport:
    rng = np.random.default_rng(seed)
    report = VerifyReport("bridge", seed)
    worst = dict.fromkeys(("grad", "curl", "div", "curlgrad", "divcurl"), 0.0)
    for _ in range(trials):
        f = random_coefficient(rng, 3, "mixed", ("x", "y", "z"))
        v = random_field(rng)
        grad = gradient_as_one_form(scalar_form(f, 3))
        worst["grad"] = max(worst["grad"], _components_residual(
            field_from_one_form(grad).components, classical_gradient(f), rng, points))
        curl = curl_as_two_form(v)
        worst["curl"] = max(worst["curl"], _components_residual(
            field_from_two_form(curl).components, classical_curl(v), rng, points))
        div = divergence_as_volume_form(v)
        worst["div"] = max(worst["div"], expr_residual(
            volume_coefficient(div) - classical_divergence(v), 3, rng, points))
        worst["curlgrad"] = max(worst["curlgrad"], form_residual(
            curl_as_two_form(field_from_one_form(grad)), rng, points))
        worst["divcurl"] = max(worst["divcurl"], form_residual(
            divergence_as_volume_form(field_from_two_form(curl)), rng, points))
    labels = {"grad": "d f matches grad f", "curl": "d(v.dr) matches curl v",
              "div": "d(v.dA) matches div v", "curlgrad": "curl grad f = 0",
              "divcurl": "div curl v = 0"}
    for key, label in labels.items():
        report.add(f"{label} ({trials} fields)", worst[key], tol)
    return report


_UNIT_SQUARE = ParamPatch(identity_map(2), [(0.0, 1.0), (0.0, 1.0)])
_UNIT_CUBE = ParamPatch(identity_map(3), [(0.0, 1.0)] * 3)


def verify_stokes_suite(trials: int = 20, seed: int = 0, quad_points: int = 16,
                        fixed_tol: float = 1e-8, random_tol: float = 1e-6) -> VerifyReport:
    rng = np.random.default_rng(seed)
    quad = QuadratureSpec(quad_points)
    report = VerifyReport("stokes", seed)
    square = verify_stokes(parse_form("{x} dy", 2), _UNIT_SQUARE, quad)
    report.add("unit square, a = x dy", square.abs_error, fixed_tol)
    report.add("unit square, integral of da = 1", abs(square.lhs - 1.0), fixed_tol)
    cube = verify_stokes(parse_form("{x} dy^dz", 3), _UNIT_CUBE, quad)
    report.add("unit cube, a = x dy^dz", cube.abs_error, fixed_tol)
    report.add("unit cube, integral of da = 1", abs(cube.lhs - 1.0), fixed_tol)
    shapes = ((2, 2), (2, 3), (3, 3))
    worst = 0.0
    for t in range(trials):
        k, n = shapes[t % len(shapes)]
        a = random_form(rng, k - 1, n, "poly")
        worst = max(worst, verify_stokes(a, _random_patch(rng, k, n), quad).abs_error)
    report.add(f"{trials} random polynomial patches", worst, random_tol)
    return report


def _random_patch(rng, k, n, max_degree=2):
    f = random_polynomial_map(rng, k, n, max_degree)
    box = [tuple(sorted(rng.uniform(-1.0, 1.0, size=2))) for _ in range(k)]
    return ParamPatch(f, box)


def verify_orientation(trials: int = 20, seed: int = 0, quad_points: int = 16,
                       tol: float = 1e-12) -> VerifyReport:
    rng = np.random.default_rng(seed)
    quad = QuadratureSpec(quad_points)
    report = VerifyReport("orientation", seed)
    r = orientation_flip_check(parse_form("{1} dx^dy", 2), _UNIT_SQUARE, quad)
    report.add("unit square, dx^dy: +1 vs -1", abs(r.positive + r.negative), tol)
    circle = ParamPatch(parse_map("(t) -> (cos(t), sin(t), 0)"), [(0.0, 2 * math.pi)])
    r = orientation_flip_check(parse_form("{y} dx", 3), circle, quad)
    report.add("unit circle, y dx: -pi vs +pi", abs(r.positive + r.negative), tol)
    worst = 0.0
    for t in range(trials):
        k = 1 + t % 3
        r = orientation_flip_check(random_form(rng, k, 3, "mixed"), _random_patch(rng, k, 3), quad)
        worst = max(worst, abs(r.positive + r.negative))
    report.add(f"{trials} random forms and patches", worst, tol)
    return report


def verify_classical(trials: int = 100, seed: int = 0, quad_points: int = 16) -> VerifyReport:
    rng = np.random.default_rng(seed)
    quad = QuadratureSpec(quad_points)
    report = VerifyReport("classical", seed)
    line_worst = flux_worst = 0.0
    for _ in range(trials):
        v = random_field(rng, "poly")
        curve = _random_patch(rng, 1, 3, max_degree=3)
        line_worst = max(line_worst, abs(integrate_form(one_form_from_field(v), curve, quad)
                                         - line_integral_classical(v, curve, quad)))
        surface = _random_patch(rng, 2, 3)
        flux_worst = max(flux_worst, abs(integrate_form(two_form_from_field(v), surface, quad)
                                         - flux_classical(v, surface, quad)))
    report.add(f"line integral vs pullback ({trials} cubic curves)", line_worst, 1e-10)
    report.add(f"flux vs pullback ({trials} surfaces)", flux_worst, 1e-9)
    circle = ParamPatch(parse_map("(t) -> (cos(t), sin(t), 0)"), [(0.0, 2 * math.pi)])
    report.add("unit circle, y dx = -pi",
               abs(integrate_form(parse_form("{y} dx", 3), circle, quad) + math.pi), 1e-8)
    sphere = sphere_patch()
    q32 = QuadratureSpec(32)
    b = parse_form("{x} dy^dz + {y} dz^dx + {z} dx^dy", 3)
    value = integrate_form(b, sphere, q32)
    report.add("unit sphere flux of (x, y, z) = 4 pi", abs(value - 4 * math.pi), 1e-6)
    report.add("unit sphere, flux_classical matches",
               abs(value - flux_classical(VectorFieldProxy(["x", "y", "z"]), sphere, q32)), 1e-9)
    return report


def run_suite(kind: str, *, dim: int = 3, degree: int | None = None,
              trials: int | None = None, seed: int = 0,
              quad_points: int = 16) -> VerifyReport:
    """Dispatch to the battery named ``kind`` (one of :data:`KINDS`)."""
    if kind == "ddzero":
        degrees = None if degree is None else [degree]
        return verify_ddzero(dim, degrees, trials or 50, seed)
    if kind == "bridge":
        return verify_bridge(trials or 50, seed)
    if kind == "stokes":
        return verify_stokes_suite(trials or 20, seed, quad_points)
    if kind == "orientation":
        return verify_orientation(trials or 20, seed, quad_points)
    if kind == "classical":
        return verify_classical(trials or 100, seed, quad_points)
    raise ValueError(f"unknown verification kind {kind!r}; choose from {KINDS}")
