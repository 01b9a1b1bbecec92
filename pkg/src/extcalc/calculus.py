"""Exterior derivative and its vector-calculus reading on R^3."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import DimensionError
from .expr import Expr, as_expr, differentiate, simplify
from .forms import (
    DifferentialForm, MultiIndex, canonical_index, default_variables, make_form,
    scalar_form, zero_form,
)

__all__ = [
    "VectorFieldProxy", "exterior_derivative", "gradient_as_one_form",
    "curl_as_two_form", "divergence_as_volume_form", "one_form_from_field",
    "two_form_from_field", "field_from_one_form", "field_from_two_form",
    "volume_coefficient", "classical_gradient", "classical_curl",
    "classical_divergence", "ComplexReport", "complex_report",
]


@dataclass(frozen=True)
class VectorFieldProxy:
    """A vector field (A1, A2, A3) on R^3 given by coefficient expressions."""

    components: tuple[Expr, Expr, Expr]
    variables: tuple[str, ...] = ("x", "y", "z")

    def __init__(self, components, variables: Sequence[str] | None = None):
        variables = tuple(variables) if variables is not None else default_variables(3)
        comps = tuple(as_expr(c, variables) for c in components)
        if len(comps) != 3 or len(variables) != 3:
            raise DimensionError("a vector field proxy has exactly three components on R^3")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "variables", variables)


def exterior_derivative(a: DifferentialForm) -> DifferentialForm:
    """d(f dx^I) = sum_j (df/dx_j) dx^j ^ dx^I, extended linearly.

    For a top-degree form the result is the zero (n+1)-form.
    """
    n, k = a.dimension, a.degree
    if k >= n:
        return zero_form(k + 1, n, a.variables)
    table: dict[MultiIndex, Expr] = {}
    for idx, c in a.terms:
        for j in range(n):
            if j in idx:
                continue
            sign, new = canonical_index((j,) + idx)
            dc = differentiate(c, j)
            term = dc if sign > 0 else -dc
            table[new] = table[new] + term if new in table else term
    return make_form(k + 1, n, table.items(), a.variables)


def _require_r3(form_or_field):
    if getattr(form_or_field, "dimension", 3) != 3:
        raise DimensionError("the grad/curl/div correspondence is defined on R^3")


def one_form_from_field(v: VectorFieldProxy) -> DifferentialForm:
    """A1 dx + A2 dy + A3 dz."""
    return make_form(1, 3, [((i,), c) for i, c in enumerate(v.components)], v.variables)


def two_form_from_field(v: VectorFieldProxy) -> DifferentialForm:
    """A1 dy^dz + A2 dz^dx + A3 dx^dy (cyclic order)."""
    a1, a2, a3 = v.components
    return make_form(2, 3, [((1, 2), a1), ((2, 0), a2), ((0, 1), a3)], v.variables)


def field_from_one_form(a: DifferentialForm) -> VectorFieldProxy:
    _require_r3(a)
    if a.degree != 1:
        raise DimensionError("expected a 1-form")
    return VectorFieldProxy([a.coefficient((i,)) for i in range(3)], a.variables)


def field_from_two_form(b: DifferentialForm) -> VectorFieldProxy:
    _require_r3(b)
    if b.degree != 2:
        raise DimensionError("expected a 2-form")
    return VectorFieldProxy([b.coefficient((1, 2)), b.coefficient((2, 0)),
                             b.coefficient((0, 1))], b.variables)


def volume_coefficient(g: DifferentialForm) -> Expr:
    """The function g with ``form = g dx^1 ^ ... ^ dx^n``."""
    if g.degree != g.dimension:
        raise DimensionError(f"a {g.degree}-form on R^{g.dimension} is not a volume form")
    return g.coefficient(tuple(range(g.dimension)))


def gradient_as_one_form(f) -> DifferentialForm:
    if not isinstance(f, DifferentialForm):
        f = scalar_form(f, 3)
    _require_r3(f)
    if f.degree != 0:
        raise DimensionError("the gradient takes a 0-form")
    return exterior_derivative(f)


def curl_as_two_form(v: VectorFieldProxy) -> DifferentialForm:
    return exterior_derivative(one_form_from_field(v))


def divergence_as_volume_form(v: VectorFieldProxy) -> DifferentialForm:
    return exterior_derivative(two_form_from_field(v))


# Textbook component formulas, kept separate from d so the two can be compared.

def classical_gradient(f: Expr) -> tuple[Expr, Expr, Expr]:
    return tuple(simplify(differentiate(f, i)) for i in range(3))


def classical_curl(v: VectorFieldProxy) -> tuple[Expr, Expr, Expr]:
    a1, a2, a3 = v.components
    d = differentiate
    return (simplify(d(a3, 1) - d(a2, 2)),
            simplify(d(a1, 2) - d(a3, 0)),
            simplify(d(a2, 0) - d(a1, 1)))


def classical_divergence(v: VectorFieldProxy) -> Expr:
    a1, a2, a3 = v.components
    return simplify(differentiate(a1, 0) + differentiate(a2, 1) + differentiate(a3, 2))


@dataclass(frozen=True)
class ComplexReport:
    """The de Rham sequence 0-forms -> 1-forms -> ... -> n-forms -> 0."""

    dimension: int
    degrees: tuple[int, ...]
    arrows: tuple[tuple[int, int | str], ...]

    def to_json(self) -> dict:
        return {"dimension": self.dimension, "degrees": list(self.degrees),
                "arrows": [list(a) for a in self.arrows]}

    def __str__(self):
        spaces = " -d-> ".join(f"Omega^{k}" for k in self.degrees)
        return f"{spaces} -d-> 0"


def complex_report(n: int) -> ComplexReport:
    if n < 1:
        raise DimensionError("dimension must be at least 1")
    degrees = tuple(range(n + 1))
    arrows = tuple((k, k + 1) for k in range(n)) + ((n, "terminal"),)
    return ComplexReport(n, degrees, arrows)
