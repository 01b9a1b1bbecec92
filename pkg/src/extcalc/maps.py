"""Smooth maps between coordinate spaces and the pullback of forms."""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, ParseError
from .expr import (
    Const, Expr, Var, as_expr, differentiate, eval_array, eval_scalar, free_indices,
    parse_scalar, simplify, substitute, to_text,
)
from .forms import (
    DifferentialForm, MultiIndex, default_variables, make_form, permutation_sign, zero_form,
)

__all__ = [
    "SmoothMap", "JacobianMatrix", "jacobian", "pullback", "compose",
    "identity_map", "parse_map", "map_to_text", "map_to_json", "map_from_json",
    "sphere_chart", "symbolic_det",
]


@dataclass(frozen=True)
class SmoothMap:
    """A map R^m -> R^n given by n component expressions in m variables."""

    domain_vars: tuple[str, ...]
    components: tuple[Expr, ...]

    def __init__(self, domain_vars: Sequence[str], components: Sequence):
        domain_vars = tuple(domain_vars)
        comps = tuple(as_expr(c, domain_vars) for c in components)
        for c in comps:
            bad = [i for i in free_indices(c) if i >= len(domain_vars)]
            if bad:
                raise DimensionError(
                    f"component {to_text(c)} uses variable index {bad[0]} "
                    f"outside the {len(domain_vars)} domain variables")
        object.__setattr__(self, "domain_vars", domain_vars)
        object.__setattr__(self, "components", comps)

    @property
    def domain_dim(self) -> int:
        return len(self.domain_vars)

    @property
    def codomain_dim(self) -> int:
        return len(self.components)

    def __call__(self, point) -> tuple[float, ...]:
        return tuple(eval_scalar(c, point) for c in self.components)

    def evaluate_grid(self, coords: Sequence[np.ndarray]) -> list[np.ndarray]:
        return [eval_array(c, coords) for c in self.components]

    def __str__(self):
        return map_to_text(self)


@dataclass(frozen=True)
class JacobianMatrix:
    """n x m matrix of partial derivatives; column j pushes forward e_j."""

    entries: tuple[tuple[Expr, ...], ...]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0]) if self.entries else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def column(self, j: int) -> tuple[Expr, ...]:
        return tuple(row[j] for row in self.entries)

    def at(self, point) -> np.ndarray:
        return np.array([[eval_scalar(e, point) for e in row] for row in self.entries])


def jacobian(f: SmoothMap) -> JacobianMatrix:
    return JacobianMatrix(tuple(
        tuple(simplify(differentiate(c, j)) for j in range(f.domain_dim))
        for c in f.components))


def identity_map(n_or_vars) -> SmoothMap:
    if isinstance(n_or_vars, int):
        names = default_variables(n_or_vars)
    else:
        names = tuple(n_or_vars)
    return SmoothMap(names, [Var(i, name) for i, name in enumerate(names)])


def sphere_chart() -> SmoothMap:
    """Unit sphere parameterised by polar angle theta and azimuth phi.

    The domain is ordered (theta, phi) so that the box [0, pi] x [0, 2pi]
    carries the outward normal.
    """
    return parse_map("(theta, phi) -> (sin(theta)*cos(phi), sin(theta)*sin(phi), cos(theta))")


def symbolic_det(rows: Sequence[Sequence[Expr]]) -> Expr:
    """Leibniz expansion of a small symbolic determinant."""
    k = len(rows)
    total: Expr = Const(0.0)
    for perm in itertools.permutations(range(k)):
        term: Expr = Const(float(permutation_sign(perm)))
        for r, c in enumerate(perm):
            term = term * rows[r][c]
        total = total + term
    return simplify(total)


def pullback(f: SmoothMap, a: DifferentialForm) -> DifferentialForm:
    """Pull ``a`` (a form on the codomain of ``f``) back to the domain.

    f*(g dx^I) = (g o f) * sum_J det(Jac[I, J]) du^J over increasing J.
    """
    if a.dimension != f.codomain_dim:
        raise DimensionError(
            f"form on R^{a.dimension} cannot be pulled back along a map into R^{f.codomain_dim}")
    m, k = f.domain_dim, a.degree
    if k > m:
        return zero_form(k, m, f.domain_vars)
    if k == 0:
        return make_form(0, m, [((), substitute(a.coefficient(()), f.components))],
                         f.domain_vars)
    jac = jacobian(f)
    table: dict[MultiIndex, Expr] = {}
    for idx, g in a.terms:
        composed = substitute(g, f.components)
        for cols in itertools.combinations(range(m), k):
            minor = symbolic_det([[jac[i, j] for j in cols] for i in idx])
            if isinstance(minor, Const) and minor.value == 0:
                continue
            term = composed * minor
            table[cols] = table[cols] + term if cols in table else term
    return make_form(k, m, table.items(), f.domain_vars)


def compose(f: SmoothMap, g: SmoothMap) -> SmoothMap:
    """The map ``g o f`` (first f, then g)."""
    if f.codomain_dim != g.domain_dim:
        raise DimensionError(
            f"cannot follow a map into R^{f.codomain_dim} by a map from R^{g.domain_dim}")
    return SmoothMap(f.domain_vars,
                     [simplify(substitute(c, f.components)) for c in g.components])


# ---------------------------------------------------------------------------
# text and JSON encodings

_MAP_RE = re.compile(r"\s*(?:map\s+)?\((?P<vars>[^)]*)\)\s*->\s*\((?P<body>.*)\)\s*", re.S)


def _split_commas(text: str) -> list[tuple[str, int]]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append((text[start:i], start))
            start = i + 1
    parts.append((text[start:], start))
    return parts


def parse_map(text: str) -> SmoothMap:
    """Parse ``"map (t) -> (cos(t), sin(t), 0)"``; the ``map`` keyword is optional."""
    m = _MAP_RE.fullmatch(text)
    if m is None:
        raise ParseError("expected '(vars) -> (components)'", text, 0, {"'('"})
    names = [v.strip() for v in m.group("vars").split(",")]
    if not all(names):
        raise ParseError("empty domain variable name", text, len(text[:m.start("vars")].encode()))
    body_start = m.start("body")
    comps = []
    for chunk, off in _split_commas(m.group("body")):
        try:
            comps.append(parse_scalar(chunk, names))
        except ParseError as exc:
            raise exc.relocate(text, len(text[:body_start + off].encode()))
    return SmoothMap(names, comps)


def map_to_text(f: SmoothMap) -> str:
    comps = ", ".join(to_text(c, f.domain_vars) for c in f.components)
    return f"map ({', '.join(f.domain_vars)}) -> ({comps})"


def map_to_json(f: SmoothMap) -> dict:
    return {"domain_vars": list(f.domain_vars),
            "components": [to_text(c, f.domain_vars) for c in f.components]}


def map_from_json(data) -> SmoothMap:
    if isinstance(data, str):
        data = json.loads(data)
    return SmoothMap(data["domain_vars"], [str(c) for c in data["components"]])
