"""Differential k-forms on R^n with symbolic coefficients.

A form is stored as a table from strictly increasing multi-indices
``(i1 < ... < ik)`` to coefficient expressions; the basis element for
``(0, 2)`` is ``dx^dz``.  Every operation returns a canonical form: the
coefficients are simplified and zero entries are dropped, so two forms
built differently compare equal when their tables agree.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionError, ParseError
from .expr import (
    ONE, ZERO, Const, Expr, Point, as_expr, eval_scalar, is_zero, parse_scalar,
    simplify, to_text,
)

MultiIndex = tuple[int, ...]

__all__ = [
    "MultiIndex", "DifferentialForm", "TangentVector", "default_variables",
    "canonical_index", "make_form", "zero_form", "scalar_form", "basis_form",
    "pair", "add", "scale", "wedge", "forms_equal", "parse_form",
    "form_to_text", "form_to_json", "form_from_json", "permutation_sign",
]


def default_variables(n: int) -> tuple[str, ...]:
    """Coordinate names used when none are given: x, y, z up to n = 3."""
    if n <= 3:
        return ("x", "y", "z")[:n]
    return tuple(f"x{i + 1}" for i in range(n))


def permutation_sign(seq: Sequence[int]) -> int:
    """Parity of the permutation that sorts ``seq`` (distinct entries)."""
    inversions = sum(1 for a, b in itertools.combinations(seq, 2) if a > b)
    return -1 if inversions % 2 else 1


def canonical_index(index: Iterable[int]) -> tuple[int, MultiIndex]:
    """Sort a basis index, returning ``(sign, sorted_index)``.

    A repeated entry gives sign 0 since ``dx^dx = 0``.
    """
    index = tuple(int(i) for i in index)
    if len(set(index)) != len(index):
        return 0, tuple(sorted(index))
    return permutation_sign(index), tuple(sorted(index))


@dataclass(frozen=True)
class TangentVector:
    """Components of a vector in T_q R^n with respect to e_1, ..., e_n."""

    components: tuple[float, ...]

    def __init__(self, components):
        object.__setattr__(self, "components", tuple(float(c) for c in components))

    @property
    def dimension(self) -> int:
        return len(self.components)

    @classmethod
    def basis(cls, i: int, n: int) -> "TangentVector":
        return cls(1.0 if j == i else 0.0 for j in range(n))


@dataclass(frozen=True, eq=False)
class DifferentialForm:
    """A k-form on R^n.

    Attributes:
        degree: k.
        dimension: n.
        terms: sorted ``(multi_index, coefficient)`` pairs, no zero entries.
        variables: coordinate names, used for display and parsing.
    """

    degree: int
    dimension: int
    terms: tuple[tuple[MultiIndex, Expr], ...]
    variables: tuple[str, ...]

    @property
    def coefficients(self) -> dict[MultiIndex, Expr]:
        return dict(self.terms)

    def coefficient(self, index: Iterable[int]) -> Expr:
        """Coefficient of the basis element ``index`` (any order, sign applied)."""
        sign, idx = canonical_index(index)
        c = self.coefficients.get(idx, ZERO)
        if sign == 0:
            return ZERO
        return c if sign > 0 else simplify(-c)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        return (self.degree, self.dimension, self.terms) == (
            other.degree, other.dimension, other.terms)

    def __hash__(self):
        return hash((self.degree, self.dimension, self.terms))

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(-1.0, other))

    def __neg__(self):
        return scale(-1.0, self)

    def __rmul__(self, c):
        return scale(c, self)

    def __xor__(self, other):
        return wedge(self, other)

    def __str__(self):
        return form_to_text(self)

    def __repr__(self):
        return f"DifferentialForm({self.degree}, {self.dimension}, {form_to_text(self)!r})"


def _build(k: int, n: int, table: Mapping[MultiIndex, Expr],
           variables: Sequence[str]) -> DifferentialForm:
    terms = []
    for idx in sorted(table):
        c = simplify(table[idx])
        if isinstance(c, Const) and c.value == 0:
            continue
        terms.append((idx, c))
    return DifferentialForm(k, n, tuple(terms), tuple(variables))


def _check_variables(n, variables):
    variables = tuple(variables) if variables is not None else default_variables(n)
    if len(variables) != n:
        raise DimensionError(f"{len(variables)} variable names for dimension {n}")
    return variables


def make_form(k: int, n: int, entries: Iterable[tuple[Iterable[int], object]] = (),
              variables: Sequence[str] | None = None) -> DifferentialForm:
    """Build a k-form on R^n from ``(index, coefficient)`` pairs.

    Coefficients may be Expr, numbers or expression text.  Unsorted
    indices are sorted with the permutation sign applied; duplicate
    indices are summed.  For ``k > n`` the result is the zero form.

    >>> str(make_form(1, 3, [((0,), "2"), ((1,), "3")]))
    '{2} dx + {3} dy'
    """
    if k < 0 or n < 1:
        raise DimensionError(f"invalid degree {k} or dimension {n}")
    variables = _check_variables(n, variables)
    table: dict[MultiIndex, Expr] = {}
    for index, coeff in entries:
        index = tuple(index)
        if len(index) != k:
            raise DimensionError(f"index {index} does not have degree {k}")
        if any(not 0 <= i < n for i in index):
            raise DimensionError(f"index {index} out of range for dimension {n}")
        if k > n:
            continue
        sign, idx = canonical_index(index)
        if sign == 0:
            continue
        c = as_expr(coeff, variables)
        if sign < 0:
            c = -c
        table[idx] = table[idx] + c if idx in table else c
    return _build(k, n, table, variables)


def zero_form(k: int, n: int, variables: Sequence[str] | None = None) -> DifferentialForm:
    return DifferentialForm(k, n, (), _check_variables(n, variables))


def scalar_form(f, n: int, variables: Sequence[str] | None = None) -> DifferentialForm:
    """The 0-form (function) ``f`` on R^n."""
    return make_form(0, n, [((), f)], variables)


def basis_form(index: Sequence[int], n: int,
               variables: Sequence[str] | None = None) -> DifferentialForm:
    """The elementary form ``dx^{i1} ^ ... ^ dx^{ik}``."""
    return make_form(len(index), n, [(tuple(index), ONE)], variables)


def _det(rows: Sequence[Sequence[float]]) -> float:
    # cofactor expansion along the first row; k is at most the dimension
    k = len(rows)
    if k == 1:
        return rows[0][0]
    if k == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = 0.0
    for j in range(k):
        if rows[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in rows[1:]]
        total += (-1) ** j * rows[0][j] * _det(minor)
    return total


def pair(form: DifferentialForm, p, vectors: Sequence) -> float:
    """Evaluate ``form`` at point ``p`` on ``k`` tangent vectors.

    Each basis element contributes its coefficient times the determinant of
    the k x k matrix of vector components restricted to the index rows; for
    a 1-form this is the sum of coefficient_i * component_i.
    """
    n, k = form.dimension, form.degree
    point = p if isinstance(p, Point) else Point(p)
    if point.dimension != n:
        raise DimensionError(f"point of dimension {point.dimension} for a form on R^{n}")
    vecs = [v.components if isinstance(v, TangentVector) else tuple(map(float, v))
            for v in vectors]
    if len(vecs) != k:
        raise DimensionError(f"a {k}-form takes {k} vectors, got {len(vecs)}")
    if any(len(v) != n for v in vecs):
        raise DimensionError(f"tangent vectors must have {n} components")
    if k == 0:
        return eval_scalar(form.coefficient(()), point)
    # sorting the vectors first makes a swap of two arguments negate the
    # result exactly, instead of up to rounding in the determinant
    order = sorted(range(k), key=lambda j: vecs[j])
    if any(vecs[a] == vecs[b] for a, b in zip(order, order[1:])):
        return 0.0
    sign = permutation_sign(order)
    vecs = [vecs[j] for j in order]
    total = 0.0
    for idx, c in form.terms:
        minor = [[vecs[j][i] for j in range(k)] for i in idx]
        total += eval_scalar(c, point) * _det(minor)
    return sign * total


def _check_same_space(a: DifferentialForm, b: DifferentialForm):
    if a.dimension != b.dimension:
        raise DimensionError(
            f"forms live on R^{a.dimension} and R^{b.dimension}")


def add(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    _check_same_space(a, b)
    if a.degree != b.degree:
        raise DimensionError(f"cannot add a {a.degree}-form and a {b.degree}-form")
    table = dict(a.terms)
    for idx, c in b.terms:
        table[idx] = table[idx] + c if idx in table else c
    return _build(a.degree, a.dimension, table, a.variables)


def scale(c, a: DifferentialForm) -> DifferentialForm:
    """Multiply every coefficient of ``a`` by the function ``c``."""
    c = as_expr(c, a.variables)
    return _build(a.degree, a.dimension, {idx: c * e for idx, e in a.terms}, a.variables)


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    """Exterior product of a k-form and an l-form."""
    _check_same_space(a, b)
    k, n = a.degree + b.degree, a.dimension
    table: dict[MultiIndex, Expr] = {}
    if k <= n:
        for i, ca in a.terms:
            for j, cb in b.terms:
                sign, idx = canonical_index(i + j)
                if sign == 0:
                    continue
                term = ca * cb if sign > 0 else -(ca * cb)
                table[idx] = table[idx] + term if idx in table else term
    return _build(k, n, table, a.variables)


def forms_equal(a: DifferentialForm, b: DifferentialForm,
                rng: np.random.Generator | None = None, points: int = 100,
                tol: float = 1e-10) -> bool:
    """Equality of canonical tables, falling back to random-point sampling
    of the coefficient differences."""
    if (a.degree, a.dimension) != (b.degree, b.dimension):
        return False
    if a == b:
        return True
    diff = add(a, scale(-1.0, b))
    return all(is_zero(c, a.dimension, rng, points, tol) for _, c in diff.terms)


# ---------------------------------------------------------------------------
# text and JSON encodings

def _display_terms(form: DifferentialForm):
    """Terms in display order; 2-forms on R^3 use dy^dz, dz^dx, dx^dy."""
    if form.dimension == 3 and form.degree == 2:
        coeffs = form.coefficients
        out = []
        for shown, stored, sign in (((1, 2), (1, 2), 1), ((2, 0), (0, 2), -1),
                                    ((0, 1), (0, 1), 1)):
            if stored in coeffs:
                c = coeffs[stored]
                out.append((shown, c if sign > 0 else simplify(-c)))
        return out
    return list(form.terms)


def form_to_text(form: DifferentialForm) -> str:
    """Render as ``{coeff} dx^dy + {coeff} dz^dx``; 0-forms as bare expressions."""
    names = form.variables
    if form.degree == 0:
        return to_text(form.coefficient(()), names)
    if form.is_zero:
        return "0"
    parts = []
    for idx, c in _display_terms(form):
        basis = "^".join("d" + names[i] for i in idx)
        parts.append(f"{{{to_text(c, names)}}} {basis}")
    return " + ".join(parts)


def _split_top_level(text: str, start: int = 0):
    """Yield ``(sign, chunk, offset)`` for brace-delimited terms."""
    i, n = start, len(text)
    while i < n:
        while i < n and text[i].isspace():
            i += 1
        if i >= n:
            break
        sign = 1
        while i < n and text[i] in "+-":
            if text[i] == "-":
                sign = -sign
            i += 1
            while i < n and text[i].isspace():
                i += 1
        if i >= n or text[i] != "{":
            raise ParseError("expected a braced coefficient", text,
                             len(text[:i].encode()), {"'{'"})
        close = text.find("}", i)
        if close < 0:
            raise ParseError("unterminated coefficient", text,
                             len(text[:i].encode()), {"'}'"})
        j = close + 1
        while j < n and text[j] not in "+-{":
            j += 1
        yield sign, text[i + 1:close], i + 1, text[close + 1:j], close + 1
        i = j


_BASIS_WORD = re.compile(r"\s*d([^\W\d]\w*)\s*")


def _parse_basis(word: str, variables: Sequence[str], text: str, offset: int) -> MultiIndex:
    word_stripped = word.strip()
    if not word_stripped:
        return ()
    index = []
    for piece in word.split("^"):
        m = _BASIS_WORD.fullmatch(piece)
        if m is None or m.group(1) not in variables:
            raise ParseError(f"bad basis element {piece.strip()!r}", text,
                             len(text[:offset].encode()),
                             {"d" + v for v in variables})
        index.append(variables.index(m.group(1)))
        offset += len(piece) + 1
    return tuple(index)


def parse_form(text: str, n: int | None = None, variables: Sequence[str] | None = None,
               degree: int | None = None) -> DifferentialForm:
    """Parse the canonical form syntax, e.g. ``"{x^2+y} dx^dy + {1} dz^dx"``.

    Text without braces is a 0-form.  ``"0"`` denotes the zero form of the
    requested ``degree``.
    """
    if variables is None:
        if n is None:
            raise ValueError("need a dimension or variable names")
        variables = default_variables(n)
    variables = tuple(variables)
    n = len(variables)
    if "{" not in text:
        e = parse_scalar(text, variables)
        if degree not in (None, 0):
            if isinstance(simplify(e), Const) and simplify(e).value == 0:
                return zero_form(degree, n, variables)
            raise ParseError(f"expected a {degree}-form", text, 0, {"'{'"})
        return scalar_form(e, n, variables)
    entries = []
    for sign, coeff_text, coeff_off, basis, basis_off in _split_top_level(text):
        try:
            c = parse_scalar(coeff_text, variables)
        except ParseError as exc:
            raise exc.relocate(text, len(text[:coeff_off].encode()))
        entries.append((_parse_basis(basis, variables, text, basis_off), c if sign > 0 else -c))
    degrees = {len(idx) for idx, _ in entries}
    if len(degrees) != 1:
        raise ParseError("terms of mixed degree", text, 0)
    k = degrees.pop()
    if degree is not None and k != degree:
        raise DimensionError(f"expected a {degree}-form, got a {k}-form")
    return make_form(k, n, entries, variables)


def form_to_json(form: DifferentialForm) -> dict:
    return {
        "degree": form.degree,
        "dimension": form.dimension,
        "variables": list(form.variables),
        "terms": [{"index": list(idx), "coeff": to_text(c, form.variables)}
                  for idx, c in form.terms],
    }


def form_from_json(data) -> DifferentialForm:
    if isinstance(data, str):
        data = json.loads(data)
    n = int(data["dimension"])
    variables = data.get("variables") or default_variables(n)
    return make_form(int(data["degree"]), n,
                     [(tuple(t["index"]), str(t["coeff"])) for t in data.get("terms", [])],
                     variables)
