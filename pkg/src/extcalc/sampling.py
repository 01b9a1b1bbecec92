"""Random expressions, forms, maps and fields for property checks.

All generators take a ``numpy.random.Generator`` so every battery is
reproducible from a seed.
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .calculus import VectorFieldProxy
from .expr import ONE, Const, Expr, Func, Pow, Var
from .forms import DifferentialForm, default_variables, make_form
from .maps import SmoothMap

__all__ = [
    "random_constant", "random_polynomial", "random_trig", "random_coefficient",
    "random_smooth_expr", "random_form", "random_polynomial_map", "random_field",
    "random_point", "random_vectors",
]


def random_constant(rng: np.random.Generator, low=-2.0, high=2.0) -> Const:
    # two decimals keep printed forms readable
    return Const(round(float(rng.uniform(low, high)), 2) or 1.0)


def _var(i: int, names: Sequence[str] | None) -> Var:
    return Var(i, names[i] if names else "")


def random_monomial(rng, n, max_degree, names=None) -> Expr:
    degree = int(rng.integers(0, max_degree + 1))
    powers = [0] * n
    for _ in range(degree):
        powers[int(rng.integers(n))] += 1
    term: Expr = random_constant(rng)
    for i, p in enumerate(powers):
        if p:
            term = term * (_var(i, names) if p == 1 else Pow(_var(i, names), p))
    return term


def random_polynomial(rng: np.random.Generator, n: int, max_degree: int = 3,
                      terms: int = 3, names: Sequence[str] | None = None) -> Expr:
    """Sum of ``terms`` random monomials of total degree <= ``max_degree``."""
    out = random_monomial(rng, n, max_degree, names)
    for _ in range(terms - 1):
        out = out + random_monomial(rng, n, max_degree, names)
    return out


def random_trig(rng: np.random.Generator, n: int, names=None) -> Expr:
    """A polynomial times sin/cos/exp of a linear polynomial."""
    inner = random_polynomial(rng, n, 1, 2, names)
    f = ("sin", "cos", "exp")[int(rng.integers(3))]
    return random_polynomial(rng, n, 2, 2, names) * Func(f, inner)


def random_coefficient(rng: np.random.Generator, n: int, kind: str = "mixed",
                       names=None) -> Expr:
    """``kind`` is ``"poly"``, ``"trig"`` or ``"mixed"`` (either, at random)."""
    if kind == "mixed":
        kind = "poly" if rng.random() < 0.5 else "trig"
    if kind == "poly":
        return random_polynomial(rng, n, 3, 3, names)
    if kind == "trig":
        return random_trig(rng, n, names)
    raise ValueError(f"unknown coefficient kind {kind!r}")


def random_smooth_expr(rng: np.random.Generator, n: int, depth: int = 6,
                       names=None) -> Expr:
    """Random tree of the given maximum depth using every node type.

    Quotients and square roots are only generated with arguments of the
    form ``1 + u^2``, so the expression is smooth on all of R^n.
    """
    if depth <= 1 or rng.random() < 0.15:
        if rng.random() < 0.7:
            return _var(int(rng.integers(n)), names)
        return random_constant(rng)
    sub = lambda: random_smooth_expr(rng, n, depth - 1, names)  # noqa: E731
    choice = int(rng.integers(10))
    if choice == 0:
        return sub() + sub()
    if choice == 1:
        return sub() - sub()
    if choice == 2:
        return sub() * sub()
    if choice == 3:
        return sub() / (ONE + Pow(sub(), 2))
    if choice == 4:
        return -sub()
    if choice == 5:
        return Pow(sub(), int(rng.integers(2, 4)))
    if choice == 6:
        return Func("sqrt", ONE + Pow(sub(), 2))
    return Func(("sin", "cos", "exp")[choice - 7], sub())


def random_form(rng: np.random.Generator, k: int, n: int, kind: str = "mixed",
                density: float = 1.0, variables: Sequence[str] | None = None
                ) -> DifferentialForm:
    """Random k-form; each basis element gets a coefficient with probability ``density``."""
    variables = tuple(variables) if variables is not None else default_variables(n)
    entries = []
    for idx in itertools.combinations(range(n), k):
        if rng.random() <= density:
            entries.append((idx, random_coefficient(rng, n, kind, variables)))
    return make_form(k, n, entries, variables)


def random_polynomial_map(rng: np.random.Generator, m: int, n: int, max_degree: int = 2,
                          domain_vars: Sequence[str] | None = None,
                          near_identity: bool = False) -> SmoothMap:
    """Polynomial map R^m -> R^n.  With ``near_identity`` the first m
    components are u_i + small polynomial perturbations."""
    names = tuple(domain_vars) if domain_vars is not None else \
        (("t",) if m == 1 else ("u", "v", "w")[:m] if m <= 3 else tuple(f"u{i}" for i in range(m)))
    comps = []
    for i in range(n):
        c = random_polynomial(rng, m, max_degree, 3, names)
        if near_identity and i < m:
            c = _var(i, names) + Const(0.1) * c
        comps.append(c)
    return SmoothMap(names, comps)


def random_field(rng: np.random.Generator, kind: str = "mixed") -> VectorFieldProxy:
    names = default_variables(3)
    return VectorFieldProxy([random_coefficient(rng, 3, kind, names) for _ in range(3)], names)


def random_point(rng: np.random.Generator, n: int, low=-1.0, high=1.0) -> np.ndarray:
    return rng.uniform(low, high, size=n)


def random_vectors(rng: np.random.Generator, k: int, n: int) -> list[np.ndarray]:
    return [rng.normal(size=n) for _ in range(k)]
