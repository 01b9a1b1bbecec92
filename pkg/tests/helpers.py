"""Numerical oracles shared by the tests.  None of these go through
simplify, so they check the symbolic code paths independently."""

import itertools
import math

import numpy as np

from extcalc.errors import DomainError
from extcalc.expr import eval_scalar


def central_difference(e, point, i, h=1e-5):
    p_plus = list(point)
    p_minus = list(point)
    p_plus[i] += h
    p_minus[i] -= h
    return (eval_scalar(e, p_plus) - eval_scalar(e, p_minus)) / (2 * h)


def perm_sign(perm):
    sign = 1
    for a, b in itertools.combinations(perm, 2):
        if a > b:
            sign = -sign
    return sign


def alternating_pair(form, point, vectors):
    """Pairing from the definition: sum over basis elements of
    coefficient * sum_sigma sgn(sigma) prod_j v_{sigma(j)}[i_j]."""
    k = form.degree
    total = 0.0
    for idx, c in form.terms:
        s = 0.0
        for perm in itertools.permutations(range(k)):
            s += perm_sign(perm) * math.prod(vectors[perm[j]][idx[j]] for j in range(k))
        total += eval_scalar(c, point) * s
    return total


def shuffles(k, l):
    """(k, l)-shuffles as permutations of range(k + l)."""
    for first in itertools.combinations(range(k + l), k):
        rest = [i for i in range(k + l) if i not in first]
        yield tuple(first) + tuple(rest)


def coefficient_gap(a, b, rng, points=100, low=-1.0, high=1.0):
    """Largest coefficient difference of two forms at random points."""
    assert (a.degree, a.dimension) == (b.degree, b.dimension)
    ca, cb = a.coefficients, b.coefficients
    worst = 0.0
    for q in rng.uniform(low, high, size=(points, a.dimension)):
        for idx in set(ca) | set(cb):
            try:
                va = eval_scalar(ca[idx], q) if idx in ca else 0.0
                vb = eval_scalar(cb[idx], q) if idx in cb else 0.0
            except DomainError:
                continue
            worst = max(worst, abs(va - vb))
    return worst


def random_unit_vectors(rng, k, n):
    return [rng.normal(size=n) for _ in range(k)]


def np_det(rows):
    return float(np.linalg.det(np.asarray(rows, dtype=float)))
