"""Scalar expression trees over named coordinates.

Expressions are immutable ASTs built from constants, coordinate variables,
the four rational operations, negation, integer powers and the functions
``sin``, ``cos``, ``exp`` and ``sqrt``.  They serve as the coefficient
functions of differential forms and as the components of smooth maps, so
the derivative has to be exact and symbolic.

Text grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := atom ('^' ['-'] integer)?
    atom   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' atom
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError, ParseError, UnknownIdentifierError

FUNCTIONS = ("sin", "cos", "exp", "sqrt")

__all__ = [
    "Expr", "Const", "Var", "Neg", "Add", "Sub", "Mul", "Div", "Pow", "Func",
    "Point", "FUNCTIONS", "ZERO", "ONE",
    "parse_scalar", "to_text", "eval_scalar", "eval_array", "differentiate",
    "simplify", "substitute", "free_indices", "as_expr", "is_zero",
]


class Expr:
    """Base class of all expression nodes.

    Arithmetic operators build new nodes without simplifying, so
    ``x + 0`` stays a sum until :func:`simplify` is applied.
    """

    __slots__ = ()

    def __add__(self, other):
        return Add(self, _coerce(other))

    def __radd__(self, other):
        return Add(_coerce(other), self)

    def __sub__(self, other):
        return Sub(self, _coerce(other))

    def __rsub__(self, other):
        return Sub(_coerce(other), self)

    def __mul__(self, other):
        return Mul(self, _coerce(other))

    def __rmul__(self, other):
        return Mul(_coerce(other), self)

    def __truediv__(self, other):
        return Div(self, _coerce(other))

    def __rtruediv__(self, other):
        return Div(_coerce(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer exponents are supported")
        return Pow(self, n)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, repr=False)
class Const(Expr):
    """A real constant.  ``exact`` optionally carries the rational value the
    float was rounded from, so simplification can keep cancelling exactly."""

    value: float
    exact: Fraction | None = field(default=None, compare=False)

    def __repr__(self):
        return f"Const({self.value!r})"

    @property
    def rational(self) -> Fraction:
        return self.exact if self.exact is not None else Fraction(self.value)


def _exact_const(q: Fraction) -> Const:
    return Const(float(q), q)


@dataclass(frozen=True, repr=False)
class Var(Expr):
    """Coordinate ``index`` of the ambient space.  Identity is the index;
    the name is only used for display."""

    index: int
    name: str = field(default="", compare=False)

    def __repr__(self):
        return f"Var({self.index}, {self.name!r})"


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ValueError(f"unsupported function {self.name!r}")


ZERO = Const(0.0)
ONE = Const(1.0)


@dataclass(frozen=True)
class Point:
    """A point of R^n given by its coordinates."""

    coords: tuple[float, ...]

    def __init__(self, coords):
        object.__setattr__(self, "coords", tuple(float(c) for c in coords))

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)


def _coerce(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float, Fraction)):
        return Const(float(value))
    return NotImplemented


def as_expr(value, variables: Sequence[str] | None = None) -> Expr:
    """Coerce a number, expression text or Expr into an Expr."""
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        if variables is None:
            raise ValueError("variable names are required to parse expression text")
        return parse_scalar(value, variables)
    if isinstance(value, (int, float, Fraction)) and not isinstance(value, bool):
        return Const(float(value))
    raise TypeError(f"cannot convert {type(value).__name__} to an expression")


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[^\W\d]\w*)"
    r"|(?P<op>[-+*/^(),])"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", source,
                             _byte_offset(source, pos))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


def _byte_offset(source: str, pos: int) -> int:
    return len(source[:pos].encode("utf-8"))


_ATOM_START = frozenset({"number", "identifier", "'('", "'-'"})


class _Parser:
    def __init__(self, source: str, variables: Sequence[str]):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0
        self.names = {name: k for k, name in enumerate(variables)}

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected, message=None):
        tok = self.peek()
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ParseError(message or f"unexpected {found}", self.source,
                         _byte_offset(self.source, tok.pos), expected)

    def expect_op(self, op):
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            self.fail({f"'{op}'"})
        return self.advance()

    def is_op(self, *ops):
        tok = self.peek()
        return tok.kind == "op" and tok.text in ops

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek().kind != "end":
            self.fail({"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"})
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.is_op("+", "-"):
            op = self.advance().text
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.is_op("*", "/"):
            op = self.advance().text
            rhs = self.factor()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def factor(self) -> Expr:
        base = self.atom()
        if self.is_op("^"):
            self.advance()
            sign = 1
            if self.is_op("-"):
                self.advance()
                sign = -1
            tok = self.peek()
            if tok.kind != "number" or not tok.text.isdigit():
                self.fail({"integer"})
            self.advance()
            return Pow(base, sign * int(tok.text))
        return base

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return Const(float(tok.text))
        if tok.kind == "ident":
            self.advance()
            if tok.text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Func(tok.text, arg)
            if tok.text not in self.names:
                raise UnknownIdentifierError(tok.text, self.source,
                                             _byte_offset(self.source, tok.pos))
            return Var(self.names[tok.text], tok.text)
        if self.is_op("("):
            self.advance()
            e = self.expr()
            self.expect_op(")")
            return e
        if self.is_op("-"):
            self.advance()
            inner = self.atom()
            if isinstance(inner, Const):
                return Const(-inner.value)
            return Neg(inner)
        self.fail(_ATOM_START)


def parse_scalar(source: str, variables: Sequence[str]) -> Expr:
    """Parse expression text whose identifiers are drawn from ``variables``.

    Args:
        source: expression text, e.g. ``"sin(theta)*cos(phi)"``.
        variables: ordered coordinate names; position gives the Var index.

    Raises:
        ParseError: on a syntax error (carries byte offset and expected set).
        UnknownIdentifierError: on an identifier outside ``variables``.
    """
    variables = list(variables)
    if not variables:
        raise ValueError("at least one variable name is required")
    if len(set(variables)) != len(variables):
        raise ValueError(f"duplicate variable names in {variables}")
    for name in variables:
        if name in FUNCTIONS or not re.fullmatch(r"[^\W\d]\w*", name):
            raise ValueError(f"invalid variable name {name!r}")
    return _Parser(source, variables).parse()


# ---------------------------------------------------------------------------
# printing

_PREC_SUM, _PREC_PROD, _PREC_ATOM = 1, 2, 4


def _prec(e: Expr) -> int:
    if isinstance(e, (Add, Sub)):
        return _PREC_SUM
    if isinstance(e, (Mul, Div)):
        return _PREC_PROD
    if isinstance(e, Pow):
        return 3
    return _PREC_ATOM


def _fmt_number(v: float) -> str:
    if math.isfinite(v) and v == int(v) and abs(v) < 1e16:
        return "-0" if math.copysign(1.0, v) < 0 and v == 0 else str(int(v))
    return repr(v)


def to_text(e: Expr, names: Sequence[str] | None = None) -> str:
    """Render ``e`` in the grammar accepted by :func:`parse_scalar`.

    ``names`` overrides the display names of variables by index.
    """

    def wrap(child, min_prec):
        s = go(child)
        return f"({s})" if _prec(child) < min_prec else s

    def go(node):
        match node:
            case Const(value=v):
                return _fmt_number(v)
            case Var(index=i, name=name):
                if names is not None and i < len(names):
                    return names[i]
                return name or f"x{i}"
            case Neg(arg=a):
                if isinstance(a, Const) and math.copysign(1.0, a.value) < 0:
                    return f"-({go(a)})"
                return "-" + wrap(a, _PREC_ATOM)
            case Add(left=l, right=r):
                return f"{wrap(l, _PREC_SUM)} + {wrap(r, _PREC_SUM + 1)}"
            case Sub(left=l, right=r):
                return f"{wrap(l, _PREC_SUM)} - {wrap(r, _PREC_SUM + 1)}"
            case Mul(left=l, right=r):
                return f"{wrap(l, _PREC_PROD)}*{wrap(r, _PREC_PROD + 1)}"
            case Div(left=l, right=r):
                return f"{wrap(l, _PREC_PROD)}/{wrap(r, _PREC_PROD + 1)}"
            case Pow(base=b, exponent=n):
                s = go(b)
                bare = isinstance(b, (Var, Func)) or (isinstance(b, Const) and math.copysign(1.0, b.value) > 0)
                return f"{s if bare else '(' + s + ')'}^{n}"
            case Func(name=f, arg=a):
                return f"{f}({go(a)})"
        raise TypeError(f"not an expression: {node!r}")

    return go(e)


# ---------------------------------------------------------------------------
# evaluation

def eval_scalar(e: Expr, p) -> float:
    """Evaluate ``e`` at point ``p`` (a :class:`Point` or coordinate sequence).

    Raises:
        DomainError: division by zero, sqrt of a negative number, overflow.
        DimensionError: ``p`` has fewer coordinates than ``e`` references.
    """
    coords = p.coords if isinstance(p, Point) else tuple(float(c) for c in p)
    try:
        return float(_eval(e, coords))
    except OverflowError as exc:
        raise DomainError(f"overflow while evaluating {to_text(e)}") from exc


def _eval(e, x):
    match e:
        case Const(value=v):
            return v
        case Var(index=i):
            if i >= len(x):
                raise DimensionError(f"variable index {i} outside a {len(x)}-dimensional point")
            return x[i]
        case Neg(arg=a):
            return -_eval(a, x)
        case Add(left=l, right=r):
            return _eval(l, x) + _eval(r, x)
        case Sub(left=l, right=r):
            return _eval(l, x) - _eval(r, x)
        case Mul(left=l, right=r):
            return _eval(l, x) * _eval(r, x)
        case Div(left=l, right=r):
            den = _eval(r, x)
            if den == 0:
                raise DomainError("division by zero")
            return _eval(l, x) / den
        case Pow(base=b, exponent=n):
            v = _eval(b, x)
            if v == 0 and n < 0:
                raise DomainError("zero raised to a negative power")
            return v ** n
        case Func(name=f, arg=a):
            v = _eval(a, x)
            if f == "sin":
                return math.sin(v)
            if f == "cos":
                return math.cos(v)
            if f == "exp":
                return math.exp(v)
            if v < 0:
                raise DomainError("sqrt of a negative number")
            return math.sqrt(v)
    raise TypeError(f"not an expression: {e!r}")


_NP_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt}


def eval_array(e: Expr, coords: Sequence[np.ndarray]) -> np.ndarray:
    """Vectorised evaluation: ``coords[i]`` holds the values of coordinate i.

    The result is broadcast to the common shape of ``coords``.
    """
    coords = [np.asarray(c, dtype=float) for c in coords]
    shape = np.broadcast_shapes(*(c.shape for c in coords)) if coords else ()
    with np.errstate(all="ignore"):
        out = _eval_np(e, coords)
    out = np.broadcast_to(np.asarray(out, dtype=float), shape)
    if not np.all(np.isfinite(out)):
        raise DomainError(f"non-finite value while evaluating {to_text(e)}")
    return out


def _eval_np(e, x):
    match e:
        case Const(value=v):
            return v
        case Var(index=i):
            if i >= len(x):
                raise DimensionError(f"variable index {i} outside {len(x)} coordinates")
            return x[i]
        case Neg(arg=a):
            return -_eval_np(a, x)
        case Add(left=l, right=r):
            return _eval_np(l, x) + _eval_np(r, x)
        case Sub(left=l, right=r):
            return _eval_np(l, x) - _eval_np(r, x)
        case Mul(left=l, right=r):
            return _eval_np(l, x) * _eval_np(r, x)
        case Div(left=l, right=r):
            den = _eval_np(r, x)
            if np.any(np.asarray(den) == 0):
                raise DomainError("division by zero")
            return _eval_np(l, x) / den
        case Pow(base=b, exponent=n):
            v = np.asarray(_eval_np(b, x), dtype=float)
            if n < 0:
                if np.any(v == 0):
                    raise DomainError("zero raised to a negative power")
                return 1.0 / v ** (-n)
            return v ** n
        case Func(name=f, arg=a):
            v = _eval_np(a, x)
            if f == "sqrt" and np.any(np.asarray(v) < 0):
                raise DomainError("sqrt of a negative number")
            return _NP_FUNCS[f](v)
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# structural helpers

def free_indices(e: Expr) -> set[int]:
    """Indices of all variables occurring in ``e``."""
    match e:
        case Var(index=i):
            return {i}
        case Const():
            return set()
        case Neg(arg=a) | Func(arg=a) | Pow(base=a):
            return free_indices(a)
        case Add(left=l, right=r) | Sub(left=l, right=r) | Mul(left=l, right=r) | Div(left=l, right=r):
            return free_indices(l) | free_indices(r)
    raise TypeError(f"not an expression: {e!r}")


def substitute(e: Expr, replacements: Sequence[Expr]) -> Expr:
    """Replace every ``Var(i)`` by ``replacements[i]``."""
    match e:
        case Var(index=i):
            if i >= len(replacements):
                raise DimensionError(f"no replacement for variable index {i}")
            return replacements[i]
        case Const():
            return e
        case Neg(arg=a):
            return Neg(substitute(a, replacements))
        case Func(name=f, arg=a):
            return Func(f, substitute(a, replacements))
        case Pow(base=b, exponent=n):
            return Pow(substitute(b, replacements), n)
        case Add(left=l, right=r):
            return Add(substitute(l, replacements), substitute(r, replacements))
        case Sub(left=l, right=r):
            return Sub(substitute(l, replacements), substitute(r, replacements))
        case Mul(left=l, right=r):
            return Mul(substitute(l, replacements), substitute(r, replacements))
        case Div(left=l, right=r):
            return Div(substitute(l, replacements), substitute(r, replacements))
    raise TypeError(f"not an expression: {e!r}")


# smart constructors: fold constants and the 0/1 identities, nothing more

def _is_const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


def _add(a, b):
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if _is_const(a) and _is_const(b):
        return _exact_const(a.rational + b.rational)
    return Add(a, b)


def _sub(a, b):
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return _neg(b)
    if _is_const(a) and _is_const(b):
        return _exact_const(a.rational - b.rational)
    if a == b:
        return ZERO
    return Sub(a, b)


def _neg(a):
    if _is_const(a):
        return Const(-a.value, None if a.exact is None else -a.exact)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _mul(a, b):
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b):
        return _exact_const(a.rational * b.rational)
    if _is_const(a, -1.0):
        return _neg(b)
    if _is_const(b, -1.0):
        return _neg(a)
    return Mul(a, b)


def _div(a, b):
    if _is_const(a, 0.0) and not _is_const(b, 0.0):
        return ZERO
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b) and b.value != 0:
        return _exact_const(a.rational / b.rational)
    return Div(a, b)


def _pow(b, n):
    if n == 0:
        return ONE
    if n == 1:
        return b
    if _is_const(b) and not (b.value == 0 and n < 0) and abs(n) <= 64:
        try:
            return _exact_const(b.rational ** n)
        except OverflowError:
            return Pow(b, n)
    return Pow(b, n)


def _func(name, a):
    if _is_const(a):
        v = a.value
        if name == "sqrt" and v < 0:
            return Func(name, a)
        try:
            return Const(float({"sin": math.sin, "cos": math.cos,
                                "exp": math.exp, "sqrt": math.sqrt}[name](v)))
        except OverflowError:
            return Func(name, a)
    return Func(name, a)


# ---------------------------------------------------------------------------
# differentiation

def differentiate(e: Expr, var: int) -> Expr:
    """Exact partial derivative of ``e`` with respect to coordinate ``var``."""
    match e:
        case Const():
            return ZERO
        case Var(index=i):
            return ONE if i == var else ZERO
        case Neg(arg=a):
            return _neg(differentiate(a, var))
        case Add(left=l, right=r):
            return _add(differentiate(l, var), differentiate(r, var))
        case Sub(left=l, right=r):
            return _sub(differentiate(l, var), differentiate(r, var))
        case Mul(left=l, right=r):
            return _add(_mul(differentiate(l, var), r), _mul(l, differentiate(r, var)))
        case Div(left=l, right=r):
            dl, dr = differentiate(l, var), differentiate(r, var)
            if _is_const(dr, 0.0):
                return _div(dl, r)
            return _div(_sub(_mul(dl, r), _mul(l, dr)), _pow(r, 2))
        case Pow(base=b, exponent=n):
            db = differentiate(b, var)
            return _mul(_mul(Const(float(n)), _pow(b, n - 1)), db)
        case Func(name=f, arg=a):
            da = differentiate(a, var)
            if _is_const(da, 0.0):
                return ZERO
            if f == "sin":
                outer = _func("cos", a)
            elif f == "cos":
                outer = _neg(_func("sin", a))
            elif f == "exp":
                outer = _func("exp", a)
            else:
                return _div(da, _mul(Const(2.0), _func("sqrt", a)))
            return _mul(outer, da)
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# simplification
#
# The normal form is a Laurent polynomial with exact rational coefficients
# over "atoms": variables, function applications with normalised arguments,
# and normalised multi-term sums that occur as denominators.  Two expressions
# that differ only by ring axioms map to the same polynomial, which makes the
# mixed partials produced by d(d a) cancel symbolically.

_MAX_TERMS = 4000
_MAX_EXPAND_POWER = 12


class _TooBig(Exception):
    pass


@lru_cache(maxsize=65536)
def _atom_key(atom):
    if isinstance(atom, Var):
        return (0, atom.index, "")
    if isinstance(atom, Func):
        return (1, 0, to_text(atom))
    return (2, 0, to_text(atom))


def _mono(items):
    return tuple(sorted(((a, n) for a, n in items if n != 0),
                        key=lambda an: _atom_key(an[0])))


def _mono_mul(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    acc = dict(m1)
    for a, n in m2:
        acc[a] = acc.get(a, 0) + n
    return _mono(acc.items())


def _mono_pow(m, n):
    return _mono((a, k * n) for a, k in m)


def _padd(p, q, sign=1):
    out = dict(p)
    for m, c in q.items():
        v = out.get(m, 0) + sign * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def _pmul(p, q):
    if len(p) * len(q) > _MAX_TERMS:
        raise _TooBig
    out = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = _mono_mul(m1, m2)
            v = out.get(m, 0) + c1 * c2
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def _pconst(p):
    """The constant value of ``p`` if it has no non-constant terms, else None."""
    if not p:
        return Fraction(0)
    if len(p) == 1 and () in p:
        return p[()]
    return None


def _fraction(v: float) -> Fraction:
    if not math.isfinite(v):
        raise _TooBig
    return Fraction(v)


def _to_poly(e):
    match e:
        case Const(value=v):
            if not math.isfinite(v):
                raise _TooBig
            return {(): e.rational} if v != 0 else {}
        case Var():
            return {((e, 1),): Fraction(1)}
        case Neg(arg=a):
            return {m: -c for m, c in _to_poly(a).items()}
        case Add(left=l, right=r):
            return _padd(_to_poly(l), _to_poly(r))
        case Sub(left=l, right=r):
            return _padd(_to_poly(l), _to_poly(r), -1)
        case Mul(left=l, right=r):
            return _pmul(_to_poly(l), _to_poly(r))
        case Div(left=l, right=r):
            c, m = _factor(r)
            if c == 0:
                raise _TooBig
            return _pmul(_to_poly(l), {_mono_pow(m, -1): 1 / c})
        case Pow(base=b, exponent=n):
            if n == 0:
                return {(): Fraction(1)}
            pb = _to_poly(b)
            if n > 0 and (len(pb) <= 1 or n <= _MAX_EXPAND_POWER):
                out = {(): Fraction(1)}
                for _ in range(n):
                    out = _pmul(out, pb)
                return out
            c, m = _factor(b)
            if c == 0:
                raise _TooBig
            return {_mono_pow(m, n): c ** n}
        case Func(name=f, arg=a):
            pa = _to_poly(a)
            c = _pconst(pa)
            if c is not None:
                folded = _func(f, Const(float(c)))
                if isinstance(folded, Const):
                    return {(): _fraction(folded.value)} if folded.value != 0 else {}
            return {((Func(f, _from_poly(pa)), 1),): Fraction(1)}
    raise TypeError(f"not an expression: {e!r}")


def _factor(e):
    """Write ``e`` as ``coefficient * monomial`` (multi-term sums become atoms)."""
    match e:
        case Neg(arg=a):
            c, m = _factor(a)
            return -c, m
        case Mul(left=l, right=r):
            c1, m1 = _factor(l)
            c2, m2 = _factor(r)
            return c1 * c2, _mono_mul(m1, m2)
        case Div(left=l, right=r):
            c1, m1 = _factor(l)
            c2, m2 = _factor(r)
            if c2 == 0:
                raise _TooBig
            return c1 / c2, _mono_mul(m1, _mono_pow(m2, -1))
        case Pow(base=b, exponent=n):
            c, m = _factor(b)
            if c == 0:
                if n < 0:
                    raise _TooBig
                return Fraction(0), ()
            return c ** n, _mono_pow(m, n)
    p = _to_poly(e)
    if not p:
        return Fraction(0), ()
    if len(p) == 1:
        (m, c), = p.items()
        return c, m
    lead_mono = min(p, key=_mono_sort_key)
    lead = p[lead_mono]
    atom = _from_poly({m: c / lead for m, c in p.items()})
    return lead, ((atom, 1),)


def _mono_sort_key(m):
    return (sum(abs(n) for _, n in m), tuple((_atom_key(a), n) for a, n in m))


def _atom_power(atom, n):
    return atom if n == 1 else Pow(atom, n)


def _product(factors):
    out = factors[0]
    for f in factors[1:]:
        out = Mul(out, f)
    return out


def _from_poly(p) -> Expr:
    if not p:
        return ZERO
    result = None
    for m in sorted(p, key=_mono_sort_key):
        c = p[m]
        num = [_atom_power(a, n) for a, n in m if n > 0]
        den = [_atom_power(a, -n) for a, n in m if n < 0]
        mag = abs(c)
        negative = c < 0
        if mag != 1 or not num:
            if result is None and negative:
                num.insert(0, _exact_const(-mag))
                negative = False
            else:
                num.insert(0, _exact_const(mag))
        term = _product(num)
        if den:
            term = Div(term, _product(den))
        if result is None:
            result = Neg(term) if negative else term
        else:
            result = Sub(result, term) if negative else Add(result, term)
    return result


def _local_simplify(e: Expr) -> Expr:
    match e:
        case Const() | Var():
            return e
        case Neg(arg=a):
            return _neg(_local_simplify(a))
        case Add(left=l, right=r):
            return _add(_local_simplify(l), _local_simplify(r))
        case Sub(left=l, right=r):
            return _sub(_local_simplify(l), _local_simplify(r))
        case Mul(left=l, right=r):
            return _mul(_local_simplify(l), _local_simplify(r))
        case Div(left=l, right=r):
            return _div(_local_simplify(l), _local_simplify(r))
        case Pow(base=b, exponent=n):
            return _pow(_local_simplify(b), n)
        case Func(name=f, arg=a):
            return _func(f, _local_simplify(a))
    raise TypeError(f"not an expression: {e!r}")


def simplify(e: Expr) -> Expr:
    """Semantics-preserving rewrite to a canonical sum of products.

    Performs constant folding, drops zero terms and unit factors, and
    collects like terms (so ``e - e`` becomes 0).  Expressions whose
    expansion would exceed an internal size budget, or that contain a
    literal division by zero, only get the local identities applied.
    """
    try:
        return _from_poly(_to_poly(e))
    except _TooBig:
        return _local_simplify(e)


def is_zero(e: Expr, dimension: int, rng: np.random.Generator | None = None,
            points: int = 100, tol: float = 1e-10, low: float = -1.0,
            high: float = 1.0) -> bool:
    """Decide whether ``e`` vanishes identically.

    Symbolic first (the simplifier's normal form is exactly 0); otherwise
    ``e`` is sampled at ``points`` uniform random points of the box
    ``[low, high]^dimension`` and must stay below ``tol`` in magnitude.
    Points where evaluation leaves the domain are skipped.
    """
    s = simplify(e)
    if isinstance(s, Const):
        return abs(s.value) < tol
    rng = rng if rng is not None else np.random.default_rng(0)
    pts = rng.uniform(low, high, size=(points, dimension))
    for q in pts:
        try:
            if abs(eval_scalar(s, q)) >= tol:
                return False
        except DomainError:
            continue
    return True
