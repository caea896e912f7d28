"""Exact polynomial and rational-function arithmetic over the Gaussian rationals.

Everything here is immutable.  Coefficients are :class:`GaussianRational`
values backed by ``gmpy2.mpq``; polynomials store a sorted tuple of variable
names plus a dict from exponent tuples to coefficients.  Variables that do not
occur in any term are dropped, so two equal polynomials always compare equal
structurally.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpq

__all__ = [
    "GaussianRational",
    "Polynomial",
    "RationalFunction",
    "SymbolicMatrix",
    "ParseError",
    "I",
    "as_scalar",
    "var_key",
    "differentiate",
    "determinant",
    "determinant_cofactor",
    "adjugate",
    "evaluate",
    "exact_divide",
    "parse_polynomial",
    "variables",
]

_ZERO = mpq(0)
_ONE = mpq(1)


def _q(x) -> mpq:
    if isinstance(x, type(_ZERO)):
        return x
    if isinstance(x, bool):
        return mpq(int(x))
    if isinstance(x, int):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, Rational):
        return mpq(int(x.numerator), int(x.denominator))
    if isinstance(x, str):
        return mpq(Fraction(x.strip()))
    if isinstance(x, type(gmpy2.mpz(0))):
        return mpq(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def _fmt_q(x: mpq) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class GaussianRational:
    """A number ``re + i*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            if im != 0:
                raise TypeError("complex real part with explicit imaginary part")
            self.re, self.im = re.re, re.im
            return
        self.re = _q(re)
        self.im = _q(im)

    @classmethod
    def _make(cls, re: mpq, im: mpq) -> "GaussianRational":
        obj = object.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        p = parse_polynomial(text, allowed=())
        return p.constant_value()

    def is_real(self) -> bool:
        return self.im == 0

    def conjugate(self) -> "GaussianRational":
        return GaussianRational._make(self.re, -self.im)

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __add__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational._make(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational._make(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational._make(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        if not self.im and not o.im:
            return GaussianRational._make(self.re * o.re, _ZERO)
        return GaussianRational._make(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        if not o:
            raise ZeroDivisionError("division by zero Gaussian rational")
        if not o.im:
            return GaussianRational._make(self.re / o.re, self.im / o.re)
        n = o.re * o.re + o.im * o.im
        return GaussianRational._make(
            (self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n
        )

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational._make(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return (GaussianRational._make(_ONE, _ZERO) / self) ** (-n)
        result = GaussianRational._make(_ONE, _ZERO)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash(self.re) if not self.im else hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({_fmt_q(self.re)!r}, {_fmt_q(self.im)!r})"

    def __str__(self):
        if not self.im:
            return _fmt_q(self.re)
        im = "i" if self.im == 1 else "-i" if self.im == -1 else f"{_fmt_q(self.im)}*i"
        if not self.re:
            return im
        sign = "" if im.startswith("-") else "+"
        return f"{_fmt_q(self.re)}{sign}{im}"


I = GaussianRational._make(_ZERO, _ONE)
_GR_ONE = GaussianRational._make(_ONE, _ZERO)
_GR_ZERO = GaussianRational._make(_ZERO, _ZERO)


def _coerce(x) -> GaussianRational | None:
    if isinstance(x, GaussianRational):
        return x
    try:
        return GaussianRational._make(_q(x), _ZERO)
    except TypeError:
        return None


def as_scalar(x) -> GaussianRational:
    """Convert an int, rational, string or Gaussian rational to a coefficient."""
    if isinstance(x, str):
        return GaussianRational.parse(x)
    if isinstance(x, (Polynomial, RationalFunction)):
        return x.constant_value()
    g = _coerce(x)
    if g is None:
        raise TypeError(f"not an exact scalar: {x!r}")
    return g


# --- variable ordering ------------------------------------------------------

_SPLIT = re.compile(r"(\d+)")


def var_key(name: str):
    """Natural sort key: ``k2`` sorts before ``k10``."""
    parts = _SPLIT.split(name)
    return tuple((0, int(p), "") if p.isdigit() else (1, 0, p) for p in parts if p != "")


@lru_cache(maxsize=4096)
def _union(a: tuple, b: tuple) -> tuple:
    if a == b:
        return a
    return tuple(sorted(set(a) | set(b), key=var_key))


@lru_cache(maxsize=8192)
def _embedding(src: tuple, dst: tuple) -> tuple:
    pos = {v: i for i, v in enumerate(dst)}
    return tuple(pos[v] for v in src)


def _lift(p: "Polynomial", dst: tuple) -> dict:
    if p.variables == dst:
        return p.terms
    idx = _embedding(p.variables, dst)
    n = len(dst)
    out = {}
    for e, c in p.terms.items():
        full = [0] * n
        for j, k in zip(idx, e):
            full[j] = k
        out[tuple(full)] = c
    return out


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class Polynomial:
    """Multivariate polynomial with Gaussian-rational coefficients."""

    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, terms: Mapping | None = None, variables: Sequence[str] = ()):
        variables = tuple(variables)
        for v in variables:
            if not isinstance(v, str) or not _IDENT.match(v):
                raise ValueError(f"invalid variable name {v!r}")
        if len(set(variables)) != len(variables):
            raise ValueError("duplicate variable names")
        clean: dict = {}
        n = len(variables)
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != n or any(k < 0 for k in e):
                raise ValueError(f"bad exponent vector {e} for variables {variables}")
            c = as_scalar(c)
            if c:
                clean[e] = clean.get(e, _GR_ZERO) + c
                if not clean[e]:
                    del clean[e]
        order = sorted(range(n), key=lambda i: var_key(variables[i]))
        if order != list(range(n)):
            variables = tuple(variables[i] for i in order)
            clean = {tuple(e[i] for i in order): c for e, c in clean.items()}
        self._set(*_trim(variables, clean))

    def _set(self, variables, terms):
        self.variables = variables
        self.terms = terms
        self._hash = None

    @classmethod
    def _raw(cls, variables: tuple, terms: dict, trim: bool = True) -> "Polynomial":
        obj = object.__new__(cls)
        if trim:
            variables, terms = _trim(variables, terms)
        obj._set(variables, terms)
        return obj

    # constructors
    @classmethod
    def constant(cls, c) -> "Polynomial":
        c = as_scalar(c)
        return cls._raw((), {(): c} if c else {}, trim=False)

    @classmethod
    def variable(cls, name: str) -> "Polynomial":
        if not _IDENT.match(name):
            raise ValueError(f"invalid variable name {name!r}")
        return cls._raw((name,), {(1,): _GR_ONE}, trim=False)

    @classmethod
    def monomial(cls, powers: Mapping[str, int], coeff=1) -> "Polynomial":
        names = tuple(sorted(powers, key=var_key))
        return cls({tuple(powers[v] for v in names): coeff}, names)

    # predicates and accessors
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.variables

    def constant_value(self) -> GaussianRational:
        if self.variables:
            raise ValueError(f"polynomial {self} is not constant")
        return self.terms.get((), _GR_ZERO)

    def constant_term(self) -> GaussianRational:
        return self.terms.get((0,) * len(self.variables), _GR_ZERO)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree(self, var: str) -> int:
        if var not in self.variables:
            return 0 if self.terms else -1
        i = self.variables.index(var)
        return max(e[i] for e in self.terms)

    def sorted_terms(self):
        """Terms in descending graded-lex order."""
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def leading_term(self):
        return max(self.terms.items(), key=lambda t: (sum(t[0]), t[0]))

    def coefficients(self):
        return list(self.terms.values())

    def is_real(self) -> bool:
        return all(not c.im for c in self.terms.values())

    # arithmetic
    def _binop_lift(self, other):
        u = _union(self.variables, other.variables)
        return u, _lift(self, u), _lift(other, u)

    def __add__(self, other):
        o = _as_poly(other)
        if o is None:
            return NotImplemented
        if not o.terms:
            return self
        if not self.terms:
            return o
        u, a, b = self._binop_lift(o)
        out = dict(a)
        for e, c in b.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Polynomial._raw(u, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.variables, {e: -c for e, c in self.terms.items()}, trim=False)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = _as_poly(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = _as_poly(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, RationalFunction):
            return NotImplemented
        o = _as_poly(other)
        if o is None:
            return NotImplemented
        if not self.terms or not o.terms:
            return _POLY_ZERO
        if not o.variables:
            return self.scale(o.terms[()])
        if not self.variables:
            return o.scale(self.terms[()])
        u, a, b = self._binop_lift(o)
        out: dict = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple([x + y for x, y in zip(e1, e2)])
                c = c1 * c2
                s = out.get(e)
                if s is None:
                    out[e] = c
                else:
                    s = s + c
                    if s:
                        out[e] = s
                    else:
                        del out[e]
        return Polynomial._raw(u, out)

    __rmul__ = __mul__

    def scale(self, c) -> "Polynomial":
        c = as_scalar(c)
        if not c:
            return _POLY_ZERO
        if c == _GR_ONE:
            return self
        return Polynomial._raw(self.variables, {e: v * c for e, v in self.terms.items()}, trim=False)

    def __truediv__(self, other):
        if isinstance(other, (Polynomial, RationalFunction)):
            return RationalFunction(self) / other
        c = _coerce(other)
        if c is None:
            return NotImplemented
        return self.scale(_GR_ONE / c)

    def __rtruediv__(self, other):
        o = _as_poly(other)
        if o is None:
            return NotImplemented
        return RationalFunction(o, self)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result = _POLY_ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, RationalFunction):
            return other == self
        o = _as_poly(other)
        if o is None:
            return NotImplemented
        return self.variables == o.variables and self.terms == o.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # calculus / substitution
    def differentiate(self, var: str) -> "Polynomial":
        if var not in self.variables:
            return _POLY_ZERO
        i = self.variables.index(var)
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                ne = e[:i] + (k - 1,) + e[i + 1:]
                out[ne] = c * k
        return Polynomial._raw(self.variables, out)

    def subs(self, values: Mapping[str, object]) -> "Polynomial":
        """Exact substitution of scalars or polynomials for variables."""
        hit = [v for v in self.variables if v in values]
        if not hit:
            return self
        keep = tuple(v for v in self.variables if v not in values)
        keep_idx = [self.variables.index(v) for v in keep]
        hit_idx = [self.variables.index(v) for v in hit]
        vals = [values[v] for v in hit]
        if all(not isinstance(x, (Polynomial, RationalFunction)) for x in vals):
            vals = [as_scalar(x) for x in vals]
            powers: list[dict] = [{} for _ in hit]
            out: dict = {}
            for e, c in self.terms.items():
                for j, i in enumerate(hit_idx):
                    k = e[i]
                    if k:
                        pc = powers[j].get(k)
                        if pc is None:
                            pc = vals[j] ** k
                            powers[j][k] = pc
                        c = c * pc
                        if not c:
                            break
                if not c:
                    continue
                ne = tuple(e[i] for i in keep_idx)
                s = out.get(ne)
                s = c if s is None else s + c
                if s:
                    out[ne] = s
                else:
                    out.pop(ne, None)
            return Polynomial._raw(keep, out)
        if any(isinstance(x, RationalFunction) for x in vals):
            raise TypeError("use RationalFunction.subs for rational substitutions")
        vals = [_as_poly(x) for x in vals]
        result = _POLY_ZERO
        for e, c in self.terms.items():
            term = Polynomial._raw(keep, {tuple(e[i] for i in keep_idx): c})
            for j, i in enumerate(hit_idx):
                if e[i]:
                    term = term * vals[j] ** e[i]
            result = result + term
        return result

    def rename(self, mapping: Mapping[str, str]) -> "Polynomial":
        names = [mapping.get(v, v) for v in self.variables]
        if len(set(names)) != len(names):
            return self.subs({v: Polynomial.variable(mapping[v]) for v in self.variables if v in mapping})
        return Polynomial(self.terms, names)

    def evaluate(self, assignment: Mapping[str, complex]) -> complex:
        return evaluate(self, assignment)

    def coefficient_in(self, powers: Mapping[str, int]) -> "Polynomial":
        """Coefficient polynomial of ``prod v**k`` viewing only ``powers`` keys as variables."""
        names = list(powers)
        idx = [self.variables.index(v) if v in self.variables else None for v in names]
        keep = tuple(v for v in self.variables if v not in powers)
        keep_idx = [self.variables.index(v) for v in keep]
        out = {}
        for e, c in self.terms.items():
            ok = all((e[i] if i is not None else 0) == powers[v] for v, i in zip(names, idx))
            if ok:
                out[tuple(e[i] for i in keep_idx)] = c
        return Polynomial._raw(keep, out)

    def homogeneous_part(self, names: Iterable[str], degree: int) -> "Polynomial":
        names = set(names)
        idx = [i for i, v in enumerate(self.variables) if v in names]
        out = {e: c for e, c in self.terms.items() if sum(e[i] for i in idx) == degree}
        return Polynomial._raw(self.variables, out)

    def content(self) -> mpq:
        """Positive rational ``c`` with ``self / c`` having coprime integer Gaussian coefficients."""
        if not self.terms:
            return _ONE
        nums = []
        dens = []
        for c in self.terms.values():
            for x in (c.re, c.im):
                if x:
                    nums.append(abs(x.numerator))
                    dens.append(x.denominator)
        g = gmpy2.mpz(0)
        for n in nums:
            g = gmpy2.gcd(g, n)
        l = gmpy2.mpz(1)
        for d in dens:
            l = gmpy2.lcm(l, d)
        return mpq(g, l)

    # text
    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, e) if k
            )
            if c.im and c.re:
                coeff, sign = f"({c})", "+"
            else:
                x = c.re if not c.im else c.im
                sign = "-" if x < 0 else "+"
                mag = _fmt_q(abs(x))
                if c.im:
                    coeff = "i" if mag == "1" else f"{mag}*i"
                else:
                    coeff = "" if mag == "1" and mono else mag
            if mono:
                body = f"{coeff}*{mono}" if coeff else mono
            else:
                body = coeff
            pieces.append((sign, body))
        out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"Polynomial({str(self)!r})"


def _trim(variables: tuple, terms: dict):
    n = len(variables)
    if not n:
        return variables, terms
    used = [False] * n
    for e in terms:
        for i, k in enumerate(e):
            if k:
                used[i] = True
    if all(used):
        return variables, terms
    keep = [i for i in range(n) if used[i]]
    return (
        tuple(variables[i] for i in keep),
        {tuple(e[i] for i in keep): c for e, c in terms.items()},
    )


def _as_poly(x) -> Polynomial | None:
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, RationalFunction):
        return None
    c = _coerce(x)
    if c is None:
        return None
    return Polynomial._raw((), {(): c} if c else {}, trim=False)


_POLY_ZERO = Polynomial._raw((), {}, trim=False)
_POLY_ONE = Polynomial._raw((), {(): _GR_ONE}, trim=False)


def variables(*names: str) -> list[Polynomial]:
    return [Polynomial.variable(n) for n in names]


def differentiate(p: Polynomial, var: str, ring: Sequence[str] | None = None) -> Polynomial:
    """Formal partial derivative of ``p`` with respect to ``var``.

    ``ring`` is the declared list of indeterminates; when given, ``var`` must be
    one of them.  Without it any syntactically valid name is accepted and a
    variable that does not occur yields zero.
    """
    if isinstance(p, RationalFunction):
        return p.differentiate(var)
    if not isinstance(var, str) or not _IDENT.match(var):
        raise ValueError(f"invalid variable name {var!r}")
    if ring is not None:
        if var not in ring:
            raise ValueError(f"unknown variable {var!r}; ring is {list(ring)}")
        stray = set(p.variables) - set(ring)
        if stray:
            raise ValueError(f"polynomial uses variables outside the ring: {sorted(stray)}")
    return p.differentiate(var)


def exact_divide(p: Polynomial, d: Polynomial) -> Polynomial | None:
    """Return ``p / d`` if ``d`` divides ``p`` exactly, else ``None``."""
    d = _as_poly(d)
    if d is None or not d.terms:
        raise ZeroDivisionError("division by the zero polynomial")
    if not p.terms:
        return _POLY_ZERO
    if not d.variables:
        return p.scale(_GR_ONE / d.terms[()])
    if not set(d.variables) <= set(p.variables):
        return None
    u = p.variables
    rem = dict(p.terms)
    dl = _lift(d, u)
    key = lambda e: (sum(e), e)
    de, dc = max(dl.items(), key=lambda t: key(t[0]))
    dinv = _GR_ONE / dc
    quot: dict = {}
    # grlex leading-term division; the leading term of the remainder must be
    # divisible at every step for exact divisibility.
    while rem:
        re_, rc = max(rem.items(), key=lambda t: key(t[0]))
        qe = tuple(a - b for a, b in zip(re_, de))
        if any(k < 0 for k in qe):
            return None
        qc = rc * dinv
        quot[qe] = qc
        for e, c in dl.items():
            ne = tuple(a + b for a, b in zip(e, qe))
            s = rem.get(ne, _GR_ZERO) - c * qc
            if s:
                rem[ne] = s
            else:
                rem.pop(ne, None)
    return Polynomial._raw(u, quot)


# --- rational functions -----------------------------------------------------


class RationalFunction:
    """Quotient of two polynomials, normalised so the denominator is monic."""

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator, denominator=None):
        num = _as_poly(numerator)
        if num is None:
            raise TypeError(f"bad numerator {numerator!r}")
        den = _POLY_ONE if denominator is None else _as_poly(denominator)
        if den is None:
            raise TypeError(f"bad denominator {denominator!r}")
        if not den.terms:
            raise ZeroDivisionError("rational function with zero denominator")
        if not num.terms:
            den = _POLY_ONE
        elif den.variables:
            q = exact_divide(num, den) if len(den.terms) == 1 else None
            if q is not None:
                num, den = q, _POLY_ONE
            else:
                lc = den.leading_term()[1]
                if lc != _GR_ONE:
                    inv = _GR_ONE / lc
                    num, den = num.scale(inv), den.scale(inv)
        else:
            c = den.terms[()]
            if c != _GR_ONE:
                num, den = num.scale(_GR_ONE / c), _POLY_ONE
        self.numerator = num
        self.denominator = den

    @property
    def variables(self) -> tuple:
        return _union(self.numerator.variables, self.denominator.variables)

    def is_polynomial(self) -> bool:
        return not self.denominator.variables

    def as_polynomial(self) -> Polynomial:
        if self.denominator.variables:
            q = exact_divide(self.numerator, self.denominator)
            if q is None:
                raise ValueError("rational function is not a polynomial")
            return q
        return self.numerator

    def is_zero(self) -> bool:
        return not self.numerator.terms

    def constant_value(self) -> GaussianRational:
        return self.as_polynomial().constant_value()

    def reduce(self) -> "RationalFunction":
        """Cancel the denominator when it divides the numerator exactly."""
        if self.denominator.variables:
            q = exact_divide(self.numerator, self.denominator)
            if q is not None:
                return RationalFunction(q)
        return self

    def __add__(self, other):
        o = _as_rf(other)
        if o is None:
            return NotImplemented
        if self.denominator == o.denominator:
            return RationalFunction(self.numerator + o.numerator, self.denominator)
        # keep the larger denominator when one divides the other
        if len(self.denominator.terms) <= len(o.denominator.terms):
            q = exact_divide(o.denominator, self.denominator)
            if q is not None:
                return RationalFunction(self.numerator * q + o.numerator, o.denominator)
        else:
            q = exact_divide(self.denominator, o.denominator)
            if q is not None:
                return RationalFunction(self.numerator + o.numerator * q, self.denominator)
        return RationalFunction(
            self.numerator * o.denominator + o.numerator * self.denominator,
            self.denominator * o.denominator,
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.numerator, self.denominator)

    def __sub__(self, other):
        o = _as_rf(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = _as_rf(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = _as_rf(other)
        if o is None:
            return NotImplemented
        return RationalFunction(self.numerator * o.numerator, self.denominator * o.denominator)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _as_rf(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RationalFunction(self.numerator * o.denominator, self.denominator * o.numerator)

    def __rtruediv__(self, other):
        o = _as_rf(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n: int):
        if n < 0:
            return RationalFunction(self.denominator ** (-n), self.numerator ** (-n))
        return RationalFunction(self.numerator**n, self.denominator**n)

    def __eq__(self, other):
        o = _as_rf(other)
        if o is None:
            return NotImplemented
        if self.denominator == o.denominator:
            return self.numerator == o.numerator
        return self.numerator * o.denominator == o.numerator * self.denominator

    def __hash__(self):
        r = self.reduce()
        if r.is_polynomial():
            return hash(r.numerator)
        return hash((r.numerator, r.denominator))

    def __bool__(self):
        return not self.is_zero()

    def differentiate(self, var: str) -> "RationalFunction":
        n, d = self.numerator, self.denominator
        if not d.variables:
            return RationalFunction(n.differentiate(var))
        return RationalFunction(n.differentiate(var) * d - n * d.differentiate(var), d * d)

    def subs(self, values: Mapping[str, object]) -> "RationalFunction":
        def sub(p: Polynomial):
            if any(isinstance(v, RationalFunction) for v in values.values()):
                result = RationalFunction(_POLY_ZERO)
                for e, c in p.terms.items():
                    term = RationalFunction(Polynomial.constant(c))
                    for name, k in zip(p.variables, e):
                        if k:
                            v = values.get(name, Polynomial.variable(name))
                            term = term * _as_rf(v) ** k
                    result = result + term
                return result
            return RationalFunction(p.subs(values))

        return sub(self.numerator) / sub(self.denominator)

    def evaluate(self, assignment):
        return evaluate(self, assignment)

    def __str__(self):
        if not self.denominator.variables:
            return str(self.numerator)
        return f"({self.numerator})/({self.denominator})"

    def __repr__(self):
        return f"RationalFunction({str(self)!r})"


def _as_rf(x) -> RationalFunction | None:
    if isinstance(x, RationalFunction):
        return x
    p = _as_poly(x)
    return None if p is None else RationalFunction(p)


def _entry(x):
    """Normalise a matrix entry: polynomials stay polynomials when possible."""
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, RationalFunction):
        return x.numerator if not x.denominator.variables else x
    p = _as_poly(x)
    if p is None:
        raise TypeError(f"bad matrix entry {x!r}")
    return p


# --- matrices ---------------------------------------------------------------


class SymbolicMatrix:
    """Immutable rectangular matrix of polynomials or rational functions."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence], cols: int | None = None):
        rows = tuple(tuple(_entry(x) for x in r) for r in entries)
        if rows:
            width = len(rows[0])
            if any(len(r) != width for r in rows):
                raise ValueError("ragged matrix")
        else:
            width = cols or 0
        self.entries = rows
        self.rows = len(rows)
        self.cols = width

    @classmethod
    def identity(cls, n: int) -> "SymbolicMatrix":
        return cls([[_POLY_ONE if i == j else _POLY_ZERO for j in range(n)] for i in range(n)], n)

    @classmethod
    def zeros(cls, r: int, c: int) -> "SymbolicMatrix":
        return cls([[_POLY_ZERO] * c for _ in range(r)], c)

    @classmethod
    def diagonal(cls, items: Sequence) -> "SymbolicMatrix":
        n = len(items)
        return cls([[items[i] if i == j else _POLY_ZERO for j in range(n)] for i in range(n)], n)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> tuple:
        return self.entries[i]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.entries)

    def transpose(self) -> "SymbolicMatrix":
        return SymbolicMatrix([list(c) for c in zip(*self.entries)] if self.rows else [], self.rows)

    T = property(transpose)

    def map(self, fn) -> "SymbolicMatrix":
        return SymbolicMatrix([[fn(x) for x in r] for r in self.entries], self.cols)

    def __add__(self, other: "SymbolicMatrix"):
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return SymbolicMatrix(
            [[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)], self.cols
        )

    def __sub__(self, other: "SymbolicMatrix"):
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return SymbolicMatrix(
            [[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)], self.cols
        )

    def __neg__(self):
        return self.map(lambda x: -x)

    def scale(self, c) -> "SymbolicMatrix":
        return self.map(lambda x: x * c)

    def __mul__(self, c):
        if isinstance(c, SymbolicMatrix):
            return self @ c
        return self.scale(c)

    __rmul__ = scale

    def __matmul__(self, other: "SymbolicMatrix"):
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        ocols = other.column
        cols = [ocols(j) for j in range(other.cols)]
        out = []
        for r in self.entries:
            row = []
            for c in cols:
                acc = _POLY_ZERO
                for a, b in zip(r, c):
                    if a and b:
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return SymbolicMatrix(out, other.cols)

    def __eq__(self, other):
        if not isinstance(other, SymbolicMatrix):
            return NotImplemented
        return self.shape == other.shape and all(
            a == b for r, s in zip(self.entries, other.entries) for a, b in zip(r, s)
        )

    def __hash__(self):
        return hash(self.entries)

    def is_zero(self) -> bool:
        return all(not x for r in self.entries for x in r)

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and all(
            self.entries[i][j] == self.entries[j][i] for i in range(self.rows) for j in range(i)
        )

    def is_polynomial(self) -> bool:
        return all(isinstance(x, Polynomial) for r in self.entries for x in r)

    def variables(self) -> tuple:
        out: tuple = ()
        for r in self.entries:
            for x in r:
                out = _union(out, x.variables)
        return out

    def subs(self, values) -> "SymbolicMatrix":
        return self.map(lambda x: x.subs(values))

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "SymbolicMatrix":
        return SymbolicMatrix([[self.entries[i][j] for j in cols] for i in rows], len(cols))

    def block(self, r0: int, r1: int, c0: int, c1: int) -> "SymbolicMatrix":
        return self.submatrix(range(r0, r1), range(c0, c1))

    def evaluate(self, assignment) -> np.ndarray:
        return evaluate(self, assignment)

    def tolist(self) -> list:
        return [list(r) for r in self.entries]

    def __str__(self):
        return "[" + ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self.entries) + "]"

    def __repr__(self):
        return f"SymbolicMatrix({self})"


def _ediv(a, b):
    """Exact division of matrix entries, falling back to rational functions."""
    if isinstance(a, Polynomial) and isinstance(b, Polynomial):
        q = exact_divide(a, b)
        if q is not None:
            return q
    return _entry(RationalFunction(a) / b)


def determinant(m: SymbolicMatrix):
    """Exact determinant by fraction-free (Bareiss) elimination with pivoting."""
    if m.rows != m.cols:
        raise ValueError(f"determinant of non-square {m.rows}x{m.cols} matrix")
    n = m.rows
    if n == 0:
        return _POLY_ONE
    a = [list(r) for r in m.entries]
    sign = 1
    prev = _POLY_ONE
    for k in range(n - 1):
        if not a[k][k]:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return _POLY_ZERO
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        piv = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            for j in range(k + 1, n):
                num = piv * a[i][j] - aik * a[k][j] if aik else piv * a[i][j]
                a[i][j] = _ediv(num, prev) if num else _POLY_ZERO
            a[i][k] = _POLY_ZERO
        prev = piv
    d = a[n - 1][n - 1]
    return -d if sign < 0 else d


def determinant_cofactor(m: SymbolicMatrix):
    """Laplace expansion along the first row.  Slow; used as an independent check."""
    if m.rows != m.cols:
        raise ValueError("determinant of non-square matrix")
    n = m.rows
    if n == 0:
        return _POLY_ONE
    if n == 1:
        return m.entries[0][0]
    total = _POLY_ZERO
    for j in range(n):
        x = m.entries[0][j]
        if not x:
            continue
        minor = m.submatrix(range(1, n), [c for c in range(n) if c != j])
        term = x * determinant_cofactor(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def adjugate(m: SymbolicMatrix) -> SymbolicMatrix:
    """Classical adjoint: ``m @ adjugate(m) == det(m) * identity``."""
    if m.rows != m.cols:
        raise ValueError(f"adjugate of non-square {m.rows}x{m.cols} matrix")
    n = m.rows
    if n == 0:
        return SymbolicMatrix([], 0)
    if n == 1:
        return SymbolicMatrix([[_POLY_ONE]], 1)
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = m.submatrix([r for r in range(n) if r != i], [c for c in range(n) if c != j])
            c = determinant(minor)
            out[j][i] = c if (i + j) % 2 == 0 else -c
    return SymbolicMatrix(out, n)


# --- numeric evaluation -----------------------------------------------------


def _eval_poly(p: Polynomial, assignment: Mapping[str, complex]) -> complex:
    try:
        vals = [complex(assignment[v]) for v in p.variables]
    except KeyError as exc:
        raise KeyError(f"missing variable {exc.args[0]!r} in assignment") from None
    total = 0j
    for e, c in p.sorted_terms():
        t = complex(c)
        for x, k in zip(vals, e):
            if k:
                t *= x**k
        total += t
    return total


def evaluate(obj, assignment: Mapping[str, complex]):
    """Floating-point evaluation of a polynomial, rational function or matrix."""
    if isinstance(obj, Polynomial):
        return _eval_poly(obj, assignment)
    if isinstance(obj, RationalFunction):
        return _eval_poly(obj.numerator, assignment) / _eval_poly(obj.denominator, assignment)
    if isinstance(obj, SymbolicMatrix):
        out = np.zeros(obj.shape, dtype=complex)
        for i, r in enumerate(obj.entries):
            for j, x in enumerate(r):
                if x:
                    out[i, j] = evaluate(x, assignment)
        return out
    return complex(as_scalar(obj))


# --- parsing ----------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int | None = None):
        where = f" at column {pos + 1}" if pos is not None else ""
        super().__init__(f"{message}{where}: {text!r}" if text else message)
        self.pos = pos


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)(?P<imag>i(?![A-Za-z0-9_]))?|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError("unexpected character", text, pos)
        start = m.start(m.lastindex) if m.lastindex else pos
        if m.group("num") is not None:
            v = GaussianRational(mpq(Fraction(m.group("num"))))
            if m.group("imag"):
                v = v * I
            out.append(("num", v, start))
        elif m.group("name") is not None:
            out.append(("name", m.group("name"), start))
        else:
            op = m.group("op")
            out.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text: str, allowed):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.allowed = None if allowed is None else set(allowed)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, msg):
        raise ParseError(msg, self.text, self.peek()[2])

    def parse(self) -> Polynomial:
        if self.peek()[0] == "end":
            self.error("empty expression")
        p = self.expr()
        if self.peek()[0] != "end":
            self.error("unexpected token")
        return p

    def expr(self):
        p = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self):
        p = self.unary()
        while True:
            t = self.peek()
            if t[:2] == ("op", "*"):
                self.take()
                p = p * self.unary()
            elif t[:2] == ("op", "/"):
                self.take()
                d = self.unary()
                if d.variables:
                    raise ParseError("division by a non-constant expression", self.text, t[2])
                if not d:
                    raise ParseError("division by zero", self.text, t[2])
                p = p.scale(_GR_ONE / d.constant_value())
            elif t[0] in ("num", "name") or t[:2] == ("op", "("):
                p = p * self.unary()  # implicit multiplication, e.g. "2t" or "3 z1"
            else:
                return p

    def unary(self):
        t = self.peek()
        if t[:2] == ("op", "-"):
            self.take()
            return -self.unary()
        if t[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            t = self.take()
            if t[0] != "num" or not t[1].is_real() or t[1].re.denominator != 1:
                raise ParseError("exponent must be a nonnegative integer", self.text, t[2])
            base = base ** int(t[1].re)
        return base

    def atom(self):
        t = self.take()
        if t[0] == "num":
            return Polynomial.constant(t[1])
        if t[0] == "name":
            if t[1] == "i":
                return Polynomial.constant(I)
            if self.allowed is not None and t[1] not in self.allowed:
                raise ParseError(f"unknown variable {t[1]!r}", self.text, t[2])
            return Polynomial.variable(t[1])
        if t[:2] == ("op", "("):
            p = self.expr()
            if self.take()[:2] != ("op", ")"):
                raise ParseError("missing closing parenthesis", self.text, t[2])
            return p
        raise ParseError("unexpected token", self.text, t[2])


def parse_polynomial(text: str, allowed: Iterable[str] | None = None) -> Polynomial:
    """Parse ``+ - * / ^ ( )`` expressions with rational constants and ``i``.

    ``allowed`` restricts which identifiers may appear; ``i`` is always the
    imaginary unit.  Division is only permitted by constants.
    """
    if not isinstance(text, str):
        raise ParseError(f"expected a string, got {type(text).__name__}")
    return _Parser(text, allowed).parse()
