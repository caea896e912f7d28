"""Hopf algebra of 1PI graphs, truncated Laurent series and Birkhoff decomposition.

Graphs are identified up to isomorphism through a canonical key that respects
masses, propagator exponents, external leg counts and vertex weights.  The
coproduct sums over divergent subgraphs (vertex-disjoint unions of 1PI
loop-carrying pieces with omega <= 0) against the contracted cograph.
Contraction records the omega of each collapsed piece as a vertex weight, so
omega(G/gamma) = omega(G); this keeps the coproduct coassociative.

A subgraph gamma of G is given the external structure it sees inside G: at
each vertex, the legs of G plus the ends of edges of G that are not in gamma.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

from .graph import Edge, FeynmanGraph, contract, enumerate_divergent_subgraphs
from .symbolic import GaussianRational, Polynomial, RationalFunction, as_scalar, parse_polynomial

__all__ = [
    "RenormError",
    "SchemeError",
    "canonical_key",
    "canonical_graph",
    "describe",
    "GraphSum",
    "TensorSum",
    "coproduct",
    "reduced_coproduct",
    "iterated_coproduct",
    "closure",
    "antipode",
    "LaurentSeries",
    "NumericSampler",
    "Character",
    "MinimalSubtraction",
    "MomentumSubtraction",
    "Birkhoff",
    "birkhoff",
    "physical_limit",
    "convolve",
]


class RenormError(ValueError):
    pass


class SchemeError(RenormError):
    pass


# --- canonical forms ---------------------------------------------------------


def _sc(x) -> tuple:
    x = as_scalar(x)
    return (Fraction(int(x.re.numerator), int(x.re.denominator)), Fraction(int(x.im.numerator), int(x.im.denominator)))


def _vertex_labels(g: FeynmanGraph) -> list[tuple]:
    inc: dict[str, list] = {v: [] for v in g.vertices}
    loops = {v: 0 for v in g.vertices}
    for e in g.edges:
        a, b = e.ends
        lab = (e.mass, _sc(e.exponent))
        inc[a].append(lab)
        if a == b:
            loops[a] += 1
        else:
            inc[b].append(lab)
    return [
        (g.phi(v), _sc(g.weight(v)), len(inc[v]) + loops[v], loops[v], tuple(sorted(inc[v])))
        for v in g.vertices
    ]


@lru_cache(maxsize=None)
def canonical_key(g: FeynmanGraph) -> tuple:
    """Isomorphism invariant of ``g``; equal keys mean isomorphic graphs.

    Vertices are grouped by local labels and only permuted within groups;
    the lexicographically smallest edge list wins.
    """
    labels = _vertex_labels(g)
    order = sorted(range(len(g.vertices)), key=lambda i: labels[i])
    cells: list[list[int]] = []
    for i in order:
        if cells and labels[cells[-1][0]] == labels[i]:
            cells[-1].append(i)
        else:
            cells.append([i])
    if math.prod(math.factorial(len(c)) for c in cells) > 200_000:
        raise RenormError("graph too symmetric for brute-force canonical labeling")
    idx = g.vertex_index
    raw = [(idx[e.ends[0]], idx[e.ends[1]], e.mass, _sc(e.exponent)) for e in g.edges]
    best = None
    for perms in itertools.product(*(itertools.permutations(c) for c in cells)):
        pos = {}
        for p in perms:
            for v in p:
                pos[v] = len(pos)
        edges = tuple(sorted((min(pos[a], pos[b]), max(pos[a], pos[b]), m, x) for a, b, m, x in raw))
        if best is None or edges < best:
            best = edges
    vlabels = tuple((labels[i][0], labels[i][1]) for i in order)
    return (g.dimension, vlabels, best)


_REGISTRY: dict[tuple, FeynmanGraph] = {}


def canonical_graph(key_or_graph) -> FeynmanGraph:
    """Representative graph with vertices v0.. and edges e1.. in canonical order."""
    key = key_or_graph if isinstance(key_or_graph, tuple) else canonical_key(key_or_graph)
    g = _REGISTRY.get(key)
    if g is None:
        D, vlabels, edges = key
        vs = tuple(f"v{i}" for i in range(len(vlabels)))
        es = tuple(
            Edge(f"e{j + 1}", (vs[a], vs[b]), m, GaussianRational(x[0], x[1]))
            for j, (a, b, m, x) in enumerate(edges)
        )
        g = FeynmanGraph(
            vs, es, tuple(phi for phi, _ in vlabels), D,
            tuple(GaussianRational(w[0], w[1]) for _, w in vlabels),
        )
        _REGISTRY[key] = g
    return g


def _key(x) -> tuple:
    if isinstance(x, FeynmanGraph):
        key = canonical_key(x)
        _REGISTRY.setdefault(key, canonical_graph(key))
        return key
    if isinstance(x, tuple) and len(x) == 3 and isinstance(x[0], int):
        return x
    raise TypeError(f"expected a graph or canonical key, got {type(x).__name__}")


def describe(x) -> str:
    """Compact human-readable form of a canonical graph."""
    g = canonical_graph(_key(x))
    parts = []
    for e in g.edges:
        lab = e.mass if e.exponent == GaussianRational(1) else f"{e.mass}^{e.exponent}"
        parts.append(f"{e.ends[0][1:]}-{e.ends[1][1:]}:{lab}")
    legs = ",".join(str(n) for n in g.external)
    extra = ""
    if any(g.weights):
        extra = " w=" + ",".join(str(w) for w in g.weights)
    return f"[{' '.join(parts)} | legs {legs}{extra}]"


def _check_1pi(g: FeynmanGraph):
    if g.h1 < 1 or not g.is_1pi():
        raise RenormError("the Hopf algebra is spanned by 1PI graphs with at least one loop")


def _sub(g: FeynmanGraph, edge_ids: Sequence[str]) -> FeynmanGraph:
    """Subgraph with the external structure it sees inside ``g``."""
    keep = set(edge_ids)
    sub = g.subgraph(edge_ids)
    legs = {v: g.phi(v) for v in sub.vertices}
    for e in g.edges:
        if e.id in keep:
            continue
        for v in e.ends:
            if v in legs:
                legs[v] += 1
    return FeynmanGraph(sub.vertices, sub.edges, tuple(legs[v] for v in sub.vertices), g.dimension, sub.weights)


def _split_components(g: FeynmanGraph, edge_ids: Sequence[str]) -> list[list[str]]:
    comps = g.components(edge_ids, list(dict.fromkeys(v for eid in edge_ids for v in g.edge(eid).ends)))
    out = []
    for verts in comps:
        vs = set(verts)
        out.append([eid for eid in edge_ids if g.edge(eid).ends[0] in vs])
    return out


# --- algebra elements --------------------------------------------------------


def _mono(keys: Iterable[tuple]) -> tuple:
    return tuple(sorted(keys))


class GraphSum:
    """Rational combination of products of canonical graphs; () is the unit."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple, Fraction] | None = None):
        self.terms = {m: Fraction(c) for m, c in (terms or {}).items() if c}

    @classmethod
    def unit(cls) -> "GraphSum":
        return cls({(): 1})

    @classmethod
    def of(cls, *graphs, coeff=1) -> "GraphSum":
        return cls({_mono(_key(g) for g in graphs): coeff})

    def __add__(self, other: "GraphSum") -> "GraphSum":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return GraphSum(out)

    def __neg__(self) -> "GraphSum":
        return GraphSum({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "GraphSum") -> "GraphSum":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return GraphSum({m: c * other for m, c in self.terms.items()})
        out: dict = {}
        for (m1, c1), (m2, c2) in itertools.product(self.terms.items(), other.terms.items()):
            m = _mono(m1 + m2)
            out[m] = out.get(m, 0) + c1 * c2
        return GraphSum(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, GraphSum):
            return NotImplemented
        return self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def format(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for m, c in sorted(self.terms.items(), key=lambda t: (-len(t[0]), t[0])):
            body = " * ".join(describe(k) for k in m) if m else "1"
            out.append(f"{_coeff(c)}{body}")
        return "\n".join(out)


def _coeff(c: Fraction) -> str:
    sign = "-" if c < 0 else "+"
    a = abs(c)
    return f"{sign} " if a == 1 else f"{sign} {a} "


class TensorSum:
    """Rational combination of tensors (monomial, monomial)."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple, Fraction] | None = None):
        self.terms = {k: Fraction(c) for k, c in (terms or {}).items() if c}

    def __add__(self, other: "TensorSum") -> "TensorSum":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return TensorSum(out)

    def __mul__(self, other: "TensorSum") -> "TensorSum":
        out: dict = {}
        for ((a1, b1), c1), ((a2, b2), c2) in itertools.product(self.terms.items(), other.terms.items()):
            k = (_mono(a1 + a2), _mono(b1 + b2))
            out[k] = out.get(k, 0) + c1 * c2
        return TensorSum(out)

    def __eq__(self, other):
        if not isinstance(other, TensorSum):
            return NotImplemented
        return self.terms == other.terms

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def format(self) -> str:
        out = []
        for (a, b), c in sorted(self.terms.items(), key=lambda t: (len(t[0][0]) == 0, -len(t[0][1]), t[0])):
            left = " * ".join(describe(k) for k in a) if a else "1"
            right = " * ".join(describe(k) for k in b) if b else "1"
            out.append(f"{_coeff(c)}{left} (x) {right}")
        return "\n".join(out)


# --- coproduct and antipode --------------------------------------------------


@lru_cache(maxsize=None)
def _reduced(key: tuple) -> tuple:
    """Reduced coproduct of one graph as ((left monomial, right key, coeff), ...)."""
    g = canonical_graph(key)
    acc: dict = {}
    for gamma in enumerate_divergent_subgraphs(g):
        left = _mono(_key(_sub(g, piece)) for piece in _split_components(g, gamma))
        right = _key(contract(g, gamma, carry_weight=True))
        acc[(left, right)] = acc.get((left, right), 0) + 1
    return tuple(sorted((l, r, Fraction(c)) for (l, r), c in acc.items()))


def reduced_coproduct(g) -> TensorSum:
    key = _key(g)
    _check_1pi(canonical_graph(key))
    return TensorSum({(l, (r,)): c for l, r, c in _reduced(key)})


def _coproduct_key(key: tuple) -> TensorSum:
    terms = {((key,), ()): Fraction(1), ((), (key,)): Fraction(1)}
    for l, r, c in _reduced(key):
        terms[(l, (r,))] = terms.get((l, (r,)), 0) + c
    return TensorSum(terms)


def _coproduct_mono(mono: tuple) -> TensorSum:
    out = TensorSum({((), ()): 1})
    for k in mono:
        out = out * _coproduct_key(k)
    return out


def coproduct(x) -> TensorSum:
    """Coproduct of a graph, or linearly and multiplicatively of a GraphSum."""
    if isinstance(x, GraphSum):
        out = TensorSum()
        for m, c in x.terms.items():
            out = out + TensorSum({k: v * c for k, v in _coproduct_mono(m).terms.items()})
        return out
    key = _key(x)
    _check_1pi(canonical_graph(key))
    return _coproduct_key(key)


def iterated_coproduct(g, side: str) -> dict:
    """(Delta x id)Delta (side "left") or (id x Delta)Delta ("right") as a map on triples."""
    out: dict = {}
    for (a, b), c in coproduct(g).terms.items():
        inner = _coproduct_mono(a if side == "left" else b)
        for (x, y), d in inner.terms.items():
            t = (x, y, b) if side == "left" else (a, x, y)
            out[t] = out.get(t, 0) + c * d
    return {t: c for t, c in out.items() if c}


@lru_cache(maxsize=None)
def _antipode_key(key: tuple) -> GraphSum:
    out = GraphSum({(key,): -1})
    for l, r, c in _reduced(key):
        out = out - _antipode_mono(l) * GraphSum({(r,): c})
    return out


def _antipode_mono(mono: tuple) -> GraphSum:
    out = GraphSum.unit()
    for k in mono:
        out = out * _antipode_key(k)
    return out


def antipode(x) -> GraphSum:
    """S(G) = -G - sum S(gamma) G/gamma over the reduced coproduct."""
    if isinstance(x, GraphSum):
        out = GraphSum()
        for m, c in x.terms.items():
            out = out + _antipode_mono(m) * c
        return out
    key = _key(x)
    _check_1pi(canonical_graph(key))
    return _antipode_key(key)


def closure(graphs: Iterable) -> list[tuple]:
    """Keys of the given graphs and of every graph in their iterated reduced coproducts."""
    seen: dict = {}
    todo = [_key(g) for g in graphs]
    while todo:
        k = todo.pop()
        if k in seen:
            continue
        _check_1pi(canonical_graph(k))
        seen[k] = None
        for l, r, _ in _reduced(k):
            todo.extend(l)
            todo.append(r)
    return sorted(seen, key=lambda k: (canonical_graph(k).h1, len(k[2]), k))


# --- coefficient values ------------------------------------------------------


class NumericSampler:
    """Coefficient known only through evaluation at kinematic points.

    ``fn`` maps an assignment {symbol: complex} to a complex number.
    ``domain``, if given, is called on (possibly partial) assignments and
    returns False outside the sampler's domain.
    """

    __slots__ = ("fn", "domain")

    def __init__(self, fn: Callable[[Mapping[str, complex]], complex], domain: Callable[[Mapping], bool] | None = None):
        self.fn = fn
        self.domain = domain

    @classmethod
    def lift(cls, x) -> "NumericSampler":
        if isinstance(x, NumericSampler):
            return x
        if isinstance(x, (RationalFunction, Polynomial)):
            return cls(lambda pt, x=x: complex(x.evaluate(pt)))
        c = complex(as_scalar(x)) if not isinstance(x, (int, float, complex)) else complex(x)
        return cls(lambda pt, c=c: c)

    def _join(self, other, op):
        o = NumericSampler.lift(other)
        doms = [d for d in (self.domain, o.domain) if d]
        dom = (lambda pt: all(d(pt) for d in doms)) if doms else None
        return NumericSampler(lambda pt, f=self.fn, h=o.fn: op(f(pt), h(pt)), dom)

    def __add__(self, other):
        return self._join(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._join(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._join(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._join(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __neg__(self):
        return NumericSampler(lambda pt, f=self.fn: -f(pt), self.domain)

    def is_zero(self) -> bool:
        return False

    def evaluate(self, point: Mapping) -> complex:
        if self.domain is not None and not self.domain(point):
            raise SchemeError("evaluation point outside the sampler's domain")
        return complex(self.fn(point))

    def subs(self, values: Mapping) -> "NumericSampler":
        if self.domain is not None and not self.domain(values):
            raise SchemeError("reference point outside the sampler's domain")
        fixed = {k: complex(as_scalar(v)) if not isinstance(v, (int, float, complex)) else complex(v)
                 for k, v in values.items()}
        return NumericSampler(lambda pt, f=self.fn: f({**pt, **fixed}), self.domain)


def _is_zero(c) -> bool:
    if isinstance(c, (int, Fraction)):
        return c == 0
    return c.is_zero()


def _coef(x):
    if isinstance(x, (NumericSampler, RationalFunction)):
        return x
    if isinstance(x, Polynomial):
        return RationalFunction(x)
    if isinstance(x, str):
        return _parse_rf(x)
    return RationalFunction(Polynomial.constant(x))


def _parse_rf(text: str) -> RationalFunction:
    """Parse "num" or "(num)/(den)" with polynomial num and den."""
    s = text.strip()
    depth = 0
    split = None
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "/" and depth == 0 and s[:i].strip().endswith(")") and s[i + 1:].strip().startswith("("):
            split = i
    if split is None:
        return RationalFunction(parse_polynomial(s))
    return RationalFunction(parse_polynomial(s[:split]), parse_polynomial(s[split + 1:]))


# --- truncated Laurent series ------------------------------------------------


class LaurentSeries:
    """sum_k c_k eps^k, exact for lo <= k <= hi, zero below lo, unknown above hi.

    ``hi`` may be ``math.inf`` for series known to all orders (finite sums).
    """

    __slots__ = ("coeffs", "lo", "hi")

    def __init__(self, coeffs: Mapping[int, object], lo: int | None = None, hi=math.inf):
        cs = {int(k): _coef(v) for k, v in coeffs.items()}
        if lo is None:
            lo = min(cs, default=0)
        if any(k < lo for k in cs if not _is_zero(cs[k])):
            raise RenormError("coefficient below the lowest retained power")
        if hi < lo:
            raise RenormError(f"empty window [{lo}, {hi}]")
        self.lo = int(lo)
        self.hi = hi
        self.coeffs = {k: c for k, c in cs.items() if k <= hi and not _is_zero(c)}

    @classmethod
    def constant(cls, c) -> "LaurentSeries":
        return cls({0: c}, 0, math.inf)

    @classmethod
    def one(cls) -> "LaurentSeries":
        return cls.constant(1)

    def coefficient(self, k: int):
        if k > self.hi:
            raise RenormError(f"power {k} lies above the known window (hi = {self.hi})")
        return self.coeffs.get(k, RationalFunction(Polynomial.constant(0)))

    def __add__(self, other):
        o = other if isinstance(other, LaurentSeries) else LaurentSeries.constant(other)
        out = dict(self.coeffs)
        for k, c in o.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return LaurentSeries(out, min(self.lo, o.lo), min(self.hi, o.hi))

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries({k: -c for k, c in self.coeffs.items()}, self.lo, self.hi)

    def __sub__(self, other):
        o = other if isinstance(other, LaurentSeries) else LaurentSeries.constant(other)
        return self + (-o)

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            f = _coef(other)
            return LaurentSeries({k: c * f for k, c in self.coeffs.items()}, self.lo, self.hi)
        lo = self.lo + other.lo
        hi = min(self.hi + other.lo, other.hi + self.lo)
        out: dict = {}
        for (i, a), (j, b) in itertools.product(self.coeffs.items(), other.coeffs.items()):
            if i + j <= hi:
                out[i + j] = out[i + j] + a * b if i + j in out else a * b
        return LaurentSeries(out, lo, hi)

    __rmul__ = __mul__

    def principal_part(self) -> "LaurentSeries":
        hi = math.inf if self.hi >= -1 else self.hi
        lo = min(self.lo, -1)
        return LaurentSeries({k: c for k, c in self.coeffs.items() if k < 0}, lo, max(hi, lo))

    def regular_part(self) -> "LaurentSeries":
        if self.hi < 0:
            raise RenormError("no nonnegative power is known")
        return LaurentSeries({k: c for k, c in self.coeffs.items() if k >= 0}, 0, self.hi)

    def map(self, fn: Callable) -> "LaurentSeries":
        return LaurentSeries({k: fn(c) for k, c in self.coeffs.items()}, self.lo, self.hi)

    def window(self) -> tuple:
        return self.lo, self.hi

    def equals_on(self, other: "LaurentSeries", lo: int, hi: int, points: Sequence[Mapping] = ()) -> bool:
        """Coefficientwise equality for powers lo..hi.

        Rational coefficients are compared exactly; sampler coefficients are
        compared at ``points`` (relative tolerance 1e-9).
        """
        if hi > min(self.hi, other.hi):
            raise RenormError("comparison window exceeds the known window")
        if hi == math.inf:
            hi = max([lo - 1, *self.coeffs, *other.coeffs])
        for k in range(lo, int(hi) + 1):
            a, b = self.coefficient(k), other.coefficient(k)
            if isinstance(a, NumericSampler) or isinstance(b, NumericSampler):
                if not points:
                    raise RenormError("sampler coefficients need sample points for comparison")
                for pt in points:
                    x, y = NumericSampler.lift(a).evaluate(pt), NumericSampler.lift(b).evaluate(pt)
                    if abs(x - y) > 1e-9 * max(1.0, abs(x), abs(y)):
                        return False
            elif not (a - b).is_zero():
                return False
        return True

    def evaluate(self, point: Mapping) -> dict[int, complex]:
        return {k: complex(NumericSampler.lift(c).evaluate(point)) for k, c in sorted(self.coeffs.items())}

    def to_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": None if self.hi == math.inf else self.hi,
            "coefficients": {str(k): str(c) for k, c in sorted(self.coeffs.items())},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "LaurentSeries":
        hi = d.get("hi")
        cs = d.get("coefficients", {})
        return cls({int(k): _parse_rf(str(v)) for k, v in cs.items()}, d.get("lo"),
                   math.inf if hi is None else int(hi))

    def __str__(self):
        parts = []
        for k, c in sorted(self.coeffs.items()):
            s = f"({c})" if not isinstance(c, NumericSampler) else "<sampler>"
            parts.append(s if k == 0 else f"{s}*eps^{k}")
        body = " + ".join(parts) or "0"
        return body if self.hi == math.inf else f"{body} + O(eps^{self.hi + 1})"

    __repr__ = __str__


# --- characters and schemes --------------------------------------------------


class Character:
    """Algebra morphism H -> Laurent series, given on single graphs."""

    def __init__(self, values: Mapping):
        self.values = {_key(g): s for g, s in values.items()}

    def __call__(self, x) -> LaurentSeries:
        if isinstance(x, GraphSum):
            out = LaurentSeries({}, 0, math.inf)
            for m, c in x.terms.items():
                out = out + self.monomial(m) * c
            return out
        return self.single(x) if _is_key_like(x) else self.monomial(x)

    def single(self, g) -> LaurentSeries:
        key = _key(g)
        try:
            return self.values[key]
        except KeyError:
            raise RenormError(f"character undefined on graph {describe(key)}") from None

    def monomial(self, mono: tuple) -> LaurentSeries:
        out = LaurentSeries.one()
        for k in mono:
            out = out * self.single(k)
        return out


def _is_key_like(x) -> bool:
    return isinstance(x, FeynmanGraph) or (
        isinstance(x, tuple) and len(x) == 3 and isinstance(x[0], int) and not isinstance(x[0], bool)
    )


class MinimalSubtraction:
    """R_min: projection onto the principal part."""

    name = "min"

    def __call__(self, series: LaurentSeries, mono: tuple) -> LaurentSeries:
        return series.principal_part()

    def to_dict(self) -> dict:
        return {"scheme": "min"}


class MomentumSubtraction:
    """R_MOM: coefficientwise evaluation at reference momenta mu_N, N the number of legs.

    Only logarithmically divergent graphs (omega = 0) are accepted.  Mass
    symbols are not substituted.
    """

    name = "MOM"

    def __init__(self, reference: Mapping[int, Mapping[str, object]]):
        self.reference = {int(n): dict(mu) for n, mu in reference.items()}

    def __call__(self, series: LaurentSeries, mono: tuple) -> LaurentSeries:
        legs = set()
        for k in mono:
            g = canonical_graph(k)
            if g.omega() != GaussianRational(0):
                raise SchemeError(
                    f"momentum subtraction is restricted to logarithmically divergent graphs; "
                    f"{describe(k)} has omega = {g.omega()}"
                )
            legs.add(g.n_external)
        if len(legs) != 1:
            raise SchemeError("momentum subtraction of a product needs factors with equal leg counts")
        n = legs.pop()
        if n not in self.reference:
            raise SchemeError(f"no reference point for {n}-leg graphs")
        mu = self.reference[n]
        return series.map(lambda c: c.subs(mu))

    def to_dict(self) -> dict:
        return {"scheme": "MOM", "reference": {str(n): {k: str(v) for k, v in mu.items()} for n, mu in self.reference.items()}}


class Birkhoff:
    """Bogoliubov recursion for one character and scheme, memoized per graph.

    The memo tables are plain dicts: use one instance per thread.
    """

    def __init__(self, phi: Character, scheme):
        self.phi = phi
        self.scheme = scheme
        self._minus: dict = {}
        self._bar: dict = {}

    def bar(self, g) -> LaurentSeries:
        key = _key(g)
        if key not in self._bar:
            _check_1pi(canonical_graph(key))
            acc = self.phi.single(key)
            for l, r, c in _reduced(key):
                acc = acc + self.minus_monomial(l) * self.phi.single(r) * c
            self._bar[key] = acc
        return self._bar[key]

    def minus(self, g) -> LaurentSeries:
        key = _key(g)
        if key not in self._minus:
            self._minus[key] = -self.scheme(self.bar(key), (key,))
        return self._minus[key]

    def plus(self, g) -> LaurentSeries:
        key = _key(g)
        return self.bar(key) + self.minus(key)

    def minus_monomial(self, mono: tuple) -> LaurentSeries:
        out = LaurentSeries.one()
        for k in mono:
            out = out * self.minus(k)
        return out

    def plus_monomial(self, mono: tuple) -> LaurentSeries:
        out = LaurentSeries.one()
        for k in mono:
            out = out * self.plus(k)
        return out

    def minus_sum(self, x: GraphSum) -> LaurentSeries:
        out = LaurentSeries({}, 0, math.inf)
        for m, c in x.terms.items():
            out = out + self.minus_monomial(m) * c
        return out

    def recursive_monomial(self, mono: tuple) -> tuple[LaurentSeries, LaurentSeries]:
        """phi_- and phi_+ of a product computed by the recursion itself (not multiplicatively)."""
        if len(mono) == 1:
            return self.minus(mono[0]), self.plus(mono[0])
        acc = self.phi.monomial(mono)
        for (a, b), c in _coproduct_mono(mono).terms.items():
            if not a or not b:
                continue
            acc = acc + self.minus_monomial(a) * self.phi.monomial(b) * c
        r = self.scheme(acc, mono)
        return -r, acc - r


def birkhoff(phi: Character, scheme, g) -> tuple[LaurentSeries, LaurentSeries]:
    b = Birkhoff(phi, scheme)
    return b.minus(g), b.plus(g)


def convolve(f: Callable[[tuple], LaurentSeries], h: Callable[[tuple], LaurentSeries], g) -> LaurentSeries:
    """(f * h)(G) = sum f(left) h(right) over the coproduct; f, h act on monomials."""
    out = LaurentSeries({}, 0, math.inf)
    for (a, b), c in coproduct(g).terms.items():
        out = out + f(a) * h(b) * c
    return out


def physical_limit(series: LaurentSeries):
    """The eps^0 coefficient of a series without principal part."""
    for k, c in series.coeffs.items():
        if k < 0:
            raise RenormError("physical limit does not exist at this truncation (nonzero principal part)")
    if series.hi < 0:
        raise RenormError("the eps^0 coefficient lies outside the known window")
    return series.coefficient(0)
