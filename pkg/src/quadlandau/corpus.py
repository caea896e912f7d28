"""Seeded generators: small multigraphs and random symmetric matrix families."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Iterator

from .graph import Edge, FeynmanGraph
from .symbolic import Polynomial, SymbolicMatrix

__all__ = [
    "connected_multigraphs",
    "one_pi_graphs",
    "random_symmetric_family",
    "canonical_key",
]


def _edge_types(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i, n)]


def canonical_key(n: int, edges) -> tuple:
    """Isomorphism invariant of an unlabeled multigraph with ``n`` vertices."""
    best = None
    for perm in itertools.permutations(range(n)):
        key = tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in edges))
        if best is None or key < best:
            best = key
    return best


def connected_multigraphs(
    max_vertices: int = 4, max_edges: int = 6, self_loops: bool = True, min_edges: int = 0
) -> Iterator[FeynmanGraph]:
    """Every connected multigraph up to isomorphism within the given bounds.

    Vertices are ``v0..v{n-1}``; edges ``e1..`` with distinct masses
    ``m1..``; all vertices carry one external leg; D = 4.
    """
    for n in range(1, max_vertices + 1):
        types = [t for t in _edge_types(n) if self_loops or t[0] != t[1]]
        seen = set()
        for k in range(max(min_edges, n - 1), max_edges + 1):
            for combo in itertools.combinations_with_replacement(types, k):
                if not _connected(n, combo):
                    continue
                key = canonical_key(n, combo)
                if key in seen:
                    continue
                seen.add(key)
                yield _build(n, key)


def _connected(n: int, edges) -> bool:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    return len({find(i) for i in range(n)}) == 1


def _build(n: int, edges, mass: str | None = None, external=None) -> FeynmanGraph:
    vs = tuple(f"v{i}" for i in range(n))
    es = tuple(
        Edge(f"e{i + 1}", (vs[a], vs[b]), mass or f"m{i + 1}") for i, (a, b) in enumerate(edges)
    )
    ext = external if external is not None else {v: 1 for v in vs}
    return FeynmanGraph(vs, es, ext, 4)


def one_pi_graphs(max_vertices: int = 4, max_loops: int = 3, mass: str = "m") -> list[FeynmanGraph]:
    """All 1PI multigraphs with 1 <= h1 <= max_loops, uniform mass, one leg per vertex."""
    out = []
    for n in range(1, max_vertices + 1):
        types = _edge_types(n)
        seen = set()
        for k in range(n, n - 1 + max_loops + 1):
            for combo in itertools.combinations_with_replacement(types, k):
                if not _connected(n, combo):
                    continue
                key = canonical_key(n, combo)
                if key in seen:
                    continue
                seen.add(key)
                g = _build(n, key, mass=mass)
                if g.is_1pi() and 1 <= g.h1 <= max_loops:
                    out.append(g)
    return out


def random_symmetric_family(
    rng: random.Random,
    n: int,
    parameters=("s", "t"),
    degree: int = 2,
    rank: int | None = None,
) -> SymbolicMatrix:
    """Random symmetric polynomial matrix; with ``rank`` < n it is P^T diag(B, 0) P.

    ``P`` is a constant unimodular integer matrix, so the family has rank at
    most ``rank`` identically.
    """
    params = list(parameters)

    def rand_poly(deg: int) -> Polynomial:
        terms = {}
        for e in itertools.product(range(deg + 1), repeat=len(params)):
            if sum(e) <= deg and rng.random() < 0.5:
                terms[e] = Fraction(rng.randint(-4, 4), rng.choice([1, 1, 2, 3]))
        return Polynomial(terms, params)

    r = n if rank is None else rank
    B = [[None] * r for _ in range(r)]
    for i in range(r):
        for j in range(i, r):
            B[i][j] = B[j][i] = rand_poly(degree if r == n else max(0, degree - 0))
    if r == n:
        return SymbolicMatrix(B, n)
    # unimodular P: unit lower triangular times unit upper triangular
    L = [[1 if i == j else (rng.randint(-2, 2) if j < i else 0) for j in range(n)] for i in range(n)]
    U = [[1 if i == j else (rng.randint(-2, 2) if j > i else 0) for j in range(n)] for i in range(n)]
    P = SymbolicMatrix(L) @ SymbolicMatrix(U)
    zero = Polynomial.constant(0)
    big = [[B[i][j] if i < r and j < r else zero for j in range(n)] for i in range(n)]
    return P.transpose() @ SymbolicMatrix(big, n) @ P


def random_character(graphs, rng: random.Random, hi: int = 6, symbols=("s", "m")):
    """Seeded toy character on ``graphs`` and everything their recursion needs.

    phi(G) has poles up to order h1(G) and is known to order ``hi``.  Each
    coefficient is a random polynomial in the symbols over a power of a fixed
    quadratic in the masses, so that arithmetic stays small.
    """
    from .renorm import Character, LaurentSeries, canonical_graph, closure
    from .symbolic import Polynomial, RationalFunction

    s, m = (Polynomial.variable(x) for x in symbols)
    den = m * m + Polynomial.constant(1)
    monos = [Polynomial.constant(1), s, m * m, s * s, s * m * m]
    values = {}
    for key in closure(graphs):
        h = canonical_graph(key).h1
        cs = {}
        for k in range(-h, hi + 1):
            num = Polynomial.constant(0)
            for mono in monos:
                c = rng.randint(-3, 3)
                if c:
                    num = num + mono.scale(c)
            cs[k] = RationalFunction(num, den ** rng.randint(0, 1))
        values[key] = LaurentSeries(cs, -h, hi)
    return Character(values)
