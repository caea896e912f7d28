"""Feynman multigraphs, momentum routing, Symanzik polynomial and subgraphs.

A graph is a frozen value.  Vertex and edge ids are strings; endpoints may
coincide (self-loops).  ``external[v]`` counts the external legs at ``v``.
Optional per-vertex ``weights`` enter power counting; they are zero for graphs
read from files and are only populated by :func:`contract` with
``carry_weight=True`` (used by the Hopf algebra).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, Sequence

from .symbolic import GaussianRational, Polynomial, SymbolicMatrix, as_scalar, determinant

__all__ = [
    "Edge",
    "FeynmanGraph",
    "GraphError",
    "Routing",
    "build_routing",
    "symanzik_first",
    "symanzik_determinant",
    "spanning_trees",
    "enumerate_divergent_subgraphs",
    "enumerate_1pi_subgraphs",
    "contract",
    "omega",
]

_ID = re.compile(r"[A-Za-z0-9_]+\Z")
_SYMBOL = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    id: str
    ends: tuple[str, str]
    mass: str = "m"
    exponent: GaussianRational = field(default_factory=lambda: GaussianRational(1))

    @property
    def is_self_loop(self) -> bool:
        return self.ends[0] == self.ends[1]


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


@dataclass(frozen=True)
class FeynmanGraph:
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    external: tuple[int, ...] = ()
    dimension: int = 4
    weights: tuple[GaussianRational, ...] = ()

    def __post_init__(self):
        vs = tuple(str(v) for v in self.vertices)
        object.__setattr__(self, "vertices", vs)
        if len(set(vs)) != len(vs):
            raise GraphError("duplicate vertex ids")
        for v in vs:
            if not _ID.match(v):
                raise GraphError(f"vertex id {v!r} must be alphanumeric")
        known = set(vs)
        edges = []
        for e in self.edges:
            if not isinstance(e, Edge):
                e = Edge(*e)
            ends = (str(e.ends[0]), str(e.ends[1]))
            for v in ends:
                if v not in known:
                    raise GraphError(f"edge {e.id!r} references unknown vertex {v!r}")
            if not _ID.match(str(e.id)):
                raise GraphError(f"edge id {e.id!r} must be alphanumeric")
            if not _SYMBOL.match(e.mass):
                raise GraphError(f"mass symbol {e.mass!r} is not an identifier")
            edges.append(Edge(str(e.id), ends, e.mass, as_scalar(e.exponent)))
        ids = [e.id for e in edges]
        if len(set(ids)) != len(ids):
            raise GraphError("duplicate edge ids")
        object.__setattr__(self, "edges", tuple(edges))
        ext = tuple(self.external) or (0,) * len(vs)
        if isinstance(self.external, Mapping):
            ext = tuple(int(self.external.get(v, 0)) for v in vs)
            unknown = set(map(str, self.external)) - known
            if unknown:
                raise GraphError(f"external structure names unknown vertices {sorted(unknown)}")
        if len(ext) != len(vs) or any(int(x) < 0 for x in ext):
            raise GraphError("external counts must be nonnegative, one per vertex")
        object.__setattr__(self, "external", tuple(int(x) for x in ext))
        w = self.weights
        if isinstance(w, Mapping):
            w = tuple(as_scalar(w.get(v, 0)) for v in vs)
        w = tuple(as_scalar(x) for x in w) or (GaussianRational(0),) * len(vs)
        if len(w) != len(vs):
            raise GraphError("one weight per vertex required")
        object.__setattr__(self, "weights", w)
        if int(self.dimension) < 1:
            raise GraphError("dimension must be a positive integer")
        object.__setattr__(self, "dimension", int(self.dimension))

    # basic structure
    @cached_property
    def vertex_index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def edge_index(self) -> dict[str, int]:
        return {e.id: i for i, e in enumerate(self.edges)}

    def edge(self, eid: str) -> Edge:
        try:
            return self.edges[self.edge_index[eid]]
        except KeyError:
            raise GraphError(f"unknown edge id {eid!r}") from None

    def phi(self, v: str) -> int:
        return self.external[self.vertex_index[v]]

    def weight(self, v: str) -> GaussianRational:
        return self.weights[self.vertex_index[v]]

    @property
    def n_external(self) -> int:
        return sum(self.external)

    @property
    def external_map(self) -> dict[str, int]:
        return {v: n for v, n in zip(self.vertices, self.external) if n}

    def components(self, edge_ids: Iterable[str] | None = None, vertices: Iterable[str] | None = None):
        """Connected components as lists of vertex ids (input order)."""
        eids = [e.id for e in self.edges] if edge_ids is None else list(edge_ids)
        vs = list(self.vertices) if vertices is None else list(vertices)
        uf = _UnionFind(vs)
        for eid in eids:
            a, b = self.edge(eid).ends
            uf.union(a, b)
        groups: dict[str, list[str]] = {}
        for v in vs:
            groups.setdefault(uf.find(v), []).append(v)
        return list(groups.values())

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    @property
    def h1(self) -> int:
        return len(self.edges) - len(self.vertices) + len(self.components())

    def is_1pi(self) -> bool:
        """Connected and still connected after removing any single edge."""
        if not self.is_connected():
            return False
        return not _bridges(self, [e.id for e in self.edges])

    def omega(self) -> GaussianRational:
        return omega(self, [e.id for e in self.edges])

    def subgraph(self, edge_ids: Iterable[str]) -> "FeynmanGraph":
        """Edges ``edge_ids`` with their endpoints; external counts restricted."""
        keep = set(edge_ids)
        for eid in keep:
            self.edge(eid)
        edges = [e for e in self.edges if e.id in keep]
        touched = {v for e in edges for v in e.ends}
        vs = [v for v in self.vertices if v in touched]
        return FeynmanGraph(
            tuple(vs),
            tuple(edges),
            tuple(self.phi(v) for v in vs),
            self.dimension,
            tuple(self.weight(v) for v in vs),
        )

    def with_exponents(self, exponent) -> "FeynmanGraph":
        return FeynmanGraph(
            self.vertices,
            tuple(Edge(e.id, e.ends, e.mass, as_scalar(exponent)) for e in self.edges),
            self.external,
            self.dimension,
            self.weights,
        )

    def flipped(self, eid: str) -> "FeynmanGraph":
        edges = tuple(
            Edge(e.id, (e.ends[1], e.ends[0]), e.mass, e.exponent) if e.id == eid else e
            for e in self.edges
        )
        return FeynmanGraph(self.vertices, edges, self.external, self.dimension, self.weights)

    def masses(self) -> list[str]:
        """Distinct mass symbols in edge order."""
        return list(dict.fromkeys(e.mass for e in self.edges))

    def alpha_names(self) -> list[str]:
        return [f"alpha{i + 1}" for i in range(len(self.edges))]

    # serialization
    def to_dict(self) -> dict:
        d = {
            "vertices": list(self.vertices),
            "edges": [
                {"id": e.id, "ends": list(e.ends), "mass": e.mass, "exponent": str(e.exponent)}
                for e in self.edges
            ],
            "external": self.external_map,
            "dimension": self.dimension,
        }
        if any(self.weights):
            d["weights"] = {v: str(w) for v, w in zip(self.vertices, self.weights) if w}
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "FeynmanGraph":
        allowed = {"vertices", "edges", "external", "dimension", "weights"}
        unknown = set(d) - allowed
        if unknown:
            raise GraphError(f"unknown graph fields: {sorted(unknown)}")
        for key in ("vertices", "edges"):
            if key not in d:
                raise GraphError(f"graph description lacks {key!r}")
        edges = []
        for i, e in enumerate(d["edges"]):
            if not isinstance(e, Mapping):
                raise GraphError(f"edge #{i + 1} must be an object")
            bad = set(e) - {"id", "ends", "mass", "exponent"}
            if bad:
                raise GraphError(f"edge #{i + 1}: unknown fields {sorted(bad)}")
            if "ends" not in e or len(e["ends"]) != 2:
                raise GraphError(f"edge #{i + 1}: 'ends' must list two vertices")
            try:
                exponent = as_scalar(str(e.get("exponent", "1")))
            except (ValueError, TypeError) as exc:
                raise GraphError(f"edge #{i + 1}: bad exponent: {exc}") from None
            edges.append(
                Edge(
                    str(e.get("id", i + 1)),
                    (str(e["ends"][0]), str(e["ends"][1])),
                    str(e.get("mass", f"m{i + 1}")),
                    exponent,
                )
            )
        external = d.get("external", {})
        if not isinstance(external, Mapping):
            raise GraphError("'external' must map vertex ids to counts")
        weights = d.get("weights", {})
        return cls(
            tuple(str(v) for v in d["vertices"]),
            tuple(edges),
            {str(k): int(v) for k, v in external.items()},
            int(d.get("dimension", 4)),
            {str(k): as_scalar(str(v)) for k, v in weights.items()},
        )

    def __repr__(self):
        es = ", ".join(f"{e.id}:{e.ends[0]}-{e.ends[1]}" for e in self.edges)
        return f"FeynmanGraph(V={list(self.vertices)}, E=[{es}], ext={self.external_map}, D={self.dimension})"


# --- power counting and subgraphs -------------------------------------------


def _h1(g: FeynmanGraph, edge_ids: Sequence[str]) -> int:
    if not edge_ids:
        return 0
    touched = list(dict.fromkeys(v for eid in edge_ids for v in g.edge(eid).ends))
    return len(edge_ids) - len(touched) + len(g.components(edge_ids, touched))


def omega(g: FeynmanGraph, edge_ids: Sequence[str]) -> GaussianRational:
    """Superficial degree of divergence of the subgraph spanned by ``edge_ids``.

    Sum of Re(exponent) over edges, plus vertex weights of touched vertices,
    minus D/2 times the loop number.
    """
    edge_ids = list(edge_ids)
    touched = dict.fromkeys(v for eid in edge_ids for v in g.edge(eid).ends)
    total = sum((g.edge(eid).exponent.re for eid in edge_ids), GaussianRational(0).re)
    total += sum((g.weight(v).re for v in touched), GaussianRational(0).re)
    return GaussianRational(total - GaussianRational(g.dimension).re / 2 * _h1(g, edge_ids))


def _bridges(g: FeynmanGraph, edge_ids: Sequence[str]) -> list[str]:
    touched = list(dict.fromkeys(v for eid in edge_ids for v in g.edge(eid).ends))
    base = len(g.components(edge_ids, touched))
    out = []
    for eid in edge_ids:
        if g.edge(eid).is_self_loop:
            continue
        rest = [x for x in edge_ids if x != eid]
        if len(g.components(rest, touched)) > base:
            out.append(eid)
    return out


def _split(g: FeynmanGraph, edge_ids: Sequence[str]) -> list[list[str]]:
    """Split an edge set into its connected pieces (edge lists in input order)."""
    touched = list(dict.fromkeys(v for eid in edge_ids for v in g.edge(eid).ends))
    uf = _UnionFind(touched)
    for eid in edge_ids:
        a, b = g.edge(eid).ends
        uf.union(a, b)
    groups: dict[str, list[str]] = {}
    for eid in edge_ids:
        groups.setdefault(uf.find(g.edge(eid).ends[0]), []).append(eid)
    return list(groups.values())


@lru_cache(maxsize=4096)
def _pieces(g: FeynmanGraph) -> tuple[tuple[int, ...], ...]:
    """Connected bridgeless loop-carrying edge subsets, as sorted index tuples."""
    n = len(g.edges)
    if n > 20:
        raise GraphError("subgraph enumeration is limited to 20 edges")
    ids = [e.id for e in g.edges]
    out = []
    for mask in range(1, 1 << n):
        sub = [ids[i] for i in range(n) if mask >> i & 1]
        if len(_split(g, sub)) != 1:
            continue
        if _h1(g, sub) < 1 or _bridges(g, sub):
            continue
        out.append(tuple(i for i in range(n) if mask >> i & 1))
    return tuple(out)


def enumerate_1pi_subgraphs(g: FeynmanGraph, proper: bool = False) -> list[tuple[str, ...]]:
    """Connected 1PI subgraphs with at least one loop, as edge-id tuples."""
    n = len(g.edges)
    out = [tuple(g.edges[i].id for i in p) for p in _pieces(g) if not (proper and len(p) == n)]
    return sorted(out, key=lambda s: (len(s), [g.edge_index[x] for x in s]))


def enumerate_divergent_subgraphs(g: FeynmanGraph) -> list[tuple[str, ...]]:
    """Proper subgraphs whose components are 1PI, loop-carrying and have omega <= 0.

    Components are vertex-disjoint.  Output is sorted by size, then by edge
    positions, and each subset lists its edges in input order.
    """
    n = len(g.edges)
    div = []
    for p in _pieces(g):
        ids = [g.edges[i].id for i in p]
        if omega(g, ids).re <= 0:
            verts = frozenset(v for eid in ids for v in g.edge(eid).ends)
            div.append((p, verts))
    results = set()

    def extend(start: int, chosen: tuple, used: frozenset):
        for j in range(start, len(div)):
            p, verts = div[j]
            if verts & used:
                continue
            combo = tuple(sorted(chosen + p))
            if len(combo) < n:
                results.add(combo)
            extend(j + 1, combo, used | verts)

    extend(0, (), frozenset())
    ordered = sorted(results, key=lambda c: (len(c), c))
    return [tuple(g.edges[i].id for i in c) for c in ordered]


def contract(g: FeynmanGraph, gamma: Iterable[str], carry_weight: bool = False) -> FeynmanGraph:
    """Shrink each connected component of the edge set ``gamma`` to one vertex.

    The new vertex keeps the id of the first collapsed vertex (input order) and
    receives the summed external count.  With ``carry_weight`` it also receives
    the superficial degree of divergence of the collapsed component as vertex
    weight, so that omega(G/gamma) equals omega(G).
    """
    gamma = list(dict.fromkeys(gamma))
    for eid in gamma:
        g.edge(eid)
    if not gamma:
        return g
    rep: dict[str, str] = {v: v for v in g.vertices}
    extra: dict[str, GaussianRational] = {}
    for piece in _split(g, gamma):
        verts = [v for v in g.vertices if any(v in g.edge(e).ends for e in piece)]
        head = verts[0]
        for v in verts:
            rep[v] = head
        if carry_weight:
            extra[head] = omega(g, piece)
    gset = set(gamma)
    vs = [v for v in g.vertices if rep[v] == v]
    ext = {v: 0 for v in vs}
    for v in g.vertices:
        ext[rep[v]] += g.phi(v)
    weights = {v: g.weight(v) for v in vs}
    for head, w in extra.items():
        weights[head] = w
    edges = tuple(
        Edge(e.id, (rep[e.ends[0]], rep[e.ends[1]]), e.mass, e.exponent)
        for e in g.edges
        if e.id not in gset
    )
    return FeynmanGraph(
        tuple(vs), edges, tuple(ext[v] for v in vs), g.dimension, tuple(weights[v] for v in vs)
    )


# --- routing ----------------------------------------------------------------


@dataclass(frozen=True)
class Routing:
    """Momentum routing on a connected graph.

    Edge ``e`` carries ``q_e = K_e + P_e`` from ``orientation[e][0]`` to
    ``orientation[e][1]``, with ``K_e = sum_j loop[e][j] k_j`` and
    ``P_e = sum_v ext[e][v] p_v`` over the non-base external vertices.
    """

    graph: FeynmanGraph
    base: str
    orientation: dict
    tree: tuple[str, ...]
    chords: tuple[str, ...]
    loop_names: tuple[str, ...]
    external_vertices: tuple[str, ...]
    external_names: tuple[str, ...]
    loop: dict
    ext: dict

    @property
    def dimension(self) -> int:
        return self.graph.dimension

    def incidence(self, eid: str, v: str) -> int:
        tail, head = self.orientation[eid]
        if tail == head:
            return 0
        return 1 if v == head else -1 if v == tail else 0

    def loop_components(self) -> list[str]:
        D = self.dimension
        return [f"{k}_{mu}" for k in self.loop_names for mu in range(D)]

    def external_components(self) -> list[str]:
        D = self.dimension
        return [f"{p}_{mu}" for p in self.external_names for mu in range(D)]

    def momentum(self, eid: str, mu: int) -> Polynomial:
        """Component ``mu`` of ``K_e + P_e``."""
        return self.internal(eid, mu) + self.external_part(eid, mu)

    def internal(self, eid: str, mu: int) -> Polynomial:
        terms = {}
        for name, c in zip(self.loop_names, self.loop[eid]):
            if c:
                terms[f"{name}_{mu}"] = c
        return _linear(terms)

    def external_part(self, eid: str, mu: int) -> Polynomial:
        terms = {}
        for name, c in zip(self.external_names, self.ext[eid]):
            if c:
                terms[f"{name}_{mu}"] = c
        return _linear(terms)

    def label(self, eid: str) -> str:
        """Human readable momentum, e.g. ``p - k``."""
        parts = []
        for name, c in list(zip(self.external_names, self.ext[eid])) + list(
            zip(self.loop_names, self.loop[eid])
        ):
            if c:
                mag = "" if abs(c) == 1 else f"{abs(c)}*"
                parts.append(("-" if c < 0 else "+", mag + name))
        if not parts:
            return "0"
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def conservation(self, v: str, mu: int) -> Polynomial:
        """``p_v + sum_e E_{e,v} q_e`` for component ``mu``; zero for v != base."""
        total = Polynomial.constant(0)
        if v in self.external_vertices:
            total = Polynomial.variable(f"{self.external_names[self.external_vertices.index(v)]}_{mu}")
        for e in self.graph.edges:
            s = self.incidence(e.id, v)
            if s:
                total = total + self.momentum(e.id, mu).scale(s)
        return total

    def loop_gram(self, alphas: Sequence | None = None) -> SymbolicMatrix:
        """h1 x h1 matrix ``sum_e alpha_e c_j^e c_l^e``."""
        g = self.graph
        if alphas is None:
            alphas = [Polynomial.variable(a) for a in g.alpha_names()]
        h = len(self.loop_names)
        rows = []
        for j in range(h):
            row = []
            for l in range(h):
                acc = Polynomial.constant(0)
                for e, a in zip(g.edges, alphas):
                    c = self.loop[e.id][j] * self.loop[e.id][l]
                    if c:
                        acc = acc + a * c
                row.append(acc)
            rows.append(row)
        return SymbolicMatrix(rows, h)


def _linear(coeffs: Mapping[str, int]) -> Polynomial:
    names = sorted(coeffs)
    n = len(names)
    return Polynomial(
        {tuple(int(i == j) for j in range(n)): coeffs[name] for i, name in enumerate(names)}, names
    )


def default_base(g: FeynmanGraph) -> str:
    ext = [v for v in g.vertices if g.phi(v)]
    return ext[-1] if ext else g.vertices[-1]


def build_routing(g: FeynmanGraph, v0: str | None = None) -> Routing:
    """Spanning-tree routing with loop momenta on the earliest possible edges.

    The tree is grown greedily from the last edge backwards, so that chords
    (and hence loop momenta k_1, k_2, ...) sit on the earliest edges in input
    order.  Tree-edge momenta follow from conservation summed over the subtree
    cut off by the edge.
    """
    if not g.vertices:
        raise GraphError("empty graph")
    if not g.is_connected():
        raise GraphError("routing requires a connected graph")
    v0 = default_base(g) if v0 is None else str(v0)
    if v0 not in g.vertex_index:
        raise GraphError(f"unknown base vertex {v0!r}")
    uf = _UnionFind(g.vertices)
    tree = set()
    for e in reversed(g.edges):
        if uf.union(*e.ends):
            tree.add(e.id)
    chords = tuple(e.id for e in g.edges if e.id not in tree)
    tree_ids = tuple(e.id for e in g.edges if e.id in tree)
    h = len(chords)
    loop_names = ("k",) if h == 1 else tuple(f"k{j + 1}" for j in range(h))
    ext_vs = tuple(v for v in g.vertices if g.phi(v) and v != v0)
    ext_names = ("p",) if len(ext_vs) == 1 else tuple(f"p{v}" for v in ext_vs)
    orientation = {e.id: e.ends for e in g.edges}

    loop: dict[str, tuple] = {}
    ext: dict[str, tuple] = {}
    for j, eid in enumerate(chords):
        loop[eid] = tuple(int(i == j) for i in range(h))
        ext[eid] = (0,) * len(ext_vs)

    # root the tree at v0
    adj: dict[str, list[tuple[str, str]]] = {v: [] for v in g.vertices}
    for eid in tree_ids:
        a, b = orientation[eid]
        adj[a].append((eid, b))
        adj[b].append((eid, a))
    parent_edge: dict[str, str] = {}
    order = [v0]
    seen = {v0}
    for v in order:
        for eid, w in adj[v]:
            if w not in seen:
                seen.add(w)
                parent_edge[w] = eid
                order.append(w)
    below: dict[str, set] = {v: {v} for v in g.vertices}
    for v in reversed(order[1:]):
        eid = parent_edge[v]
        a, b = orientation[eid]
        parent = a if b == v else b
        below[parent] |= below[v]

    def inc(eid, v):
        tail, head = orientation[eid]
        if tail == head:
            return 0
        return 1 if v == head else -1 if v == tail else 0

    for v in order[1:]:
        eid = parent_edge[v]
        sub = below[v]
        # inc(e, v) * q_e = -(sum_{u in sub} p_u + sum_{chords f} inc(f, u in sub) k_f)
        lc = [0] * h
        for j, fid in enumerate(chords):
            for u in sub:
                lc[j] -= inc(fid, u)
        pc = [-int(u in sub) for u in ext_vs]
        s = inc(eid, v)
        loop[eid] = tuple(s * x for x in lc)
        ext[eid] = tuple(s * x for x in pc)

    return Routing(g, v0, orientation, tree_ids, chords, loop_names, ext_vs, ext_names, loop, ext)


# --- Symanzik polynomial ----------------------------------------------------


def spanning_trees(g: FeynmanGraph) -> list[tuple[str, ...]]:
    """All spanning trees, as edge-id tuples in input order."""
    if not g.is_connected():
        raise GraphError("spanning trees require a connected graph")
    k = len(g.vertices) - 1
    cand = [e for e in g.edges if not e.is_self_loop]
    out = []
    for combo in itertools.combinations(cand, k):
        uf = _UnionFind(g.vertices)
        if all(uf.union(*e.ends) for e in combo):
            out.append(tuple(e.id for e in combo))
    return out


def symanzik_first(g: FeynmanGraph) -> Polynomial:
    """Sum over spanning trees T of the product of alpha_e over edges not in T."""
    names = g.alpha_names()
    total: dict = {}
    for tree in spanning_trees(g):
        ts = set(tree)
        e = tuple(0 if x.id in ts else 1 for x in g.edges)
        total[e] = total.get(e, 0) + 1
    return Polynomial(total, names)


def symanzik_determinant(g: FeynmanGraph, routing: Routing | None = None) -> Polynomial:
    """Determinant of the alpha-weighted loop Gram matrix of a routing."""
    r = routing or build_routing(g)
    return determinant(r.loop_gram())
