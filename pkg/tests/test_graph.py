import itertools
import json
import random
from fractions import Fraction

import pytest

from quadlandau.corpus import connected_multigraphs, one_pi_graphs
from quadlandau.fixtures import bubble_graph, nested_bubble_graph, sunrise_graph, tree_graph
from quadlandau.graph import (
    Edge,
    FeynmanGraph,
    GraphError,
    build_routing,
    contract,
    enumerate_1pi_subgraphs,
    enumerate_divergent_subgraphs,
    omega,
    spanning_trees,
    symanzik_determinant,
    symanzik_first,
)
from quadlandau.symbolic import GaussianRational, Polynomial, parse_polynomial

SMALL = list(connected_multigraphs(3, 4))


def _brute_divergent(g):
    """Exhaustive scan of all edge subsets, the slow way."""
    out = []
    n = len(g.edges)
    for k in range(1, n):
        for combo in itertools.combinations(g.edges, k):
            ids = [e.id for e in combo]
            sub = g.subgraph(ids)
            comps = sub.components()
            ok = True
            for comp in comps:
                ce = [e.id for e in sub.edges if e.ends[0] in comp]
                piece = sub.subgraph(ce)
                if piece.h1 < 1 or not piece.is_1pi() or omega(g, ce).re > 0:
                    ok = False
                    break
            if ok:
                out.append(tuple(ids))
    return sorted(out)


class TestRouting:
    def test_bubble_labels(self):
        r = build_routing(bubble_graph())
        assert [r.label(e.id) for e in r.graph.edges] == ["k", "p - k"]
        assert r.chords == ("1",)

    def test_sunrise_labels(self):
        r = build_routing(sunrise_graph())
        assert [r.label(e.id) for e in r.graph.edges] == ["k1", "k2", "p - k1 - k2"]

    def test_tree_has_no_loops(self):
        r = build_routing(tree_graph())
        assert r.loop_names == ()
        assert r.label("1") in ("p", "-p")

    def test_disconnected_rejected(self):
        g = FeynmanGraph(("a", "b"), (), {"a": 1, "b": 1})
        with pytest.raises(GraphError):
            build_routing(g)

    def test_chord_carries_own_momentum(self):
        for g in SMALL:
            r = build_routing(g)
            for j, c in enumerate(r.chords):
                assert r.loop[c][j] == 1
                assert sum(abs(x) for x in r.loop[c]) == 1

    def test_conservation_corpus(self):
        for g in connected_multigraphs(4, 5):
            r = build_routing(g)
            for v in g.vertices:
                if v == r.base:
                    continue
                for mu in range(g.dimension):
                    assert r.conservation(v, mu).is_zero()

    def test_self_loop_is_chord_without_external_part(self):
        g = FeynmanGraph(("a", "b"), (Edge("1", ("a", "a")), Edge("2", ("a", "b"))), {"a": 1, "b": 1})
        r = build_routing(g)
        assert "1" in r.chords
        assert not any(r.ext["1"])
        assert r.incidence("1", "a") == 0

    def test_orientation_flip_preserves_squares(self):
        rng = random.Random(3)
        for g in [g for g in SMALL if g.edges][:40]:
            eid = rng.choice(g.edges).id
            r1, r2 = build_routing(g), build_routing(g.flipped(eid))
            # flipping a chord reverses the direction of its own loop momentum
            back = {}
            if eid in r2.chords:
                k = r2.loop_names[r2.chords.index(eid)]
                back = {f"{k}_{mu}": -Polynomial.variable(f"{k}_{mu}") for mu in range(4)}
            for e in g.edges:
                sign = -1 if e.id == eid else 1
                for mu in range(4):
                    assert r2.momentum(e.id, mu).subs(back) == r1.momentum(e.id, mu).scale(sign)
                s1 = sum((r1.momentum(e.id, mu) ** 2 for mu in range(4)), Polynomial.constant(0))
                s2 = sum((r2.momentum(e.id, mu).subs(back) ** 2 for mu in range(4)), Polynomial.constant(0))
                assert s1 == s2


class TestSymanzik:
    def test_examples(self):
        assert symanzik_first(bubble_graph()) == parse_polynomial("alpha1 + alpha2")
        assert symanzik_first(sunrise_graph()) == parse_polynomial(
            "alpha1*alpha2 + alpha1*alpha3 + alpha2*alpha3"
        )
        assert symanzik_first(tree_graph()) == Polynomial.constant(1)

    def test_tree_count(self):
        assert len(spanning_trees(sunrise_graph())) == 3
        assert len(spanning_trees(bubble_graph())) == 2

    def test_determinant_identity(self):
        for g in SMALL:
            assert symanzik_determinant(g) == symanzik_first(g)

    def test_positive_on_random_nonnegative_samples(self):
        rng = random.Random(1)
        for g in SMALL[:30]:
            u = symanzik_first(g)
            names = g.alpha_names()
            for _ in range(20):
                a = {x: Fraction(rng.expovariate(1.0)) for x in names}
                assert u.subs(a).constant_value().re > 0

    def test_nonnegative_but_vanishes_on_boundary_faces(self):
        # alpha = (1, 0, 0) leaves no spanning-tree complement with all weights nonzero
        u = symanzik_first(sunrise_graph())
        assert u.subs({"alpha1": 1, "alpha2": 0, "alpha3": 0}).is_zero()
        rng = random.Random(2)
        for g in SMALL[:30]:
            u = symanzik_first(g)
            for _ in range(10):
                a = {x: rng.randint(0, 2) for x in g.alpha_names()}
                assert u.subs(a).constant_value().re >= 0


class TestSubgraphs:
    def test_bubble_has_no_divergent_proper_subgraph(self):
        g = bubble_graph()
        assert omega(g, ["1", "2"]) == GaussianRational(0)
        assert enumerate_divergent_subgraphs(g) == []

    def test_tree(self):
        assert enumerate_divergent_subgraphs(tree_graph()) == []

    def test_nested_bubble(self):
        g = nested_bubble_graph()
        assert g.is_1pi() and g.omega() == GaussianRational(0)
        assert enumerate_divergent_subgraphs(g) == [("3", "4")]

    def test_divergent_matches_exhaustive_scan(self):
        for g in one_pi_graphs(3, 3):
            assert sorted(enumerate_divergent_subgraphs(g)) == _brute_divergent(g)

    def test_1pi_pieces_are_1pi(self):
        for g in one_pi_graphs(3, 3):
            for s in enumerate_1pi_subgraphs(g):
                sub = g.subgraph(s)
                assert sub.is_1pi() and sub.h1 >= 1 and sub.is_connected()


class TestContraction:
    def test_bubble_edge(self):
        c = contract(bubble_graph(), ["1"])
        assert len(c.vertices) == 1 and len(c.edges) == 1
        assert c.edges[0].is_self_loop
        assert c.phi(c.vertices[0]) == 2

    def test_empty_is_identity(self):
        g = sunrise_graph()
        assert contract(g, []) == g

    def test_nested_gives_bubble(self):
        c = contract(nested_bubble_graph(), ["3", "4"])
        assert len(c.vertices) == 2 and [e.id for e in c.edges] == ["1", "2"]
        assert c.h1 == 1 and c.is_1pi()

    def test_unknown_edge(self):
        with pytest.raises(GraphError):
            contract(bubble_graph(), ["9"])

    def test_loop_additivity(self):
        for g in one_pi_graphs(4, 3):
            for gamma in enumerate_1pi_subgraphs(g, proper=True):
                assert contract(g, gamma).h1 + g.subgraph(gamma).h1 == g.h1

    def test_weight_keeps_omega(self):
        for g in one_pi_graphs(3, 3):
            for gamma in enumerate_divergent_subgraphs(g):
                assert contract(g, gamma, carry_weight=True).omega() == g.omega()


class TestSerialization:
    def test_round_trip(self):
        for g in SMALL[:20] + [nested_bubble_graph()]:
            d = json.loads(json.dumps(g.to_dict()))
            assert FeynmanGraph.from_dict(d) == g

    def test_rejects_unknown_fields(self):
        d = bubble_graph().to_dict()
        d["colour"] = 1
        with pytest.raises(GraphError):
            FeynmanGraph.from_dict(d)

    def test_rejects_bad_endpoint(self):
        d = bubble_graph().to_dict()
        d["edges"][0]["ends"] = ["a", "zz"]
        with pytest.raises(GraphError):
            FeynmanGraph.from_dict(d)
