import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadlandau.corpus import one_pi_graphs, random_character
from quadlandau.fixtures import bubble_graph, nested_bubble_graph, tree_graph
from quadlandau.graph import Edge, FeynmanGraph, contract, enumerate_divergent_subgraphs
from quadlandau.renorm import (
    Birkhoff,
    Character,
    GraphSum,
    LaurentSeries,
    MinimalSubtraction,
    MomentumSubtraction,
    NumericSampler,
    RenormError,
    SchemeError,
    TensorSum,
    antipode,
    birkhoff,
    canonical_graph,
    canonical_key,
    closure,
    convolve,
    coproduct,
    iterated_coproduct,
    physical_limit,
    reduced_coproduct,
)
from quadlandau.renorm import _split_components, _sub
from quadlandau.symbolic import GaussianRational, Polynomial, RationalFunction, parse_polynomial

CORPUS = one_pi_graphs(4, 3)
ZERO = GaussianRational(0)


def log_closed(graphs):
    return [g for g in graphs if all(canonical_graph(k).omega() == ZERO for k in closure([g]))]


def relabel(g, rng):
    vs = list(g.vertices)
    new = [f"x{i}" for i in range(len(vs))]
    rng.shuffle(new)
    ren = dict(zip(vs, new))
    edges = [Edge(f"f{i}", tuple(ren[v] for v in (e.ends if rng.random() < 0.5 else e.ends[::-1])), e.mass, e.exponent)
             for i, e in enumerate(g.edges)]
    rng.shuffle(edges)
    return FeynmanGraph(tuple(new), tuple(edges), {ren[v]: g.phi(v) for v in vs}, g.dimension,
                        {ren[v]: g.weight(v) for v in vs})


def s_inv(B):
    return lambda mono: B.minus_sum(antipode(GraphSum({mono: 1})))


class TestCanonical:
    def test_relabeling_invariant(self):
        rng = random.Random(3)
        for g in CORPUS:
            for _ in range(3):
                assert canonical_key(relabel(g, rng)) == canonical_key(g)

    def test_corpus_pairwise_distinct(self):
        keys = {canonical_key(g) for g in CORPUS}
        assert len(keys) == len(CORPUS)

    def test_masses_and_legs_distinguish(self):
        b = bubble_graph()
        same = FeynmanGraph(("a", "b"), (Edge("1", ("a", "b"), "m1"), Edge("2", ("a", "b"), "m1")), {"a": 1, "b": 1})
        legs = FeynmanGraph(b.vertices, b.edges, {"a": 2, "b": 1})
        assert len({canonical_key(b), canonical_key(same), canonical_key(legs)}) == 3

    def test_representative_round_trip(self):
        for g in CORPUS[:10]:
            assert canonical_key(canonical_graph(g)) == canonical_key(g)


class TestCoproduct:
    def test_bubble_primitive(self):
        b = bubble_graph()
        k = canonical_key(b)
        assert coproduct(b) == TensorSum({((k,), ()): 1, ((), (k,)): 1})
        assert reduced_coproduct(b) == TensorSum()

    def test_tree_rejected(self):
        with pytest.raises(RenormError):
            coproduct(tree_graph())
        with pytest.raises(RenormError):
            antipode(tree_graph())

    def test_nested_bubble(self):
        g = nested_bubble_graph()
        terms = reduced_coproduct(g).terms
        assert len(terms) == 1
        ((left, right), c), = terms.items()
        assert c == 1 and len(left) == 1 and len(right) == 1
        inner, outer = canonical_graph(left[0]), canonical_graph(right[0])
        # inner: the 3-4 bubble; outer: a bubble whose collapsed vertex has weight 0
        assert len(inner.edges) == 2 and inner.h1 == 1 and inner.omega() == ZERO
        assert len(outer.edges) == 2 and outer.h1 == 1 and not any(outer.weights)
        assert len(coproduct(g).terms) == 3

    def test_coassociative_on_corpus(self):
        for g in CORPUS:
            assert iterated_coproduct(g, "left") == iterated_coproduct(g, "right")

    def test_edge_only_counting_breaks_coassociativity(self):
        def delta(key):
            g = canonical_graph(key)
            out = {((key,), ()): 1, ((), (key,)): 1}
            for gamma in enumerate_divergent_subgraphs(g):
                left = tuple(sorted(canonical_key(_sub(g, p)) for p in _split_components(g, gamma)))
                t = (left, (canonical_key(contract(g, gamma)),))
                out[t] = out.get(t, 0) + 1
            return out

        def delta_mono(m):
            out = {((), ()): 1}
            for k in m:
                new = {}
                for (a, b), c in out.items():
                    for (x, y), d in delta(k).items():
                        t = (tuple(sorted(a + x)), tuple(sorted(b + y)))
                        new[t] = new.get(t, 0) + c * d
                out = new
            return out

        broken = 0
        for g in CORPUS:
            L, R = {}, {}
            for (a, b), c in delta(canonical_key(g)).items():
                for (x, y), d in delta_mono(a).items():
                    L[(x, y, b)] = L.get((x, y, b), 0) + c * d
                for (x, y), d in delta_mono(b).items():
                    R[(a, x, y)] = R.get((a, x, y), 0) + c * d
            if {t: c for t, c in L.items() if c} != {t: c for t, c in R.items() if c}:
                broken += 1
        assert broken > 0


class TestAntipode:
    def test_primitive(self):
        b = bubble_graph()
        assert antipode(b) == GraphSum.of(b, coeff=-1)

    def test_unit(self):
        assert antipode(GraphSum.unit()) == GraphSum.unit()

    def test_nested_bubble(self):
        g = nested_bubble_graph()
        ((left, right), _), = reduced_coproduct(g).terms.items()
        expect = GraphSum.of(g, coeff=-1) + GraphSum({tuple(sorted(left + right)): 1})
        assert antipode(g) == expect

    def test_axiom_on_corpus(self):
        for g in CORPUS:
            lhs, rhs = GraphSum(), GraphSum()
            for (a, b), c in coproduct(g).terms.items():
                lhs = lhs + antipode(GraphSum({a: c})) * GraphSum({b: 1})
                rhs = rhs + GraphSum({a: c}) * antipode(GraphSum({b: 1}))
            assert not lhs and not rhs

    def test_grading(self):
        for g in CORPUS:
            for mono, _ in antipode(g):
                assert sum(canonical_graph(k).h1 for k in mono) == g.h1


def series_from(lo, hi, coeffs):
    return LaurentSeries({lo + i: c for i, c in enumerate(coeffs)}, lo, hi)


coef = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def series(draw):
    lo = draw(st.integers(-3, 1))
    hi = draw(st.integers(lo, 4))
    cs = draw(st.lists(coef, min_size=hi - lo + 1, max_size=hi - lo + 1))
    return series_from(lo, hi, cs), cs


def dense(s, lo, hi):
    return [Fraction(str(s.coefficient(k).constant_value())) for k in range(lo, hi + 1)]


class TestLaurent:
    @settings(max_examples=60, deadline=None)
    @given(series(), series())
    def test_product_matches_convolution(self, a, b):
        (sa, ca), (sb, cb) = a, b
        prod = sa * sb
        assert prod.lo == sa.lo + sb.lo
        assert prod.hi == min(sa.hi + sb.lo, sb.hi + sa.lo)
        full = np.convolve(np.array(ca, dtype=object), np.array(cb, dtype=object))
        n = prod.hi - prod.lo + 1
        assert dense(prod, prod.lo, prod.hi) == list(full[:n])

    @settings(max_examples=40, deadline=None)
    @given(series(), series(), series())
    def test_ring_laws(self, a, b, c):
        x, y, z = a[0], b[0], c[0]
        lhs, rhs = (x * y) * z, x * (y * z)
        hi = min(lhs.hi, rhs.hi)
        assert lhs.equals_on(rhs, min(lhs.lo, rhs.lo), hi)
        d1, d2 = x * (y + z), x * y + x * z
        hi = min(d1.hi, d2.hi)
        assert d1.equals_on(d2, min(d1.lo, d2.lo), hi)
        assert (x * y).equals_on(y * x, x.lo + y.lo, (x * y).hi)

    def test_split_parts(self):
        s = series_from(-2, 3, [1, 2, 3, 4, 5, 6])
        assert sorted(s.principal_part().coeffs) == [-2, -1]
        assert sorted(s.regular_part().coeffs) == [0, 1, 2, 3]

    def test_physical_limit(self):
        assert physical_limit(series_from(0, 1, [3, 2])) == RationalFunction(Polynomial.constant(3))
        with pytest.raises(RenormError):
            physical_limit(series_from(-1, 0, [1, 3]))

    def test_window_guard(self):
        s = series_from(-1, 1, [1, 2, 3])
        with pytest.raises(RenormError):
            s.coefficient(2)
        with pytest.raises(RenormError):
            s.equals_on(s, -1, 2)

    def test_serialization(self):
        s = LaurentSeries({-1: parse_polynomial("s + m^2"), 0: RationalFunction(parse_polynomial("s"), parse_polynomial("m^2 + 1"))}, -1, 2)
        back = LaurentSeries.from_dict(s.to_dict())
        assert back.window() == s.window() and back.equals_on(s, -1, 2)


class TestBirkhoff:
    def test_primitive_min(self):
        b = bubble_graph()
        phi = Character({b: series_from(-1, 1, [2, 3, 5])})
        minus, plus = birkhoff(phi, MinimalSubtraction(), b)
        assert minus.equals_on(series_from(-1, 1, [-2, 0, 0]), -1, 1)
        assert plus.equals_on(series_from(-1, 1, [0, 3, 5]), -1, 1)

    def test_primitive_mom(self):
        b = bubble_graph()
        c = RationalFunction(parse_polynomial("s"), parse_polynomial("s + m1^2"))
        phi = Character({b: LaurentSeries({-1: 1, 0: c}, -1, 1)})
        minus, plus = birkhoff(phi, MomentumSubtraction({2: {"s": 1}}), b)
        mu = c.subs({"s": 1})
        assert plus.coefficient(0) == c - mu
        assert plus.coefficient(-1).is_zero()
        assert minus.coefficient(0) == -mu

    def test_toy_nested_bubble(self):
        g = nested_bubble_graph()
        ((left, right), _), = reduced_coproduct(g).terms.items()
        inv = series_from(-1, 3, [1, 0, 0, 0, 0])
        phi = Character({left[0]: inv, right[0]: inv, g: series_from(-2, 3, [1, 1, 0, 0, 0, 0])})
        B = Birkhoff(phi, MinimalSubtraction())
        assert B.bar(g).equals_on(series_from(-2, 2, [0, 1, 0, 0, 0]), -2, 2)
        assert B.minus(g).equals_on(series_from(-2, 2, [0, -1, 0, 0, 0]), -2, 2)
        assert B.plus(g).equals_on(series_from(-2, 2, [0] * 5), -2, 2)

    def test_identity_min_on_corpus(self):
        phi = random_character(CORPUS, random.Random(1))
        B = Birkhoff(phi, MinimalSubtraction())
        for g in CORPUS:
            lhs = convolve(s_inv(B), B.plus_monomial, g)
            assert lhs.hi >= 3
            assert lhs.equals_on(phi.single(g), -3, 3)
            assert all(k < 0 for k in B.minus(g).coeffs)
            assert all(k >= 0 for k in B.plus(g).coeffs)

    def test_identity_mom_on_log_divergent_corpus(self):
        graphs = log_closed(CORPUS)
        assert len(graphs) >= 10
        phi = random_character(graphs, random.Random(2))
        ref = {n: {"s": Fraction(n, 3)} for n in range(1, 9)}
        B = Birkhoff(phi, MomentumSubtraction(ref))
        for g in graphs:
            lhs = convolve(s_inv(B), B.plus_monomial, g)
            assert lhs.equals_on(phi.single(g), -3, 3)
            mu = ref[canonical_graph(g).n_external]
            assert all(c.subs(mu).is_zero() for c in B.plus(g).coeffs.values())

    def test_mom_refuses_non_logarithmic(self):
        g = next(g for g in CORPUS if g.omega() != ZERO)
        phi = random_character([g], random.Random(0))
        with pytest.raises(SchemeError):
            birkhoff(phi, MomentumSubtraction({n: {"s": 1} for n in range(9)}), g)

    def test_missing_reference(self):
        b = bubble_graph()
        phi = Character({b: series_from(-1, 0, [1, 1])})
        with pytest.raises(SchemeError):
            birkhoff(phi, MomentumSubtraction({4: {"s": 1}}), b)

    def test_undefined_character(self):
        with pytest.raises(RenormError):
            birkhoff(Character({}), MinimalSubtraction(), bubble_graph())

    def test_multiplicative_on_products(self):
        phi = random_character(CORPUS, random.Random(4))
        B = Birkhoff(phi, MinimalSubtraction())
        keys = [canonical_key(g) for g in CORPUS[:12]]
        for a, b in itertools.combinations(keys, 2):
            mono = tuple(sorted((a, b)))
            m, p = B.recursive_monomial(mono)
            pm, pp = B.minus_monomial(mono), B.plus_monomial(mono)
            assert m.equals_on(pm, -6, min(m.hi, pm.hi))
            assert p.equals_on(pp, -6, min(p.hi, pp.hi))

    def test_multiplicative_mom_same_legs(self):
        graphs = log_closed(CORPUS)
        phi = random_character(graphs, random.Random(5))
        B = Birkhoff(phi, MomentumSubtraction({n: {"s": 2} for n in range(9)}))
        keys = [canonical_key(g) for g in graphs]
        pairs = [(a, b) for a, b in itertools.combinations(keys, 2)
                 if canonical_graph(a).n_external == canonical_graph(b).n_external]
        assert pairs
        for a, b in pairs[:6]:
            mono = tuple(sorted((a, b)))
            m, _ = B.recursive_monomial(mono)
            pm = B.minus_monomial(mono)
            assert m.equals_on(pm, -6, min(m.hi, pm.hi))


class TestSampler:
    def lifted(self, phi):
        return Character({k: s.map(NumericSampler.lift) for k, s in phi.values.items()})

    def test_matches_rational_realization(self):
        graphs = log_closed(CORPUS)[:5]
        phi = random_character(graphs, random.Random(6))
        num = self.lifted(phi)
        rng = np.random.default_rng(0)
        points = [{"s": complex(*rng.normal(size=2)), "m": complex(*rng.normal(size=2))} for _ in range(3)]
        for scheme in (MinimalSubtraction(), MomentumSubtraction({n: {"s": 1} for n in range(9)})):
            B, Bn = Birkhoff(phi, scheme), Birkhoff(num, scheme)
            for g in graphs:
                for exact, approx in ((B.minus(g), Bn.minus(g)), (B.plus(g), Bn.plus(g))):
                    hi = min(exact.hi, 3)
                    assert approx.equals_on(exact, -3, hi, points)

    def test_domain_violation(self):
        b = bubble_graph()
        c = NumericSampler(lambda pt: 1 / (pt["s"] - 1), domain=lambda pt: pt.get("s") != 1)
        phi = Character({b: LaurentSeries({-1: 1, 0: c}, -1, 1)})
        with pytest.raises(SchemeError):
            birkhoff(phi, MomentumSubtraction({2: {"s": 1}}), b)
