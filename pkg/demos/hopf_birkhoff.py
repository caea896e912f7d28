"""
Subdivergences and the Birkhoff decomposition
=============================================

The two-loop graph with a bubble inserted in a bubble has one divergent
subgraph.  The coproduct records it, the antipode inverts it, and a toy
Laurent-series character splits into a pole part and a finite part.
"""

import random
from fractions import Fraction

from quadlandau.corpus import one_pi_graphs, random_character
from quadlandau.fixtures import nested_bubble_graph
from quadlandau.renorm import (
    Birkhoff,
    MinimalSubtraction,
    MomentumSubtraction,
    antipode,
    canonical_graph,
    closure,
    coproduct,
    describe,
)

g = nested_bubble_graph()
print("graph:", describe(g))
print("coproduct:")
print(coproduct(g).format())
print("antipode:")
print(antipode(g).format())

# %%
# A toy character: every graph in the closure gets a random rational-function
# Laurent series with poles up to order h1.
phi = random_character([g], random.Random(0), hi=3)
print("phi(G) =", phi.single(g))

# Minimal subtraction leaves phi_+ free of poles.  Momentum subtraction only
# guarantees that phi_+ vanishes at the reference point; a random character
# has s-dependent poles, so some survive in phi_+ here.
for scheme in (MinimalSubtraction(), MomentumSubtraction({n: {"s": Fraction(1, 2)} for n in range(1, 5)})):
    B = Birkhoff(phi, scheme)
    print(f"[{scheme.name}] phi_- =", B.minus(g))
    print(f"[{scheme.name}] phi_+ =", B.plus(g))

# %%
# How many graphs of the small corpus involve nothing but logarithmic
# divergences, so that momentum subtraction applies throughout?
corpus = one_pi_graphs(4, 3)
log = [h for h in corpus if all(canonical_graph(k).omega() == 0 for k in closure([h]))]
print(f"{len(log)} of {len(corpus)} corpus graphs are logarithmic all the way down")
