"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and repeated in the pytest terminal summary.
Run on its own with ``pytest tests/test_acceptance.py -v``.
"""
import cmath
import json
import random
import time
from fractions import Fraction

from quadlandau.cli import main as cli_main
from quadlandau.corpus import connected_multigraphs, one_pi_graphs, random_character, random_symmetric_family
from quadlandau.fixtures import bubble, bubble_graph, sunrise, two_quadrics
from quadlandau.graph import omega, symanzik_determinant, symanzik_first
from quadlandau.landau import Witness, generate_landau_system, is_physical, physical_point_issues
from quadlandau.quadform import principal_minor_test
from quadlandau.regularize import build_regulator, diagonalize_family, regularize_integral
from quadlandau.renorm import (
    Birkhoff,
    GraphSum,
    MinimalSubtraction,
    MomentumSubtraction,
    antipode,
    canonical_graph,
    closure,
    convolve,
    coproduct,
    iterated_coproduct,
)
from quadlandau.solver import SolveConfig, membership_test, physical_slice_search, verify_witness
from quadlandau.symbolic import GaussianRational, determinant

RESULTS: list[str] = []

def record(number, title, checks, elapsed, limit=None):
    """Print and store the verdict line, then assert every named check."""
    failed = [name for name, ok in checks if not ok]
    timing = f"{elapsed:.1f}s" + (f" (limit {limit}s)" if limit else "")
    if limit is not None and elapsed >= limit:
        failed.append(f"runtime {elapsed:.1f}s >= {limit}s")
    verdict = "PASS" if not failed else "FAIL"
    line = f"criterion {number} [{verdict}] {title}: {len(checks) - len(failed)}/{len(checks)} checks, {timing}"
    if failed:
        line += " ; failed: " + ", ".join(failed[:5])
    print(line)
    RESULTS.append(line)
    assert not failed, line

# -- 1 ----------------------------------------------------------------------

def test_criterion_1_simple_scan(capsys):
    t0 = time.perf_counter()
    code = cli_main(["landau", "scan", "simple", "--grid", "t.re=-2:2:41;t.im=-2:2:41", "--json"])
    doc = json.loads(capsys.readouterr().out)
    elapsed = time.perf_counter() - t0
    reports = doc["reports"]
    members = [complex(*r["point"]["t"]) for r in reports if r["verdict"] == "member"]
    near = [complex(*r["point"]["t"]) for r in reports if abs(complex(*r["point"]["t"])) < 1e-3]
    checks = [
        ("exit code 0", code == 0),
        ("41x41 points", len(reports) == 41 * 41),
        ("members are exactly the points near 0", sorted(members, key=abs) == sorted(near, key=abs) and len(near) == 1),
        ("member witnesses below tau", all(r["witness"]["residual"] < 1e-9 for r in reports if r["witness"])),
    ]
    record(1, "simple family scan finds only t = 0", checks, elapsed, 60)

# -- 2 ----------------------------------------------------------------------

ROOTS = [s * cmath.sqrt((1 + e * 1j) / 2) for s in (1, -1) for e in (1, -1)]
LANDAU_TWO_QUADRICS = [0, 2, -2] + ROOTS

def test_criterion_2_two_quadrics_membership():
    t0 = time.perf_counter()
    sysm = generate_landau_system(two_quadrics(), "finite")
    cfg = SolveConfig(seed=0)
    checks = []
    for t in LANDAU_TWO_QUADRICS:
        rep = membership_test(sysm, {"t": t}, cfg)
        ok = rep.member and rep.witness.residual < 1e-9 and verify_witness(sysm, rep.witness)["accepted"]
        checks.append((f"member at t={t:.4g}", ok))
    rng = random.Random(2)
    far = []
    while len(far) < 10:
        t = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        if min(abs(t - s) for s in LANDAU_TWO_QUADRICS) > 0.1:
            far.append(t)
    for t in far:
        checks.append((f"no witness at t={t:.3g}", not membership_test(sysm, {"t": t}, cfg).member))
    record(2, "two-quadric family: 7 members, 10 distant non-members", checks, time.perf_counter() - t0, 30)

# -- 3 ----------------------------------------------------------------------

def test_criterion_3_bubble():
    t0 = time.perf_counter()
    fin = generate_landau_system(bubble(), "finite")
    w = Witness((2 / 3, 1 / 3), (1, 1j, 0, 0, 0), (3j, 0, 0, 0, 1, 2), float("nan"), "{1,2}", "finite")
    rep = verify_witness(fin, w)
    checks = [
        ("(a) residual < 1e-12", rep["residual"] < 1e-12),
        ("(a) omitted u-row vanishes", max(rep["omitted"]) < 1e-12),
        ("(a) witness is physical", is_physical(fin, w)),
    ]
    inf = generate_landau_system(bubble(), "infinity")
    lightlike = {"p_0": 2j, "p_1": 2, "p_2": 0, "p_3": 0, "m1": 1, "m2": 2}
    params = [lightlike[p] for p in inf.parameters]
    found = physical_slice_search(inf, lightlike, seed=0)
    checks += [
        ("(b) p^2 = 0 point is physical", not physical_point_issues(inf, params)),
        ("(b) real-slice solution at p^2 = 0", bool(found)),
        ("(b) it verifies below tau", all(verify_witness(inf, x)["accepted"] for x in found)),
    ]
    rng = random.Random(3)
    hits = 0
    for i in range(20):
        space = [rng.uniform(-1, 1) for _ in range(3)]
        energy = (sum(x * x for x in space) + rng.uniform(0.6, 4)) ** 0.5
        point = {"p_0": 1j * energy, "p_1": space[0], "p_2": space[1], "p_3": space[2],
                 "m1": rng.uniform(0.5, 2), "m2": rng.uniform(0.5, 2)}
        assert not physical_point_issues(inf, [point[p] for p in inf.parameters])
        ws = physical_slice_search(inf, point, seed=i)
        # stronger than asked: not even a real-slice solution of either alpha sign
        hits += bool(ws)
    checks.append(("(b) nothing physical at 20 points with p^2 < -0.5", hits == 0))
    record(3, "bubble threshold witness and second-type solutions", checks, time.perf_counter() - t0)

# -- 4 ----------------------------------------------------------------------

def test_criterion_4_symanzik_corpus():
    t0 = time.perf_counter()
    rng = random.Random(4)
    graphs = list(connected_multigraphs(4, 6))
    identity = agree = positive = True
    for g in graphs:
        tree_route = symanzik_first(g)
        det_route = symanzik_determinant(g)
        identity &= tree_route == det_route
        names = g.alpha_names()
        for _ in range(5):
            a = {x: Fraction(rng.randint(-30, 30), rng.randint(1, 12)) for x in names}
            agree &= tree_route.subs(a) == det_route.subs(a)
        for _ in range(100):
            a = {x: Fraction(rng.randint(1, 400), rng.randint(1, 40)) for x in names}
            positive &= tree_route.subs(a).constant_value().re > 0
    checks = [
        (f"{len(graphs)} corpus graphs", len(graphs) > 200),
        ("polynomial identity", identity),
        ("5 rational samples agree per graph", agree),
        ("U > 0 on 100 positive samples per graph", positive),
    ]
    record(4, "determinant vs spanning-tree construction", checks, time.perf_counter() - t0, 120)

# -- 5 ----------------------------------------------------------------------

def test_criterion_5_bubble_power_count():
    t0 = time.perf_counter()
    g = bubble_graph()
    w = omega(g, [e.id for e in g.edges])
    checks = [("omega(B2) == 0 exactly", w == GaussianRational(0)), ("B2 has two edges, one loop", (len(g.edges), g.h1) == (2, 1))]
    record(5, "superficial degree of the one-loop bubble", checks, time.perf_counter() - t0)

# -- 6 ----------------------------------------------------------------------

def _is_diagonal(m):
    return all(m[i, j].is_zero() for i in range(m.rows) for j in range(m.cols) if i != j)

def test_criterion_6_regularization():
    t0 = time.perf_counter()
    rng = random.Random(6)
    diag_ok = rank_ok = True
    sizes = []
    for i in range(20):
        n = rng.randint(1, 4)
        params = ("s", "t")[: rng.randint(0, 2)]
        M = random_symmetric_family(rng, n, parameters=params, degree=rng.randint(0, 2),
                                    rank=None if i % 2 else rng.randint(0, n))
        sizes.append(n)
        d = diagonalize_family(M)
        TMT = d.T.transpose() @ M @ d.T
        diag_ok &= _is_diagonal(TMT) and [TMT[j, j] for j in range(n)] == list(d.diagonal)
        reg = build_regulator(M)
        rank_ok &= not determinant(reg.regularized()).is_zero()
    I = sunrise()
    pt = {f"p_{mu}": v for mu, v in enumerate([1, 2, 0, 1])}
    pt.update(m1=1, m2=2, m3=3)
    out, _ = regularize_integral(I, pt)
    pd_ok = True
    for eps in (Fraction(1, 10), 1, 10):
        full = dict(pt, eps=eps)
        for f in out.forms:
            A = [[x.constant_value() for x in row] for row in f.M.subs(full).entries]
            pd_ok &= principal_minor_test(A)[0]
    checks = [
        ("20 families with n <= 4", len(sizes) == 20 and max(sizes) <= 4),
        ("T^T M T diagonal (exact)", diag_ok),
        ("det(M + eps A) not identically zero", rank_ok),
        ("sunrise M + eps A positive definite at eps in {1/10, 1, 10}", pd_ok),
    ]
    record(6, "regularization suite", checks, time.perf_counter() - t0, 60)

# -- 7 ----------------------------------------------------------------------

def test_criterion_7_hopf():
    t0 = time.perf_counter()
    corpus = one_pi_graphs(4, 3)
    coassoc = all(iterated_coproduct(g, "left") == iterated_coproduct(g, "right") for g in corpus)
    axiom = True
    for g in corpus:
        lhs, rhs = GraphSum(), GraphSum()
        for (a, b), c in coproduct(g).terms.items():
            lhs = lhs + antipode(GraphSum({a: c})) * GraphSum({b: 1})
            rhs = rhs + GraphSum({a: c}) * antipode(GraphSum({b: 1}))
        axiom &= not lhs and not rhs

    def s_inv(B):
        return lambda mono: B.minus_sum(antipode(GraphSum({mono: 1})))

    phi = random_character(corpus, random.Random(7))
    B = Birkhoff(phi, MinimalSubtraction())
    min_ok = all(convolve(s_inv(B), B.plus_monomial, g).equals_on(phi.single(g), -3, 3) for g in corpus)

    zero = GaussianRational(0)
    log_graphs = [g for g in corpus if all(canonical_graph(k).omega() == zero for k in closure([g]))]
    ref = {n: {"s": Fraction(n, 3), "m": Fraction(1, 2)} for n in range(1, 9)}
    phi = random_character(log_graphs, random.Random(8))
    B = Birkhoff(phi, MomentumSubtraction(ref))
    mom_ok = all(convolve(s_inv(B), B.plus_monomial, g).equals_on(phi.single(g), -3, 3) for g in log_graphs)
    vanish = all(
        c.subs(ref[canonical_graph(g).n_external]).is_zero() for g in log_graphs for c in B.plus(g).coeffs.values()
    )
    checks = [
        (f"corpus of {len(corpus)} graphs", len(corpus) > 0),
        ("coassociativity", coassoc),
        ("antipode axiom", axiom),
        ("Birkhoff identity to [-3,3], minimal subtraction", min_ok),
        (f"Birkhoff identity to [-3,3], momentum subtraction ({len(log_graphs)} graphs)", mom_ok and bool(log_graphs)),
        ("momentum-subtracted phi_+ vanishes at the reference point", vanish),
    ]
    record(7, "Hopf algebra and Birkhoff decomposition", checks, time.perf_counter() - t0, 60)
