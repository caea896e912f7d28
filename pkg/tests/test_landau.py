import json

import numpy as np
import pytest

from quadlandau.fixtures import bubble, simple, sunrise, two_quadrics
from quadlandau.landau import (
    LandauError,
    LandauSystem,
    BranchSystem,
    Witness,
    enumerate_branches,
    generate_landau_system,
    is_physical,
    witness_residual,
)
from quadlandau.solver import SolveConfig, membership_test, verify_witness
from quadlandau.symbolic import GaussianRational, parse_polynomial

BUBBLE_POINT = {"p_0": "3i", "p_1": 0, "p_2": 0, "p_3": 0, "m1": 1, "m2": 2}


def strs(polys):
    return [str(p) for p in polys]


def bubble_witness(sys):
    params = (3j, 0, 0, 0, 1, 2)
    return Witness((2 / 3, 1 / 3), (1, 1j, 0, 0, 0), params, float("nan"), "{1,2}", sys.chart)


class TestGenerate:
    def test_simple_projective(self):
        s = generate_landau_system(simple(), "projective")
        assert strs(s.onshell) == ["t^2*z0^2 + z1^2"]
        assert strs(s.gradient_equations()) == ["alpha1*t^2*z0", "alpha1*z1"]
        assert s.omitted == ()

    def test_two_quadrics_finite(self):
        s = generate_landau_system(two_quadrics(), "finite")
        assert s.onshell[0] == parse_polynomial("z1^2 + t*z1 + z2^2 + 1")
        assert s.onshell[1] == parse_polynomial("z1^2 + z2^2 + t^2")
        # halved gradient rows of alpha1 (2z1+t, 2z2) + alpha2 (2z1, 2z2)
        assert s.gradient_equations() == [
            parse_polynomial("alpha1*(z1 + t/2) + alpha2*z1"),
            parse_polynomial("alpha1*z2 + alpha2*z2"),
        ]
        assert "z0" not in s.unknowns and len(s.omitted) == 2

    def test_bubble_second_type(self):
        s = generate_landau_system(bubble(), "infinity")
        k2 = parse_polynomial("k_0^2 + k_1^2 + k_2^2 + k_3^2")
        assert list(s.onshell) == [k2, k2]
        rows = s.gradient_equations()
        # u-row carries the external part, the k-rows are (alpha1 + alpha2) k
        assert rows[0] == parse_polynomial("-alpha2*(k_0*p_0 + k_1*p_1 + k_2*p_2 + k_3*p_3)")
        for mu in range(4):
            assert rows[mu + 1] == parse_polynomial(f"(alpha1 + alpha2)*k_{mu}")

    @pytest.mark.parametrize("fixture", [bubble, sunrise])
    def test_second_type_mass_free(self, fixture):
        I = fixture()
        s = generate_landau_system(I, "infinity")
        masses = set(s.layout["masses"])
        for q in s.onshell:
            assert not masses & set(q.variables)
            assert not set(q.variables) & set(s.parameters)

    def test_unknown_chart(self):
        with pytest.raises(LandauError):
            generate_landau_system(simple(), "affine")

    def test_round_trip(self):
        for I in (simple(), two_quadrics(), bubble(), sunrise()):
            for chart in ("projective", "finite", "infinity"):
                s = generate_landau_system(I, chart)
                back = LandauSystem.from_dict(json.loads(s.dumps(seed=3)))
                assert back == s
                assert back.layout == s.layout

    def test_unknown_field_rejected(self):
        d = generate_landau_system(simple()).to_dict()
        d["extra"] = 1
        with pytest.raises(LandauError):
            LandauSystem.from_dict(d)

    def test_bad_polynomial_located(self):
        d = generate_landau_system(simple()).to_dict()
        d["onshell"][0] = "t^2*w"
        with pytest.raises(LandauError, match=r"onshell\[0\]"):
            LandauSystem.from_dict(d)


class TestBranches:
    def test_counts_and_order(self):
        assert [b.id for b in enumerate_branches(generate_landau_system(simple()))] == ["{1}"]
        ids = [b.id for b in enumerate_branches(generate_landau_system(two_quadrics(), "finite"))]
        assert ids == ["{1}", "{2}", "{1,2}"]
        assert len(enumerate_branches(generate_landau_system(sunrise(), "finite"))) == 7

    def test_square_after_projection(self):
        for I in (simple(), two_quadrics(), bubble(), sunrise()):
            for chart in ("projective", "finite", "infinity"):
                for b in enumerate_branches(generate_landau_system(I, chart), 1):
                    assert len(b.square_equations()) == len(b.unknowns) or not b.projection

    def test_seeded(self):
        s = generate_landau_system(two_quadrics())
        a = [b.to_dict() for b in enumerate_branches(s, 7)]
        assert a == [b.to_dict() for b in enumerate_branches(s, 7)]
        assert a != [b.to_dict() for b in enumerate_branches(s, 8)]
        for d, b in zip(a, enumerate_branches(s, 7)):
            assert BranchSystem.from_dict(s, d) == b

    def test_bubble_branch_one_forces_massless(self):
        s = generate_landau_system(bubble(), "finite")
        b = enumerate_branches(s)[0]
        assert b.id == "{1}"
        eqs = b.core_equations()
        assert eqs[0] == parse_polynomial("k_0^2 + k_1^2 + k_2^2 + k_3^2 + m1^2")
        # gradient rows alpha1 k_mu = 0 force k = 0, then Q_1 = m1^2
        assert eqs[1:] == [parse_polynomial(f"alpha1*k_{mu}") for mu in range(4)]
        assert eqs[0].subs({f"k_{mu}": 0 for mu in range(4)}) == parse_polynomial("m1^2")


class TestWitnessChecks:
    def test_bubble_hand_witness(self):
        s = generate_landau_system(bubble(), "finite")
        rep = verify_witness(s, bubble_witness(s))
        assert rep["residual"] < 1e-12 and rep["accepted"]
        assert rep["disjunct"] == ["Q=0", "Q=0"]

    def test_euler_redundancy_exact(self):
        s = generate_landau_system(bubble(), "finite")
        third = GaussianRational(1, 0) / 3
        exact = {"alpha1": 2 * third, "alpha2": third, "k_0": GaussianRational(0, 1), "k_1": 0, "k_2": 0,
                 "k_3": 0, "p_0": GaussianRational(0, 3), "p_1": 0, "p_2": 0, "p_3": 0, "m1": 1, "m2": 2}
        for q in s.onshell + tuple(s.gradient_equations()):
            assert q.subs(exact).is_zero()
        assert s.omitted_equations()[0].subs(exact).is_zero()

        s2 = generate_landau_system(two_quadrics(), "finite")
        exact = {"alpha1": 1, "alpha2": 0, "z1": -1, "z2": 0, "t": 2}
        assert all(q.subs(exact).is_zero() for q in s2.gradient_equations() + [s2.onshell[0]])
        assert s2.omitted_equations()[0].subs(exact).is_zero()

    def test_euler_redundancy_on_numeric_witnesses(self):
        s = generate_landau_system(two_quadrics(), "finite")
        cfg = SolveConfig()
        for t in (0, 2, -2, complex(np.sqrt((1 + 1j) / 2))):
            r = membership_test(s, {"t": t}, cfg)
            for w in r.witnesses:
                rep = witness_residual(s, w)
                assert max(rep["omitted"]) < 1e-8

    def test_chart_consistency(self):
        proj = generate_landau_system(two_quadrics(), "projective")
        fin = generate_landau_system(two_quadrics(), "finite")
        r = membership_test(proj, {"t": 2}, SolveConfig(starts=16))
        finite_ws = [w for w in r.witnesses if abs(w.coords[0]) > 1e-3]
        assert finite_ws
        for w in finite_ws:
            c = np.asarray(w.coords) / w.coords[0]
            w1 = Witness(w.alpha, tuple(c), w.params, w.residual, w.branch, "finite")
            res = verify_witness(fin, w1)["residual"]
            scale = np.abs(c).max() ** 2
            assert res <= 1e-9 * scale

    def test_branch_soundness(self):
        s = generate_landau_system(two_quadrics(), "finite")
        r = membership_test(s, {"t": -2}, SolveConfig())
        for w in r.witnesses:
            support = [int(x) for x in w.branch.strip("{}").split(",")]
            assert witness_residual(s, w)["residual"] <= witness_residual(s, w, support)["residual"] + 1e-15

    def test_all_alpha_zero_rejected(self):
        s = generate_landau_system(bubble(), "finite")
        w = bubble_witness(s)
        with pytest.raises(LandauError):
            verify_witness(s, Witness((0, 0), w.coords, w.params, 0.0, "", "finite"))

    def test_dimension_mismatch(self):
        s = generate_landau_system(bubble(), "finite")
        w = bubble_witness(s)
        with pytest.raises(LandauError):
            verify_witness(s, Witness((1,), w.coords, w.params, 0.0, "", "finite"))


class TestPhysical:
    def test_bubble_witness_physical(self):
        s = generate_landau_system(bubble(), "finite")
        assert is_physical(s, bubble_witness(s))

    def test_negative_alpha(self):
        s = generate_landau_system(bubble(), "finite")
        w = bubble_witness(s)
        assert not is_physical(s, Witness((1, -1), w.coords, w.params, 0.0, "{1,2}", "finite"))

    def test_second_type_spacelike(self):
        s = generate_landau_system(bubble(), "infinity")
        # p = (0,1,0,0) has p^2 = 1 > 0; k = (1,0,i,0) is null and orthogonal to p
        w = Witness((1, -1), (0, 1, 0, 1j, 0), (0, 1, 0, 0, 1, 2), 0.0, "{1,2}", "infinity")
        assert verify_witness(s, w)["residual"] < 1e-15
        assert not is_physical(s, w)

    def test_non_feynman_context(self):
        s = generate_landau_system(simple())
        w = Witness((1,), (1, 0), (0,), 0.0, "{1}", "projective")
        with pytest.raises(LandauError):
            is_physical(s, w)
