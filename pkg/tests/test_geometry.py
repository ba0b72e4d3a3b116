"""Lifts, weight systems, vector fields, and Hamiltonian correspondences."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from conftest import chart_mixed, chart_r13, random_field, random_poly
from gradedq.brackets import canonical_poisson, canonical_schouten
from gradedq.geometry import (
    GradingSystem,
    VectorField,
    anticotangent_lift,
    apply,
    commutator,
    cotangent_lift,
    hamiltonian_lift_p,
    hamiltonian_vector_field,
    multivector_lift_theta,
    promote,
    restrict_to_base,
)
from gradedq.superpoly import (
    Chart,
    HomogeneityError,
    MIXED,
    SuperPolynomial,
    ZERO,
    make_chart,
)

F = Fraction


def var(chart, name):
    return SuperPolynomial.var(chart, name)


def r13_field(chart):
    x, x1, x2, x3 = (var(chart, n) for n in ("x", "xi1", "xi2", "xi3"))
    return VectorField(chart, {"x": x * x1 + x1 * x2 * x3,
                               "xi1": x1 * x3,
                               "xi2": x + x1 * x2})


class TestLifts:
    def test_worked_example_total_weights(self):
        grading = GradingSystem("QS", 1, -1)
        lift = cotangent_lift(chart_r13(), grading, names=["y", "eta1", "eta2", "eta3"])
        weights = {v.name: v.weight for v in lift.variables}
        assert weights == {"x": 2, "xi1": 1, "xi2": 1, "xi3": 1,
                           "y": 0, "eta1": 1, "eta2": 1, "eta3": 1}
        parities = {v.name: v.parity for v in lift.variables}
        assert parities["y"] == 0 and parities["eta1"] == 1

    def test_zero_shift(self):
        grading = GradingSystem("QS", 1, 1)
        ch = chart_mixed(2, 1, weights=[0, 0, 0])
        lift = cotangent_lift(ch, grading)
        assert all(v.weight == 0 for v in lift.variables)

    def test_empty_chart(self):
        lift = cotangent_lift(Chart("pt", ()))
        assert lift.n == 0 and lift.is_lift

    def test_anticotangent_parity_and_weight(self):
        ch = chart_mixed(1, 1, weights=[3, 1])
        lift = anticotangent_lift(ch)
        ast_a = lift.var("ast_a1")
        ast_t = lift.var("ast_th1")
        assert ast_a.parity == 1 and ast_a.weight == -3
        assert ast_t.parity == 0 and ast_t.weight == -1

    def test_per_variable_weight_invariant(self):
        grading = GradingSystem("QP", 2, -1)
        ch = chart_mixed(2, 2, weights=[5, -1, 0, 2])
        lift = anticotangent_lift(ch, grading)
        for base, mom in lift.base_pairs():
            assert mom.weight == -base.weight + grading.shift
            assert mom.parity == (base.parity + 1) % 2

    def test_second_lift_names_and_weights(self):
        lift = cotangent_lift(chart_mixed(1, 1))
        second = cotangent_lift(lift)
        names = [v.name for v in second.variables]
        assert names == ["a1", "th1", "p_a1", "p_th1",
                         "q_a1", "q_th1", "q_p_a1", "q_p_th1"]
        for base, mom in second.base_pairs():
            assert mom.weight == -base.weight


class TestApply:
    def test_susy_field(self):
        ch = make_chart("PiQ1", [("xi", 1, 1), ("x", 0, 1)])
        Q = VectorField(ch, {"xi": -(var(ch, "x") ** 2)})
        assert apply(Q, var(ch, "xi")) == -(var(ch, "x") ** 2)

    def test_constant_killed(self):
        ch = chart_mixed(1, 1)
        rng = random.Random(2)
        X = random_field(rng, ch, 2, 1)
        assert apply(X, SuperPolynomial.const(ch, 5)).is_zero()

    def test_worked_example_on_x(self):
        ch = chart_r13()
        Q = r13_field(ch)
        x1, x2, x3 = var(ch, "xi1"), var(ch, "xi2"), var(ch, "xi3")
        assert apply(Q, var(ch, "x")) == var(ch, "x") * x1 + x1 * x2 * x3

    def test_derivation_law(self):
        rng = random.Random(21)
        ch = chart_mixed(2, 2)
        for _ in range(20):
            xp = rng.randint(0, 1)
            X = random_field(rng, ch, 2, xp)
            fp = rng.randint(0, 1)
            f = random_poly(rng, ch, 2, parity=fp)
            g = random_poly(rng, ch, 2)
            sign = -1 if (xp * fp) % 2 else 1
            assert apply(X, f * g) == apply(X, f) * g + (f * apply(X, g)).scale(sign)


class TestCommutator:
    def test_constant_fields_commute(self):
        ch = chart_mixed(0, 3)
        one = SuperPolynomial.const(ch, 1)
        iX = VectorField(ch, {"th1": one})
        iY = VectorField(ch, {"th2": one.scale(-2)})
        assert commutator(iX, iY).is_zero()

    def test_even_self_commutator(self):
        rng = random.Random(31)
        ch = chart_mixed(2, 2)
        X = random_field(rng, ch, 2, 0)
        assert commutator(X, X).is_zero()

    def test_worked_example_homological(self):
        ch = chart_r13()
        Q = r13_field(ch)
        assert commutator(Q, Q).is_zero()

    def test_mixed_parity_rejected(self):
        ch = chart_mixed(1, 1)
        X = VectorField(ch, {"a1": SuperPolynomial.const(ch, 1) + var(ch, "th1")})
        assert X.parity() is MIXED
        with pytest.raises(HomogeneityError):
            commutator(X, X)

    def test_parity_parts_sum(self):
        ch = chart_mixed(1, 1)
        X = VectorField(ch, {"a1": SuperPolynomial.const(ch, 1) + var(ch, "th1")})
        parts = X.parity_parts()
        total = VectorField(ch, {})
        for part in parts.values():
            total = total + part
        assert total == X

    def test_antisymmetry_and_jacobi(self):
        rng = random.Random(41)
        ch = chart_mixed(2, 2)
        for _ in range(8):
            px, py, pz = (rng.randint(0, 1) for _ in range(3))
            X = random_field(rng, ch, 2, px)
            Y = random_field(rng, ch, 2, py)
            Z = random_field(rng, ch, 2, pz)
            sign = -1 if px * py else 1
            assert commutator(X, Y) == commutator(Y, X).scale(-sign)
            lhs = commutator(X, commutator(Y, Z))
            rhs = commutator(commutator(X, Y), Z) + commutator(Y, commutator(X, Z)).scale(sign)
            assert lhs == rhs


class TestHamiltonianLifts:
    def test_theta_of_odd_field(self):
        ch = make_chart("PiQ1", [("xi", 1, 1), ("x", 0, 1)])
        lift = anticotangent_lift(ch)
        Q = VectorField(ch, {"xi": -(var(ch, "x") ** 2)})
        # theta(Q) = -Q^a x*_a for an odd field
        assert multivector_lift_theta(Q, lift) == \
            promote(var(ch, "x") ** 2, lift) * var(lift, "ast_xi")

    def test_zero_field(self):
        ch = chart_mixed(1, 1)
        assert hamiltonian_lift_p(VectorField(ch, {}), cotangent_lift(ch)).is_zero()

    def test_p_bracket_recovers_field(self):
        rng = random.Random(51)
        ch = chart_mixed(2, 2)
        lift = cotangent_lift(ch)
        for parity in (0, 1):
            X = random_field(rng, ch, 2, parity)
            p_x = hamiltonian_lift_p(X, lift)
            for v in ch.variables:
                got = canonical_poisson(p_x, var(lift, v.name), lift)
                assert got == promote(apply(X, SuperPolynomial.var(ch, v.name)), lift)

    def test_theta_bracket_recovers_field_with_sign(self):
        rng = random.Random(61)
        ch = chart_mixed(2, 2)
        lift = anticotangent_lift(ch)
        for parity in (0, 1):
            X = random_field(rng, ch, 2, parity)
            theta = multivector_lift_theta(X, lift)
            sign = -1 if parity else 1
            for v in ch.variables:
                got = canonical_schouten(theta, var(lift, v.name), lift)
                expected = promote(apply(X, SuperPolynomial.var(ch, v.name)), lift).scale(sign)
                assert got == expected


class TestHamiltonianVectorField:
    def test_momentum_gives_coordinate_derivation(self):
        ch = chart_mixed(1, 1)
        lift = cotangent_lift(ch)
        for v in ch.variables:
            H = var(lift, lift.momentum_of(v.name).name)
            X = hamiltonian_vector_field(H, "poisson")
            # {p_a, x^b} = delta_a^b, so X_{p_a} = d/dx^a
            assert X.coefficient(v.name) == SuperPolynomial.const(lift, 1)
            others = {w.name for w in lift.variables} - {v.name}
            assert all(X.coefficient(w).is_zero() for w in others)

    def test_constant_hamiltonian(self):
        lift = cotangent_lift(chart_mixed(1, 1))
        assert hamiltonian_vector_field(SuperPolynomial.const(lift, 3)).is_zero()

    def test_weight_of_hamiltonian_field(self):
        # With ungraded (induced) weights the bracket has weight zero, so
        # weight(X_H) = weight(H).
        ch = chart_mixed(1, 1, weights=[2, 1])
        lift = cotangent_lift(ch)
        H = var(lift, "a1") * var(lift, "p_th1")
        X = hamiltonian_vector_field(H, "poisson")
        assert X.weight() == H.weight()

    def test_bracket_to_commutator_homomorphism(self):
        rng = random.Random(71)
        ch = chart_mixed(1, 2)
        lift = cotangent_lift(ch)
        for _ in range(10):
            f = random_poly(rng, lift, 2, parity=rng.randint(0, 1), terms=3)
            g = random_poly(rng, lift, 2, parity=rng.randint(0, 1), terms=3)
            Xf = hamiltonian_vector_field(f, "poisson")
            Xg = hamiltonian_vector_field(g, "poisson")
            Xfg = hamiltonian_vector_field(canonical_poisson(f, g, lift), "poisson")
            if f.parity() is ZERO or g.parity() is ZERO:
                continue
            assert Xfg == commutator(Xf, Xg)


class TestRestriction:
    def test_restrict_drops_momenta(self):
        ch = chart_mixed(1, 1)
        lift = cotangent_lift(ch)
        f = var(lift, "a1") + var(lift, "p_a1") * var(lift, "th1")
        assert restrict_to_base(f, ch) == SuperPolynomial.var(ch, "a1")
