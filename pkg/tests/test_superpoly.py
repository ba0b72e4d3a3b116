"""Core supercommutative arithmetic: signs, derivatives, gradings, substitution."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import permutations

import pytest

from conftest import chart_mixed, chart_r13, random_poly
from gradedq.superpoly import (
    Chart,
    ChartMismatchError,
    MIXED,
    ParityMismatchError,
    SuperPolynomial,
    UnknownVariableError,
    VariableDecl,
    ZERO,
    make_chart,
    parity_of,
    weight_of,
)

F = Fraction


def var(chart, name):
    return SuperPolynomial.var(chart, name)


class TestProduct:
    def test_koszul_sign_forced(self):
        ch = chart_mixed(0, 2)
        th1, th2 = var(ch, "th1"), var(ch, "th2")
        assert (th1 * th2).render() == "th1*th2"
        assert th2 * th1 == -(th1 * th2)

    def test_odd_nilpotency(self):
        ch = chart_mixed(0, 2)
        assert (var(ch, "th1") * var(ch, "th1")).is_zero()

    def test_square_of_even_plus_nilpotent(self):
        ch = chart_mixed(1, 2)
        x, t1, t2 = var(ch, "a1"), var(ch, "th1"), var(ch, "th2")
        f = x + t1 * t2
        assert f * f == x * x + (x * t1 * t2) * 2

    def test_supercommutativity_property(self):
        rng = random.Random(7)
        ch = chart_mixed(3, 3)
        for _ in range(40):
            pf, pg = rng.randint(0, 1), rng.randint(0, 1)
            f = random_poly(rng, ch, 4, parity=pf)
            g = random_poly(rng, ch, 4, parity=pg)
            sign = -1 if pf * pg else 1
            assert f * g == (g * f).scale(sign)

    def test_normal_form_confluence(self):
        rng = random.Random(11)
        ch = chart_mixed(2, 3)
        factors = [random_poly(rng, ch, 2) for _ in range(3)]
        reference = (factors[0] * factors[1]) * factors[2]
        assert factors[0] * (factors[1] * factors[2]) == reference

    def test_chart_mismatch(self):
        with pytest.raises(ChartMismatchError):
            var(chart_mixed(1, 0), "a1") * var(chart_mixed(0, 1), "th1")


class TestAddScalar:
    def test_cancellation(self):
        ch = chart_mixed(0, 2)
        f = var(ch, "th1") * var(ch, "th2")
        assert (f + f.scale(-1)).is_zero()

    def test_add_collects(self):
        ch = chart_mixed(1, 0)
        x = var(ch, "a1")
        assert x * x + (x * x).scale(3) == (x * x).scale(4)

    def test_scalar_mul(self):
        ch = chart_mixed(1, 1)
        f = (var(ch, "a1") * var(ch, "th1")).scale(2)
        assert f.scale(F(1, 2)) == var(ch, "a1") * var(ch, "th1")


class TestLeftPartial:
    def test_leftmost_odd(self):
        ch = chart_mixed(0, 2)
        th1, th2 = var(ch, "th1"), var(ch, "th2")
        assert (th1 * th2).left_partial("th1") == th2

    def test_one_transposition_sign(self):
        ch = chart_mixed(0, 2)
        th1, th2 = var(ch, "th1"), var(ch, "th2")
        assert (th1 * th2).left_partial("th2") == -th1

    def test_even_power(self):
        ch = chart_mixed(1, 1)
        x, th = var(ch, "a1"), var(ch, "th1")
        assert (x * x * th).left_partial("a1") == (x * th).scale(2)

    def test_unknown_variable(self):
        ch = chart_mixed(1, 0)
        with pytest.raises(UnknownVariableError):
            var(ch, "a1").left_partial("nope")

    def test_derivation_law(self):
        rng = random.Random(3)
        ch = chart_mixed(2, 3)
        for _ in range(30):
            pf = rng.randint(0, 1)
            f = random_poly(rng, ch, 3, parity=pf)
            g = random_poly(rng, ch, 3)
            v = rng.choice(ch.variables)
            lhs = (f * g).left_partial(v.name)
            sign = -1 if (v.parity * pf) % 2 else 1
            rhs = f.left_partial(v.name) * g + (f * g.left_partial(v.name)).scale(sign)
            assert lhs == rhs


class TestGrades:
    def test_weighted_monomial(self):
        ch = chart_r13()
        f = var(ch, "x") * var(ch, "xi1") * var(ch, "xi2")
        assert parity_of(f) == 0
        assert weight_of(f) == 4

    def test_mixed_decomposition(self):
        ch = chart_mixed(1, 1)
        f = var(ch, "a1") + var(ch, "th1")
        assert parity_of(f) is MIXED
        parts = f.parity_decomposition()
        assert parts[0] == var(ch, "a1") and parts[1] == var(ch, "th1")
        assert parts[0] + parts[1] == f

    def test_zero_grades(self):
        ch = chart_mixed(1, 1)
        zero = SuperPolynomial.zero(ch)
        assert parity_of(zero) is ZERO and weight_of(zero) is ZERO

    def test_additivity_under_product(self):
        rng = random.Random(5)
        ch = chart_mixed(2, 2, weights=[1, 2, 1, 3])
        for _ in range(25):
            f = random_poly(rng, ch, 3, parity=rng.randint(0, 1), terms=2)
            g = random_poly(rng, ch, 3, parity=rng.randint(0, 1), terms=2)
            fw = {w for w, _ in f.weight_decomposition().items()}
            gw = {w for w, _ in g.weight_decomposition().items()}
            if len(fw) != 1 or len(gw) != 1 or (f * g).is_zero():
                continue
            assert parity_of(f * g) == (f.parity() + g.parity()) % 2
            assert weight_of(f * g) == f.weight() + g.weight()


class TestSubstitute:
    def test_identity(self):
        ch = chart_mixed(1, 2)
        rng = random.Random(9)
        f = random_poly(rng, ch, 3)
        images = {v.name: var(ch, v.name) for v in ch.variables}
        assert f.substitute(images, ch) == f

    def test_fiber_negation_involution(self):
        ch = chart_mixed(1, 2)
        rng = random.Random(13)
        f = random_poly(rng, ch, 4)
        images = {v.name: -var(ch, v.name) for v in ch.variables}
        once = f.substitute(images, ch)
        assert once.substitute(images, ch) == f

    def test_morphism_property(self):
        src = chart_mixed(1, 1)
        dst = chart_mixed(1, 2)
        rng = random.Random(17)
        images = {"a1": var(dst, "a1") * var(dst, "a1"),
                  "th1": var(dst, "th1") + var(dst, "th2")}
        f = random_poly(rng, src, 3)
        g = random_poly(rng, src, 3)
        assert (f * g).substitute(images, dst) == \
            f.substitute(images, dst) * g.substitute(images, dst)

    def test_even_duality_image(self):
        # y^i p_i under y -> p-image, p -> -(-1)^{i~} y-image, even fiber.
        src = make_chart("E", [("y", 0, 1), ("p", 0, -1)])
        dst = make_chart("D", [("Y", 0, -1), ("P", 0, 1)])
        f = var(src, "y") * var(src, "p")
        images = {"y": var(dst, "P"), "p": -var(dst, "Y")}
        assert f.substitute(images, dst) == -(var(dst, "P") * var(dst, "Y"))

    def test_parity_mismatch(self):
        src = chart_mixed(1, 1)
        dst = chart_mixed(1, 1)
        images = {"a1": var(dst, "th1"), "th1": var(dst, "th1")}
        with pytest.raises(ParityMismatchError):
            var(src, "a1").substitute(images, dst)

    def test_incomplete_map(self):
        src = chart_mixed(1, 1)
        with pytest.raises(UnknownVariableError):
            var(src, "a1").substitute({"a1": var(src, "a1")}, src)


class TestRendering:
    def test_canonical_text(self):
        ch = chart_r13()
        f = (var(ch, "x") ** 2).scale(F(3, 2)) - var(ch, "xi1") * var(ch, "xi2")
        assert f.render() == "-xi1*xi2 + 3/2*x^2"

    def test_zero(self):
        assert SuperPolynomial.zero(chart_r13()).render() == "0"

    def test_deterministic_under_insertion_order(self):
        ch = chart_mixed(2, 0)
        a, b = var(ch, "a1"), var(ch, "a2")
        assert (a + b).render() == (b + a).render()
