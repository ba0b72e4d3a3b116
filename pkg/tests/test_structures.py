"""Structure checks: homological fields, tensors, bialgebras, Yang-Baxter."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from conftest import chart_mixed, chart_r13, random_poly
from gradedq.brackets import canonical_poisson
from gradedq.geometry import (
    VectorField,
    anticotangent_lift,
    cotangent_lift,
    hamiltonian_lift_p,
    promote,
)
from gradedq.liealg import StructureConstants, builtin_algebra, lie_tensors, q_from_sc
from gradedq.structures import (
    StructureError,
    algebroid_extract,
    check_bialgebra,
    check_compatibility,
    check_homological,
    check_tensor,
    even_cocycle_residue,
    linf_components,
    yang_baxter,
)
from gradedq.superpoly import (
    ParityMismatchError,
    SuperPolynomial,
    make_chart,
)

F = Fraction


def var(chart, name):
    return SuperPolynomial.var(chart, name)


def borel():
    return StructureConstants(2, (0, 0), {(0, 1, 1): F(1), (1, 0, 1): F(-1)})


def sl2():
    entries = {}
    for (i, j, k, v) in [(0, 1, 1, 2), (1, 0, 1, -2), (0, 2, 2, -2), (2, 0, 2, 2),
                         (1, 2, 0, 1), (2, 1, 0, -1)]:
        entries[(i, j, k)] = F(v)
    return StructureConstants(3, (0, 0, 0), entries)


class TestCheckHomological:
    def test_gl2_passes_and_is_tangent_to_diagonal(self):
        # Constants-level Jacobi holds (oracle), the field squares to zero,
        # and the field is tangent to the diagonal subalgebra submanifold.
        gl2 = builtin_algebra("gl", 2).constants
        assert not gl2.jacobi_residues()
        Q = q_from_sc(gl2)
        report = check_homological(Q)
        assert report.passed
        ch = Q.chart
        off_diag = ["xi2", "xi3"]   # coordinates of e12, e21
        diag_zero = {name: SuperPolynomial.zero(ch) if name in off_diag
                     else var(ch, name) for name in (v.name for v in ch.variables)}
        for name in off_diag:
            restricted = Q.coefficient(name).substitute(diag_zero, ch)
            assert restricted.is_zero()

    def test_susy_field(self):
        ch = make_chart("PiQ1", [("xi", 1, 1), ("x", 0, 1)])
        Q = VectorField(ch, {"xi": -(var(ch, "x") ** 2)})
        assert check_homological(Q).passed

    def test_worked_example(self):
        ch = chart_r13()
        x, x1, x2, x3 = (var(ch, n) for n in ("x", "xi1", "xi2", "xi3"))
        Q = VectorField(ch, {"x": x * x1 + x1 * x2 * x3, "xi1": x1 * x3,
                             "xi2": x + x1 * x2})
        assert check_homological(Q).passed

    def test_even_field_rejected(self):
        ch = chart_mixed(1, 1)
        X = VectorField(ch, {"a1": var(ch, "a1")})
        with pytest.raises(ParityMismatchError):
            check_homological(X)

    def test_two_paths_agree(self):
        # residue = p((1/2)[Q,Q]) must equal (1/2){p(Q), p(Q)}.
        rng = random.Random(3)
        ch = chart_mixed(1, 2)
        from conftest import random_field

        Q = random_field(rng, ch, 2, 1)
        report = check_homological(Q)
        lift = report.residue.chart
        pq = hamiltonian_lift_p(Q, lift)
        assert report.residue == canonical_poisson(pq, pq, lift).scale(F(1, 2))
        assert (report.components is None) == report.passed

    def test_failing_residue_reported(self):
        ch = chart_mixed(1, 1)
        Q = VectorField(ch, {"th1": var(ch, "a1"), "a1": var(ch, "th1")})
        report = check_homological(Q)
        assert not report.passed
        assert not report.residue.is_zero()
        assert report.components is not None


class TestCheckTensor:
    def test_susy_poisson_tensor(self):
        ch = make_chart("PiQ1", [("xi", 1, 1), ("x", 0, 1)])
        alift = anticotangent_lift(ch)
        P = -(var(alift, "x") * var(alift, "ast_xi") * var(alift, "ast_xi"))
        assert check_tensor(P, "anticotangent").passed

    def test_sl2_lie_schouten(self):
        # Oracle first: brute-force Jacobi for the constants.
        assert not sl2().jacobi_residues()
        _, S = lie_tensors(sl2())
        assert check_tensor(S, "cotangent").passed

    def test_failing_sd_residue_matches_display(self):
        # The almost-Schouten tensor of the worked example fails Jacobi with
        # the exact displayed residue; covered in test_doubles against the
        # doubles pipeline, asserted here through check_tensor.
        from gradedq.doubles import Connection, almost_schouten_SD, build_double_QS, long_momentum_r
        from gradedq.geometry import GradingSystem

        ch = chart_r13()
        x, x1, x2, x3 = (var(ch, n) for n in ("x", "xi1", "xi2", "xi3"))
        Q = VectorField(ch, {"x": x * x1 + x1 * x2 * x3, "xi1": x1 * x3,
                             "xi2": x + x1 * x2})
        dm = build_double_QS(Q, None, GradingSystem("QS", 1, -1),
                             lift_names=["y", "eta1", "eta2", "eta3"])
        r = long_momentum_r(dm, Connection.flat(ch),
                            second_names=["p", "pi1", "pi2", "pi3", "q", "k1", "k2", "k3"])
        s_d = almost_schouten_SD(dm, r)
        report = check_tensor(s_d, "cotangent", name="S_D")
        assert not report.passed
        t2 = s_d.chart
        y, q = var(t2, "y"), var(t2, "q")
        e2 = var(t2, "eta2")
        k1, k2, k3 = var(t2, "k1"), var(t2, "k2"), var(t2, "k3")
        z3 = var(t2, "xi3")
        expected = ((y * z3 + e2) * k1 * k2 * k3 - y * q * k1 * k3).scale(2)
        assert report.residue == expected

    def test_parity_guard(self):
        ch = chart_mixed(1, 1)
        lift = cotangent_lift(ch)
        with pytest.raises(ParityMismatchError):
            check_tensor(var(lift, "a1") * var(lift, "p_a1"), "cotangent")


class TestCheckCompatibility:
    def test_susy_qp_pair(self):
        ch = make_chart("PiQ1", [("xi", 1, 1), ("x", 0, 1)])
        alift = anticotangent_lift(ch)
        Q = VectorField(ch, {"xi": -(var(ch, "x") ** 2)})
        P = -(var(alift, "x") * var(alift, "ast_xi") * var(alift, "ast_xi"))
        assert check_compatibility(Q, P, "QP").passed

    def test_zero_tensor(self):
        ch = chart_mixed(1, 1)
        lift = cotangent_lift(ch)
        rng = random.Random(9)
        from conftest import random_field

        Q = random_field(rng, ch, 2, 1)
        assert check_compatibility(Q, SuperPolynomial.zero(lift), "QS").passed

    def test_perturbed_sl2_bialgebra_fails(self):
        # sl(2) with the standard cobracket passes; perturbing one structure
        # constant breaks the brute-force cocycle identity and the {Q,S}
        # residue together.
        c = sl2()
        b_entries = {(1, 0, 1): F(1), (0, 1, 1): F(-1), (2, 0, 2): F(1), (0, 2, 2): F(-1)}
        b = StructureConstants(3, (0, 0, 0), b_entries)
        assert not even_cocycle_residue(c, b)
        good = check_bialgebra(c, b)
        assert good.passed
        bad_c_entries = dict(c.entries)
        bad_c_entries[(0, 1, 1)] = F(3)
        bad_c_entries[(1, 0, 1)] = F(-3)
        bad_c = StructureConstants(3, (0, 0, 0), bad_c_entries)
        assert even_cocycle_residue(bad_c, b)
        report = check_bialgebra(bad_c, b)
        assert not report.passed
        assert not report.residue.is_zero()


class TestCheckBialgebra:
    def test_trivial_cobracket(self):
        zero_b = StructureConstants(2, (0, 0), {})
        assert check_bialgebra(borel(), zero_b).passed

    def test_borel_bialgebra(self):
        assert not even_cocycle_residue(borel(), borel())
        report = check_bialgebra(borel(), borel())
        assert report.passed
        names = [s.name for s in report.subchecks]
        assert "cocycle-coordinate-identity" in names

    def test_cross_validation_on_small_dims(self):
        # Coordinate identity and {Q,S} residue vanish together over a sweep
        # of random candidate cobrackets in dimensions 2 and 3.
        rng = random.Random(27)
        for dim, c in ((2, borel()), (3, sl2())):
            for _ in range(6):
                entries = {}
                for i in range(dim):
                    for j in range(i + 1, dim):
                        for k in range(dim):
                            v = F(rng.randint(-1, 1))
                            if v:
                                entries[(i, j, k)] = v
                                entries[(j, i, k)] = -v
                try:
                    b = StructureConstants(dim, (0,) * dim, entries)
                except Exception:
                    continue
                if b.jacobi_residues():
                    continue
                identity = even_cocycle_residue(c, b)
                Q_hat = q_from_sc(c)
                lift = cotangent_lift(Q_hat.chart)
                from gradedq.liealg import cobracket_hamiltonian

                S = cobracket_hamiltonian(b, lift)
                qs = canonical_poisson(hamiltonian_lift_p(Q_hat, lift), S, lift)
                assert bool(identity) == (not qs.is_zero())

    def test_odd_path_susy(self):
        # q(1) is an odd bialgebra: the three Schouten conditions hold.
        from gradedq.liealg import odd_double

        alg = builtin_algebra("susy1")
        od = odd_double(alg.constants, alg.cobracket_constants)
        assert all(r.passed for r in od.reports)


class TestYangBaxter:
    def test_double_r_modified_cybe(self):
        from gradedq.liealg import drinfeld_double

        dd = drinfeld_double(borel(), borel())
        lift2 = dd.second_lift
        n = 2
        r = SuperPolynomial.zero(lift2)
        for i in range(n):
            r = r + (var(lift2, lift2.variables[2 * n + i].name)
                     * var(lift2, lift2.variables[3 * n + i].name))
        q_d2 = hamiltonian_lift_p(dd.q_d, lift2)
        cybe, gybe = yang_baxter(r, q_d2)
        assert gybe.passed
        assert not cybe.passed
        momenta = [v.name for v in lift2.variables[lift2.n_base:]]
        assert cybe.residue.degree_in(momenta) == 3
        assert cybe.residue.total_degree() == 3

    def test_zero_r(self):
        from gradedq.liealg import drinfeld_double

        dd = drinfeld_double(borel(), borel())
        q_d2 = hamiltonian_lift_p(dd.q_d, dd.second_lift)
        cybe, gybe = yang_baxter(SuperPolynomial.zero(dd.second_lift), q_d2)
        assert cybe.passed and gybe.passed

    def test_abelian_algebra(self):
        abelian = StructureConstants(2, (0, 0), {})
        Q_hat = q_from_sc(abelian)
        lift = cotangent_lift(Q_hat.chart)
        lift2 = cotangent_lift(lift)
        r = var(lift2, "q_xi1") * var(lift2, "q_xi2")
        zero_q = SuperPolynomial.zero(lift2)
        cybe, gybe = yang_baxter(r, zero_q)
        assert cybe.passed and gybe.passed

    def test_base_variables_rejected(self):
        ch = chart_mixed(1, 1)
        lift = cotangent_lift(ch)
        with pytest.raises(StructureError):
            yang_baxter(var(lift, "a1") * var(lift, "a1"), SuperPolynomial.zero(lift))


class TestAlgebroidExtract:
    def test_lie_algebra_shape(self):
        # Base empty, fibers of weight one: anchors empty and the bracket
        # coefficients reproduce [e_i, e_j] = (-1)^{j~} Q_ij^k e_k.
        c = borel()
        Q = q_from_sc(c)
        anchor, bracket = algebroid_extract(Q)
        assert anchor == {}
        for (i, j, k), coeff in bracket.items():
            sign = -1 if c.parities[j] % 2 else 1
            assert coeff == SuperPolynomial.const(Q.chart, sign * c.get(i, j, k))

    def test_de_rham_toy(self):
        ch = make_chart("PiTR", [("x", 0, 0), ("dx", 1, 1)])
        Q = VectorField(ch, {"x": var(ch, "dx")})
        anchor, bracket = algebroid_extract(Q)
        assert bracket == {}
        assert anchor == {(0, 0): SuperPolynomial.const(ch, 1)}

    def test_cubic_term_rejected(self):
        ch = make_chart("M", [("x", 0, 0), ("xi1", 1, 1), ("xi2", 1, 1), ("xi3", 1, 1)])
        x, x1, x2, x3 = (var(ch, n) for n in ("x", "xi1", "xi2", "xi3"))
        Q = VectorField(ch, {"x": x * x1 + x1 * x2 * x3, "xi1": x1 * x3,
                             "xi2": x1 * x2})
        with pytest.raises(StructureError):
            algebroid_extract(Q)

    def test_round_trip(self):
        rng = random.Random(33)
        ch = make_chart("A", [("x", 0, 0), ("y", 1, 0), ("xi1", 1, 1), ("xi2", 1, 1),
                              ("e1", 0, 1)])
        base = ["x", "y"]
        fiber = ["xi1", "xi2", "e1"]
        for _ in range(6):
            coeffs = {}
            for b in base:
                acc = SuperPolynomial.zero(ch)
                want = (ch.var(b).parity + 1) % 2
                for f in fiber:
                    coeff_parity = (want + ch.var(f).parity) % 2
                    g = random_poly(rng, make_chart("B", [("x", 0, 0), ("y", 1, 0)]),
                                    2, parity=coeff_parity, terms=2)
                    acc = acc + var(ch, f) * SuperPolynomial(ch, dict(g.terms))
                coeffs[b] = acc
            for f in fiber:
                acc = SuperPolynomial.zero(ch)
                want = (ch.var(f).parity + 1) % 2
                for f1 in fiber:
                    for f2 in fiber:
                        coeff_parity = (want + ch.var(f1).parity + ch.var(f2).parity) % 2
                        g = random_poly(rng, make_chart("B", [("x", 0, 0), ("y", 1, 0)]),
                                        1, parity=coeff_parity, terms=1)
                        acc = acc + var(ch, f1) * var(ch, f2) * SuperPolynomial(ch, dict(g.terms))
                coeffs[f] = acc
            Q = VectorField(ch, coeffs)
            if Q.parity() not in (1,):
                continue
            anchor, bracket = algebroid_extract(Q)
            rebuilt_base = {}
            for a, b in enumerate(base):
                acc = SuperPolynomial.zero(ch)
                for i, f in enumerate(fiber):
                    if (i, a) in anchor:
                        acc = acc + var(ch, f) * anchor[(i, a)]
                rebuilt_base[b] = acc
                assert acc == Q.coefficient(b)
            for k, fk in enumerate(fiber):
                acc = SuperPolynomial.zero(ch)
                for j, fj in enumerate(fiber):
                    for i, fi in enumerate(fiber):
                        if (i, j, k) in bracket:
                            acc = acc + (var(ch, fj) * var(ch, fi) * bracket[(i, j, k)]).scale(F(1, 2))
                assert acc == Q.coefficient(fk)


class TestLinfComponents:
    def test_graded_decomposition_sums(self):
        rng = random.Random(43)
        ch = make_chart("L", [("z1", 0, 1), ("z2", 0, 1), ("w1", 1, 1), ("w2", 1, 1)])
        coeffs = {}
        for v in ch.variables:
            want = (v.parity + 1) % 2
            coeffs[v.name] = random_poly(rng, ch, 3, parity=want, terms=4)
        Q = VectorField(ch, coeffs)
        comps = linf_components(Q)
        from gradedq.geometry import commutator

        total = commutator(Q, Q).scale(F(1, 2))
        rebuilt = VectorField(ch, {})
        for part in comps.values():
            rebuilt = rebuilt + part
        assert rebuilt == total

    def test_zeroing_low_orders_recovers_quadratic_jacobi(self):
        rng = random.Random(47)
        ch = make_chart("L", [("z1", 0, 1), ("w1", 1, 1), ("w2", 1, 1)])
        names = [v.name for v in ch.variables]
        from gradedq.structures import decompose_by_degree

        coeffs = {}
        for v in ch.variables:
            want = (v.parity + 1) % 2
            coeffs[v.name] = random_poly(rng, ch, 3, parity=want, terms=4)
        Q = VectorField(ch, coeffs)
        trunc = {}
        for v in ch.variables:
            parts = decompose_by_degree(Q.coefficient(v.name), names)
            keep = SuperPolynomial.zero(ch)
            for d in (2, 3):
                if d in parts:
                    keep = keep + parts[d]
            trunc[v.name] = keep
        quad = {}
        for v in ch.variables:
            parts = decompose_by_degree(Q.coefficient(v.name), names)
            quad[v.name] = parts.get(2, SuperPolynomial.zero(ch))
        Q23 = VectorField(ch, trunc)
        Q2 = VectorField(ch, quad)
        from gradedq.geometry import commutator

        jacobi_quad = commutator(Q2, Q2).scale(F(1, 2))
        comps = linf_components(Q23)
        got = comps.get(3, VectorField(ch, {}))
        assert got == jacobi_quad
