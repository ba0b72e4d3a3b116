"""Double constructions on (anti)cotangent lifts and the cotangent duality maps.

A graded QS-manifold (homological field of weight q, Schouten tensor of
weight s) doubles to T*M carrying the total weight w + (q-s)d and the
homological field X_{Q + lam S}.  A graded QP-manifold doubles to PiT*M with
the field -X_{theta(Q) + lam P}; the minus sign makes the restriction to base
functions reproduce the original field (theta twists odd fields by a sign).

A connection of weight zero supplies the long momentum
P_a = p_a + Gamma_ab^c y_c q^b on T*DM, the invariant r = P_a q^a, and the
almost Schouten tensor S_D = (1/2){Q_D, r}.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Mapping, Optional, Sequence, Tuple

from .brackets import canonical_poisson, canonical_schouten
from .geometry import (
    GradingSystem,
    VectorField,
    anticotangent_lift,
    cotangent_lift,
    hamiltonian_lift_p,
    hamiltonian_vector_field,
    multivector_lift_theta,
    promote,
)
from .structures import CheckReport, StructureError, _report, check_compatibility, check_homological, check_tensor
from .superpoly import (
    Chart,
    ChartMismatchError,
    LiftKindError,
    MIXED,
    SuperPolynomial,
    ZERO,
)

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class Connection:
    """Christoffel symbols Gamma_ab^c on a base chart, sparse by name triple.

    A weight-zero connection has weight(Gamma_ab^c) = w_c - w_a - w_b and
    parity(Gamma_ab^c) = a~ + b~ + c~; both are validated.
    """

    chart: Chart
    christoffels: Mapping[Tuple[str, str, str], SuperPolynomial]

    def __post_init__(self) -> None:
        clean: Dict[Tuple[str, str, str], SuperPolynomial] = {}
        for (a, b, c), gamma in self.christoffels.items():
            va, vb, vc = self.chart.var(a), self.chart.var(b), self.chart.var(c)
            if gamma.chart != self.chart:
                raise ChartMismatchError("Christoffel symbols must live on the base chart")
            if gamma.is_zero():
                continue
            w = gamma.weight()
            if w is not ZERO and w != vc.weight - va.weight - vb.weight:
                raise StructureError(
                    f"Gamma[{a},{b},{c}] has weight {w}, a zero-weight connection needs "
                    f"{vc.weight - va.weight - vb.weight}")
            p = gamma.parity()
            if p is not ZERO and p != (va.parity + vb.parity + vc.parity) % 2:
                raise StructureError(f"Gamma[{a},{b},{c}] has the wrong parity")
            clean[(a, b, c)] = gamma
        object.__setattr__(self, "christoffels", clean)

    @property
    def is_flat_zero(self) -> bool:
        return not self.christoffels

    @staticmethod
    def flat(chart: Chart) -> "Connection":
        return Connection(chart, {})


@dataclass(frozen=True)
class DoubleModel:
    """A constructed double: lift chart with total weights, Q_D, and reports."""

    kind: str                      # "QS" | "QP"
    grading: GradingSystem
    base_chart: Chart
    field: VectorField             # the homological field on the base
    tensor: SuperPolynomial        # S (on T*M) or P (on PiT*M); may be zero
    lift: Chart
    hamiltonian: SuperPolynomial   # Q + lam S   resp.   theta(Q) + lam P
    q_d: VectorField               # the homological field on the lift
    reports: Tuple[CheckReport, ...]

    @property
    def total_weights(self) -> Dict[str, int]:
        return {v.name: v.weight for v in self.lift.variables}

    def second_cotangent(self, names: Optional[Sequence[str]] = None) -> Chart:
        """T*DM with plain induced weights (momenta of x^a and of y_a)."""
        return cotangent_lift(self.lift, names=names)

    def second_anticotangent(self, names: Optional[Sequence[str]] = None) -> Chart:
        return anticotangent_lift(self.lift, names=names)


def _weight_check(name: str, value, expected: int, context: str) -> CheckReport:
    ok = value is ZERO or value == expected
    zero = SuperPolynomial.zero  # residue rendering is symbolic in spirit only
    residue_chart = None
    report = CheckReport(name, ok, SuperPolynomial(Chart("wcheck", ()), {}),
                         context=f"{context}: got {value}, expected {expected}")
    return report


def build_double_QS(Q: VectorField, S: Optional[SuperPolynomial], grading: GradingSystem,
                    lift: Optional[Chart] = None, lift_names: Optional[Sequence[str]] = None,
                    force: bool = False) -> DoubleModel:
    """Double of a graded QS-manifold: T*M with Q_D = X_{Q + lam S}."""
    if grading.kind != "QS":
        raise ValueError("build_double_QS needs a QS grading")
    if lift is None:
        lift = cotangent_lift(Q.chart, grading, names=lift_names)
    if S is None:
        S = SuperPolynomial.zero(lift)
    if S.chart != lift:
        raise ChartMismatchError("S must live on the cotangent lift")
    reports = [check_homological(Q), check_tensor(S, "cotangent", name="S"),
               check_compatibility(Q, S, "QS")]
    q, s = grading.q, grading.s_or_p
    qh = hamiltonian_lift_p(Q, lift)
    reports.append(_weight_check("weight(Q)", qh.weight(), 2 * q - s, "table row 2q-s"))
    reports.append(_weight_check("weight(S)", S.weight(), 2 * q - s, "table row 2q-s"))
    if not force and not all(r.passed for r in reports):
        failing = [r.name for r in reports if not r.passed]
        raise StructureError(f"QS double preconditions failed: {', '.join(failing)}")
    ham = qh + S.scale(grading.lam)
    q_d = hamiltonian_vector_field(ham, "poisson")
    reports.append(_weight_check("weight(Q_D)", q_d.weight(), q, "field weight q"))
    reports.append(check_homological(q_d, name="Q_D"))
    return DoubleModel("QS", grading, Q.chart, Q, S, lift, ham, q_d, tuple(reports))


def build_double_QP(Q: VectorField, P: Optional[SuperPolynomial], grading: GradingSystem,
                    lift: Optional[Chart] = None, lift_names: Optional[Sequence[str]] = None,
                    force: bool = False) -> DoubleModel:
    """Double of a graded QP-manifold: PiT*M with Q_D = -X_{theta(Q) + lam P}."""
    if grading.kind != "QP":
        raise ValueError("build_double_QP needs a QP grading")
    if lift is None:
        lift = anticotangent_lift(Q.chart, grading, names=lift_names)
    if P is None:
        P = SuperPolynomial.zero(lift)
    if P.chart != lift:
        raise ChartMismatchError("P must live on the anticotangent lift")
    reports = [check_homological(Q), check_tensor(P, "anticotangent", name="P"),
               check_compatibility(Q, P, "QP")]
    q, p = grading.q, grading.s_or_p
    qt = multivector_lift_theta(Q, lift)
    reports.append(_weight_check("weight(theta(Q))", qt.weight(), 2 * q - p, "table row 2q-p"))
    reports.append(_weight_check("weight(P)", P.weight(), 2 * q - p, "table row 2q-p"))
    if not force and not all(r.passed for r in reports):
        failing = [r.name for r in reports if not r.passed]
        raise StructureError(f"QP double preconditions failed: {', '.join(failing)}")
    ham = qt + P.scale(grading.lam)
    q_d = hamiltonian_vector_field(ham, "schouten").scale(-1)
    reports.append(_weight_check("weight(Q_D)", q_d.weight(), q, "field weight q"))
    reports.append(check_homological(q_d, name="Q_D"))
    return DoubleModel("QP", grading, Q.chart, Q, P, lift, ham, q_d, tuple(reports))


def long_momentum_r(double: DoubleModel, connection: Connection,
                    second_lift: Optional[Chart] = None,
                    second_names: Optional[Sequence[str]] = None) -> SuperPolynomial:
    """r = P_a q^a = p_a q^a + Gamma_ab^c y_c q^b q^a on T*DM (QS doubles only)."""
    if double.kind != "QS":
        raise LiftKindError("the long momentum lives on the double of a QS-manifold")
    if connection.chart != double.base_chart:
        raise ChartMismatchError("connection must live on the double's base chart")
    t2 = second_lift if second_lift is not None else double.second_cotangent(second_names)
    if t2.base != double.lift or t2.kind != "cotangent":
        raise LiftKindError("second lift must be the cotangent lift of the double")
    lift = double.lift
    nb = lift.n_base
    r = SuperPolynomial.zero(t2)
    for i in range(nb):
        p_a = SuperPolynomial.var(t2, t2.variables[lift.n + i].name)
        q_a = SuperPolynomial.var(t2, t2.variables[lift.n + nb + i].name)
        r = r + p_a * q_a
    for (a, b, c), gamma in connection.christoffels.items():
        y_c = SuperPolynomial.var(t2, lift.momentum_of(c).name)
        ia = double.base_chart.var(a).order_index
        ib = double.base_chart.var(b).order_index
        q_b = SuperPolynomial.var(t2, t2.variables[lift.n + nb + ib].name)
        q_a = SuperPolynomial.var(t2, t2.variables[lift.n + nb + ia].name)
        g2 = promote(promote(gamma, lift), t2)
        r = r + g2 * y_c * q_b * q_a
    expected = -double.grading.q + double.grading.s_or_p
    w = r.weight()
    if w is not ZERO and w != expected:
        raise StructureError(f"W(r) = {w}, expected -q+s = {expected}")
    return r


def almost_schouten_SD(double: DoubleModel, r: SuperPolynomial) -> SuperPolynomial:
    """S_D = (1/2){Q_D, r} on T*DM; fiber-quadratic of total weight s."""
    t2 = r.chart
    q_d2 = hamiltonian_lift_p(double.q_d, t2)
    s_d = canonical_poisson(q_d2, r, t2).scale(HALF)
    momenta = [v.name for v in t2.variables[t2.n_base:]]
    from .structures import decompose_by_degree

    degs = decompose_by_degree(s_d, momenta)
    if any(d != 2 for d in degs):
        raise StructureError(f"S_D has momentum degrees {sorted(degs)}, expected quadratic")
    w = s_d.weight()
    if w is not ZERO and w != double.grading.s_or_p:
        raise StructureError(f"W(S_D) = {w}, expected s = {double.grading.s_or_p}")
    return s_d


def sd_flat_expansion(double: DoubleModel, t2: Chart) -> SuperPolynomial:
    """The curvature-free expansion of S_D for the zero connection:

        (1/2) (-1)^{a~+b~} (d_a d_b H) q^b q^a  -  (H quadratic part)|_{y -> p}

    with H = Q + lam S on DM.  Used as an independent cross-check of the
    direct bracket computation.
    """
    lift = double.lift
    nb = lift.n_base
    ham2 = promote(double.hamiltonian, t2)
    out = SuperPolynomial.zero(t2)
    for ia in range(nb):
        va = lift.variables[ia]
        for ib in range(nb):
            vb = lift.variables[ib]
            dd = ham2.left_partial(vb.name).left_partial(va.name)
            if dd.is_zero():
                continue
            q_b = SuperPolynomial.var(t2, t2.variables[lift.n + nb + ib].name)
            q_a = SuperPolynomial.var(t2, t2.variables[lift.n + nb + ia].name)
            sign = -1 if (va.parity + vb.parity) % 2 else 1
            out = out + (dd * q_b * q_a).scale(Fraction(sign, 2))
    from .structures import decompose_by_degree

    fiber = [v.name for v in lift.variables[nb:]]
    quad = decompose_by_degree(promote(double.hamiltonian, t2), [n for n in fiber]).get(2)
    if quad is not None:
        images = {}
        for i, v in enumerate(t2.variables):
            images[v.name] = SuperPolynomial.var(t2, v.name)
        for i in range(nb):
            y_name = lift.variables[nb + i].name
            p_name = t2.variables[lift.n + i].name
            images[y_name] = SuperPolynomial.var(t2, p_name)
        out = out - quad.substitute(images, t2)
    return out


def odd_rho_PD(double: DoubleModel, second_lift: Optional[Chart] = None,
               second_names: Optional[Sequence[str]] = None,
               force: bool = False):
    """rho = x*^i xi*_i and P_D = (1/2){-theta(Q_D), rho} on PiT*(PiT*M).

    Returns (rho, P_D, reports).  P_D must be a Q_D-invariant Poisson tensor;
    both conditions are checked and raise unless force is set.
    """
    if double.kind != "QP":
        raise LiftKindError("the odd rho construction applies to QP doubles")
    t2 = second_lift if second_lift is not None else double.second_anticotangent(second_names)
    if t2.base != double.lift or t2.kind != "anticotangent":
        raise LiftKindError("second lift must be the anticotangent lift of the double")
    lift = double.lift
    nb = lift.n_base
    rho = SuperPolynomial.zero(t2)
    for i in range(nb):
        ast_m = SuperPolynomial.var(t2, t2.variables[lift.n + nb + i].name)
        ast_v = SuperPolynomial.var(t2, t2.variables[lift.n + i].name)
        rho = rho + ast_m * ast_v
    theta_qd = multivector_lift_theta(double.q_d, t2)
    p_d = canonical_schouten(theta_qd.scale(-1), rho, t2).scale(HALF)
    reports = (
        _report("tensor(P_D)", canonical_schouten(p_d, p_d, t2), context="{P_D,P_D}"),
        _report("invariance(P_D)", canonical_schouten(theta_qd, p_d, t2), context="L_{Q_D} P_D"),
    )
    if not force and not all(rep.passed for rep in reports):
        raise StructureError("P_D failed the Poisson or invariance check")
    return rho, p_d, reports


# ---------------------------------------------------------------------------
# Cotangent duality maps F: T*E ~ T*E*  and  PiT*E ~ PiT*(PiE*)


@dataclass(frozen=True)
class DualityMap:
    kind: str                     # "even" | "odd"
    source_chart: Chart           # E
    dual_chart: Chart             # E* (even) or PiE* (odd)
    source_lift: Chart            # T*E or PiT*E
    dual_lift: Chart              # T*E* or PiT*(PiE*)
    substitution: Mapping[str, SuperPolynomial]   # pullback of dual-lift coordinates
    report: CheckReport

    def pull_back(self, f: SuperPolynomial) -> SuperPolynomial:
        if f.chart != self.dual_lift:
            raise ChartMismatchError("pull_back expects a function on the dual lift")
        return f.substitute(self.substitution, self.source_lift)


def _split(chart: Chart, n_base: int):
    if not (0 <= n_base < chart.n):
        raise StructureError("duality needs at least one fiber variable")
    return chart.variables[:n_base], chart.variables[n_base:]


def _dual_chart(chart: Chart, n_base: int, kind: str, fiber_names: Optional[Sequence[str]]) -> Chart:
    from .superpoly import VariableDecl

    base, fiber = _split(chart, n_base)
    decls = list(base)
    for j, v in enumerate(fiber):
        name = fiber_names[j] if fiber_names is not None else f"dual_{v.name}"
        parity = v.parity if kind == "even" else (v.parity + 1) % 2
        decls.append(VariableDecl(name, parity, -v.weight, n_base + j))
    return Chart(name=f"dual[{kind}]({chart.name})", variables=tuple(decls))


def duality_map(chart: Chart, n_base: int, kind: str = "even",
                fiber_names: Optional[Sequence[str]] = None) -> DualityMap:
    """The canonical diffeomorphism between the (anti)cotangent bundles of a
    bundle and its (anti)dual, as the pullback substitution

        even:  y_i -> p_{y^i},   p^i -> -(-1)^{i~} y^i
        odd:   eta_i -> y*_i,    eta*^i -> -y^i

    together with a bracket-preservation report over all generator pairs.
    """
    if kind not in ("even", "odd"):
        raise ValueError("kind must be 'even' or 'odd'")
    base, fiber = _split(chart, n_base)
    dual = _dual_chart(chart, n_base, kind, fiber_names)
    lifter = cotangent_lift if kind == "even" else anticotangent_lift
    src_lift = lifter(chart)
    dual_lift = lifter(dual)
    sub: Dict[str, SuperPolynomial] = {}
    for v in base:
        sub[v.name] = SuperPolynomial.var(src_lift, v.name)
        sub[dual_lift.momentum_of(v.name).name] = SuperPolynomial.var(
            src_lift, src_lift.momentum_of(v.name).name)
    for j, v in enumerate(fiber):
        dual_fiber = dual.variables[n_base + j]
        momentum = src_lift.momentum_of(v.name).name
        sub[dual_fiber.name] = SuperPolynomial.var(src_lift, momentum)
        sign = -1 if kind == "odd" else (-1 if v.parity == 0 else 1)
        # even: p^i -> -(-1)^{i~} y^i ; odd: eta*^i -> -y^i
        sub[dual_lift.momentum_of(dual_fiber.name).name] = SuperPolynomial.var(
            src_lift, v.name).scale(sign)
    report = _verify_bracket_preservation(src_lift, dual_lift, sub, kind)
    return DualityMap(kind, chart, dual, src_lift, dual_lift, sub, report)


def _verify_bracket_preservation(src_lift: Chart, dual_lift: Chart,
                                 sub: Mapping[str, SuperPolynomial], kind: str) -> CheckReport:
    bracket = canonical_poisson if kind == "even" else canonical_schouten
    residue = SuperPolynomial.zero(src_lift)
    bad = []
    for u in dual_lift.variables:
        fu = SuperPolynomial.var(dual_lift, u.name)
        for w in dual_lift.variables:
            fw = SuperPolynomial.var(dual_lift, w.name)
            lhs = bracket(fu, fw, dual_lift).substitute(sub, src_lift)
            rhs = bracket(sub[u.name], sub[w.name], src_lift)
            diff = lhs - rhs
            if not diff.is_zero():
                bad.append(f"{{{u.name},{w.name}}}")
                residue = residue + diff
    context = "all generator pairs preserved" if not bad else "failed: " + ", ".join(bad)
    return _report(f"duality[{kind}] bracket preservation", residue, context=context)


def duality_square(chart: Chart, n_base: int, kind: str = "even") -> Dict[str, SuperPolynomial]:
    """The pullback of F^2 as a substitution on the source lift's coordinates.

    The composite uses the canonical identification of the double (anti)dual
    with the original bundle; in left coordinates that identification carries
    (-1)^{i~} on even-dual fibers and momenta, and no extra sign on odd-dual
    ones.  The theorem says the result is multiplication by -1 on the fibers.
    """
    d1 = duality_map(chart, n_base, kind)
    d2 = duality_map(d1.dual_chart, n_base, kind)
    src_lift = d1.source_lift
    out: Dict[str, SuperPolynomial] = {}
    base, fiber = _split(chart, n_base)
    for v in src_lift.variables:
        out[v.name] = SuperPolynomial.var(src_lift, v.name)
    for j, v in enumerate(fiber):
        ddual_fiber = d2.dual_chart.variables[n_base + j]
        sign = 1 if kind == "odd" else (-1 if v.parity else 1)
        image_fiber = d1.pull_back(d2.pull_back(
            SuperPolynomial.var(d2.dual_lift, ddual_fiber.name))).scale(sign)
        image_mom = d1.pull_back(d2.pull_back(
            SuperPolynomial.var(d2.dual_lift, d2.dual_lift.momentum_of(ddual_fiber.name).name))).scale(sign)
        out[v.name] = image_fiber
        out[src_lift.momentum_of(v.name).name] = image_mom
    return out
