"""Structure verification: Q-fields, bracket tensors, compatibility, Yang-Baxter.

Every check returns a CheckReport carrying the exact obstruction polynomial,
so failing cases are regression-testable verbatim rather than reduced to a
boolean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple

from .brackets import canonical_bracket, canonical_poisson, canonical_schouten
from .geometry import (
    VectorField,
    anticotangent_lift,
    apply,
    commutator,
    cotangent_lift,
    hamiltonian_lift_p,
    multivector_lift_theta,
    promote,
)
from .superpoly import (
    Chart,
    GradedError,
    HomogeneityError,
    LiftKindError,
    MIXED,
    ODD,
    ParityMismatchError,
    SuperPolynomial,
    ZERO,
)

HALF = Fraction(1, 2)


class StructureError(GradedError):
    pass


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    residue: SuperPolynomial
    context: str = ""
    subchecks: Tuple["CheckReport", ...] = ()
    components: Optional[Tuple[Tuple[str, SuperPolynomial], ...]] = None

    def render(self) -> str:
        status = "pass" if self.passed else "FAIL"
        line = f"[{status}] {self.name}: residue = {self.residue.render()}"
        if self.context:
            line += f"  ({self.context})"
        for sub in self.subchecks:
            line += "\n  " + sub.render().replace("\n", "\n  ")
        return line


def _report(name: str, residue: SuperPolynomial, context: str = "",
            subchecks: Tuple[CheckReport, ...] = (),
            components=None) -> CheckReport:
    passed = residue.is_zero() and all(s.passed for s in subchecks)
    return CheckReport(name, passed, residue, context, subchecks, components)


def check_homological(Q: VectorField, name: str = "Q") -> CheckReport:
    """Residue (1/2)[Q, Q], reported per coordinate and as its p-lift Hamiltonian."""
    if Q.parity() == 0 or Q.parity() is MIXED:
        raise ParityMismatchError("a homological field must be odd")
    half_sq = commutator(Q, Q).scale(HALF)
    lift = cotangent_lift(Q.chart)
    residue = hamiltonian_lift_p(half_sq, lift)
    comps = tuple((v.name, half_sq.coefficient(v.name)) for v in Q.chart.variables
                  if not half_sq.coefficient(v.name).is_zero())
    return _report(f"homological({name})", residue,
                   context=f"chart {Q.chart.name}", components=comps or None)


def check_tensor(T: SuperPolynomial, lift_kind: Optional[str] = None,
                 name: str = "T") -> CheckReport:
    """Jacobi for the derived bracket of T: residue {T, T} on T's lift."""
    chart = T.chart
    if not chart.is_lift:
        raise LiftKindError("a bracket tensor must live on an (anti)cotangent lift")
    if lift_kind is not None and chart.kind != lift_kind:
        raise LiftKindError(f"tensor lives on a {chart.kind} lift, expected {lift_kind}")
    p = T.parity()
    required = 1 if chart.kind == "cotangent" else 0
    if p is MIXED or (p is not ZERO and p != required):
        raise ParityMismatchError(
            "a Schouten tensor is odd on T*M; a Poisson tensor is even on PiT*M")
    residue = canonical_bracket(T, T, chart)
    return _report(f"tensor({name})", residue, context=f"chart {chart.name}")


def check_compatibility(Q: VectorField, T: SuperPolynomial, kind: str,
                        name: str = "Q,T") -> CheckReport:
    """QS: residue {p(Q), T}; QP: residue {theta(Q), T}.  Both equal L_Q T up to sign."""
    if kind not in ("QS", "QP"):
        raise ValueError("kind must be 'QS' or 'QP'")
    lift = T.chart
    if not lift.is_lift or lift.base != Q.chart:
        raise LiftKindError("tensor must live on a lift of the field's chart")
    if kind == "QS":
        if lift.kind != "cotangent":
            raise LiftKindError("QS compatibility needs the tensor on a cotangent lift")
        residue = canonical_poisson(hamiltonian_lift_p(Q, lift), T, lift)
    else:
        if lift.kind != "anticotangent":
            raise LiftKindError("QP compatibility needs the tensor on an anticotangent lift")
        residue = canonical_schouten(multivector_lift_theta(Q, lift), T, lift)
    return _report(f"compatibility[{kind}]({name})", residue, context=f"chart {lift.name}")


def decompose_by_degree(f: SuperPolynomial, names) -> Dict[int, SuperPolynomial]:
    """Split a polynomial by total degree in the named variables."""
    idxs = {f.chart.var(n).order_index for n in names}
    parts: Dict[int, Dict] = {}
    for mono, coeff in f.terms.items():
        d = sum(e for i, e in mono if i in idxs)
        parts.setdefault(d, {})[mono] = coeff
    return {d: SuperPolynomial(f.chart, t) for d, t in sorted(parts.items())}


def linf_components(Q: VectorField) -> Dict[int, VectorField]:
    """Grade the obstruction (1/2)[Q, Q] by polynomial degree in the coordinates.

    For a formal field with constant + linear + quadratic + ... terms this is
    the linked sequence of higher Jacobi identities; degree d collects the
    obstruction to the d-th identity.
    """
    half_sq = commutator(Q, Q).scale(HALF)
    names = [v.name for v in Q.chart.variables]
    graded: Dict[int, Dict[str, SuperPolynomial]] = {}
    for v in Q.chart.variables:
        comp = half_sq.coefficient(v.name)
        for d, part in decompose_by_degree(comp, names).items():
            graded.setdefault(d, {})[v.name] = part
    return {d: VectorField(Q.chart, coeffs) for d, coeffs in sorted(graded.items())}


# ---------------------------------------------------------------------------
# Bialgebra verification


def even_cocycle_residue(c: "liealg.StructureConstants", b: "liealg.StructureConstants"):
    """Brute-force evaluation of the five-term cocycle identity for purely
    even structure constants c and dual constants b:

        c_jk^i b_i^nm - c_ji^n b_k^im + c_ji^m b_k^in
                      + c_ki^n b_j^im - c_ki^m b_j^in  = 0

    Returns the nonzero entries keyed by (j, k, n, m).
    """
    n = c.dim
    if any(p for p in c.parities):
        raise ParityMismatchError("the coordinate cocycle identity is stated for even algebras")
    out = {}
    for j in range(n):
        for k in range(n):
            for nn in range(n):
                for m in range(n):
                    acc = Fraction(0)
                    for i in range(n):
                        acc += (c.get(j, k, i) * b.get(nn, m, i)
                                - c.get(j, i, nn) * b.get(i, m, k)
                                + c.get(j, i, m) * b.get(i, nn, k)
                                + c.get(k, i, nn) * b.get(i, m, j)
                                - c.get(k, i, m) * b.get(i, nn, j))
                    if acc:
                        out[(j, k, nn, m)] = acc
    return out


def check_bialgebra(c, b, name: str = "g") -> CheckReport:
    """Three Poisson-bracket residues {Q,Q}, {S,S}, {Q,S} on T*Pi(g).

    For purely even inputs the displayed five-term coordinate identity is
    additionally evaluated by brute force and must agree with the {Q,S}
    residue's vanishing, entry for entry.
    """
    from . import liealg

    Q_hat = liealg.q_from_sc(c)
    lift = cotangent_lift(Q_hat.chart)
    Q = hamiltonian_lift_p(Q_hat, lift)
    S = liealg.cobracket_hamiltonian(b, lift)
    qq = canonical_poisson(Q, Q, lift)
    ss = canonical_poisson(S, S, lift)
    qs = canonical_poisson(Q, S, lift)
    subs = [
        _report("jacobi(c): {Q,Q}", qq),
        _report("jacobi(b): {S,S}", ss),
    ]
    if not any(c.parities):
        entries = even_cocycle_residue(c, b)
        coord = SuperPolynomial.zero(lift)
        ch = lift
        for (j, k, nn, m), valr in sorted(entries.items()):
            mono = (SuperPolynomial.var(ch, ch.variables[j].name)
                    * SuperPolynomial.var(ch, ch.variables[k].name)
                    * SuperPolynomial.var(ch, ch.variables[c.dim + nn].name)
                    * SuperPolynomial.var(ch, ch.variables[c.dim + m].name))
            coord = coord + mono.scale(valr)
        agree = (not entries) == qs.is_zero()
        subs.append(_report("cocycle-coordinate-identity", coord,
                            context="agrees with {Q,S}" if agree else "DISAGREES with {Q,S}"))
        if not agree:
            raise StructureError("coordinate cocycle identity disagrees with the {Q,S} residue")
    return _report(f"bialgebra({name})", qs, context="residue is {Q,S}",
                   subchecks=tuple(subs))


def yang_baxter(r: SuperPolynomial, Q: SuperPolynomial,
                name: str = "r") -> Tuple[CheckReport, CheckReport]:
    """Classical and generalized Yang-Baxter residues for a constant r.

    r must be even and depend on the momenta only; Q is the algebra
    Hamiltonian on the same cotangent lift.  Returns the pair
    (CYBE report with residue {r,r}_Q, gYBE report with residue {Q,{r,r}_Q}).
    A CYBE pass forces a gYBE pass.
    """
    chart = r.chart
    if chart.kind != "cotangent":
        raise LiftKindError("Yang-Baxter checks live on a cotangent lift")
    if r.parity() not in (0, ZERO):
        raise ParityMismatchError("r must be even")
    nb = chart.n_base
    if any(i < nb for mono in r.terms for i, _ in mono):
        raise StructureError("r must depend on the momenta only")
    inner = canonical_poisson(r, canonical_poisson(Q, r, chart), chart)
    outer = canonical_poisson(Q, inner, chart)
    cybe = _report(f"CYBE({name})", inner, context="residue is {r,r}_Q")
    gybe = _report(f"gYBE({name})", outer, context="residue is {Q,{r,r}_Q}")
    if cybe.passed and not gybe.passed:
        raise StructureError("CYBE passed but gYBE failed; brackets are inconsistent")
    return cybe, gybe


def algebroid_extract(Q: VectorField):
    """Read anchor and bracket coefficients off a weight-one homological field.

    The chart must split by weight into base variables (weight 0) and fiber
    variables (weight 1).  The field must have the profile

        Q = xi^i Q_i^a(x) d/dx^a + (1/2) xi^j xi^i Q_ij^k(x) d/dxi^k,

    i.e. the d/dx coefficients fiber-linear and the d/dxi coefficients
    fiber-quadratic; anything else (a constant, a cubic term, ...) raises.
    Returns (anchor, bracket) with anchor[(i, a)] = Q_i^a and
    bracket[(i, j, k)] = Q_ij^k, polynomials in the base variables.
    """
    chart = Q.chart
    base_vars = [v for v in chart.variables if v.weight == 0]
    fiber_vars = [v for v in chart.variables if v.weight == 1]
    if len(base_vars) + len(fiber_vars) != chart.n:
        raise StructureError("algebroid extraction needs a weight-0/weight-1 chart split")
    fiber_names = [v.name for v in fiber_vars]
    anchor = {}
    bracket = {}
    for a, xv in enumerate(base_vars):
        comp = Q.coefficient(xv.name)
        degs = decompose_by_degree(comp, fiber_names)
        if any(d != 1 for d in degs):
            raise StructureError(
                f"d/d{xv.name} coefficient has fiber degrees {sorted(degs)}; expected exactly 1")
        for i, xi in enumerate(fiber_vars):
            q_ia = comp.left_partial(xi.name)
            if not q_ia.is_zero():
                anchor[(i, a)] = q_ia
    for k, xk in enumerate(fiber_vars):
        comp = Q.coefficient(xk.name)
        degs = decompose_by_degree(comp, fiber_names)
        if any(d != 2 for d in degs):
            raise StructureError(
                f"d/d{xk.name} coefficient has fiber degrees {sorted(degs)}; expected exactly 2")
        # Q_ij^k = d_i(d_j(X^k)) for the expansion (1/2) xi^j xi^i Q_ij^k.
        for j, xj in enumerate(fiber_vars):
            inner = comp.left_partial(xj.name)
            for i, xi in enumerate(fiber_vars):
                q_ijk = inner.left_partial(xi.name)
                if not q_ijk.is_zero():
                    bracket[(i, j, k)] = q_ijk
    return anchor, bracket
