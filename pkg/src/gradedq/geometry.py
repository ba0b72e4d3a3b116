"""Charts with weight systems, (anti)cotangent lifts, and vector fields.

A cotangent lift appends one even-shifted momentum per base variable; an
anticotangent lift appends parity-reversed momenta.  When a GradingSystem is
supplied the appended momenta carry the total weight -w_a + (q - s), so the
lifted chart's stored weights are total weights; without a grading the plain
induced weight -w_a is used (this is what second lifts need).

Vector fields are derivations X = sum_a X^a d/dx^a with coefficients on the
left.  Parity of a homogeneous field is parity(X^a) + parity(x^a), uniform
over a; weight is weight(X^a) - weight(x^a).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

from .superpoly import (
    Chart,
    ChartMismatchError,
    Grade,
    HomogeneityError,
    LiftKindError,
    MIXED,
    ODD,
    ZERO,
    Scalar,
    SuperPolynomial,
    UnknownVariableError,
    VariableDecl,
)


@dataclass(frozen=True)
class GradingSystem:
    """Weights of the structure fields and the derived lift shift.

    kind "QS": s_or_p is the weight s of the Schouten bracket; the double
    lives on a cotangent lift.  kind "QP": s_or_p is the weight p of the
    Poisson bracket; the double lives on an anticotangent lift.  lam is the
    pencil parameter for Q_D = Q + lam * tensor.
    """

    kind: str
    q: int
    s_or_p: int
    lam: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.kind not in ("QS", "QP"):
            raise ValueError(f"grading kind must be 'QS' or 'QP', got {self.kind!r}")
        object.__setattr__(self, "lam", Fraction(self.lam))

    @property
    def shift(self) -> int:
        """The (q - s) / (q - p) increment carried by first-lift momenta."""
        return self.q - self.s_or_p


def _lift(chart: Chart, kind: str, shift: int, names: Optional[Sequence[str]], prefixes) -> Chart:
    if names is None:
        taken = {v.name for v in chart.variables}
        for prefix in prefixes:
            candidate = [f"{prefix}{v.name}" for v in chart.variables]
            if taken.isdisjoint(candidate):
                names = candidate
                break
        else:  # pragma: no cover - the numbered prefixes always terminate
            raise ValueError("could not generate momentum names")
    momenta = []
    for i, v in enumerate(chart.variables):
        parity = v.parity if kind == "cotangent" else (v.parity + 1) % 2
        momenta.append(VariableDecl(names[i], parity, -v.weight + shift, chart.n + i))
    return Chart(
        name=f"{'T*' if kind == 'cotangent' else 'PiT*'}{chart.name}",
        variables=chart.variables + tuple(momenta),
        kind=kind,
        base=chart,
    )


def _prefix_sequence(first: str, second: str):
    yield first
    yield second
    i = 2
    while True:
        yield f"{first[:-1]}{i}_"
        i += 1


def cotangent_lift(chart: Chart, grading: Optional[GradingSystem] = None,
                   names: Optional[Sequence[str]] = None) -> Chart:
    """T*chart: momenta p_a with parity(x^a) and weight -w_a (+ q-s if graded).

    Generated names use the first collision-free prefix of p_, q_, p2_, ...
    (a second lift's momenta come out as q_<name>).
    """
    shift = grading.shift if grading is not None else 0
    return _lift(chart, "cotangent", shift, names, _prefix_sequence("p_", "q_"))


def anticotangent_lift(chart: Chart, grading: Optional[GradingSystem] = None,
                       names: Optional[Sequence[str]] = None) -> Chart:
    """PiT*chart: momenta x*_a with parity(x^a)+1 and weight -w_a (+ q-p if graded)."""
    shift = grading.shift if grading is not None else 0
    return _lift(chart, "anticotangent", shift, names, _prefix_sequence("ast_", "bst_"))


def promote(f: SuperPolynomial, lift: Chart) -> SuperPolynomial:
    """Reinterpret a polynomial on the base chart as one on its lift.

    Base variables occupy the same leading positions in the lift, so the
    monomial keys carry over unchanged.
    """
    if not lift.is_lift or lift.base != f.chart:
        raise ChartMismatchError(f"chart {lift.name!r} is not a lift of {f.chart.name!r}")
    return SuperPolynomial(lift, dict(f.terms))


def restrict_to_base(f: SuperPolynomial, base: Chart) -> SuperPolynomial:
    """Set all momenta of a lift to zero and re-home the result to the base."""
    if not f.chart.is_lift or f.chart.base != base:
        raise ChartMismatchError(f"chart {f.chart.name!r} is not a lift of {base.name!r}")
    nb = f.chart.n_base
    out = {m: c for m, c in f.terms.items() if all(i < nb for i, _ in m)}
    return SuperPolynomial(base, out)


@dataclass(frozen=True)
class VectorField:
    """Derivation sum_a X^a d/dx^a; absent coefficients are zero."""

    chart: Chart
    coefficients: Mapping[str, SuperPolynomial] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean: Dict[str, SuperPolynomial] = {}
        for name, poly in self.coefficients.items():
            self.chart.var(name)
            if poly.chart != self.chart:
                raise ChartMismatchError(f"coefficient of d/d{name} lives on the wrong chart")
            if not poly.is_zero():
                clean[name] = poly
        object.__setattr__(self, "coefficients", clean)

    def coefficient(self, name: str) -> SuperPolynomial:
        self.chart.var(name)
        return self.coefficients.get(name, SuperPolynomial.zero(self.chart))

    def is_zero(self) -> bool:
        return not self.coefficients

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.chart == other.chart and self.coefficients == other.coefficients

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: "VectorField") -> "VectorField":
        if self.chart != other.chart:
            raise ChartMismatchError("cannot add fields on different charts")
        out = dict(self.coefficients)
        for name, poly in other.coefficients.items():
            out[name] = out[name] + poly if name in out else poly
        return VectorField(self.chart, out)

    def __neg__(self) -> "VectorField":
        return VectorField(self.chart, {n: -p for n, p in self.coefficients.items()})

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def scale(self, scalar: Scalar) -> "VectorField":
        return VectorField(self.chart, {n: p.scale(scalar) for n, p in self.coefficients.items()})

    def parity(self) -> Grade:
        grades = set()
        for name, poly in self.coefficients.items():
            v = self.chart.var(name)
            p = poly.parity()
            if p is MIXED:
                return MIXED
            grades.add((p + v.parity) % 2)
        if not grades:
            return ZERO
        return grades.pop() if len(grades) == 1 else MIXED

    def weight(self) -> Grade:
        grades = set()
        for name, poly in self.coefficients.items():
            v = self.chart.var(name)
            w = poly.weight()
            if w is MIXED:
                return MIXED
            grades.add(w - v.weight)
        if not grades:
            return ZERO
        return grades.pop() if len(grades) == 1 else MIXED

    def parity_parts(self) -> Dict[int, "VectorField"]:
        """Decompose into parity-homogeneous fields (decompose-and-sum helper)."""
        parts: Dict[int, Dict[str, SuperPolynomial]] = {}
        for name, poly in self.coefficients.items():
            vp = self.chart.var(name).parity
            for p, comp in poly.parity_decomposition().items():
                parts.setdefault((p + vp) % 2, {})[name] = comp
        return {p: VectorField(self.chart, coeffs) for p, coeffs in sorted(parts.items())}

    def render(self) -> str:
        pieces = []
        for v in self.chart.variables:
            poly = self.coefficients.get(v.name)
            if poly is not None:
                pieces.append(f"({poly.render()}) d/d{v.name}")
        return " + ".join(pieces) if pieces else "0"

    def __repr__(self) -> str:
        return f"<VectorField {self.render()} on {self.chart.name!r}>"


def apply(X: VectorField, f: SuperPolynomial) -> SuperPolynomial:
    """X(f) = sum_a X^a * left_partial(f, x^a)."""
    if X.chart != f.chart:
        raise ChartMismatchError("field and polynomial live on different charts")
    out = SuperPolynomial.zero(f.chart)
    for name, coeff in X.coefficients.items():
        out = out + coeff * f.left_partial(name)
    return out


def commutator(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y] = X Y - (-1)^{X~ Y~} Y X, recovered on coordinate functions."""
    if X.chart != Y.chart:
        raise ChartMismatchError("fields live on different charts")
    px, py = X.parity(), Y.parity()
    if px is MIXED or py is MIXED:
        raise HomogeneityError("commutator requires parity-homogeneous fields; use parity_parts")
    if px is ZERO or py is ZERO:
        return VectorField(X.chart, {})
    sign = -1 if (px * py) % 2 else 1
    out: Dict[str, SuperPolynomial] = {}
    for name in set(X.coefficients) | set(Y.coefficients):
        comp = apply(X, Y.coefficient(name)) - apply(Y, X.coefficient(name)).scale(sign)
        out[name] = comp
    return VectorField(X.chart, out)


def hamiltonian_lift_p(X: VectorField, lift: Chart) -> SuperPolynomial:
    """p(X) = sum_a X^a p_a on the cotangent lift of X's chart."""
    if lift.kind != "cotangent" or lift.base != X.chart:
        raise LiftKindError(f"{lift.name!r} is not a cotangent lift of {X.chart.name!r}")
    out = SuperPolynomial.zero(lift)
    for name, coeff in X.coefficients.items():
        p = SuperPolynomial.var(lift, lift.momentum_of(name).name)
        out = out + promote(coeff, lift) * p
    return out


def multivector_lift_theta(X: VectorField, lift: Chart) -> SuperPolynomial:
    """theta(X) = (-1)^{X~} sum_a X^a x*_a on the anticotangent lift.

    For base functions f this satisfies {theta(X), f} = (-1)^{X~} X(f) under
    the canonical Schouten bracket; in particular theta(Q) = -Q^a x*_a for an
    odd field.
    """
    if lift.kind != "anticotangent" or lift.base != X.chart:
        raise LiftKindError(f"{lift.name!r} is not an anticotangent lift of {X.chart.name!r}")
    p = X.parity()
    if p is MIXED:
        raise HomogeneityError("theta lift requires a parity-homogeneous field")
    sign = -1 if p is not ZERO and p % 2 else 1
    out = SuperPolynomial.zero(lift)
    for name, coeff in X.coefficients.items():
        ast = SuperPolynomial.var(lift, lift.momentum_of(name).name)
        out = out + promote(coeff, lift) * ast
    return out.scale(sign)


def hamiltonian_vector_field(H: SuperPolynomial, bracket_kind: Optional[str] = None) -> VectorField:
    """X_H = {H, .} under the canonical bracket of H's (lifted) chart.

    The coefficients are the brackets with the coordinate functions; the
    bi-derivation property extends them uniquely.
    """
    from . import brackets  # local import: brackets builds on this module

    chart = H.chart
    if not chart.is_lift:
        raise LiftKindError(f"chart {chart.name!r} is not a lift")
    kind = bracket_kind or ("poisson" if chart.kind == "cotangent" else "schouten")
    if kind == "poisson" and chart.kind != "cotangent":
        raise LiftKindError("Poisson Hamiltonian field needs a cotangent lift")
    if kind == "schouten" and chart.kind != "anticotangent":
        raise LiftKindError("Schouten Hamiltonian field needs an anticotangent lift")
    bracket = brackets.canonical_poisson if kind == "poisson" else brackets.canonical_schouten
    coeffs = {}
    for v in chart.variables:
        coeffs[v.name] = bracket(H, SuperPolynomial.var(chart, v.name), chart)
    return VectorField(chart, coeffs)


def field_from_table(chart: Chart, table: Mapping[str, SuperPolynomial]) -> VectorField:
    return VectorField(chart, dict(table))
