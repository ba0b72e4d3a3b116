"""Canonical Poisson and Schouten brackets on lifted charts, derived brackets.

On a cotangent lift with pairs (x^a, p_a):

    {f,g} = (-1)^{a~(f~+1)} df/dp_a dg/dx^a - (-1)^{a~ f~} df/dx^a dg/dp_a

so that {p_a, x^b} = delta_a^b.  On an anticotangent lift with pairs
(x^a, x*_a):

    {f,g} = (-1)^{(a~+1)(f~+1)} df/dx*_a dg/dx^a - (-1)^{a~(f~+1)} df/dx^a dg/dx*_a

so that {x*_a, x^b} = delta_a^b = -{x^b, x*_a}.  Here a~ is the parity of the
base coordinate x^a.  Mixed-parity inputs are decomposed automatically (the
sign only involves the parity of the first argument).
"""

from __future__ import annotations

from typing import Optional

from .geometry import VectorField, hamiltonian_lift_p, multivector_lift_theta
from .superpoly import (
    Chart,
    ChartMismatchError,
    LiftKindError,
    MIXED,
    ParityMismatchError,
    SuperPolynomial,
    ZERO,
)


def _check_lift(f: SuperPolynomial, g: SuperPolynomial, lift: Optional[Chart], kind: str) -> Chart:
    chart = lift if lift is not None else f.chart
    if chart.kind != kind:
        raise LiftKindError(f"chart {chart.name!r} is not a {kind} lift")
    if f.chart != chart or g.chart != chart:
        raise ChartMismatchError("bracket operands must live on the lift chart")
    return chart


def _poisson_homogeneous(f: SuperPolynomial, fpar: int, g: SuperPolynomial, chart: Chart) -> SuperPolynomial:
    out = SuperPolynomial.zero(chart)
    for xv, pv in chart.base_pairs():
        a = xv.parity
        s1 = -1 if (a * (fpar + 1)) % 2 else 1
        s2 = -1 if (a * fpar) % 2 else 1
        df_dp = f.left_partial(pv.name)
        if df_dp:
            out = out + (df_dp * g.left_partial(xv.name)).scale(s1)
        df_dx = f.left_partial(xv.name)
        if df_dx:
            out = out - (df_dx * g.left_partial(pv.name)).scale(s2)
    return out


def _schouten_homogeneous(f: SuperPolynomial, fpar: int, g: SuperPolynomial, chart: Chart) -> SuperPolynomial:
    out = SuperPolynomial.zero(chart)
    for xv, astv in chart.base_pairs():
        a = xv.parity
        s1 = -1 if ((a + 1) * (fpar + 1)) % 2 else 1
        s2 = -1 if (a * (fpar + 1)) % 2 else 1
        df_dast = f.left_partial(astv.name)
        if df_dast:
            out = out + (df_dast * g.left_partial(xv.name)).scale(s1)
        df_dx = f.left_partial(xv.name)
        if df_dx:
            out = out - (df_dx * g.left_partial(astv.name)).scale(s2)
    return out


def canonical_poisson(f: SuperPolynomial, g: SuperPolynomial, lift: Optional[Chart] = None) -> SuperPolynomial:
    chart = _check_lift(f, g, lift, "cotangent")
    out = SuperPolynomial.zero(chart)
    for fpar, fpart in f.parity_decomposition().items():
        out = out + _poisson_homogeneous(fpart, fpar, g, chart)
    return out


def canonical_schouten(f: SuperPolynomial, g: SuperPolynomial, lift: Optional[Chart] = None) -> SuperPolynomial:
    chart = _check_lift(f, g, lift, "anticotangent")
    out = SuperPolynomial.zero(chart)
    for fpar, fpart in f.parity_decomposition().items():
        out = out + _schouten_homogeneous(fpart, fpar, g, chart)
    return out


def canonical_bracket(f: SuperPolynomial, g: SuperPolynomial, lift: Optional[Chart] = None) -> SuperPolynomial:
    chart = lift if lift is not None else f.chart
    if chart.kind == "cotangent":
        return canonical_poisson(f, g, chart)
    if chart.kind == "anticotangent":
        return canonical_schouten(f, g, chart)
    raise LiftKindError(f"chart {chart.name!r} is not a lift")


def derived_bracket(T: SuperPolynomial, f: SuperPolynomial, g: SuperPolynomial,
                    lift: Optional[Chart] = None) -> SuperPolynomial:
    """{f, g}_T := {f, {T, g}} under the canonical bracket of the lift.

    ad_T must be an odd derivation: an odd fiber-quadratic Hamiltonian on a
    cotangent lift yields a Schouten bracket of the base, an even bivector
    field on an anticotangent lift yields a Poisson bracket.  Non-quadratic T
    is permitted and returns momentum-carrying (Loday-type) results.
    """
    chart = lift if lift is not None else T.chart
    p = T.parity()
    required = 1 if chart.kind == "cotangent" else 0
    if p is MIXED or (p is not ZERO and p != required):
        raise ParityMismatchError(
            "derived bracket needs ad_T odd: an odd generator on a cotangent lift, "
            "an even one on an anticotangent lift")
    inner = canonical_bracket(T, g, chart)
    return canonical_bracket(f, inner, chart)


def lie_derivative(Q: VectorField, T: SuperPolynomial, lift: Chart) -> SuperPolynomial:
    """L_Q T = {p(Q), T} on a cotangent lift, {theta(Q), T} on an anticotangent one."""
    if T.chart != lift:
        raise ChartMismatchError("tensor does not live on the given lift")
    if lift.kind == "cotangent":
        return canonical_poisson(hamiltonian_lift_p(Q, lift), T, lift)
    if lift.kind == "anticotangent":
        return canonical_schouten(multivector_lift_theta(Q, lift), T, lift)
    raise LiftKindError(f"chart {lift.name!r} is not a lift")
