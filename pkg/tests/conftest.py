"""Shared chart fixtures and seeded random polynomial generators."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations_with_replacement

from gradedq.superpoly import Chart, SuperPolynomial, make_chart


def chart_r13() -> Chart:
    """x even weight 2; xi1..xi3 odd weight 1 (the nonlinear worked example)."""
    return make_chart("M", [("x", 0, 2), ("xi1", 1, 1), ("xi2", 1, 1), ("xi3", 1, 1)])


def chart_mixed(n_even: int, n_odd: int, weights=None) -> Chart:
    specs = []
    for i in range(n_even):
        w = weights[i] if weights else 1
        specs.append((f"a{i + 1}", 0, w))
    for i in range(n_odd):
        w = weights[n_even + i] if weights else 1
        specs.append((f"th{i + 1}", 1, w))
    return make_chart(f"C{n_even}|{n_odd}", specs)


def random_poly(rng: random.Random, chart: Chart, max_degree: int,
                parity=None, terms: int = 4) -> SuperPolynomial:
    """A random polynomial; if parity is given, only monomials of that parity."""
    out = SuperPolynomial.zero(chart)
    names = [v.name for v in chart.variables]
    attempts = 0
    while terms > 0 and attempts < 60:
        attempts += 1
        degree = rng.randint(0, max_degree)
        picks = [rng.choice(names) for _ in range(degree)]
        mono = SuperPolynomial.const(chart, Fraction(rng.randint(-4, 4), rng.randint(1, 3)))
        for name in picks:
            mono = mono * SuperPolynomial.var(chart, name)
        if mono.is_zero():
            continue
        if parity is not None and mono.parity() != parity:
            continue
        out = out + mono
        terms -= 1
    if parity is not None and out.parity() not in (parity,):
        # fall back to a guaranteed-homogeneous value
        if parity == 0:
            return SuperPolynomial.const(chart, 1)
        for v in chart.variables:
            if v.parity == 1:
                return SuperPolynomial.var(chart, v.name)
        raise AssertionError("chart has no odd variable")
    return out


def random_field(rng: random.Random, chart: Chart, max_degree: int, parity: int):
    """A random parity-homogeneous vector field."""
    from gradedq.geometry import VectorField

    coeffs = {}
    for v in chart.variables:
        want = (parity + v.parity) % 2
        coeffs[v.name] = random_poly(rng, chart, max_degree, parity=want, terms=2)
    return VectorField(chart, coeffs)
