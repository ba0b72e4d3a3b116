"""Exact supercommutative polynomial arithmetic with independent Z2 and Z gradings.

A chart declares an ordered list of variables, each carrying a parity (0 even,
1 odd) and an integer weight.  Polynomials are finite sums of canonically
ordered monomials with Fraction coefficients:

    SuperPolynomial.terms : Dict[Mono, Fraction]
    Mono = Tuple[(order_index, exponent), ...]   sorted by order_index

Odd variables square to zero and anticommute; every product is normalized back
to chart declaration order with the Koszul sign.  The zero polynomial is the
empty dict.  All values are immutable after construction and every operation
is pure.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

EVEN = 0
ODD = 1

Mono = Tuple[Tuple[int, int], ...]
Scalar = Union[int, Fraction]


class GradedError(Exception):
    """Base class for all engine errors."""


class ChartMismatchError(GradedError):
    pass


class UnknownVariableError(GradedError):
    pass


class ParityMismatchError(GradedError):
    pass


class HomogeneityError(GradedError):
    """An operation required a parity- or weight-homogeneous input."""


class LiftKindError(GradedError):
    """A chart was not the required kind of (anti)cotangent lift."""


class _GradeTag:
    __slots__ = ("label",)

    def __init__(self, label: str) -> None:
        self.label = label

    def __repr__(self) -> str:
        return self.label


#: Grade of the zero polynomial (homogeneous of every grade).
ZERO = _GradeTag("ZERO")
#: Grade of a non-homogeneous polynomial; use the decompositions to split it.
MIXED = _GradeTag("MIXED")

Grade = Union[int, _GradeTag]


@dataclass(frozen=True)
class VariableDecl:
    name: str
    parity: int
    weight: int
    order_index: int

    def __post_init__(self) -> None:
        if self.parity not in (EVEN, ODD):
            raise ValueError(f"parity must be 0 or 1, got {self.parity}")


@dataclass(frozen=True)
class Chart:
    """An ordered variable universe.  Lifts remember their base chart.

    kind is one of "base", "cotangent", "anticotangent".  A lifted chart lists
    the base variables first and then one momentum per base variable in the
    same order, so variables[i] has momentum variables[n + i].
    """

    name: str
    variables: Tuple[VariableDecl, ...]
    kind: str = "base"
    base: Optional["Chart"] = None

    def __post_init__(self) -> None:
        seen = set()
        for pos, v in enumerate(self.variables):
            if v.name in seen:
                raise ValueError(f"duplicate variable name {v.name!r} in chart {self.name!r}")
            if v.order_index != pos:
                raise ValueError(f"variable {v.name!r} has order_index {v.order_index}, expected {pos}")
            seen.add(v.name)
        if self.kind not in ("base", "cotangent", "anticotangent"):
            raise ValueError(f"bad chart kind {self.kind!r}")
        if self.kind != "base":
            if self.base is None or len(self.variables) != 2 * len(self.base.variables):
                raise ValueError("lifted chart must double its base chart")

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def is_lift(self) -> bool:
        return self.kind in ("cotangent", "anticotangent")

    @property
    def n_base(self) -> int:
        if not self.is_lift:
            raise LiftKindError(f"chart {self.name!r} is not a lift")
        return self.n // 2

    def var(self, name: str) -> VariableDecl:
        for v in self.variables:
            if v.name == name:
                return v
        raise UnknownVariableError(f"no variable {name!r} in chart {self.name!r}")

    def has_var(self, name: str) -> bool:
        return any(v.name == name for v in self.variables)

    def momentum_of(self, name: str) -> VariableDecl:
        nb = self.n_base
        for i in range(nb):
            if self.variables[i].name == name:
                return self.variables[nb + i]
        raise UnknownVariableError(f"{name!r} is not a base variable of lift {self.name!r}")

    def base_pairs(self) -> Tuple[Tuple[VariableDecl, VariableDecl], ...]:
        """(base variable, its momentum) pairs of a lifted chart."""
        nb = self.n_base
        return tuple((self.variables[i], self.variables[nb + i]) for i in range(nb))


def make_chart(name: str, specs: Iterable[Tuple[str, int, int]]) -> Chart:
    """Build a base chart from (name, parity, weight) triples."""
    decls = tuple(VariableDecl(n, p, w, i) for i, (n, p, w) in enumerate(specs))
    return Chart(name=name, variables=decls)


def _merge_monomials(variables: Tuple[VariableDecl, ...], m1: Mono, m2: Mono):
    """Multiply canonical monomials.  Returns (sign, merged) or (0, None).

    The sign counts the odd-odd inversions between the two factors; a repeated
    odd variable annihilates the product.
    """
    if not m1:
        return 1, m2
    if not m2:
        return 1, m1
    odd1 = [i for i, _ in m1 if variables[i].parity]
    odd1_set = set(odd1)
    crossings = 0
    for i, _ in m2:
        if variables[i].parity:
            if i in odd1_set:
                return 0, None
            crossings += len(odd1) - bisect_right(odd1, i)
    merged = dict(m1)
    for i, e in m2:
        merged[i] = merged.get(i, 0) + e
    mono = tuple(sorted(merged.items()))
    return (-1 if crossings % 2 else 1), mono


class SuperPolynomial:
    """A finite Fraction-linear combination of canonical monomials."""

    __slots__ = ("chart", "terms")

    def __init__(self, chart: Chart, terms: Mapping[Mono, Scalar]) -> None:
        self.chart = chart
        clean: Dict[Mono, Fraction] = {}
        for mono, coeff in terms.items():
            c = Fraction(coeff)
            if c:
                clean[mono] = c
        self.terms = clean

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(chart: Chart) -> "SuperPolynomial":
        return SuperPolynomial(chart, {})

    @staticmethod
    def const(chart: Chart, value: Scalar) -> "SuperPolynomial":
        return SuperPolynomial(chart, {(): Fraction(value)})

    @staticmethod
    def var(chart: Chart, name: str) -> "SuperPolynomial":
        v = chart.var(name)
        return SuperPolynomial(chart, {((v.order_index, 1),): Fraction(1)})

    @staticmethod
    def monomial(chart: Chart, names: Iterable[str], coeff: Scalar = 1) -> "SuperPolynomial":
        """Product of the named variables, in the given order, times coeff."""
        out = SuperPolynomial.const(chart, coeff)
        for name in names:
            out = out * SuperPolynomial.var(chart, name)
        return out

    # -- basic queries ------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SuperPolynomial):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    def __ne__(self, other: object) -> bool:
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    __hash__ = None  # type: ignore[assignment]

    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(e for _, e in mono) for mono in self.terms)

    def degree_in(self, names: Iterable[str]) -> int:
        """Maximal total degree in the named variables over all terms."""
        idxs = {self.chart.var(n).order_index for n in names}
        if not self.terms:
            return 0
        return max(sum(e for i, e in mono if i in idxs) for mono in self.terms)

    # -- ring operations ----------------------------------------------

    def _check_chart(self, other: "SuperPolynomial") -> None:
        if self.chart != other.chart:
            raise ChartMismatchError(
                f"operands live on different charts: {self.chart.name!r} vs {other.chart.name!r}")

    def __add__(self, other: "SuperPolynomial") -> "SuperPolynomial":
        self._check_chart(other)
        out = dict(self.terms)
        for mono, coeff in other.terms.items():
            out[mono] = out.get(mono, Fraction(0)) + coeff
        return SuperPolynomial(self.chart, out)

    def __neg__(self) -> "SuperPolynomial":
        return SuperPolynomial(self.chart, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "SuperPolynomial") -> "SuperPolynomial":
        return self + (-other)

    def __mul__(self, other: Union["SuperPolynomial", Scalar]) -> "SuperPolynomial":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._check_chart(other)
        variables = self.chart.variables
        out: Dict[Mono, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                sign, mono = _merge_monomials(variables, m1, m2)
                if sign == 0:
                    continue
                c = c1 * c2 * sign
                acc = out.get(mono)
                out[mono] = c if acc is None else acc + c
        return SuperPolynomial(self.chart, out)

    def __rmul__(self, scalar: Scalar) -> "SuperPolynomial":
        return self.scale(scalar)

    def scale(self, scalar: Scalar) -> "SuperPolynomial":
        c = Fraction(scalar)
        return SuperPolynomial(self.chart, {m: c * v for m, v in self.terms.items()})

    def __pow__(self, n: int) -> "SuperPolynomial":
        if n < 0:
            raise ValueError("negative powers are not defined")
        out = SuperPolynomial.const(self.chart, 1)
        for _ in range(n):
            out = out * self
        return out

    # -- gradings -----------------------------------------------------

    def _mono_parity(self, mono: Mono) -> int:
        variables = self.chart.variables
        return sum(variables[i].parity * e for i, e in mono) % 2

    def _mono_weight(self, mono: Mono) -> int:
        variables = self.chart.variables
        return sum(variables[i].weight * e for i, e in mono)

    def parity_decomposition(self) -> Dict[int, "SuperPolynomial"]:
        """Split into even and odd parts; only nonzero parts are returned."""
        parts: Dict[int, Dict[Mono, Fraction]] = {}
        for mono, coeff in self.terms.items():
            parts.setdefault(self._mono_parity(mono), {})[mono] = coeff
        return {p: SuperPolynomial(self.chart, t) for p, t in sorted(parts.items())}

    def weight_decomposition(self) -> Dict[int, "SuperPolynomial"]:
        parts: Dict[int, Dict[Mono, Fraction]] = {}
        for mono, coeff in self.terms.items():
            parts.setdefault(self._mono_weight(mono), {})[mono] = coeff
        return {w: SuperPolynomial(self.chart, t) for w, t in sorted(parts.items())}

    def parity(self) -> Grade:
        if not self.terms:
            return ZERO
        grades = {self._mono_parity(m) for m in self.terms}
        return grades.pop() if len(grades) == 1 else MIXED

    def weight(self) -> Grade:
        if not self.terms:
            return ZERO
        grades = {self._mono_weight(m) for m in self.terms}
        return grades.pop() if len(grades) == 1 else MIXED

    # -- calculus -----------------------------------------------------

    def left_partial(self, name: str) -> "SuperPolynomial":
        """Left derivative with respect to the named variable.

        Each occurrence is moved to the front of the canonical word, picking
        up a sign per odd factor it crosses, then removed.
        """
        v = self.chart.var(name)
        idx = v.order_index
        variables = self.chart.variables
        out: Dict[Mono, Fraction] = {}
        for mono, coeff in self.terms.items():
            exp = None
            for i, e in mono:
                if i == idx:
                    exp = e
                    break
            if exp is None:
                continue
            if v.parity:
                crossings = sum(1 for i, _ in mono if i < idx and variables[i].parity)
                c = coeff * (-1 if crossings % 2 else 1)
            else:
                c = coeff * exp
            rest = tuple((i, e if i != idx else e - 1) for i, e in mono if not (i == idx and e == 1))
            rest = tuple((i, e) for i, e in rest if e > 0)
            acc = out.get(rest)
            out[rest] = c if acc is None else acc + c
        return SuperPolynomial(self.chart, out)

    def substitute(self, images: Mapping[str, "SuperPolynomial"], target_chart: Chart) -> "SuperPolynomial":
        """Algebra morphism sending each chart variable to its image.

        Every variable of the source chart must have an image over the target
        chart whose parity is homogeneous and equal to the variable's parity
        (the zero polynomial is allowed).
        """
        table: Dict[int, SuperPolynomial] = {}
        for v in self.chart.variables:
            if v.name not in images:
                raise UnknownVariableError(f"substitution is missing an image for {v.name!r}")
            img = images[v.name]
            if img.chart != target_chart:
                raise ChartMismatchError(f"image of {v.name!r} lives on chart {img.chart.name!r}")
            p = img.parity()
            if p is MIXED or (p is not ZERO and p != v.parity):
                raise ParityMismatchError(
                    f"image of {v.name!r} must be parity-homogeneous of parity {v.parity}")
            table[v.order_index] = img
        out = SuperPolynomial.zero(target_chart)
        for mono, coeff in self.terms.items():
            factor = SuperPolynomial.const(target_chart, coeff)
            for i, e in mono:
                img = table[i]
                for _ in range(e):
                    factor = factor * img
                if factor.is_zero():
                    break
            out = out + factor
        return out

    # -- rendering ----------------------------------------------------

    def _dense(self, mono: Mono) -> Tuple[int, ...]:
        exps = [0] * self.chart.n
        for i, e in mono:
            exps[i] = e
        return tuple(exps)

    def sorted_terms(self):
        """Terms in canonical order: by total degree, then lexicographically."""
        return sorted(self.terms.items(), key=lambda kv: (sum(e for _, e in kv[0]), self._dense(kv[0])))

    def render(self) -> str:
        if not self.terms:
            return "0"
        variables = self.chart.variables
        pieces = []
        for mono, coeff in self.sorted_terms():
            factors = [variables[i].name if e == 1 else f"{variables[i].name}^{e}" for i, e in mono]
            mono_str = "*".join(factors)
            mag = abs(coeff)
            if not mono_str:
                body = str(mag)
            elif mag == 1:
                body = mono_str
            else:
                body = f"{mag}*{mono_str}"
            pieces.append(("-" if coeff < 0 else "+", body))
        sign, body = pieces[0]
        text = ("-" if sign == "-" else "") + body
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self) -> str:
        return f"<SuperPolynomial {self.render()} on {self.chart.name!r}>"


# Spec-facing aliases for the module operations.

def normalize_product(f: SuperPolynomial, g: SuperPolynomial) -> SuperPolynomial:
    return f * g


def add(f: SuperPolynomial, g: SuperPolynomial) -> SuperPolynomial:
    return f + g


def scalar_mul(c: Scalar, f: SuperPolynomial) -> SuperPolynomial:
    return f.scale(c)


def left_partial(f: SuperPolynomial, v: Union[str, VariableDecl]) -> SuperPolynomial:
    return f.left_partial(v if isinstance(v, str) else v.name)


def parity_of(f: SuperPolynomial) -> Grade:
    return f.parity()


def weight_of(f: SuperPolynomial) -> Grade:
    return f.weight()


def substitute(f: SuperPolynomial, images: Mapping[str, SuperPolynomial], target_chart: Chart) -> SuperPolynomial:
    return f.substitute(images, target_chart)
