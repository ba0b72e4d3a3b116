"""Declaration-file parser and pretty-printer.

Grammar (semicolon-terminated statements, '#' comments):

    chart NAME { var a, b : even|odd, weight INT; ... }
    grading NAME { q = INT; s = INT; lambda = RAT; }      # or p = INT
    field NAME on CHART = (EXPR) d/dVAR + ... ;
    tensor NAME on lift(CHART)|antilift(CHART) = EXPR ;
    connection NAME { Gamma[a,b,c] = EXPR; ... }
    algebra NAME = q(N)|gl(N)|sl(N)|susy1|sc "file.json" ;

EXPR uses identifiers, integer/rational literals, + - * ^ and parentheses.
Every error carries the source line and column.  Expression results are
capped at a configurable total degree (GRADEDQ_DEGREE_CAP, default 64).
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .doubles import Connection
from .geometry import GradingSystem, VectorField, anticotangent_lift, cotangent_lift
from .liealg import Algebra, StructureConstants, builtin_algebra
from .superpoly import Chart, GradedError, SuperPolynomial, VariableDecl

DEFAULT_DEGREE_CAP = 64


class ParseError(GradedError):
    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<ddvar>d/d[A-Za-z_][A-Za-z0-9_]*)
  | (?P<number>\d+(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<sym>[{}()\[\]=;,:+\-*^])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


@dataclass
class ModelFile:
    charts: Dict[str, Chart] = field(default_factory=dict)
    gradings: Dict[str, GradingSystem] = field(default_factory=dict)
    fields: Dict[str, VectorField] = field(default_factory=dict)
    tensors: Dict[str, SuperPolynomial] = field(default_factory=dict)
    connections: Dict[str, Connection] = field(default_factory=dict)
    algebras: Dict[str, Algebra] = field(default_factory=dict)
    algebra_decls: Dict[str, str] = field(default_factory=dict)
    tensor_lift_kind: Dict[str, str] = field(default_factory=dict)
    base_dir: Optional[str] = None

    def lift_of(self, chart_name: str, kind: str) -> Chart:
        chart = self.charts[chart_name]
        return cotangent_lift(chart) if kind == "lift" else anticotangent_lift(chart)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModelFile):
            return NotImplemented
        return (self.charts == other.charts and self.gradings == other.gradings
                and self.fields == other.fields and self.tensors == other.tensors
                and {k: dict(v.christoffels) for k, v in self.connections.items()}
                == {k: dict(v.christoffels) for k, v in other.connections.items()}
                and {k: (v.name, v.constants) for k, v in self.algebras.items()}
                == {k: (v.name, v.constants) for k, v in other.algebras.items()}
                and self.tensor_lift_kind == other.tensor_lift_kind)


def degree_cap() -> int:
    value = os.environ.get("GRADEDQ_DEGREE_CAP")
    return int(value) if value else DEFAULT_DEGREE_CAP


class _Parser:
    def __init__(self, text: str, base_dir: Optional[str] = None) -> None:
        self.tokens = tokenize(text)
        self.pos = 0
        self.model = ModelFile(base_dir=base_dir)
        self.cap = degree_cap()

    # -- token plumbing -------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.col)

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise self.error(f"expected {want!r}, found {tok.text!r}")
        return self.next()

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        tok = self.peek()
        if tok.kind == kind and (text is None or tok.text == text):
            return self.next()
        return None

    # -- statements ------------------------------------------------------

    def parse(self) -> ModelFile:
        while self.peek().kind != "eof":
            tok = self.expect("ident")
            handler = getattr(self, f"_stmt_{tok.text.replace('-', '_')}", None)
            if handler is None:
                raise self.error(f"unknown declaration {tok.text!r}", tok)
            handler()
        return self.model

    def _stmt_chart(self) -> None:
        name = self.expect("ident").text
        if name in self.model.charts:
            raise self.error(f"chart {name!r} already declared")
        self.expect("sym", "{")
        decls: List[Tuple[str, int, int]] = []
        seen = set()
        while not self.accept("sym", "}"):
            self.expect("ident", "var")
            names = [self.expect("ident").text]
            while self.accept("sym", ","):
                names.append(self.expect("ident").text)
            self.expect("sym", ":")
            ptok = self.expect("ident")
            if ptok.text not in ("even", "odd"):
                raise self.error("parity must be 'even' or 'odd'", ptok)
            parity = 0 if ptok.text == "even" else 1
            self.expect("sym", ",")
            self.expect("ident", "weight")
            weight = self._int()
            self.expect("sym", ";")
            for n in names:
                if n in seen:
                    raise self.error(f"variable {n!r} declared twice in chart {name!r}")
                seen.add(n)
                decls.append((n, parity, weight))
        variables = tuple(VariableDecl(n, p, w, i) for i, (n, p, w) in enumerate(decls))
        self.model.charts[name] = Chart(name, variables)

    def _stmt_grading(self) -> None:
        name = self.expect("ident").text
        self.expect("sym", "{")
        q: Optional[int] = None
        s_or_p: Optional[int] = None
        kind: Optional[str] = None
        lam = Fraction(1)
        while not self.accept("sym", "}"):
            key = self.expect("ident")
            self.expect("sym", "=")
            if key.text == "q":
                q = self._int()
            elif key.text in ("s", "p"):
                if kind is not None:
                    raise self.error("grading already fixed s or p", key)
                kind = "QS" if key.text == "s" else "QP"
                s_or_p = self._int()
            elif key.text == "lambda":
                lam = self._rational()
            else:
                raise self.error(f"unknown grading key {key.text!r}", key)
            self.expect("sym", ";")
        if q is None or s_or_p is None or kind is None:
            raise self.error(f"grading {name!r} must set q and one of s, p")
        self.model.gradings[name] = GradingSystem(kind, q, s_or_p, lam)

    def _stmt_field(self) -> None:
        name = self.expect("ident").text
        self.expect("ident", "on")
        ctok = self.expect("ident")
        chart = self.model.charts.get(ctok.text)
        if chart is None:
            raise self.error(f"unknown chart {ctok.text!r}", ctok)
        self.expect("sym", "=")
        coeffs: Dict[str, SuperPolynomial] = {}
        sign = 1
        if self.accept("sym", "-"):
            sign = -1
        while True:
            coeff, var = self._field_term(chart)
            if var not in {v.name for v in chart.variables}:
                raise self.error(f"unknown variable {var!r} in d/d{var}")
            poly = coeff.scale(sign)
            coeffs[var] = coeffs[var] + poly if var in coeffs else poly
            if self.accept("sym", "+"):
                sign = 1
                continue
            if self.accept("sym", "-"):
                sign = -1
                continue
            break
        self.expect("sym", ";")
        self.model.fields[name] = VectorField(chart, coeffs)

    def _field_term(self, chart: Chart) -> Tuple[SuperPolynomial, str]:
        tok = self.peek()
        if tok.kind == "ddvar":
            self.next()
            return SuperPolynomial.const(chart, 1), tok.text[3:]
        coeff = self._product(chart)
        dd = self.expect("ddvar")
        return coeff, dd.text[3:]

    def _stmt_tensor(self) -> None:
        name = self.expect("ident").text
        self.expect("ident", "on")
        kind_tok = self.expect("ident")
        if kind_tok.text not in ("lift", "antilift"):
            raise self.error("tensor must live on lift(CHART) or antilift(CHART)", kind_tok)
        self.expect("sym", "(")
        ctok = self.expect("ident")
        if ctok.text not in self.model.charts:
            raise self.error(f"unknown chart {ctok.text!r}", ctok)
        self.expect("sym", ")")
        lift = self.model.lift_of(ctok.text, kind_tok.text)
        self.expect("sym", "=")
        poly = self._expr(lift)
        self.expect("sym", ";")
        self.model.tensors[name] = poly
        self.model.tensor_lift_kind[name] = kind_tok.text

    def _stmt_connection(self) -> None:
        name = self.expect("ident").text
        self.expect("sym", "{")
        gammas: Dict[Tuple[str, str, str], SuperPolynomial] = {}
        chart: Optional[Chart] = None
        chart_name: Optional[str] = None
        if self.accept("ident", "on"):
            ctok = self.expect("ident")
            if ctok.text not in self.model.charts:
                raise self.error(f"unknown chart {ctok.text!r}", ctok)
            chart_name = ctok.text
            chart = self.model.charts[chart_name]
            self.expect("sym", ";")
        while not self.accept("sym", "}"):
            gtok = self.expect("ident")
            if gtok.text != "Gamma":
                raise self.error("connection entries have the form Gamma[a,b,c] = EXPR;", gtok)
            self.expect("sym", "[")
            a = self.expect("ident").text
            self.expect("sym", ",")
            b = self.expect("ident").text
            self.expect("sym", ",")
            c = self.expect("ident").text
            self.expect("sym", "]")
            self.expect("sym", "=")
            if chart is None:
                raise self.error("connection with entries needs 'on CHART;' first", gtok)
            poly = self._expr(chart)
            self.expect("sym", ";")
            gammas[(a, b, c)] = poly
        if chart is None:
            # a bare 'connection flat { }' attaches to any chart at use time
            self.model.connections[name] = Connection(Chart(f"_empty_{name}", ()), {})
        else:
            self.model.connections[name] = Connection(chart, gammas)

    def _stmt_algebra(self) -> None:
        name = self.expect("ident").text
        self.expect("sym", "=")
        kind = self.expect("ident")
        if kind.text in ("q", "gl", "sl"):
            self.expect("sym", "(")
            n = self._int()
            self.expect("sym", ")")
            alg = builtin_algebra(kind.text, n)
            decl = f"{kind.text}({n})"
        elif kind.text == "susy1":
            alg = builtin_algebra("susy1")
            decl = "susy1"
        elif kind.text == "sc":
            stok = self.expect("string")
            path = Path(stok.text[1:-1])
            if not path.is_absolute() and self.model.base_dir:
                path = Path(self.model.base_dir) / path
            try:
                constants = StructureConstants.from_json(path.read_text())
            except OSError as exc:
                raise self.error(f"cannot read {path}: {exc}", stok)
            alg = Algebra(f"sc:{stok.text[1:-1]}", constants)
            decl = f'sc {stok.text}'
        else:
            raise self.error("algebra must be q(N), gl(N), sl(N), susy1 or sc \"file\"", kind)
        self.expect("sym", ";")
        self.model.algebras[name] = alg
        self.model.algebra_decls[name] = decl

    # -- expressions -----------------------------------------------------

    def _int(self) -> int:
        neg = bool(self.accept("sym", "-"))
        tok = self.expect("number")
        if "/" in tok.text:
            raise self.error("expected an integer", tok)
        return -int(tok.text) if neg else int(tok.text)

    def _rational(self) -> Fraction:
        neg = bool(self.accept("sym", "-"))
        tok = self.expect("number")
        value = Fraction(tok.text)
        return -value if neg else value

    def _expr(self, chart: Chart) -> SuperPolynomial:
        sign = 1
        if self.accept("sym", "-"):
            sign = -1
        acc = self._product(chart).scale(sign)
        while True:
            if self.accept("sym", "+"):
                acc = acc + self._product(chart)
            elif self.accept("sym", "-"):
                acc = acc - self._product(chart)
            else:
                return acc

    def _product(self, chart: Chart) -> SuperPolynomial:
        acc = self._power(chart)
        while self.accept("sym", "*"):
            acc = acc * self._power(chart)
            self._check_cap(acc)
        return acc

    def _power(self, chart: Chart) -> SuperPolynomial:
        base = self._atom(chart)
        if self.accept("sym", "^"):
            tok = self.peek()
            exponent = self._int()
            if exponent < 0:
                raise self.error("exponent must be nonnegative", tok)
            out = base ** exponent
            self._check_cap(out)
            return out
        return base

    def _atom(self, chart: Chart) -> SuperPolynomial:
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            return SuperPolynomial.const(chart, Fraction(tok.text))
        if tok.kind == "ident":
            self.next()
            if not chart.has_var(tok.text):
                raise self.error(f"unknown variable {tok.text!r} on chart {chart.name!r}", tok)
            return SuperPolynomial.var(chart, tok.text)
        if tok.kind == "sym" and tok.text == "(":
            self.next()
            inner = self._expr(chart)
            self.expect("sym", ")")
            return inner
        if tok.kind == "sym" and tok.text == "-":
            self.next()
            return -self._atom(chart)
        raise self.error(f"expected an expression, found {tok.text!r}", tok)

    def _check_cap(self, poly: SuperPolynomial) -> None:
        if poly.total_degree() > self.cap:
            tok = self.tokens[self.pos - 1]
            raise ParseError(
                f"expression exceeds the degree cap {self.cap} "
                "(set GRADEDQ_DEGREE_CAP to raise it)", tok.line, tok.col)


def parse_model(text: str, base_dir: Optional[str] = None) -> ModelFile:
    return _Parser(text, base_dir).parse()


def print_model(model: ModelFile) -> str:
    """Canonical text for a model; parse(print_model(m)) == m structurally."""
    lines: List[str] = []
    for name, chart in model.charts.items():
        lines.append(f"chart {name} {{")
        for v in chart.variables:
            parity = "even" if v.parity == 0 else "odd"
            lines.append(f"  var {v.name} : {parity}, weight {v.weight};")
        lines.append("}")
    for name, grading in model.gradings.items():
        key = "s" if grading.kind == "QS" else "p"
        lines.append(f"grading {name} {{")
        lines.append(f"  q = {grading.q};")
        lines.append(f"  {key} = {grading.s_or_p};")
        lines.append(f"  lambda = {grading.lam};")
        lines.append("}")
    for name, fld in model.fields.items():
        terms = [f"({fld.coefficients[v.name].render()}) d/d{v.name}"
                 for v in fld.chart.variables if v.name in fld.coefficients]
        rhs = " + ".join(terms) if terms else "(0) d/d" + fld.chart.variables[0].name
        lines.append(f"field {name} on {fld.chart.name} = {rhs};")
    for name, tensor in model.tensors.items():
        kind = model.tensor_lift_kind[name]
        base = tensor.chart.base
        lines.append(f"tensor {name} on {kind}({base.name}) = {tensor.render()};")
    for name, conn in model.connections.items():
        lines.append(f"connection {name} {{")
        if conn.christoffels:
            lines.append(f"  on {conn.chart.name};")
            for (a, b, c), gamma in sorted(conn.christoffels.items()):
                lines.append(f"  Gamma[{a},{b},{c}] = {gamma.render()};")
        lines.append("}")
    for name in model.algebras:
        lines.append(f"algebra {name} = {model.algebra_decls[name]};")
    return "\n".join(lines) + "\n"
