"""Command-line front end: load a model file, run one command, emit a report.

Exit codes: 0 when every check passes, 1 when a check fails (residues are
still printed), 2 on usage, parse, or input-validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from . import brackets, doubles, dsl, geometry, liealg, structures
from .structures import CheckReport
from .superpoly import Chart, GradedError, SuperPolynomial


class Report:
    """Accumulates check results and constructed objects deterministically."""

    def __init__(self, command: str, model_path: str) -> None:
        self.command = command
        self.model_path = model_path
        self.checks: List[CheckReport] = []
        self.objects: List[Tuple[str, str, str]] = []   # (name, kind, rendering)
        self.notes: List[str] = []

    def add_check(self, report: CheckReport) -> None:
        self.checks.append(report)
        for sub in report.subchecks:
            self.checks.append(sub)

    def add_object(self, name: str, kind: str, rendering: str) -> None:
        self.objects.append((name, kind, rendering))

    def add_note(self, note: str) -> None:
        self.notes.append(note)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = [f"command: {self.command}", f"model: {self.model_path}"]
        for name, kind, rendering in self.objects:
            lines.append(f"{kind} {name} = {rendering}")
        for note in self.notes:
            lines.append(note)
        for check in self.checks:
            status = "pass" if check.passed else "FAIL"
            line = f"check {check.name}: {status}"
            if not check.passed or not check.residue.is_zero():
                line += f"  residue = {check.residue.render()}"
            if check.context:
                line += f"  [{check.context}]"
            lines.append(line)
        lines.append(f"result: {'ok' if self.passed else 'FAILED'}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "model": self.model_path,
            "checks": [
                {"name": c.name, "status": "pass" if c.passed else "fail",
                 "residue": c.residue.render()}
                for c in self.checks
            ],
            "objects": [
                {"name": n, "kind": k, "rendering": r} for n, k, r in self.objects
            ],
            "notes": list(self.notes),
            "result": "ok" if self.passed else "failed",
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


class CommandError(GradedError):
    pass


def _field(model: dsl.ModelFile, name: str) -> geometry.VectorField:
    if name not in model.fields:
        raise CommandError(f"unknown field {name!r}")
    return model.fields[name]


def _grading(model: dsl.ModelFile, name: str) -> geometry.GradingSystem:
    if name not in model.gradings:
        raise CommandError(f"unknown grading {name!r}")
    return model.gradings[name]


def _algebra(model: dsl.ModelFile, name: str) -> liealg.Algebra:
    if name not in model.algebras:
        raise CommandError(f"unknown algebra {name!r}")
    return model.algebras[name]


def _tensor_on_graded_lift(model: dsl.ModelFile, name: str, chart: Chart,
                           grading: geometry.GradingSystem, kind: str) -> SuperPolynomial:
    """Re-home a declared tensor (or the literal '0') onto the graded lift."""
    lifter = geometry.cotangent_lift if kind == "lift" else geometry.anticotangent_lift
    lift = lifter(chart, grading)
    if name == "0":
        return SuperPolynomial.zero(lift)
    if name not in model.tensors:
        raise CommandError(f"unknown tensor {name!r}")
    if model.tensor_lift_kind[name] != kind:
        raise CommandError(f"tensor {name!r} lives on the wrong lift kind for this command")
    tensor = model.tensors[name]
    if tensor.chart.base != chart:
        raise CommandError(f"tensor {name!r} is not over chart {chart.name!r}")
    return SuperPolynomial(lift, dict(tensor.terms))


def _connection(model: dsl.ModelFile, name: str, chart: Chart) -> doubles.Connection:
    if name not in model.connections:
        raise CommandError(f"unknown connection {name!r}")
    conn = model.connections[name]
    if conn.is_flat_zero:
        return doubles.Connection.flat(chart)
    if conn.chart != chart:
        raise CommandError(f"connection {name!r} is not over chart {chart.name!r}")
    return conn


def _cobracket_note(names, cobracket, sym) -> List[str]:
    return [f"delta({names[i]}) = {liealg.render_square(cobracket[i], names, sym)}"
            for i in sorted(cobracket)]


# -- commands ---------------------------------------------------------------


def cmd_check_q(model, args, report):
    field = _field(model, args.field)
    report.add_object(args.field, "field", field.render())
    report.add_check(structures.check_homological(field, name=args.field))


def cmd_check_tensor(model, args, report):
    if args.tensor not in model.tensors:
        raise CommandError(f"unknown tensor {args.tensor!r}")
    tensor = model.tensors[args.tensor]
    report.add_object(args.tensor, "tensor", tensor.render())
    report.add_check(structures.check_tensor(tensor, name=args.tensor))


def cmd_check_qs(model, args, report):
    _compat(model, args, report, "QS")


def cmd_check_qp(model, args, report):
    _compat(model, args, report, "QP")


def _compat(model, args, report, kind):
    field = _field(model, args.field)
    grading = _grading(model, args.grading)
    if grading.kind != kind:
        raise CommandError(f"grading {args.grading!r} is not a {kind} grading")
    lift_kind = "lift" if kind == "QS" else "antilift"
    tensor = _tensor_on_graded_lift(model, args.tensor, field.chart, grading, lift_kind)
    report.add_check(structures.check_homological(field, name=args.field))
    report.add_check(structures.check_tensor(tensor, name=args.tensor))
    report.add_check(structures.check_compatibility(
        field, tensor, kind, name=f"{args.field},{args.tensor}"))


def cmd_check_bialgebra(model, args, report):
    c = _algebra(model, args.c).constants
    b = _algebra(model, args.b).constants
    report.add_check(structures.check_bialgebra(c, b, name=f"{args.c},{args.b}"))


def cmd_double(model, args, report):
    field = _field(model, args.field)
    grading = _grading(model, args.grading)
    kind = grading.kind
    lift_kind = "lift" if kind == "QS" else "antilift"
    tensor = _tensor_on_graded_lift(model, args.tensor, field.chart, grading, lift_kind)
    builder = doubles.build_double_QS if kind == "QS" else doubles.build_double_QP
    dm = builder(field, tensor, grading, force=True)
    report.add_object("Q_D", "field", dm.q_d.render())
    weights = ", ".join(f"W({v.name})={v.weight}" for v in dm.lift.variables)
    report.add_note(f"total weights: {weights}")
    for rep in dm.reports:
        report.add_check(rep)
    return dm


def cmd_sd(model, args, report):
    dm = cmd_double(model, args, report)
    if dm.kind != "QS":
        raise CommandError("sd needs a QS grading")
    conn = _connection(model, args.connection, dm.base_chart)
    r = doubles.long_momentum_r(dm, conn)
    report.add_object("r", "tensor", r.render())
    s_d = doubles.almost_schouten_SD(dm, r)
    report.add_object("S_D", "tensor", s_d.render())
    lift2 = s_d.chart
    for u, v in _fiber_pairs(dm.lift):
        value = brackets.derived_bracket(
            s_d, SuperPolynomial.var(lift2, u), SuperPolynomial.var(lift2, v), lift2)
        if not value.is_zero():
            report.add_note(f"{{{u},{v}}}_S_D = {value.render()}")
    report.add_check(structures.check_tensor(s_d, name="S_D"))


def _fiber_pairs(lift: Chart):
    momenta = [v.name for v in lift.variables[lift.n_base:]]
    for i, u in enumerate(momenta):
        for v in momenta[i:]:
            yield u, v


def cmd_drinfeld_double(model, args, report):
    c = _algebra(model, args.c).constants
    b = _algebra(model, args.b).constants
    dd = liealg.drinfeld_double(c, b)
    names = dd.constants.basis_names
    for (i, j, k), v in sorted(dd.constants.entries.items()):
        if i < j:
            report.add_note(f"[{names[i]},{names[j]}] has {v}*{names[k]}")
    report.add_note("cobracket (second bracket) table: "
                    + dd.cobracket_table.to_json())
    for note in _cobracket_note(names, dd.cobracket, -1):
        report.add_note(note)
    for rep in dd.reports:
        report.add_check(rep)


def cmd_odd_double(model, args, report):
    c_alg = _algebra(model, args.c)
    c = c_alg.constants
    if args.t is not None:
        t = _algebra(model, args.t).constants
    elif c_alg.cobracket_constants is not None:
        t = c_alg.cobracket_constants
    else:
        raise CommandError("odd-double needs dual constants (second argument)")
    od = liealg.odd_double(c, t)
    names = od.constants.basis_names
    for (i, j, k), v in sorted(od.constants.entries.items()):
        if i <= j:
            report.add_note(f"[{names[i]},{names[j]}] has {v}*{names[k]}")
    for note in _cobracket_note(names, od.cobracket, 1):
        report.add_note(note)
    report.add_object("P_D", "tensor", od.p_d.render())
    for rep in od.reports:
        report.add_check(rep)


def cmd_yang_baxter(model, args, report):
    c = _algebra(model, args.c).constants
    b = _algebra(model, args.b).constants
    dd = liealg.drinfeld_double(c, b)
    lift2 = dd.second_lift
    n = c.dim
    r = SuperPolynomial.zero(lift2)
    for i in range(n):
        r = r + (SuperPolynomial.var(lift2, lift2.variables[2 * n + i].name)
                 * SuperPolynomial.var(lift2, lift2.variables[3 * n + i].name))
    q_d2 = geometry.hamiltonian_lift_p(dd.q_d, lift2)
    report.add_object("r", "tensor", r.render())
    cybe, gybe = structures.yang_baxter(r, q_d2)
    report.add_check(gybe)
    report.add_check(cybe)


def cmd_duality(model, args, report):
    if args.chart not in model.charts:
        raise CommandError(f"unknown chart {args.chart!r}")
    chart = model.charts[args.chart]
    dm = doubles.duality_map(chart, args.n_base, args.kind)
    for name in sorted(dm.substitution):
        report.add_note(f"F*: {name} -> {dm.substitution[name].render()}")
    report.add_check(dm.report)
    square = doubles.duality_square(chart, args.n_base, args.kind)
    src = dm.source_lift
    residue = SuperPolynomial.zero(src)
    nb = args.n_base
    for v in src.variables:
        expected = SuperPolynomial.var(src, v.name)
        base_pos = v.order_index % chart.n
        if base_pos >= nb:
            expected = -expected
        residue = residue + (square[v.name] - expected)
    report.add_check(structures._report(
        "F^2 = -1 on fibers", residue, context=f"chart {chart.name}, kind {args.kind}"))


def cmd_algebra_report(model, args, report):
    alg = _algebra(model, args.algebra)
    sc = alg.constants
    report.add_note(f"algebra {args.algebra}: dim {sc.dim}, "
                    f"parities {''.join(str(p) for p in sc.parities)}")
    names = sc.basis_names or tuple(f"u{i+1}" for i in range(sc.dim))
    for (i, j, k), v in sorted(sc.entries.items()):
        if i <= j:
            report.add_note(f"[{names[i]},{names[j]}] has {v}*{names[k]}")
    jac = sc.jacobi_residues()
    chart = Chart("jac", ())
    residue = SuperPolynomial(chart, {(): Fraction(len(jac))} if jac else {})
    report.add_check(CheckReport("super-jacobi", not jac, residue,
                                 "brute force over all basis triples"))
    if alg.pairing is not None:
        inv = alg.pairing.invariance_residues(sc)
        residue = SuperPolynomial(chart, {(): Fraction(len(inv))} if inv else {})
        report.add_check(CheckReport("pairing ad-invariance", not inv, residue,
                                     "all basis triples"))
    if args.cobracket:
        if alg.cartan is None:
            raise CommandError("--cobracket needs a builtin q(n) algebra")
        import re

        m = re.fullmatch(r"q\((\d+)\)", alg.name)
        _, rd, emb = liealg.q_relative_double(int(m.group(1)))
        report.add_note(f"relative-double sign vector: {rd.sign_vector}")
        qnames = sc.basis_names
        for t, d in enumerate(emb):
            sq: liealg.TensorSquare = {}
            for (a, b), v in rd.cobracket[t].items():
                for qa, ca in emb[a].items():
                    for qb, cb in emb[b].items():
                        sq = liealg.square_add(sq, liealg.product_square(
                            qa, qb, v * ca * cb, sc.parities, 1))
            (qt, coeff), = d.items()
            sq = {k: v / coeff for k, v in sq.items()}
            report.add_note(f"delta({qnames[qt]}) = {liealg.render_square(sq, qnames, 1)}")
        for rep in rd.reports:
            report.add_check(rep)


COMMANDS = {
    "check-q": (cmd_check_q, ["field"]),
    "check-tensor": (cmd_check_tensor, ["tensor"]),
    "check-qs": (cmd_check_qs, ["field", "tensor", "grading"]),
    "check-qp": (cmd_check_qp, ["field", "tensor", "grading"]),
    "check-bialgebra": (cmd_check_bialgebra, ["c", "b"]),
    "double": (cmd_double, ["field", "tensor", "grading"]),
    "sd": (cmd_sd, ["field", "tensor", "grading"]),
    "drinfeld-double": (cmd_drinfeld_double, ["c", "b"]),
    "odd-double": (cmd_odd_double, ["c"]),
    "yang-baxter": (cmd_yang_baxter, ["c", "b"]),
    "duality": (cmd_duality, ["chart"]),
    "algebra-report": (cmd_algebra_report, ["algebra"]),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradedq",
        description="Exact checks and doubles for graded Q/S/P structures.")
    parser.add_argument("model", help="model declaration file")
    parser.add_argument("--json", action="store_true", help="emit the JSON report")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, positionals) in COMMANDS.items():
        p = sub.add_parser(name)
        for arg in positionals:
            p.add_argument(arg)
        if name == "odd-double":
            p.add_argument("t", nargs="?", default=None)
        if name == "sd":
            p.add_argument("--connection", required=True)
        if name == "duality":
            p.add_argument("--n-base", type=int, required=True)
            p.add_argument("--kind", choices=["even", "odd"], default="even")
        if name == "algebra-report":
            p.add_argument("--cobracket", action="store_true")
    return parser


def run(argv: Optional[List[str]] = None, stdout=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        path = Path(args.model)
        model = dsl.parse_model(path.read_text(), base_dir=str(path.parent))
    except (OSError, dsl.ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = Report(args.command, args.model)
    handler, _ = COMMANDS[args.command]
    try:
        handler(model, args, report)
    except GradedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    stdout.write(report.to_json() if args.json else report.to_text())
    return 0 if report.passed else 1


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
