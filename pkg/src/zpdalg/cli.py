"""Command line interface: ``zpdalg <command> <algebra file> [options]``.

Algebra files are JSON::

    {"field": {"gf": 2}, "spec": "mat_over(2,trunc(2))"}
    {"field": "rational", "dim": 2, "unit": [1, 0],
     "table": [[[1, 0], [0, 1]], [[0, 1], [0, 0]]]}

Builder expressions: ``mat(k)``, ``tri(k)``, ``trunc(k)``, ``prod(E1,E2)``,
``mat_over(k,E)``, ``tensor_trunc(E,k)`` and ``poly(c0,...,c_{k-1})`` for
``F[X]/(X^k + ... + c0)``.

Exit codes: 0 holds / ok, 1 fails, 2 malformed or invalid input,
3 inconclusive or strategy limit (e.g. enumeration cap).
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from . import algebra as alg
from .algebra import AlgebraError, StructureAlgebra
from .derivations import (
    all_dual_derivations_inner,
    derivation_space,
    dual_derivation_space,
    dual_inner_space,
    escaping_derivation,
    h1_dimension,
    inner_derivation_space,
)
from .exactlinalg import Field, kernel
from .properties import FAILS, HOLDS, INCONCLUSIVE, is_2zpd, is_zlpd, is_zpd
from .separability import separability_idempotent
from .tensorops import format_tensor, kappa, mu, mu1
from .zerospans import (
    SpanStrategy,
    StrategyError,
    commuting_span,
    one_sided_zero_span,
    square_zero_span,
    zero_pair_span,
)

EXIT_OK = 0
EXIT_FAILS = 1
EXIT_INVALID = 2
EXIT_LIMIT = 3

VERDICT_EXIT = {HOLDS: EXIT_OK, FAILS: EXIT_FAILS, INCONCLUSIVE: EXIT_LIMIT}


class AlgebraLoadError(ValueError):
    """Malformed algebra file; the message names the offending location."""


# ---------------------------------------------------------------------------
# builder expressions

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        num, name, sym = m.groups()
        if num is not None:
            tokens.append(("num", num, m.start(1)))
        elif name is not None:
            tokens.append(("name", name, m.start(2)))
        else:
            tokens.append(("sym", sym, m.start(3)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, field: Field):
        self.text = text
        self.field = field
        self.tokens = _tokenize(text)
        self.i = 0

    def error(self, msg: str, at: Optional[int] = None) -> AlgebraLoadError:
        i = self.i if at is None else at
        pos = self.tokens[i][2] if i < len(self.tokens) else len(self.text)
        return AlgebraLoadError(f"builder expression {self.text!r}, column {pos + 1}: {msg}")

    def take(self, kind: str, value: Optional[str] = None) -> str:
        if self.i >= len(self.tokens):
            raise self.error(f"expected {value or kind}, got end of input")
        k, v, _ = self.tokens[self.i]
        if k != kind or (value is not None and v != value):
            raise self.error(f"expected {value or kind}, got {v!r}")
        self.i += 1
        return v

    def peek(self) -> Optional[str]:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else None

    def parse(self) -> StructureAlgebra:
        a = self.expr()
        if self.i != len(self.tokens):
            raise self.error("trailing input")
        return a

    def integer(self) -> int:
        sign = -1 if self.peek() == "-" else 1
        if sign < 0:
            self.take("sym", "-")
        return sign * int(self.take("num"))

    _BUILDERS = ("mat", "tri", "trunc", "prod", "mat_over", "tensor_trunc", "poly")

    def expr(self) -> StructureAlgebra:
        start = self.i
        name = self.take("name")
        if name not in self._BUILDERS:
            raise self.error(f"unknown builder {name!r}", at=start)
        self.take("sym", "(")
        try:
            if name in ("mat", "tri", "trunc"):
                k = self.integer()
                out = getattr(alg, name)(k, self.field)
            elif name == "prod":
                left = self.expr()
                self.take("sym", ",")
                out = alg.direct_product(left, self.expr())
            elif name == "mat_over":
                k = self.integer()
                self.take("sym", ",")
                out = alg.mat_over(k, self.expr())
            elif name == "tensor_trunc":
                inner = self.expr()
                self.take("sym", ",")
                out = alg.tensor_with_trunc(inner, self.integer())
            elif name == "poly":
                coeffs = [self.integer()]
                while self.peek() == ",":
                    self.take("sym", ",")
                    coeffs.append(self.integer())
                out = alg.polynomial_quotient(coeffs, self.field)
        except AlgebraError as exc:
            raise self.error(str(exc), at=start) from None
        self.take("sym", ")")
        return out


def build(expr: str, field: Field) -> StructureAlgebra:
    return _Parser(expr, field).parse()


# ---------------------------------------------------------------------------
# files


def parse_field(raw) -> Field:
    if raw == "rational":
        return Field.rational()
    if isinstance(raw, dict) and set(raw) == {"gf"}:
        try:
            return Field.gf(int(raw["gf"]))
        except (TypeError, ValueError) as exc:
            raise AlgebraLoadError(f"field: {exc}") from None
    raise AlgebraLoadError(f"field: expected {{\"gf\": p}} or \"rational\", got {raw!r}")


def algebra_from_dict(data: dict, validate: bool = True) -> StructureAlgebra:
    if not isinstance(data, dict):
        raise AlgebraLoadError("top level: expected a JSON object")
    if "field" not in data:
        raise AlgebraLoadError("field: missing")
    field = parse_field(data["field"])
    if "spec" in data:
        a = build(str(data["spec"]), field)
        if validate:
            _require_valid(a)
        return a
    for key in ("dim", "unit", "table"):
        if key not in data:
            raise AlgebraLoadError(f"{key}: missing (or give a builder 'spec')")
    n = data["dim"]
    if not isinstance(n, int) or n < 1:
        raise AlgebraLoadError(f"dim: expected a positive integer, got {n!r}")
    unit = data["unit"]
    if not isinstance(unit, list) or len(unit) != n:
        raise AlgebraLoadError(f"unit: expected {n} coordinates")
    table = data["table"]
    if not isinstance(table, list) or len(table) != n:
        raise AlgebraLoadError(f"table: expected {n} rows")
    for i, row in enumerate(table):
        if not isinstance(row, list) or len(row) != n:
            raise AlgebraLoadError(f"table[{i}]: expected {n} entries")
        for j, vec in enumerate(row):
            if not isinstance(vec, list) or len(vec) != n:
                raise AlgebraLoadError(f"table[{i}][{j}]: expected {n} coordinates")
    try:
        t = field.asarray(np.array(table, dtype=object))
        u = field.asarray(np.array(unit, dtype=object))
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise AlgebraLoadError(f"scalar: {exc}") from None
    labels = tuple(data.get("labels") or ())
    try:
        a = StructureAlgebra(field, t, u, name=str(data.get("name", "")), labels=labels)
    except AlgebraError as exc:
        raise AlgebraLoadError(str(exc)) from None
    _require_valid(a)
    return a


def _require_valid(a: StructureAlgebra) -> None:
    report = a.validate()
    if not report:
        raise AlgebraLoadError(f"invalid algebra: {report.reason} (triple {report.triple})")


def resolve_path(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    for candidate in (Path(name + ".json"), Path("algebras") / name, Path("algebras") / (name + ".json")):
        if candidate.exists():
            return candidate
    raise AlgebraLoadError(f"{name}: no such file")


def load_algebra(name: str) -> StructureAlgebra:
    path = resolve_path(name)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise AlgebraLoadError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return algebra_from_dict(data)
    except AlgebraLoadError as exc:
        raise AlgebraLoadError(f"{path}: {exc}") from None


def dump_algebra(a: StructureAlgebra) -> str:
    return json.dumps(a.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# commands


def _strategy(args, field: Field) -> SpanStrategy:
    kwargs = {"seed": args.seed, "enumeration_cap": args.cap, "workers": args.workers}
    if args.window is not None:
        kwargs["sample_window"] = args.window
    if args.strategy is None:
        return SpanStrategy.default_for(field, **kwargs)
    return SpanStrategy(mode=args.strategy, **kwargs)


def _emit(payload: dict, out=None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2)
    print(text, file=out or sys.stdout)


def _summary(a: StructureAlgebra) -> dict:
    return {"name": a.name, "dim": a.dim, "field": str(a.field)}


def cmd_validate(args) -> int:
    try:
        load_algebra(args.file)
    except AlgebraLoadError as exc:
        print(f"invalid: {exc}")
        return EXIT_INVALID
    print("valid")
    return EXIT_OK


_DECIDERS = {"zpd": is_zpd, "zlpd": is_zlpd, "2zpd": is_2zpd}


def cmd_check(args) -> int:
    a = load_algebra(args.file)
    strategy = _strategy(args, a.field)
    props = list(_DECIDERS) if args.property == "all" else [args.property]
    certs = {p: _DECIDERS[p](a, strategy) for p in props}
    _emit({
        "algebra": _summary(a),
        "strategy": strategy.as_dict(),
        "certificates": {p: c.to_dict(a) for p, c in certs.items()},
    })
    verdicts = {c.verdict for c in certs.values()}
    if FAILS in verdicts:
        return EXIT_FAILS
    if INCONCLUSIVE in verdicts:
        return EXIT_LIMIT
    return EXIT_OK


def _span_dims(a: StructureAlgebra, strategy: SpanStrategy) -> dict:
    f = a.field
    out = {
        "zero_pair_span": zero_pair_span(a, strategy).dim,
        "one_sided_zero_span": one_sided_zero_span(a, strategy).dim,
        "commuting_span": commuting_span(a, strategy).dim,
        "ker_mu1": kernel(f, mu1(a)).dim,
        "ker_mu": kernel(f, mu(a)).dim,
        "ker_kappa": kernel(f, kappa(a)).dim,
        "exact": strategy.exhaustive,
    }
    try:
        out["square_zero_span"] = square_zero_span(a, strategy).dim
    except StrategyError as exc:
        out["square_zero_span"] = None
        out["square_zero_note"] = str(exc)
    return out


def cmd_spans(args) -> int:
    a = load_algebra(args.file)
    strategy = _strategy(args, a.field)
    _emit({"algebra": _summary(a), "strategy": strategy.as_dict(), "spans": _span_dims(a, strategy)})
    return EXIT_OK


def _derivation_dims(a: StructureAlgebra, dual: bool) -> dict:
    out = {
        "derivations": derivation_space(a).dim,
        "inner": inner_derivation_space(a).dim,
        "h1": h1_dimension(a),
    }
    out["all_inner"] = out["h1"] == 0
    if dual:
        out["dual_derivations"] = dual_derivation_space(a).dim
        out["dual_inner"] = dual_inner_space(a).dim
        out["all_dual_inner"] = all_dual_derivations_inner(a)
    return out


def cmd_derivations(args) -> int:
    a = load_algebra(args.file)
    _emit({"algebra": _summary(a), "derivations": _derivation_dims(a, args.dual)})
    return EXIT_OK


def _separability(a: StructureAlgebra) -> dict:
    e = separability_idempotent(a)
    out = {"separable": e is not None}
    if e is not None:
        fmt = np.vectorize(a.field.format_scalar, otypes=[object])
        out["idempotent"] = fmt(e.tensor).tolist()
        out["idempotent_terms"] = format_tensor(a, e.tensor)
    return out


def cmd_separability(args) -> int:
    a = load_algebra(args.file)
    info = _separability(a)
    _emit({"algebra": _summary(a), "separability": info})
    return EXIT_OK if info["separable"] else EXIT_FAILS


def _witness(a: StructureAlgebra, strategy: SpanStrategy) -> tuple[int, dict]:
    cert = is_2zpd(a, strategy)
    out = {"verdict": cert.verdict, "route": None}
    if cert.verdict == FAILS:
        out["route"] = "functional"
        out["certificate"] = cert.to_dict(a)
    if strategy.exhaustive:
        nil = square_zero_span(a, strategy).span
        esc = escaping_derivation(a, list(derivation_space(a).basis), nil)
        if esc is not None:
            out["route"] = out["route"] or "derivation"
            out["escaping_derivation"] = {
                "matrix": np.vectorize(a.field.format_scalar, otypes=[object])(esc.matrix).tolist(),
                "basis_element": a.labels[esc.basis_index],
                "image": a.format_element(esc.image),
                "description": esc.describe(a) + " lies outside the span of square-zero elements",
            }
    return VERDICT_EXIT[cert.verdict], out


def cmd_witness(args) -> int:
    a = load_algebra(args.file)
    strategy = _strategy(args, a.field)
    code, out = _witness(a, strategy)
    _emit({"algebra": _summary(a), "strategy": strategy.as_dict(), "witness": out})
    return code


def build_report(a: StructureAlgebra, strategy: SpanStrategy, timing: bool = False) -> dict:
    start = time.perf_counter()
    certs = {p: _DECIDERS[p](a, strategy) for p in _DECIDERS}
    report = {
        "algebra": _summary(a),
        "strategy": strategy.as_dict(),
        "seed": strategy.seed,
        "certificates": {p: c.to_dict(a) for p, c in certs.items()},
        "spans": _span_dims(a, strategy),
        "derivations": _derivation_dims(a, dual=True),
        "separability": _separability(a),
    }
    if timing:
        report["timing_seconds"] = round(time.perf_counter() - start, 3)
    return report


def cmd_report(args) -> int:
    a = load_algebra(args.file)
    strategy = _strategy(args, a.field)
    report = build_report(a, strategy, timing=args.timing)
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zpdalg", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, strategy=True):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", help="algebra JSON file")
        if strategy:
            p.add_argument("--strategy", choices=["exhaustive", "mc", "monte_carlo"], default=None)
            p.add_argument("--cap", type=int, default=2**20, help="max field points to enumerate")
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--window", type=int, default=None, help="no-growth rounds for sampling")
            p.add_argument("--workers", type=int, default=None, help="default: $ZPDALG_WORKERS or 1")
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "check the algebra axioms", strategy=False)
    p = add("check", cmd_check, "decide zpd / zLpd / 2-zpd")
    p.add_argument("--property", choices=["zpd", "zlpd", "2zpd", "all"], default="all")
    add("spans", cmd_spans, "dimensions of the zero-product spans and kernels")
    p = add("derivations", cmd_derivations, "derivation and inner-derivation dimensions", strategy=False)
    p.add_argument("--dual", action="store_true", help="also derivations into the dual bimodule")
    add("separability", cmd_separability, "separability idempotent", strategy=False)
    add("witness", cmd_witness, "evidence that the algebra is not 2-zpd")
    p = add("report", cmd_report, "full JSON report")
    p.add_argument("--out", default=None)
    p.add_argument("--timing", action="store_true", help="include wall-clock time (breaks byte reproducibility)")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except AlgebraLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except StrategyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.required_cap is not None:
            print(f"required cap: {exc.required_cap}", file=sys.stderr)
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())
