"""Pipeline language, REPL, and the `cubealg` command.

Statements cover loading, the five classical operations, pivot display,
traces, snapshots, and an oracle equivalence check of the last operation.
Condition syntax follows the operation algebra: dotted atoms test levels
(`Location.Region = flanders`), bare atoms test measures (`sales > 50`),
with NOT binding tighter than AND, and AND tighter than OR.  `x > c`
desugars to the comparison `c < x`; only strict comparisons exist.

Subcommands: `cubealg repl`, `cubealg run --script FILE`,
`cubealg check --seed N --trials M`, `cubealg serve --port P`.
Exit codes: 0 ok, 1 oracle mismatch, 2 usage or execution error.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass, replace
from fractions import Fraction

from . import algebra, io, oracle
from .algebra import (
    AGG_FUNCTIONS,
    And,
    CellCondition,
    Dice,
    DrillDown,
    LevelEq,
    LevelLt,
    MeasureEq,
    MeasureLt,
    Not,
    OlapOp,
    Or,
    RollUp,
    Slice,
    SliceDice,
    quote_name,
    render_aggs,
    render_condition,
    render_steps,
)
from .engine import CubeState
from .errors import CubeError, ParseError

# --- statements -------------------------------------------------------------


@dataclass(frozen=True)
class Load:
    cube_path: str
    facts_path: str
    fill: Fraction | None = None


@dataclass(frozen=True)
class OpStatement:
    op: OlapOp


@dataclass(frozen=True)
class Show:
    row_dim: str
    col_dim: str
    measure: str
    fixed: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class Trace:
    pass


@dataclass(frozen=True)
class Snapshot:
    path: str


@dataclass(frozen=True)
class Restore:
    path: str


@dataclass(frozen=True)
class Check:
    pass


@dataclass(frozen=True)
class Reset:
    pass


Statement = Load | OpStatement | Show | Trace | Snapshot | Restore | Check | Reset


# --- tokenizer / parser -------------------------------------------------------

_TOKEN_RE = re.compile(
    r'"(?:[^"\\]|\\.)*"'      # quoted name or path
    r"|-?\d+(?:/\d+|\.\d+)?"  # rational literal
    r"|[A-Za-z_][A-Za-z0-9_\-]*"
    r"|[(){}=<>.,:]"
)


@dataclass
class _Token:
    text: str
    column: int

    @property
    def kind(self) -> str:
        if self.text.startswith('"'):
            return "string"
        if re.fullmatch(r"-?\d+(/\d+|\.\d+)?", self.text):
            return "number"
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_\-]*", self.text):
            return "id"
        return self.text

    def unquote(self) -> str:
        if self.kind != "string":
            return self.text
        return re.sub(r"\\(.)", r"\1", self.text[1:-1])


class _Parser:
    def __init__(self, line: str):
        self.line = line
        self.tokens: list[_Token] = []
        pos = 0
        while pos < len(line):
            if line[pos].isspace():
                pos += 1
                continue
            match = _TOKEN_RE.match(line, pos)
            if not match:
                raise ParseError(f"unexpected character {line[pos]!r}", column=pos + 1)
            self.tokens.append(_Token(match.group(), pos + 1))
            pos = match.end()
        self.index = 0

    def peek(self) -> _Token | None:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def next(self) -> _Token:
        token = self.peek()
        if token is None:
            raise ParseError("unexpected end of statement", column=len(self.line) + 1)
        self.index += 1
        return token

    def expect(self, text: str) -> _Token:
        token = self.next()
        if token.text != text:
            raise ParseError(f"expected {text!r}, got {token.text!r}", column=token.column)
        return token

    def name(self, what: str) -> str:
        token = self.next()
        if token.kind not in ("id", "string", "number"):
            raise ParseError(f"expected {what}, got {token.text!r}", column=token.column)
        return token.unquote()

    def string(self, what: str) -> str:
        token = self.next()
        if token.kind != "string":
            raise ParseError(f"expected quoted {what}, got {token.text!r}", column=token.column)
        return token.unquote()

    def done(self):
        token = self.peek()
        if token is not None:
            raise ParseError(f"trailing input {token.text!r}", column=token.column)


def _parse_condition(p: _Parser) -> CellCondition:
    return _parse_or(p)


def _parse_or(p: _Parser) -> CellCondition:
    node = _parse_and(p)
    while (token := p.peek()) and token.text == "OR":
        p.next()
        node = Or(node, _parse_and(p))
    return node


def _parse_and(p: _Parser) -> CellCondition:
    node = _parse_not(p)
    while (token := p.peek()) and token.text == "AND":
        p.next()
        node = And(node, _parse_not(p))
    return node


def _parse_not(p: _Parser) -> CellCondition:
    token = p.peek()
    if token and token.text == "NOT":
        p.next()
        return Not(_parse_not(p))
    if token and token.text == "(":
        p.next()
        node = _parse_condition(p)
        p.expect(")")
        return node
    return _parse_atom(p)


def _parse_atom(p: _Parser) -> CellCondition:
    first = p.next()
    if first.kind not in ("id", "string"):
        raise ParseError(f"expected an atom, got {first.text!r}", column=first.column)
    if p.peek() and p.peek().text == ".":
        p.next()
        level = p.name("level name")
        op = p.next()
        if op.text not in ("=", "<", ">"):
            raise ParseError(f"expected comparison, got {op.text!r}", column=op.column)
        member = p.name("member")
        dim = first.unquote()
        if op.text == "=":
            return LevelEq(dim, level, member)
        return LevelLt(dim, level, member, "below" if op.text == "<" else "above")
    measure = first.unquote()
    op = p.next()
    if op.text not in ("=", "<", ">"):
        raise ParseError(f"expected comparison, got {op.text!r}", column=op.column)
    value_token = p.next()
    if value_token.kind != "number":
        raise ParseError(
            f"measure comparison needs a number, got {value_token.text!r}",
            column=value_token.column,
        )
    value = Fraction(value_token.text)
    if op.text == "=":
        return MeasureEq(measure, value)
    return MeasureLt(measure, value, "below" if op.text == "<" else "above")


def _parse_aggs(p: _Parser) -> tuple[tuple[str, str], ...]:
    p.expect("{")
    aggs = []
    while True:
        measure = p.name("measure name")
        p.expect(":")
        fn = p.next()
        if fn.text not in AGG_FUNCTIONS:
            raise ParseError(
                f"unknown aggregation {fn.text!r} (one of {', '.join(AGG_FUNCTIONS)})",
                column=fn.column,
            )
        aggs.append((measure, fn.text))
        token = p.next()
        if token.text == "}":
            return tuple(aggs)
        if token.text != ",":
            raise ParseError(f"expected ',' or '}}', got {token.text!r}", column=token.column)


def parse_statement(line: str) -> Statement:
    p = _Parser(line)
    head = p.next()
    keyword = head.text
    if keyword == "LOAD":
        cube_path = p.string("cube path")
        facts_path = p.string("facts path")
        fill = None
        if p.peek() and p.peek().text == "FILL":
            p.next()
            fill = Fraction(p.next().text)
        p.done()
        return Load(cube_path, facts_path, fill)
    if keyword == "DICE":
        cond = _parse_condition(p)
        p.done()
        return OpStatement(Dice(cond))
    if keyword == "SLICE":
        dim = p.name("dimension")
        p.done()
        return OpStatement(Slice(dim))
    if keyword == "SLICEDICE":
        dim = p.name("dimension")
        member = p.name("member")
        p.done()
        return OpStatement(SliceDice(dim, member))
    if keyword in ("ROLLUP", "DRILLDOWN"):
        dim = p.name("dimension")
        level = p.name("level")
        aggs = _parse_aggs(p)
        p.done()
        cls = RollUp if keyword == "ROLLUP" else DrillDown
        return OpStatement(cls(dim, level, aggs))
    if keyword == "SHOW":
        row_dim = p.name("row dimension")
        col_dim = p.name("column dimension")
        measure = p.name("measure")
        fixed = []
        while p.peek() is not None:
            dim = p.name("dimension")
            p.expect("=")
            fixed.append((dim, p.name("member")))
        return Show(row_dim, col_dim, measure, tuple(fixed))
    if keyword == "TRACE":
        p.done()
        return Trace()
    if keyword == "SNAPSHOT":
        path = p.string("snapshot path")
        p.done()
        return Snapshot(path)
    if keyword == "RESTORE":
        path = p.string("snapshot path")
        p.done()
        return Restore(path)
    if keyword == "CHECK":
        p.done()
        return Check()
    if keyword == "RESET":
        p.done()
        return Reset()
    raise ParseError(f"unknown statement {keyword!r}", column=head.column)


def render_statement(stmt: Statement) -> str:
    match stmt:
        case Load(cube_path, facts_path, fill):
            text = f'LOAD "{cube_path}" "{facts_path}"'
            return text if fill is None else f"{text} FILL {fill}"
        case OpStatement(op):
            return algebra.describe_op(op)
        case Show(row_dim, col_dim, measure, fixed):
            parts = [f"SHOW {quote_name(row_dim)} {quote_name(col_dim)} {quote_name(measure)}"]
            parts += [f"{quote_name(d)} = {quote_name(m)}" for d, m in fixed]
            return " ".join(parts)
        case Trace():
            return "TRACE"
        case Snapshot(path):
            return f'SNAPSHOT "{path}"'
        case Restore(path):
            return f'RESTORE "{path}"'
        case Check():
            return "CHECK"
        case Reset():
            return "RESET"
    raise ParseError(f"unsupported statement {stmt!r}")


# --- session ------------------------------------------------------------------


@dataclass
class Session:
    state: CubeState | None = None
    initial: CubeState | None = None
    prev_state: CubeState | None = None
    last_op: OlapOp | None = None
    mismatches: int = 0


def _require_state(session: Session) -> CubeState:
    if session.state is None:
        raise CubeError("no cube loaded")
    return session.state


def _render_grid(view: dict) -> str:
    header = [""] + list(view["cols"])
    table = [header]
    for row_member, line in zip(view["rows"], view["cells"]):
        rendered = []
        for cell in line:
            if cell is None:
                rendered.append("-")
            elif cell["flag"]:
                rendered.append(cell["value"])
            else:
                rendered.append(f"({cell['value']})")
        table.append([row_member] + rendered)
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = [
        "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
        for row in table
    ]
    fixed = " ".join(f"{d}={m}" for d, m in view["fixed"].items())
    title = f"{view['measure']} by {view['rowDim']} x {view['colDim']}"
    if fixed:
        title += f" @ {fixed}"
    return "\n".join([title] + lines)


def execute(session: Session, stmt: Statement) -> tuple[Session, str]:
    """Run one statement; errors leave the session untouched."""
    match stmt:
        case Load(cube_path, facts_path, fill):
            state = io.load_cube_files(cube_path, facts_path, fill or Fraction(0))
            summary = (
                f"loaded cube: {' x '.join(state.dims)} = {state.cell_count} cells, "
                f"measures {', '.join(state.protected_names)}"
            )
            return replace(session, state=state, initial=state,
                           prev_state=None, last_op=None), summary

        case OpStatement(op):
            state = _require_state(session)
            new_state = algebra.apply_op(state, op)
            summary = (
                f"ok: flagged {new_state.flag_count()}, "
                f"destroyed {new_state.destroyed_count()}, "
                f"measures {', '.join(new_state.measure_names())}"
            )
            return replace(session, state=new_state, prev_state=state, last_op=op), summary

        case Show(row_dim, col_dim, measure, fixed):
            state = _require_state(session)
            view = io.export_view(state, row_dim, col_dim, dict(fixed), measure)
            return session, _render_grid(view)

        case Trace():
            state = _require_state(session)
            lines = []
            for entry in state.op_log:
                lines.append(entry.description)
                lines.extend(
                    "  " + s
                    for s in render_steps(entry.steps, len(state.dims), entry.base)
                )
            return session, "\n".join(lines) if lines else "(no operations yet)"

        case Snapshot(path):
            state = _require_state(session)
            io.save_snapshot(state, path)
            return session, f"snapshot written to {path}"

        case Restore(path):
            state = io.load_snapshot(path)
            return replace(session, state=state, initial=state,
                           prev_state=None, last_op=None), f"restored from {path}"

        case Check():
            state = _require_state(session)
            if session.last_op is None or session.prev_state is None:
                raise CubeError("no operation to check")
            shadow = oracle.cube_from_state(session.prev_state)
            expected = oracle.apply_oracle_op(shadow, session.last_op).result()
            report = oracle.assert_equiv(state, expected, state.measure_names())
            if report.ok:
                return session, "equivalent: engine result matches the oracle"
            listing = "\n".join(report.mismatches)
            return replace(session, mismatches=session.mismatches + 1), (
                f"MISMATCH ({len(report.mismatches)} differences)\n{listing}"
            )

        case Reset():
            if session.initial is None:
                raise CubeError("no cube loaded")
            return replace(session, state=session.initial,
                           prev_state=None, last_op=None), "reset to the loaded cube"

    raise CubeError(f"unsupported statement {stmt!r}")


# --- entry points -----------------------------------------------------------------


def run_lines(lines, session: Session | None = None, out=None) -> tuple[Session, int]:
    """Execute statements in order; returns the session and an exit code."""
    out = out if out is not None else sys.stdout
    session = session or Session()
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            stmt = parse_statement(line)
            session, output = execute(session, stmt)
        except CubeError as exc:
            print(f"error: {exc}", file=out)
            return session, 2
        print(output, file=out)
    return session, 1 if session.mismatches else 0


def repl(session: Session | None = None):
    try:
        import readline  # noqa: F401  (line editing and history for input())
    except ImportError:
        pass
    session = session or Session()
    print("cubealg — type statements, or 'exit'")
    while True:
        try:
            line = input("> ").strip()
        except EOFError:
            break
        if line in ("exit", "quit"):
            break
        if not line or line.startswith("#"):
            continue
        try:
            stmt = parse_statement(line)
            session, output = execute(session, stmt)
            print(output)
        except CubeError as exc:
            print(f"error: {exc}")
    return 0


def _preload(args) -> Session:
    session = Session()
    if args.cube and args.facts:
        fill = Fraction(args.fill) if args.fill else None
        session, output = execute(session, Load(args.cube, args.facts, fill))
        print(output)
    return session


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cubealg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("repl", "run"):
        p = sub.add_parser(name)
        p.add_argument("--cube", help="cube definition JSON")
        p.add_argument("--facts", help="fact table CSV")
        p.add_argument("--fill", help="fill value for missing facts (rational)")
        if name == "run":
            p.add_argument("--script", required=True, help="statement file")

    p_check = sub.add_parser("check", help="randomized differential test")
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument("--trials", type=int, default=100)

    p_serve = sub.add_parser("serve", help="HTTP session service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")

    args = parser.parse_args(argv)

    if args.command == "repl":
        try:
            session = _preload(args)
        except CubeError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        return repl(session)

    if args.command == "run":
        try:
            session = _preload(args)
            with open(args.script, encoding="utf-8") as handle:
                lines = handle.readlines()
        except (CubeError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        _, code = run_lines(lines, session)
        return code

    if args.command == "check":
        from .randgen import run_differential

        report = run_differential(seed=args.seed, trials=args.trials)
        print(report.summary())
        return 0 if report.ok else 1

    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
