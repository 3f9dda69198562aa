"""Lowering of classical OLAP operations to transformation-step sequences.

Boolean cell conditions compile to arithmetic over 0/1 measures (AND is a
product, NOT phi is 1-phi, OR is inclusion-exclusion).  Dice, Slice,
Slice-Dice, Roll-Up and Drill-Down each compile to a step list ending in a
flag (plus a destructor for the destructive ones); grouping is done with
prime labels on the complement dimensions and, for roll-ups, on the target
level.  The compiler is stateless; execution inherits the engine contract.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import engine
from .engine import (
    Const,
    CountDistinct,
    CubeState,
    EqLevel,
    EqMeasure,
    Gamma,
    LtLevel,
    LtMeasure,
    MakeDestructor,
    MakeFlag,
    Max,
    Min,
    Prod,
    Project,
    Quot,
    SelConst,
    SelLevel,
    Sum,
    SumD,
    TransformationStep,
)
from .errors import EngineError, UnknownNameError
from .model import ALL_LEVEL

# --- Boolean cell conditions -------------------------------------------------


@dataclass(frozen=True)
class LevelEq:
    dim: str
    level: str
    member: str


@dataclass(frozen=True)
class LevelLt:
    dim: str
    level: str
    member: str
    side: str = "below"  # "below": level < member, "above": member < level


@dataclass(frozen=True)
class MeasureEq:
    measure: str
    value: Fraction


@dataclass(frozen=True)
class MeasureLt:
    measure: str
    value: Fraction
    side: str = "below"  # "below": measure < value, "above": value < measure


@dataclass(frozen=True)
class Not:
    child: "CellCondition"


@dataclass(frozen=True)
class And:
    left: "CellCondition"
    right: "CellCondition"


@dataclass(frozen=True)
class Or:
    left: "CellCondition"
    right: "CellCondition"


CellCondition = LevelEq | LevelLt | MeasureEq | MeasureLt | Not | And | Or

AGG_FUNCTIONS = ("SUM", "AVG", "MIN", "MAX", "COUNT", "COUNT-DISTINCT")


@dataclass(frozen=True)
class Dice:
    condition: CellCondition


@dataclass(frozen=True)
class Slice:
    dimension: str


@dataclass(frozen=True)
class SliceDice:
    dimension: str
    member: str


@dataclass(frozen=True)
class RollUp:
    dimension: str
    level: str
    aggs: tuple[tuple[str, str], ...]  # (measure, aggregation function)


@dataclass(frozen=True)
class DrillDown:
    dimension: str
    level: str
    aggs: tuple[tuple[str, str], ...]


OlapOp = Dice | Slice | SliceDice | RollUp | DrillDown


# --- validation ---------------------------------------------------------------


def validate_condition(cond: CellCondition, state: CubeState):
    match cond:
        case LevelEq(dim, level, member) | LevelLt(dim, level, member, _):
            graph = state.schema.graph(dim)
            if member not in graph.members(level):
                raise UnknownNameError(f"{member!r} is not a member of {dim}.{level}")
        case MeasureEq(measure, _) | MeasureLt(measure, _, _):
            state.resolve(measure)
        case Not(child):
            validate_condition(child, state)
        case And(left, right) | Or(left, right):
            validate_condition(left, state)
            validate_condition(right, state)


def _validate_aggs(aggs, state: CubeState):
    if not aggs:
        raise EngineError("roll-up needs at least one (measure, function) pair")
    for measure, fn in aggs:
        state.resolve(measure)
        if fn not in AGG_FUNCTIONS:
            raise EngineError(f"unsupported aggregation function {fn!r}")


# --- compilation ---------------------------------------------------------------


class _Emitter:
    """Accumulates steps, tracking the t-index of each appended measure."""

    def __init__(self, base: int):
        self.steps: list[TransformationStep] = []
        self.index = base

    def emit(self, step: TransformationStep) -> str:
        self.steps.append(step)
        self.index += 1
        return f"t{self.index}"


def compile_condition(
    cond: CellCondition, base: int = 0
) -> tuple[list[TransformationStep], str]:
    """Steps computing the 0/1 characteristic measure of the condition.

    `base` is the number of computed measures already present; returns the
    step list and the reference holding the final Boolean measure.
    """
    out = _Emitter(base)
    ref = _compile_cond(cond, out)
    return out.steps, ref


def _compile_cond(cond: CellCondition, out: _Emitter) -> str:
    match cond:
        case LevelEq(dim, level, member):
            return out.emit(EqLevel(dim, level, member))
        case LevelLt(dim, level, member, side):
            return out.emit(LtLevel(dim, level, member, side))
        case MeasureEq(measure, value):
            const = out.emit(Const(value))
            return out.emit(EqMeasure(measure, const))
        case MeasureLt(measure, value, side):
            const = out.emit(Const(value))
            if side == "below":
                return out.emit(LtMeasure(measure, const))
            return out.emit(LtMeasure(const, measure))
        case Not(child):
            phi = _compile_cond(child, out)
            minus = out.emit(Const(Fraction(-1)))
            negated = out.emit(Prod(phi, minus))
            one = out.emit(Const(Fraction(1)))
            return out.emit(Sum(negated, one))
        case And(left, right):
            l_ref = _compile_cond(left, out)
            r_ref = _compile_cond(right, out)
            return out.emit(Prod(l_ref, r_ref))
        case Or(left, right):
            l_ref = _compile_cond(left, out)
            r_ref = _compile_cond(right, out)
            both = out.emit(Sum(l_ref, r_ref))
            overlap = out.emit(Prod(l_ref, r_ref))
            minus = out.emit(Const(Fraction(-1)))
            negated = out.emit(Prod(overlap, minus))
            return out.emit(Sum(both, negated))
    raise EngineError(f"unsupported condition node {cond!r}")


def _emit_product_labeling(out: _Emitter, parts: list[Gamma]) -> str:
    ref = out.emit(parts[0])
    for gamma in parts[1:]:
        nxt = out.emit(gamma)
        ref = out.emit(Prod(ref, nxt))
    return ref


def compile_op(op: OlapOp, state: CubeState) -> tuple[list[TransformationStep], str]:
    """Lower one classical operation against the given state.

    Validation happens up front; no step list is returned for an invalid
    operation.  The returned description is the canonical statement text.
    """
    k = len(state.protected_names)
    out = _Emitter(len(state.computed))

    match op:
        case Dice(cond):
            validate_condition(cond, state)
            psi = _compile_cond(cond, out)
            for name in state.protected_names:
                out.emit(Prod(name, psi))
            out.steps.append(MakeDestructor(psi))
            out.steps.append(MakeFlag(k, psi))

        case Slice(dim):
            state.schema.graph(dim)  # raises on unknown dimension
            others = [d for d in state.dims if d != dim]
            label = None
            if others:
                gammas = [Gamma(d, state.schema.graph(d).bottom_level) for d in others]
                label = _emit_product_labeling(out, gammas)
            sums = []
            for name in state.protected_names:
                if label is None:
                    sums.append(out.emit(SumD(name)))
                else:
                    tagged = out.emit(Prod(name, label))
                    sums.append(out.emit(SumD(tagged)))
            if label is not None:
                for ref in sums:
                    out.emit(Project(ref, label))
            sel = SelLevel(dim, ALL_LEVEL)
            out.steps.append(MakeDestructor(sel))
            out.steps.append(MakeFlag(k, sel))

        case SliceDice(dim, member):
            graph = state.schema.graph(dim)
            if member not in graph.bottom_domain:
                raise UnknownNameError(f"{member!r} is not a bottom member of {dim}")
            sel = SelConst(dim, graph.bottom_level, member)
            out.steps.append(MakeDestructor(sel))
            out.steps.append(MakeFlag(0, sel))

        case RollUp(dim, level, aggs) | DrillDown(dim, level, aggs):
            graph = state.schema.graph(dim)
            graph.members(level)  # raises on unknown level
            _validate_aggs(aggs, state)
            gammas = [
                Gamma(d, state.schema.graph(d).bottom_level)
                for d in state.dims
                if d != dim
            ]
            gammas.append(Gamma(dim, level))
            label = _emit_product_labeling(out, gammas)

            # Intermediates first; each aggregation's result measure is
            # emitted in a final block so the flag keeps exactly those.
            finals: list[TransformationStep] = []
            for measure, fn in aggs:
                if fn == "SUM":
                    tagged = out.emit(Prod(measure, label))
                    total = out.emit(SumD(tagged))
                    finals.append(Project(total, label))
                elif fn == "COUNT":
                    one = out.emit(Const(Fraction(1)))
                    tagged = out.emit(Prod(one, label))
                    total = out.emit(SumD(tagged))
                    finals.append(Project(total, label))
                elif fn == "AVG":
                    tagged = out.emit(Prod(measure, label))
                    total = out.emit(SumD(tagged))
                    sum_ref = out.emit(Project(total, label))
                    one = out.emit(Const(Fraction(1)))
                    ones = out.emit(Prod(one, label))
                    counted = out.emit(SumD(ones))
                    count_ref = out.emit(Project(counted, label))
                    finals.append(Quot(sum_ref, count_ref))
                elif fn == "MIN":
                    finals.append(Min(measure, group_by=label))
                elif fn == "MAX":
                    finals.append(Max(measure, group_by=label))
                else:  # COUNT-DISTINCT
                    finals.append(CountDistinct(measure, group_by=label))
            for step in finals:
                out.emit(step)
            out.steps.append(MakeFlag(len(aggs), SelLevel(dim, level)))

        case _:
            raise EngineError(f"unsupported operation {op!r}")

    return out.steps, describe_op(op)


# --- execution -----------------------------------------------------------------


def apply_op(state: CubeState, op: OlapOp) -> CubeState:
    steps, description = compile_op(op, state)
    return engine.apply_sequence(state, steps, description)


def dice(state: CubeState, cond: CellCondition) -> CubeState:
    return apply_op(state, Dice(cond))


def slice_cube(state: CubeState, dim: str) -> CubeState:
    return apply_op(state, Slice(dim))


def slice_dice(state: CubeState, dim: str, member: str) -> CubeState:
    return apply_op(state, SliceDice(dim, member))


def roll_up(state: CubeState, dim: str, level: str, aggs) -> CubeState:
    return apply_op(state, RollUp(dim, level, tuple(aggs)))


def drill_down(state: CubeState, dim: str, level: str, aggs) -> CubeState:
    # Same lowering as a roll-up from the bottom level: aggregation always
    # recomputes from the named measures over the surviving cells.
    return apply_op(state, DrillDown(dim, level, tuple(aggs)))


def run_pipeline(state: CubeState, ops) -> CubeState:
    for op in ops:
        state = apply_op(state, op)
    return state


# --- rendering -------------------------------------------------------------


_BARE_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*$")


def quote_name(name: str) -> str:
    if _BARE_NAME.match(name) and name not in ("NOT", "AND", "OR"):
        return name
    return '"' + name.replace('"', '\\"') + '"'


def render_condition(cond: CellCondition, parent: str = "or") -> str:
    """Grammar text of a condition.

    Parentheses are minimal but chosen so that re-parsing (which folds AND/OR
    chains to the left) reproduces the exact tree: right operands of a
    connective are rendered in a tighter context.
    """
    match cond:
        case LevelEq(dim, level, member):
            return f"{quote_name(dim)}.{quote_name(level)} = {quote_name(member)}"
        case LevelLt(dim, level, member, side):
            cmp = "<" if side == "below" else ">"
            return f"{quote_name(dim)}.{quote_name(level)} {cmp} {quote_name(member)}"
        case MeasureEq(measure, value):
            return f"{quote_name(measure)} = {value}"
        case MeasureLt(measure, value, side):
            cmp = "<" if side == "below" else ">"
            return f"{quote_name(measure)} {cmp} {value}"
        case Not(child):
            return f"NOT {render_condition(child, 'not')}"
        case And(left, right):
            text = (
                f"{render_condition(left, 'and')} AND {render_condition(right, 'not')}"
            )
            return f"({text})" if parent == "not" else text
        case Or(left, right):
            text = f"{render_condition(left, 'or')} OR {render_condition(right, 'and')}"
            return f"({text})" if parent in ("not", "and") else text
    raise EngineError(f"unsupported condition node {cond!r}")


def render_aggs(aggs) -> str:
    return "{" + ", ".join(f"{quote_name(m)}: {fn}" for m, fn in aggs) + "}"


def describe_op(op: OlapOp) -> str:
    match op:
        case Dice(cond):
            return f"DICE {render_condition(cond)}"
        case Slice(dim):
            return f"SLICE {quote_name(dim)}"
        case SliceDice(dim, member):
            return f"SLICEDICE {quote_name(dim)} {quote_name(member)}"
        case RollUp(dim, level, aggs):
            return f"ROLLUP {quote_name(dim)} {quote_name(level)} {render_aggs(aggs)}"
        case DrillDown(dim, level, aggs):
            return f"DRILLDOWN {quote_name(dim)} {quote_name(level)} {render_aggs(aggs)}"
    raise EngineError(f"unsupported operation {op!r}")


def _ref_text(ref: str) -> str:
    if ref == engine.FLAG_REF:
        return "φ"
    if re.fullmatch(r"t\d+", ref):
        return "τ" + ref[1:]
    return ref


def _render_rhs(step, dims: int) -> str:
    match step:
        case Const(value):
            return str(value)
        case Sum(a, b):
            return f"{_ref_text(a)} + {_ref_text(b)}"
        case Prod(a, b):
            return f"{_ref_text(a)} · {_ref_text(b)}"
        case Quot(a, b):
            return f"{_ref_text(a)} / {_ref_text(b)}"
        case EqMeasure(a, b):
            return f"({_ref_text(a)} = {_ref_text(b)})"
        case LtMeasure(a, b):
            return f"({_ref_text(a)} < {_ref_text(b)})"
        case EqLevel(dim, level, member):
            return f"({dim}.{level} = {member})"
        case LtLevel(dim, level, member, side):
            if side == "below":
                return f"({dim}.{level} < {member})"
            return f"({member} < {dim}.{level})"
        case SelConst(dim, level, member):
            return f"σ[{dim}.{level} = {member}]"
        case SelLevel(dim, level):
            return f"σ[{dim}.{level}]"
        case CountDistinct(measure, group_by):
            grouped = f"|{_ref_text(group_by)}" if group_by else ""
            return f"#≠{grouped}({_ref_text(measure)})"
        case SumD(measure):
            return f"SUM_{dims}({_ref_text(measure)})"
        case Min(measure, group_by):
            grouped = f"|{_ref_text(group_by)}" if group_by else ""
            return f"min{grouped}({_ref_text(measure)})"
        case Max(measure, group_by):
            grouped = f"|{_ref_text(group_by)}" if group_by else ""
            return f"max{grouped}({_ref_text(measure)})"
        case Gamma(dim, level):
            return f"γ[{dim}.{level}]"
        case Project(value, labeling):
            return f"{_ref_text(value)} | {_ref_text(labeling)}"
    raise EngineError(f"unsupported step {step!r}")


def _render_source(source, dims: int) -> str:
    return _ref_text(source) if isinstance(source, str) else _render_rhs(source, dims)


def render_steps(steps, dims: int, base: int = 0) -> list[str]:
    """One line per step in the paper's tau-notation."""
    lines = []
    index = base
    for step in steps:
        match step:
            case MakeDestructor(source):
                lines.append(f"δ = {_render_source(source, dims)}")
            case MakeFlag(arity, source):
                lines.append(f"φ({arity}) = {_render_source(source, dims)}")
            case _:
                index += 1
                lines.append(f"τ{index} = {_render_rhs(step, dims)}")
    return lines
