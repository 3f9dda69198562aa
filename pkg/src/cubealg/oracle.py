"""Brute-force evaluator of the classical operations, for differential tests.

The oracle works by direct iteration over cells and the roll-up relation:
no prime labels, no allocator, no step lists.  It keeps its own cube shadow
(plain Fractions per cell) so an engine bug cannot leak into its results,
and every aggregation is a few lines of the defining fold.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import (
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
)
from .engine import CubeState
from .errors import EngineError, UnknownNameError
from .model import ALL_MEMBER, CubeSchema

Address = tuple[str, ...]


@dataclass
class OracleResult:
    """Named values plus flag for every non-destroyed cell."""

    cells: dict[Address, tuple[dict[str, Fraction], int]]

    def flagged(self) -> set[Address]:
        return {addr for addr, (_, flag) in self.cells.items() if flag}


@dataclass
class OracleCube:
    """Read-only shadow of a cube state: rational values per live cell."""

    schema: CubeSchema
    protected_names: tuple[str, ...]
    protected: dict[str, dict[Address, Fraction]]
    computed: list[dict[Address, Fraction]]
    flag: dict[Address, int]

    @property
    def dims(self) -> tuple[str, ...]:
        return self.schema.dims

    def alive(self) -> set[Address]:
        return set(self.flag)

    def measure(self, name: str) -> dict[Address, Fraction]:
        if name in self.protected:
            return self.protected[name]
        if name.startswith("t") and name[1:].isdigit():
            index = int(name[1:]) - 1
            if 0 <= index < len(self.computed):
                return self.computed[index]
        raise UnknownNameError(f"unknown measure {name!r}")

    def result(self) -> OracleResult:
        cells: dict[Address, tuple[dict[str, Fraction], int]] = {}
        for addr, flag in self.flag.items():
            values = {name: self.protected[name][addr] for name in self.protected_names}
            for i, column in enumerate(self.computed):
                values[f"t{i + 1}"] = column[addr]
            cells[addr] = (values, flag)
        return OracleResult(cells)


def cube_from_state(state: CubeState) -> OracleCube:
    protected: dict[str, dict[Address, Fraction]] = {n: {} for n in state.protected_names}
    computed: list[dict[Address, Fraction]] = [{} for _ in state.computed]
    flag: dict[Address, int] = {}
    for i, addr in enumerate(state.addresses()):
        if state.destroyed[i]:
            continue
        flag[addr] = state.flag[i] or 0
        for name in state.protected_names:
            protected[name][addr] = state.protected[name][i].as_rational()
        for j, column in enumerate(state.computed):
            computed[j][addr] = column[i].as_rational()
    return OracleCube(state.schema, state.protected_names, protected, computed, flag)


# --- condition evaluation ----------------------------------------------------


def eval_condition(cube: OracleCube, cond: CellCondition, addr: Address) -> bool:
    match cond:
        case LevelEq(dim, level, member):
            graph = cube.schema.graph(dim)
            return graph.rolls_up(addr[cube.dims.index(dim)], level) == member
        case LevelLt(dim, level, member, side):
            graph = cube.schema.graph(dim)
            target = graph.rolls_up(addr[cube.dims.index(dim)], level)
            if target is None:
                return False
            order = graph.induced_compare(level, target, member)
            return order < 0 if side == "below" else order > 0
        case MeasureEq(measure, value):
            return cube.measure(measure)[addr] == value
        case MeasureLt(measure, value, side):
            current = cube.measure(measure)[addr]
            return current < value if side == "below" else current > value
        case Not(child):
            return not eval_condition(cube, child, addr)
        case And(left, right):
            return eval_condition(cube, left, addr) and eval_condition(cube, right, addr)
        case Or(left, right):
            return eval_condition(cube, left, addr) or eval_condition(cube, right, addr)
    raise EngineError(f"unsupported condition node {cond!r}")


def oracle_select(state: CubeState | OracleCube, cond: CellCondition) -> OracleResult:
    """Mark every live cell with 1 or 0 according to the condition."""
    cube = state if isinstance(state, OracleCube) else cube_from_state(state)
    cells = {}
    for addr in cube.alive():
        selected = eval_condition(cube, cond, addr)
        values = {name: cube.protected[name][addr] for name in cube.protected_names}
        cells[addr] = (values, 1 if selected else 0)
    return OracleResult(cells)


# --- aggregation ------------------------------------------------------------


_AGGREGATES = {
    "SUM": lambda vs: sum(vs, Fraction(0)),
    "AVG": lambda vs: sum(vs, Fraction(0)) / len(vs),
    "MIN": min,
    "MAX": max,
    "COUNT": len,
    "COUNT-DISTINCT": lambda vs: len(set(vs)),
}


def _group_value(cube: OracleCube, dim: str, level: str, measure, fn, addr) -> Fraction:
    """Aggregate over the cells of addr's line whose member shares its target."""
    axis = cube.dims.index(dim)
    graph = cube.schema.graph(dim)
    target = graph.rolls_up(addr[axis], level)
    if target is None:
        return Fraction(0)
    group = []
    for other in graph.bottom_domain:
        if graph.rolls_up(other, level) == target:
            cell = addr[:axis] + (other,) + addr[axis + 1:]
            if cell in cube.flag:
                group.append(measure[cell])
    return Fraction(_AGGREGATES[fn](group))


def _representative_cells(cube: OracleCube, dim: str, level: str) -> set[str]:
    graph = cube.schema.graph(dim)
    return {graph.representative(b) for b in graph.members(level)}


def oracle_aggregate(
    state: CubeState | OracleCube, dim: str, level: str, measure: str, fn: str
) -> OracleResult:
    """Direct group-by along one dimension; flags the level's representatives."""
    cube = state if isinstance(state, OracleCube) else cube_from_state(state)
    if fn not in _AGGREGATES:
        raise EngineError(f"unsupported aggregation function {fn!r}")
    source = cube.measure(measure)
    axis = cube.dims.index(dim)
    reps = _representative_cells(cube, dim, level)
    cells = {}
    for addr in cube.alive():
        value = _group_value(cube, dim, level, source, fn, addr)
        values = {name: cube.protected[name][addr] for name in cube.protected_names}
        values["t1"] = value
        cells[addr] = (values, 1 if addr[axis] in reps else 0)
    return OracleResult(cells)


# --- classical operations, composed ------------------------------------------


def apply_oracle_op(cube: OracleCube, op: OlapOp) -> OracleCube:
    match op:
        case Dice(cond):
            keep = {a for a in cube.alive() if eval_condition(cube, cond, a)}
            protected = {n: {a: col[a] for a in keep} for n, col in cube.protected.items()}
            computed = [dict(protected[n]) for n in cube.protected_names]
            return OracleCube(cube.schema, cube.protected_names, protected, computed,
                              {a: 1 for a in keep})

        case Slice(dim):
            axis = cube.dims.index(dim)
            domain = cube.schema.graph(dim).bottom_domain
            rep_all = cube.schema.graph(dim).representative(ALL_MEMBER)
            sums = []
            for name in cube.protected_names:
                col = cube.protected[name]
                sums.append({
                    a: sum(
                        (col[a[:axis] + (y,) + a[axis + 1:]]
                         for y in domain if a[:axis] + (y,) + a[axis + 1:] in col),
                        Fraction(0),
                    )
                    for a in cube.alive()
                })
            keep = {a for a in cube.alive() if a[axis] == rep_all}
            protected = {n: {a: col[a] for a in keep} for n, col in cube.protected.items()}
            computed = [{a: s[a] for a in keep} for s in sums]
            return OracleCube(cube.schema, cube.protected_names, protected, computed,
                              {a: 1 for a in keep})

        case SliceDice(dim, member):
            axis = cube.dims.index(dim)
            keep = {a for a in cube.alive() if a[axis] == member}
            protected = {n: {a: col[a] for a in keep} for n, col in cube.protected.items()}
            return OracleCube(cube.schema, cube.protected_names, protected, [],
                              {a: 1 for a in keep})

        case RollUp(dim, level, aggs) | DrillDown(dim, level, aggs):
            axis = cube.dims.index(dim)
            reps = _representative_cells(cube, dim, level)
            computed = []
            for measure, fn in aggs:
                source = cube.measure(measure)
                computed.append({
                    a: _group_value(cube, dim, level, source, fn, a)
                    for a in cube.alive()
                })
            flag = {a: (1 if a[axis] in reps else 0) for a in cube.alive()}
            return OracleCube(cube.schema, cube.protected_names,
                              {n: dict(col) for n, col in cube.protected.items()},
                              computed, flag)

    raise EngineError(f"unsupported operation {op!r}")


def run_oracle_pipeline(cube: OracleCube, ops) -> OracleCube:
    for op in ops:
        cube = apply_oracle_op(cube, op)
    return cube


# --- comparison ---------------------------------------------------------------


@dataclass
class EquivReport:
    ok: bool
    mismatches: tuple[str, ...]


def assert_equiv(
    state: CubeState, expected: OracleResult, measure_names
) -> EquivReport:
    """Exact comparison of live-cell sets, flagged sets, and named values on
    flagged cells; mismatched addresses are listed in the report."""
    problems: list[str] = []
    engine_alive = {state.addresses()[i] for i in state.live_cells()}
    oracle_alive = set(expected.cells)
    for addr in sorted(engine_alive ^ oracle_alive):
        side = "engine" if addr in engine_alive else "oracle"
        problems.append(f"cell {addr} is live only in the {side} result")

    engine_flagged = {
        addr for i, addr in enumerate(state.addresses()) if state.flag[i]
    }
    oracle_flagged = expected.flagged()
    for addr in sorted(engine_flagged ^ oracle_flagged):
        side = "engine" if addr in engine_flagged else "oracle"
        problems.append(f"cell {addr} is flagged only in the {side} result")

    for addr in sorted(engine_flagged & oracle_flagged):
        values, _ = expected.cells[addr]
        for name in measure_names:
            got = state.value(name, addr)
            want = values.get(name)
            if want is None:
                problems.append(f"oracle result lacks measure {name!r}")
                continue
            if got is None or not got.is_rational() or got.as_rational() != want:
                problems.append(
                    f"cell {addr} measure {name}: engine={got} oracle={want}"
                )
    return EquivReport(not problems, tuple(problems))
