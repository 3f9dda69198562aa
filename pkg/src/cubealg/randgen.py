"""Random cubes, conditions, and operations for differential testing.

Instances are generated sound by construction: each level's member map is a
random coarsening of the partition induced by the levels feeding it, so
every roll-up path from a bottom member agrees.  The `cubealg check`
subcommand and the acceptance suite both drive `run_differential`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import algebra, engine, oracle
from .algebra import (
    And,
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
from .engine import CubeState, init_cube
from .model import ALL_LEVEL, ALL_MEMBER, CubeSchema, DimensionGraph, DimensionSchema, MatrixSchema

_SCHEMA_SHAPES = (
    ("Mid",),            # Bottom -> Mid -> All
    (),                  # Bottom -> All
    ("MidA", "MidB"),    # chain of two middle levels
    "diamond",           # two parallel hierarchies, disjoint middles
    "funnel",            # two parallel middles converging on a shared level
)


def random_dimension(rng: random.Random, name: str, max_members: int = 4) -> DimensionGraph:
    shape = rng.choice(_SCHEMA_SHAPES)
    bottom = f"{name}Bottom"
    if shape == "diamond":
        levels = (bottom, f"{name}L", f"{name}R", ALL_LEVEL)
        edges = ((bottom, levels[1]), (bottom, levels[2]),
                 (levels[1], ALL_LEVEL), (levels[2], ALL_LEVEL))
    elif shape == "funnel":
        levels = (bottom, f"{name}L", f"{name}R", f"{name}Top", ALL_LEVEL)
        edges = ((bottom, levels[1]), (bottom, levels[2]),
                 (levels[1], levels[3]), (levels[2], levels[3]),
                 (levels[3], ALL_LEVEL))
    else:
        mids = tuple(f"{name}{m}" for m in shape)
        levels = (bottom,) + mids + (ALL_LEVEL,)
        edges = tuple(zip(levels, levels[1:]))
    schema = DimensionSchema(name, levels, edges)

    members = [f"{name.lower()}{i}" for i in range(rng.randint(2, max_members))]
    rng.shuffle(members)
    assignment: dict[str, dict[str, str]] = {bottom: {m: m for m in members}}
    domains: dict[str, tuple[str, ...]] = {bottom: tuple(members)}
    for level in _toposorted(schema):
        if level == bottom:
            continue
        feeders = schema.children(level)
        classes = _merge_classes(rng, members, [assignment[f] for f in feeders])
        if level == ALL_LEVEL:
            classes = [sorted(set(members))]
        names = (
            [ALL_MEMBER]
            if level == ALL_LEVEL
            else [f"{level.lower()}_{i}" for i in range(len(classes))]
        )
        table = {}
        for label, cls in zip(names, classes):
            for member in cls:
                table[member] = label
        assignment[level] = table
        domains[level] = tuple(names)

    edges_inst: set[tuple[str, str]] = set()
    for lower, upper in schema.edges:
        for member in members:
            edges_inst.add((assignment[lower][member], assignment[upper][member]))
    graph = DimensionGraph(schema, domains, edges_inst)
    graph.ensure_valid()
    return graph


def _toposorted(schema: DimensionSchema) -> list[str]:
    order: list[str] = []
    pending = list(schema.levels)
    while pending:
        for level in pending:
            if all(child in order for child in schema.children(level)):
                order.append(level)
                pending.remove(level)
                break
    return order


def _merge_classes(rng, members, feeder_maps) -> list[list[str]]:
    """Random coarsening of the join of the feeders' partitions."""
    parent = {m: m for m in members}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for table in feeder_maps:
        by_value: dict[str, str] = {}
        for member in members:
            value = table[member]
            if value in by_value:
                parent[find(member)] = find(by_value[value])
            else:
                by_value[value] = member
    classes: dict[str, list[str]] = {}
    for member in members:
        classes.setdefault(find(member), []).append(member)
    blocks = [sorted(cls) for cls in classes.values()]
    rng.shuffle(blocks)
    target = rng.randint(1, len(blocks))
    merged = [list() for _ in range(target)]
    for i, block in enumerate(blocks):
        merged[i % target].extend(block)
    return [sorted(block) for block in merged]


def random_cube(
    rng: random.Random,
    max_dims: int = 3,
    max_members: int = 4,
    measure_names: tuple[str, ...] | None = None,
    value_bound: int = 100,
) -> CubeState:
    if measure_names is None:
        measure_names = ("m1",) if rng.random() < 0.5 else ("m1", "m2")
    dim_count = rng.randint(1, max_dims)
    names = [f"D{i + 1}" for i in range(dim_count)]
    graphs = {name: random_dimension(rng, name, max_members) for name in names}
    schema = CubeSchema(MatrixSchema(tuple(names)), graphs)
    facts = {}
    for address in _all_addresses(schema):
        facts[address] = {
            m: Fraction(rng.randint(-value_bound, value_bound), rng.randint(1, value_bound))
            for m in measure_names
        }
    return init_cube(schema, measure_names, facts)


def _all_addresses(schema: CubeSchema):
    import itertools

    return itertools.product(*(schema.dom(d) for d in schema.dims))


def random_condition(rng: random.Random, state: CubeState, depth: int = 2):
    if depth > 0:
        roll = rng.random()
        if roll < 0.2:
            return Not(random_condition(rng, state, depth - 1))
        if roll < 0.4:
            return And(random_condition(rng, state, depth - 1),
                       random_condition(rng, state, depth - 1))
        if roll < 0.6:
            return Or(random_condition(rng, state, depth - 1),
                      random_condition(rng, state, depth - 1))
    dim = rng.choice(state.dims)
    graph = state.schema.graph(dim)
    if rng.random() < 0.5:
        level = rng.choice(graph.schema.levels)
        member = rng.choice(graph.members(level))
        if rng.random() < 0.5:
            return LevelEq(dim, level, member)
        return LevelLt(dim, level, member, rng.choice(("below", "above")))
    measure = rng.choice(state.measure_names())
    values = [v for v in state.resolve(measure) if v is not None]
    if values and rng.random() < 0.5:
        constant = rng.choice(values).as_rational()
    else:
        constant = Fraction(rng.randint(-100, 100), rng.randint(1, 100))
    if rng.random() < 0.4:
        return MeasureEq(measure, constant)
    return MeasureLt(measure, constant, rng.choice(("below", "above")))


def random_op(rng: random.Random, state: CubeState) -> OlapOp:
    kind = rng.choice(("dice", "slice", "sliceDice", "rollUp", "drillDown"))
    if kind == "dice":
        return Dice(random_condition(rng, state))
    dim = rng.choice(state.dims)
    graph = state.schema.graph(dim)
    if kind == "slice":
        return Slice(dim)
    if kind == "sliceDice":
        return SliceDice(dim, rng.choice(graph.bottom_domain))
    level = rng.choice(graph.schema.levels)
    measures = rng.sample(
        state.measure_names(), k=rng.randint(1, min(2, len(state.measure_names())))
    )
    aggs = tuple((m, rng.choice(algebra.AGG_FUNCTIONS)) for m in measures)
    cls = RollUp if kind == "rollUp" else DrillDown
    return cls(dim, level, aggs)


# --- the differential loop ------------------------------------------------------


@dataclass
class DifferentialReport:
    trials: int = 0
    operations: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        verdict = "OK" if self.ok else f"{len(self.failures)} MISMATCHES"
        lines = [
            f"differential check: {self.trials} cubes, {self.operations} operations, {verdict}"
        ]
        lines.extend(self.failures[:20])
        return "\n".join(lines)


def run_trial(rng: random.Random, report: DifferentialReport, ops_per_cube: int):
    report.trials += 1
    state = random_cube(rng)
    shadow = oracle.cube_from_state(state)
    for _ in range(ops_per_cube):
        op = random_op(rng, state)
        state = algebra.apply_op(state, op)
        shadow = oracle.apply_oracle_op(shadow, op)
        report.operations += 1
        equiv = oracle.assert_equiv(state, shadow.result(), state.measure_names())
        if not equiv.ok:
            report.failures.append(
                f"trial {report.trials}: {algebra.describe_op(op)}: {equiv.mismatches[0]}"
            )
            return


def run_differential(seed: int = 0, trials: int = 100) -> DifferentialReport:
    """Half the cubes get one random operation, half a 3-op pipeline."""
    rng = random.Random(seed)
    report = DifferentialReport()
    for trial in range(trials):
        run_trial(rng, report, ops_per_cube=1 if trial % 2 == 0 else 3)
    return report
