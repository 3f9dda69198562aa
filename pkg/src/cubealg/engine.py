"""The cube state machine.

A CubeState is a dense matrix over the ordered bottom domains.  Each cell
carries the protected input measures, a growing stack of computed measures,
a Boolean flag, and possibly a tombstone (destroyed cells keep their address
but no values).  Atomic transformation steps each append exactly one
computed measure; an operation finishes with an m-ary flag (optionally
preceded by a destructor), which trims the stack to its last m entries and
renames them t1..tm.

States are treated as immutable: applying a step returns a new state that
shares all untouched per-measure arrays with its predecessor.  One writer
per state; reads are safe to share.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import EngineError, IrrationalValueError, UnknownNameError
from .exactnum import (
    EV_ONE,
    EV_ZERO,
    ExactValue,
    LabelAllocator,
    LabelingMeta,
    ev_bool,
)
from .model import ALL_LEVEL, CubeSchema

FLAG_REF = "phi"

# --- transformation steps (the engine's IR) --------------------------------


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Sum:
    a: str
    b: str


@dataclass(frozen=True)
class Prod:
    a: str
    b: str


@dataclass(frozen=True)
class Quot:
    a: str
    b: str


@dataclass(frozen=True)
class EqMeasure:
    a: str
    b: str


@dataclass(frozen=True)
class LtMeasure:
    a: str
    b: str


@dataclass(frozen=True)
class EqLevel:
    dim: str
    level: str
    member: str


@dataclass(frozen=True)
class LtLevel:
    dim: str
    level: str
    member: str
    side: str = "below"  # "below": level < member, "above": member < level


@dataclass(frozen=True)
class SelConst:
    dim: str
    level: str
    member: str


@dataclass(frozen=True)
class SelLevel:
    dim: str
    level: str


@dataclass(frozen=True)
class CountDistinct:
    measure: str
    group_by: str | None = None


@dataclass(frozen=True)
class SumD:
    measure: str


@dataclass(frozen=True)
class Min:
    measure: str
    group_by: str | None = None


@dataclass(frozen=True)
class Max:
    measure: str
    group_by: str | None = None


@dataclass(frozen=True)
class Gamma:
    dim: str
    level: str


@dataclass(frozen=True)
class Project:
    value: str
    labeling: str


@dataclass(frozen=True)
class MakeDestructor:
    # source: either the name of a Boolean measure or an inline step whose
    # result becomes the destructor without creating a new computed measure
    source: "str | TransformationStep"


@dataclass(frozen=True)
class MakeFlag:
    arity: int
    source: "str | TransformationStep"


TransformationStep = (
    Const | Sum | Prod | Quot | EqMeasure | LtMeasure | EqLevel | LtLevel
    | SelConst | SelLevel | CountDistinct | SumD | Min | Max | Gamma | Project
    | MakeDestructor | MakeFlag
)

_COMPUTED_REF = re.compile(r"t([1-9]\d*)$")


@dataclass(frozen=True)
class OpLogEntry:
    description: str
    steps: tuple[TransformationStep, ...]
    base: int = 0  # computed-measure count before the steps ran (tau numbering)


@dataclass(eq=True)
class CubeState:
    schema: CubeSchema
    protected_names: tuple[str, ...]
    protected: dict[str, list[ExactValue | None]]
    computed: list[list[ExactValue | None]]
    flag: list[int | None]
    destroyed: list[bool]
    allocator: LabelAllocator
    labeling_meta: dict[int, LabelingMeta]  # computed index (0-based) -> meta
    op_log: list[OpLogEntry]

    # -- geometry ----------------------------------------------------------

    @property
    def dims(self) -> tuple[str, ...]:
        return self.schema.dims

    @property
    def cell_count(self) -> int:
        return len(self.flag)

    def addresses(self) -> list[tuple[str, ...]]:
        return _addresses(self.schema)

    def index_of(self, address: tuple[str, ...]) -> int:
        index = 0
        for dim, member in zip(self.dims, address):
            domain = self.schema.dom(dim)
            try:
                pos = domain.index(member)
            except ValueError:
                raise UnknownNameError(f"{member!r} is not a member of {dim}") from None
            index = index * len(domain) + pos
        return index

    # -- measure access ------------------------------------------------------

    def computed_names(self) -> tuple[str, ...]:
        return tuple(f"t{i + 1}" for i in range(len(self.computed)))

    def measure_names(self) -> tuple[str, ...]:
        return self.protected_names + self.computed_names()

    def resolve(self, ref: str) -> list[ExactValue | None]:
        """Array of per-cell values for a measure reference (or the flag)."""
        if ref == FLAG_REF:
            return [None if f is None else ev_bool(bool(f)) for f in self.flag]
        if ref in self.protected:
            return self.protected[ref]
        match = _COMPUTED_REF.match(ref)
        if match:
            index = int(match.group(1)) - 1
            if index < len(self.computed):
                return self.computed[index]
        raise UnknownNameError(f"unknown measure {ref!r}")

    def meta_of(self, ref: str) -> LabelingMeta | None:
        match = _COMPUTED_REF.match(ref)
        if not match:
            return None
        return self.labeling_meta.get(int(match.group(1)) - 1)

    def value(self, ref: str, address: tuple[str, ...]) -> ExactValue | None:
        return self.resolve(ref)[self.index_of(address)]

    def flag_count(self) -> int:
        return sum(1 for f in self.flag if f)

    def destroyed_count(self) -> int:
        return sum(1 for d in self.destroyed if d)

    def live_cells(self) -> list[int]:
        return [i for i, dead in enumerate(self.destroyed) if not dead]

    def measure_info(self) -> list[dict]:
        """Introspection: every live measure with its kind and provenance."""
        info = [{"name": n, "kind": "protected"} for n in self.protected_names]
        origin = self.op_log[-1].description if self.op_log else "transformation steps"
        for index, name in enumerate(self.computed_names()):
            entry = {"name": name, "kind": "computed", "origin": origin}
            meta = self.labeling_meta.get(index)
            if meta is not None:
                entry["labeling"] = [f"{dim}.{level}" for dim, level in meta.targets]
            info.append(entry)
        return info


def _addresses(schema: CubeSchema) -> list[tuple[str, ...]]:
    cached = getattr(schema, "_address_cache", None)
    if cached is None:
        domains = [schema.dom(dim) for dim in schema.dims]
        cached = list(itertools.product(*domains))
        schema._address_cache = cached
    return cached


def init_cube(
    schema: CubeSchema,
    measure_names: tuple[str, ...] | list[str],
    facts: dict[tuple[str, ...], dict[str, Fraction]] | None = None,
    fill: Fraction = Fraction(0),
) -> CubeState:
    """Fresh cube: protected measures from facts, flag 1 everywhere.

    `facts` maps cell addresses to per-measure rational values; unmentioned
    cells take the fill value.  Unknown addresses or measure names are errors.
    """
    schema.validate()
    names = tuple(measure_names)
    if len(set(names)) != len(names):
        raise EngineError("protected measure names must be unique")
    for name in names:
        if name == FLAG_REF or _COMPUTED_REF.match(name):
            raise EngineError(f"measure name {name!r} is reserved")

    addresses = _addresses(schema)
    position = {addr: i for i, addr in enumerate(addresses)}
    cells = len(addresses)
    fill_value = ExactValue.rational(fill)
    protected: dict[str, list[ExactValue | None]] = {
        name: [fill_value] * cells for name in names
    }
    for address, values in (facts or {}).items():
        index = position.get(tuple(address))
        if index is None:
            raise UnknownNameError(f"fact cell {address!r} is not in the matrix")
        for name, raw in values.items():
            if name not in protected:
                raise UnknownNameError(f"fact references unknown measure {name!r}")
            value = raw if isinstance(raw, ExactValue) else ExactValue.rational(raw)
            if not value.is_rational():
                raise IrrationalValueError(f"fact value for {name!r} must be rational")
            protected[name][index] = value

    return CubeState(
        schema=schema,
        protected_names=names,
        protected=protected,
        computed=[],
        flag=[1] * cells,
        destroyed=[False] * cells,
        allocator=LabelAllocator(),
        labeling_meta={},
        op_log=[],
    )


# --- step application -------------------------------------------------------


def apply_step(state: CubeState, step: TransformationStep) -> CubeState:
    """Apply one atomic transformation, appending exactly one computed measure.

    Destroyed cells are skipped: they never receive new values.  MakeFlag and
    MakeDestructor are not handled here; use apply_sequence or
    finalize_operation for the operation protocol.
    """
    if isinstance(step, (MakeFlag, MakeDestructor)):
        raise EngineError("flag/destructor creation must go through apply_sequence")
    values, meta = _compute_step(state, step)
    new_meta = dict(state.labeling_meta)
    allocator = state.allocator
    if meta is not None:
        allocator, meta_obj = meta
        if meta_obj is not None:
            new_meta[len(state.computed)] = meta_obj
    return replace(
        state,
        computed=state.computed + [values],
        allocator=allocator,
        labeling_meta=new_meta,
    )


def _cellwise(state, ref_a, ref_b, op) -> list[ExactValue | None]:
    a = state.resolve(ref_a)
    b = state.resolve(ref_b)
    dead = state.destroyed
    return [None if dead[i] else op(a[i], b[i]) for i in range(len(a))]


def _member_broadcast(state: CubeState, dim: str, per_member) -> list[ExactValue | None]:
    """Expand a per-bottom-member value map along all other dimensions."""
    axis = state.dims.index(dim)
    out: list[ExactValue | None] = [None] * state.cell_count
    dead = state.destroyed
    for i, addr in enumerate(state.addresses()):
        if not dead[i]:
            out[i] = per_member[addr[axis]]
    return out


def _require_rational(ref: str, value: ExactValue) -> Fraction:
    if not value.is_rational():
        raise IrrationalValueError(f"measure {ref!r} must be rational, found {value}")
    return value.as_rational()


def _group_labels(state: CubeState, ref: str) -> list[ExactValue | None]:
    if state.meta_of(ref) is None:
        raise EngineError(f"measure {ref!r} carries no labeling metadata")
    return state.resolve(ref)


def _compute_step(state, step):
    """Return (values, allocator_update) where allocator_update is None or
    (new_allocator, LabelingMeta|None)."""
    dead = state.destroyed
    cells = state.cell_count

    match step:
        case Const(value):
            ev = ExactValue.rational(value)
            return [None if dead[i] else ev for i in range(cells)], None

        case Sum(a, b):
            return _cellwise(state, a, b, lambda x, y: x + y), None

        case Prod(a, b):
            values = _cellwise(state, a, b, lambda x, y: x * y)
            meta_a, meta_b = state.meta_of(a), state.meta_of(b)
            if meta_a is not None and meta_b is not None:
                return values, (state.allocator, meta_a.product(meta_b))
            return values, None

        case Quot(a, b):
            return _cellwise(state, a, b, lambda x, y: x.quot(y)), None

        case EqMeasure(a, b):
            return _cellwise(state, a, b, lambda x, y: ev_bool(x == y)), None

        case LtMeasure(a, b):
            def lt(x, y, _a=a, _b=b):
                return ev_bool(_require_rational(_a, x) < _require_rational(_b, y))
            return _cellwise(state, a, b, lt), None

        case EqLevel(dim, level, member) | SelConst(dim, level, member):
            graph = state.schema.graph(dim)
            if member not in graph.members(level):
                raise UnknownNameError(f"{member!r} is not a member of {dim}.{level}")
            table = {
                a: ev_bool(graph.rolls_up(a, level) == member)
                for a in graph.bottom_domain
            }
            return _member_broadcast(state, dim, table), None

        case LtLevel(dim, level, member, side):
            graph = state.schema.graph(dim)
            if member not in graph.members(level):
                raise UnknownNameError(f"{member!r} is not a member of {dim}.{level}")
            table = {}
            for a in graph.bottom_domain:
                b = graph.rolls_up(a, level)
                if b is None:
                    table[a] = EV_ZERO
                elif side == "below":
                    table[a] = ev_bool(graph.induced_compare(level, b, member) < 0)
                else:
                    table[a] = ev_bool(graph.induced_compare(level, member, b) < 0)
            return _member_broadcast(state, dim, table), None

        case SelLevel(dim, level):
            graph = state.schema.graph(dim)
            reps = {graph.representative(b) for b in graph.members(level)}
            table = {a: ev_bool(a in reps) for a in graph.bottom_domain}
            return _member_broadcast(state, dim, table), None

        case CountDistinct(measure, None):
            source = state.resolve(measure)
            distinct = {source[i] for i in range(cells) if not dead[i]}
            ev = ExactValue.rational(len(distinct))
            return [None if dead[i] else ev for i in range(cells)], None

        case CountDistinct(measure, group_by):
            labels = _group_labels(state, group_by)
            source = state.resolve(measure)
            groups: dict[ExactValue, set[ExactValue]] = {}
            for i in range(cells):
                if not dead[i]:
                    groups.setdefault(labels[i], set()).add(source[i])
            counts = {lab: ExactValue.rational(len(vs)) for lab, vs in groups.items()}
            return [None if dead[i] else counts[labels[i]] for i in range(cells)], None

        case SumD(measure):
            source = state.resolve(measure)
            total = EV_ZERO
            for i in range(cells):
                if not dead[i]:
                    total = total + source[i]
            return [None if dead[i] else total for i in range(cells)], None

        case Min(measure, group_by) | Max(measure, group_by):
            source = state.resolve(measure)
            pick = min if isinstance(step, Min) else max
            if group_by is None:
                best = pick(
                    (_require_rational(measure, source[i]) for i in range(cells) if not dead[i]),
                    default=None,
                )
                if best is None:
                    raise EngineError("min/max over a fully destroyed cube")
                ev = ExactValue.rational(best)
                return [None if dead[i] else ev for i in range(cells)], None
            labels = _group_labels(state, group_by)
            extremes: dict[ExactValue, Fraction] = {}
            for i in range(cells):
                if dead[i]:
                    continue
                v = _require_rational(measure, source[i])
                lab = labels[i]
                extremes[lab] = v if lab not in extremes else pick(extremes[lab], v)
            evs = {lab: ExactValue.rational(v) for lab, v in extremes.items()}
            return [None if dead[i] else evs[labels[i]] for i in range(cells)], None

        case Gamma(dim, level):
            graph = state.schema.graph(dim)
            members = graph.induced_members(level)
            labels, allocator = state.allocator.allocate(len(members))
            label_of = dict(zip(members, labels))
            table = {}
            for a in graph.bottom_domain:
                b = graph.rolls_up(a, level)
                table[a] = label_of[b] if b is not None else EV_ZERO
            meta = LabelingMeta.for_labels(dim, level, labels)
            return _member_broadcast(state, dim, table), (allocator, meta)

        case Project(value_ref, labeling_ref):
            meta = state.meta_of(labeling_ref)
            if meta is None:
                raise EngineError(f"measure {labeling_ref!r} carries no labeling metadata")
            source = state.resolve(value_ref)
            labels = state.resolve(labeling_ref)
            out: list[ExactValue | None] = [None] * cells
            cache: dict[ExactValue, dict[ExactValue, ExactValue]] = {}
            for i in range(cells):
                if dead[i]:
                    continue
                label = labels[i]
                if label.is_zero():
                    out[i] = EV_ZERO  # cell belongs to no group
                    continue
                per_label = cache.setdefault(source[i], {})
                hit = per_label.get(label)
                if hit is None:
                    hit = source[i].project(label.label_key(), meta.prime_product)
                    per_label[label] = hit
                out[i] = hit
            return out, None

    raise EngineError(f"unsupported transformation step {step!r}")


def _boolean_values(state: CubeState, source, role: str) -> list[int | None]:
    """0/1 per live cell from a measure name or an inline transformation."""
    if isinstance(source, str):
        values = state.resolve(source)
    else:
        values, meta = _compute_step(state, source)
        if meta is not None:
            raise EngineError(f"{role} source must not allocate labels: {source!r}")
    out: list[int | None] = [None] * state.cell_count
    for i, value in enumerate(values):
        if state.destroyed[i]:
            continue
        if value is None or not value.is_boolean():
            raise EngineError(f"{role} source {source!r} is not Boolean-valued: {value}")
        out[i] = 0 if value.is_zero() else 1
    return out


def finalize_operation(
    state: CubeState,
    arity: int,
    flag_src,
    destructor_src=None,
    description: str = "operation",
    steps: tuple[TransformationStep, ...] = (),
    base: int = 0,
) -> CubeState:
    """Finish an operation: destroy delta-0 cells, set the flag from its
    source, keep only the last `arity` computed measures, rename them t1..tm.
    """
    if arity < 0 or arity > len(state.computed):
        raise EngineError(
            f"flag arity {arity} out of range (have {len(state.computed)} computed measures)"
        )
    new_flag = _boolean_values(state, flag_src, "flag")
    doomed: list[int] = []
    if destructor_src is not None:
        delta = _boolean_values(state, destructor_src, "destructor")
        doomed = [i for i, v in enumerate(delta) if v == 0]

    destroyed = list(state.destroyed)
    for i in doomed:
        destroyed[i] = True
        new_flag[i] = None

    def scrub(column: list[ExactValue | None]) -> list[ExactValue | None]:
        if not doomed:
            return column
        out = list(column)
        for i in doomed:
            out[i] = None
        return out

    protected = {name: scrub(col) for name, col in state.protected.items()}
    keep_from = len(state.computed) - arity
    computed = [scrub(col) for col in state.computed[keep_from:]]
    labeling_meta = {
        index - keep_from: meta
        for index, meta in state.labeling_meta.items()
        if index >= keep_from
    }
    return replace(
        state,
        protected=protected,
        computed=computed,
        flag=new_flag,
        destroyed=destroyed,
        labeling_meta=labeling_meta,
        op_log=state.op_log + [OpLogEntry(description, tuple(steps), base)],
    )


def apply_sequence(
    state: CubeState,
    steps: list[TransformationStep] | tuple[TransformationStep, ...],
    description: str = "steps",
) -> CubeState:
    """Fold a step list; a trailing MakeFlag (optionally preceded directly by
    MakeDestructor) finalizes the operation and records it in the log."""
    steps = tuple(steps)
    base = len(state.computed)
    destructor = None
    for position, step in enumerate(steps):
        is_last = position == len(steps) - 1
        next_step = steps[position + 1] if not is_last else None
        if isinstance(step, MakeDestructor):
            if not isinstance(next_step, MakeFlag):
                raise EngineError("a destructor must immediately precede a flag")
            destructor = step.source
        elif isinstance(step, MakeFlag):
            if not is_last:
                raise EngineError("the flag must terminate the sequence")
            state = finalize_operation(
                state, step.arity, step.source, destructor,
                description=description, steps=steps, base=base,
            )
        else:
            state = apply_step(state, step)
    return state
