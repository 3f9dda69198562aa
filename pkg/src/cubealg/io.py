"""Cube definition documents, fact ingestion, snapshots, and views.

Cube definitions are JSON: per dimension its levels, level edges, members,
member edges, and an explicit bottom order (absence is an error; we never
invent an order from name sorting).  The All level's single member "all" and
its incoming edges are synthesized, since the paper fixes them by definition.
Fact tables are CSV with a header row: one column per dimension holding a
bottom member, one per measure holding a rational literal (`p/q` or decimal).
Rationals are serialized as exact strings, never floats.
"""

from __future__ import annotations

import csv
import io as _stdio
import json
from fractions import Fraction
from math import isqrt

from . import engine
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
from .engine import CubeState, OpLogEntry, TransformationStep
from .errors import FactError, GraphValidationError, SnapshotError, UnknownNameError
from .exactnum import ExactValue, LabelAllocator, LabelingMeta
from .model import (
    ALL_LEVEL,
    ALL_MEMBER,
    CubeSchema,
    DimensionGraph,
    DimensionSchema,
    MatrixSchema,
)

SNAPSHOT_VERSION = 1


def parse_rational(text: str) -> Fraction:
    """Exact rational from a `p/q` or decimal literal."""
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise FactError(f"malformed rational literal {text!r}") from exc


def format_rational(value: Fraction) -> str:
    return str(value)


# --- cube definition ------------------------------------------------------------


def parse_cube_definition(doc: dict) -> tuple[CubeSchema, tuple[str, ...]]:
    """Build a validated CubeSchema plus measure names from a definition doc."""
    try:
        dim_docs = doc["dimensions"]
        measure_docs = doc["measures"]
    except (KeyError, TypeError) as exc:
        raise GraphValidationError(f"cube definition lacks field {exc}") from exc
    if not dim_docs:
        raise GraphValidationError("cube definition declares no dimensions")

    graphs: dict[str, DimensionGraph] = {}
    dims: list[str] = []
    for dim_doc in dim_docs:
        graph = _parse_dimension(dim_doc)
        graphs[graph.name] = graph
        dims.append(graph.name)

    measures = tuple(m["name"] for m in measure_docs)
    if not measures:
        raise GraphValidationError("cube definition declares no measures")
    schema = CubeSchema(MatrixSchema(tuple(dims)), graphs)
    schema.validate()
    return schema, measures


def _parse_dimension(doc: dict) -> DimensionGraph:
    name = doc["name"]
    levels = tuple(lv["name"] for lv in doc["levels"])
    level_edges = tuple((a, b) for a, b in doc["levelEdges"])
    schema = DimensionSchema(name, levels, level_edges)

    if "bottomOrder" not in doc:
        raise GraphValidationError(
            f"dimension {name}: bottomOrder is required (an order is never invented)"
        )
    bottom_order = tuple(doc["bottomOrder"])

    domains: dict[str, list[str]] = {lv: [] for lv in levels}
    for member in doc.get("members", []):
        level = member["level"]
        if level not in domains:
            raise GraphValidationError(
                f"dimension {name}: member {member['name']!r} at unknown level {level!r}"
            )
        domains[level].append(member["name"])

    bottom = schema.bottom
    declared_bottom = set(domains[bottom])
    if declared_bottom and declared_bottom != set(bottom_order):
        raise GraphValidationError(
            f"dimension {name}: bottomOrder and bottom members disagree"
        )
    domains[bottom] = list(bottom_order)

    edges = {(a, b) for a, b in doc.get("memberEdges", [])}

    # dom(All) = {all} holds by definition; synthesize the member and its
    # incoming edges unless the document spelled them out.
    if ALL_LEVEL in domains:
        if domains[ALL_LEVEL] not in ([], [ALL_MEMBER]):
            raise GraphValidationError(
                f"dimension {name}: the All level holds exactly one member, '{ALL_MEMBER}'"
            )
        domains[ALL_LEVEL] = [ALL_MEMBER]
        if not any(parent == ALL_MEMBER for _, parent in edges):
            for feeder in schema.children(ALL_LEVEL):
                for member in domains[feeder]:
                    edges.add((member, ALL_MEMBER))

    graph = DimensionGraph(
        schema, {lv: tuple(ms) for lv, ms in domains.items()}, edges
    )
    graph.ensure_valid()
    return graph


def cube_definition_of(schema: CubeSchema, measures) -> dict:
    """Definition document for a schema (inverse of parse_cube_definition)."""
    dims = []
    for dim in schema.dims:
        graph = schema.graph(dim)
        members = [
            {"name": m, "level": lv}
            for lv, ms in graph.level_domains.items()
            for m in ms
            if not (lv == ALL_LEVEL and m == ALL_MEMBER)
        ]
        dims.append({
            "name": dim,
            "levels": [{"name": lv} for lv in graph.schema.levels],
            "levelEdges": [[a, b] for a, b in graph.schema.edges],
            "members": members,
            "memberEdges": sorted([a, b] for a, b in graph.edges if b != ALL_MEMBER),
            "bottomOrder": list(graph.bottom_domain),
        })
    return {"dimensions": dims, "measures": [{"name": m} for m in measures]}


# --- fact tables ------------------------------------------------------------------


def parse_fact_table(
    text: str, dims: tuple[str, ...], measures: tuple[str, ...]
) -> dict[tuple[str, ...], dict[str, Fraction]]:
    reader = csv.reader(_stdio.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise FactError("fact table is empty; a header row is mandatory") from None
    header = [h.strip() for h in header]
    expected = list(dims) + list(measures)
    if sorted(header) != sorted(expected):
        raise FactError(f"fact header {header} does not match {expected}")
    dim_cols = [header.index(d) for d in dims]
    measure_cols = [header.index(m) for m in measures]

    facts: dict[tuple[str, ...], dict[str, Fraction]] = {}
    for row_number, row in enumerate(reader, start=2):
        if not row or all(not col.strip() for col in row):
            continue
        if len(row) != len(header):
            raise FactError(f"row {row_number}: expected {len(header)} columns")
        address = tuple(row[c].strip() for c in dim_cols)
        if address in facts:
            raise FactError(f"row {row_number}: duplicate fact for cell {address}")
        facts[address] = {
            m: parse_rational(row[c]) for m, c in zip(measures, measure_cols)
        }
    return facts


def load_cube(cube_doc: dict, facts_text: str, fill: Fraction = Fraction(0)) -> CubeState:
    """Parse both documents and build the initial cube state.

    Cells without a fact row take the fill value (default 0; sums are
    unaffected, but averages and counts do see filled cells — pick the fill
    policy accordingly)."""
    schema, measures = parse_cube_definition(cube_doc)
    facts = parse_fact_table(facts_text, schema.dims, measures)
    return engine.init_cube(schema, measures, facts, fill)


def load_cube_files(cube_path, facts_path, fill: Fraction = Fraction(0)) -> CubeState:
    with open(cube_path, encoding="utf-8") as handle:
        doc = json.load(handle)
    with open(facts_path, encoding="utf-8") as handle:
        facts_text = handle.read()
    return load_cube(doc, facts_text, fill)


# --- condition / operation wire format ---------------------------------------------


def condition_to_doc(cond: CellCondition) -> dict:
    match cond:
        case LevelEq(dim, level, member):
            return {"type": "levelEq", "dim": dim, "level": level, "member": member}
        case LevelLt(dim, level, member, side):
            return {"type": "levelLt", "dim": dim, "level": level,
                    "member": member, "side": side}
        case MeasureEq(measure, value):
            return {"type": "measureEq", "measure": measure, "value": str(value)}
        case MeasureLt(measure, value, side):
            return {"type": "measureLt", "measure": measure,
                    "value": str(value), "side": side}
        case Not(child):
            return {"type": "not", "child": condition_to_doc(child)}
        case And(left, right):
            return {"type": "and", "left": condition_to_doc(left),
                    "right": condition_to_doc(right)}
        case Or(left, right):
            return {"type": "or", "left": condition_to_doc(left),
                    "right": condition_to_doc(right)}
    raise SnapshotError(f"unsupported condition {cond!r}")


def condition_from_doc(doc: dict) -> CellCondition:
    try:
        kind = doc["type"]
        if kind == "levelEq":
            return LevelEq(doc["dim"], doc["level"], doc["member"])
        if kind == "levelLt":
            return LevelLt(doc["dim"], doc["level"], doc["member"],
                           doc.get("side", "below"))
        if kind == "measureEq":
            return MeasureEq(doc["measure"], parse_rational(doc["value"]))
        if kind == "measureLt":
            return MeasureLt(doc["measure"], parse_rational(doc["value"]),
                             doc.get("side", "below"))
        if kind == "not":
            return Not(condition_from_doc(doc["child"]))
        if kind == "and":
            return And(condition_from_doc(doc["left"]), condition_from_doc(doc["right"]))
        if kind == "or":
            return Or(condition_from_doc(doc["left"]), condition_from_doc(doc["right"]))
    except (KeyError, TypeError) as exc:
        raise SnapshotError(f"malformed condition document: {exc}") from exc
    raise SnapshotError(f"unknown condition type {doc.get('type')!r}")


def op_to_doc(op: OlapOp) -> dict:
    match op:
        case Dice(cond):
            return {"type": "dice", "condition": condition_to_doc(cond)}
        case Slice(dim):
            return {"type": "slice", "dimension": dim}
        case SliceDice(dim, member):
            return {"type": "sliceDice", "dimension": dim, "member": member}
        case RollUp(dim, level, aggs):
            return {"type": "rollUp", "dimension": dim, "level": level,
                    "aggs": [{"measure": m, "fn": fn} for m, fn in aggs]}
        case DrillDown(dim, level, aggs):
            return {"type": "drillDown", "dimension": dim, "level": level,
                    "aggs": [{"measure": m, "fn": fn} for m, fn in aggs]}
    raise SnapshotError(f"unsupported operation {op!r}")


def op_from_doc(doc: dict) -> OlapOp:
    try:
        kind = doc["type"]
        if kind == "dice":
            return Dice(condition_from_doc(doc["condition"]))
        if kind == "slice":
            return Slice(doc["dimension"])
        if kind == "sliceDice":
            return SliceDice(doc["dimension"], doc["member"])
        if kind in ("rollUp", "drillDown"):
            aggs = tuple((a["measure"], a["fn"]) for a in doc["aggs"])
            cls = RollUp if kind == "rollUp" else DrillDown
            return cls(doc["dimension"], doc["level"], aggs)
    except (KeyError, TypeError) as exc:
        raise SnapshotError(f"malformed operation document: {exc}") from exc
    raise SnapshotError(f"unknown operation type {doc.get('type')!r}")


# --- transformation-step codec (for snapshots and logs) -----------------------------

_STEP_KINDS: dict[str, type] = {
    "const": engine.Const, "sum": engine.Sum, "prod": engine.Prod,
    "quot": engine.Quot, "eqMeasure": engine.EqMeasure, "ltMeasure": engine.LtMeasure,
    "eqLevel": engine.EqLevel, "ltLevel": engine.LtLevel, "selConst": engine.SelConst,
    "selLevel": engine.SelLevel, "countDistinct": engine.CountDistinct,
    "sumD": engine.SumD, "min": engine.Min, "max": engine.Max, "gamma": engine.Gamma,
    "project": engine.Project, "makeDestructor": engine.MakeDestructor,
    "makeFlag": engine.MakeFlag,
}
_KIND_OF_STEP = {cls: kind for kind, cls in _STEP_KINDS.items()}


def step_to_doc(step: TransformationStep) -> dict:
    doc = {"kind": _KIND_OF_STEP[type(step)]}
    for field in step.__dataclass_fields__:
        value = getattr(step, field)
        if isinstance(value, Fraction):
            value = str(value)
        elif type(value) in _KIND_OF_STEP:  # inline flag/destructor source
            value = step_to_doc(value)
        doc[field] = value
    return doc


def step_from_doc(doc: dict) -> TransformationStep:
    try:
        cls = _STEP_KINDS[doc["kind"]]
        kwargs = {k: v for k, v in doc.items() if k != "kind"}
        if cls is engine.Const:
            kwargs["value"] = parse_rational(kwargs["value"])
        if isinstance(kwargs.get("source"), dict):
            kwargs["source"] = step_from_doc(kwargs["source"])
        return cls(**kwargs)
    except (KeyError, TypeError) as exc:
        raise SnapshotError(f"malformed step document: {exc}") from exc


# --- snapshots -----------------------------------------------------------------------


def _column_to_doc(column) -> list[str | None]:
    return [None if v is None else v.render() for v in column]


def _column_from_doc(column) -> list[ExactValue | None]:
    return [None if v is None else ExactValue.parse(v) for v in column]


def snapshot(state: CubeState) -> dict:
    """Lossless snapshot document; restore() inverts it bit-exactly."""
    meta_docs = {}
    for index, meta in state.labeling_meta.items():
        meta_docs[str(index)] = {
            "primes": sorted(meta.prime_set),
            "targets": [list(t) for t in meta.targets],
            "labels": None if meta.labels is None else [l.render() for l in meta.labels],
        }
    return {
        "version": SNAPSHOT_VERSION,
        "cube": cube_definition_of(state.schema, state.protected_names),
        "protected": {n: _column_to_doc(state.protected[n]) for n in state.protected_names},
        "computed": [_column_to_doc(col) for col in state.computed],
        "flag": list(state.flag),
        "destroyed": list(state.destroyed),
        "allocator": {
            "nextPrimeIndex": state.allocator.next_prime_index,
            "firstLabelIssued": state.allocator.first_label_issued,
        },
        "labelingMeta": meta_docs,
        "opLog": [
            {"description": entry.description,
             "steps": [step_to_doc(s) for s in entry.steps],
             "base": entry.base}
            for entry in state.op_log
        ],
    }


def restore(doc: dict) -> CubeState:
    try:
        if doc.get("version") != SNAPSHOT_VERSION:
            raise SnapshotError(f"unsupported snapshot version {doc.get('version')!r}")
        schema, measures = parse_cube_definition(doc["cube"])
        meta = {}
        for index, meta_doc in doc["labelingMeta"].items():
            labels = meta_doc["labels"]
            meta[int(index)] = LabelingMeta(
                frozenset(meta_doc["primes"]),
                tuple(tuple(t) for t in meta_doc["targets"]),
                None if labels is None else tuple(ExactValue.parse(l) for l in labels),
            )
        return CubeState(
            schema=schema,
            protected_names=measures,
            protected={n: _column_from_doc(doc["protected"][n]) for n in measures},
            computed=[_column_from_doc(col) for col in doc["computed"]],
            flag=list(doc["flag"]),
            destroyed=list(doc["destroyed"]),
            allocator=LabelAllocator(
                doc["allocator"]["nextPrimeIndex"],
                doc["allocator"]["firstLabelIssued"],
            ),
            labeling_meta=meta,
            op_log=[
                OpLogEntry(
                    e["description"],
                    tuple(step_from_doc(s) for s in e["steps"]),
                    e.get("base", 0),
                )
                for e in doc["opLog"]
            ],
        )
    except SnapshotError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotError(f"corrupt snapshot document: {exc}") from exc


def save_snapshot(state: CubeState, path):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(snapshot(state), handle, indent=1)


def load_snapshot(path) -> CubeState:
    try:
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
    except json.JSONDecodeError as exc:
        raise SnapshotError(f"snapshot is not valid JSON: {exc}") from exc
    return restore(doc)


# --- views ------------------------------------------------------------------------


def approx_decimal(value: ExactValue, digits: int) -> str:
    """Decimal approximation via integer square roots (display only; the
    engine itself never evaluates radicals)."""
    scale = 10 ** (digits + 4)
    total = Fraction(0)
    for key, coef in value.terms.items():
        total += coef * Fraction(isqrt(key * scale * scale), scale)
    shifted = round(total * 10**digits)
    if digits == 0:
        return str(shifted)
    sign = "-" if shifted < 0 else ""
    magnitude = abs(shifted)
    return f"{sign}{magnitude // 10**digits}.{magnitude % 10**digits:0{digits}d}"


def export_view(
    state: CubeState,
    row_dim: str,
    col_dim: str,
    fixed: dict[str, str],
    measure: str,
    approx: int | None = None,
) -> dict:
    """Two-dimensional grid of one measure with the other dimensions fixed.

    Destroyed cells render as null; flag-0 cells keep their value but are
    marked inactive."""
    if row_dim == col_dim:
        raise UnknownNameError("row and column dimensions must differ")
    for dim in (row_dim, col_dim):
        if dim not in state.dims:
            raise UnknownNameError(f"unknown dimension {dim!r}")
    remaining = [d for d in state.dims if d not in (row_dim, col_dim)]
    if sorted(fixed) != sorted(remaining):
        raise UnknownNameError(f"fixed members must cover exactly {remaining}")
    for dim, member in fixed.items():
        if member not in state.schema.dom(dim):
            raise UnknownNameError(f"{member!r} is not a member of {dim}")
    values = state.resolve(measure)

    rows = state.schema.dom(row_dim)
    cols = state.schema.dom(col_dim)
    grid = []
    for row_member in rows:
        line = []
        for col_member in cols:
            address = tuple(
                row_member if d == row_dim else col_member if d == col_dim else fixed[d]
                for d in state.dims
            )
            index = state.index_of(address)
            if state.destroyed[index]:
                line.append(None)
            else:
                value = values[index]
                cell = {"value": value.render(), "flag": state.flag[index]}
                if approx is not None:
                    cell["approx"] = approx_decimal(value, approx)
                line.append(cell)
        grid.append(line)
    return {
        "rowDim": row_dim,
        "colDim": col_dim,
        "measure": measure,
        "fixed": dict(fixed),
        "rows": list(rows),
        "cols": list(cols),
        "cells": grid,
    }
