"""Dimension schemas, dimension graphs, and the matrix skeleton.

A dimension schema is a DAG of levels with a unique bottom level (any name)
and a unique top level named All; any bottom-to-top path is a hierarchy.  A
dimension graph instantiates the schema with members and parent edges.  All
structures are immutable after validation and safe to share; every operation
here is a pure read.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GraphValidationError, UnknownNameError

ALL_LEVEL = "All"
ALL_MEMBER = "all"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class MatrixSchema:
    """Ordered sequence of dimension names."""

    dims: tuple[str, ...]

    def __post_init__(self):
        if len(self.dims) < 1:
            raise ValueError("a matrix schema needs at least one dimension")
        if len(set(self.dims)) != len(self.dims):
            raise ValueError("dimension names must be unique")


@dataclass(frozen=True)
class DimensionSchema:
    """Level DAG of one dimension; edges point from finer to coarser levels."""

    name: str
    levels: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    def sources(self) -> list[str]:
        with_incoming = {b for _, b in self.edges}
        return [lv for lv in self.levels if lv not in with_incoming]

    def sinks(self) -> list[str]:
        with_outgoing = {a for a, _ in self.edges}
        return [lv for lv in self.levels if lv not in with_outgoing]

    @property
    def bottom(self) -> str:
        sources = self.sources()
        if len(sources) != 1:
            raise GraphValidationError(
                f"dimension {self.name}: no unique bottom level (sources: {sources})"
            )
        return sources[0]

    def children(self, level: str) -> list[str]:
        return [a for a, b in self.edges if b == level]

    def parents(self, level: str) -> list[str]:
        return [b for a, b in self.edges if a == level]

    def hierarchies(self) -> list[tuple[str, ...]]:
        """All bottom-to-All paths, i.e. every hierarchy of the schema."""
        bottom = self.bottom
        paths: list[tuple[str, ...]] = []

        def walk(level: str, path: list[str]):
            if level == ALL_LEVEL:
                paths.append(tuple(path))
                return
            for parent in self.parents(level):
                walk(parent, path + [parent])

        walk(bottom, [bottom])
        return paths


def _toposort(levels: tuple[str, ...], edges) -> list[str] | None:
    """Topological order of the level DAG, or None if it has a cycle."""
    indeg = {lv: 0 for lv in levels}
    for _, b in edges:
        indeg[b] += 1
    queue = [lv for lv in levels if indeg[lv] == 0]
    order = []
    while queue:
        node = queue.pop()
        order.append(node)
        for a, b in edges:
            if a == node:
                indeg[b] -= 1
                if indeg[b] == 0:
                    queue.append(b)
    return order if len(order) == len(levels) else None


def validate_schema(schema: DimensionSchema) -> ValidationReport:
    """Check the level-DAG invariants; lattice defects are warnings only."""
    violations: list[str] = []
    warnings: list[str] = []

    if len(schema.levels) < 2:
        violations.append(f"dimension {schema.name}: needs at least Bottom and All")
    if len(set(schema.levels)) != len(schema.levels):
        violations.append(f"dimension {schema.name}: duplicate level names")
    known = set(schema.levels)
    for a, b in schema.edges:
        if a not in known or b not in known:
            violations.append(f"dimension {schema.name}: edge {a}->{b} names unknown level")
        if a == b:
            violations.append(f"dimension {schema.name}: self-loop at {a}")
    if violations:
        return ValidationReport(tuple(violations), tuple(warnings))

    order = _toposort(schema.levels, schema.edges)
    if order is None:
        violations.append(f"dimension {schema.name}: level graph has a cycle")
        return ValidationReport(tuple(violations), tuple(warnings))

    sinks = schema.sinks()
    if len(sinks) != 1:
        violations.append(f"dimension {schema.name}: non-unique All (top nodes: {sorted(sinks)})")
    elif sinks[0] != ALL_LEVEL:
        violations.append(f"dimension {schema.name}: top level must be named {ALL_LEVEL}, got {sinks[0]}")
    sources = schema.sources()
    if len(sources) != 1:
        violations.append(f"dimension {schema.name}: non-unique Bottom (bottom nodes: {sorted(sources)})")
    elif sources[0] == ALL_LEVEL:
        violations.append(f"dimension {schema.name}: Bottom and All coincide")

    if not violations:
        # The paper calls the schema a lattice but never uses joins/meets;
        # non-unique ones are therefore only worth a warning.
        reach = _level_reachability(schema)
        for i, x in enumerate(schema.levels):
            for y in schema.levels[i + 1:]:
                ups = [z for z in schema.levels if z in reach[x] and z in reach[y]]
                minimal_ups = [z for z in ups if not any(z2 != z and z in reach[z2] for z2 in ups)]
                if len(minimal_ups) != 1:
                    warnings.append(
                        f"dimension {schema.name}: levels {x},{y} have no unique join"
                    )
    return ValidationReport(tuple(violations), tuple(warnings))


def _level_reachability(schema: DimensionSchema) -> dict[str, set[str]]:
    reach: dict[str, set[str]] = {lv: {lv} for lv in schema.levels}
    changed = True
    while changed:
        changed = False
        for a, b in schema.edges:
            before = len(reach[a])
            reach[a] |= reach[b]
            changed = changed or len(reach[a]) != before
    return reach


class DimensionGraph:
    """Instance of a dimension schema: members per level plus parent edges.

    The bottom domain tuple doubles as the total order assumed on the
    dimension; everything order-related (representatives, induced orders)
    derives from member positions in it.
    """

    def __init__(
        self,
        schema: DimensionSchema,
        level_domains: dict[str, tuple[str, ...]],
        edges: set[tuple[str, str]] | tuple[tuple[str, str], ...],
    ):
        self.schema = schema
        self.level_domains = {lv: tuple(ms) for lv, ms in level_domains.items()}
        self.edges = frozenset(tuple(e) for e in edges)
        self._member_level: dict[str, str] | None = None
        self._parents: dict[str, tuple[str, ...]] | None = None
        self._targets: dict[str, dict[str, str | None]] = {}
        self._rep: dict[str, str] | None = None
        self._bottom_pos: dict[str, int] | None = None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DimensionGraph):
            return NotImplemented
        return (
            self.schema == other.schema
            and self.level_domains == other.level_domains
            and self.edges == other.edges
        )

    def __repr__(self) -> str:
        return f"DimensionGraph({self.name!r}, {len(self.member_level())} members)"

    # -- raw structure ------------------------------------------------------

    @property
    def name(self) -> str:
        return self.schema.name

    @property
    def bottom_level(self) -> str:
        return self.schema.bottom

    @property
    def bottom_domain(self) -> tuple[str, ...]:
        return self.level_domains[self.bottom_level]

    def member_level(self) -> dict[str, str]:
        if self._member_level is None:
            table: dict[str, str] = {}
            for level, members in self.level_domains.items():
                for m in members:
                    table[m] = level
            self._member_level = table
        return self._member_level

    def level_of(self, member: str) -> str:
        try:
            return self.member_level()[member]
        except KeyError:
            raise UnknownNameError(f"unknown member {member!r} in dimension {self.name}") from None

    def members(self, level: str) -> tuple[str, ...]:
        try:
            return self.level_domains[level]
        except KeyError:
            raise UnknownNameError(f"unknown level {level!r} in dimension {self.name}") from None

    def parents_of(self, member: str) -> tuple[str, ...]:
        if self._parents is None:
            table: dict[str, list[str]] = {}
            for child, parent in self.edges:
                table.setdefault(child, []).append(parent)
            self._parents = {m: tuple(sorted(ps)) for m, ps in table.items()}
        return self._parents.get(member, ())

    def _reachable_from(self, member: str) -> set[str]:
        seen = {member}
        frontier = [member]
        while frontier:
            node = frontier.pop()
            for parent in self.parents_of(node):
                if parent not in seen:
                    seen.add(parent)
                    frontier.append(parent)
        return seen

    # -- the roll-up relation and representatives ---------------------------

    def rolls_up(self, member: str, level: str) -> str | None:
        """Unique target of a bottom member at the given level, or None.

        Sound graphs make the answer hierarchy-independent; bottom members
        roll up to themselves at the bottom level.
        """
        if level not in self.level_domains:
            raise UnknownNameError(f"unknown level {level!r} in dimension {self.name}")
        if member not in self.bottom_domain:
            raise UnknownNameError(
                f"{member!r} is not a bottom member of dimension {self.name}"
            )
        if level not in self._targets:
            level_members = set(self.level_domains[level])
            table: dict[str, str | None] = {}
            for a in self.bottom_domain:
                hits = self._reachable_from(a) & level_members
                table[a] = next(iter(hits)) if hits else None
            self._targets[level] = table
        return self._targets[level][member]

    def bottom_position(self, member: str) -> int:
        if self._bottom_pos is None:
            self._bottom_pos = {m: i for i, m in enumerate(self.bottom_domain)}
        return self._bottom_pos[member]

    def representative(self, member: str) -> str:
        """Smallest bottom member (in domain order) that rolls up to `member`."""
        if self._rep is None:
            rep: dict[str, str] = {}
            for a in self.bottom_domain:
                for reached in self._reachable_from(a):
                    rep.setdefault(reached, a)
            self._rep = rep
        level = self.level_of(member)  # raises on unknown member
        try:
            return self._rep[member]
        except KeyError:
            raise GraphValidationError(
                f"member {member!r} at level {level} is unreachable from the bottom domain"
            ) from None

    def induced_members(self, level: str) -> tuple[str, ...]:
        """Members of a level sorted by the order induced by representatives."""
        members = self.members(level)
        return tuple(sorted(members, key=lambda b: self.bottom_position(self.representative(b))))

    def induced_compare(self, level: str, b1: str, b2: str) -> int:
        """-1, 0, or 1 comparing two members of `level` via their representatives."""
        for b in (b1, b2):
            if self.level_of(b) != level:
                raise UnknownNameError(f"{b!r} is not a member of level {level} in {self.name}")
        p1 = self.bottom_position(self.representative(b1))
        p2 = self.bottom_position(self.representative(b2))
        return (p1 > p2) - (p1 < p2)

    def ensure_valid(self):
        report = validate_graph(self)
        if not report.ok:
            raise GraphValidationError(
                f"dimension {self.name} is invalid: " + "; ".join(report.violations)
            )


def validate_graph(graph: DimensionGraph) -> ValidationReport:
    """Check instance invariants: edge typing, trees per hierarchy, soundness,
    reachability of every member from the bottom domain."""
    schema_report = validate_schema(graph.schema)
    if not schema_report.ok:
        return schema_report
    violations: list[str] = []
    name = graph.name

    missing = [lv for lv in graph.schema.levels if not graph.level_domains.get(lv)]
    if missing:
        violations.append(f"dimension {name}: empty level instance(s) {missing}")
        return ValidationReport(tuple(violations))
    extra = [lv for lv in graph.level_domains if lv not in graph.schema.levels]
    if extra:
        violations.append(f"dimension {name}: instance levels {extra} not in schema")
        return ValidationReport(tuple(violations))

    if graph.level_domains[ALL_LEVEL] != (ALL_MEMBER,):
        violations.append(f"dimension {name}: dom(All) must be exactly ('{ALL_MEMBER}',)")

    seen: dict[str, str] = {}
    for level, members in graph.level_domains.items():
        for m in members:
            if m in seen:
                violations.append(
                    f"dimension {name}: member {m!r} appears at levels {seen[m]} and {level}"
                )
            seen[m] = level
    if violations:
        return ValidationReport(tuple(violations))

    member_level = graph.member_level()
    schema_edges = set(graph.schema.edges)
    for child, parent in graph.edges:
        if child not in member_level or parent not in member_level:
            violations.append(f"dimension {name}: edge {child}->{parent} names unknown member")
            continue
        pair = (member_level[child], member_level[parent])
        if pair not in schema_edges:
            violations.append(
                f"dimension {name}: edge {child}->{parent} has no schema edge {pair[0]}->{pair[1]}"
            )
    if violations:
        return ValidationReport(tuple(violations))

    # Hierarchy instances must be trees: within each hierarchy, a member has
    # at most one parent at the next level up.
    for hierarchy in graph.schema.hierarchies():
        for lower, upper in zip(hierarchy, hierarchy[1:]):
            upper_members = set(graph.level_domains[upper])
            for m in graph.level_domains[lower]:
                ups = [p for p in graph.parents_of(m) if p in upper_members]
                if len(ups) > 1:
                    violations.append(
                        f"dimension {name}: not a tree, {m!r} has parents {sorted(ups)} "
                        f"at level {upper} (hierarchy {'->'.join(hierarchy)})"
                    )

    # Soundness: no bottom member may reach two distinct members of one level.
    level_order = _toposort(graph.schema.levels, graph.schema.edges) or []
    for a in graph.bottom_domain:
        reached = graph._reachable_from(a)
        for level in level_order:
            hits = sorted(reached & set(graph.level_domains[level]))
            if len(hits) > 1:
                violations.append(
                    f"dimension {name}: unsound at level {level}, {a!r} reaches {hits}"
                )
                break  # report the first divergent level per member

    # Every member must be reachable from some bottom member, so that
    # representatives exist (rep-totality).
    reachable: set[str] = set()
    for a in graph.bottom_domain:
        reachable |= graph._reachable_from(a)
    for level, members in graph.level_domains.items():
        if level == graph.bottom_level:
            continue
        for m in members:
            if m not in reachable:
                violations.append(
                    f"dimension {name}: member {m!r} at level {level} has no bottom member"
                )

    return ValidationReport(tuple(violations), schema_report.warnings)


@dataclass(frozen=True)
class Hierarchy:
    """One bottom-to-All path in a dimension schema."""

    schema: DimensionSchema
    path: tuple[str, ...]

    def __post_init__(self):
        if self.path not in set(self.schema.hierarchies()):
            raise GraphValidationError(
                f"{'->'.join(self.path)} is not a hierarchy of dimension {self.schema.name}"
            )


@dataclass
class CubeSchema:
    """Matrix schema plus one validated dimension graph per dimension."""

    matrix: MatrixSchema
    graphs: dict[str, DimensionGraph]

    def __post_init__(self):
        if set(self.graphs) != set(self.matrix.dims):
            raise GraphValidationError(
                f"graphs cover {sorted(self.graphs)} but matrix dims are {list(self.matrix.dims)}"
            )

    @property
    def dims(self) -> tuple[str, ...]:
        return self.matrix.dims

    def graph(self, dim: str) -> DimensionGraph:
        try:
            return self.graphs[dim]
        except KeyError:
            raise UnknownNameError(f"unknown dimension {dim!r}") from None

    def dom(self, dim: str) -> tuple[str, ...]:
        return self.graph(dim).bottom_domain

    def validate(self):
        for dim in self.dims:
            self.graphs[dim].ensure_valid()
