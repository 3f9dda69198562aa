import json
from fractions import Fraction
from pathlib import Path

import pytest

from cubealg.engine import init_cube
from cubealg.model import (
    CubeSchema,
    DimensionGraph,
    DimensionSchema,
    MatrixSchema,
)

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA = REPO_ROOT / "data"
TEST_DATA = Path(__file__).resolve().parent / "data"


def simple_dimension(name: str, bottom: str, members) -> DimensionGraph:
    """Two-level dimension: every member rolls straight up to all."""
    schema = DimensionSchema(name, (bottom, "All"), ((bottom, "All"),))
    graph = DimensionGraph(
        schema,
        {bottom: tuple(members), "All": ("all",)},
        {(m, "all") for m in members},
    )
    graph.ensure_valid()
    return graph


def location_dimension() -> DimensionGraph:
    """The four-city Location instance with regions and countries."""
    schema = DimensionSchema(
        "Location",
        ("City", "Region", "Country", "All"),
        (("City", "Region"), ("Region", "Country"), ("Country", "All")),
    )
    graph = DimensionGraph(
        schema,
        {
            "City": ("antwerp", "brussels", "paris", "marseille"),
            "Region": ("flanders", "capital", "north", "south"),
            "Country": ("belgium", "france"),
            "All": ("all",),
        },
        {
            ("antwerp", "flanders"), ("brussels", "capital"),
            ("paris", "north"), ("marseille", "south"),
            ("flanders", "belgium"), ("capital", "belgium"),
            ("north", "france"), ("south", "france"),
            ("belgium", "all"), ("france", "all"),
        },
    )
    graph.ensure_valid()
    return graph


def make_cube(dim_specs, measures=("sales",), values=None) -> "CubeState":
    """Cube from (graph, ...) specs; values maps address -> rational."""
    graphs = {g.name: g for g in dim_specs}
    schema = CubeSchema(MatrixSchema(tuple(g.name for g in dim_specs)), graphs)
    facts = {}
    if values is not None:
        import itertools

        for address in itertools.product(*(g.bottom_domain for g in dim_specs)):
            facts[address] = {m: Fraction(values(address, m)) for m in measures}
    return init_cube(schema, measures, facts)


@pytest.fixture(scope="session")
def location_graph():
    return location_dimension()


@pytest.fixture(scope="session")
def sales_cube_doc():
    with open(DATA / "sales_cube.json", encoding="utf-8") as handle:
        return json.load(handle)


@pytest.fixture(scope="session")
def sales_facts_text():
    return (DATA / "sales_facts.csv").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def running_cube(sales_cube_doc, sales_facts_text):
    from cubealg.io import load_cube

    return load_cube(sales_cube_doc, sales_facts_text)


@pytest.fixture(scope="session")
def unsound_time_doc():
    with open(TEST_DATA / "unsound_time_cube.json", encoding="utf-8") as handle:
        return json.load(handle)


@pytest.fixture()
def tiny_cube(location_graph):
    """2 products x 4 cities x 2 days with deterministic small values."""
    product = simple_dimension("Product", "Item", ("p1", "p2"))
    time = simple_dimension("Time", "Day", ("d1", "d2"))

    def value(address, measure):
        p, c, d = address
        cities = ("antwerp", "brussels", "paris", "marseille")
        return 10 * (1 + cities.index(c)) + (2 if p == "p2" else 1) + (5 if d == "d2" else 0)

    return make_cube((product, location_graph, time), values=value)
