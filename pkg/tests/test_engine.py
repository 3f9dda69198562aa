from fractions import Fraction

import pytest

from cubealg.engine import (
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
    apply_sequence,
    apply_step,
    finalize_operation,
    init_cube,
)
from cubealg.errors import EngineError, IrrationalValueError, UnknownNameError
from cubealg.exactnum import EV_ONE, EV_ZERO, ExactValue

from conftest import location_dimension, make_cube, simple_dimension

EV = ExactValue


def small_sales_cube(values):
    """1-D cube over the four cities with the given sales values."""
    return make_cube(
        (location_dimension(),),
        values=lambda addr, m: values[addr[0]],
    )


def test_init_cube_sets_flag_everywhere(tiny_cube):
    assert tiny_cube.flag_count() == tiny_cube.cell_count == 16
    assert tiny_cube.destroyed_count() == 0
    assert tiny_cube.computed == []
    assert tiny_cube.op_log == []


def test_init_cube_minimal():
    cube = make_cube((simple_dimension("D", "Bottom", ("x",)),), values=lambda a, m: 0)
    assert cube.cell_count == 1
    assert cube.value("sales", ("x",)) == EV_ZERO


def test_init_cube_rejects_unknown_member():
    dim = simple_dimension("D", "Bottom", ("x",))
    with pytest.raises(UnknownNameError):
        make_cube((dim,), values=lambda a, m: 0).index_of(("y",))
    schema = make_cube((dim,)).schema
    with pytest.raises(UnknownNameError):
        init_cube(schema, ("sales",), {("y",): {"sales": Fraction(1)}})


# --- the dice of Example 9, cell by cell ------------------------------------


def test_boundary_dice_steps():
    cube = small_sales_cube(
        {"antwerp": 60, "brussels": 12, "paris": 50, "marseille": 49}
    )
    state = apply_step(cube, Const(Fraction("49.99")))
    state = apply_step(state, LtMeasure("t1", "sales"))
    state = apply_step(state, Prod("sales", "t2"))
    assert state.value("t1", ("antwerp",)) == EV.rational(Fraction(4999, 100))
    assert state.value("t2", ("antwerp",)) == EV_ONE
    assert state.value("t3", ("antwerp",)) == EV.rational(60)
    assert state.value("t2", ("paris",)) == EV_ONE  # 49.99 < 50
    assert state.value("t2", ("marseille",)) == EV_ZERO
    assert state.value("t3", ("marseille",)) == EV_ZERO

    done = finalize_operation(state, 1, "t2", "t2")
    assert done.destroyed_count() == 2  # brussels (12) and marseille (49)
    assert done.value("sales", ("antwerp",)) == EV.rational(60)
    assert done.value("t1", ("antwerp",)) == EV.rational(60)  # renamed product
    assert done.value("t1", ("paris",)) == EV.rational(50)
    assert done.value("sales", ("marseille",)) is None
    assert done.value("sales", ("brussels",)) is None
    assert done.flag[done.index_of(("marseille",))] is None
    assert done.computed_names() == ("t1",)


def test_total_sales_in_one_city():
    cube = small_sales_cube(
        {"antwerp": 10, "brussels": 20, "paris": 30, "marseille": 40}
    )
    steps = [
        SelConst("Location", "City", "antwerp"),
        Prod("t1", "sales"),
        SumD("t2"),
        Prod("t3", "t1"),
        MakeFlag(1, "t1"),
    ]
    state = apply_sequence(cube, steps, "total sales in antwerp")
    assert state.value("t1", ("antwerp",)) == EV.rational(10)
    assert state.value("t1", ("paris",)) == EV_ZERO
    assert state.flag[state.index_of(("antwerp",))] == 1
    assert state.flag[state.index_of(("paris",))] == 0
    assert state.destroyed_count() == 0
    # protected measure is untouched
    assert state.value("sales", ("paris",)) == EV.rational(30)


# --- step semantics ------------------------------------------------------------


def test_quot_convention(tiny_cube):
    state = apply_step(tiny_cube, Const(Fraction(0)))
    state = apply_step(state, Quot("sales", "t1"))
    addr = ("p1", "antwerp", "d1")
    assert state.value("t2", addr) == state.value("sales", addr)


def test_eq_and_lt_measures(tiny_cube):
    state = apply_step(tiny_cube, Const(Fraction(11)))
    state = apply_step(state, EqMeasure("sales", "t1"))
    state = apply_step(state, LtMeasure("sales", "t1"))
    assert state.value("t2", ("p1", "antwerp", "d1")) == EV_ONE  # sales = 11
    assert state.value("t3", ("p1", "antwerp", "d1")) == EV_ZERO


def test_lt_measure_rejects_irrational(tiny_cube):
    state = apply_step(tiny_cube, Gamma("Location", "Country"))
    with pytest.raises(IrrationalValueError):
        apply_step(state, LtMeasure("t1", "sales"))


def test_level_tests(tiny_cube):
    state = apply_step(tiny_cube, EqLevel("Location", "Country", "france"))
    assert state.value("t1", ("p1", "paris", "d1")) == EV_ONE
    assert state.value("t1", ("p1", "antwerp", "d1")) == EV_ZERO
    state = apply_step(state, LtLevel("Location", "Region", "north", "below"))
    # regions below north in induced order: flanders, capital
    assert state.value("t2", ("p1", "antwerp", "d1")) == EV_ONE
    assert state.value("t2", ("p1", "paris", "d1")) == EV_ZERO
    state = apply_step(state, LtLevel("Location", "Region", "north", "above"))
    assert state.value("t3", ("p1", "marseille", "d1")) == EV_ONE
    assert state.value("t3", ("p1", "paris", "d1")) == EV_ZERO


def test_sel_level_flags_representatives(tiny_cube):
    state = apply_step(tiny_cube, SelLevel("Location", "Country"))
    assert state.value("t1", ("p1", "antwerp", "d2")) == EV_ONE
    assert state.value("t1", ("p1", "paris", "d1")) == EV_ONE
    assert state.value("t1", ("p1", "brussels", "d1")) == EV_ZERO


def test_flag_is_referencable(tiny_cube):
    state = apply_step(tiny_cube, Prod("sales", "phi"))
    addr = ("p2", "paris", "d2")
    assert state.value("t1", addr) == state.value("sales", addr)


def test_gamma_labels_in_induced_order(tiny_cube):
    state = apply_step(tiny_cube, Gamma("Location", "Country"))
    state = apply_step(state, Gamma("Location", "City"))
    assert state.value("t1", ("p1", "brussels", "d1")) == EV_ONE        # belgium
    assert state.value("t1", ("p1", "marseille", "d1")) == EV.sqrt_of(2)  # france
    labels = [
        state.value("t2", ("p1", city, "d1"))
        for city in ("antwerp", "brussels", "paris", "marseille")
    ]
    assert labels == [EV.sqrt_of(3), EV.sqrt_of(5), EV.sqrt_of(7), EV.sqrt_of(11)]
    meta = state.labeling_meta[1]
    assert meta.targets == (("Location", "City"),)
    assert meta.prime_set == {3, 5, 7, 11}


def test_gamma_without_target_gets_zero_label():
    schema = simple_dimension("D", "City", ("a", "b")).schema
    from cubealg.model import DimensionGraph, DimensionSchema

    three = DimensionSchema(
        "D", ("City", "Region", "All"), (("City", "Region"), ("Region", "All"))
    )
    graph = DimensionGraph(
        three,
        {"City": ("a", "b"), "Region": ("r",), "All": ("all",)},
        {("a", "r"), ("r", "all")},
    )
    graph.ensure_valid()
    cube = make_cube((graph,), values=lambda addr, m: 1)
    state = apply_step(cube, Gamma("D", "Region"))
    assert state.value("t1", ("a",)) == EV_ONE
    assert state.value("t1", ("b",)) == EV_ZERO


def test_count_distinct_and_sum_are_constant(tiny_cube):
    state = apply_step(tiny_cube, CountDistinct("sales"))
    values = {v for v in state.resolve("t1")}
    assert len(values) == 1
    state = apply_step(state, SumD("sales"))
    total = sum(
        (v.as_rational() for v in tiny_cube.resolve("sales")), Fraction(0)
    )
    assert state.value("t2", ("p1", "antwerp", "d1")) == EV.rational(total)


def test_min_max_global_and_grouped(tiny_cube):
    state = apply_step(tiny_cube, Min("sales"))
    state = apply_step(state, Max("sales"))
    assert state.value("t1", ("p1", "antwerp", "d1")) == EV.rational(11)
    assert state.value("t2", ("p1", "antwerp", "d1")) == EV.rational(47)
    state = apply_step(state, Gamma("Location", "Country"))
    state = apply_step(state, Min("sales", group_by="t3"))
    # belgium group: cities antwerp/brussels -> min over 8 cells = 11
    assert state.value("t4", ("p2", "brussels", "d2")) == EV.rational(11)
    # france group: paris/marseille -> min = 31
    assert state.value("t4", ("p1", "paris", "d1")) == EV.rational(31)


def test_grouped_count_distinct(tiny_cube):
    state = apply_step(tiny_cube, Gamma("Location", "Country"))
    state = apply_step(state, CountDistinct("sales", group_by="t1"))
    assert state.value("t2", ("p1", "antwerp", "d1")) == EV.rational(8)


def test_group_by_requires_labeling(tiny_cube):
    state = apply_step(tiny_cube, Const(Fraction(1)))
    with pytest.raises(EngineError):
        apply_step(state, Min("sales", group_by="t1"))
    with pytest.raises(EngineError):
        apply_step(state, Project("sales", "t1"))


def test_labeling_survives_product(tiny_cube):
    state = apply_step(tiny_cube, Gamma("Location", "Country"))
    state = apply_step(state, Gamma("Product", "Item"))
    state = apply_step(state, Prod("t1", "t2"))
    meta = state.labeling_meta[2]
    assert meta.targets == (("Location", "Country"), ("Product", "Item"))
    state = apply_step(state, Prod("t3", "sales"))
    assert 3 not in state.labeling_meta  # label times value is not a labeling


def test_projection_roundtrip_small(tiny_cube):
    steps = [
        Gamma("Location", "City"),
        Gamma("Product", "Item"),
        Gamma("Time", "Day"),
        Prod("t1", "t2"),
        Prod("t4", "t3"),
        Prod("sales", "t5"),
        SumD("t6"),
        Project("t7", "t5"),
    ]
    state = tiny_cube
    for step in steps:
        state = apply_step(state, step)
    for i, addr in enumerate(state.addresses()):
        assert state.computed[7][i] == state.protected["sales"][i], addr


# --- finalize / destruction -----------------------------------------------------


def test_finalize_requires_boolean_sources(tiny_cube):
    state = apply_step(tiny_cube, Const(Fraction(2)))
    with pytest.raises(EngineError):
        finalize_operation(state, 0, "t1")
    with pytest.raises(EngineError):
        finalize_operation(state, 0, "phi", "t1")


def test_finalize_arity_bounds(tiny_cube):
    with pytest.raises(EngineError):
        finalize_operation(tiny_cube, 1, "phi")


def test_finalize_trims_and_renames(tiny_cube):
    state = tiny_cube
    for value in (1, 2, 3):
        state = apply_step(state, Const(Fraction(value)))
    done = finalize_operation(state, 2, "phi")
    assert done.computed_names() == ("t1", "t2")
    assert done.value("t1", ("p1", "antwerp", "d1")) == EV.rational(2)
    assert done.value("t2", ("p1", "antwerp", "d1")) == EV.rational(3)
    assert done.op_log[-1].description == "operation"


def test_finalize_reindexes_labeling_meta(tiny_cube):
    state = apply_step(tiny_cube, Const(Fraction(1)))
    state = apply_step(state, Gamma("Location", "Country"))
    done = finalize_operation(state, 1, "phi")
    assert set(done.labeling_meta) == {0}
    assert done.labeling_meta[0].targets == (("Location", "Country"),)


def test_destroyed_cells_never_come_back(tiny_cube):
    state = apply_sequence(
        tiny_cube,
        [
            EqLevel("Location", "Country", "belgium"),
            MakeDestructor("t1"),
            MakeFlag(0, "t1"),
        ],
        "keep belgium",
    )
    assert state.destroyed_count() == 8
    dead = state.index_of(("p1", "paris", "d1"))
    assert state.protected["sales"][dead] is None
    assert state.flag[dead] is None

    followup = apply_step(state, Const(Fraction(5)))
    assert followup.computed[0][dead] is None
    followup = apply_step(followup, SumD("sales"))
    alive_total = sum(
        (v.as_rational() for v in state.resolve("sales") if v is not None),
        Fraction(0),
    )
    assert followup.value("t2", ("p1", "antwerp", "d1")) == EV.rational(alive_total)


def test_protected_measures_immutable_through_operations(tiny_cube):
    before = {
        addr: tiny_cube.value("sales", addr) for addr in tiny_cube.addresses()
    }
    state = apply_sequence(
        tiny_cube,
        [
            Gamma("Location", "Country"),
            Prod("sales", "t1"),
            SumD("t2"),
            Project("t3", "t1"),
            MakeFlag(1, SelLevel("Location", "Country")),
        ],
        "sum by country",
    )
    for i, addr in enumerate(state.addresses()):
        if not state.destroyed[i]:
            assert state.value("sales", addr) == before[addr]


def test_grouped_results_do_not_leak_between_groups(tiny_cube):
    def run(cube):
        state = apply_step(cube, Gamma("Location", "Country"))
        state = apply_step(state, Max("sales", group_by="t1"))
        return state.value("t2", ("p1", "paris", "d1"))

    baseline = run(tiny_cube)

    # permute values inside the belgium group only
    def swapped(addr, m):
        p, c, d = addr
        cities = ("antwerp", "brussels", "paris", "marseille")
        base = 10 * (1 + cities.index(c)) + (2 if p == "p2" else 1) + (5 if d == "d2" else 0)
        return base + (7 if c in ("antwerp", "brussels") else 0)

    permuted = make_cube(
        (
            simple_dimension("Product", "Item", ("p1", "p2")),
            location_dimension(),
            simple_dimension("Time", "Day", ("d1", "d2")),
        ),
        values=swapped,
    )
    assert run(permuted) == baseline


def test_destructor_must_precede_flag(tiny_cube):
    with pytest.raises(EngineError):
        apply_sequence(tiny_cube, [MakeDestructor("phi"), Const(Fraction(1))], "bad")
    with pytest.raises(EngineError):
        apply_sequence(tiny_cube, [MakeFlag(0, "phi"), Const(Fraction(1))], "bad")
    with pytest.raises(EngineError):
        apply_step(tiny_cube, MakeFlag(0, "phi"))


def test_empty_sequence_is_identity(tiny_cube):
    assert apply_sequence(tiny_cube, [], "noop") == tiny_cube


def test_unknown_measure_reference(tiny_cube):
    with pytest.raises(UnknownNameError):
        apply_step(tiny_cube, Sum("sales", "t9"))
    with pytest.raises(UnknownNameError):
        apply_step(tiny_cube, EqLevel("Location", "Country", "spain"))
