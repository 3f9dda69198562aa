"""Acceptance suite: the package's exit criteria.

Each test prints one PASS/FAIL line with its runtime.  All equality checks
are exact (rational/radical normal form); runtime bounds are asserted where
stated.  Run with `pytest tests/test_acceptance.py -v -s`.
"""

import itertools
import json
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

from cubealg import algebra, engine, io, oracle
from cubealg.algebra import (
    Dice,
    DrillDown,
    LevelEq,
    MeasureLt,
    Or,
    RollUp,
)
from cubealg.cli import parse_statement, render_statement
from cubealg.engine import (
    Const,
    CountDistinct,
    Gamma,
    LtMeasure,
    MakeDestructor,
    MakeFlag,
    Prod,
    Project,
    Quot,
    SelConst,
    SelLevel,
    Sum,
    SumD,
    apply_sequence,
    apply_step,
)
from cubealg.errors import GraphValidationError
from cubealg.exactnum import EV_ONE, ExactValue, LabelAllocator, project_value
from cubealg.model import validate_graph
from cubealg.randgen import random_condition, random_cube, random_op, run_differential

from conftest import location_dimension, make_cube, simple_dimension

EV = ExactValue


@contextmanager
def criterion(name: str, budget: float | None = None):
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - start
        print(f"ACCEPTANCE {status}  {name}  ({elapsed:.2f}s)")
    if budget is not None:
        assert elapsed < budget, f"{name} took {elapsed:.2f}s, budget {budget}s"


# --- 1. the grouping query, end to end ------------------------------------------


def grouping_fixture():
    products = tuple(f"p{i:02d}" for i in range(1, 11))
    days = tuple(f"d{i:03d}" for i in range(1, 101))
    return make_cube(
        (
            simple_dimension("Product", "Item", products),
            location_dimension(),
            simple_dimension("Time", "Day", days),
        ),
        values=lambda addr, m: 0,
    )


def test_cities_per_country_query():
    with criterion("cities-per-country grouping query (14 steps)", budget=5.0):
        state = grouping_fixture()
        assert state.cell_count == 10 * 4 * 100

        prefix = [
            Gamma("Location", "Country"),   # t1: belgium -> 1, france -> sqrt2
            Gamma("Location", "City"),      # t2: sqrt3 sqrt5 sqrt7 sqrt11
            Prod("t1", "t2"),               # t3: product labels
            SumD("t3"),                     # t4: global sum
        ]
        for step in prefix:
            state = apply_step(state, step)

        expected_t4 = (
            EV.sqrt_of(3) + EV.sqrt_of(5) + EV.sqrt_of(14) + EV.sqrt_of(22)
        ).scale(Fraction(10 * 100))
        assert all(v == expected_t4 for v in state.resolve("t4"))

        rest = [
            Gamma("Product", "Item"),       # t5
            CountDistinct("t5"),            # t6 = 10
            Gamma("Time", "Day"),           # t7
            CountDistinct("t7"),            # t8 = 100
            Prod("t6", "t8"),               # t9 = 1000
            Quot("t4", "t9"),               # t10: normalized sum
            Project("t10", "t2"),           # t11: per-city component
            SumD("t11"),                    # t12
            Quot("t12", "t9"),              # t13
            Project("t13", "t1"),           # t14: cities per country
            MakeFlag(1, SelLevel("Location", "City")),
        ]
        state = apply_sequence(state, rest, "cities per country")

        assert state.computed_names() == ("t1",)
        two = EV.rational(2)
        for i, addr in enumerate(state.addresses()):
            assert state.flag[i] == 1
            assert state.computed[0][i] == two, addr


# --- 2. roll-up golden test -------------------------------------------------------


def test_rollup_country_sum_golden(running_cube):
    with criterion("roll-up to Country (flags + oracle equality)", budget=10.0):
        result = algebra.roll_up(
            running_cube, "Location", "Country", (("sales", "SUM"),)
        )
        flagged = {
            addr for i, addr in enumerate(result.addresses()) if result.flag[i]
        }
        expected_flagged = {
            addr for addr in running_cube.addresses() if addr[1] in ("antwerp", "paris")
        }
        assert flagged == expected_flagged

        expected = oracle.oracle_aggregate(
            running_cube, "Location", "Country", "sales", "SUM"
        )
        report = oracle.assert_equiv(result, expected, ("sales", "t1"))
        assert report.ok, report.mismatches


# --- 3. dice golden tests ----------------------------------------------------------


def test_dice_boundary_golden(running_cube):
    with criterion("dice via boundary constant destroys oracle-rejected cells"):
        literal = apply_sequence(
            running_cube,
            [
                Const(Fraction("49.99")),
                LtMeasure("t1", "sales"),
                Prod("sales", "t2"),
                MakeDestructor("t2"),
                MakeFlag(1, "t2"),
            ],
            "dice sales above the boundary",
        )
        cond = MeasureLt("sales", Fraction(4999, 100), "above")
        selected = oracle.oracle_select(running_cube, cond).flagged()
        survivors = {literal.addresses()[i] for i in literal.live_cells()}
        assert survivors == selected
        for addr in survivors:
            assert literal.value("sales", addr) == running_cube.value("sales", addr)
            assert literal.value("t1", addr) == running_cube.value("sales", addr)


def test_dice_two_city_selector_golden(running_cube):
    with criterion("dice via summed selectors destroys oracle-rejected cells"):
        literal = apply_sequence(
            running_cube,
            [
                SelConst("Location", "City", "antwerp"),
                SelConst("Location", "City", "brussels"),
                Sum("t1", "t2"),
                Prod("t3", "sales"),
                MakeDestructor("t3"),
                MakeFlag(1, "t3"),
            ],
            "keep antwerp and brussels",
        )
        cond = Or(
            LevelEq("Location", "City", "antwerp"),
            LevelEq("Location", "City", "brussels"),
        )
        selected = oracle.oracle_select(running_cube, cond).flagged()
        survivors = {literal.addresses()[i] for i in literal.live_cells()}
        assert survivors == selected
        compiled = algebra.dice(running_cube, cond)
        assert compiled.destroyed == literal.destroyed
        assert compiled.computed == literal.computed
        for addr in survivors:
            assert literal.value("sales", addr) == running_cube.value("sales", addr)


# --- 4. the four-operation navigation ------------------------------------------------


def test_navigation_pipeline_equals_oracle(running_cube):
    with criterion("dice/roll-up/dice/drill-down pipeline equals oracle"):
        ops = [
            Dice(Or(LevelEq("Location", "Region", "flanders"),
                    LevelEq("Location", "Region", "south"))),
            RollUp("Location", "Country", (("sales", "SUM"),)),
            Dice(LevelEq("Location", "Country", "france")),
            DrillDown("Location", "Region", (("sales", "SUM"),)),
        ]
        state = algebra.run_pipeline(running_cube, ops)
        shadow = oracle.run_oracle_pipeline(oracle.cube_from_state(running_cube), ops)
        report = oracle.assert_equiv(state, shadow.result(), state.measure_names())
        assert report.ok, report.mismatches
        # the surviving flagged cells are exactly the south region's city
        flagged = {addr for i, addr in enumerate(state.addresses()) if state.flag[i]}
        assert flagged and all(addr[1] == "marseille" for addr in flagged)


# --- 5. randomized differential suite -------------------------------------------------


def test_differential_suite():
    with criterion("differential suite: 500 random cubes vs oracle", budget=120.0):
        report = run_differential(seed=20240131, trials=500)
        assert report.trials == 500
        assert report.operations >= 500
        assert report.ok, report.failures[:5]


# --- 6. prime-sum decodability ---------------------------------------------------------


def test_prime_sum_decodability():
    with criterion("prime-sum encoding decodes 200 random labelings exactly"):
        rng = random.Random(61803)
        for trial in range(200):
            sizes = [rng.randint(1, 3) for _ in range(rng.randint(1, 3))]
            alloc = LabelAllocator()
            labelings = []
            primes: set[int] = set()
            for size in sizes:
                labels, alloc = alloc.allocate(size)
                labelings.append(labels)
                primes |= {l.label_key() for l in labels if l.label_key() != 1}
            cells = {
                addr: Fraction(rng.randint(-100, 100), rng.randint(1, 100))
                for addr in itertools.product(*(range(s) for s in sizes))
            }
            total = EV.rational(0)
            for addr, value in cells.items():
                term = EV.rational(value)
                for axis, labels in enumerate(labelings):
                    term = term * labels[addr[axis]]
                total = total + term
            for addr, value in cells.items():
                label = EV_ONE
                for axis, labels in enumerate(labelings):
                    label = label * labels[addr[axis]]
                assert project_value(total, label, primes) == EV.rational(value), (
                    trial, addr,
                )


# --- 7. Boolean closure -----------------------------------------------------------------


def test_boolean_closure_on_eight_cells():
    with criterion("100 random conditions match truth tables on a 2x2x2 cube"):
        cube = make_cube(
            (
                simple_dimension("A", "ABottom", ("a1", "a2")),
                simple_dimension("B", "BBottom", ("b1", "b2")),
                simple_dimension("C", "CBottom", ("c1", "c2")),
            ),
            values=lambda addr, m: sum(map(ord, "".join(addr))) % 5 - 2,
        )
        rng = random.Random(271828)
        shadow = oracle.cube_from_state(cube)
        for trial in range(100):
            cond = random_condition(rng, cube, depth=3)
            steps, ref = algebra.compile_condition(cond)
            state = cube
            for step in steps:
                state = engine.apply_step(state, step)
            column = state.resolve(ref)
            for i, addr in enumerate(cube.addresses()):
                expected = oracle.eval_condition(shadow, cond, addr)
                assert column[i] == EV.rational(1 if expected else 0), (trial, addr)


# --- 8. soundness validation --------------------------------------------------------------


def test_soundness_fixtures(unsound_time_doc, sales_cube_doc):
    with criterion("unsound Time fixture rejected, Location fixture accepted"):
        with pytest.raises(GraphValidationError) as excinfo:
            io.parse_cube_definition(unsound_time_doc)
        assert "unsound at level Year" in str(excinfo.value)

        schema, _ = io.parse_cube_definition(sales_cube_doc)
        report = validate_graph(schema.graph("Location"))
        assert report.ok


# --- 9. round-trip laws ---------------------------------------------------------------------


def test_roundtrip_laws():
    with criterion("snapshot, statement, and rational round-trips (2100 instances)"):
        rng = random.Random(141421)
        failures = 0

        for _ in range(1000):
            value = Fraction(rng.randint(-10**9, 10**9), rng.randint(1, 10**9))
            if io.parse_rational(io.format_rational(value)) != value:
                failures += 1

        from test_cli import _random_statement

        for _ in range(1000):
            stmt = _random_statement(rng)
            if parse_statement(render_statement(stmt)) != stmt:
                failures += 1

        for _ in range(100):
            state = random_cube(rng)
            for _ in range(rng.randint(0, 2)):
                state = algebra.apply_op(state, random_op(rng, state))
            if io.restore(json.loads(json.dumps(io.snapshot(state)))) != state:
                failures += 1

        assert failures == 0
