"""Atomic transformations: building an operation step by step.

Every operation is a sequence of measure-creating steps over the fixed
matrix, ended by an output flag (optionally preceded by a destructor).
This walks two classics by hand: a dice on a sales threshold, and "total
sales in one city" via a selector, a global sum, and a product.
"""

from fractions import Fraction

from cubealg.algebra import render_steps
from cubealg.engine import (
    Const,
    LtMeasure,
    MakeDestructor,
    MakeFlag,
    Prod,
    SelConst,
    SumD,
    apply_sequence,
)
from cubealg.io import load_cube_files

state = load_cube_files("data/sales_cube.json", "data/sales_facts.csv")
print("loaded", state.cell_count, "cells; flags:", state.flag_count())

# DICE "sales above roughly 50": compare against a boundary constant, carry
# sales forward as a product, destroy the rejected cells, flag the rest.
dice_steps = [
    Const(Fraction("49.99")),
    LtMeasure("t1", "sales"),
    Prod("sales", "t2"),
    MakeDestructor("t2"),
    MakeFlag(1, "t2"),
]
print("\n".join(render_steps(dice_steps, dims=3)))
diced = apply_sequence(state, dice_steps, "dice on the sales boundary")
print("destroyed:", diced.destroyed_count(), "of", diced.cell_count)
print("surviving measures:", diced.measure_names())

# Total sales in antwerp: the selector marks antwerp cells, the product
# zeroes everything else, the 3-dimensional sum broadcasts the total, and a
# final product confines it to antwerp again.  No destructor: every cell
# survives, only antwerp cells are flagged.
total_steps = [
    SelConst("Location", "City", "antwerp"),
    Prod("t1", "sales"),
    SumD("t2"),
    Prod("t3", "t1"),
    MakeFlag(1, "t1"),
]
print()
print("\n".join(render_steps(total_steps, dims=3)))
totals = apply_sequence(state, total_steps, "total sales in antwerp")
cell = ("lego", "antwerp", "d01")
other = ("lego", "paris", "d01")
print("total in an antwerp cell:", totals.value("t1", cell))
print("value in a paris cell:   ", totals.value("t1", other))
print("flags:", totals.flag_count(), "of", totals.cell_count)
