"""The grouping showpiece: "for each country, the number of cities".

Counting members of one level per member of a higher level needs grouping
without any group-by machinery: label countries and cities with prime
radicals, multiply, sum the whole matrix into one symbolic number, then
project the per-group components back out and normalize away the matrix
volume.  Fourteen steps, all exact.
"""

from fractions import Fraction

from cubealg.algebra import render_steps
from cubealg.engine import (
    CountDistinct,
    Gamma,
    MakeFlag,
    Prod,
    Project,
    Quot,
    SelLevel,
    SumD,
    apply_sequence,
    apply_step,
)
from cubealg.io import load_cube
import json

# Ten products and one hundred days so the volume normalization is visible.
products = [f"p{i:02d}" for i in range(1, 11)]
days = [f"d{i:03d}" for i in range(1, 101)]
cube_doc = {
    "dimensions": [
        {
            "name": "Product",
            "levels": [{"name": "Item"}, {"name": "All"}],
            "levelEdges": [["Item", "All"]],
            "members": [{"name": p, "level": "Item"} for p in products],
            "memberEdges": [],
            "bottomOrder": products,
        },
        json.load(open("data/sales_cube.json"))["dimensions"][1],  # Location
        {
            "name": "Time",
            "levels": [{"name": "Day"}, {"name": "All"}],
            "levelEdges": [["Day", "All"]],
            "members": [{"name": d, "level": "Day"} for d in days],
            "memberEdges": [],
            "bottomOrder": days,
        },
    ],
    "measures": [{"name": "sales"}],
}
state = load_cube(cube_doc, "Product,Location,Time,sales\n")
print("cube:", " x ".join(state.dims), "=", state.cell_count, "cells")

steps = [
    Gamma("Location", "Country"),    # countries get 1 and sqrt2
    Gamma("Location", "City"),       # cities get sqrt3 sqrt5 sqrt7 sqrt11
    Prod("t1", "t2"),                # product labels per city
    SumD("t3"),                      # one symbolic number for the whole cube
    Gamma("Product", "Item"),
    CountDistinct("t5"),             # 10 products
    Gamma("Time", "Day"),
    CountDistinct("t7"),             # 100 days
    Prod("t6", "t8"),                # matrix volume along the other axes
    Quot("t4", "t9"),                # normalize the sum
    Project("t10", "t2"),            # component per city label
    SumD("t11"),
    Quot("t12", "t9"),
    Project("t13", "t1"),            # component per country label
    MakeFlag(1, SelLevel("Location", "City")),
]
print()
print("\n".join(render_steps(steps, dims=3)))

# watch the symbolic intermediates
partial = state
for step in steps[:4]:
    partial = apply_step(partial, step)
print("\nt4 (global sum):", partial.value("t4", ("p01", "antwerp", "d001")))

result = apply_sequence(state, steps, "cities per country")
for city in ("antwerp", "brussels", "paris", "marseille"):
    print(f"cities in {city}'s country:",
          result.value("t1", ("p01", city, "d001")))
