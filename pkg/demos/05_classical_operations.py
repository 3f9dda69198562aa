"""The classical operations, each checked against the brute-force oracle.

dice filters cells by a Boolean condition (destructive), slice collapses a
dimension into sums stored on the representative of all, slice-dice keeps
one member's hyperplane, and roll-up aggregates to a level, flagging that
level's representatives.  The oracle recomputes everything by direct
iteration — no labels, no steps — and must agree exactly.
"""

from cubealg import algebra, oracle
from cubealg.algebra import Dice, LevelEq, MeasureLt, Or, RollUp, Slice, SliceDice
from cubealg.io import load_cube_files


def check(state, op, done):
    shadow = oracle.apply_oracle_op(oracle.cube_from_state(state), op)
    report = oracle.assert_equiv(done, shadow.result(), done.measure_names())
    return "oracle agrees" if report.ok else f"MISMATCH {report.mismatches[:3]}"


state = load_cube_files("data/sales_cube.json", "data/sales_facts.csv")

condition = Or(LevelEq("Location", "Country", "belgium"),
               MeasureLt("sales", 100, "above"))
diced = algebra.dice(state, condition)
print("DICE belgium-or-high-sales:",
      diced.destroyed_count(), "cells destroyed;", check(state, Dice(condition), diced))

sliced = algebra.slice_cube(state, "Time")
print("SLICE Time:", sliced.destroyed_count(), "cells destroyed;",
      "day sums live on d01's hyperplane;", check(state, Slice("Time"), sliced))
print("  total lego sales in antwerp:", sliced.value("t1", ("lego", "antwerp", "d01")))

kept = algebra.slice_dice(state, "Location", "antwerp")
print("SLICEDICE Location antwerp:", kept.flag_count(), "cells kept;",
      check(state, SliceDice("Location", "antwerp"), kept))

rolled = algebra.roll_up(state, "Location", "Country",
                         (("sales", "SUM"), ("sales", "AVG"), ("sales", "MAX")))
op = RollUp("Location", "Country", (("sales", "SUM"), ("sales", "AVG"), ("sales", "MAX")))
print("ROLLUP to Country:", rolled.flag_count(), "flagged cells;", check(state, op, rolled))
cell = ("lego", "antwerp", "d01")
print("  belgium lego/d01 sum:", rolled.value("t1", cell),
      " avg:", rolled.value("t2", cell),
      " max:", rolled.value("t3", cell))

# Flags mark the representatives; non-representative cells keep the group
# value but stay dim.
for city in ("antwerp", "brussels", "paris", "marseille"):
    index = rolled.index_of(("lego", city, "d01"))
    print(f"  {city:9} flag={rolled.flag[index]} value={rolled.computed[0][index]}")
