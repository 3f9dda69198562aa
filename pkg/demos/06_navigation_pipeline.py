"""A full navigation: compare regional sales, drill back down.

The analyst keeps two regions, totals by country, restricts to France, and
disaggregates to regions again.  Destroyed cells stay destroyed: the final
drill-down only sees what survived, which is exactly the point of composing
destructive operations.  Run the same flow interactively with
`cubealg run --script data/example14.olap` or in the REPL.
"""

from cubealg import algebra, oracle
from cubealg.algebra import Dice, DrillDown, LevelEq, Or, RollUp, render_steps
from cubealg.io import export_view, load_cube_files

state = load_cube_files("data/sales_cube.json", "data/sales_facts.csv")

ops = [
    Dice(Or(LevelEq("Location", "Region", "flanders"),
            LevelEq("Location", "Region", "south"))),
    RollUp("Location", "Country", (("sales", "SUM"),)),
    Dice(LevelEq("Location", "Country", "france")),
    DrillDown("Location", "Region", (("sales", "SUM"),)),
]

current = state
for op in ops:
    current = algebra.apply_op(current, op)
    entry = current.op_log[-1]
    print(f"{entry.description}:  flagged {current.flag_count()},",
          f"destroyed {current.destroyed_count()}")

shadow = oracle.run_oracle_pipeline(oracle.cube_from_state(state), ops)
report = oracle.assert_equiv(current, shadow.result(), current.measure_names())
print("oracle composition agrees:", report.ok)

print("\ntrace of the last operation:")
entry = current.op_log[-1]
print("\n".join("  " + line for line in
                render_steps(entry.steps, len(current.dims), entry.base)))

view = export_view(current, "Product", "Location", {"Time": "d01"}, "t1")
print("\nregional sums on day d01 (only south survived the France dice):")
for product, row in zip(view["rows"], view["cells"]):
    cells = ["-" if c is None else c["value"] for c in row]
    print(f"  {product:8}", "  ".join(f"{c:>8}" for c in cells))
