"""Dimension schemas and graphs: validation, roll-ups, representatives.

A dimension schema is a DAG of levels between a bottom level and All; an
instance populates the levels with members and parent edges.  Soundness
means every path from a bottom member agrees wherever two hierarchies meet.
"""

from cubealg.model import DimensionGraph, DimensionSchema, validate_graph, validate_schema

location_schema = DimensionSchema(
    "Location",
    ("City", "Region", "Country", "All"),
    (("City", "Region"), ("Region", "Country"), ("Country", "All")),
)
print("Location schema valid:", validate_schema(location_schema).ok)
print("hierarchies:", [" -> ".join(h) for h in location_schema.hierarchies()])

location = DimensionGraph(
    location_schema,
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
location.ensure_valid()

print("\nbrussels rolls up to:", location.rolls_up("brussels", "Region"),
      "and", location.rolls_up("brussels", "Country"))

# Higher-level members are stored in bottom cells via representatives:
# the smallest bottom member (in domain order) that reaches them.
for member in ("flanders", "belgium", "france", "south", "all"):
    print(f"rep({member}) = {location.representative(member)}")

print("\ninduced order on Country:", location.induced_members("Country"))
print("belgium < france?",
      location.induced_compare("Country", "belgium", "france") < 0)

# A Time dimension where one day reaches 2014 through its month but 2015
# through its week is rejected: the two hierarchies disagree at Year.
time_schema = DimensionSchema(
    "Time",
    ("Day", "Month", "Week", "Year", "All"),
    (("Day", "Month"), ("Month", "Year"),
     ("Day", "Week"), ("Week", "Year"), ("Year", "All")),
)
unsound = DimensionGraph(
    time_schema,
    {"Day": ("d1",), "Month": ("jan",), "Week": ("w53",),
     "Year": ("y2014", "y2015"), "All": ("all",)},
    {("d1", "jan"), ("d1", "w53"), ("jan", "y2014"), ("w53", "y2015"),
     ("y2014", "all"), ("y2015", "all")},
)
report = validate_graph(unsound)
print("\nunsound Time instance accepted?", report.ok)
for violation in report.violations:
    print("  violation:", violation)
