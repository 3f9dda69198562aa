"""Snapshots and the HTTP session service.

A snapshot is a lossless JSON document (exact values rendered canonically);
restoring replays to an identical state.  The HTTP facade exposes the same
engine to a browser client: sessions, operations, pivot views, traces, and
replay-based undo.  Here the service runs in-process via the test client;
`cubealg serve --port 8000` runs it for real.
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from cubealg import algebra, io
from cubealg.algebra import RollUp
from cubealg.service import create_app

state = io.load_cube_files("data/sales_cube.json", "data/sales_facts.csv")
rolled = algebra.roll_up(state, "Location", "Country", (("sales", "SUM"),))

document = io.snapshot(rolled)
restored = io.restore(json.loads(json.dumps(document)))
print("snapshot round-trip identical:", restored == rolled)
print("snapshot size:", len(json.dumps(document)), "bytes,",
      len(document["opLog"]), "logged operation(s)")

client = TestClient(create_app())
created = client.post("/sessions", json={
    "cubeDef": json.load(open("data/sales_cube.json")),
    "facts": Path("data/sales_facts.csv").read_text(),
}).json()
sid = created["sessionId"]
print("\nsession:", sid[:8], "cells:", created["schemaSummary"]["cellCount"])

posted = client.post(f"/sessions/{sid}/ops", json={
    "op": io.op_to_doc(RollUp("Location", "Country", (("sales", "SUM"),))),
}).json()
print("after roll-up: flagged", posted["flaggedCellCount"])
print("first trace lines:", posted["stepTrace"]["steps"][:3])

view = client.get(f"/sessions/{sid}/view", params={
    "row": "Location", "col": "Product", "measure": "t1",
    "fixed": ["Time=d01"], "approx": 2,
}).json()
print("antwerp row of the pivot:",
      [cell["value"] for cell in view["cells"][0]])

undo = client.post(f"/sessions/{sid}/replay", json={"prefixLength": 0}).json()
print("replayed to start: destroyed",
      undo["schemaSummary"]["destroyedCellCount"],
      "| selfcheck:", client.get(f"/sessions/{sid}/selfcheck").json()["ok"])
