"""cubealg: an exact data-cube engine with a verified OLAP operation algebra.

Cubes are fixed multidimensional matrices whose cells hold stacks of exact
values; every classical operation (dice, slice, slice-dice, roll-up,
drill-down) compiles to a sequence of atomic measure-creating
transformations, grouping included via symbolic prime labels, and is checked
against an independent brute-force oracle.
"""

from .algebra import (
    And,
    Dice,
    DrillDown,
    LevelEq,
    LevelLt,
    MeasureEq,
    MeasureLt,
    Not,
    Or,
    RollUp,
    Slice,
    SliceDice,
    dice,
    drill_down,
    render_steps,
    roll_up,
    run_pipeline,
    slice_cube,
    slice_dice,
)
from .engine import CubeState, apply_sequence, apply_step, finalize_operation, init_cube
from .errors import CubeError
from .exactnum import ExactValue, LabelAllocator, allocate_labels, project_value
from .io import export_view, load_cube, load_cube_files, restore, snapshot
from .model import (
    CubeSchema,
    DimensionGraph,
    DimensionSchema,
    MatrixSchema,
    validate_graph,
    validate_schema,
)
from .oracle import assert_equiv, oracle_aggregate, oracle_select

__version__ = "0.1.0"

__all__ = [
    "And", "CubeError", "CubeSchema", "CubeState", "Dice", "DimensionGraph",
    "DimensionSchema", "DrillDown", "ExactValue", "LabelAllocator", "LevelEq",
    "LevelLt", "MatrixSchema", "MeasureEq", "MeasureLt", "Not", "Or", "RollUp",
    "Slice", "SliceDice", "allocate_labels", "apply_sequence", "apply_step",
    "assert_equiv", "dice", "drill_down", "export_view", "finalize_operation",
    "init_cube", "load_cube", "load_cube_files", "oracle_aggregate",
    "oracle_select", "project_value", "render_steps", "restore", "roll_up",
    "run_pipeline", "slice_cube", "slice_dice", "snapshot", "validate_graph",
    "validate_schema",
]
