"""Path thresholds in random subgraphs of contractable graphs."""

from .errors import BudgetError, ShiftGraphsError, ValidationError
from .kernels import BACKEND
from .relations import (
    OrderRelation,
    RelationSet,
    ThresholdReport,
    compute_w,
    core,
    edge_threshold,
    enumerate_classes,
    family_threshold_bounds,
    finite_path_bounds,
    infinite_path_probability_bound,
    shift_relation,
    vertex_threshold,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BudgetError",
    "OrderRelation",
    "RelationSet",
    "ShiftGraphsError",
    "ThresholdReport",
    "ValidationError",
    "compute_w",
    "core",
    "edge_threshold",
    "enumerate_classes",
    "family_threshold_bounds",
    "finite_path_bounds",
    "infinite_path_probability_bound",
    "shift_relation",
    "vertex_threshold",
]
