"""Braess's paradox in non-atomic bottleneck routing games."""

from .errors import (BraessError, CapacityError, DomainError, FeasibilityError, InfeasibleError,
                     SearchFailure, StructureError, UnsupportedModelError)
from .game import (CostReport, Edge, Flow, LatencyFunction, RoutingInstance, as_fraction,
                   bottleneck_cost, edge_loads, format_fraction, is_eps_nash, normalize_rate,
                   scale_latencies)

__all__ = [
    "BraessError", "CapacityError", "DomainError", "FeasibilityError", "InfeasibleError", "SearchFailure",
    "StructureError", "UnsupportedModelError", "CostReport", "Edge", "Flow", "LatencyFunction",
    "RoutingInstance", "as_fraction", "bottleneck_cost", "edge_loads", "format_fraction", "is_eps_nash",
    "normalize_rate", "scale_latencies",
]

__version__ = "0.1.0"
