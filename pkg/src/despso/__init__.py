"""Interval analysis with HCLPSO and DES-driven PSO."""
from .cases import builtin_problem, oracle_bounds, quadratic_box_oracle
from .des import DesConfig, NotConverged, PointSet, centered_l2_discrepancy, generate_des
from .expr import load_problem, parse_problem
from .interval import IntervalProblem, IntervalVariable, Response, bounds, compare_modes, speedup_pct
from .kernels import BACKEND
from .pso import PsoConfig, SearchSpace, SequenceSource, optimize

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "DesConfig", "IntervalProblem", "IntervalVariable", "NotConverged", "PointSet", "PsoConfig",
    "Response", "SearchSpace", "SequenceSource", "bounds", "builtin_problem", "centered_l2_discrepancy",
    "compare_modes", "generate_des", "load_problem", "optimize", "oracle_bounds", "parse_problem",
    "quadratic_box_oracle", "speedup_pct",
]
