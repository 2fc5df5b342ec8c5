"""Asymptotic periodic and bifurcation points of fractional difference maps."""
from .bifurcation import BifurcationPoint, cascade, feigenbaum_ratios, matrix_A, residual_bif, solve_bifurcation
from .coeffs import (
    CoeffTable,
    cached_table,
    s_even,
    s_naive_truncation,
    s_odd,
    s_series_tail_oracle,
    s_table,
    validate_identity,
)
from .diagram import DiagramRecord, asymptotic_diagram, finite_time_diagram
from .maps import MapSpec, Trajectory, g0, iterate, iterate_multi, logistic_map
from .periodic import (
    CycleSolution,
    classify_cycle,
    continue_in_K,
    residual_multi,
    residual_period_l,
    solve_period_l,
)
from .specfun import DomainError, PoleError

__version__ = "0.1.0"
