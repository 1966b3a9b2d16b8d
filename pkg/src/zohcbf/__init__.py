"""Sampled-data control barrier functions under zero-order-hold inputs.

Margin conditions that keep a safe set forward invariant when the
controller only updates at sample times, the reachability bounds and
supremum estimation behind them, a min-norm QP safety filter, and the
unicycle / spacecraft case studies.
"""

from .core import (
    Barrier,
    ClassK,
    DynamicsModel,
    InputSet,
    LinearClassK,
    NondifferentiablePointError,
    SafeSet,
    default_psi,
    hdot,
    lie_derivatives,
)
from .engine import SupConfig, SupEstimate, maximize
from .margins import (
    GlobalConstants,
    LocalMargins,
    MarginFunction,
    PhysicalMargin,
    compute_global_constants,
    eta,
    local_margins,
    make_margin,
    margins_table,
    physical_margin,
    physical_margin_inf,
    physical_table,
    upsilon,
)
from .qp import QPProblem, QPSolution, build_constraint, solve_filter
from .reach import (
    ReachBound,
    delta0_bound,
    delta_sup,
    lipschitz_estimate,
    reach_ball,
    reach_exact_unicycle,
    reach_flow,
    sup_over_reach,
    unicycle_arc,
)
from .sim import SimConfig, SimTrace, max_h_over_trace, run, task_completed, write_trace_csv
from .systems import (
    SYSTEMS,
    Scenario,
    SystemBundle,
    make_system,
    omega_box_barriers,
    spacecraft,
    spacecraft_nominal,
    unicycle,
    unicycle_nominal,
    wrap_pi,
)

__version__ = "0.1.0"
