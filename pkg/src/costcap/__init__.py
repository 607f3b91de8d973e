"""Finite-blocklength bounds for channels with input cost constraints.

All information quantities are in nats unless a function says otherwise.
"""

__version__ = "0.1.0"

from .analytic import (
    AwgnSpec,
    ExpChannelSpec,
    awgn_bound_point,
    awgn_capacity,
    awgn_converse_log_m,
    awgn_dispersion,
    awgn_tilted_cdf,
    exp_bound_point,
    exp_capacity,
    exp_converse_log_m,
    exp_dispersion,
    exp_idiv_max,
    exp_output_idiv,
    exp_tilted_cdf,
    exp_tilted_params,
)
from .bounds import (
    BoundPoint,
    DmcBounds,
    TypeComposition,
    achievability_log_m,
    converse_epsilon,
    converse_log_m,
    dt_achievability_epsilon,
    enumerate_admissible_types,
    normal_approx,
    q_func,
    q_inv,
    strong_converse_curve,
)
from .dmc import (
    CostCapacitySolution,
    DmcChannel,
    caid_uniqueness_probe,
    conditional_tilted_pmf,
    dispersion_cost,
    solve_capacity_cost,
    tilted_density,
)
from .errors import CostcapError
from .jscc import (
    DmsSource,
    JsccConverse,
    RdSolution,
    d_tilted_info,
    jscc_converse_epsilon,
    jscc_gaussian_approx,
    solve_rate_distortion,
)
from .lattice import LatticeDistribution

__all__ = [name for name, obj in list(globals().items())
           if not name.startswith("_") and not isinstance(obj, type(lattice))]
