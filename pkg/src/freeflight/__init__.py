"""Newton-KKT free-flight trajectory optimization over vortex wind fields."""
from .kkt import (
    KKTState,
    ReferenceOptimum,
    SolveOptions,
    SolveReport,
    Status,
    classify,
    find_reference_optimum,
    initialize_state,
    kkt_residual,
    newton_solve,
)
from .schwarz import make_plan, optimize_segment, schwarz_smooth, smooth_then_solve
from .timefunctional import ProblemSpec, evaluate_with_derivatives, integrand, travel_time
from .trajectory import (
    Deviation,
    Trajectory,
    apply_deviations,
    build_deviation,
    discrete_w1inf_distance,
    resample,
    sobolev_norm,
    straight_line,
)
from .windfield import Vortex, WindField, benchmark_field, eval_wind, wind_jacobian, wind_second_derivatives

__version__ = "0.1.0"
