"""Equilibrium, index, and basin analysis for an SIRS model with outside
transmission.

The package studies a three-compartment epidemic model whose population
exchanges infection with an outside world at rate beta = beta1 + beta2.
Proportions obey an autonomous system on the unit simplex whose planar
reduction is quadratic; everything here revolves around that planar field:
locating and classifying its rest points, certifying Poincare index counts
along boundary and excision curves, ruling out periodic orbits via a
negative-curl certificate, classifying the parameter regime (unique sink
versus bistable), and simulating proportions alongside the total
population, whose growth or decay at an attractor is decided by the
threshold b/(d + eps1*i* + eps2*r*).
"""

from .analysis import (
    BasinReport,
    REGIME_A,
    REGIME_B,
    REGIME_DEGENERATE,
    RegimeVerdict,
    SweepAxis,
    SweepResult,
    basin_analysis,
    bistable_special_instance,
    classify_regime,
    parameter_sweep,
    perturb_special_case,
    straddling_death_rate,
)
from .contours import GridScan, grid_intersections, nullcline_segments
from .dynamics import (
    GrowthReport,
    OmegaLimitResult,
    Trajectory,
    growth_threshold,
    integrate,
    omega_limit,
    sigma_drift,
    verify_growth,
)
from .equilibria import (
    DEGENERATE,
    SADDLE,
    SINK,
    SOURCE,
    RestPoint,
    SpecialCaseReport,
    classify,
    degeneracy_scan,
    find_rest_points,
    jacobian,
    special_case_report,
    trace_identity_check,
)
from .errors import (
    ConfigError,
    CurveConstructionError,
    EmptyInterval,
    FieldVanishesOnCurve,
    InconsistentWithTheorem,
    NearDegenerateWarning,
    NoConvergence,
    NonFiniteState,
    OpenSirsError,
    PersistenceFailure,
    RestPointCountError,
    SpecialCaseError,
    StepSizeUnderflow,
)
from .model import (
    ModelParams,
    PlanarState,
    PopulationState,
    ProportionState,
    boundary_inwardness,
    dulac_curl,
    planar_field,
    planar_rhs,
    population_rhs,
    proportion_rhs,
)
from .portrait import render_portrait
from .winding import (
    ArcSegment,
    CurveInwardnessReport,
    IndexReport,
    JordanCurve,
    LineSegment,
    circle_curve,
    curve_origin_enclosed,
    curve_origin_excised,
    curve_triangle,
    inwardness_on_curve,
    local_index,
    winding_index,
)

__version__ = "0.1.0"
