"""Power-law expanding curvature flow of star-shaped surfaces.

Axisymmetric radial-graph solver in Euclidean and hyperbolic 3-space, with
sphere reference solutions, pinching and shape diagnostics, and a quartic
patch that loses convexity instantly.
"""

__version__ = "0.1.0"

from .counterexample import (
    QuarticPatch,
    PatchGrid,
    h11_dot_closed_form,
    h11_dot_numeric,
    patch_flow_short_time,
)
from .curvature import CurvatureFunction, eval_F, phi_suite
from .diagnostics import (
    DiagnosticsRecord,
    PinchingConfig,
    best_fit_sphere_axisym,
    fit_decay_rate,
    hausdorff_decay_exponent,
    validate_initial_pinching,
)
from .errors import (
    ConeViolationError,
    ConfigError,
    ConsistencyError,
    DomainError,
    FitError,
    PinchflowError,
    SpeedDegeneracyError,
    StiffnessError,
)
from .flow import (
    FlowConfig,
    FlowResult,
    InitialProfile,
    StepperConfig,
    StopConfig,
    OutputConfig,
    estimate_blowup,
    run,
    step,
)
from .geometry import Ambient, AxisymGrid, GraphState, weingarten_axisym
from .reference import SphereSolution, euclid_radius, hyperbolic_radius

__all__ = [name for name in dir() if not name.startswith("_")]
