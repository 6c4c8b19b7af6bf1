"""Curvature-based stretching diagnostics for slow invariant manifolds.

A vector field x' = f(x) is embedded in the extended space (x, tau) with a
metric that makes its solution curves geodesics.  The Riemann tensor of that
metric yields geodesic stretching rates, whose normal/tangent ratio is
maximized along fibers of a progress variable to locate the slow manifold.
"""

__version__ = "0.1.0"

from .errors import (
    DegeneratePlaneError,
    DomainError,
    EquilibriumError,
    GeostretchError,
    NonFiniteError,
    SingularObjectiveError,
    UnsupportedDimensionError,
)
from .geometry import (
    CurvatureData,
    MetricData,
    christoffel_at,
    geodesic_deviation,
    geodesic_residual,
    metric_at,
    metric_partials,
    riemann_at,
    sectional_curvature,
    tangent_T,
)
from .simfinder import (
    FiberProblem,
    SimCurve,
    compare_reference,
    maximize_fiber,
    trace_sim,
)
from .stretching import (
    StretchingReport,
    classical_rate,
    classical_ratio,
    frame_at,
    full_report,
    geodesic_rate,
    geodesic_ratio,
    lift,
)
from .vectorfield import (
    DerivativeBundle,
    Trajectory,
    VectorFieldModel,
    davis_skodje_sim,
    derivatives,
    integrate,
    make_constant,
    make_davis_skodje,
    make_linear,
)
