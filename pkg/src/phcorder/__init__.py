"""Constructive deciders for the support-function order and the convex order.

Measures are finitely supported; every positive answer comes with a
moment-preserving kernel (or martingale coupling) and every negative answer
with a separating function whose gap is checked by direct integration.
"""

from .errors import (
    AlignmentError,
    InfeasibleError,
    MeasureError,
    NumericalBreakdown,
    PhcError,
    UnboundedError,
)
from .geometry import (
    ConvexPolyhedralFunction,
    PolyhedralSupportFunction,
    SphericalFunctionSamples,
    integrate,
    random_support_function,
    support_eval,
    wulff_support,
)
from .kernels import (
    DiscreteKernel,
    apply,
    barycentric_deviation,
    glue,
    identity_kernel,
    inverse_sphere_kernel,
    is_moment_preserving,
    is_transport,
    sphere_kernel,
)
from .measures import (
    DiscreteMeasure,
    coarsen,
    first_moment,
    flatten_to_hyperplane,
    homogeneous_marginal,
    lift,
    mass,
    normalize_merge,
    ph_equivalent,
    project,
    same_measure,
    w1,
)
from .order import (
    BarycentricCost,
    OrderVerdict,
    ProbeResult,
    barycentric_cost,
    check_cx,
    check_phc,
    dual_probe,
)

__version__ = "0.1.0"
