"""Exact integrated-L1 risk of scale-expanded plug-in predictive densities.

For spherically symmetric models ``X ~ p(||x - theta||^2)`` and
``Y ~ q(||y - theta||^2)``, the predictive density
``c^-d q(||y - theta_hat(X)||^2 / c^2)`` has a risk that reduces to a
two-dimensional radial integral. This package evaluates it, searches for the
best expansion ``c``, provides closed forms for uniform targets and checks
everything against brute-force oracles.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError,
    InconsistentDataError,
    ModelError,
    NoValidDensityError,
    PreconditionError,
    SpecParseError,
)
from .loss import LossTransform, parse_gamma  # noqa: E402
from .models import (  # noqa: E402
    Estimator,
    Mixing,
    RadialModel,
    make_custom,
    make_normal,
    make_scale_mixture_normal,
    make_uniform_ball,
    parse_model,
)
from .quadrature import McSpec, QuadSpec, SearchSpec  # noqa: E402
from .risk import (  # noqa: E402
    c1_inf,
    constant_risk,
    optimal_c,
    plugin_risk_R1,
    restricted_optimal_c,
    restricted_risk,
    risk_curve,
    risk_derivative_at_one,
)

__all__ = [
    "__version__",
    "ConvergenceError", "InconsistentDataError", "ModelError", "NoValidDensityError",
    "PreconditionError", "SpecParseError",
    "LossTransform", "parse_gamma",
    "Estimator", "Mixing", "RadialModel", "make_custom", "make_normal",
    "make_scale_mixture_normal", "make_uniform_ball", "parse_model",
    "McSpec", "QuadSpec", "SearchSpec",
    "c1_inf", "constant_risk", "optimal_c", "plugin_risk_R1", "restricted_optimal_c",
    "restricted_risk", "risk_curve", "risk_derivative_at_one",
]
