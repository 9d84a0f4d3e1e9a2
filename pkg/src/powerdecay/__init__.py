"""Long-horizon simulation and asymptotic diagnostics for y' = -H(y) A y + G(t, y)."""

__version__ = "0.1.0"

from .closedform import (  # noqa: E402
    BasicCase,
    asymptotic_prediction,
    exact_unforced,
    forced_oracle,
    forced_xi_star,
    xi_star_norm,
)
from .diagnostics import (  # noqa: E402
    AnalysisConfig,
    AsymptoticReport,
    analyze,
    dirichlet_quotient,
    estimate_decay_exponent,
    estimate_epsilon,
    extract_limit_eigenvalue,
    extract_xi,
    projection_decay,
    quotient_derivative_check,
    verify_eigen_relation,
)
from .errors import *  # noqa: E402,F401,F403
from .homogeneous import (  # noqa: E402
    HomogeneousFn,
    evaluate,
    holder_probe,
    linear_combination,
    lp_norm_power,
    norm_power,
    outer_power,
    product,
    sphere_bounds,
)
from .integrate import (  # noqa: E402
    IntegratorConfig,
    Trajectory,
    continue_trajectory,
    integrate,
    integrate_rescaled,
)
from .spectral import SpectralMatrix, decompose_symmetric, from_given_transform  # noqa: E402
from .system import (  # noqa: E402
    Perturbation,
    SystemSpec,
    check_perturbation_bound,
    rhs,
    small_data_radius,
)
