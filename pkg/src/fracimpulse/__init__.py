"""Impulsive fractional initial value problems of order alpha in (0, 1).

Solves Caputo-type problems with fixed-time state jumps (optionally
with a finite delay) through the equivalent integral equation, and
computes existence/uniqueness certificates: contraction constants
under both common normalizations, a-priori solution radii, a
linear-growth fixed-point bound, and an equicontinuity modulus.
"""

__version__ = "0.1.0"

from .certificates import (
    Certificate,
    CertificateError,
    a_priori_radii,
    certify,
    choose_p,
    contraction_delay,
    contraction_general,
    contraction_split,
    equicontinuity_modulus,
    logistic_growth_bound,
    schaefer_bound,
)
from .config import (
    BUILTIN_EXAMPLES,
    ConfigError,
    RunConfig,
    builtin_example,
    load_config,
    parse_config,
)
from .fracquad import (
    OrderStudy,
    WeightTable,
    build_weights,
    convergence_order,
    frac_integral,
    power_integral,
)
from .problem import (
    DelaySpec,
    ImpulseSchedule,
    Mesh,
    MeshError,
    ProblemError,
    ProblemSpec,
    RhsSpec,
    Trajectory,
    build_mesh,
    history_sup_norm,
)
from .solver import (
    SolveReport,
    SolverError,
    jump_residual,
    solve_marching,
    solve_picard,
    split_component_integral,
)
from .special import (
    Envelope,
    gamma,
    holder_constant,
    lp_seminorm,
    mittag_leffler,
)

__all__ = [
    "__version__",
    "BUILTIN_EXAMPLES",
    "Certificate",
    "CertificateError",
    "ConfigError",
    "DelaySpec",
    "Envelope",
    "ImpulseSchedule",
    "Mesh",
    "MeshError",
    "OrderStudy",
    "ProblemError",
    "ProblemSpec",
    "RhsSpec",
    "RunConfig",
    "SolveReport",
    "SolverError",
    "Trajectory",
    "WeightTable",
    "a_priori_radii",
    "build_mesh",
    "build_weights",
    "builtin_example",
    "certify",
    "choose_p",
    "contraction_delay",
    "contraction_general",
    "contraction_split",
    "convergence_order",
    "equicontinuity_modulus",
    "frac_integral",
    "gamma",
    "history_sup_norm",
    "holder_constant",
    "jump_residual",
    "load_config",
    "logistic_growth_bound",
    "lp_seminorm",
    "mittag_leffler",
    "parse_config",
    "power_integral",
    "schaefer_bound",
    "solve_marching",
    "solve_picard",
    "split_component_integral",
]
