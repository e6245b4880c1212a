"""Isogeometric Galerkin solver for the 2D Helmholtz equation with
nonhomogeneous Dirichlet data on biquadratic B-spline domains."""

__version__ = "0.1.0"

from .assembly import (
    AssembledSystem,
    QuadratureRule,
    assemble,
    element_system,
    gauss_rule,
    save_matrix_market,
)
from .boundary import LiftCoefficients, build_lift, eval_lift
from .errors import (
    ConfigError,
    ConstructionError,
    IgaError,
    InterpolationError,
    NetFormatError,
    RefinementError,
    SingularGeometryError,
    SolverError,
)
from .fields import (
    ErrorReport,
    SolutionField,
    combine,
    error_norms,
    eval_solution,
    export_grid,
)
from .geometry import (
    BUILTIN_DOMAINS,
    ControlNet,
    InjectivityReport,
    JacobianData,
    builtin_domain,
    load_net,
    refine_geometry,
    save_net,
    validate_injectivity,
)
from .problems import (
    ProblemCase,
    eval_forcing_guarded,
    helmholtz_variable_frequency,
    manufactured_case,
    poisson_exp_cones,
    poisson_oscillatory,
)
from .refine import (
    RefinementPlan,
    apply_plan,
    cluster_plan,
    double_knot_plan,
    merge_plans,
    uniform_midpoint_plan,
)
from .solve import SolveReport, solve
from .splines import (
    BasisEval,
    KnotVector,
    TensorSpace,
    eval_basis,
    eval_basis_many,
    greville_interpolate,
    insert_knot,
    uniform_knots,
)

__all__ = [name for name in dir() if not name.startswith("_")]
