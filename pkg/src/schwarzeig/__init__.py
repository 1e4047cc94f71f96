"""Periodic principal eigenvalues, rearrangements and KPP spreading speeds."""
from .dispersion import (
    DispersionCurve,
    NoInvasionError,
    SpeedResult,
    dispersion_curve,
    j_shifted,
    large_drift_limit_diagonal,
    spreading_speed,
)
from .gridfn import (
    ExpressionError,
    GridFn1D,
    GridFn2D,
    GridSpec1D,
    GridSpec2D,
    cell_mean,
    cell_mean2d,
    integrate,
    integrate2d,
    load_gridfn,
    sample,
    sample2d,
    save_gridfn,
)
from .operators import (
    CoefficientSet1D,
    CoefficientSet2D,
    EigenPair,
    OperatorMatrix,
    SolverError,
    adjoint_consistency,
    assemble,
    assemble_1d,
    assemble_2d,
    dk_dlambda,
    dk_dmu,
    k_lambda,
    principal_eig,
)
from .rearrange import harmonic_rearrange, same_distribution, schwarz, steiner
from .varforms import (
    CellProblemSolution,
    HollandPair,
    J_functional,
    effective_diffusivity_1d,
    effective_diffusivity_nd,
    holland_max_check,
    holland_transform,
    rayleigh,
    min_formula_1d,
    thm21_functional_1d,
)

__all__ = [
    "DispersionCurve",
    "NoInvasionError",
    "SpeedResult",
    "dispersion_curve",
    "j_shifted",
    "large_drift_limit_diagonal",
    "spreading_speed",
    "ExpressionError",
    "GridFn1D",
    "GridFn2D",
    "GridSpec1D",
    "GridSpec2D",
    "cell_mean",
    "cell_mean2d",
    "integrate",
    "integrate2d",
    "load_gridfn",
    "sample",
    "sample2d",
    "save_gridfn",
    "CoefficientSet1D",
    "CoefficientSet2D",
    "EigenPair",
    "OperatorMatrix",
    "SolverError",
    "adjoint_consistency",
    "assemble",
    "assemble_1d",
    "assemble_2d",
    "dk_dlambda",
    "dk_dmu",
    "k_lambda",
    "principal_eig",
    "CellProblemSolution",
    "HollandPair",
    "J_functional",
    "effective_diffusivity_1d",
    "effective_diffusivity_nd",
    "holland_max_check",
    "holland_transform",
    "rayleigh",
    "min_formula_1d",
    "thm21_functional_1d",
    "harmonic_rearrange",
    "same_distribution",
    "schwarz",
    "steiner",
]

__version__ = "0.1.0"
