"""Spectral solvers and diagnostics for the shifted-argument equation
-u'' - a*u(x - h) = f(x) and the nonlocal integro-differential equation
u'' + a*u(x - h) + int G(x - y) F(u(y), y) dy = 0 on a periodic box.
"""

from .errors import (
    ContractionHypothesisFailed,
    HypothesisError,
    MaxIterExceeded,
    NearSingularGrid,
    NotFinite,
    ResonantNotSolvable,
    ShiftSpecError,
)
from .kernels import KernelReport, contraction_margin, kernel_orthogonality, stability_constant
from .linear import (
    LinearSolveResult,
    SolvabilityReport,
    apply_operator,
    check_solvability,
    derivative_bound_check,
    project_solvable,
    resonance_quotient_masses,
    resonant_aligned_half_length,
    solve_linear,
)
from .nonlinear import (
    FixedPointResult,
    Nonlinearity,
    apply_T,
    apply_nonlinearity,
    convolve,
    convolve_direct,
    fixed_point_solve,
    nontriviality_check,
)
from .sequences import (
    ConvergenceRow,
    ConvergenceTable,
    SequenceKind,
    SequenceSpec,
    builtin_sequences,
    run_kernel_sequence,
    run_linear_sequence,
    write_table_csv,
)
from .spectral import (
    Grid,
    GridFunction,
    SpectralFunction,
    evaluate_transform_at,
    forward_transform,
    h2_norm,
    inverse_transform,
    l1_norm,
    l2_norm,
    l2_norm_spectral,
    make_grid,
    read_gridfunction_csv,
    second_derivative,
    shift,
    sup_abs_spectral,
    weighted_l1_norm,
    write_gridfunction_csv,
)
from .symbols import (
    FredholmClass,
    FredholmKind,
    ShiftParams,
    classify,
    estimate_alpha,
    symbol,
    symbol_modulus_sq,
)
from .catalog import builtin_function, builtin_nonlinearity

__version__ = "0.1.0"

__all__ = [
    "ContractionHypothesisFailed",
    "ConvergenceRow",
    "ConvergenceTable",
    "FixedPointResult",
    "FredholmClass",
    "FredholmKind",
    "Grid",
    "GridFunction",
    "HypothesisError",
    "KernelReport",
    "LinearSolveResult",
    "MaxIterExceeded",
    "NearSingularGrid",
    "Nonlinearity",
    "NotFinite",
    "ResonantNotSolvable",
    "SequenceKind",
    "SequenceSpec",
    "ShiftParams",
    "ShiftSpecError",
    "SolvabilityReport",
    "SpectralFunction",
    "apply_T",
    "apply_nonlinearity",
    "apply_operator",
    "builtin_function",
    "builtin_nonlinearity",
    "builtin_sequences",
    "check_solvability",
    "classify",
    "contraction_margin",
    "convolve",
    "convolve_direct",
    "derivative_bound_check",
    "estimate_alpha",
    "evaluate_transform_at",
    "fixed_point_solve",
    "forward_transform",
    "h2_norm",
    "inverse_transform",
    "kernel_orthogonality",
    "l1_norm",
    "l2_norm",
    "l2_norm_spectral",
    "make_grid",
    "nontriviality_check",
    "project_solvable",
    "read_gridfunction_csv",
    "resonance_quotient_masses",
    "resonant_aligned_half_length",
    "run_kernel_sequence",
    "run_linear_sequence",
    "second_derivative",
    "shift",
    "solve_linear",
    "stability_constant",
    "sup_abs_spectral",
    "symbol",
    "symbol_modulus_sq",
    "weighted_l1_norm",
    "write_gridfunction_csv",
    "write_table_csv",
]
