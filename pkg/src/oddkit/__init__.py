"""oddkit: norms and smoothness scales for matrices with off-diagonal decay.

Matrices live on finite windows of the integer lattice (d = 1 or 2) and are
stored diagonal-major.  The package computes solid decay norms (operator,
Jaffard, Schur, weighted p-summed diagonals), three interchangeable
smoothness-norm evaluators, approximation-space norms from band truncation,
Bessel-potential weights with an independent hypersingular cross-check, and
finite-section inversion experiments that measure how decay survives
inversion.
"""

from .approx import (
    ApproxSpaceSpec,
    CprShiftReport,
    approx_error,
    approx_errors,
    approx_space_norm,
    cpr_shift_identity_check,
    jackson_bernstein_ratio,
)
from .bessel import (
    EmbeddingReport,
    HypersingularQuadrature,
    QuadratureError,
    StabilizationWarning,
    bessel_convolve,
    bessel_norm,
    embedding_check,
    hypersingular_norm,
    hypersingular_profile,
)
from .lab import (
    DecayModel,
    DecayProfile,
    InvarianceCell,
    InvarianceReport,
    SingularSectionError,
    corpus,
    decay_profile,
    generate,
    invert_finite_section,
    make_invertible,
    spectral_invariance_report,
)
from .lattice import (
    LatticeMatrix,
    adjoint,
    band_truncate,
    bandwidth,
    derivation,
    difference,
    from_json_dict,
    load_csv,
    load_json,
    modulate,
    multiply,
    save_json,
    side_diagonal,
    to_json_dict,
)
from .norms import (
    NormSpec,
    ParameterDomainWarning,
    Weight,
    bessel_weight,
    cpr_norm,
    format_norm_spec,
    jaffard_norm,
    matrix_norm,
    op_norm_l2,
    parse_norm_spec,
    polynomial_weight,
    schur_norm,
    weighted_norm,
)
from .smoothness import (
    BesovSpec,
    ContinuityDefect,
    DyadicPartition,
    besov_norm,
    besov_norm_modulus,
    besov_norm_phi_lp,
    besov_norm_solid_lp,
    continuity_defect,
    evaluate,
    format_besov_spec,
    modulus,
    parse_any_spec,
    parse_besov_spec,
    reiteration_ratio,
    t_grid,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxSpaceSpec",
    "BesovSpec",
    "ContinuityDefect",
    "CprShiftReport",
    "DecayModel",
    "DecayProfile",
    "DyadicPartition",
    "EmbeddingReport",
    "HypersingularQuadrature",
    "InvarianceCell",
    "InvarianceReport",
    "LatticeMatrix",
    "NormSpec",
    "ParameterDomainWarning",
    "QuadratureError",
    "SingularSectionError",
    "StabilizationWarning",
    "Weight",
    "adjoint",
    "approx_error",
    "approx_errors",
    "approx_space_norm",
    "band_truncate",
    "bandwidth",
    "bessel_convolve",
    "bessel_norm",
    "bessel_weight",
    "besov_norm",
    "besov_norm_modulus",
    "besov_norm_phi_lp",
    "besov_norm_solid_lp",
    "continuity_defect",
    "corpus",
    "cpr_norm",
    "cpr_shift_identity_check",
    "decay_profile",
    "derivation",
    "difference",
    "embedding_check",
    "evaluate",
    "format_besov_spec",
    "format_norm_spec",
    "from_json_dict",
    "generate",
    "hypersingular_norm",
    "hypersingular_profile",
    "invert_finite_section",
    "jackson_bernstein_ratio",
    "jaffard_norm",
    "load_csv",
    "load_json",
    "make_invertible",
    "matrix_norm",
    "modulate",
    "modulus",
    "multiply",
    "op_norm_l2",
    "parse_any_spec",
    "parse_besov_spec",
    "parse_norm_spec",
    "polynomial_weight",
    "save_json",
    "schur_norm",
    "side_diagonal",
    "spectral_invariance_report",
    "t_grid",
    "to_json_dict",
    "weighted_norm",
    "__version__",
]
