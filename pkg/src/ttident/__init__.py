"""Recovery of governing equations from snapshot data with tensor-train
least squares.

The package identifies models of the form ``x_dot = coefficients^T @
features(x)`` from paired state/derivative snapshots, either through a
dense pseudoinverse solve or through a tensor-train factorization that
never materializes the product-feature space. Closed-form references,
benchmark systems, and truncation diagnostics are included.
"""

from .coefficients import CoefficientModel, relative_error
from .estimators import MANDy, SINDy
from .exceptions import (
    ConfigError,
    DegenerateInput,
    EmptySupportWarning,
    ModeMismatch,
    NotFittedError,
    ShapeMismatch,
    SizeCapExceeded,
    StepFailure,
    TTIdentError,
    UnsupportedLayout,
)
from .features import (
    BasisFunction,
    BasisTensorTT,
    Dictionary,
    absolute,
    build_basis_matrix,
    build_basis_tt,
    constant,
    cosine,
    eval_rank_one_cm,
    eval_rank_one_fm,
    monomial,
    sine,
    x_abs_x,
)
from .pseudoinverse import TTPseudoinverse, tt_pinv
from .regression import (
    SindyResult,
    mandy_identify,
    model_residual,
    sindy_lstsq,
    sindy_threshold,
)
from .systems import (
    ChuaParams,
    FpuParams,
    KuramotoParams,
    SnapshotSet,
    chua_dictionary,
    chua_monomial_dictionary,
    chua_rhs,
    exact_coefficients,
    fpu_dictionary,
    fpu_rhs,
    generate_snapshots,
    integrate,
    kuramoto_dictionary,
    kuramoto_rhs,
)
from .tensor_train import (
    DENSE_SIZE_CAP,
    TensorTrain,
    left_unfold,
    matricize,
    orthonormalize_left,
    orthonormalize_right,
    random_tt,
    right_unfold,
    tt_add,
    tt_dot,
    tt_from_full,
    tt_frobenius_norm,
    tt_scale,
    tt_to_full,
    vectorize,
)
from .diagnostics import (
    BenchRecord,
    TruncationProfile,
    run_benchmark,
    truncation_profile,
)

__version__ = "0.1.0"

__all__ = [
    "BasisFunction",
    "BasisTensorTT",
    "BenchRecord",
    "ChuaParams",
    "CoefficientModel",
    "ConfigError",
    "DegenerateInput",
    "DENSE_SIZE_CAP",
    "Dictionary",
    "EmptySupportWarning",
    "FpuParams",
    "KuramotoParams",
    "MANDy",
    "ModeMismatch",
    "NotFittedError",
    "SINDy",
    "ShapeMismatch",
    "SindyResult",
    "SizeCapExceeded",
    "SnapshotSet",
    "StepFailure",
    "TTIdentError",
    "TTPseudoinverse",
    "TensorTrain",
    "TruncationProfile",
    "UnsupportedLayout",
    "absolute",
    "build_basis_matrix",
    "build_basis_tt",
    "chua_dictionary",
    "chua_monomial_dictionary",
    "chua_rhs",
    "constant",
    "cosine",
    "eval_rank_one_cm",
    "eval_rank_one_fm",
    "exact_coefficients",
    "fpu_dictionary",
    "fpu_rhs",
    "generate_snapshots",
    "integrate",
    "kuramoto_dictionary",
    "kuramoto_rhs",
    "left_unfold",
    "mandy_identify",
    "matricize",
    "model_residual",
    "monomial",
    "orthonormalize_left",
    "orthonormalize_right",
    "random_tt",
    "relative_error",
    "right_unfold",
    "run_benchmark",
    "sindy_lstsq",
    "sindy_threshold",
    "sine",
    "tt_add",
    "tt_dot",
    "tt_from_full",
    "tt_frobenius_norm",
    "tt_pinv",
    "tt_scale",
    "tt_to_full",
    "truncation_profile",
    "vectorize",
    "x_abs_x",
]
