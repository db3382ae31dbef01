"""qcflab: linearized quasicontinuum operators and stationary iterative solvers on a 1D chain."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConvergenceError,
    DimensionMismatch,
    NoSignChange,
    NotSPD,
    NotSymmetric,
    QCError,
    SingularMatrix,
    UnstableParams,
    ValidationError,
)
from .model import (  # noqa: F401
    NORM_KINDS,
    Displacement,
    ModelParams,
    NormKind,
    finite_differences,
    inner_product,
    make_params,
    vector_norm,
    weighted_norm,
)
