"""Critical-point finding with Newton-MR and gradient-norm descent."""

from ._core import (
    ConfigError,
    CriticalClass,
    DomainError,
    InnerTermination,
    NonConvergenceError,
    OuterConfig,
    OuterTermination,
    RunError,
    autoencoder_data,
    classify,
    dense_hessian,
    fd_gradient_check,
    gradient_norm_descent,
    heron_sqrt,
    heron_step,
    make_himmelblau,
    make_linear_autoencoder,
    make_quadratic,
    make_surrogate,
    minres_solve,
    multi_start,
    newton_mr,
    newton_reciprocal,
    random_orthogonal,
    reciprocal_step,
    resolve_config,
)

__all__ = [name for name in dir() if not name.startswith("_")]
