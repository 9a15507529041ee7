"""Jacobi-type orthogonal diagonalization of symmetric tensors."""

from ._core import (
    ContractViolation,
    ParseError,
    best_angle,
    brute_force_angle,
    diag_sq_norm,
    lambda_matrix,
    load_tensors,
    make_test_problem,
    offdiag_sq_norm,
    random_rotation,
    rotate,
    run,
    save_tensors,
    symmetrize,
    verify,
)

__all__ = [
    "ContractViolation",
    "ParseError",
    "best_angle",
    "brute_force_angle",
    "diag_sq_norm",
    "lambda_matrix",
    "load_tensors",
    "make_test_problem",
    "offdiag_sq_norm",
    "random_rotation",
    "rotate",
    "run",
    "save_tensors",
    "symmetrize",
    "verify",
]
