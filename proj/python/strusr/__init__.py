"""Structure-guided symbolic regression for PDE solutions."""

from ._core import (
    Expr,
    TaylorPrior,
    analytic_prior,
    complexity,
    evolve,
    fitness,
    mae,
    parse,
    parse_for,
    phys_loss,
    pinn_prior,
    problems,
    registry_json,
    sample_collocation,
    sensitivities,
    simplify,
    structure_match,
    taylor_coeffs,
    taylor_loss,
    train_pinn,
)

__all__ = [
    "Expr",
    "TaylorPrior",
    "analytic_prior",
    "complexity",
    "evolve",
    "fitness",
    "mae",
    "parse",
    "parse_for",
    "phys_loss",
    "pinn_prior",
    "problems",
    "registry_json",
    "sample_collocation",
    "sensitivities",
    "simplify",
    "structure_match",
    "taylor_coeffs",
    "taylor_loss",
    "train_pinn",
]
