"""Partial weighted MaxSAT: built-in solver and external solver client."""

from ..cnf import SolverVerdict, Status
from .builtin import Budget, BudgetExhausted, solve_builtin
from .external import (ModelValidationError, SolverProtocolError, SolverSpawnError,
                       default_solver_cmd, solve_external)

__all__ = [
    "Budget", "BudgetExhausted", "ModelValidationError", "SolverProtocolError",
    "SolverSpawnError", "SolverVerdict", "Status", "default_solver_cmd",
    "solve_builtin", "solve_external",
]
