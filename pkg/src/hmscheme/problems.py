"""Test-problem builders: a scalar mode and the 1D heat equation.

The heat problem lives on (-pi, pi) with homogeneous Dirichlet ends,
discretized by the standard three-point second difference.  The grid
carries ``nx`` interior unknowns with spacing ``h = 2*pi/(nx + 1)``, so
the operator spectrum is exactly ``(4/h^2) * sin^2(k*pi/(2*(nx+1)))``
and stays strictly below ``4/h^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, NumericalError
from .linalg import SymmetricOperator, spectral_decompose

DOMAIN_LENGTH = 2.0 * math.pi


@dataclass(frozen=True)
class Heat1DProblem:
    """Space-discretized heat operator with its grid."""

    nx: int
    length: float
    h: float
    grid: np.ndarray
    operator: SymmetricOperator


def build_heat1d(nx: int) -> Heat1DProblem:
    """Assemble the interior-unknown heat operator (1/h^2) tridiag(-1, 2, -1)."""
    if nx < 2:
        raise InvalidParams(f"nx must be at least 2, got {nx}")
    h = DOMAIN_LENGTH / (nx + 1)
    entries = (
        np.diag(np.full(nx, 2.0))
        - np.diag(np.ones(nx - 1), 1)
        - np.diag(np.ones(nx - 1), -1)
    ) / h**2
    operator = spectral_decompose(entries)
    if not operator.lambda_max < 4.0 / h**2:
        raise NumericalError(
            f"computed lambda_max = {operator.lambda_max:.6e} is not below 4/h^2 = {4.0 / h**2:.6e}"
        )
    grid = -math.pi + h * np.arange(1, nx + 1)
    grid.setflags(write=False)
    return Heat1DProblem(nx=nx, length=DOMAIN_LENGTH, h=h, grid=grid, operator=operator)


def heat1d_analytic_eigenvalues(problem: Heat1DProblem) -> np.ndarray:
    """Closed-form spectrum of the interior-unknown second-difference operator."""
    k = np.arange(1, problem.nx + 1)
    return 4.0 / problem.h**2 * np.sin(k * math.pi / (2.0 * (problem.nx + 1))) ** 2


def heat1d_initial(problem: Heat1DProblem) -> np.ndarray:
    """Grid values of sin(x) + sin(2x) + sin(3x) at the interior nodes."""
    x = problem.grid
    return np.sin(x) + np.sin(2.0 * x) + np.sin(3.0 * x)


def scalar_problem(lam: float) -> SymmetricOperator:
    """One-dimensional operator for a single decaying mode."""
    if not (lam > 0 and math.isfinite(lam)):
        raise InvalidParams(f"lambda must be positive and finite, got {lam}")
    return spectral_decompose(np.array([[lam]]))
