"""Closed-form solutions and error models for the hyperbolized problem.

Perturbing ``y' = -lam*y`` with a small second time derivative gives

    eps*w'' + w' + lam*w = 0,    w(0) = 1,  w'(0) = -lam,

whose solution is a combination of two decaying exponentials whenever the
discriminant ``1 - 4*lam*eps`` is positive.  These closed forms drive the
error studies: the perturbation error bound, the one-step (local) error
model and the truncation errors of the central differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidParams, NegativeDiscriminant
from .linalg import SymmetricOperator, phi


class HMModalSolution:
    """Two-rate closed form for one mode of the perturbed problem.

    The initial slope is pinned to ``-lam`` (the slope of the unperturbed
    mode), which is exactly the choice that makes the coefficients come
    out as ``c2 = (rate_slow + lam)/(rate_slow - rate_fast)``, ``c1 = 1 - c2``.
    """

    def __init__(self, lam: float, eps: float) -> None:
        if not (lam > 0 and math.isfinite(lam)):
            raise InvalidParams(f"modal eigenvalue must be positive, got {lam}")
        if not (eps > 0 and math.isfinite(eps)):
            raise InvalidParams(f"eps must be positive, got {eps}")
        discriminant = 1.0 - 4.0 * lam * eps
        if discriminant <= 0:
            raise NegativeDiscriminant(
                f"1 - 4*lambda*eps = {discriminant:.6e} for lambda={lam:.6e}, "
                f"eps={eps:.6e}; the two-rate representation needs it positive"
            )
        root = math.sqrt(discriminant)
        self.lam = lam
        self.eps = eps
        self.discriminant = discriminant
        self.rate_slow = (-1.0 + root) / (2.0 * eps)
        self.rate_fast = (-1.0 - root) / (2.0 * eps)
        self.c2 = (self.rate_slow + lam) / (self.rate_slow - self.rate_fast)
        self.c1 = 1.0 - self.c2

    def __repr__(self) -> str:  # pragma: no cover
        return f"HMModalSolution(lam={self.lam:.6g}, eps={self.eps:.6g})"


def hm_modal_exact(sol: HMModalSolution, t, derivative_order: int = 0):
    """Evaluate the modal closed form (or its first/second derivative) at t >= 0.

    ``t`` may be a scalar or an array; the result matches its shape.
    """
    if derivative_order not in (0, 1, 2):
        raise InvalidParams(f"derivative_order must be 0, 1 or 2, got {derivative_order}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidParams("time must be nonnegative")
    k = derivative_order
    value = (
        sol.c1 * sol.rate_slow**k * np.exp(sol.rate_slow * t)
        + sol.c2 * sol.rate_fast**k * np.exp(sol.rate_fast * t)
    )
    return float(value) if value.ndim == 0 else value


def max_abs_second_derivative(sol: HMModalSolution, t_end: float, samples: int = 1000) -> float:
    """Max of |w''| on [0, t_end] by dense sampling.

    The second derivative rises from zero to a single hump and decays,
    so a uniform 1000-point sample resolves the maximum reliably.
    """
    if t_end < 0:
        raise InvalidParams("time must be nonnegative")
    if t_end == 0:
        return abs(hm_modal_exact(sol, 0.0, 2))
    grid = np.linspace(0.0, t_end, max(int(samples), 2))
    return float(np.max(np.abs(hm_modal_exact(sol, grid, 2))))


@dataclass(frozen=True)
class ErrorBoundInputs:
    """Ingredients of the perturbation error bound.

    ``norm_constant`` is the operator-norm constant in the semigroup decay
    bound; it equals 1 for the spectral norm.
    """

    eps: float
    omega: float
    max_y2: float
    norm_constant: float = 1.0

    def __post_init__(self) -> None:
        if self.eps < 0 or self.omega < 0 or self.max_y2 < 0:
            raise InvalidParams("eps, omega and max_y2 must be nonnegative")
        if self.norm_constant < 1.0:
            raise InvalidParams(f"norm_constant must be >= 1, got {self.norm_constant}")


def hm_error_bound(inp: ErrorBoundInputs, t: float) -> float:
    """Upper bound on the perturbation error at time t.

    Evaluates ``C * eps * t * phi(-omega*t) * max|w''|``, which reduces to
    ``C*eps*t*max|w''|`` for omega = 0 and to
    ``C*eps*(1 - exp(-omega*t))/omega * max|w''|`` for omega > 0.
    """
    if t < 0:
        raise InvalidParams("time must be nonnegative")
    return inp.norm_constant * inp.eps * t * phi(-inp.omega * t) * inp.max_y2


def local_error_model(tau: float, eps: float, max_y3: float, max_y4: float) -> tuple[float, float]:
    """Size of the two truncation terms in the one-step error.

    ``max_y3`` and ``max_y4`` bound |w'''| and |w''''| over the step
    window.  The modeled one-step error (excluding the perturbation part)
    is at most ``term1 + term2``.  For fixed eps both terms scale as
    tau^4; for eps proportional to tau they scale as tau^3.
    """
    if tau <= 0 or eps <= 0:
        raise InvalidParams("tau and eps must be positive")
    if max_y3 < 0 or max_y4 < 0:
        raise InvalidParams("derivative bounds must be nonnegative")
    weight = 2.0 * tau**4 / (tau + 2.0 * eps)
    term1 = (max_y3 / 6.0) * weight
    term2 = (max_y4 / 12.0) * weight * eps
    return term1, term2


def central_diff_truncation(y_minus, y_center, y_plus, tau: float):
    """Central first and second differences of three equispaced samples.

    Returns ``((y_plus - y_minus)/(2*tau), (y_plus - 2*y_center + y_minus)/tau**2)``.
    Against a smooth function the first difference overshoots the
    derivative by ``(tau**2/6)*y'''`` and the second by ``(tau**2/12)*y''''``
    at intermediate points.
    """
    if tau <= 0:
        raise InvalidParams(f"tau must be positive, got {tau}")
    first = (y_plus - y_minus) / (2.0 * tau)
    second = (y_plus - 2.0 * y_center + y_minus) / tau**2
    return first, second


def hm_system_exact(A: SymmetricOperator, eps: float, t: float, y0: np.ndarray) -> np.ndarray:
    """Exact solution of the perturbed system at time t, assembled per mode.

    Modal amplitudes come from projecting ``y0`` on the eigenbasis; each
    positive mode evolves by its two-rate closed form (initial slope
    ``-lam`` times the amplitude), zero modes stay constant.
    """
    if eps <= 0:
        raise InvalidParams(f"eps must be positive, got {eps}")
    if t < 0:
        raise InvalidParams("time must be nonnegative")
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (A.dim,):
        raise DimensionMismatch(f"expected a vector of length {A.dim}, got shape {y0.shape}")
    amplitudes = A.eigenvectors.T @ y0
    modal = np.empty_like(amplitudes)
    for j, lam in enumerate(A.eigenvalues):
        if lam == 0.0:
            modal[j] = amplitudes[j]
            continue
        if 1.0 - 4.0 * lam * eps <= 0:
            raise NegativeDiscriminant(
                f"mode eigenvalue lambda={lam:.6e} gives "
                f"1 - 4*lambda*eps = {1.0 - 4.0 * lam * eps:.6e} <= 0 for eps={eps:.6e}"
            )
        modal[j] = amplitudes[j] * hm_modal_exact(HMModalSolution(float(lam), eps), t)
    return A.eigenvectors @ modal
