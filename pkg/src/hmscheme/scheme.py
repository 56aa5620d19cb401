"""Three-level hyperbolized time stepper and reference integrators.

The update advances

    (y[n+1] - y[n-1])/(2*tau) + eps*(y[n+1] - 2*y[n] + y[n-1])/tau**2
        = -A y[n] + f[n]

by solving for ``y[n+1]`` in closed form.  The increment arrangement

    y[n+1] = y[n-1] + (4*et*(y[n] - y[n-1]) + 2*tau*(f[n] - A y[n])) / (1 + 2*et)

with ``et = eps/tau`` is algebraically identical to the textbook solved
form but adds a small correction to ``y[n-1]`` instead of recombining
large terms, which keeps the defining-identity residual at the rounding
floor.  Steps preserve the dtype of the state, so trajectories can be
run in extended precision where the residual contract is tight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .analytic import hm_system_exact
from .errors import DimensionMismatch, InvalidParams, NonFinite, StepCountOverflow
from .linalg import SymmetricOperator

#: hard cap on the number of time steps in a single run
MAX_STEPS = 1_000_000_000

SourceFn = Callable[[float], np.ndarray | None]


@dataclass(frozen=True)
class HMParams:
    """Time step and hyperbolic-term weight, with the derived ratios."""

    tau: float
    eps: float

    def __post_init__(self) -> None:
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise InvalidParams(f"tau must be positive and finite, got {self.tau}")
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise InvalidParams(f"eps must be positive and finite, got {self.eps}")
        # tau**2 must neither underflow to zero nor send eps/tau**2 out of range
        if self.tau * self.tau == 0.0 or not math.isfinite(self.eps / (self.tau * self.tau)):
            raise InvalidParams(
                f"eps/tau**2 is not representable for tau={self.tau}, eps={self.eps}"
            )

    @property
    def eps_tilde(self) -> float:
        """eps/tau, the ratio entering every amplification-block formula."""
        return self.eps / self.tau

    @property
    def kappa(self) -> float:
        """eps/tau**2, the weight of the added second-difference term."""
        return self.eps / self.tau**2

    @classmethod
    def from_kappa(cls, tau: float, kappa: float) -> "HMParams":
        """Build from the second-difference weight, eps = kappa * tau**2."""
        if not (kappa > 0 and math.isfinite(kappa)):
            raise InvalidParams(f"kappa must be positive and finite, got {kappa}")
        return cls(tau=tau, eps=kappa * tau * tau)


@dataclass(frozen=True)
class SchemeState:
    """Two consecutive solution levels (y[n-1], y[n]) at step n, time n*tau."""

    n: int
    t: float
    y_prev: np.ndarray
    y_curr: np.ndarray


class BootstrapMethod(Enum):
    """How to produce the first level y[1] that seeds the three-level recursion."""

    EXPLICIT_EULER = "explicit-euler"
    EXACT_HM = "exact-hm"


def _as_state_vector(v, dim: int) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (dim,):
        raise DimensionMismatch(f"expected a vector of length {dim}, got shape {v.shape}")
    return v


def hm_step(A: SymmetricOperator, f_n, state: SchemeState, params: HMParams) -> SchemeState:
    """Advance one step; ``f_n`` is the source sampled at the state's time (or None)."""
    y = _as_state_vector(state.y_curr, A.dim)
    y_prev = _as_state_vector(state.y_prev, A.dim)
    et = params.eps_tilde
    tau = params.tau
    rhs = 4.0 * et * (y - y_prev) - 2.0 * tau * A.apply(y)
    if f_n is not None:
        rhs = rhs + 2.0 * tau * _as_state_vector(f_n, A.dim)
    y_next = y_prev + rhs / (1.0 + 2.0 * et)
    if not np.all(np.isfinite(y_next)):
        raise NonFinite(f"non-finite update at step {state.n + 1} (t = {(state.n + 1) * tau:.6e})")
    return SchemeState(n=state.n + 1, t=(state.n + 1) * tau, y_prev=y, y_curr=y_next)


def hm_residual(A: SymmetricOperator, f_n, state: SchemeState, next_state: SchemeState, params: HMParams) -> np.ndarray:
    """Residual of the defining three-level identity on a consecutive state pair.

    Evaluated in extended precision: the second-difference term amplifies
    rounding in the stored levels by eps/tau**2, so a float64 evaluation
    would measure its own noise rather than the stored residual.
    """
    ld = np.longdouble
    y_prev = _as_state_vector(state.y_prev, A.dim).astype(ld)
    y = _as_state_vector(state.y_curr, A.dim).astype(ld)
    y_next = _as_state_vector(next_state.y_curr, A.dim).astype(ld)
    tau = ld(params.tau)
    eps = ld(params.eps)
    r = (y_next - y_prev) / (2.0 * tau) + eps * (y_next - 2.0 * y + y_prev) / (tau * tau)
    r = r + A.entries.astype(ld) @ y
    if f_n is not None:
        r = r - _as_state_vector(f_n, A.dim).astype(ld)
    return r.astype(float)


def bootstrap(
    A: SymmetricOperator,
    f0,
    y0,
    params: HMParams,
    method: BootstrapMethod = BootstrapMethod.EXPLICIT_EULER,
    dtype=None,
) -> SchemeState:
    """Produce the step-1 state from the initial vector.

    EXPLICIT_EULER takes one forward Euler step.  EXACT_HM evaluates the
    closed-form solution of the perturbed problem at t = tau (used in
    convergence studies so the seed carries no scheme error); the closed
    form is for the homogeneous problem, so ``f0`` is ignored there.
    """
    y0 = _as_state_vector(y0, A.dim)
    if dtype is not None:
        y0 = y0.astype(dtype)
    if method is BootstrapMethod.EXPLICIT_EULER:
        rate = -A.apply(y0)
        if f0 is not None:
            rate = rate + _as_state_vector(f0, A.dim)
        y1 = y0 + params.tau * rate
    elif method is BootstrapMethod.EXACT_HM:
        y1 = hm_system_exact(A, params.eps, params.tau, np.asarray(y0, dtype=float))
        if dtype is not None:
            y1 = y1.astype(dtype)
    else:
        raise InvalidParams(f"unknown bootstrap method {method!r}")
    return SchemeState(n=1, t=params.tau, y_prev=y0, y_curr=y1)


def step_count(t_final: float, tau: float) -> int:
    """Number of steps to reach (approximately) t_final: floor(T/tau + 1/2)."""
    if math.floor(t_final / tau) > MAX_STEPS:
        raise StepCountOverflow(f"t_final/tau = {t_final / tau:.3e} exceeds {MAX_STEPS:.0e} steps")
    return int(math.floor(t_final / tau + 0.5))


def integrate(
    A: SymmetricOperator,
    f: SourceFn | None,
    y0,
    params: HMParams,
    t_final: float,
    bootstrap_method: BootstrapMethod = BootstrapMethod.EXPLICIT_EULER,
    dtype=None,
) -> list[SchemeState]:
    """Run the scheme to roughly t_final and return the states n = 1..floor(T/tau + 1/2).

    No step-size adjustment is made to hit t_final exactly (a three-level
    recursion cannot change tau without a restart); the achieved final
    time is ``states[-1].t``.  ``f`` is sampled at the step times n*tau.
    """
    if t_final < 2.0 * params.tau:
        raise InvalidParams(
            f"t_final = {t_final:.6e} must cover at least two steps of tau = {params.tau:.6e}"
        )
    nsteps = step_count(t_final, params.tau)
    sample = (lambda t: None) if f is None else f
    states = [bootstrap(A, sample(0.0), y0, params, bootstrap_method, dtype=dtype)]
    while states[-1].n < nsteps:
        current = states[-1]
        states.append(hm_step(A, sample(current.t), current, params))
    return states


def dufort_frankel_step(y_prev, y_curr, tau: float, h: float) -> np.ndarray:
    """Classic leapfrog-with-averaging update for the 1D heat equation.

    Interior Dirichlet nodes with zero boundary values; solves

        (y[i,n+1] - y[i,n-1])/(2*tau)
            = (y[i+1,n] - y[i,n+1] - y[i,n-1] + y[i-1,n])/h**2

    for ``y[i,n+1]``.
    """
    if tau <= 0 or h <= 0:
        raise InvalidParams(f"tau and h must be positive, got tau={tau}, h={h}")
    y_prev = np.asarray(y_prev, dtype=float)
    y_curr = np.asarray(y_curr, dtype=float)
    if y_prev.ndim != 1 or y_prev.shape != y_curr.shape:
        raise DimensionMismatch(
            f"levels must be equal-length vectors, got {y_prev.shape} and {y_curr.shape}"
        )
    a = 2.0 * tau / h**2
    neighbors = np.zeros_like(y_curr)
    neighbors[:-1] += y_curr[1:]
    neighbors[1:] += y_curr[:-1]
    return ((1.0 - a) * y_prev + a * neighbors) / (1.0 + a)


def explicit_euler_integrate(
    A: SymmetricOperator,
    f: SourceFn | None,
    y0,
    tau: float,
    t_final: float,
) -> list[SchemeState]:
    """Forward Euler reference trajectory with the same state/step conventions."""
    if tau <= 0:
        raise InvalidParams(f"tau must be positive, got {tau}")
    if t_final < tau:
        raise InvalidParams(f"t_final = {t_final:.6e} must cover at least one step")
    nsteps = step_count(t_final, tau)
    sample = (lambda t: None) if f is None else f
    y_prev = _as_state_vector(y0, A.dim).astype(float)
    rate = -A.apply(y_prev)
    f0 = sample(0.0)
    if f0 is not None:
        rate = rate + _as_state_vector(f0, A.dim)
    states = [SchemeState(n=1, t=tau, y_prev=y_prev, y_curr=y_prev + tau * rate)]
    while states[-1].n < nsteps:
        s = states[-1]
        rate = -A.apply(s.y_curr)
        fn = sample(s.t)
        if fn is not None:
            rate = rate + _as_state_vector(fn, A.dim)
        y_next = s.y_curr + tau * rate
        if not np.all(np.isfinite(y_next)):
            raise NonFinite(f"non-finite Euler update at step {s.n + 1}")
        states.append(SchemeState(n=s.n + 1, t=(s.n + 1) * tau, y_prev=s.y_curr, y_curr=y_next))
    return states
