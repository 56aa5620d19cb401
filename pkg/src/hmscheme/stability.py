"""Amplification-matrix analysis for the three-level scheme.

Stacking two consecutive levels turns the scheme into a one-step map
``Y[n+1] = S Y[n]``.  In the eigenbasis of A the 2N x 2N matrix S splits
into 2x2 blocks, one per eigenvalue, parameterized by ``mu = tau*lambda``
and ``et = eps/tau``:

    S_j = [[(4*et - 2*mu)/(1 + 2*et), (1 - 2*et)/(1 + 2*et)],
           [1, 0]]

Everything here works on those blocks: eigenvalue conditions, norms of
matrix powers, the eigenvalue-separation growth indicator, and the step
bounds implied by different policies for choosing eps.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, NumericalError, SingularIndicator, StepCountOverflow
from .linalg import SymmetricOperator
from .scheme import HMParams

#: hard cap on the power index in norm curves
MAX_POWER_STEPS = 10_000_000
#: relative tolerance treating tau as sitting exactly on the critical step
BOUNDARY_RTOL = 1e-10


def _check_block_params(mu: float, eps_tilde: float) -> None:
    if not (eps_tilde > 0 and math.isfinite(eps_tilde)):
        raise InvalidParams(f"eps_tilde must be positive and finite, got {eps_tilde}")
    if not (mu >= 0 and math.isfinite(mu)):
        raise InvalidParams(f"mu must be nonnegative and finite, got {mu}")


@dataclass(frozen=True)
class AmplificationBlock:
    """One 2x2 diagonal block of the stacked one-step map."""

    mu: float
    eps_tilde: float
    entries: np.ndarray

    @property
    def det(self) -> float:
        """Determinant, -(1 - 2*et)/(1 + 2*et); always below 1 in magnitude."""
        return -(1.0 - 2.0 * self.eps_tilde) / (1.0 + 2.0 * self.eps_tilde)


def build_block(mu: float, eps_tilde: float) -> AmplificationBlock:
    """Assemble the 2x2 block for one mode."""
    _check_block_params(mu, eps_tilde)
    denom = 1.0 + 2.0 * eps_tilde
    entries = np.array(
        [
            [(4.0 * eps_tilde - 2.0 * mu) / denom, (1.0 - 2.0 * eps_tilde) / denom],
            [1.0, 0.0],
        ]
    )
    entries.setflags(write=False)
    return AmplificationBlock(mu=mu, eps_tilde=eps_tilde, entries=entries)


@dataclass(frozen=True)
class BlockEigen:
    """Eigenvalue pair of a block, with the radicand and the pair separation."""

    xi1: complex
    xi2: complex
    discriminant: float
    separation: float


def block_eigenvalues(mu: float, eps_tilde: float) -> BlockEigen:
    """Roots of (1 + 2*et)*xi^2 + (2*mu - 4*et)*xi + (2*et - 1) = 0.

    ``xi1`` carries the principal (plus) square root.  The radicand is
    evaluated as ``mu**2 + 1 - 4*et*mu``, the cancellation-free expansion
    of ``(2*et - mu)**2 + 1 - 4*et**2``.
    """
    _check_block_params(mu, eps_tilde)
    denom = 1.0 + 2.0 * eps_tilde
    disc = mu * mu + 1.0 - 4.0 * eps_tilde * mu
    root = cmath.sqrt(complex(disc, 0.0))
    base = 2.0 * eps_tilde - mu
    xi1 = (base + root) / denom
    xi2 = (base - root) / denom
    return BlockEigen(xi1=xi1, xi2=xi2, discriminant=disc, separation=abs(xi1 - xi2))


def exact_separation(mu: float, eps_tilde: float) -> float:
    """|xi1 - xi2| in closed form: 2*sqrt(|mu^2 + 1 - 4*et*mu|)/(1 + 2*et)."""
    _check_block_params(mu, eps_tilde)
    disc = mu * mu + 1.0 - 4.0 * eps_tilde * mu
    return 2.0 * math.sqrt(abs(disc)) / (1.0 + 2.0 * eps_tilde)


def growth_indicator(lam: float, params: HMParams) -> float:
    """Small-mu approximation of the reciprocal eigenvalue separation.

    ``(tau + 2*eps) / (2*tau*sqrt(|1 - 4*eps*lambda|))`` predicts how far
    the norms of the block powers can grow; it is singular where
    ``4*eps*lambda = 1`` (the double-eigenvalue locus).
    """
    if not (lam >= 0 and math.isfinite(lam)):
        raise InvalidParams(f"lambda must be nonnegative and finite, got {lam}")
    gap = 1.0 - 4.0 * params.eps * lam
    if abs(gap) < 1e-14:
        raise SingularIndicator(
            f"|1 - 4*eps*lambda| = {abs(gap):.3e} at lambda = {lam:.6e}; "
            "the indicator is singular at the double-eigenvalue locus"
        )
    return (params.tau + 2.0 * params.eps) / (2.0 * params.tau * math.sqrt(abs(gap)))


@dataclass(frozen=True)
class SamarskiiVerdict:
    """Critical-step check: stable iff tau < sqrt(4*eps/lambda_max), strictly."""

    stable: bool
    tau_bound: float
    margin: float


def samarskii_check(params: HMParams, lambda_max: float) -> SamarskiiVerdict:
    """Evaluate the critical time step and the strict stability verdict.

    The boundary itself is reported unstable: there one block eigenvalue
    sits at -1, violating "strictly inside the unit disk".
    """
    if not (lambda_max > 0 and math.isfinite(lambda_max)):
        raise InvalidParams(f"lambda_max must be positive and finite, got {lambda_max}")
    tau_bound = math.sqrt(4.0 * params.eps / lambda_max)
    return SamarskiiVerdict(
        stable=params.tau < tau_bound,
        tau_bound=tau_bound,
        margin=tau_bound - params.tau,
    )


def build_amplification(A: SymmetricOperator, params: HMParams) -> np.ndarray:
    """Dense 2N x 2N one-step map on stacked levels (y[n], y[n-1])."""
    et = params.eps_tilde
    denom = 1.0 + 2.0 * et
    eye = np.eye(A.dim)
    top_left = (4.0 * et / denom) * eye - (2.0 * params.tau / denom) * A.entries
    top_right = ((1.0 - 2.0 * et) / denom) * eye
    return np.block([[top_left, top_right], [eye, np.zeros((A.dim, A.dim))]])


def operator_blocks(A: SymmetricOperator, params: HMParams) -> list[AmplificationBlock]:
    """One block per eigenvalue of the operator."""
    return [build_block(params.tau * float(lam), params.eps_tilde) for lam in A.eigenvalues]


def _batch_two_norm(blocks: np.ndarray) -> np.ndarray:
    # vectorized form of the 2x2 closed-form spectral norm
    f = (blocks * blocks).sum(axis=(1, 2))
    det = blocks[:, 0, 0] * blocks[:, 1, 1] - blocks[:, 0, 1] * blocks[:, 1, 0]
    s = np.sqrt(np.maximum(f * f - 4.0 * det * det, 0.0))
    return np.sqrt(0.5 * (f + s))


def _power_norm_matrix(base: np.ndarray, n_max: int) -> np.ndarray:
    """Norms of successive powers for a batch of 2x2 blocks, shape (n_max, J).

    Powers are accumulated by repeated multiplication; eigendecomposition
    would be ill-conditioned near the double-root locus.
    """
    if n_max < 1:
        raise InvalidParams(f"n_max must be >= 1, got {n_max}")
    if n_max > MAX_POWER_STEPS:
        raise StepCountOverflow(f"n_max = {n_max} exceeds the cap {MAX_POWER_STEPS}")
    powers = base.copy()
    out = np.empty((n_max, base.shape[0]))
    out[0] = _batch_two_norm(powers)
    for n in range(1, n_max):
        powers = base @ powers
        out[n] = _batch_two_norm(powers)
    return out


def power_norm_curve(source, params: HMParams | None = None, *, n_max: int, stop_above: float | None = None) -> np.ndarray:
    """Norm of the n-th power of the stacked map for n = 1..n_max.

    ``source`` is either a SymmetricOperator (with ``params``) or an
    iterable of blocks; the curve is the max over blocks of the 2x2 power
    norms.  With ``stop_above`` set, the curve is truncated right after
    the first value exceeding it (overflow guard for unstable sweeps).
    """
    if isinstance(source, SymmetricOperator):
        if params is None:
            raise InvalidParams("params are required when passing an operator")
        blocks = operator_blocks(source, params)
    else:
        blocks = list(source)
        if not blocks:
            raise InvalidParams("need at least one block")
    base = np.stack([b.entries for b in blocks])
    if stop_above is None:
        return _power_norm_matrix(base, n_max).max(axis=1)
    if n_max > MAX_POWER_STEPS:
        raise StepCountOverflow(f"n_max = {n_max} exceeds the cap {MAX_POWER_STEPS}")
    powers = base.copy()
    values = [float(_batch_two_norm(powers).max())]
    for _ in range(1, n_max):
        if values[-1] > stop_above:
            break
        powers = base @ powers
        values.append(float(_batch_two_norm(powers).max()))
    return np.array(values)


def full_power_norm_curve(A: SymmetricOperator, params: HMParams, n_max: int) -> np.ndarray:
    """Same curve from dense 2N x 2N powers; cross-check for the block path."""
    if n_max < 1:
        raise InvalidParams(f"n_max must be >= 1, got {n_max}")
    if n_max > MAX_POWER_STEPS:
        raise StepCountOverflow(f"n_max = {n_max} exceeds the cap {MAX_POWER_STEPS}")
    s = build_amplification(A, params)
    powers = s.copy()
    out = np.empty(n_max)
    out[0] = np.linalg.norm(powers, 2)
    for n in range(1, n_max):
        powers = s @ powers
        out[n] = np.linalg.norm(powers, 2)
    return out


def reference_curves(mu: float) -> tuple[float, float]:
    """Scalar reference factors at mu: exact decay exp(-mu) and implicit Euler 1/(1+mu)."""
    if not (mu >= 0 and math.isfinite(mu)):
        raise InvalidParams(f"mu must be nonnegative and finite, got {mu}")
    return math.exp(-mu), 1.0 / (1.0 + mu)


@dataclass(frozen=True)
class MonotonicityWitness:
    """Positive two-level data whose next level goes negative."""

    mu: float
    y0: float
    y1: float
    y2: float


def monotonicity_witness(params: HMParams) -> MonotonicityWitness | None:
    """Exhibit sign loss: positive (y0, y1) with negative y2, or None.

    For eps/tau > 1/2 the block's second entry is negative and does not
    depend on mu, so a large enough previous level forces the update
    negative; (y0, y1) = (3, 1) works once mu > (3 - 2*et)/2.  The entries
    depend on (mu, et) only, so the witness persists as tau shrinks at
    fixed et.  For eps/tau <= 1/2 this construction has no witness.
    """
    et = params.eps_tilde
    if et <= 0.5:
        return None
    y0, y1 = 3.0, 1.0
    mu = 0.03
    threshold = (3.0 - 2.0 * et) / 2.0
    if mu <= threshold:
        # midpoint of the working range, still inside the stable band mu < 4*et
        mu = 0.5 * (threshold + 4.0 * et)
    block = build_block(mu, et)
    y2 = float(block.entries[0, 0] * y1 + block.entries[0, 1] * y0)
    return MonotonicityWitness(mu=mu, y0=y0, y1=y1, y2=y2)


@dataclass(frozen=True)
class ConstEps:
    """Keep eps fixed as the grid and step are refined."""

    eps: float


@dataclass(frozen=True)
class LinearInTau:
    """Couple eps to the step, eps = c_tilde * tau."""

    c_tilde: float


@dataclass(frozen=True)
class LinearInH:
    """Couple eps to the grid, eps = k * h."""

    k: float


@dataclass(frozen=True)
class PolicyBound:
    """Largest stable step implied by an eps policy, with commentary."""

    policy: str
    parameter: float
    tau_max: float
    note: str


def epsilon_policy_bounds(policy, lambda_max: float | None = None, h: float | None = None) -> PolicyBound:
    """Largest stable time step under a given policy for choosing eps.

    ConstEps keeps the critical step sqrt(4*eps/lambda_max).  LinearInTau
    collapses it to 4*c_tilde/lambda_max, the same order of restriction
    as conventional explicit stepping.  LinearInH, with eps = k*h and a
    second-order operator scaling lambda_max = 4*k/h**2, gives h**1.5
    regardless of k.
    """
    if isinstance(policy, ConstEps):
        if policy.eps <= 0:
            raise InvalidParams(f"eps must be positive, got {policy.eps}")
        if lambda_max is None or lambda_max <= 0:
            raise InvalidParams("ConstEps needs a positive lambda_max")
        return PolicyBound(
            policy="const-eps",
            parameter=policy.eps,
            tau_max=math.sqrt(4.0 * policy.eps / lambda_max),
            note="critical step sqrt(4*eps/lambda_max); hyperbolic relaxation intact",
        )
    if isinstance(policy, LinearInTau):
        if policy.c_tilde <= 0:
            raise InvalidParams(f"c_tilde must be positive, got {policy.c_tilde}")
        if lambda_max is None or lambda_max <= 0:
            raise InvalidParams("LinearInTau needs a positive lambda_max")
        return PolicyBound(
            policy="linear-in-tau",
            parameter=policy.c_tilde,
            tau_max=4.0 * policy.c_tilde / lambda_max,
            note="eps = c*tau collapses the bound to 4*c/lambda_max, the same "
            "order as conventional explicit stepping",
        )
    if isinstance(policy, LinearInH):
        if policy.k <= 0:
            raise InvalidParams(f"k must be positive, got {policy.k}")
        if h is None or h <= 0:
            raise InvalidParams("LinearInH needs a positive grid spacing h")
        return PolicyBound(
            policy="linear-in-h",
            parameter=policy.k,
            tau_max=h**1.5,
            note="eps = k*h with lambda_max = 4*k/h^2 gives tau < h^(3/2), "
            "independent of k",
        )
    raise InvalidParams(f"unknown policy {policy!r}")


@dataclass(frozen=True)
class ModeDiagnostics:
    """Per-eigenvalue stability data."""

    lam: float
    mu: float
    xi1: complex
    xi2: complex
    inv_separation: float
    indicator: float


@dataclass(frozen=True)
class StabilityReport:
    """Critical step, verdict, per-mode eigenvalue data and the power-norm peak."""

    tau_bound: float
    stable: bool
    margin: float
    per_mode: tuple[ModeDiagnostics, ...]
    max_power_norm: float


def stability_report(A: SymmetricOperator, params: HMParams, n_max: int = 1000, overflow_guard: float = 1e12) -> StabilityReport:
    """Assemble the full stability picture for an operator and parameters.

    The eigenvalue verdict (all positive-mode eigenvalue pairs strictly
    inside the unit disk) and the critical-step verdict are equivalent;
    both are computed and cross-checked here.
    """
    verdict = samarskii_check(params, A.lambda_max)
    per_mode = []
    eig_stable = True
    for lam in A.eigenvalues:
        lam = float(lam)
        mu = params.tau * lam
        eig = block_eigenvalues(mu, params.eps_tilde)
        if lam > 0 and max(abs(eig.xi1), abs(eig.xi2)) >= 1.0:
            eig_stable = False
        try:
            indicator = growth_indicator(lam, params)
        except SingularIndicator:
            indicator = math.inf
        inv_sep = 1.0 / eig.separation if eig.separation > 0 else math.inf
        per_mode.append(
            ModeDiagnostics(
                lam=lam, mu=mu, xi1=eig.xi1, xi2=eig.xi2,
                inv_separation=inv_sep, indicator=indicator,
            )
        )
    near_boundary = abs(params.tau - verdict.tau_bound) <= BOUNDARY_RTOL * verdict.tau_bound
    if not near_boundary and eig_stable != verdict.stable:
        raise NumericalError(
            f"eigenvalue verdict ({eig_stable}) disagrees with the critical-step "
            f"verdict ({verdict.stable}) away from the boundary"
        )
    curve = power_norm_curve(A, params, n_max=n_max, stop_above=overflow_guard)
    return StabilityReport(
        tau_bound=verdict.tau_bound,
        stable=verdict.stable,
        margin=verdict.margin,
        per_mode=tuple(per_mode),
        max_power_norm=float(curve.max()),
    )
