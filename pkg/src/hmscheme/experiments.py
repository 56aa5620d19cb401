"""Experiment drivers: sweeps, error studies, convergence tables, norm curves.

Each ``run_*`` function turns a config into plain tables (column names
plus rows of Python scalars).  The CLI writes them as CSV and optionally
renders figures; nothing in this module touches the filesystem except
:func:`write_csv`.

Trajectories are integrated with extended-precision state: the
three-level recursion amplifies storage rounding of the levels by
eps/tau**2, and at the finest steps of the convergence studies that
amplification would push a float64 trajectory's defining-identity
residual past its contracted bound.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .analytic import (
    ErrorBoundInputs,
    HMModalSolution,
    hm_error_bound,
    hm_modal_exact,
    hm_system_exact,
)
from .errors import InsufficientData, InvalidParams, NonFinite, SingularIndicator
from .linalg import SymmetricOperator
from .problems import build_heat1d, heat1d_initial, scalar_problem
from .scheme import BootstrapMethod, HMParams, SchemeState, hm_step, integrate, step_count
from .stability import (
    ConstEps,
    LinearInH,
    LinearInTau,
    _batch_two_norm,
    block_eigenvalues,
    build_block,
    epsilon_policy_bounds,
    growth_indicator,
    power_norm_curve,
    reference_curves,
    stability_report,
)

#: curves are cut right after the first norm above this value
OVERFLOW_GUARD = 1e12
#: dtype used for scheme trajectories inside the experiment drivers
TRAJECTORY_DTYPE = np.longdouble


@dataclass
class Table:
    """Column names plus rows of plain scalars, ready for CSV emission."""

    columns: tuple[str, ...]
    rows: list[tuple]


@dataclass
class ExperimentConfig:
    """Inputs shared by the experiment drivers.

    ``nx`` switches from the scalar mode (eigenvalue ``lam``) to the 1D
    heat problem.  Fields left at None fall back to per-driver defaults.
    """

    lam: float = 1000.0
    eps: float = 2e-4
    tau: float = 3e-5
    t_final: float = 3e-3
    nx: int | None = None
    n_max: int | None = None
    mu_min: float | None = None
    mu_max: float | None = None
    mu_points: int = 400
    halvings: int = 3
    out: Path | None = None
    svg: bool = False

    def validate(self) -> None:
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise InvalidParams(f"lambda must be positive, got {self.lam}")
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise InvalidParams(f"eps must be positive, got {self.eps}")
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise InvalidParams(f"tau must be positive, got {self.tau}")
        if not (self.t_final >= 2.0 * self.tau and math.isfinite(self.t_final)):
            raise InvalidParams(
                f"T = {self.t_final} must cover at least two steps of tau = {self.tau}"
            )
        if self.nx is not None and self.nx < 2:
            raise InvalidParams(f"nx must be at least 2, got {self.nx}")
        if self.n_max is not None and self.n_max < 1:
            raise InvalidParams(f"nmax must be at least 1, got {self.n_max}")
        if self.mu_points < 2:
            raise InvalidParams(f"mu-points must be at least 2, got {self.mu_points}")
        if self.mu_min is not None and self.mu_min < 0:
            raise InvalidParams(f"mu-min must be nonnegative, got {self.mu_min}")
        if self.mu_max is not None:
            low = self.mu_min if self.mu_min is not None else 0.0
            if self.mu_max <= low:
                raise InvalidParams(f"mu-max = {self.mu_max} must exceed mu-min = {low}")
        if self.halvings < 1:
            raise InvalidParams(f"halvings must be at least 1, got {self.halvings}")

    @property
    def params(self) -> HMParams:
        return HMParams(tau=self.tau, eps=self.eps)


def fit_order(taus, errors) -> float:
    """Least-squares slope of log(error) against log(tau)."""
    taus = np.asarray(taus, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if taus.shape != errors.shape or taus.ndim != 1:
        raise InvalidParams("taus and errors must be 1D sequences of equal length")
    if taus.size < 3:
        raise InsufficientData(f"need at least 3 points to fit an order, got {taus.size}")
    if np.any(taus <= 0) or np.any(errors <= 0):
        raise InvalidParams("taus and errors must be positive")
    return float(np.polyfit(np.log(taus), np.log(errors), 1)[0])


@dataclass(frozen=True)
class ConvergenceRow:
    tau: float
    error: float
    observed_order: float | None


@dataclass
class ConvergenceTable:
    """Halving-step error rows with pairwise observed orders."""

    rows: list[ConvergenceRow]

    def __post_init__(self) -> None:
        for prev, cur in zip(self.rows, self.rows[1:]):
            if abs(cur.tau - prev.tau / 2.0) > 1e-12 * prev.tau:
                raise InvalidParams("step sizes must halve between consecutive rows")
        if any(not (r.error > 0) for r in self.rows):
            raise InvalidParams("errors must be positive")

    @property
    def taus(self) -> np.ndarray:
        return np.array([r.tau for r in self.rows])

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.error for r in self.rows])

    def fitted_order(self) -> float:
        return fit_order(self.taus, self.errors)

    def to_table(self) -> Table:
        return Table(
            columns=("tau", "error", "observed_order"),
            rows=[(r.tau, r.error, r.observed_order) for r in self.rows],
        )


def _convergence_table(taus, errors) -> ConvergenceTable:
    rows = [ConvergenceRow(tau=taus[0], error=errors[0], observed_order=None)]
    for i in range(1, len(taus)):
        order = math.log(errors[i - 1] / errors[i]) / math.log(2.0)
        rows.append(ConvergenceRow(tau=taus[i], error=errors[i], observed_order=order))
    return ConvergenceTable(rows)


def _setup_problem(cfg: ExperimentConfig) -> tuple[SymmetricOperator, Callable[[float], np.ndarray]]:
    """Operator plus the exact solution of the perturbed problem as a function of t."""
    if cfg.nx is None:
        A = scalar_problem(cfg.lam)
        sol = HMModalSolution(cfg.lam, cfg.eps)
        return A, lambda t: np.array([hm_modal_exact(sol, t)])
    problem = build_heat1d(cfg.nx)
    y0 = heat1d_initial(problem)
    return problem.operator, lambda t: hm_system_exact(problem.operator, cfg.eps, t, y0)


def local_run(cfg: ExperimentConfig, tau: float):
    """One scheme step from exact seeds at (0, tau).

    Returns (operator, params, seed state, stepped state, exact value at 2*tau).
    """
    A, exact = _setup_problem(cfg)
    params = HMParams(tau=tau, eps=cfg.eps)
    seed = SchemeState(
        n=1,
        t=tau,
        y_prev=exact(0.0).astype(TRAJECTORY_DTYPE),
        y_curr=exact(tau).astype(TRAJECTORY_DTYPE),
    )
    stepped = hm_step(A, None, seed, params)
    return A, params, seed, stepped, exact(2.0 * tau)


def global_run(cfg: ExperimentConfig, tau: float):
    """Integrate to cfg.t_final from an exact seed at one step size.

    Returns (operator, params, trajectory, exact value at the achieved final time).
    """
    A, exact = _setup_problem(cfg)
    params = HMParams(tau=tau, eps=cfg.eps)
    states = integrate(
        A,
        None,
        exact(0.0),
        params,
        cfg.t_final,
        bootstrap_method=BootstrapMethod.EXACT_HM,
        dtype=TRAJECTORY_DTYPE,
    )
    return A, params, states, exact(states[-1].t)


def _relative_error(approx: np.ndarray, exact: np.ndarray) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        diff = np.asarray(approx, dtype=float) - np.asarray(exact, dtype=float)
        value = float(np.linalg.norm(diff) / np.linalg.norm(exact))
    if not math.isfinite(value):
        raise NonFinite(f"relative error degenerated to {value}; run left the stable regime")
    return value


def run_convergence(cfg: ExperimentConfig, mode: str) -> ConvergenceTable:
    """Error-versus-step study; ``mode`` is "local" (one step) or "global" (to T)."""
    cfg.validate()
    if mode not in ("local", "global"):
        raise InvalidParams(f"mode must be 'local' or 'global', got {mode!r}")
    if cfg.halvings < 3:
        raise InvalidParams("a convergence study needs at least 3 halvings (4 step sizes)")
    taus = [cfg.tau / 2**k for k in range(cfg.halvings + 1)]
    errors = []
    for tau in taus:
        if mode == "local":
            _, _, _, stepped, exact2 = local_run(cfg, tau)
            errors.append(_relative_error(stepped.y_curr, exact2))
        else:
            _, _, states, exact_final = global_run(cfg, tau)
            errors.append(_relative_error(states[-1].y_curr, exact_final))
    return _convergence_table(taus, errors)


def run_sweep_mu(cfg: ExperimentConfig) -> Table:
    """Block entries and eigenvalues over a mu range, with reference curves.

    ``exp_neg_mu`` is the exact one-step decay factor and
    ``implicit_euler`` the stability function 1/(1 + mu) of the implicit
    Euler scheme, for comparison against the block's first-row entries.
    """
    cfg.validate()
    et = cfg.params.eps_tilde
    mu_min = cfg.mu_min if cfg.mu_min is not None else 0.0
    mu_max = cfg.mu_max if cfg.mu_max is not None else 8.0 * et
    mus = np.linspace(mu_min, mu_max, cfg.mu_points)
    rows = []
    for mu in mus:
        mu = float(mu)
        block = build_block(mu, et)
        eig = block_eigenvalues(mu, et)
        exact_decay, implicit_euler = reference_curves(mu)
        rows.append(
            (
                mu,
                float(block.entries[0, 0]),
                float(block.entries[0, 1]),
                eig.xi1.real,
                eig.xi2.real,
                eig.xi1.imag,
                exact_decay,
                implicit_euler,
            )
        )
    return Table(
        columns=("mu", "S11", "S12", "Re_xi1", "Re_xi2", "Im_xi1", "exp_neg_mu", "implicit_euler"),
        rows=rows,
    )


def run_hm_error(cfg: ExperimentConfig) -> Table:
    """Perturbation error of the scalar problem against its upper bound.

    Columns: time, measured |exp(-lam*t) - w(t)|, the bound evaluated with
    omega = lam and the running max of |w''|, and eps*|w''(t)| itself.
    """
    cfg.validate()
    points = cfg.n_max if cfg.n_max is not None else 300
    if points < 2:
        raise InvalidParams(f"need at least 2 grid points, got {points}")
    sol = HMModalSolution(cfg.lam, cfg.eps)
    ts = np.linspace(0.0, cfg.t_final, points)
    # 10x refinement so the running max of |w''| is resolved between grid points
    refine = 10
    dense = np.linspace(0.0, cfg.t_final, (points - 1) * refine + 1)
    y2_abs = np.abs(hm_modal_exact(sol, dense, 2))
    running_max = np.maximum.accumulate(y2_abs)
    rows = []
    for i, t in enumerate(ts):
        t = float(t)
        measured = abs(math.exp(-cfg.lam * t) - hm_modal_exact(sol, t))
        bound = hm_error_bound(
            ErrorBoundInputs(eps=cfg.eps, omega=cfg.lam, max_y2=float(running_max[i * refine])),
            t,
        )
        rows.append((t, measured, bound, cfg.eps * float(y2_abs[i * refine])))
    return Table(columns=("t", "measured_error", "bound", "eps_y2"), rows=rows)


def run_powers(cfg: ExperimentConfig) -> tuple[Table, Table]:
    """Norm curves of the stacked-map powers for halving step sizes.

    Returns the curves (one row per step index, step sizes stacked in
    long form) and a summary with the per-tau peak and growth indicator.
    """
    cfg.validate()
    if cfg.nx is None:
        A = scalar_problem(cfg.lam)
    else:
        A = build_heat1d(cfg.nx).operator
    curve_rows = []
    summary_rows = []
    for k in range(cfg.halvings + 1):
        tau = cfg.tau / 2**k
        params = HMParams(tau=tau, eps=cfg.eps)
        n_steps = step_count(cfg.t_final, tau)
        curve = power_norm_curve(A, params, n_max=n_steps, stop_above=OVERFLOW_GUARD)
        for n, value in enumerate(curve, start=1):
            curve_rows.append((tau, n, n * tau, float(value)))
        try:
            indicator = growth_indicator(A.lambda_max, params)
        except SingularIndicator:
            indicator = math.inf
        summary_rows.append((tau, float(curve.max()), indicator))
    return (
        Table(columns=("tau", "n", "t", "norm_Sn"), rows=curve_rows),
        Table(columns=("tau", "max_norm", "indicator"), rows=summary_rows),
    )


def run_block_powers(cfg: ExperimentConfig) -> Table:
    """Norms of block powers over a (mu, power) grid at fixed eps/tau.

    Unstable mu rows are cut right after the first norm above the
    overflow guard; that oversized final value marks the truncation.
    """
    cfg.validate()
    et = cfg.params.eps_tilde
    p_max = cfg.n_max if cfg.n_max is not None else 100
    mu_max = cfg.mu_max if cfg.mu_max is not None else 1.2 * 4.0 * et
    mu_min = cfg.mu_min if cfg.mu_min is not None else mu_max / cfg.mu_points
    mus = np.linspace(mu_min, mu_max, cfg.mu_points)
    base = np.stack([build_block(float(mu), et).entries for mu in mus])
    count = len(mus)
    norms = np.full((p_max, count), np.nan)
    powers = base.copy()
    alive = np.ones(count, dtype=bool)
    values = _batch_two_norm(powers)
    norms[0] = values
    alive &= values <= OVERFLOW_GUARD
    indices = np.arange(count)
    for p in range(1, p_max):
        if not alive.any():
            break
        act = indices[alive]
        powers[act] = base[act] @ powers[act]
        values = _batch_two_norm(powers[act])
        norms[p, act] = values
        alive[act] = values <= OVERFLOW_GUARD
    rows = []
    for j, mu in enumerate(mus):
        for p in range(p_max):
            value = norms[p, j]
            if math.isnan(value):
                break
            rows.append((float(mu), p + 1, float(value)))
    return Table(columns=("mu", "p", "norm_Sjp"), rows=rows)


def run_heat1d(cfg: ExperimentConfig) -> tuple[Table, Table, ConvergenceTable]:
    """Power-norm curves and the global convergence table for the heat problem."""
    heat_cfg = replace(cfg, nx=cfg.nx if cfg.nx is not None else 100)
    heat_cfg.validate()
    curves, summary = run_powers(heat_cfg)
    table = run_convergence(heat_cfg, "global")
    return curves, summary, table


def run_stability_report(cfg: ExperimentConfig) -> tuple[Table, Table]:
    """Per-mode eigenvalue diagnostics plus a one-row verdict summary."""
    cfg.validate()
    A = scalar_problem(cfg.lam) if cfg.nx is None else build_heat1d(cfg.nx).operator
    n_max = cfg.n_max if cfg.n_max is not None else 1000
    report = stability_report(A, cfg.params, n_max=n_max, overflow_guard=OVERFLOW_GUARD)
    mode_rows = [
        (
            m.lam,
            m.mu,
            m.xi1.real,
            m.xi1.imag,
            m.xi2.real,
            m.xi2.imag,
            abs(m.xi1),
            abs(m.xi2),
            m.inv_separation,
            m.indicator,
        )
        for m in report.per_mode
    ]
    per_mode = Table(
        columns=(
            "lambda", "mu", "Re_xi1", "Im_xi1", "Re_xi2", "Im_xi2",
            "abs_xi1", "abs_xi2", "inv_separation", "indicator",
        ),
        rows=mode_rows,
    )
    summary = Table(
        columns=("tau", "eps", "tau_bound", "stable", "margin", "max_power_norm"),
        rows=[(cfg.tau, cfg.eps, report.tau_bound, report.stable, report.margin, report.max_power_norm)],
    )
    return per_mode, summary


def run_policy_bounds(cfg: ExperimentConfig) -> Table:
    """Largest stable step under each eps policy derivable from the config.

    The policy parameters come from the flags themselves: the coupling
    constants are eps/tau for the step-linked policy and eps/h for the
    grid-linked one (the latter only when a grid is configured via nx).
    """
    cfg.validate()
    if cfg.nx is not None:
        problem = build_heat1d(cfg.nx)
        lambda_max = problem.operator.lambda_max
        h = problem.h
    else:
        lambda_max = cfg.lam
        h = None
    bounds = [
        epsilon_policy_bounds(ConstEps(cfg.eps), lambda_max=lambda_max),
        epsilon_policy_bounds(LinearInTau(cfg.eps / cfg.tau), lambda_max=lambda_max),
    ]
    if h is not None:
        bounds.append(epsilon_policy_bounds(LinearInH(cfg.eps / h), h=h))
    return Table(
        columns=("policy", "parameter", "tau_max", "note"),
        rows=[(b.policy, b.parameter, b.tau_max, b.note) for b in bounds],
    )


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.16e}"
    return str(value)


def write_csv(table: Table, path: Path) -> None:
    """Write a table as UTF-8 CSV: header row, full-precision scientific floats."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_format_value(v) for v in row])
