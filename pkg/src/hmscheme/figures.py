"""Matplotlib renderers for the experiment tables.

Thin convenience layer: every function takes the in-memory table(s) a
driver produced and writes one figure file next to the CSV.  The CSV is
the contract; these plots exist for quick inspection.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiments import ConvergenceTable, Table


def _column(table: Table, name: str) -> np.ndarray:
    idx = table.columns.index(name)
    return np.array([row[idx] for row in table.rows], dtype=float)


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def sweep_mu_figure(table: Table, path: Path) -> None:
    mu = _column(table, "mu")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(mu, _column(table, "S11"), label="S11")
    ax1.plot(mu, _column(table, "S12"), label="S12")
    ax1.plot(mu, _column(table, "exp_neg_mu"), "k--", lw=0.8, label="exp(-mu)")
    ax1.plot(mu, _column(table, "implicit_euler"), "k:", lw=0.8, label="1/(1+mu)")
    ax1.axhline(-1.0, color="gray", lw=0.5)
    ax1.set_xlabel("mu")
    ax1.set_ylabel("first-row entries")
    ax1.legend()
    ax1.grid(True, alpha=0.3)
    ax2.plot(mu, _column(table, "Re_xi1"), label="Re xi1")
    ax2.plot(mu, _column(table, "Re_xi2"), label="Re xi2")
    ax2.axhline(1.0, color="gray", lw=0.5)
    ax2.axhline(-1.0, color="gray", lw=0.5)
    ax2.set_xlabel("mu")
    ax2.set_ylabel("eigenvalue real parts")
    ax2.legend()
    ax2.grid(True, alpha=0.3)
    _save(fig, path)


def hm_error_figure(table: Table, path: Path) -> None:
    t = _column(table, "t")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(t, _column(table, "measured_error"), label="measured error")
    ax1.plot(t, _column(table, "bound"), "--", label="upper bound")
    ax1.set_xlabel("t")
    ax1.set_ylabel("perturbation error")
    ax1.legend()
    ax1.grid(True, alpha=0.3)
    ax2.plot(t, _column(table, "eps_y2"))
    ax2.set_xlabel("t")
    ax2.set_ylabel("eps * |w''(t)|")
    ax2.grid(True, alpha=0.3)
    _save(fig, path)


def convergence_figure(table: ConvergenceTable, path: Path, label: str = "error") -> None:
    taus = table.taus
    errors = table.errors
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    ax.loglog(taus, errors, "o-", label=label)
    # slope guides anchored at the coarsest point
    for order, style in ((2, ":"), (3, "-."), (4, "--")):
        ax.loglog(taus, errors[0] * (taus / taus[0]) ** order, "k" + style, lw=0.7,
                  label=f"slope {order}")
    ax.set_xlabel("tau")
    ax.set_ylabel("relative error")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def powers_figure(curves: Table, path: Path) -> None:
    taus = sorted(set(row[0] for row in curves.rows), reverse=True)
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    for tau in taus:
        rows = [row for row in curves.rows if row[0] == tau]
        ts = [row[2] for row in rows]
        norms = [row[3] for row in rows]
        ax.plot(ts, norms, label=f"tau = {tau:.3e}")
    ax.set_xlabel("t")
    ax.set_ylabel("||S^n||")
    ax.legend()
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def powers_summary_figure(summary: Table, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    ax.loglog(_column(summary, "indicator"), _column(summary, "max_norm"), "o-")
    ax.set_xlabel("growth indicator")
    ax.set_ylabel("max ||S^n||")
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def block_powers_figure(table: Table, path: Path, max_curves: int = 6) -> None:
    powers = sorted(set(int(row[1]) for row in table.rows))
    # a readable subset of power indices, roughly log-spaced
    if len(powers) > max_curves:
        picks = np.unique(np.geomspace(powers[0], powers[-1], max_curves).astype(int))
    else:
        picks = powers
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    for p in picks:
        rows = [row for row in table.rows if int(row[1]) == p]
        if not rows:
            continue
        ax.semilogy([row[0] for row in rows], [row[2] for row in rows], label=f"p = {p}")
    ax.set_xlabel("mu")
    ax.set_ylabel("||S_j^p||")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def stability_report_figure(per_mode: Table, path: Path) -> None:
    lam = _column(per_mode, "lambda")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(lam, _column(per_mode, "abs_xi1"), ".", label="|xi1|")
    ax1.plot(lam, _column(per_mode, "abs_xi2"), ".", label="|xi2|")
    ax1.axhline(1.0, color="gray", lw=0.5)
    ax1.set_xlabel("lambda")
    ax1.set_ylabel("eigenvalue magnitudes")
    ax1.legend()
    ax1.grid(True, alpha=0.3)
    finite = np.isfinite(_column(per_mode, "indicator"))
    ax2.semilogy(lam[finite], _column(per_mode, "indicator")[finite], ".", label="indicator")
    finite_sep = np.isfinite(_column(per_mode, "inv_separation"))
    ax2.semilogy(lam[finite_sep], _column(per_mode, "inv_separation")[finite_sep], "x",
                 ms=3, label="1/|xi1 - xi2|")
    ax2.set_xlabel("lambda")
    ax2.set_ylabel("growth diagnostics")
    ax2.legend()
    ax2.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def policy_bounds_figure(table: Table, path: Path) -> None:
    names = [row[0] for row in table.rows]
    bounds = [row[2] for row in table.rows]
    fig, ax = plt.subplots(figsize=(5.5, 3.2))
    ax.barh(names, bounds, log=True)
    ax.set_xlabel("largest stable tau")
    ax.grid(True, axis="x", which="both", alpha=0.3)
    _save(fig, path)
