"""Figure rendering for CLI reports; every function writes one PNG."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .circlemap import PiecewiseLinearLift, eval_tau
from .mollifier import MollifiedLift, eval_dtau_delta, eval_tau_delta

DPI = 150


def _circle(ax, r, **kw):
    t = np.linspace(0, 2 * np.pi, 256)
    ax.plot(r * np.cos(t), r * np.sin(t), **kw)


def plot_map(lift: PiecewiseLinearLift, path: str,
             m: MollifiedLift = None) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    xs = np.linspace(0, lift.p, 2001)
    tau = [float(eval_tau(lift, _to_frac_grid(x))) for x in xs]
    ax1.plot(xs, tau, "k-", lw=1, label="tau")
    if m is not None:
        ax1.plot(xs, eval_tau_delta(m, xs), "r--", lw=1,
                 label="tau_delta (delta=%g)" % m.delta)
    ax1.set_xlabel("x")
    ax1.set_ylabel("tau(x)")
    ax1.legend(loc="upper left", fontsize=8)

    brks = [float(b) for b in lift.breaks]
    for k, s in enumerate(lift.slopes):
        ax2.plot([brks[k], brks[k + 1]], [float(s)] * 2, "k-", lw=1.5)
    if m is not None:
        ax2.plot(xs, eval_dtau_delta(m, xs), "r--", lw=1)
    ax2.set_xlabel("x")
    ax2.set_ylabel("slope")
    ax2.set_ylim(0, 1.05)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def _to_frac_grid(x):
    from fractions import Fraction
    return Fraction(round(float(x) * 4096), 4096)


def plot_eigenvalues(values, path: str, highlight: complex = None,
                     radii=(1.0, 0.7, 2.0 / 3.0)) -> None:
    fig, ax = plt.subplots(figsize=(4.6, 4.6))
    for r, st in zip(radii, ("k-", "b--", "g:")):
        _circle(ax, r, lw=0.8, linestyle=st[1:] or "-", color=st[0])
    vals = np.asarray(values, dtype=complex)
    ax.plot(vals.real, vals.imag, "r.", ms=4)
    if highlight is not None:
        ax.plot([highlight.real], [highlight.imag], "ko", mfc="none", ms=10)
    lam2 = -(1 + math.sqrt(13)) / 6
    ax.plot([lam2], [0], "g+", ms=10)
    ax.set_aspect("equal")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_sweep(rows, path: str) -> None:
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    ds = [r.delta for r in rows]
    ax1.semilogx(ds, [r.modulus for r in rows], "ro-", label="|lambda_delta|")
    ax1.semilogx(ds, [r.ess_bound for r in rows], "g^-", label="ess bound")
    lam2 = (1 + math.sqrt(13)) / 6
    ax1.axhline(lam2, color="k", lw=0.8, ls=":", label="|lambda2|")
    ax1.axhline(0.75, color="b", lw=0.8, ls="--", label="0.75")
    ax1.axhline(2.0 / 3.0, color="g", lw=0.8, ls=":")
    ax1.legend(fontsize=8)
    ax1.set_ylabel("modulus")
    ax2.loglog(ds, [max(r.gap, 1e-17) for r in rows], "ks-")
    ax2.set_xlabel("delta")
    ax2.set_ylabel("|lambda_delta - lambda2|")
    for r in rows:
        if not r.converged:
            ax2.plot([r.delta], [max(r.gap, 1e-17)], "rx", ms=9)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_eigenfunction(coeffs, path: str, decay=None) -> None:
    from .spectra import eval_eigenfunction
    K = (len(coeffs) - 1) // 2
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    xs = np.linspace(0, 1, 2049)
    ax1.plot(xs, eval_eigenfunction(coeffs, xs), "k-", lw=0.9)
    for d in (1 / 6, 2 / 6, 4 / 6, 5 / 6):
        ax1.axvline(d, color="r", lw=0.5, ls=":")
    ax1.set_xlabel("x")
    ax1.set_ylabel("eigenfunction")
    ns = np.arange(1, K + 1)
    mags = 0.5 * (np.abs(coeffs[K + 1:]) + np.abs(coeffs[K - 1::-1]))
    ax2.semilogy(ns, np.maximum(mags, 1e-300), "b.", ms=2)
    if decay is not None:
        n_used = decay.n_used
        c0 = mags[0] if mags[0] > 0 else 1.0
        guide = c0 * np.exp(-2 * np.pi * decay.rho_hat * (ns[:n_used] - 1))
        ax2.semilogy(ns[:n_used], guide, "r-", lw=0.8,
                     label="rho_hat=%.4f, R2=%.3f" % (decay.rho_hat,
                                                      decay.fit_r2))
        ax2.legend(fontsize=8)
    ax2.set_ylim(1e-16, None)
    ax2.set_xlabel("|n|")
    ax2.set_ylabel("|c_n|")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_approx(entries, path: str) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 4))
    by_label = {}
    for label, a in entries:
        by_label.setdefault(label, []).append(a)
    for label, rows in by_label.items():
        rows = sorted(rows, key=lambda a: a.delta)
        ds = [a.delta for a in rows]
        ax.loglog(ds, [max(a.lhs, 1e-18) for a in rows], ".-", lw=0.8,
                  label=label)
        ax.loglog(ds, [a.rhs for a in rows], "--", lw=0.5, color="gray")
    ax.set_xlabel("delta")
    ax.set_ylabel("L1 error (solid) and bound (dashed)")
    ax.legend(fontsize=6)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_ly(checks, path: str) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ns = [c.n for c in checks]
    ax.semilogy(ns, [max(c.lhs, 1e-18) for c in checks], "k.-", label="var(P^n f)")
    ax.semilogy(ns, [c.rhs for c in checks], "r--", label="F(kappa^n var f + ||f||_1)")
    ax.set_xlabel("n")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
