"""Matplotlib figure rendering for the CLI report paths (PNG, Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["profile_figure", "corrections_figure", "verification_figure",
           "lemma_figure", "remainder_figure"]

_FIGSIZE = (7.0, 4.5)


def _save(fig, path):
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def profile_figure(hm, path):
    """Layer profile and its linearization potential on the solve window."""
    y = hm.grid.nodes
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=_FIGSIZE)
    ax1.plot(y, hm.field.values, "k-", lw=1.2, label=r"$\nu_0(y)$")
    ax1.plot(y[y > 0], np.sqrt(y[y > 0]), "r--", lw=0.8, label=r"$\sqrt{y}$")
    ax1.set_xlabel("y")
    ax1.set_xlim(-10, 15)
    ax1.legend(loc="upper left", frameon=False)
    ax2.semilogy(y, hm.w0.values, "b-", lw=1.2)
    ax2.set_xlabel("y")
    ax2.set_title(r"$W_0 = 3\nu_0^2 - y$")
    fig.suptitle(f"residual {hm.residual_norm:.2e}")
    return _save(fig, path)


def corrections_figure(cfs, path):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for cf in cfs:
        ax.plot(cf.grid.nodes, cf.field.values, lw=1.1,
                label=f"n={cf.order_n}, d={cf.dimension_d}")
    ax.set_xlim(-12, 20)
    ax.set_xlabel("y")
    ax.set_ylabel(r"$\nu_n(y)$")
    ax.legend(frameon=False)
    return _save(fig, path)


def verification_figure(reports, path):
    """Log-log residuals of the energy expansion with fitted slopes."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for rep in reports:
        delta = np.abs(rep.delta)
        ok = np.isfinite(delta) & (delta > 0)
        ax.loglog(rep.eps[ok], delta[ok], "o-", lw=1.0,
                  label=f"d={rep.dimension_d} {rep.energy_kind}: "
                        f"slope {rep.slope:.2f}")
    ref = np.array([min(r.eps.min() for r in reports),
                    max(r.eps.max() for r in reports)])
    scale = np.abs(reports[0].delta[np.argmax(reports[0].eps)])
    ax.loglog(ref, scale * (ref / reports[0].eps.max()) ** 3, "k--", lw=0.8,
              label=r"$\epsilon^3$ reference")
    ax.set_xlabel(r"$\epsilon$")
    ax.set_ylabel(r"$|\Delta(\epsilon)|$")
    ax.legend(frameon=False, fontsize=8)
    return _save(fig, path)


def lemma_figure(rows, path):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    cases = sorted({(r.case, r.dimension_d) for r in rows})
    xs = np.arange(len(rows))
    ax.axhline(0.0, color="k", lw=0.6)
    labels = []
    for i, r in enumerate(rows):
        ax.plot(i, r.slope - r.expected_slope, "go" if r.passed else "rx")
        labels.append(f"c{r.case}/d{r.dimension_d}/a{r.alpha:g}")
    ax.fill_between(xs, -0.1, 0.1, alpha=0.1, color="g")
    ax.set_xticks(xs)
    ax.set_xticklabels(labels, rotation=90, fontsize=6)
    ax.set_ylabel("fitted slope - expected")
    fig.tight_layout()
    return _save(fig, path)


def remainder_figure(fields_by_eps, path, nu1=None):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for eps, fld in sorted(fields_by_eps.items(), reverse=True):
        ax.plot(fld.grid.nodes, fld.values, lw=1.0, label=f"eps={eps:g}")
    if nu1 is not None:
        y = next(iter(fields_by_eps.values())).grid.nodes
        ax.plot(y, nu1.evaluate(y), "k--", lw=1.0, label=r"$\nu_1$ (limit)")
    ax.set_xlabel("y")
    ax.set_ylabel(r"$R_{0,\epsilon}(y)$")
    ax.legend(frameon=False)
    return _save(fig, path)
