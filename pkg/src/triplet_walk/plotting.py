"""Matplotlib figures written next to the delimited output files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .core import BASIS_LABELS  # noqa: E402

BRANCH_STYLES = {
    "000,111": dict(color="tab:blue", linestyle="-"),
    "001,110": dict(color="tab:orange", linestyle="--"),
    "010,101,100,011": dict(color="tab:green", linestyle="-."),
}

_RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "savefig.dpi": 150,
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    return path


def plot_trajectory(z, probabilities, path, title=None) -> Path:
    """|Psi|^2 against z for the eight basis states."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        for k, label in enumerate(BASIS_LABELS):
            ax.plot(z, probabilities[:, k], label=label, lw=1.2)
        ax.set_xlabel("z")
        ax.set_ylabel(r"$|\Psi_{lmn}|^2$")
        ax.set_xlim(z[0], z[-1])
        ax.legend(ncol=4, frameon=False)
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_density_matrix(rho, path, title=None) -> Path:
    """Real part of rho as a heat map with basis tick labels."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(3.6, 3.2))
        re = np.real(rho)
        vmax = max(np.abs(re).max(), 1e-12)
        im = ax.imshow(re, cmap="RdBu_r", vmin=-vmax, vmax=vmax)
        ax.set_xticks(range(8), BASIS_LABELS, rotation=90)
        ax.set_yticks(range(8), BASIS_LABELS)
        fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04, label=r"Re $\rho$")
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_dbeta_maps(dbeta, z, dynamics, path, c3=None) -> Path:
    """One |Psi|^2(dbeta, z) panel per basis state; dotted line at dbeta = -C3."""
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(2, 4, figsize=(9.0, 4.2), sharex=True, sharey=True)
        extent = (dbeta[0], dbeta[-1], z[0], z[-1])
        for k, ax in enumerate(axes.flat):
            ax.imshow(dynamics[:, :, k].T, origin="lower", aspect="auto", extent=extent, cmap="magma")
            if c3 is not None:
                ax.axvline(-c3, color="w", ls=":", lw=1)
            ax.set_title(rf"$\Psi_{{{BASIS_LABELS[k]}}}$")
        for ax in axes[-1]:
            ax.set_xlabel(r"$\Delta\beta$")
        for ax in axes[:, 0]:
            ax.set_ylabel("z")
        return _save(fig, path)


def plot_branches(x, branches: dict, path, xlabel="$C_3$") -> Path:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.0, 2.8))
        for name, values in branches.items():
            ax.plot(x, values, label=rf"$\Psi_{{\{{{name}\}}}}$", **BRANCH_STYLES.get(name, {}))
        ax.set_xlabel(xlabel)
        ax.set_ylabel(r"$|\Psi|^2$ (normalized)")
        ax.set_xlim(x[0], x[-1])
        ax.legend(frameon=False)
        return _save(fig, path)


def plot_branch_maps(c1c2, c3, branches: dict, path) -> Path:
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(1, len(branches), figsize=(3.2 * len(branches), 2.9), sharey=True)
        extent = (c3[0], c3[-1], c1c2[0], c1c2[-1])
        for ax, (name, values) in zip(np.atleast_1d(axes), branches.items()):
            im = ax.imshow(values, origin="lower", aspect="auto", extent=extent, vmin=0, vmax=0.5)
            ax.set_title(rf"$\Psi_{{\{{{name}\}}}}$")
            ax.set_xlabel("$C_3$")
        np.atleast_1d(axes)[0].set_ylabel("$C_1=C_2$")
        fig.colorbar(im, ax=list(np.atleast_1d(axes)), fraction=0.03)
        return _save(fig, path)


def plot_search_trace(trace, path) -> Path:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.0, 2.8))
        evals = [t[0] for t in trace]
        fids = [t[1] for t in trace]
        ax.step(evals, fids, where="post")
        ax.set_xlabel("evaluation")
        ax.set_ylabel("best fidelity")
        return _save(fig, path)
