"""Figure rendering for the CLI report paths.

Every figure is written as a PNG next to the delimited output.  Rendering is
deliberately plain: one axes per file, default style, headless backend.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def fig_table1(table: dict, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, lams in table["rows"].items():
        ax.semilogy(table["m"], lams, marker="o", label=f"p = {label}")
    ax.set_xlabel("x-mode m")
    ax.set_ylabel("first even eigenvalue")
    ax.legend()
    _save(fig, path)


def fig_sweep(sweep, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(sweep.points, sweep.lams, marker=".")
    ax.set_xlabel(sweep.axis)
    ax.set_ylabel("first even eigenvalue")
    ax.set_title(f"{sweep.direction}: {sweep.monotone}")
    _save(fig, path)


def fig_spectrum(lams, m, path):
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.vlines(lams, 0, 1)
    ax.set_xlabel(f"even-branch eigenvalues at m={m}")
    ax.set_yticks([])
    _save(fig, path)


def fig_mode(y, phi_vals, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(y, phi_vals)
    ax.set_xlabel("y")
    ax.set_ylabel("phi(y)")
    _save(fig, path)


def fig_hist(values, xlabel, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(np.asarray(values), bins=30)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    _save(fig, path)


def fig_sublevel(report, params, path):
    fig, ax = plt.subplots(figsize=(6, 3))
    ny = report.mask.shape[1]
    ax.imshow(report.mask.T, origin="lower", aspect="auto",
              extent=[0, np.pi, -params.ell, params.ell], cmap="Greys")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"sublevel set, sym-diff {report.sym_diff_fraction:.3f} of the domain")
    _save(fig, path)


def fig_crosscheck(labels, gaps_ip, gaps_fe, path):
    fig, ax = plt.subplots(figsize=(7, 4))
    x = np.arange(len(labels))
    ax.semilogy(x, gaps_ip, "o", label="vs resolvent iteration")
    ax.semilogy(x, gaps_fe, "s", label="vs finite elements")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=60, fontsize=7)
    ax.set_ylabel("relative gap")
    ax.legend()
    _save(fig, path)
