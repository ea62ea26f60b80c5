"""Composite Simpson quadrature on piecewise-uniform grids.

Grids are built per piece between density breakpoints, with breakpoints as
nodes.  Nodes at interior breakpoints are duplicated so that a piecewise
density can be sampled one-sidedly on each piece without smearing the jump.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Quadrature nodes and Simpson weights over a union of pieces.

    nodes: all nodes including one copy per piece at shared breakpoints
    weights: Simpson weights such that weights @ f(nodes) integrates f
    piece_index: piece owning each node (for one-sided density sampling)
    """

    nodes: np.ndarray
    weights: np.ndarray
    piece_index: np.ndarray
    breakpoints: tuple

    def integrate(self, values: np.ndarray) -> float:
        return float(self.weights @ values)


def _even_count(target: int) -> int:
    n = max(2, int(target))
    return n + (n % 2)


def make_grid(breakpoints, n: int) -> Grid:
    """Piecewise-uniform Simpson grid with roughly n intervals in total.

    Intervals are distributed over the pieces proportionally to length, with
    an even count of at least two per piece (Simpson needs interval pairs).
    """
    b = np.asarray(breakpoints, dtype=float)
    if b.ndim != 1 or len(b) < 2 or np.any(np.diff(b) <= 0):
        raise ValueError("breakpoints must be strictly increasing")
    total = b[-1] - b[0]
    nodes, weights, piece = [], [], []
    for i in range(len(b) - 1):
        length = b[i + 1] - b[i]
        ni = _even_count(round(n * length / total))
        x = np.linspace(b[i], b[i + 1], ni + 1)
        h = length / ni
        w = np.full(ni + 1, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        w *= h / 3.0
        nodes.append(x)
        weights.append(w)
        piece.append(np.full(ni + 1, i))
    return Grid(
        nodes=np.concatenate(nodes),
        weights=np.concatenate(weights),
        piece_index=np.concatenate(piece),
        breakpoints=tuple(b),
    )


def grid_weight_values(w, grid: Grid) -> np.ndarray:
    """Sample an even piecewise density one-sidedly on each grid piece."""
    pw = w.as_piecewise()
    vals = np.asarray(pw.values)
    bp = np.asarray(pw.breakpoints)
    # map each grid node to the density piece containing the interior of its
    # own grid piece (grid breakpoints refine the density breakpoints)
    gb = np.asarray(grid.breakpoints)
    mids = 0.5 * (gb[:-1] + gb[1:])
    dens_piece = np.searchsorted(bp, np.abs(mids), side="left") - 1
    dens_piece = np.clip(dens_piece, 0, len(vals) - 1)
    return vals[dens_piece[grid.piece_index]]


def symmetric_breakpoints(w) -> np.ndarray:
    """Breakpoints of an even density unfolded to [-ell, ell]."""
    pw = w.as_piecewise()
    b = np.asarray(pw.breakpoints)
    return np.concatenate([-b[::-1], b[1:]])
