"""Dense phase-1 simplex for small feasibility problems.

Decides whether ``{x >= 0 : A_ub x <= b_ub, A_ge x >= b_ge}`` is nonempty.
Bland's rule is used throughout, so the method terminates on degenerate
problems (the Slepian-Wolf constraint sets are highly degenerate).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_EPS = 1e-12


@dataclass
class Phase1Result:
    feasible: bool
    x: np.ndarray | None
    infeasibility: float
    pivots: int


def phase1(
    A_ub: np.ndarray,
    b_ub: np.ndarray,
    A_ge: np.ndarray,
    b_ge: np.ndarray,
    tol: float = 1e-9,
    max_pivots: int = 50_000,
) -> Phase1Result:
    """Find a point of the polyhedron, relaxing every row by ``tol``."""
    A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
    A_ge = np.atleast_2d(np.asarray(A_ge, dtype=float))
    n = max(A_ub.shape[1], A_ge.shape[1])
    A_ub = A_ub.reshape(-1, n)
    A_ge = A_ge.reshape(-1, n)
    A = np.vstack([A_ub, A_ge])
    b = np.concatenate([np.asarray(b_ub, float) + tol, np.asarray(b_ge, float) - tol])
    slack_sign = np.concatenate([np.ones(len(A_ub)), -np.ones(len(A_ge))])
    m = A.shape[0]

    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    slack_sign[flip] *= -1

    # columns: x (n) | slacks (m) | artificials (only rows whose slack is -1)
    needs_art = np.flatnonzero(slack_sign < 0)
    n_art = len(needs_art)
    ncols = n + m + n_art
    T = np.zeros((m + 1, ncols + 1))
    T[:m, :n] = A
    T[np.arange(m), n + np.arange(m)] = slack_sign
    basis = n + np.arange(m)
    for k, row in enumerate(needs_art):
        col = n + m + k
        T[row, col] = 1.0
        basis[row] = col
    T[:m, -1] = b
    # phase-1 objective: minimise sum of artificials, expressed in reduced form
    T[m, n + m:ncols] = 1.0
    for row in needs_art:
        T[m] -= T[row]

    pivots = 0
    while True:
        reduced = T[m, :ncols]
        candidates = np.flatnonzero(reduced < -PIVOT_EPS)
        if candidates.size == 0:
            break
        j = int(candidates[0])
        col = T[:m, j]
        pos = np.flatnonzero(col > PIVOT_EPS)
        if pos.size == 0:  # pragma: no cover - phase 1 is bounded below by 0
            break
        ratios = T[pos, -1] / col[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
        i = int(ties[np.argmin(basis[ties])])
        T[i] /= T[i, j]
        others = np.arange(m + 1) != i
        T[others] -= np.outer(T[others, j], T[i])
        basis[i] = j
        pivots += 1
        if pivots >= max_pivots:  # pragma: no cover
            raise RuntimeError("simplex pivot limit reached")

    infeas = float(-T[m, -1])
    x = np.zeros(ncols)
    x[basis] = T[:m, -1]
    point = np.clip(x[:n], 0.0, None)
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    feasible = infeas <= max(1e-3 * tol, 1e-13) * scale
    return Phase1Result(feasible, point if feasible else None, max(infeas, 0.0), pivots)
