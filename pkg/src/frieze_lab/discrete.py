"""Sampling a continuous 2-frieze on an epsilon lattice.

``G`` lives at ``(x0 + 2i eps, y0 + 2j eps)`` and ``F`` at the odd points
``(x0 + (2i+1) eps, y0 + (2j+1) eps)``, so every node sits in the middle of a
diamond of four nodes of the other kind.  After dividing by ``4 eps^2`` the
diamond rule holds up to ``O(eps^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frieze2 import TwoFrieze, eval_F, eval_G

__all__ = [
    "DiscreteFrieze",
    "ResidualStats",
    "PropagationError",
    "PropagationReport",
    "sample_lattice",
    "diamond_residual",
    "diamond_at",
    "propagate_east",
    "propagate_columns",
    "convergence_order",
    "boundary_row",
    "diagonal_scaling",
    "lattice_rows",
]


class PropagationError(ArithmeticError):
    def __init__(self, message: str, column: int):
        super().__init__(message)
        self.column = column


@dataclass
class DiscreteFrieze:
    """``F`` is ``n x n``, ``G`` is ``(n+1) x (n+1)``; raw samples, no scaling."""

    eps: float
    origin: tuple[float, float]
    F: np.ndarray
    G: np.ndarray

    @property
    def n(self) -> int:
        return self.F.shape[0]


@dataclass(frozen=True)
class ResidualStats:
    # G-nodes checked against the surrounding F diamond, and the reverse
    max_G: float
    mean_G: float
    max_F: float
    mean_F: float

    @property
    def max(self) -> float:
        return max(self.max_G, self.max_F)


def sample_lattice(frieze: TwoFrieze, eps: float, origin=(0.0, 0.0), n: int = 8) -> DiscreteFrieze:
    if eps <= 0:
        raise ValueError("eps must be positive")
    if n < 1:
        raise ValueError("n must be positive")
    x0, y0 = map(float, origin)
    k = np.arange(n + 1)
    gx, gy = x0 + 2 * eps * k, y0 + 2 * eps * k
    fx, fy = gx[:-1] + eps, gy[:-1] + eps
    F = eval_F(frieze, fx[:, None], fy[None, :], (0, 0)).value
    G = eval_G(frieze, gx[:, None], gy[None, :], (0, 0)).value
    return DiscreteFrieze(float(eps), (x0, y0), np.asarray(F), np.asarray(G))


def _diamond(A, B, C, D, centre, eps):
    return np.abs((A * D - B * C) / (4 * eps * eps) - centre)


def diamond_residual(d: DiscreteFrieze) -> ResidualStats:
    """Normalized residuals ``|(AD - BC)/(4 eps^2) - centre|`` over all interior nodes."""
    if d.n < 2:
        raise ValueError("lattice too small for interior nodes")
    F, G, e = d.F, d.G, d.eps
    # G node (i, j), i, j in 1..n-1: A=F[i-1,j-1], D=F[i,j], B=F[i-1,j], C=F[i,j-1]
    rg = _diamond(F[:-1, :-1], F[:-1, 1:], F[1:, :-1], F[1:, 1:], G[1:-1, 1:-1], e)
    # F node (i, j): A=G[i,j], D=G[i+1,j+1], B=G[i,j+1], C=G[i+1,j]
    rf = _diamond(G[:-1, :-1], G[:-1, 1:], G[1:, :-1], G[1:, 1:], F, e)
    return ResidualStats(float(rg.max()), float(rg.mean()), float(rf.max()), float(rf.mean()))


def diamond_at(frieze: TwoFrieze, x: float, y: float, eps: float, centre: str = "G") -> tuple[float, float]:
    """``AD - BC`` around one node (raw) and the normalized residual there."""
    if centre == "G":
        outer, inner = eval_F, eval_G
    elif centre == "F":
        outer, inner = eval_G, eval_F
    else:
        raise ValueError("centre must be 'F' or 'G'")

    def at(dx, dy):
        return float(outer(frieze, x + dx * eps, y + dy * eps, (0, 0)).value)

    ad_bc = at(-1, -1) * at(1, 1) - at(-1, 1) * at(1, -1)
    c = float(inner(frieze, x, y, (0, 0)).value)
    return ad_bc, abs(ad_bc / (4 * eps * eps) - c)


# -- propagation ----------------------------------------------------------------------
#
# In the coordinates a = (u + v)/2, b = (u - v)/2 with u, v the lattice offsets
# in units of eps, every node obeys N(a, b) = N(a-1, b) N(a+1, b) - N(a, b-1) N(a, b+1)
# once values are divided by 4 eps^2.  Moving one step in a is a shift by
# (eps, eps); moving in b is a shift by (eps, -eps).


def _node_value(frieze: TwoFrieze, x0: float, y0: float, eps: float, a: int, b) -> np.ndarray:
    b = np.asarray(b)
    # G nodes where a + b is even, F nodes where it is odd
    x = x0 + (a + b) * eps
    y = y0 + (a - b) * eps
    g = eval_G(frieze, x, y, (0, 0)).value
    f = eval_F(frieze, x, y, (0, 0)).value
    return np.where((a + b) % 2 == 0, g, f)


def propagate_columns(prev: np.ndarray, cur: np.ndarray, steps: int, pivot_tol: float = 1e-6) -> list[np.ndarray]:
    """Apply ``next = (cur + cur_below * cur_above) / prev`` column by column.

    Each step drops one entry from both ends.  Returns the new columns.
    """
    prev, cur = np.asarray(prev, dtype=float), np.asarray(cur, dtype=float)
    out = []
    for k in range(steps):
        if cur.size < 3:
            raise PropagationError("column exhausted", k + 1)
        pivot = prev[1:-1]
        if np.any(np.abs(pivot) < pivot_tol):
            raise PropagationError(f"pivot below {pivot_tol} while building column {k + 1}", k + 1)
        nxt = (cur[1:-1] + cur[:-2] * cur[2:]) / pivot
        out.append(nxt)
        prev, cur = cur[1:-1], nxt
    return out


@dataclass
class PropagationReport:
    columns: list[np.ndarray]
    sampled: list[np.ndarray]
    divergence: list[float]


def propagate_east(
    frieze: TwoFrieze, eps: float, origin: tuple[float, float], height: int, steps: int,
    pivot_tol: float = 1e-6,
) -> PropagationReport:
    """Seed two columns from samples, extend ``steps`` columns eastward, compare with samples.

    Column ``a`` consists of nodes ``b = -height..height`` around
    ``origin + a (eps, eps)``.  Values are scaled by ``1/(4 eps^2)`` for the
    rule and reported back in raw units; divergence is the max raw deviation.
    """
    x0, y0 = origin
    scale = 4 * eps * eps
    b = np.arange(-height, height + 1)
    col = lambda a, bb: _node_value(frieze, x0, y0, eps, a, bb)
    new = propagate_columns(col(0, b) / scale, col(1, b) / scale, steps, pivot_tol)
    cols, sampled, div = [], [], []
    for k, c in enumerate(new, start=1):
        raw = c * scale
        direct = col(k + 1, b[k:len(b) - k])
        cols.append(raw)
        sampled.append(direct)
        div.append(float(np.max(np.abs(raw - direct))))
    return PropagationReport(cols, sampled, div)


# -- convergence ----------------------------------------------------------------------


def convergence_order(frieze: TwoFrieze, eps_list, origin=(0.0, 0.0), n: int = 8) -> dict[str, float]:
    """Fitted slope of ``log(max residual)`` against ``log eps`` for both diamond directions.

    ``n`` is the lattice size at the coarsest ``eps``; finer lattices cover the
    same physical window so the maxima are taken over nested node sets.
    """
    eps_list = sorted(map(float, eps_list), reverse=True)
    if len(eps_list) < 3:
        raise ValueError("need at least three epsilons")
    coarse = eps_list[0]
    maxG, maxF = [], []
    for e in eps_list:
        stats = diamond_residual(sample_lattice(frieze, e, origin, max(2, int(round(n * coarse / e)))))
        maxG.append(stats.max_G)
        maxF.append(stats.max_F)
    le = np.log(eps_list)
    return {
        "G": float(np.polyfit(le, np.log(maxG), 1)[0]),
        "F": float(np.polyfit(le, np.log(maxF), 1)[0]),
    }


def boundary_row(frieze: TwoFrieze, x: float, eps: float) -> np.ndarray:
    """``F(x+2e, x), F(x+e, x-e), F(x, x-2e)``, the diagonal row next to the zeros."""
    xs = np.array([x + 2 * eps, x + eps, x])
    ys = np.array([x, x - eps, x - 2 * eps])
    return eval_F(frieze, xs, ys, (0, 0)).value


def diagonal_scaling(frieze: TwoFrieze, x: float, eps: float, s: float = 1.0) -> float:
    """``F(x + eps s, x - eps s) / (2 eps^2 s^2)``, which tends to 1."""
    v = eval_F(frieze, x + eps * s, x - eps * s, (0, 0)).value
    return float(v / (2 * eps * eps * s * s))


def lattice_rows(d: DiscreteFrieze):
    """Rows ``(i, j, kind, value)`` for CSV output."""
    for kind, arr in (("F", d.F), ("G", d.G)):
        for (i, j), v in np.ndenumerate(arr):
            yield i, j, kind, float(v)
