"""Continuous 2-friezes ``(F, G)`` built from a lifted curve and its dual.

``F(x, y) = Gamma(x) . Delta(y)`` where ``Delta`` is the dual lift
``Gamma x Gamma'`` unless a separate curve is supplied.  ``G`` is evaluated
independently as ``Gamma*(x) . Delta*(y)`` so that the frieze relations
between ``F`` and ``G`` are genuine checks rather than definitions.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

import numpy as np

from .curves import PlaneCurve, lift_frame, wronskian, eval_plane_jet
from .jetcore import Jet, JetOrderError, Vec3Jet, cross, dot
from .projective import dual_frame

__all__ = [
    "TwoFrieze",
    "CheckReport",
    "DEFAULT_TOLERANCES",
    "eval_F",
    "eval_G",
    "companion_G",
    "explicit_F",
    "sl3_det",
    "tame_det",
    "dodgson_residuals",
    "self_duality_residual",
    "verify_closed",
    "frieze_grid",
    "grid_csv",
]


@dataclass(frozen=True)
class TwoFrieze:
    """A curve and the dual-plane curve pairing with it.

    With ``delta_curve=None`` the pairing curve is the projective dual, which
    is the case that gives closed friezes for periodic curves.
    """

    curve: PlaneCurve
    delta_curve: PlaneCurve | None = None

    @property
    def dual_pair(self) -> bool:
        return self.delta_curve is None

    @property
    def closed(self) -> bool:
        return self.dual_pair and self.curve.closed

    @property
    def period(self) -> float | None:
        return self.curve.period

    def gamma(self, x, order: int) -> Vec3Jet:
        return lift_frame(self.curve, x, order).frame

    def delta(self, y, order: int) -> Vec3Jet:
        if self.dual_pair:
            return dual_frame(lift_frame(self.curve, y, order + 1))
        return lift_frame(self.delta_curve, y, order).frame

    def gamma_star(self, x, order: int) -> Vec3Jet:
        return dual_frame(self.gamma(x, order + 1))

    def delta_star(self, y, order: int) -> Vec3Jet:
        if self.dual_pair:
            # the dual of the dual lift is the lift itself
            return self.gamma(y, order)
        return dual_frame(self.delta(y, order + 1))


def _pair(u: Vec3Jet, v: Vec3Jet, orders: tuple[int, int]) -> Jet:
    """``u(x) . v(y)`` as a bivariate jet."""
    U = u.embed([0], orders)
    V = v.embed([1], orders)
    return dot(U, V)


def _grid_args(x, y):
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def eval_F(frieze: TwoFrieze, x, y, orders: tuple[int, int] = (2, 2)) -> Jet:
    """Jet of ``F`` at ``(x, y)`` (broadcasting arrays) with mixed partials up to ``orders``."""
    m, n = orders
    if m > 3 or n > 3 or m < 0 or n < 0:
        raise JetOrderError(f"F jets are limited to orders (3, 3), got {orders}")
    x, y = _grid_args(x, y)
    return _pair(frieze.gamma(x, m), frieze.delta(y, n), (m, n))


def eval_G(frieze: TwoFrieze, x, y, orders: tuple[int, int] = (1, 1)) -> Jet:
    """Jet of ``G = Gamma*(x) . Delta*(y)``, computed without using ``F``."""
    m, n = orders
    x, y = _grid_args(x, y)
    return _pair(frieze.gamma_star(x, m), frieze.delta_star(y, n), (m, n))


def companion_G(F: Jet) -> Jet:
    """``G = F F_xy - F_x F_y`` with both leading orders reduced by one."""
    m, n = F.orders[:2]
    if m < 1 or n < 1:
        raise JetOrderError("companion_G needs orders >= (1, 1)")
    target = (m - 1, n - 1) + F.orders[2:]
    Fx, Fy = F.partial(0), F.partial(1)
    Fxy = Fx.partial(1)
    return F.truncate(target) * Fxy - Fx.truncate(target) * Fy.truncate(target)


def explicit_F(curve: PlaneCurve, x, y) -> np.ndarray:
    """``F`` from the affine data ``(f, g)`` through two 2x2 determinants."""
    x, y = _grid_args(x, y)
    Wx = wronskian(curve, x).value
    Wy = wronskian(curve, y).value
    fx, gx = eval_plane_jet(curve, x, 0)
    fy, gy = eval_plane_jet(curve, y, 1)
    f_y, g_y = fy.d(0), gy.d(0)
    df, dg = fy.d(1), gy.d(1)
    bracket = (f_y * dg - g_y * df) - (fx.d(0) * dg - gx.d(0) * df)
    return Wx ** (-1.0 / 3.0) * Wy ** (-2.0 / 3.0) * bracket


def _partials_matrix(F: Jet, size: int) -> np.ndarray:
    if F.orders[0] < size - 1 or F.orders[1] < size - 1:
        raise JetOrderError(f"need mixed partials up to ({size - 1}, {size - 1})")
    # row = y-order, column = x-order
    rows = [np.stack(np.broadcast_arrays(*(F.d(j, i) for j in range(size))), -1) for i in range(size)]
    return np.stack(rows, -2)


def sl3_det(F: Jet) -> np.ndarray:
    """3x3 determinant of mixed partials; equals 1 for an SL3-tiling."""
    return np.linalg.det(_partials_matrix(F, 3))


def tame_det(F: Jet) -> np.ndarray:
    """4x4 determinant of mixed partials; vanishes for a tame tiling."""
    return np.linalg.det(_partials_matrix(F, 4))


# -- grid sweeps ---------------------------------------------------------------


def _axis_points(frieze: TwoFrieze, n: int) -> np.ndarray:
    if frieze.curve.closed:
        return np.arange(n) * (frieze.period / n)
    lo, hi = frieze.curve.domain
    return np.linspace(lo, hi, n)


def _mesh(frieze: TwoFrieze, n: int):
    pts = _axis_points(frieze, n)
    return pts[:, None], pts[None, :]


def dodgson_residuals(frieze: TwoFrieze, grid_n: int = 32) -> dict[str, float]:
    """Compare ``G_x, G_y, G_xy`` with the 2x2 minors of the partials matrix of ``F``."""
    x, y = _mesh(frieze, grid_n)
    F = eval_F(frieze, x, y, (2, 2))
    G = eval_G(frieze, x, y, (1, 1))
    f = F.d
    return {
        "G_x": float(np.max(np.abs(G.d(1, 0) - (f(0, 0) * f(2, 1) - f(0, 1) * f(2, 0))))),
        "G_y": float(np.max(np.abs(G.d(0, 1) - (f(0, 0) * f(1, 2) - f(1, 0) * f(0, 2))))),
        "G_xy": float(np.max(np.abs(G.d(1, 1) - (f(0, 0) * f(2, 2) - f(2, 0) * f(0, 2))))),
    }


def self_duality_residual(frieze: TwoFrieze, grid_n: int = 32) -> float:
    """``sup |F - G|`` over the grid; zero exactly for conics."""
    x, y = _mesh(frieze, grid_n)
    return float(np.max(np.abs(eval_F(frieze, x, y, (0, 0)).value - eval_G(frieze, x, y, (0, 0)).value)))


DEFAULT_TOLERANCES = {
    "frieze_relation_FG": 1e-9,
    "frieze_relation_GF": 1e-9,
    "boundary": 1e-9,
    "periodicity": 1e-9,
    "symmetry": 1e-9,
    "sl3_det_minus_1": 1e-8,
    "tameness_det": 1e-8,
}


@dataclass
class CheckReport:
    frieze_relation_FG: float
    frieze_relation_GF: float
    boundary: dict[str, float]
    periodicity: float
    symmetry: float
    sl3_det_minus_1: float
    tameness_det: float
    positivity_min: float
    grid_n: int = 32

    @property
    def boundary_max(self) -> float:
        return max(self.boundary.values())

    @property
    def closed(self) -> bool:
        tol = DEFAULT_TOLERANCES
        return self.boundary_max <= tol["boundary"] and self.periodicity <= tol["periodicity"]

    @property
    def positive(self) -> bool:
        return self.positivity_min > 0

    def failures(self, tolerances: dict | None = None) -> list[str]:
        tol = dict(DEFAULT_TOLERANCES, **(tolerances or {}))
        values = {
            "frieze_relation_FG": self.frieze_relation_FG,
            "frieze_relation_GF": self.frieze_relation_GF,
            "boundary": self.boundary_max,
            "periodicity": self.periodicity,
            "symmetry": self.symmetry,
            "sl3_det_minus_1": self.sl3_det_minus_1,
            "tameness_det": self.tameness_det,
        }
        if math.isinf(self.periodicity):
            # open frieze: periodicity is reported, not required
            del values["periodicity"]
        bad = [k for k, v in values.items() if not v <= tol[k]]
        if not self.positive:
            bad.append("positivity_min")
        return bad

    def to_dict(self) -> dict:
        out = asdict(self)
        out["closed"] = self.closed
        out["positive"] = self.positive
        return out


def _boundary(F: Jet) -> dict[str, np.ndarray]:
    return {
        "F": np.abs(F.d(0, 0)),
        "F_x": np.abs(F.d(1, 0)),
        "F_y": np.abs(F.d(0, 1)),
        "F_xx-1": np.abs(F.d(2, 0) - 1),
        "F_yy-1": np.abs(F.d(0, 2) - 1),
        "F_xy+1": np.abs(F.d(1, 1) + 1),
    }


def _strip_points(frieze: TwoFrieze, n: int):
    if frieze.curve.closed:
        T = frieze.period
        margin = T / (4 * n)
        x = (np.arange(n) * (T / n))[:, None]
        t = np.linspace(margin, T - margin, n)[None, :]
        return x, x + t
    lo, hi = frieze.curve.domain
    margin = (hi - lo) / (4 * n)
    x = np.linspace(lo, hi - margin, n)[:, None]
    s = np.linspace(0.0, 1.0, n)[None, :]
    y = x + margin + s * (hi - (x + margin))
    return x, y


def verify_closed(frieze: TwoFrieze, grid_n: int = 32) -> CheckReport:
    """Sweep every closed-frieze identity over a ``grid_n x grid_n`` grid."""
    if grid_n < 8:
        raise ValueError("grid_n must be >= 8")
    x, y = _mesh(frieze, grid_n)
    F = eval_F(frieze, x, y, (3, 3))
    G = eval_G(frieze, x, y, (1, 1))
    Gc = companion_G(F.truncate((2, 2)))
    fg = np.max(np.abs(G.value - Gc.value))
    gf = np.max(np.abs(F.value - companion_G(G).value))

    d = _axis_points(frieze, grid_n)
    Fd = eval_F(frieze, d, d, (2, 2))
    Gd = eval_G(frieze, d, d, (2, 2))
    bF, bG = _boundary(Fd), _boundary(Gd)
    boundary = {k: float(max(np.max(bF[k]), np.max(bG[k]))) for k in bF}

    if frieze.closed:
        T = frieze.period
        F0 = F.value
        per = max(
            np.max(np.abs(eval_F(frieze, x + T, y, (0, 0)).value - F0)),
            np.max(np.abs(eval_F(frieze, x, y + T, (0, 0)).value - F0)),
            np.max(np.abs(eval_G(frieze, x + T, y, (0, 0)).value - G.value)),
            np.max(np.abs(eval_G(frieze, x, y + T, (0, 0)).value - G.value)),
        )
    else:
        per = math.inf

    # compare the swapped F with the companion of F, not with the directly
    # evaluated G, which pairs the same two vectors as F(y, x)
    Fswap = eval_F(frieze, y, x, (0, 0)).value
    sym = np.max(np.abs(Gc.value - Fswap))

    sl3 = np.max(np.abs(sl3_det(F) - 1))
    tame = np.max(np.abs(tame_det(F)))

    xs, ys = _strip_points(frieze, grid_n)
    pos = float(np.min(eval_F(frieze, xs, ys, (0, 0)).value))
    return CheckReport(
        frieze_relation_FG=float(fg),
        frieze_relation_GF=float(gf),
        boundary=boundary,
        periodicity=float(per),
        symmetry=float(sym),
        sl3_det_minus_1=float(sl3),
        tameness_det=float(tame),
        positivity_min=pos,
        grid_n=grid_n,
    )


def frieze_grid(frieze: TwoFrieze, grid_n: int = 32) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``(x, y, F, G)`` sampled on the uniform grid, flattened row-major in x then y."""
    x, y = _mesh(frieze, grid_n)
    F = eval_F(frieze, x, y, (0, 0)).value
    G = eval_G(frieze, x, y, (0, 0)).value
    X, Y = np.broadcast_arrays(x, y)
    return X.ravel(), Y.ravel(), F.ravel(), G.ravel()


def grid_csv(columns: dict[str, np.ndarray]) -> str:
    """CSV text with 17 significant digits, columns in the given order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(columns))
    for row in zip(*columns.values()):
        w.writerow([format(v, ".17g") if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()
