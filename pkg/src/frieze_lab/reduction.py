"""From a 2-frieze down to a continuous frieze ``H``.

The coefficient ``q`` of the third-order operator is read off ``F`` through a
Cramer ratio, the Hill equation ``Psi'' = -(q/4) Psi`` is integrated with a
fixed-step RK4 scheme, and ``H(x, y) = det(Psi(x), Psi(y))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .curves import LiftedFrame, PowerCurve
from .frieze2 import TwoFrieze, _pair
from .jetcore import Vec3Jet

__all__ = [
    "PivotError",
    "HillError",
    "QProfile",
    "q_from_frieze",
    "q_profile",
    "hill_solve",
    "HillSolution",
    "FriezeH",
    "HValue",
    "eval_H",
    "frieze_pde_residual",
    "reduce_frieze",
    "recover_lift",
    "RecoveredLift",
    "fit_unimodular",
    "power_closed_form_H",
    "power_hill_exponents",
    "h_grid",
]

PIVOT_TOL = 1e-10


class PivotError(ArithmeticError):
    def __init__(self, message: str, x=None):
        super().__init__(message)
        self.x = x


class HillError(ArithmeticError):
    """Integration lost the unit Wronskian; the step is too coarse."""


def default_y0(frieze: TwoFrieze) -> float:
    if frieze.curve.closed:
        return 0.0
    lo, hi = frieze.curve.domain
    return 0.5 * (lo + hi)


def _q_ratio(frieze: TwoFrieze, x, y0):
    x = np.asarray(x, dtype=float)
    F = _pair(frieze.gamma(x, 3), frieze.delta(np.full_like(x, y0), 1), (3, 1))
    f = F.d
    num = f(0, 0) * f(3, 1) - f(3, 0) * f(0, 1)
    den = f(0, 0) * f(1, 1) - f(1, 0) * f(0, 1)
    return num, den


def q_from_frieze(frieze: TwoFrieze, x, y0: float | None = None):
    """``q(x)`` from ``-q = det(F, F_xxx; F_y, F_xxxy) / det(F, F_x; F_y, F_xy)`` at ``y = y0``."""
    y0 = default_y0(frieze) if y0 is None else y0
    num, den = _q_ratio(frieze, x, y0)
    small = np.abs(den) <= PIVOT_TOL
    if np.any(small):
        where = np.broadcast_to(np.asarray(x, dtype=float), small.shape)[small]
        raise PivotError(f"vanishing pivot det(F,F_x;F_y,F_xy) at x={where} (y0={y0})", where)
    return -num / den


@dataclass
class QProfile:
    x: np.ndarray
    q: np.ndarray
    y0_used: np.ndarray
    skipped: np.ndarray


def _alternate_y0(frieze: TwoFrieze, y0: float) -> float:
    if frieze.curve.closed:
        return y0 + 0.5 * frieze.period
    lo, hi = frieze.curve.domain
    return lo if abs(y0 - lo) > abs(y0 - hi) else hi


def q_profile(frieze: TwoFrieze, x, y0: float | None = None) -> QProfile:
    """``q`` at many points, switching to an alternate ``y0`` where the pivot is small.

    The pivot equals ``G(x, y0)``, which vanishes on the diagonal ``x = y0``.
    Points where both choices fail are reported as skipped (``q = nan``).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y0 = default_y0(frieze) if y0 is None else y0
    y1 = _alternate_y0(frieze, y0)
    n0, d0 = _q_ratio(frieze, x, y0)
    n1, d1 = _q_ratio(frieze, x, y1)
    use_alt = np.abs(d1) > np.abs(d0)
    num = np.where(use_alt, n1, n0)
    den = np.where(use_alt, d1, d0)
    skipped = np.abs(den) <= PIVOT_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(skipped, np.nan, -num / den)
    return QProfile(x, q, np.where(use_alt, y1, y0), x[skipped])


# -- Hill equation ----------------------------------------------------------------


@dataclass
class HillSolution:
    """``Psi`` and ``Psi'`` on a uniform grid; rows are nodes, columns the two solutions."""

    x: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray
    q: np.ndarray
    step: float

    def __post_init__(self):
        ddpsi = -0.25 * self.q[:, None] * self.psi
        self._psi = CubicHermiteSpline(self.x, self.psi, self.dpsi, axis=0)
        self._dpsi = CubicHermiteSpline(self.x, self.dpsi, ddpsi, axis=0)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    @property
    def wronskian(self) -> np.ndarray:
        return self.psi[:, 0] * self.dpsi[:, 1] - self.psi[:, 1] * self.dpsi[:, 0]

    @property
    def wronskian_drift(self) -> float:
        return float(np.max(np.abs(self.wronskian - self.wronskian[0])))

    def check_domain(self, x) -> None:
        lo, hi = self.domain
        x = np.asarray(x, dtype=float)
        slack = 1e-12 * max(1.0, abs(hi))
        if np.any(x < lo - slack) or np.any(x > hi + slack):
            raise ValueError(f"points outside the solved range [{lo}, {hi}]")

    def __call__(self, x, nu: int = 0) -> np.ndarray:
        """``Psi^(nu)(x)`` for ``nu`` in 0..2, shape ``x.shape + (2,)``."""
        self.check_domain(x)
        if nu == 0:
            return self._psi(x)
        if nu == 1:
            return self._dpsi(x)
        if nu == 2:
            return self._dpsi(x, 1)
        raise ValueError("only derivatives up to order 2 are stored")


def hill_solve(
    q: Callable[[np.ndarray], np.ndarray],
    domain: tuple[float, float],
    step: float | None = None,
    init=None,
) -> HillSolution:
    """Integrate ``Psi'' + (q/4) Psi = 0`` by classical RK4.

    ``init`` is the 2x2 matrix ``[[psi1, psi2], [psi1', psi2']]`` at the left
    end; the identity by default, so the Wronskian starts at 1.
    """
    x0, x1 = map(float, domain)
    length = x1 - x0
    if length <= 0:
        raise ValueError("empty domain")
    step = length / 1024 if step is None else float(step)
    if not 0 < step <= length / 64:
        raise ValueError(f"step must be in (0, domain/64], got {step}")
    n = int(round(length / step))
    h = length / n
    xs = x0 + h * np.arange(n + 1)
    qn = np.asarray(q(xs), dtype=float)
    qm = np.asarray(q(xs[:-1] + 0.5 * h), dtype=float)
    if not (np.all(np.isfinite(qn)) and np.all(np.isfinite(qm))):
        raise HillError("q is not finite on the integration grid")

    Y = np.empty((n + 1, 2, 2))
    Y[0] = np.eye(2) if init is None else np.asarray(init, dtype=float)

    def rhs(state, qv):
        return np.stack([state[1], -0.25 * qv * state[0]])

    for i in range(n):
        y = Y[i]
        k1 = rhs(y, qn[i])
        k2 = rhs(y + 0.5 * h * k1, qm[i])
        k3 = rhs(y + 0.5 * h * k2, qm[i])
        k4 = rhs(y + h * k3, qn[i + 1])
        Y[i + 1] = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)

    sol = HillSolution(xs, Y[:, 0, :].copy(), Y[:, 1, :].copy(), qn, h)
    drift = sol.wronskian_drift
    if drift > 1e-6:
        raise HillError(f"Wronskian drift {drift:.3e} exceeds 1e-6; reduce the step")
    return sol


@dataclass(frozen=True)
class HValue:
    H: np.ndarray
    H_x: np.ndarray
    H_y: np.ndarray
    H_xy: np.ndarray


@dataclass
class FriezeH:
    solution: HillSolution

    def __call__(self, x, y) -> HValue:
        return eval_H(self, x, y)


def _det2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def eval_H(h: FriezeH, x, y) -> HValue:
    """``H = psi1(x) psi2(y) - psi2(x) psi1(y)`` together with ``H_x, H_y, H_xy``."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    sol = h.solution
    px, py = sol(x), sol(y)
    dx, dy = sol(x, 1), sol(y, 1)
    return HValue(_det2(px, py), _det2(dx, py), _det2(px, dy), _det2(dx, dy))


def frieze_pde_residual(h: FriezeH, grid_n: int = 32) -> float:
    """``max |H H_xy - H_x H_y - 1|`` over a uniform grid of the solved range."""
    if grid_n < 8:
        raise ValueError("grid_n must be >= 8")
    lo, hi = h.solution.domain
    pts = np.linspace(lo, hi, grid_n)
    v = eval_H(h, pts[:, None], pts[None, :])
    return float(np.max(np.abs(v.H * v.H_xy - v.H_x * v.H_y - 1)))


def reduce_frieze(frieze: TwoFrieze, step: float | None = None, y0: float | None = None) -> FriezeH:
    """Extract ``q`` from ``F`` and solve the Hill equation over one period (or the domain)."""
    if frieze.curve.closed:
        domain = (0.0, frieze.period)
    else:
        domain = frieze.curve.domain

    def q(x):
        prof = q_profile(frieze, x, y0)
        if prof.skipped.size:
            raise PivotError(f"no usable pivot at x={prof.skipped}", prof.skipped)
        return prof.q

    return FriezeH(hill_solve(q, domain, step))


# -- basis fitting and closed forms --------------------------------------------------


def fit_unimodular(psi: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, float]:
    """Best ``A`` in SL2 with ``psi @ A.T ~ target`` (rows are sample points).

    Least squares first, then rescaled to determinant one.  Returns ``A`` and
    the max residual of the fitted basis.
    """
    A_t, *_ = np.linalg.lstsq(psi, target, rcond=None)
    A = A_t.T
    d = np.linalg.det(A)
    if d <= 0:
        raise ValueError("best-fit basis change is not orientation preserving")
    A = A / np.sqrt(d)
    return A, float(np.max(np.abs(psi @ A.T - target)))


def power_closed_form_H(alpha: tuple[float, float], x, y) -> np.ndarray:
    """``(x^a1 y^a2 - x^a2 y^a1) / (a2 - a1)``."""
    a1, a2 = alpha
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return (x**a1 * y**a2 - x**a2 * y**a1) / (a2 - a1)


def power_hill_exponents(curve: PowerCurve) -> tuple[float, float]:
    """Exponents of ``x^alpha`` solving the Hill equation for a power curve.

    With ``s = ab + bc + ca`` the operator coefficient is ``q = (s - 2)/x^2``
    and ``alpha(alpha - 1) = (2 - s)/4``.
    """
    a, b, c = curve.abc
    s = a * b + b * c + c * a
    disc = 3.0 - s
    if disc < 0:
        raise ValueError("oscillatory exponents; no real power basis")
    r = np.sqrt(disc)
    return (1 - r) / 2, (1 + r) / 2


# -- recovering a lift ----------------------------------------------------------------


@dataclass(frozen=True)
class RecoveredLift:
    """``(F, F_y, F_yy)(x, y0)`` viewed as a curve in ``x``."""

    frieze: TwoFrieze
    y0: float

    def frame(self, x, order: int = 3) -> LiftedFrame:
        x = np.asarray(x, dtype=float)
        F = _pair(self.frieze.gamma(x, order), self.frieze.delta(np.full_like(x, self.y0), 2), (order, 2))
        comps = [F.coeff(1, k) * math.factorial(k) for k in range(3)]
        return LiftedFrame(x, Vec3Jet(*comps))


def recover_lift(frieze: TwoFrieze, y0: float | None = None) -> RecoveredLift:
    if not frieze.dual_pair:
        raise ValueError("recover_lift needs a frieze paired with its dual curve")
    return RecoveredLift(frieze, default_y0(frieze) if y0 is None else float(y0))


def h_grid(h: FriezeH, grid_n: int = 32):
    lo, hi = h.solution.domain
    pts = np.linspace(lo, hi, grid_n)
    X, Y = np.meshgrid(pts, pts, indexing="ij")
    return X.ravel(), Y.ravel(), eval_H(h, X, Y).H.ravel()
