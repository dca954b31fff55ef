"""Projective duality and the third-order operator attached to a lifted curve.

A unimodular lift satisfies ``Gamma''' + q Gamma' + r Gamma = 0``.  Here ``q``
and ``r`` are recovered by a least-squares solve of that vector identity, which
fixes the sign convention unambiguously: the unit circle has ``q = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import LiftedFrame, PlaneCurve, lift_frame
from .jetcore import JetOrderError, Vec3Jet, cross

__all__ = [
    "OperatorError",
    "OperatorCoeffs",
    "dual_frame",
    "operator_coeffs",
    "operator_coeffs_from_frame",
    "length_density",
    "conic_test",
    "sample_grid",
]


class OperatorError(ArithmeticError):
    """The frame does not satisfy a third-order linear equation to tolerance."""


@dataclass(frozen=True)
class OperatorCoeffs:
    x: np.ndarray
    q: np.ndarray
    r: np.ndarray
    residual: float
    # the two determinant shortcuts, kept for debugging sign conventions
    det_g_g2_g3: np.ndarray
    det_g1_g2_g3: np.ndarray
    dq: np.ndarray | None = None
    dr: np.ndarray | None = None

    @property
    def k(self) -> np.ndarray:
        return -self.q

    @property
    def v(self) -> np.ndarray:
        return -self.r


def dual_frame(frame: LiftedFrame | Vec3Jet) -> Vec3Jet:
    """Lift of the dual curve, ``Gamma x Gamma'``, one order lower than the input."""
    G = frame.frame if isinstance(frame, LiftedFrame) else frame
    k = G.orders[0]
    if k < 1:
        raise JetOrderError("dual frame needs a frame of order >= 1")
    target = (k - 1,) + G.orders[1:]
    return cross(G.truncate(target), G.partial(0))


def _as_matrix(*cols: np.ndarray) -> np.ndarray:
    # columns with leading component axis -> (..., 3, ncols)
    return np.moveaxis(np.stack(cols, axis=1), (0, 1), (-2, -1))


def _det(*cols: np.ndarray) -> np.ndarray:
    return np.linalg.det(_as_matrix(*cols))


def _lstsq_pair(A: np.ndarray, B: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Solve ``a*A + b*B = rhs`` pointwise in the least-squares sense."""
    M = _as_matrix(A, B)
    b = np.moveaxis(rhs, 0, -1)[..., None]
    Q, R = np.linalg.qr(M)
    sol = np.linalg.solve(R, np.swapaxes(Q, -1, -2) @ b)[..., 0]
    res = M @ sol[..., None] - b
    scale = max(1.0, float(np.max(np.abs(b))))
    return sol[..., 0], sol[..., 1], float(np.max(np.abs(res))) / scale


def operator_coeffs_from_frame(
    G: LiftedFrame | Vec3Jet, x=None, *, with_derivatives: bool = False, tol: float = 1e-6
) -> OperatorCoeffs:
    """``(q, r)`` with ``Gamma''' + q Gamma' + r Gamma = 0`` for a frame of order >= 3.

    With ``with_derivatives`` (frame order >= 4) also returns ``q'`` and
    ``r'`` from the differentiated identity.
    """
    if isinstance(G, LiftedFrame):
        x = G.x if x is None else x
        G = G.frame
    need = 4 if with_derivatives else 3
    if G.orders[0] < need:
        raise JetOrderError(f"operator extraction needs frame order >= {need}")
    g0, g1, g2, g3 = (G.d(k) for k in range(4))
    q, r, res = _lstsq_pair(g1, g0, -g3)
    if res > tol:
        raise OperatorError(f"frame violates Gamma''' + q Gamma' + r Gamma = 0 (residual {res:.3e})")
    dq = dr = None
    if with_derivatives:
        g4 = G.d(4)
        dq, dr, res2 = _lstsq_pair(g1, g0, -(g4 + q * g2 + r * g1))
        if res2 > tol:
            raise OperatorError(f"differentiated operator identity fails (residual {res2:.3e})")
        res = max(res, res2)
    return OperatorCoeffs(
        x=np.asarray(x) if x is not None else None,
        q=q,
        r=r,
        residual=res,
        det_g_g2_g3=_det(g0, g2, g3),
        det_g1_g2_g3=_det(g1, g2, g3),
        dq=dq,
        dr=dr,
    )


def operator_coeffs(curve: PlaneCurve, x, *, with_derivatives: bool = False) -> OperatorCoeffs:
    frame = lift_frame(curve, x, 4 if with_derivatives else 3)
    return operator_coeffs_from_frame(frame, with_derivatives=with_derivatives)


def length_density(curve: PlaneCurve, x) -> np.ndarray:
    """``h = v - k'/2`` where ``Gamma''' = k Gamma' + v Gamma``; zero exactly on conics."""
    oc = operator_coeffs(curve, x, with_derivatives=True)
    return oc.v + 0.5 * oc.dq  # k' = -q'


def sample_grid(curve: PlaneCurve, n: int) -> np.ndarray:
    """``n`` uniform sample points: one period for closed curves, the domain otherwise."""
    if curve.closed:
        return np.arange(n) * (curve.period / n)
    lo, hi = curve.domain
    return np.linspace(lo, hi, n)


def conic_test(curve: PlaneCurve, grid_n: int = 64, tol: float = 1e-8) -> tuple[bool, float]:
    """Whether ``|h| <= tol`` on a grid, together with the observed ``sup |h|``."""
    if grid_n < 8:
        raise ValueError("conic_test needs grid_n >= 8")
    sup = float(np.max(np.abs(length_density(curve, sample_grid(curve, grid_n)))))
    return sup <= tol, sup
