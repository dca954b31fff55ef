"""Deformations of closed curves and the two 2-forms compared in the continuum limit.

A deformation is a straight line ``base + s * direction`` in Fourier
coefficient space.  Every quantity is differentiated in ``s`` exactly by
carrying a first-order jet in ``s`` through the lift.

The continuous form is evaluated on ``A = ln F(x, b)`` and ``B = ln G(x, b)``
where ``b`` is the gauge base point.  Its integrand is smooth and periodic (the
double zero of ``F`` at ``x = b`` cancels against the triple zero of its
variation), so the periodic midpoint rule converges spectrally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import ConicCurve, FourierCurve, FourierSeries, PlaneCurve, lift_affine
from .jetcore import Jet, Vec3Jet, cross, dot, log

__all__ = [
    "SymplecticError",
    "DeformationFamily",
    "GaugeFixedData",
    "LimitTable",
    "as_fourier",
    "affine_direction",
    "gauge_fix",
    "gauge_matrix",
    "directional_data",
    "omega_continuous",
    "omega_log_form",
    "cluster_form_discrete",
    "limit_check",
    "quadrature_nodes",
]

NODE_TOL = 1e-8
COORD_TOL = 1e-6


class SymplecticError(ArithmeticError):
    pass


def as_fourier(curve: PlaneCurve) -> FourierCurve:
    if isinstance(curve, FourierCurve):
        return curve
    if isinstance(curve, ConicCurve):
        return curve.as_fourier()
    raise TypeError("deformations need a periodic Fourier or conic base curve")


@dataclass(frozen=True)
class DeformationFamily:
    """``curve(s) = base + s * (df, dg)`` in coefficient space."""

    base: FourierCurve
    df: FourierSeries = FourierSeries()
    dg: FourierSeries = FourierSeries()

    def __post_init__(self):
        object.__setattr__(self, "base", as_fourier(self.base))

    @classmethod
    def from_spec(cls, base: PlaneCurve, spec: dict) -> "DeformationFamily":
        """``spec`` is ``{"f": {...}, "g": {...}}`` with the curve-spec series layout."""
        from .curves import _series  # shared validation of series objects

        unknown = set(spec) - {"f", "g"}
        if unknown:
            raise ValueError(f"unknown direction keys {sorted(unknown)}")
        zero = {"const": 0.0}
        return cls(base, _series(spec.get("f", zero), "f"), _series(spec.get("g", zero), "g"))

    def to_spec(self) -> dict:
        return {"f": self.df.to_spec(), "g": self.dg.to_spec()}

    @property
    def period(self) -> float:
        return self.base.T

    def curve_at(self, s: float) -> FourierCurve:
        return FourierCurve(self.base.T, self.base.f + self.df.scaled(s), self.base.g + self.dg.scaled(s))

    def scaled(self, alpha: float) -> "DeformationFamily":
        return DeformationFamily(self.base, self.df.scaled(alpha), self.dg.scaled(alpha))

    def __add__(self, other: "DeformationFamily") -> "DeformationFamily":
        return DeformationFamily(self.base, self.df + other.df, self.dg + other.dg)

    def is_zero(self) -> bool:
        vals = (self.df.const, *self.df.cos, *self.df.sin, self.dg.const, *self.dg.cos, *self.dg.sin)
        return all(v == 0 for v in vals)

    def plane_jets(self, x, order: int) -> tuple[Jet, Jet]:
        """Jets of ``f`` and ``g`` in ``(x, s)`` at ``s = 0``, orders ``(order, 1)``."""
        w = 2 * math.pi / self.base.T
        x = np.asarray(x, dtype=float)
        out = []
        for base, direction in ((self.base.f, self.df), (self.base.g, self.dg)):
            d = np.stack([base.derivs(x, order, w), direction.derivs(x, order, w)], axis=1)
            out.append(Jet.from_derivs(d, nvars=2))
        return out[0], out[1]

    def lift(self, x, order: int) -> Vec3Jet:
        """Unimodular lift of the family, a jet of orders ``(order, 1)`` in ``(x, s)``."""
        f, g = self.plane_jets(x, order + 2)
        return lift_affine(f, g, order, x)


def affine_direction(base: PlaneCurve, A) -> DeformationFamily:
    """The infinitesimal affine motion ``(f, g) -> A[:, :2] (f, g) + A[:, 2]``.

    Affine maps act projectively, so such directions are invisible to both forms.
    """
    base = as_fourier(base)
    A = np.asarray(A, dtype=float)
    if A.shape != (2, 3):
        raise ValueError("A must be a 2x3 matrix")

    def comb(row):
        return base.f.scaled(row[0]) + base.g.scaled(row[1]) + FourierSeries(row[2])

    return DeformationFamily(base, comb(A[0]), comb(A[1]))


# -- gauge fixing ---------------------------------------------------------------------


def _frame_at(family: DeformationFamily, point: float) -> tuple[Vec3Jet, Vec3Jet, Vec3Jet]:
    """``Gamma, Gamma', Gamma''`` at ``point`` as jets in ``s`` alone."""
    fr = family.lift(np.asarray(float(point)), 2)
    return tuple(fr.coeff(0, k).scale(math.factorial(k)) for k in range(3))


def _gauge_rows(family: DeformationFamily, base_point: float) -> tuple[Vec3Jet, Vec3Jet, Vec3Jet]:
    g0, g1, g2 = _frame_at(family, base_point)
    # rows of M = fixed frame times the inverse of the frame at the base point
    return cross(g0, g1), -cross(g2, g0), cross(g1, g2)


def gauge_matrix(family: DeformationFamily, base_point: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """``M(0)`` and ``dM/ds(0)``; ``M(s)`` carries the frame at the base point to the fixed frame."""
    rows = _gauge_rows(family, base_point)
    M0 = np.stack([r.d(0) for r in rows])
    dM = np.stack([r.d(1) for r in rows])
    return M0, dM


def gauge_fix(family: DeformationFamily, x, order: int = 2, base_point: float = 0.0) -> Vec3Jet:
    """``M(s) Gamma_s(x)`` as a jet of orders ``(order, 1)``.

    At the base point this is the frame ``(0,0,1), (0,-1,0), (1,0,0)`` for every ``s``.
    """
    x = np.asarray(x, dtype=float)
    G = family.lift(x, order)
    rows = [r.embed([1], (order, 1)) for r in _gauge_rows(family, base_point)]
    return Vec3Jet(*(dot(r, G) for r in rows))


# -- nodewise data --------------------------------------------------------------------


@dataclass
class GaugeFixedData:
    """Values and ``s``-derivatives at the nodes, for one deformation direction.

    ``F``, ``Fx``, ``G``, ``Gx`` are ``F(x, b)``, ``F_x(x, b)``, ``G(x, b)``,
    ``G_x(x, b)`` and ``uF`` etc. their variations.  ``A``, ``dA``, ``B``,
    ``dB`` are ``u(ln y1)``, its x-derivative, ``u(ln W)`` and its
    x-derivative, computed from the gauge-fixed coordinates ``y1, y2``.
    """

    x: np.ndarray
    F: np.ndarray
    Fx: np.ndarray
    G: np.ndarray
    Gx: np.ndarray
    uF: np.ndarray
    uFx: np.ndarray
    uG: np.ndarray
    uGx: np.ndarray
    A: np.ndarray
    dA: np.ndarray
    B: np.ndarray
    dB: np.ndarray
    rejected: np.ndarray

    @property
    def y1(self) -> np.ndarray:
        return self.F

    @property
    def W(self) -> np.ndarray:
        return self.G

    @property
    def a1(self) -> np.ndarray:
        return -self.Fx / self.F

    @property
    def a2(self) -> np.ndarray:
        return self.Fx / self.F - self.Gx / self.G


def _pair_s(u: Vec3Jet, v: Vec3Jet, xorder: int) -> Jet:
    """``u(x) . v`` where ``v`` is a jet in ``s`` only, broadcast along ``x``."""
    return dot(u, v.embed([1], (xorder, 1)))


def directional_data(family: DeformationFamily, nodes, base_point: float = 0.0) -> GaugeFixedData:
    """Evaluate everything both forms need at ``nodes`` for one direction.

    ``F`` and ``G`` are taken straight from the family lift (they are
    invariant under the ambient group), while ``A`` and ``B`` come from the
    gauge-fixed coordinates.  Nodes where ``|F|`` or ``|G|`` drops below
    ``1e-8`` are flagged as rejected.
    """
    x = np.asarray(nodes, dtype=float)
    lift = family.lift(x, 2)
    g0, g1, _ = _frame_at(family, base_point)
    star_b = cross(g0, g1)
    F = _pair_s(lift.truncate((1, 1)), star_b, 1)
    star_x = cross(lift.truncate((1, 1)), lift.partial(0))
    G = _pair_s(star_x, g0, 1)

    Gh = gauge_fix(family, x, 2, base_point)
    y1, y2 = Gh[0], Gh[1]
    W = y1.truncate((1, 1)) * y2.partial(0) - y2.truncate((1, 1)) * y1.partial(0)
    rejected = (np.abs(F.value) < NODE_TOL) | (np.abs(G.value) < NODE_TOL)
    safe = np.where(rejected, 1.0, 0.0)
    with np.errstate(all="ignore"):
        A = log(y1.truncate((1, 1)) + safe)
        B = log(W + safe)
    return GaugeFixedData(
        x=x,
        F=F.d(0, 0), Fx=F.d(1, 0), G=G.d(0, 0), Gx=G.d(1, 0),
        uF=F.d(0, 1), uFx=F.d(1, 1), uG=G.d(0, 1), uGx=G.d(1, 1),
        A=A.d(0, 1), dA=A.d(1, 1), B=B.d(0, 1), dB=B.d(1, 1),
        rejected=rejected,
    )


# -- continuous forms -----------------------------------------------------------------


def quadrature_nodes(T: float, N: int, base_point: float = 0.0, window: float = 0.0):
    """Midpoint nodes of the periodic rule, the weight, and the mask of nodes kept.

    Nodes closer than ``window`` (in circular distance) to the base point are dropped.
    """
    x = base_point + (np.arange(N) + 0.5) * (T / N)
    dist = np.abs((x - base_point + 0.5 * T) % T - 0.5 * T)
    return x, T / N, dist >= window


def _check_pair(u: DeformationFamily, v: DeformationFamily) -> None:
    if u.base != v.base:
        raise ValueError("both directions must deform the same base curve")


def _om_integrand(du: GaugeFixedData, dv: GaugeFixedData) -> np.ndarray:
    F, Fx, G = du.F, du.Fx, du.G

    def wedge(a, b):
        return a[0] * b[1] - a[1] * b[0]

    dF = (du.uF, dv.uF)
    dFx = (du.uFx, dv.uFx)
    dG = (du.uG, dv.uG)
    dGx = (du.uGx, dv.uGx)
    return (
        wedge(dF, dFx) / F**2
        + wedge(dFx, dG) / (F * G)
        - Fx * wedge(dF, dG) / (F**2 * G)
        + wedge(dG, dGx) / G**2
    )


def _log_integrand(du: GaugeFixedData, dv: GaugeFixedData) -> np.ndarray:
    return 2 * du.A * dv.dA - du.B * dv.dA - du.A * dv.dB + 2 * du.B * dv.dB


def _integrate(u, v, N, base_point, window, integrand):
    _check_pair(u, v)
    if N < 64:
        raise ValueError("need at least 64 quadrature nodes")
    x, w, keep = quadrature_nodes(u.period, N, base_point, window)
    du = directional_data(u, x, base_point)
    dv = directional_data(v, x, base_point)
    keep = keep & ~du.rejected
    if keep.sum() < N / 2:
        raise SymplecticError(f"only {int(keep.sum())} of {N} quadrature nodes usable")
    vals = integrand(du, dv)
    return float(w * np.sum(vals[keep]))


def omega_continuous(
    u: DeformationFamily, v: DeformationFamily, N: int = 256, base_point: float = 0.0, window: float = 0.0
) -> float:
    """The continuous form on ``(u, v)`` from the variations of ``F, F_x, G, G_x``."""
    return _integrate(u, v, N, base_point, window, _om_integrand)


def omega_log_form(
    u: DeformationFamily, v: DeformationFamily, N: int = 256, base_point: float = 0.0,
    window: float = 0.0, antisymmetrize: bool = True,
) -> float:
    """``int 2 A_u A_v' - B_u A_v' - A_u B_v' + 2 B_u B_v'`` from gauge-fixed coordinates.

    The raw expression only matches the form after integration by parts,
    so by default it is antisymmetrized in ``(u, v)``.
    """
    raw = _integrate(u, v, N, base_point, window, _log_integrand)
    if not antisymmetrize:
        return raw
    return 0.5 * (raw - _integrate(v, u, N, base_point, window, _log_integrand))


# -- discrete cluster form ------------------------------------------------------------


def _pair_values(family: DeformationFamily, xs, ys, kind: str) -> Jet:
    """``F(xs, ys)`` or ``G(xs, ys)`` as jets in ``s`` (x-order 0)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    gx = family.lift(xs, 1)
    gy = family.lift(ys, 1)
    if kind == "F":
        a, b = gx.coeff(0, 0), cross(gy.coeff(0, 0), gy.coeff(0, 1))
    else:
        a, b = cross(gx.coeff(0, 0), gx.coeff(0, 1)), gy.coeff(0, 0)
    return dot(a, b)


def _lattice_step(T: float, eps: float) -> tuple[int, float]:
    n = max(2, int(round(T / (2 * eps))))
    return n, T / (2 * n)


def cluster_coordinates(family: DeformationFamily, eps: float, base_point: float = 0.0, phase: float = 0.5):
    """Values and dlog-variations of ``x_i = F(X_i - eps, b - eps)`` and ``y_i = G(X_i, b)``.

    ``X_i = b + 2 eps (i + phase)``; ``eps`` is snapped so that ``T/(2 eps)`` is an integer.
    """
    n, eps = _lattice_step(family.period, eps)
    X = base_point + 2 * eps * (np.arange(n) + phase)
    xv = _pair_values(family, X - eps, np.full(n, base_point - eps), "F")
    yv = _pair_values(family, X, np.full(n, base_point), "G")
    return eps, X, xv, yv


def cluster_form_discrete(
    u: DeformationFamily, v: DeformationFamily, eps: float, base_point: float = 0.0,
    phase: float = 0.5, window: float = 0.0,
) -> float:
    """The sum over ``i`` of the four-term cluster 2-form along a pair of diagonals.

    Terms whose coordinates drop below ``1e-6`` in magnitude, or whose
    ``X_i`` lies within ``window`` of the base point, are skipped; more than
    10% skipped is an error.
    """
    _check_pair(u, v)
    T = u.period
    eps, X, xu, yu = cluster_coordinates(u, eps, base_point, phase)
    _, _, xv, yv = cluster_coordinates(v, eps, base_point, phase)
    xval, yval = xu.d(0), yu.d(0)
    # dlog along each direction
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = (xu.d(1) / xval, xv.d(1) / xval)
        eta = (yu.d(1) / yval, yv.d(1) / yval)

    def shift(p):
        return (np.roll(p[0], -1), np.roll(p[1], -1))

    def wedge(a, b):
        return a[0] * b[1] - a[1] * b[0]

    xi1 = shift(xi)
    with np.errstate(invalid="ignore"):
        terms = wedge(xi1, xi) + wedge(shift(eta), eta) + wedge(xi, eta) + wedge(eta, xi1)

    small = (np.abs(xval) < COORD_TOL) | (np.abs(yval) < COORD_TOL)
    bad = small | np.roll(small, -1)
    dist = np.abs((X - base_point + 0.5 * T) % T - 0.5 * T)
    bad |= dist < window
    if bad.sum() > 0.1 * bad.size:
        raise SymplecticError(f"{int(bad.sum())} of {bad.size} lattice terms skipped")
    return float(np.sum(terms[~bad]))


# -- limit check ----------------------------------------------------------------------


@dataclass
class LimitTable:
    eps: np.ndarray
    cluster: np.ndarray
    omega: float
    factor: float

    @property
    def ratio(self) -> np.ndarray:
        return self.cluster / self.omega

    @property
    def degenerate(self) -> bool:
        return not np.isfinite(self.omega) or self.omega == 0

    @property
    def errors(self) -> np.ndarray:
        return np.abs(self.ratio - self.factor)

    @property
    def contraction(self) -> np.ndarray:
        """``|r(eps/2) - factor| / |r(eps) - factor|`` for consecutive rows."""
        e = self.errors
        return e[1:] / e[:-1]

    @property
    def observed_order(self) -> float:
        """Convergence order in ``eps`` estimated from the three finest rows."""
        r = self.ratio
        return float(np.log2((r[-3] - r[-2]) / (r[-2] - r[-1])))

    @property
    def extrapolated(self) -> float:
        """Richardson estimate of the limiting ratio at the observed order."""
        r = self.ratio
        return float(r[-1] + (r[-1] - r[-2]) / (2.0 ** self.observed_order - 1))

    def rows(self):
        for e, c, r in zip(self.eps, self.cluster, self.ratio):
            yield float(e), float(c), float(self.omega), float(r)


def limit_check(
    u: DeformationFamily, v: DeformationFamily, eps_list, N: int = 1024,
    factor: float = -2.0, base_point: float = 0.0, phase: float = 0.5,
) -> LimitTable:
    """Tabulate ``cluster(eps) / omega`` for decreasing ``eps``."""
    eps_list = sorted(map(float, eps_list), reverse=True)
    if len(eps_list) < 3:
        raise ValueError("need at least three epsilons")
    if u.is_zero() or v.is_zero():
        return LimitTable(np.array(eps_list), np.zeros(len(eps_list)), 0.0, factor)
    om = omega_continuous(u, v, N, base_point)
    snapped, vals = [], []
    for e in eps_list:
        _, e_used = _lattice_step(u.period, e)
        snapped.append(e_used)
        vals.append(cluster_form_discrete(u, v, e_used, base_point, phase))
    return LimitTable(np.array(snapped), np.array(vals), om, factor)
