"""Parameterized plane curves and their unimodular lifts to R^3."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .jetcore import Jet, Vec3Jet, exp, log, power

__all__ = [
    "CurveError",
    "CurveSpecError",
    "CurveDomainError",
    "ConvexityError",
    "FourierSeries",
    "PlaneCurve",
    "FourierCurve",
    "ConicCurve",
    "PowerCurve",
    "LiftedFrame",
    "parse_curve_spec",
    "curve_to_spec",
    "eval_plane_jet",
    "wronskian",
    "lift_affine",
    "lift_frame",
    "MAX_ORDER",
]

# Deepest x-derivative any caller needs: Gamma'''' for the dual at order 3
# requires the affine data at order 6.
MAX_ORDER = 8


class CurveError(ValueError):
    pass


class CurveSpecError(CurveError):
    pass


class CurveDomainError(CurveError):
    pass


class ConvexityError(CurveError):
    """The Wronskian W = f'g'' - g'f'' is not positive somewhere."""

    def __init__(self, message: str, x=None):
        super().__init__(message)
        self.x = x


@dataclass(frozen=True)
class FourierSeries:
    """``const + sum_k cos[k-1] cos(k w x) + sin[k-1] sin(k w x)``."""

    const: float = 0.0
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()

    def derivs(self, x, order: int, omega: float) -> np.ndarray:
        """Derivative values ``d^m/dx^m`` for ``m = 0..order``, stacked on axis 0."""
        x = np.asarray(x, dtype=float)
        out = np.zeros((order + 1,) + x.shape)
        out[0] += self.const
        for k, (a, b) in enumerate(_zip_pad(self.cos, self.sin), start=1):
            w = k * omega
            theta = w * x
            for m in range(order + 1):
                shift = m * math.pi / 2
                out[m] += w**m * (a * np.cos(theta + shift) + b * np.sin(theta + shift))
        return out

    def __add__(self, other: "FourierSeries") -> "FourierSeries":
        c = tuple(a + b for a, b in _zip_pad(self.cos, other.cos))
        s = tuple(a + b for a, b in _zip_pad(self.sin, other.sin))
        return FourierSeries(self.const + other.const, c, s)

    def scaled(self, t: float) -> "FourierSeries":
        return FourierSeries(
            t * self.const, tuple(t * a for a in self.cos), tuple(t * b for b in self.sin)
        )

    def to_spec(self) -> dict:
        return {"const": self.const, "cos": list(self.cos), "sin": list(self.sin)}


def _zip_pad(a, b):
    n = max(len(a), len(b))
    a = tuple(a) + (0.0,) * (n - len(a))
    b = tuple(b) + (0.0,) * (n - len(b))
    return zip(a, b)


class PlaneCurve:
    """Common interface for the three curve variants."""

    variant: str = ""

    @property
    def period(self) -> float | None:
        return None

    @property
    def closed(self) -> bool:
        return self.period is not None

    @property
    def domain(self) -> tuple[float, float]:
        raise NotImplementedError

    def check_domain(self, x) -> None:
        pass

    def plane_derivs(self, x, order: int) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError


@dataclass(frozen=True)
class FourierCurve(PlaneCurve):
    T: float
    f: FourierSeries
    g: FourierSeries
    variant: str = field(default="fourier", init=False)

    @property
    def period(self) -> float:
        return self.T

    @property
    def domain(self) -> tuple[float, float]:
        return (0.0, self.T)

    def plane_derivs(self, x, order):
        omega = 2 * math.pi / self.T
        return self.f.derivs(x, order, omega), self.g.derivs(x, order, omega)


@dataclass(frozen=True)
class ConicCurve(PlaneCurve):
    """The ellipse ``(a cos x, b sin x)``, period 2*pi."""

    a: float
    b: float
    variant: str = field(default="conic", init=False)

    @property
    def period(self) -> float:
        return 2 * math.pi

    @property
    def domain(self) -> tuple[float, float]:
        return (0.0, 2 * math.pi)

    def as_fourier(self) -> FourierCurve:
        return FourierCurve(
            2 * math.pi, FourierSeries(0.0, (self.a,), ()), FourierSeries(0.0, (), (self.b,))
        )

    def plane_derivs(self, x, order):
        return self.as_fourier().plane_derivs(x, order)


@dataclass(frozen=True)
class PowerCurve(PlaneCurve):
    """Open curve with lift ``(x^a/(b-c), x^b/(c-a), x^c/(a-b))``, ``a+b+c = 3``."""

    abc: tuple[float, float, float]
    x_min: float = 0.5
    x_max: float = 2.0
    variant: str = field(default="power", init=False)

    def __post_init__(self):
        # the unit-determinant lift exists only on this plane of exponents
        if abs(sum(self.abc) - 3.0) > 1e-12:
            raise CurveSpecError(f"power exponents must satisfy a+b+c = 3, got sum {sum(self.abc)}")

    @property
    def domain(self) -> tuple[float, float]:
        return (self.x_min, self.x_max)

    def check_domain(self, x) -> None:
        x = np.asarray(x, dtype=float)
        tol = 1e-12 * max(1.0, abs(self.x_max))
        if np.any(x < self.x_min - tol) or np.any(x > self.x_max + tol):
            raise CurveDomainError(
                f"x outside power-curve domain [{self.x_min}, {self.x_max}]"
            )

    def lift_scales(self) -> tuple[float, float, float]:
        a, b, c = self.abc
        if a == b or b == c or c == a:
            raise CurveSpecError(f"power exponents must be distinct, got {self.abc}")
        return 1.0 / (b - c), 1.0 / (c - a), 1.0 / (a - b)

    def plane_derivs(self, x, order):
        # affine chart of the lift: (G1/G3, G2/G3)
        a, b, c = self.abc
        s1, s2, s3 = self.lift_scales()
        xj = Jet.variable(np.asarray(x, dtype=float), [order])
        f = power(xj, a - c) * (s1 / s3)
        g = power(xj, b - c) * (s2 / s3)
        return f.derivs, g.derivs


# -- spec documents -----------------------------------------------------------


def _real(obj: Mapping, key: str) -> float:
    if key not in obj:
        raise CurveSpecError(f"missing field {key!r}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise CurveSpecError(f"field {key!r} must be a finite real, got {v!r}")
    return float(v)


def _reals(seq: Any, key: str) -> tuple[float, ...]:
    if not isinstance(seq, list):
        raise CurveSpecError(f"field {key!r} must be an array of reals")
    out = []
    for v in seq:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise CurveSpecError(f"field {key!r} contains a non-real entry {v!r}")
        out.append(float(v))
    return tuple(out)


def _series(obj: Any, key: str) -> FourierSeries:
    if not isinstance(obj, dict):
        raise CurveSpecError(f"field {key!r} must be an object")
    unknown = set(obj) - {"const", "cos", "sin"}
    if unknown:
        raise CurveSpecError(f"unknown keys in {key!r}: {sorted(unknown)}")
    const = _real(obj, "const") if "const" in obj else 0.0
    return FourierSeries(
        const, _reals(obj.get("cos", []), f"{key}.cos"), _reals(obj.get("sin", []), f"{key}.sin")
    )


def parse_curve_spec(text: str | Mapping) -> PlaneCurve:
    """Parse a JSON curve-spec document (string or already-decoded mapping)."""
    if isinstance(text, str):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CurveSpecError(f"malformed JSON: {exc}") from None
    else:
        doc = dict(text)
    if not isinstance(doc, dict):
        raise CurveSpecError("curve spec must be a JSON object")
    kind = doc.get("type")
    if kind == "fourier":
        T = _real(doc, "T")
        if T <= 0:
            raise CurveSpecError("period T must be positive")
        for key in ("f", "g"):
            if key not in doc:
                raise CurveSpecError(f"missing field {key!r}")
        return FourierCurve(T, _series(doc["f"], "f"), _series(doc["g"], "g"))
    if kind == "conic":
        a, b = _real(doc, "a"), _real(doc, "b")
        if a <= 0 or b <= 0:
            raise CurveSpecError("conic semi-axes must be positive")
        return ConicCurve(a, b)
    if kind == "power":
        if "abc" not in doc:
            raise CurveSpecError("missing field 'abc'")
        abc = _reals(doc["abc"], "abc")
        if len(abc) != 3:
            raise CurveSpecError("abc must have exactly three entries")
        dom = _reals(doc.get("domain", [0.5, 2.0]), "domain")
        if len(dom) != 2:
            raise CurveSpecError("domain must be [x_min, x_max]")
        lo, hi = dom
        if not 0 < lo < hi:
            raise CurveSpecError("power domain must satisfy 0 < x_min < x_max")
        return PowerCurve(abc, lo, hi)
    raise CurveSpecError(f"unknown curve type {kind!r}")


def curve_to_spec(curve: PlaneCurve) -> dict:
    if isinstance(curve, FourierCurve):
        return {"type": "fourier", "T": curve.T, "f": curve.f.to_spec(), "g": curve.g.to_spec()}
    if isinstance(curve, ConicCurve):
        return {"type": "conic", "a": curve.a, "b": curve.b}
    if isinstance(curve, PowerCurve):
        return {"type": "power", "abc": list(curve.abc), "domain": [curve.x_min, curve.x_max]}
    raise TypeError(f"not a curve: {curve!r}")


# -- evaluation ---------------------------------------------------------------


def _check_order(order: int) -> None:
    if not 0 <= order <= MAX_ORDER:
        raise CurveError(f"jet order must be in [0, {MAX_ORDER}], got {order}")


def eval_plane_jet(curve: PlaneCurve, x, order: int) -> tuple[Jet, Jet]:
    """Jets of the affine coordinates ``f`` and ``g`` at ``x``."""
    _check_order(order)
    curve.check_domain(x)
    fd, gd = curve.plane_derivs(x, order)
    return Jet.from_derivs(fd), Jet.from_derivs(gd)


def _require_convex(W: Jet, x) -> None:
    bad = np.asarray(W.value) <= 0
    if np.any(bad):
        where = np.broadcast_to(np.asarray(x, dtype=float), bad.shape)[bad] if np.ndim(x) else x
        raise ConvexityError(f"Wronskian not positive (local convexity fails) at x={where}", where)


def wronskian(curve: PlaneCurve, x, order: int = 0) -> Jet:
    """Jet of ``W = f'g'' - g'f''``; raises :class:`ConvexityError` if ``W <= 0``."""
    f, g = eval_plane_jet(curve, x, order + 2)
    W = _affine_wronskian(f, g, order)
    _require_convex(W, x)
    return W


def _affine_wronskian(f: Jet, g: Jet, order: int) -> Jet:
    target = (order,) + f.orders[1:]
    f1, g1 = f.partial(0), g.partial(0)
    f2, g2 = f1.partial(0), g1.partial(0)
    return f1.truncate(target) * g2.truncate(target) - g1.truncate(target) * f2.truncate(target)


def lift_affine(f: Jet, g: Jet, order: int, x=None) -> Vec3Jet:
    """Unimodular lift ``W^(-1/3) (f, g, 1)`` from jets of the affine coordinates.

    Axis 0 of ``f`` and ``g`` is the curve parameter and must carry at least
    ``order + 2`` derivatives; any further axes (deformation parameters) are
    carried through unchanged.
    """
    if f.orders[0] < order + 2:
        raise CurveError("affine jets need two more derivatives than the lift")
    W = _affine_wronskian(f, g, order)
    _require_convex(W, x)
    lam = exp(log(W) * (-1.0 / 3.0))
    target = (order,) + f.orders[1:]
    return Vec3Jet(lam * f.truncate(target), lam * g.truncate(target), lam)


@dataclass(frozen=True)
class LiftedFrame:
    """The lift ``Gamma`` at ``x`` with derivatives up to ``frame.orders[0]``."""

    x: Any
    frame: Vec3Jet

    @property
    def order(self) -> int:
        return self.frame.orders[0]

    def vector(self, k: int) -> np.ndarray:
        """``Gamma^(k)(x)`` as an array with leading axis of length 3."""
        return self.frame.d(k)

    def unit_det(self) -> np.ndarray:
        """``det(Gamma, Gamma', Gamma'')`` at ``x`` (should be 1)."""
        m = np.stack([self.vector(k) for k in range(3)], axis=1)
        return np.linalg.det(np.moveaxis(m, (0, 1), (-2, -1)))


def lift_frame(curve: PlaneCurve, x, order: int) -> LiftedFrame:
    """Lift of ``curve`` at ``x`` with ``order`` derivatives."""
    _check_order(order)
    curve.check_domain(x)
    x = np.asarray(x, dtype=float)
    if isinstance(curve, PowerCurve):
        scales = curve.lift_scales()
        xj = Jet.variable(x, [order])
        frame = Vec3Jet(*(power(xj, p) * s for p, s in zip(curve.abc, scales)))
        return LiftedFrame(x, frame)
    if order + 2 > MAX_ORDER:
        raise CurveError(f"lift order {order} needs affine order {order + 2} > {MAX_ORDER}")
    f, g = eval_plane_jet(curve, x, order + 2)
    return LiftedFrame(x, lift_affine(f, g, order, x))
