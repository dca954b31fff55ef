"""Truncated multivariate Taylor jets with batched numpy coefficients.

A :class:`Jet` carries the partial derivatives of a smooth function at a base
point, up to a fixed order per variable.  Coefficient arrays have the order
axes first and an arbitrary batch shape after them, so a single jet can
represent the same function germ at many base points at once (a whole grid).

Public access is always by derivative value (``jet.d(i, j)`` is the mixed
partial ``d^i/dx^i d^j/dy^j``); Taylor coefficients are an internal detail of
the arithmetic.
"""

from __future__ import annotations

import math
from itertools import product
from typing import Sequence

import numpy as np

__all__ = [
    "JetError",
    "JetOrderError",
    "SingularJetError",
    "Jet",
    "Vec3Jet",
    "jet1",
    "jet2",
    "jet_arith",
    "det3",
    "cross",
    "dot",
    "exp",
    "log",
    "sin",
    "cos",
    "power",
    "sqrt",
    "reciprocal",
]


class JetError(ValueError):
    pass


class JetOrderError(JetError):
    pass


class SingularJetError(JetError, ZeroDivisionError):
    pass


def _factorial_grid(shape: tuple[int, ...]) -> np.ndarray:
    grid = np.ones(shape)
    for axis, n in enumerate(shape):
        f = np.array([math.factorial(k) for k in range(n)], dtype=float)
        view = [1] * len(shape)
        view[axis] = n
        grid = grid * f.reshape(view)
    return grid


class Jet:
    """Truncated Taylor expansion in ``nvars`` variables.

    ``tc`` holds Taylor coefficients with shape ``orders+1`` followed by the
    batch shape.  Use :meth:`from_derivs`, :meth:`constant` or
    :meth:`variable` rather than the raw constructor.
    """

    __slots__ = ("tc", "nvars")
    __array_priority__ = 100  # numpy scalars defer to Jet operators

    def __init__(self, tc: np.ndarray, nvars: int):
        tc = np.asarray(tc)
        if tc.ndim < nvars:
            raise JetError("coefficient array has fewer axes than variables")
        self.tc = tc
        self.nvars = nvars

    # -- construction -------------------------------------------------------

    @classmethod
    def from_derivs(cls, derivs, nvars: int = 1) -> "Jet":
        derivs = np.asarray(derivs, dtype=float)
        shape = derivs.shape[:nvars]
        fact = _factorial_grid(shape).reshape(shape + (1,) * (derivs.ndim - nvars))
        return cls(derivs / fact, nvars)

    @classmethod
    def constant(cls, value, orders: Sequence[int]) -> "Jet":
        value = np.asarray(value, dtype=float)
        shape = tuple(o + 1 for o in orders)
        tc = np.zeros(shape + value.shape)
        tc[(0,) * len(orders)] = value
        return cls(tc, len(orders))

    @classmethod
    def variable(cls, value, orders: Sequence[int], axis: int = 0) -> "Jet":
        """Jet of the coordinate function along ``axis`` at ``value``."""
        jet = cls.constant(value, orders)
        if orders[axis] >= 1:
            idx = [0] * len(orders)
            idx[axis] = 1
            jet.tc[tuple(idx)] = 1.0
        return jet

    # -- introspection ------------------------------------------------------

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(n - 1 for n in self.tc.shape[: self.nvars])

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.tc.shape[self.nvars:]

    @property
    def value(self) -> np.ndarray:
        return self.tc[(0,) * self.nvars]

    @property
    def derivs(self) -> np.ndarray:
        shape = self.tc.shape[: self.nvars]
        fact = _factorial_grid(shape).reshape(shape + (1,) * len(self.batch_shape))
        return self.tc * fact

    def d(self, *idx: int) -> np.ndarray:
        """Mixed partial derivative value with multi-index ``idx``."""
        if len(idx) != self.nvars:
            raise JetOrderError(f"expected {self.nvars} indices, got {len(idx)}")
        for k, o in zip(idx, self.orders):
            if k > o:
                raise JetOrderError(f"derivative {idx} beyond stored orders {self.orders}")
        scale = math.prod(math.factorial(k) for k in idx)
        return self.tc[idx] * scale

    def __repr__(self) -> str:
        return f"Jet(orders={self.orders}, batch={self.batch_shape})"

    # -- structural operations ---------------------------------------------

    def partial(self, axis: int = 0) -> "Jet":
        """Jet of the partial derivative along ``axis`` (that order drops by 1)."""
        n = self.tc.shape[axis]
        if n < 2:
            raise JetOrderError("cannot differentiate an order-0 jet")
        k = np.arange(1, n, dtype=float).reshape((n - 1,) + (1,) * (self.tc.ndim - axis - 1))
        tc = np.take(self.tc, np.arange(1, n), axis=axis) * k
        return Jet(tc, self.nvars)

    def truncate(self, orders: Sequence[int]) -> "Jet":
        if len(orders) != self.nvars:
            raise JetOrderError("orders length does not match number of variables")
        for o, mine in zip(orders, self.orders):
            if o > mine:
                raise JetOrderError(f"cannot raise order {mine} to {o} by truncation")
        sl = tuple(slice(0, o + 1) for o in orders)
        return Jet(self.tc[sl], self.nvars)

    def embed(self, axes: Sequence[int], orders: Sequence[int]) -> "Jet":
        """Place this jet in a larger variable set.

        Variable ``k`` of ``self`` becomes variable ``axes[k]`` of the result;
        the function is taken to be constant along the remaining variables.
        Orders along mapped axes are truncated to ``orders`` if needed.
        """
        if len(axes) != self.nvars:
            raise JetOrderError("axes length does not match number of variables")
        nv = len(orders)
        src = self.truncate([min(o, orders[a]) for o, a in zip(self.orders, axes)])
        tc = np.zeros(tuple(o + 1 for o in orders) + self.batch_shape)
        # move source order axes into their target positions
        view = [1] * nv
        for k, a in enumerate(axes):
            view[a] = src.tc.shape[k]
        order_perm = np.argsort(axes)
        moved = np.transpose(
            src.tc, list(order_perm) + list(range(self.nvars, src.tc.ndim))
        ).reshape(tuple(view) + self.batch_shape)
        sl = tuple(slice(0, v) for v in view)
        tc[sl] = moved
        return Jet(tc, nv)

    def coeff(self, axis: int, k: int) -> "Jet":
        """Taylor coefficient of the ``axis`` variable to power ``k``.

        The result is a jet in the remaining variables.  For ``k`` in {0, 1}
        this equals the ``k``-th derivative along ``axis``.
        """
        if self.nvars < 2:
            raise JetOrderError("coeff needs at least two variables")
        return Jet(np.take(self.tc, k, axis=axis), self.nvars - 1)

    # -- arithmetic ---------------------------------------------------------

    def _operand(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.nvars != self.nvars or other.orders != self.orders:
                raise JetOrderError(
                    f"order mismatch: {self.orders} vs {other.orders}"
                )
            return other
        return Jet.constant(other, self.orders)

    @staticmethod
    def _aligned(a: "Jet", b: "Jet") -> tuple[np.ndarray, np.ndarray]:
        na, nb = len(a.batch_shape), len(b.batch_shape)
        nbatch = max(na, nb)
        ta = a.tc.reshape(a.tc.shape[: a.nvars] + (1,) * (nbatch - na) + a.batch_shape)
        tb = b.tc.reshape(b.tc.shape[: b.nvars] + (1,) * (nbatch - nb) + b.batch_shape)
        return ta, tb

    def __add__(self, other) -> "Jet":
        other = self._operand(other)
        ta, tb = self._aligned(self, other)
        return Jet(ta + tb, self.nvars)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        other = self._operand(other)
        ta, tb = self._aligned(self, other)
        return Jet(ta - tb, self.nvars)

    def __rsub__(self, other) -> "Jet":
        return self._operand(other) - self

    def __neg__(self) -> "Jet":
        return Jet(-self.tc, self.nvars)

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            value = np.asarray(other, dtype=float)
            nb = len(self.batch_shape)
            if value.ndim <= nb:
                return Jet(self.tc * value, self.nvars)
            other = Jet.constant(value, self.orders)
        other = self._operand(other)
        ta, tb = self._aligned(self, other)
        shape = ta.shape[: self.nvars]
        batch = np.broadcast_shapes(ta.shape[self.nvars:], tb.shape[self.nvars:])
        out = np.zeros(shape + batch)
        for idx in product(*(range(n) for n in shape)):
            out_sl = tuple(slice(i, None) for i in idx)
            b_sl = tuple(slice(0, n - i) for i, n in zip(idx, shape))
            out[out_sl] += ta[idx] * tb[b_sl]
        return Jet(out, self.nvars)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self * reciprocal(other)
        value = np.asarray(other, dtype=float)
        if np.any(value == 0):
            raise SingularJetError("division by zero constant")
        return self * (1.0 / value)

    def __rtruediv__(self, other) -> "Jet":
        return reciprocal(self) * other

    def __pow__(self, p) -> "Jet":
        return power(self, p)


def jet1(derivs) -> Jet:
    """Univariate jet from derivative values ``(f, f', f'', ...)``."""
    return Jet.from_derivs(derivs, nvars=1)


def jet2(derivs) -> Jet:
    """Bivariate jet from a grid of mixed partials ``derivs[i][j] = d^i_x d^j_y f``."""
    return Jet.from_derivs(derivs, nvars=2)


def jet_arith(a: Jet, b: Jet, op: str) -> Jet:
    ops = {
        "add": lambda: a + b,
        "sub": lambda: a - b,
        "mul": lambda: a * b,
        "div": lambda: a / b,
    }
    try:
        return ops[op]()
    except KeyError:
        raise JetError(f"unknown jet operation {op!r}") from None


# -- elementary functions --------------------------------------------------


def _compose(u: Jet, derivs: list[np.ndarray]) -> Jet:
    """Compose a scalar function with derivatives ``derivs`` at ``u.value``."""
    total = sum(u.orders)
    delta = Jet(u.tc.copy(), u.nvars)
    delta.tc[(0,) * u.nvars] = 0.0
    out = Jet.constant(derivs[0], u.orders)
    term = None
    for k in range(1, total + 1):
        term = delta if term is None else term * delta
        out = out + term * (derivs[k] / math.factorial(k))
    return out


def exp(u: Jet) -> Jet:
    e = np.exp(u.value)
    return _compose(u, [e] * (sum(u.orders) + 1))


def log(u: Jet) -> Jet:
    v = u.value
    if np.any(v <= 0):
        raise SingularJetError("log of a jet with non-positive value")
    ds = [np.log(v)]
    for k in range(1, sum(u.orders) + 1):
        ds.append((-1) ** (k - 1) * math.factorial(k - 1) / v**k)
    return _compose(u, ds)


def sin(u: Jet) -> Jet:
    s, c = np.sin(u.value), np.cos(u.value)
    cycle = [s, c, -s, -c]
    return _compose(u, [cycle[k % 4] for k in range(sum(u.orders) + 1)])


def cos(u: Jet) -> Jet:
    s, c = np.sin(u.value), np.cos(u.value)
    cycle = [c, -s, -c, s]
    return _compose(u, [cycle[k % 4] for k in range(sum(u.orders) + 1)])


def reciprocal(u: Jet) -> Jet:
    v = u.value
    if np.any(v == 0):
        raise SingularJetError("division by a jet with zero value")
    ds = [(-1) ** k * math.factorial(k) / v ** (k + 1) for k in range(sum(u.orders) + 1)]
    return _compose(u, ds)


def power(u: Jet, p: float) -> Jet:
    """``u**p`` for real ``p``; needs a positive base unless ``p`` is a natural number."""
    v = u.value
    p = float(p)
    natural = p.is_integer() and p >= 0
    if not natural and np.any(v <= 0):
        raise SingularJetError("non-integer power of a jet with non-positive value")
    ds = []
    coef = 1.0
    for k in range(sum(u.orders) + 1):
        if natural and k > p:
            ds.append(np.zeros_like(v, dtype=float))
        else:
            ds.append(coef * v ** (p - k))
        coef *= p - k
    return _compose(u, ds)


def sqrt(u: Jet) -> Jet:
    return power(u, 0.5)


# -- 3-vectors of jets -------------------------------------------------------


class Vec3Jet:
    """Three jets of identical orders, read as a vector in R^3."""

    __slots__ = ("c",)

    def __init__(self, c0: Jet, c1: Jet, c2: Jet):
        if not (c0.orders == c1.orders == c2.orders and c0.nvars == c1.nvars == c2.nvars):
            raise JetOrderError("Vec3Jet components must share orders")
        self.c = (c0, c1, c2)

    @classmethod
    def from_derivs(cls, derivs, nvars: int = 1) -> "Vec3Jet":
        """``derivs`` has a leading component axis of length 3."""
        derivs = np.asarray(derivs, dtype=float)
        return cls(*(Jet.from_derivs(derivs[i], nvars) for i in range(3)))

    def __getitem__(self, i: int) -> Jet:
        return self.c[i]

    def __iter__(self):
        return iter(self.c)

    @property
    def orders(self) -> tuple[int, ...]:
        return self.c[0].orders

    def d(self, *idx: int) -> np.ndarray:
        """Derivative values of all three components, stacked on axis 0."""
        return np.stack(np.broadcast_arrays(*(ci.d(*idx) for ci in self.c)))

    def partial(self, axis: int = 0) -> "Vec3Jet":
        return Vec3Jet(*(ci.partial(axis) for ci in self.c))

    def truncate(self, orders: Sequence[int]) -> "Vec3Jet":
        return Vec3Jet(*(ci.truncate(orders) for ci in self.c))

    def embed(self, axes: Sequence[int], orders: Sequence[int]) -> "Vec3Jet":
        return Vec3Jet(*(ci.embed(axes, orders) for ci in self.c))

    def coeff(self, axis: int, k: int) -> "Vec3Jet":
        return Vec3Jet(*(ci.coeff(axis, k) for ci in self.c))

    def scale(self, s) -> "Vec3Jet":
        return Vec3Jet(*(ci * s for ci in self.c))

    def __add__(self, other: "Vec3Jet") -> "Vec3Jet":
        return Vec3Jet(*(a + b for a, b in zip(self.c, other.c)))

    def __sub__(self, other: "Vec3Jet") -> "Vec3Jet":
        return Vec3Jet(*(a - b for a, b in zip(self.c, other.c)))

    def __neg__(self) -> "Vec3Jet":
        return Vec3Jet(*(-a for a in self.c))


def _check_same(*vs: Vec3Jet) -> None:
    o = vs[0].orders
    for v in vs[1:]:
        if v.orders != o:
            raise JetOrderError(f"order mismatch: {o} vs {v.orders}")


def dot(u: Vec3Jet, v: Vec3Jet) -> Jet:
    _check_same(u, v)
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def cross(u: Vec3Jet, v: Vec3Jet) -> Vec3Jet:
    _check_same(u, v)
    return Vec3Jet(
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def det3(c1: Vec3Jet, c2: Vec3Jet, c3: Vec3Jet) -> Jet:
    """Determinant of the 3x3 matrix with columns ``c1, c2, c3``."""
    _check_same(c1, c2, c3)
    return dot(c1, cross(c2, c3))
