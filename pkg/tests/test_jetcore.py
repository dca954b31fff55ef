import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frieze_lab.jetcore import (
    Jet,
    JetOrderError,
    SingularJetError,
    Vec3Jet,
    cos,
    cross,
    det3,
    dot,
    exp,
    jet1,
    jet2,
    jet_arith,
    log,
    power,
    sin,
)

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
derivs5 = st.lists(finite, min_size=6, max_size=6)


def const(v, order=3):
    return Jet.constant(v, [order])


def vec(rows):
    return Vec3Jet.from_derivs(np.asarray(rows, dtype=float))


def test_constant_product():
    p = jet_arith(const(2.0), const(3.0), "mul")
    assert p.d(0) == 6
    assert np.all(p.derivs[1:] == 0)


def test_square_of_coordinate():
    x = jet1([2.0, 1.0, 0.0])
    p = x * x
    assert np.allclose(p.derivs, [4, 4, 2])


def test_division_by_vanishing_jet_rejected():
    s = jet1([0.0, 1.0, 0.0, -1.0])
    x = jet1([0.0, 1.0, 0.0, 0.0])
    with pytest.raises(SingularJetError):
        jet_arith(s, x, "div")


def test_secant_from_quotient():
    c = cos(Jet.variable(0.0, [4]))
    sec = jet_arith(const(1.0, 4), c, "div")
    assert np.allclose(sec.derivs, [1, 0, 1, 0, 5], atol=1e-13)


def test_unknown_operation():
    with pytest.raises(ValueError):
        jet_arith(const(1.0), const(1.0), "pow")


def test_order_mismatch():
    with pytest.raises(JetOrderError):
        const(1.0, 2) + const(1.0, 3)
    with pytest.raises(JetOrderError):
        jet1([1.0, 2.0]).d(2)


def test_det3_examples():
    e = np.eye(3)
    ident = [vec(np.stack([e[:, k], np.zeros(3)], axis=1)) for k in range(3)]
    assert det3(*ident).d(0) == 1
    assert np.all(det3(*ident).derivs[1:] == 0)
    a = vec(np.random.default_rng(0).normal(size=(3, 4)))
    b = vec(np.random.default_rng(1).normal(size=(3, 4)))
    assert np.allclose(det3(a, a, b).derivs, 0, atol=1e-12)
    circ = [vec(np.stack([v, np.zeros(3)], axis=1)) for v in ([1, 0, 1], [0, 1, 0], [-1, 0, 0])]
    assert det3(*circ).d(0) == pytest.approx(1.0)


def test_cross_examples():
    e = [vec(np.stack([np.eye(3)[k], np.zeros(3)], axis=1)) for k in range(3)]
    assert np.allclose(cross(e[0], e[1]).d(0), [0, 0, 1])
    u = vec(np.random.default_rng(2).normal(size=(3, 3)))
    assert np.allclose(cross(u, u).d(0), 0) and np.allclose(cross(u, u).d(2), 0)
    a = vec([[1, 0], [0, 0], [1, 0]])
    b = vec([[0, 0], [1, 0], [0, 0]])
    assert np.allclose(cross(a, b).d(0), [-1, 0, 1])


def test_exp_of_product_mixed_partials():
    x = Jet.variable(0.0, [3, 3], axis=0)
    y = Jet.variable(0.0, [3, 3], axis=1)
    e = exp(x * y)
    for i, j in product(range(4), range(4)):
        assert e.d(i, j) == pytest.approx(math.factorial(i) if i == j else 0.0, abs=1e-14)


def test_real_power_and_log():
    x = Jet.variable(2.0, [4])
    p = power(x, 1.5)
    expect = [2**1.5, 1.5 * 2**0.5, 0.75 * 2**-0.5, -0.375 * 2**-1.5, 0.5625 * 2**-2.5]
    assert np.allclose(p.derivs, expect)
    with pytest.raises(SingularJetError):
        power(Jet.variable(-1.0, [2]), 0.5)
    assert np.allclose(power(Jet.variable(-1.0, [3]), 2).derivs, [1, -2, 2, 0])
    with pytest.raises(SingularJetError):
        log(Jet.variable(0.0, [2]))


def test_embed_and_coeff():
    f = jet1([1.0, 2.0, 3.0])
    F = f.embed([1], [2, 2])
    assert F.d(0, 1) == 2 and F.d(0, 2) == 3 and F.d(1, 0) == 0
    g = jet2([[1.0, 2.0], [3.0, 4.0]])
    assert np.allclose(g.coeff(1, 1).derivs, [2.0, 4.0])


def test_batched_jets_broadcast():
    x = Jet.variable(np.linspace(0, 1, 5)[:, None], [2])
    y = Jet.constant(np.linspace(1, 2, 3)[None, :], [2])
    z = x * y
    assert z.batch_shape == (5, 3)
    assert np.allclose(z.d(1), np.broadcast_to(np.linspace(1, 2, 3), (5, 3)))


@settings(max_examples=60, deadline=None)
@given(derivs5, derivs5)
def test_product_matches_leibniz(a, b):
    ja, jb = jet1(a), jet1(b)
    got = (ja * jb).derivs
    for k in range(6):
        want = sum(math.comb(k, i) * a[i] * b[k - i] for i in range(k + 1))
        assert got[k] == pytest.approx(want, rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(derivs5, derivs5, derivs5)
def test_product_commutative_associative(a, b, c):
    ja, jb, jc = jet1(a), jet1(b), jet1(c)
    assert np.allclose((ja * jb).derivs, (jb * ja).derivs, rtol=1e-14, atol=1e-13)
    assert np.allclose(((ja * jb) * jc).derivs, (ja * (jb * jc)).derivs, rtol=1e-13, atol=1e-11)


@settings(max_examples=60, deadline=None)
@given(derivs5, st.floats(0.5, 3))
def test_quotient_inverts_product(a, b0):
    jb = jet1([b0, 0.3, -0.2, 0.1, 0.5, -0.4])
    ja = jet1(a)
    assert np.allclose(((ja / jb) * jb).derivs, ja.derivs, rtol=1e-10, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.floats(-2, 2), st.floats(0.2, 3))
def test_elementary_identities(t, v):
    x = Jet.variable(t, [5])
    one = sin(x) * sin(x) + cos(x) * cos(x)
    assert np.allclose(one.derivs, [1, 0, 0, 0, 0, 0], atol=1e-12)
    u = Jet.variable(v, [5]) * 2.0 + 0.0
    # high slots lose digits to cancellation when the base value is small
    assert np.allclose(exp(log(u)).derivs, u.derivs, rtol=1e-12, atol=1e-9)
    assert np.allclose(power(power(u, 1 / 3), 3).derivs, u.derivs, rtol=1e-11, atol=1e-9)


def _random_vec(rng, order=3):
    return rng.normal(size=(3, order + 1))


def test_det3_matches_multilinear_expansion(rng):
    for _ in range(20):
        cols = [_random_vec(rng) for _ in range(3)]
        got = det3(*(Vec3Jet.from_derivs(c) for c in cols)).derivs
        for k in range(4):
            want = 0.0
            for i in range(k + 1):
                for j in range(k + 1 - i):
                    l = k - i - j
                    m = np.stack([cols[0][:, i], cols[1][:, j], cols[2][:, l]], axis=1)
                    want += math.factorial(k) / (math.factorial(i) * math.factorial(j) * math.factorial(l)) * np.linalg.det(m)
            assert got[k] == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_lagrange_identity(rng):
    for _ in range(20):
        a, b, c, d = (Vec3Jet.from_derivs(_random_vec(rng)) for _ in range(4))
        lhs = dot(cross(a, b), cross(c, d))
        rhs = dot(a, c) * dot(b, d) - dot(a, d) * dot(b, c)
        assert np.allclose(lhs.derivs, rhs.derivs, rtol=1e-12, atol=1e-12)
