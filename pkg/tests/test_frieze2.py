import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frieze_lab.curves import ConicCurve, PowerCurve, parse_curve_spec
from frieze_lab.frieze2 import (
    DEFAULT_TOLERANCES,
    TwoFrieze,
    companion_G,
    dodgson_residuals,
    eval_F,
    eval_G,
    explicit_F,
    frieze_grid,
    grid_csv,
    self_duality_residual,
    sl3_det,
    tame_det,
    verify_closed,
)
from frieze_lab.jetcore import Jet, JetOrderError, exp

from .conftest import DOUBLE_LOOP, LOPSIDED, PERTURBED, TAU, central_diff
from .test_projective import perturbed_lift


def test_circle_values():
    fr = TwoFrieze(ConicCurve(1, 1))
    F = eval_F(fr, math.pi / 3, 0.0, (1, 1))
    assert float(F.value) == pytest.approx(0.5, abs=1e-12)
    assert float(F.d(1, 0)) == pytest.approx(0.8660254, abs=1e-7)
    x, y = np.meshgrid(np.linspace(0, 6, 7), np.linspace(-3, 3, 7))
    assert np.allclose(eval_F(fr, x, y, (0, 0)).value, 1 - np.cos(x - y), atol=1e-12)
    assert np.allclose(eval_G(fr, x, y, (0, 0)).value, 1 - np.cos(x - y), atol=1e-12)


def test_power_values():
    fr = TwoFrieze(PowerCurve((2, 1, 0), 0.5, 3.0))
    assert float(eval_F(fr, 2.0, 1.0, (0, 0)).value) == pytest.approx(0.5, abs=1e-12)
    x, y = np.meshgrid(np.linspace(0.5, 3, 6), np.linspace(0.5, 3, 6))
    # companion of (x-y)^2/2 is (x-y)^2/2 again
    assert np.allclose(eval_G(fr, x, y, (0, 0)).value, (x - y) ** 2 / 2, atol=1e-12)


def test_F_against_determinant_of_hand_lift():
    # closed case: F(x, y) = det(Gamma(x), Gamma(y), Gamma'(y))
    fr = TwoFrieze(parse_curve_spec(PERTURBED))
    xs = np.array([0.3, 1.1, 2.5, 4.0])
    ys = np.array([1.7, 0.2, 5.1, 3.3])
    oracle = [np.linalg.det(np.stack([perturbed_lift(a), perturbed_lift(b), central_diff(perturbed_lift, b)]))
              for a, b in zip(xs, ys)]
    assert np.allclose(eval_F(fr, xs, ys, (0, 0)).value, oracle, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([PERTURBED, LOPSIDED, DOUBLE_LOOP]), st.floats(-7, 7))
def test_diagonal_zeros(spec, x):
    fr = TwoFrieze(parse_curve_spec(spec))
    F = eval_F(fr, x, x, (1, 1))
    assert abs(float(F.value)) <= 1e-12
    assert abs(float(F.d(1, 0))) <= 1e-10 and abs(float(F.d(0, 1))) <= 1e-10


def test_eval_F_order_cap():
    with pytest.raises(JetOrderError):
        eval_F(TwoFrieze(ConicCurve(1, 1)), 0.0, 1.0, (4, 0))


@pytest.mark.parametrize("spec", [PERTURBED, LOPSIDED])
def test_companion_matches_independent_G(spec):
    fr = TwoFrieze(parse_curve_spec(spec))
    x, y = np.meshgrid(np.linspace(0, 6, 9), np.linspace(0.4, 6.4, 9))
    G = eval_G(fr, x, y, (0, 0)).value
    assert np.allclose(companion_G(eval_F(fr, x, y, (1, 1))).value, G, atol=1e-10)
    assert np.allclose(companion_G(eval_G(fr, x, y, (1, 1))).value, eval_F(fr, x, y, (0, 0)).value, atol=1e-10)
    # symmetry: G(x, y) = F(y, x)
    assert np.allclose(G, eval_F(fr, y, x, (0, 0)).value, atol=1e-10)


def test_companion_needs_order():
    with pytest.raises(JetOrderError):
        companion_G(eval_F(TwoFrieze(ConicCurve(1, 1)), 0.0, 1.0, (0, 1)))


def test_explicit_formula():
    c = ConicCurve(1, 1)
    assert float(explicit_F(c, math.pi / 3, 0.0)) == pytest.approx(0.5, abs=1e-12)
    c = ConicCurve(2, 3)
    assert float(explicit_F(c, 1.0, 0.2)) == pytest.approx(float(eval_F(TwoFrieze(c), 1.0, 0.2, (0, 0)).value), abs=1e-10)
    for spec in (PERTURBED, LOPSIDED):
        c = parse_curve_spec(spec)
        x, y = np.meshgrid(np.linspace(0, 6, 7), np.linspace(0.5, 6.5, 7))
        assert np.allclose(explicit_F(c, x, y), eval_F(TwoFrieze(c), x, y, (0, 0)).value, atol=1e-10)
        assert np.allclose(explicit_F(c, x[0], x[0]), 0.0, atol=1e-12)


def test_sl3_det():
    for c in (ConicCurve(1, 1), PowerCurve((2, 1, 0), 0.5, 3.0), parse_curve_spec(LOPSIDED)):
        fr = TwoFrieze(c)
        lo = 0.5 if isinstance(c, PowerCurve) else 0.0
        x, y = np.meshgrid(np.linspace(lo, lo + 2, 5), np.linspace(lo + 0.3, lo + 2.3, 5))
        assert np.allclose(sl3_det(eval_F(fr, x, y, (2, 2))), 1.0, atol=1e-9)
        assert np.allclose(sl3_det(eval_G(fr, x, y, (2, 2))), 1.0, atol=1e-9)
        assert np.allclose(tame_det(eval_F(fr, x, y, (3, 3))), 0.0, atol=1e-9)


def _product_sum(x, y, ax, by, orders=(3, 3)):
    X = Jet.variable(x, orders, 0)
    Y = Jet.variable(y, orders, 1)
    return sum(exp(X * a) * exp(Y * b) for a, b in zip(ax, by))


def test_non_tilings_are_detected():
    orders = (3, 3)
    xy = Jet.variable(0.7, orders, 0) * Jet.variable(-0.4, orders, 1)
    assert float(sl3_det(xy)) == pytest.approx(0.0, abs=1e-14)
    # four separable terms with distinct rates: the 4x4 determinant is a product of Vandermondes
    a, b = [0.0, 0.5, -1.0, 1.5], [0.2, -0.3, 1.0, 0.7]
    F = _product_sum(0.3, -0.2, a, b)
    vand = lambda r: np.prod([r[j] - r[i] for i in range(4) for j in range(i + 1, 4)])
    expected = vand(a) * vand(b) * math.exp(sum(a) * 0.3 + sum(b) * -0.2)
    assert float(tame_det(F)) == pytest.approx(expected, rel=1e-9)
    assert abs(float(tame_det(F))) > 1e-3
    # three terms span a rank three family, so that one is tame
    assert abs(float(tame_det(_product_sum(0.3, -0.2, a[:3], b[:3])))) <= 1e-12


def test_tame_det_needs_order():
    with pytest.raises(JetOrderError):
        tame_det(eval_F(TwoFrieze(ConicCurve(1, 1)), 0.0, 1.0, (2, 2)))


@pytest.mark.parametrize("spec", [PERTURBED, LOPSIDED, DOUBLE_LOOP])
def test_dodgson_identities(spec):
    res = dodgson_residuals(TwoFrieze(parse_curve_spec(spec)), 16)
    assert max(res.values()) <= 1e-9


def test_self_duality_only_for_conics():
    assert self_duality_residual(TwoFrieze(ConicCurve(1, 1)), 16) <= 1e-12
    assert self_duality_residual(TwoFrieze(ConicCurve(2, 3)), 16) <= 1e-12
    assert self_duality_residual(TwoFrieze(parse_curve_spec(PERTURBED)), 16) > 1e-3


def test_verify_closed_circle():
    rep = verify_closed(TwoFrieze(ConicCurve(1, 1)), 32)
    assert rep.failures() == []
    assert rep.closed and rep.positive
    assert max(rep.frieze_relation_FG, rep.frieze_relation_GF, rep.boundary_max, rep.periodicity,
               rep.symmetry, rep.sl3_det_minus_1, rep.tameness_det) <= 1e-9
    # the smallest strip value is 1 - cos(margin) with margin T/128
    assert rep.positivity_min == pytest.approx(1 - math.cos(TAU / 128), rel=1e-9)


def test_verify_closed_power_curve_is_open():
    rep = verify_closed(TwoFrieze(PowerCurve((2, 1, 0))), 16)
    assert not rep.closed
    assert rep.periodicity == math.inf
    assert rep.boundary_max <= 1e-12
    assert rep.failures() == []
    assert "periodicity" not in rep.failures()


def test_verify_closed_non_convex_loop():
    rep = verify_closed(TwoFrieze(parse_curve_spec(DOUBLE_LOOP)), 32)
    assert rep.failures() == ["positivity_min"]
    assert rep.positivity_min <= 0 and not rep.positive


def test_verify_closed_validation():
    with pytest.raises(ValueError):
        verify_closed(TwoFrieze(ConicCurve(1, 1)), 4)


def test_failures_respect_tolerances():
    rep = verify_closed(TwoFrieze(parse_curve_spec(PERTURBED)), 16)
    assert rep.failures() == []
    tight = {k: 1e-30 for k in DEFAULT_TOLERANCES}
    assert set(rep.failures(tight)) <= set(DEFAULT_TOLERANCES)
    d = rep.to_dict()
    assert d["closed"] is True and d["positive"] is True


def test_non_dual_pair_keeps_frieze_relation():
    # any pairing Gamma(x) . Delta(y) obeys G = F F_xy - F_x F_y, but the diagonal is no longer zero
    fr = TwoFrieze(ConicCurve(1, 1), delta_curve=ConicCurve(2, 3))
    assert not fr.dual_pair and not fr.closed
    x, y = np.meshgrid(np.linspace(0, 6, 7), np.linspace(0.5, 6.5, 7))
    assert np.allclose(companion_G(eval_F(fr, x, y, (1, 1))).value, eval_G(fr, x, y, (0, 0)).value, atol=1e-10)
    assert np.max(np.abs(eval_F(fr, x[0], x[0], (0, 0)).value)) > 1e-2


def test_grid_csv():
    x, y, F, G = frieze_grid(TwoFrieze(ConicCurve(1, 1)), 8)
    assert x.shape == (64,)
    assert np.allclose(F, 1 - np.cos(x - y), atol=1e-12)
    text = grid_csv({"x": x, "y": y, "F": F, "G": G})
    lines = text.strip().split("\n")
    assert lines[0] == "x,y,F,G" and len(lines) == 65
    row = [float(v) for v in lines[9].split(",")]
    assert row == [x[8], y[8], F[8], G[8]]
