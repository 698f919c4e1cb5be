import math

import numpy as np
import pytest

from illiq_arb.curves import DomainError, power_law, proportional
from illiq_arb.liquidation import (
    ConeParams,
    Position,
    check_L_conditions,
    classify_position,
    cone_membership,
    delta_gap,
    delta_rate,
    delta_values,
    liquidate,
    liquidate_alpha,
    liquidate_limit,
    liquidation_values,
    min_scale_into_solvency,
    project_into_cone,
    scaling_threshold,
)

CONE = ConeParams(94.5, 99.0)


def test_position_arithmetic():
    p, q = Position(1, 2), Position(3, -1)
    assert p + q == Position(4, 1)
    assert -p == Position(-1, -2)
    assert 2 * p == p * 2 == Position(2, 4)
    with pytest.raises(DomainError):
        Position(float("nan"), 0)


def test_cone_params_validation():
    with pytest.raises(DomainError):
        ConeParams(100, 99)
    with pytest.raises(DomainError):
        ConeParams(94.5, 99, alpha_level=1.0)


def test_liquidate(A):
    assert liquidate(A, Position(10, 0)) == 10
    assert liquidate(A, Position(0, 3)) == pytest.approx(275.75)
    assert liquidate(A, Position(0, -3)) == pytest.approx(-315.5)


def test_liquidate_keeps_units_when_sale_loses(A):
    # proceeds of a tiny sale are below the fee, so nothing is sold
    assert liquidate(A, Position(5, 0.001)) == 5


def test_cash_translation(A):
    for y in (-7.0, -0.5, 0.0, 0.004, 2.0):
        assert liquidate(A, Position(13.0, y)) == 13.0 + liquidate(A, Position(0.0, y))


def test_liquidate_limit_and_alpha():
    assert liquidate_limit(CONE, Position(0, 3)) == pytest.approx(283.5)
    assert liquidate_limit(CONE, Position(7, 0)) == 7
    assert liquidate_limit(CONE, Position(99, -1)) == 0
    ca = ConeParams(94.5, 99, 0.04)
    assert liquidate_alpha(ca, Position(0, -1)) == pytest.approx(-102.96)
    assert liquidate_alpha(ca, Position(102.96, -1)) == pytest.approx(0, abs=1e-12)
    assert liquidate_alpha(ConeParams(94.5, 99, 0.0), Position(3, 2)) == liquidate_limit(CONE, Position(3, 2))


def test_liquidate_alpha_cap(A):
    with pytest.raises(DomainError):
        liquidate_alpha(ConeParams(94.5, 99, 0.2), Position(0, 1), curve=A)
    liquidate_alpha(ConeParams(94.5, 99, 0.04), Position(0, 1), curve=A)


def test_alpha_below_limit():
    ca = ConeParams(94.5, 99, 0.03)
    for p in (Position(1, 2), Position(-5, -3), Position(0, 0)):
        assert liquidate_alpha(ca, p) <= liquidate_limit(CONE, p)


def test_delta_gap(A):
    assert delta_gap(A, Position(0, 3)) == pytest.approx(7.75)
    assert delta_gap(A, Position(0, 3)) == pytest.approx(283.5 - 275.75)
    assert delta_gap(A, Position(0, -3)) == pytest.approx(18.5)
    assert delta_gap(A, Position(42, 0)) == 0


def test_delta_idle_branch(A):
    # below the break-even volume nothing is sold: δ = y·bid_inf
    assert delta_gap(A, Position(0, 0.005)) == pytest.approx(0.005 * 94.5)


def test_delta_rate(A):
    assert delta_rate(A, 3, 1) == pytest.approx(7.75)
    lam = 1e8
    tail = 1 / lam + 3 * 4.5 / math.sqrt(3 * lam + 1)
    assert delta_rate(A, 3, lam) == pytest.approx(tail, rel=1e-9)
    assert delta_rate(A, 3, lam) <= 1e-2
    assert delta_rate(A, 0, 50) == 0
    with pytest.raises(DomainError):
        delta_rate(A, 1, 0.5)


def test_classify(A):
    c = classify_position(A, Position(1, 0))
    assert c.tag == "interior" and c.value == 1
    assert classify_position(A, Position(315.5, -3)).tag == "boundary"
    assert classify_position(A, Position(0, -3)).tag == "insolvent"
    # the strip (0, a0] x {0} is interior
    assert classify_position(A, Position(2.0, 0)).tag == "interior"


def test_cone_membership():
    assert cone_membership(CONE, Position(99, -1)).tag == "boundary"
    assert cone_membership(CONE, Position(1, 1)).tag == "interior"
    assert cone_membership(CONE, Position(-1, 0)).tag == "insolvent"
    assert cone_membership(ConeParams(94.5, 99, 0.04), Position(99, -1)).tag == "insolvent"


def test_project_into_cone():
    assert project_into_cone(CONE, Position(1, 0), 0.1) == Position(1, 0)
    out = project_into_cone(CONE, Position(-94.5, 1), 1.0)
    assert out == Position(-94.5, max(1, 94.5 / 93.5))
    # boundary ray point: units converge to -1 and every image is strictly inside
    for eps in (1e-1, 1e-3, 1e-6):
        q = project_into_cone(CONE, Position(99, -1), eps)
        assert liquidate_limit(CONE, q) > 0
    assert project_into_cone(CONE, Position(99, -1), 1e-9).units == pytest.approx(-1, abs=1e-9)
    with pytest.raises(DomainError):
        project_into_cone(CONE, Position(1, 1), 0)


def test_project_lands_inside_for_negative_cash():
    for eps in (0.01, 1.0, 100.0):
        q = project_into_cone(CONE, Position(-50, 0), eps)
        assert liquidate_limit(CONE, q) > 0


def test_scaling_threshold(A):
    th = scaling_threshold(A, 0.05, 0.11, S=99)
    assert th.m_eps == pytest.approx(9999, rel=1e-9)
    assert th.y_sell == pytest.approx(9999, rel=1e-9)
    assert th.y_buy == pytest.approx(-9999, rel=1e-9)
    with pytest.raises(DomainError):
        scaling_threshold(A, 0.05, 5.0, S=99)


def test_scaling_threshold_zero_fees():
    c = power_law(90, 94.5, 110, 99, 0.5)
    th = scaling_threshold(c, 0.05, 0.5)
    assert th.y_sell == th.m_eps and th.y_buy == -th.m_eps


def test_scaling_threshold_brute_force(A):
    alpha, eps = 0.04, 1.0
    th = scaling_threshold(A, alpha, eps)
    for y in np.linspace(th.y_sell, 5 * th.y_sell, 50):
        assert classify_position(A, Position(-y * (1 - alpha) * 94.5, y)).solvent
    for y in np.linspace(th.y_buy, 5 * th.y_buy, 50):
        assert classify_position(A, Position(-y * (1 + alpha) * 99, y)).solvent


def _scan_oracle(n_max=100):
    # L(n·(103.95, -1)) = 4.95n - 2 - 11n/sqrt(n+1)
    for n in range(1, n_max):
        if 4.95 * n - 2 - 11 * n / math.sqrt(n + 1) >= 0:
            return n


def test_min_scale_fixture(A):
    p = Position(103.95, -1)
    assert _scan_oracle() == 5
    assert min_scale_into_solvency(A, p, integer_only=True) == 5
    assert liquidate(A, 4 * p) == pytest.approx(-1.877, abs=1e-3)
    assert liquidate(A, 5 * p) == pytest.approx(0.296, abs=1e-3)
    lam = min_scale_into_solvency(A, p)
    assert 4 < lam < 5 and classify_position(A, lam * p).solvent
    assert not classify_position(A, (lam * (1 - 1e-9)) * p).solvent


def test_min_scale_special_cases(A):
    assert min_scale_into_solvency(A, Position(1, 0)) == 1
    assert min_scale_into_solvency(A, Position(94.5, -1), integer_only=True) is None
    assert min_scale_into_solvency(A, Position(-1, 0)) is None
    assert min_scale_into_solvency(A, Position(0, 0), strict=True) is None


def test_monotone_scan(A):
    p = Position(103.95, -1)
    n = min_scale_into_solvency(A, p, integer_only=True)
    assert all(liquidate(A, k * p) >= 0 for k in range(n, n + 200))


def test_check_L_conditions_proportional():
    rep = check_L_conditions([proportional(99, 101, a0=1, b0=-1)], 10, [1, 10, 100])
    assert rep.gL0_pass
    assert rep.gL0_sup[0] <= 1 + 1e-12


def test_check_L_conditions_curve_a(A):
    rep = check_L_conditions([A], 10, [10.0**k for k in range(6)])
    assert rep.L0_pass
    assert not rep.gL0_pass
    assert rep.probe_lambda == 1e3
    assert all(b > a for a, b in zip(rep.probe_values, rep.probe_values[1:]))
    assert rep.L1_pass and rep.L1_min > 0
    with pytest.raises(DomainError):
        check_L_conditions([], 10, [1, 2])
    with pytest.raises(DomainError):
        check_L_conditions([A], 10, [1])


def test_vectorized_matches_scalar(A):
    xs = np.array([-5.0, 0.0, 12.0])
    ys = np.array([-2.0, 0.5, 3.0])
    vec = liquidation_values(A, xs, ys)
    assert list(vec) == [liquidate(A, Position(x, y)) for x, y in zip(xs, ys)]
    assert list(delta_values(A, ys)) == [delta_gap(A, Position(0, y)) for y in ys]
