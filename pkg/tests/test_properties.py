"""Hypothesis checks of the liquidation calculus and curve inequalities."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from illiq_arb.curves import REL_TOL, inequality_slacks, power_law
from illiq_arb.liquidation import (
    Position,
    cone_of,
    delta_gap,
    delta_rate,
    liquidate,
    liquidate_limit,
)

prices = st.floats(1.0, 1000.0)


@st.composite
def curves(draw):
    p = sorted(draw(st.lists(prices, min_size=4, max_size=4, unique=True)))
    return power_law(p[0], p[1], p[3], p[2], draw(st.floats(0.3, 0.9)),
                     a0=draw(st.floats(0.0, 5.0)), b0=-draw(st.floats(0.0, 5.0)))


positions = st.builds(Position, st.floats(-1e4, 1e4), st.floats(-100.0, 100.0))


def tol(*vals):
    return REL_TOL * (1.0 + sum(abs(v) for v in vals))


@settings(max_examples=300, deadline=None)
@given(curves(), positions, positions)
def test_superadditive(c, p, q):
    lp, lq = liquidate(c, p), liquidate(c, q)
    scale = abs(p.cash) + abs(q.cash) + (abs(p.units) + abs(q.units)) * c.ask0
    assert liquidate(c, p + q) >= lp + lq - tol(lp, lq, scale)


@settings(max_examples=300, deadline=None)
@given(curves(), positions, st.floats(1.0, 1e3))
def test_scaling(c, p, lam):
    lp = liquidate(c, p)
    scale = lam * (abs(p.cash) + abs(p.units) * c.ask0)
    assert liquidate(c, lam * p) >= lam * lp - tol(lam * lp, scale)


@settings(max_examples=300, deadline=None)
@given(curves(), positions)
def test_delta_matches_difference(c, p):
    lbar, l = liquidate_limit(cone_of(c), p), liquidate(c, p)
    d = delta_gap(c, p)
    assert d >= -tol(lbar, l)
    assert abs(d - (lbar - l)) <= tol(lbar, l)


@settings(max_examples=200, deadline=None)
@given(curves(), st.floats(-50.0, 50.0))
def test_delta_rate_nonincreasing(c, y):
    rates = [delta_rate(c, y, 10.0**k) for k in range(9)]
    assert all(b <= a + tol(a) for a, b in zip(rates, rates[1:]))


@settings(max_examples=300, deadline=None)
@given(curves(), st.floats(1e-6, 1e4), st.floats(1e-3, 1.0 - 1e-3))
def test_inequalities(c, v1, frac):
    v2 = v1 * frac
    for name, (slack, t) in inequality_slacks(c, np.array([v1]), np.array([v2])).items():
        assert slack[0] >= -t[0], name


@settings(max_examples=200, deadline=None)
@given(curves(), st.floats(0.0, 1e4), st.floats(0.0, 1e4))
def test_price_monotone(c, m1, m2):
    lo, hi = min(m1, m2), max(m1, m2)
    assert c.bid_at(lo) <= c.bid_at(hi) + tol(c.bid_inf)
    assert c.ask_at(lo) >= c.ask_at(hi) - tol(c.ask0)


@settings(max_examples=200, deadline=None)
@given(curves(), st.floats(0.0, 1e3), st.floats(1.0, 100.0))
def test_cost_scaling(c, v, lam):
    assert c.cost(lam * v) <= lam * c.cost(v) + tol(lam * c.cost(v))
    assert c.proceeds(lam * v) >= lam * c.proceeds(v) - tol(lam * c.proceeds(v))


@settings(max_examples=200, deadline=None)
@given(curves(), positions)
def test_solvent_stays_solvent(c, p):
    if liquidate(c, p) >= 0:
        for lam in (1.5, 10.0, 1e3):
            q = lam * p
            assert liquidate(c, q) >= -tol(q.cash, q.units * c.ask0)


@settings(max_examples=200, deadline=None)
@given(curves(), st.floats(-1e3, 1e3), st.floats(-50.0, 50.0).filter(lambda y: abs(y) > 1e-3))
def test_continuity_away_from_zero_units(c, x, y):
    h = 1e-7
    base = liquidate(c, Position(x, y))
    for dx, dy in ((h, 0), (0, h * 1e-2), (-h, -h * 1e-2)):
        near = liquidate(c, Position(x + dx, y + dy))
        # a jump can only occur where the sale just covers the fixed fee
        if (c.proceeds(abs(y)) >= 0) == (c.proceeds(abs(y + dy)) >= 0):
            assert abs(near - base) <= 1e-3 * (1 + abs(base))
