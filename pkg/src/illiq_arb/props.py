"""Seeded randomized invariant suites, shared by the ``props`` command and the acceptance tests."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arbitrage import brute_force_search
from .curves import REL_TOL, PowerLaw, alpha_cap, inequality_slacks, power_law, proportional
from .fixtures import curve_a, curve_b
from .liquidation import (
    Position,
    classify_position,
    cone_of,
    delta_rate,
    delta_values,
    limit_values,
    liquidation_values,
    min_scale_into_solvency,
    scaling_threshold,
)
from .market import KBAR, Node, ScenarioTree

DEFAULT_SEED = 20240611
LAMBDA_GRID = tuple(10.0**k for k in range(9))


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    checks: int
    worst: float = 0.0  # most negative slack seen (0 when nothing failed)
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.checks} checks, worst {self.worst:.3g}"


def random_power_law(rng: np.random.Generator, shape_range=(0.3, 0.9), price_range=(1.0, 1000.0)) -> PowerLaw:
    """A power-law curve with ``bid0 <= bid_inf < ask_inf <= ask0`` drawn from ``price_range``."""
    while True:
        bid0, bid_inf, ask_inf, ask0 = np.sort(rng.uniform(*price_range, size=4))
        if bid_inf < ask_inf:
            break
    return power_law(bid0, bid_inf, ask0, ask_inf, rng.uniform(*shape_range),
                     a0=rng.uniform(0.0, 5.0), b0=-rng.uniform(0.0, 5.0))


def inequality_suite(seed: int = DEFAULT_SEED, n_curves: int = 1000, n_pairs: int = 100) -> SuiteResult:
    """The six volume inequalities on random curves and pairs ``0 < v2 < v1 <= 1e4``."""
    rng = np.random.default_rng(seed)
    worst, fails, strict_fails = 0.0, {}, 0
    for _ in range(n_curves):
        c = random_power_law(rng)
        v1 = rng.uniform(0.0, 1e4, n_pairs)
        v2 = v1 * rng.uniform(0.0, 1.0, n_pairs)
        ok = (v1 > 0) & (v2 > 0) & (v2 < v1)
        v1, v2 = v1[ok], v2[ok]
        for name, (slack, tol) in inequality_slacks(c, v1, v2).items():
            rel = slack / (tol / REL_TOL)
            worst = min(worst, float(rel.min()))
            bad = int(np.sum(slack < -tol))
            if name in ("ineq5", "ineq6"):
                strict_fails += int(np.sum(slack <= 0))
            if bad:
                fails[name] = fails.get(name, 0) + bad
    passed = not fails and strict_fails == 0
    return SuiteResult("inequalities", passed, n_curves * n_pairs * 6, worst,
                       {"failures": fails, "strict_failures": strict_fails})


def liquidation_suite(seed: int = DEFAULT_SEED, n_pairs: int = 100_000, n_curves: int = 100) -> SuiteResult:
    """Superadditivity, scaling, the explicit gap formula and its sign on random positions."""
    rng = np.random.default_rng(seed)
    per = n_pairs // n_curves
    counts = {"superadditive": 0, "scaling": 0, "delta_formula": 0, "delta_sign": 0}
    worst = 0.0
    for _ in range(n_curves):
        c = random_power_law(rng)
        cone = cone_of(c)
        scale = c.ask0
        x1, x2 = rng.uniform(-50 * scale, 50 * scale, (2, per))
        y1, y2 = rng.uniform(-50, 50, (2, per))
        lam = rng.uniform(1.0, 1e3, per)
        L1, L2 = liquidation_values(c, x1, y1), liquidation_values(c, x2, y2)
        L12 = liquidation_values(c, x1 + x2, y1 + y2)
        mag = 1.0 + np.abs(L1) + np.abs(L2) + np.abs(x1) + np.abs(x2) + (np.abs(y1) + np.abs(y2)) * scale
        s = (L12 - L1 - L2) / mag
        counts["superadditive"] += int(np.sum(s < -REL_TOL))
        Lk = liquidation_values(c, lam * x1, lam * y1)
        s2 = (Lk - lam * L1) / (lam * (1.0 + np.abs(L1) + np.abs(x1) + np.abs(y1) * scale))
        counts["scaling"] += int(np.sum(s2 < -REL_TOL))
        Lbar = limit_values(cone, x1, y1)
        d = delta_values(c, y1)
        diff = np.abs(d - (Lbar - L1)) / (1.0 + np.abs(Lbar) + np.abs(L1))
        counts["delta_formula"] += int(np.sum(diff > REL_TOL))
        counts["delta_sign"] += int(np.sum(d < -REL_TOL * (1.0 + np.abs(y1) * scale)))
        worst = min(worst, float(s.min()), float(s2.min()), -float(diff.max()))
    return SuiteResult("liquidation", not any(counts.values()), n_curves * per * 4, worst, {"failures": counts})


def hull_suite(seed: int = DEFAULT_SEED, n_positions: int = 1000, lam: float = 1e8) -> SuiteResult:
    """``L(λp)/λ`` against ``L̄(p)`` at large ``λ``, and monotone decay of the gap rate.

    Positions have cash uniform on ``[-1000, 1000]`` and units on ``[-10, 10]``,
    split evenly between the two reference curves.
    """
    rng = np.random.default_rng(seed)
    fails, worst_ratio, mono_fails, checks = 0, 0.0, 0, 0
    worst_point = None
    for c in (curve_a(), curve_b()):
        k = n_positions // 2
        x = rng.uniform(-1000.0, 1000.0, k)
        y = rng.uniform(-10.0, 10.0, k)
        Lbar = limit_values(cone_of(c), x, y)
        err = np.abs(liquidation_values(c, lam * x, lam * y) / lam - Lbar)
        tol = 1e-3 * (1.0 + np.abs(Lbar))
        bad = err > tol
        fails += int(bad.sum())
        r = err / tol
        i = int(np.argmax(r))
        if r[i] > worst_ratio:
            worst_ratio, worst_point = float(r[i]), (float(x[i]), float(y[i]))
        rates = np.array([delta_rate(c, y, l) for l in LAMBDA_GRID])
        steps = np.diff(rates, axis=0)
        mono_fails += int(np.sum(steps > REL_TOL * (1.0 + np.abs(rates[:-1]))))
        checks += 2 * k
    return SuiteResult("hull_convergence", fails == 0 and mono_fails == 0, checks, -max(0.0, worst_ratio - 1.0),
                       {"convergence_failures": fails, "monotone_failures": mono_fails,
                        "worst_error_over_tol": worst_ratio, "worst_point": worst_point})


def threshold_suite(seed: int = DEFAULT_SEED, n_curves: int = 100) -> SuiteResult:
    """Alpha-cone boundary points past the unit thresholds are solvent; plus the fixed scale example."""
    rng = np.random.default_rng(seed)
    fails, checks = 0, 0
    mults = np.array([1.0, 1.01, 1.5, 2.0, 10.0, 1e3])
    for _ in range(n_curves):
        c = random_power_law(rng, price_range=(10.0, 1000.0))
        cap = alpha_cap(c)
        alpha = rng.uniform(0.1, 1.0) * cap
        eps = rng.uniform(0.1, 0.9) * alpha * c.bid_inf
        th = scaling_threshold(c, alpha, eps)
        for y in th.y_buy * mults:
            p = Position(-y * (1 + alpha) * c.ask_inf, y)
            fails += not classify_position(c, p).solvent
        for y in th.y_sell * mults:
            p = Position(-y * (1 - alpha) * c.bid_inf, y)
            fails += not classify_position(c, p).solvent
        checks += 2 * mults.size
    n = min_scale_into_solvency(curve_a(), Position(103.95, -1.0), integer_only=True)
    return SuiteResult("thresholds", fails == 0 and n == 5, checks + 1, -float(fails),
                       {"boundary_failures": fails, "fixture_scale": n})


def closed_form_arbitrage(ask0: float, bid0: float, leaf_bids, leaf_asks) -> bool:
    """One-period zero-fee proportional market: buy-and-sell or sell-and-buy wins in every state."""
    return ask0 < min(leaf_bids) or bid0 > max(leaf_asks)


def one_period_tree(bid0: float, ask0: float, leaves, prob_up: float = 0.5) -> ScenarioTree:
    (b1, a1), (b2, a2) = leaves
    return ScenarioTree((Node("root", 0, None, 1.0, proportional(bid0, ask0)),
                         Node("up", 1, "root", prob_up, proportional(b1, a1)),
                         Node("down", 1, "root", 1.0 - prob_up, proportional(b2, a2))))


def oracle_suite(seed: int = DEFAULT_SEED, n_markets: int = 20) -> SuiteResult:
    """Brute-force search against the closed-form condition on random one-period markets."""
    rng = np.random.default_rng(seed)
    disagree = []
    for i in range(n_markets):
        bid0, ask0 = np.sort(rng.uniform(95.0, 105.0, 2))
        leaves = [tuple(np.sort(rng.uniform(90.0, 110.0, 2))) for _ in range(2)]
        tree = one_period_tree(bid0, ask0, leaves, rng.uniform(0.1, 0.9))
        found = brute_force_search(tree, KBAR, [-1.0, 0.0, 1.0]).is_arbitrage
        expect = closed_form_arbitrage(ask0, bid0, [b for b, _ in leaves], [a for _, a in leaves])
        if found != expect:
            disagree.append(i)
    return SuiteResult("oracle_agreement", not disagree, n_markets, -float(len(disagree)), {"disagreements": disagree})


SUITES = {
    "inequalities": inequality_suite,
    "liquidation": liquidation_suite,
    "hull_convergence": hull_suite,
    "thresholds": threshold_suite,
    "oracle_agreement": oracle_suite,
}


def run_all(seed: int = DEFAULT_SEED) -> list[SuiteResult]:
    return [fn(seed) for fn in SUITES.values()]


__all__ = [
    "DEFAULT_SEED", "SUITES", "SuiteResult", "closed_form_arbitrage", "hull_suite", "inequality_suite",
    "liquidation_suite", "one_period_tree", "oracle_suite", "random_power_law", "run_all", "threshold_suite",
]
