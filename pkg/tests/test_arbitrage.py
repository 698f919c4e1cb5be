import math

import pytest

from illiq_arb.arbitrage import (
    AmplificationTrace,
    ExampleParams,
    TraceStep,
    amplify_alpha_to_G,
    amplify_integer,
    amplify_Kbar_to_G,
    brute_force_search,
    example_margin,
    example_strong_arbitrage,
    integer_self_financing,
    normalize_terminal,
    repair_to_G,
    round_trip,
    tilt_Kbar_to_K,
    tilt_perturbation_bound,
)
from illiq_arb.curves import DomainError, power_law, proportional
from illiq_arb.fixtures import alpha_strategy, curve_a, curve_b, example_params, example_two_leaf_tree
from illiq_arb.liquidation import Position, liquidate
from illiq_arb.market import (
    G,
    KBAR,
    Kalpha,
    Node,
    ScenarioTree,
    Strategy,
    arbitrage_verdict,
    evolve,
    self_financing_check,
    terminal_liquidation,
)
from illiq_arb.props import one_period_tree


def repaired_leaf_oracle(k):
    # leaf cash after repair: 11k + L_A(k·(99, -1)) + L_B(k·(-110, 1))
    #   = 11k - 2 - 11k/sqrt(k+1) - 1 - 6k/sqrt(k+1)
    return 11 * k - 3 - 17 * k / math.sqrt(k + 1)


def test_normalize_terminal_unchanged(tree, chain):
    assert normalize_terminal(tree, chain, KBAR) == chain


def test_normalize_terminal_units_to_cash():
    A, B = curve_a(), curve_b()
    t = ScenarioTree((Node("r", 0, None, 1.0, A), Node("l", 1, "r", 1.0, B)))
    s = Strategy.on(t, {"r": Position(-99, 1)})
    out = normalize_terminal(t, s, KBAR)
    # L̄(-99, 1) = 11 on the leaf cone; ζ = (-110, 1)
    assert out.at("l") == Position(110, -1)
    assert evolve(t, out)["l"] == Position(11, 0)
    assert self_financing_check(t, out, KBAR).passed


def test_normalize_terminal_negative_leaf():
    t = one_period_tree(99, 100, [(98, 99), (97, 98)])
    s = Strategy.on(t, {"root": Position(-100, 1)})
    with pytest.raises(DomainError):
        normalize_terminal(t, s, KBAR)


def test_repair_auto_k(tree, chain):
    assert repaired_leaf_oracle(2) == pytest.approx(-0.6299, abs=1e-4)
    assert repaired_leaf_oracle(3) == pytest.approx(4.5, abs=1e-12)
    r = repair_to_G(tree, chain)
    assert r.k == 3
    assert r.leaf_values["n2"] == pytest.approx(4.5, abs=1e-9)
    for k, v in r.trace:
        assert v == pytest.approx(repaired_leaf_oracle(k), abs=1e-9)
    rep = self_financing_check(tree, r.strategy, G)
    assert rep.passed and all(c.value == 0.0 for c in rep.nodes)


def test_repair_explicit_k(tree, chain):
    r = repair_to_G(tree, chain, k=2)
    assert r.k == 2 and not r.diagnostics["positive"]
    assert r.leaf_values["n2"] == pytest.approx(repaired_leaf_oracle(2), abs=1e-9)
    with pytest.raises(DomainError):
        repair_to_G(tree, chain, k=0)


def test_repair_zero_strategy(tree):
    r = repair_to_G(tree, Strategy.zero(tree))
    assert r.k == 1 and r.strategy.is_zero()


def test_repair_zero_fee_proportional_is_identity():
    c0, c1 = proportional(99, 100), proportional(103, 104)
    t = ScenarioTree((Node("r", 0, None, 1.0, c0), Node("l", 1, "r", 1.0, c1)))
    s = round_trip(t, "r", "l", KBAR, 1.0)
    r = repair_to_G(t, s, k=1)
    assert r.strategy == s
    assert repair_to_G(t, s).k == 1


def test_amplify_alpha_tree_d(tree):
    s = alpha_strategy(0.04, tree)
    assert s.at("n1").cash == pytest.approx(-102.96) and s.at("n2").cash == pytest.approx(105.6)
    out, trace = amplify_alpha_to_G(tree, s, 0.04)
    assert trace.info["n_t"] == {"1": 8, "2": 2}
    assert trace.info["N"] == 10
    assert trace.verdict == "exact_arbitrage"
    assert self_financing_check(tree, out, G).passed
    (lv,) = terminal_liquidation(tree, out, G)
    assert lv.portfolio.cash == pytest.approx(26.4) and lv.portfolio.units == 0


def test_amplify_alpha_scale_oracle():
    # independent integer scans of the two closed forms
    n1 = next(n for n in range(1, 100) if 3.96 * n - 2 - 11 * n / math.sqrt(n + 1) >= 0)
    n2 = next(n for n in range(1, 100) if 4.4 * n - 1 - 6 * n / math.sqrt(n + 1) >= 0)
    assert (n1, n2) == (8, 2)
    assert liquidate(curve_a(), Position(102.96 * n1, -n1)) >= 0


def test_amplify_alpha_errors(tree, chain):
    losing = round_trip(tree, "n2", "n2", Kalpha(0.04), 0.0)
    assert losing.is_zero()
    out, trace = amplify_alpha_to_G(tree, losing, 0.04)
    assert out == losing and trace.info["trivial"] and trace.verdict == "failed"
    # buy at the root, sell one period later at the lower alpha bid
    not_arb = round_trip(tree, "root", "n1", Kalpha(0.04), 1.0)
    with pytest.raises(DomainError):
        amplify_alpha_to_G(tree, not_arb, 0.04)
    with pytest.raises(DomainError):
        amplify_alpha_to_G(tree, alpha_strategy(0.3, tree), 0.3)


def test_amplify_alpha_stochastic():
    t = example_two_leaf_tree(0.6)
    s = round_trip(t, "B1", "B1.2", Kalpha(0.04), 1.0)
    out, trace = amplify_alpha_to_G(t, s, 0.04)
    step = trace.steps[-1]
    assert step.p_nonneg == 1 and step.p_pos >= 0.5 * trace.info["p_alpha_pos"] and step.p_pos >= 0.3


def test_tilt(chain, tree):
    t = tilt_Kbar_to_K(chain, 10)
    assert t.at("n1") == Position(-99, 0.9)
    same = Strategy({"a": Position(1, 1)})
    assert tilt_Kbar_to_K(same, 3) == same
    assert tilt_perturbation_bound(tree, 100) == pytest.approx(3.45)
    with pytest.raises(DomainError):
        tilt_Kbar_to_K(chain, 0)


def test_tilt_moves_inside_cone(chain, tree):
    t = tilt_Kbar_to_K(chain, 10)
    for c in self_financing_check(tree, t, KBAR).nodes:
        assert c.value >= 0


def test_amplify_Kbar_exact_on_large_n(tree, chain):
    trace = amplify_Kbar_to_G(tree, chain, [64, 256, 1024])
    assert trace.verdict == "exact_arbitrage"
    assert all(s.p_sf == s.p_nonneg == s.p_pos == 1 for s in trace.steps)


def test_amplify_Kbar_small_n_fails_first(tree, chain):
    # unit tilt leaves terminal units -2n/(n²-1); α-value 11 - 230/(n-1) is negative for n <= 21
    trace = amplify_Kbar_to_G(tree, chain, [4, 16, 64])
    assert [s.p_nonneg for s in trace.steps] == [0, 0, 1]
    assert trace.verdict == "asymptotic_trend"
    Ns = [s.N for s in trace.steps]
    assert Ns == sorted(set(Ns))


def test_amplify_Kbar_errors(tree, chain):
    with pytest.raises(DomainError):
        amplify_Kbar_to_G(tree, chain, [])
    bad = Strategy.on(tree, {"n1": Position(-90, 1)})
    with pytest.raises(DomainError):
        amplify_Kbar_to_G(tree, bad, [8])


def test_amplify_Kbar_two_leaf_boundary():
    A, B = curve_a(), curve_b()
    D = power_law(95, 99, 110, 104, 0.5, a0=2, b0=-1)
    t = ScenarioTree((Node("root", 0, None, 1.0, A), Node("up", 1, "root", 0.6, B),
                      Node("down", 1, "root", 0.4, D)))
    s = Strategy.on(t, {"root": Position(-99, 1)})
    trace = amplify_Kbar_to_G(t, s, [32, 64, 256, 1024])
    assert all(st.p_pos >= 0.6 for st in trace.steps)
    # the held unit on the down leaf never liquidates positively on the concave market
    assert all(st.p_nonneg == pytest.approx(0.6) for st in trace.steps)
    assert trace.verdict == "failed"


def test_amplify_integer(tree):
    s = alpha_strategy(0.04, tree)
    out, trace = amplify_integer(tree, s, 0.04, "MalphaN")
    assert out.integer and trace.info["N"] == 10
    assert integer_self_financing(tree, out)
    assert all(p.units == int(p.units) for p in out.transfers.values())
    with pytest.raises(DomainError):
        amplify_integer(tree, Strategy.on(tree, {"n1": Position(-50, 0.5)}), 0.04)
    cash = Strategy.on(tree, {"n1": Position(-1, 0)})
    same, tr = amplify_integer(tree, cash, 0.04)
    assert same.transfers == cash.transfers and tr.info["trivial"]


def test_amplify_integer_kbar(tree, chain):
    out, trace = amplify_integer(tree, chain, kind="KbarN", n_grid=[64, 256])
    assert trace.verdict == "exact_arbitrage" and out.integer
    assert integer_self_financing(tree, out)


def test_trace_csv_and_monotone():
    tr = AmplificationTrace((TraceStep(4, 2, 1.0, 0.0, 0.0), TraceStep(8, 5, 1.0, 1.0, 0.5)))
    assert tr.to_csv() == "n,N_n,p_sf,p_nonneg,p_pos\n4,2,1.0,0.0,0.0\n8,5,1.0,1.0,0.5\n"
    with pytest.raises(DomainError):
        AmplificationTrace((TraceStep(4, 5, 1, 1, 1), TraceStep(8, 5, 1, 1, 1)))


def test_example_margin_values():
    assert example_margin(100, 101, 0.10, 0.05, 0.05, 0.5, 99) == pytest.approx(18.495, abs=1e-12)
    assert example_margin(100, 101, 0.10, 0.0, 0.0, 0.5, 42) == pytest.approx(9)


def test_example_strong_arbitrage():
    r = example_strong_arbitrage(example_params(0.6))
    assert r.m1 == pytest.approx(18.495, abs=1e-12)
    v = arbitrage_verdict(r.tree, r.strategy, G)
    assert v.tag == "strong_arbitrage" and v.t_star == 1 and v.event == ("B1",)
    assert v.floor == pytest.approx(99 * 18.495, rel=1e-12)


def test_example_proportional_and_crash():
    pq0 = ExampleParams(100, 101, (0, 0), (0, 0), 0.10)
    r = example_strong_arbitrage(pq0, [1, 10, 100])
    assert all(m == pytest.approx(9) for _, m in r.margins)
    crash = ExampleParams(100, 101, (0, 0), (0, 0), -0.5)
    r = example_strong_arbitrage(crash, [1, 10, 100])
    assert r.strategy is None and r.m1 < 0


def test_example_params_invariant():
    with pytest.raises(DomainError):
        ExampleParams(100, 101, (0.05, 0.05), (0.05, 0.05), 0.1)


def test_brute_force_examples():
    t = one_period_tree(99, 100, [(103, 104), (101, 102)])
    v = brute_force_search(t, KBAR, [-1, 0, 1])
    assert v.is_arbitrage and v.best_min == pytest.approx(1) and not v.partial
    assert v.witness.at("root") == Position(-100, 1)
    t2 = one_period_tree(100, 100.5, [(103, 104), (99, 100)])
    assert brute_force_search(t2, KBAR, [-1, 0, 1]).tag == "no_arbitrage_witnessed"
    v0 = brute_force_search(t, KBAR, [0])
    assert v0.tag == "no_arbitrage_witnessed" and v0.best_min == 0


def test_brute_force_partial_budget(tree):
    v = brute_force_search(tree, KBAR, [-2, -1, 0, 1, 2], budget=10, seed=3)
    assert v.partial and v.evaluations == 10


def test_brute_force_finds_repaired_chain(tree):
    v = brute_force_search(tree, G, [-3, 0, 3])
    assert v.is_arbitrage
