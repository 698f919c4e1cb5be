"""Constructions that carry arbitrage from the cone markets to the concave-cost market.

* :func:`repair_to_G` turns a cone-market arbitrage into a concave-cost one by
  scaling it and paying each node's liquidation shortfall in cash.
* :func:`amplify_alpha_to_G` scales an arbitrage on the proportional market
  with widened spreads until every transfer and terminal position is solvent.
* :func:`amplify_Kbar_to_G` tilts a limit-cone arbitrage into the widened
  market for a sequence of levels ``1/n`` and records the resulting scales.
* :func:`brute_force_search` enumerates small strategies and serves as an
  independent oracle for all of the above.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ._search import first_true_int
from .curves import CostCurve, DomainError, alpha_cap, power_law
from .liquidation import SCALE_CAP, Position, delta_rate, liquidate, min_scale_into_solvency
from .market import (
    G,
    GN,
    KBAR,
    KBARN,
    Kalpha,
    MalphaN,
    MarketKind,
    Node,
    ScenarioTree,
    Strategy,
    Verdict,
    arbitrage_verdict,
    boundary_transfer,
    evolve,
    leaf_probabilities,
    restrict_integer,
    self_financing_check,
    terminal_liquidation,
)

TRACE_COLUMNS = ("n", "N_n", "p_sf", "p_nonneg", "p_pos")


@dataclass(frozen=True)
class TraceStep:
    n: int
    N: int
    p_sf: float
    p_nonneg: float
    p_pos: float

    @property
    def exact(self) -> bool:
        return self.p_sf >= 1.0 - 1e-12 and self.p_nonneg >= 1.0 - 1e-12 and self.p_pos > 0


@dataclass(frozen=True)
class AmplificationTrace:
    """Scales and the three probability sequences of an amplification run.

    ``verdict`` is ``exact_arbitrage`` when every step is an exact arbitrage,
    ``asymptotic_trend`` when the last step is, and ``failed`` otherwise.
    """

    steps: tuple[TraceStep, ...]
    info: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        Ns = [s.N for s in self.steps]
        if any(b <= a for a, b in zip(Ns, Ns[1:])):
            raise DomainError(f"trace scales must increase strictly, got {Ns}")

    @property
    def verdict(self) -> str:
        if self.steps and all(s.exact for s in self.steps):
            return "exact_arbitrage"
        if self.steps and self.steps[-1].exact:
            return "asymptotic_trend"
        return "failed"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(TRACE_COLUMNS) + "\n")
        for s in self.steps:
            buf.write(f"{s.n},{s.N},{s.p_sf!r},{s.p_nonneg!r},{s.p_pos!r}\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "steps": [s.__dict__ for s in self.steps], "info": self.info}


def _probabilities(tree: ScenarioTree, strategy: Strategy) -> tuple[float, float, float]:
    """``(P{path self-financing on G}, P{L_T >= 0}, P{L_T > 0})``."""
    sf = {c.node_id: c.solvent for c in self_financing_check(tree, strategy, G).nodes}
    p_sf = sum(tree.path_prob[lf.id] for lf in tree.leaves if all(sf[m.id] for m in tree.path(lf.id)))
    p_nonneg, p_pos = leaf_probabilities(terminal_liquidation(tree, strategy, G), tree)
    return float(min(p_sf, 1.0)), p_nonneg, p_pos


def _require_sf(tree: ScenarioTree, strategy: Strategy, kind: MarketKind) -> None:
    rep = self_financing_check(tree, strategy, kind)
    if not rep.passed:
        bad = ", ".join(c.node_id for c in rep.failures)
        raise DomainError(f"strategy is not self-financing for {kind} at: {bad}")


def _pure_cash(strategy: Strategy) -> bool:
    return all(p.units == 0.0 for p in strategy.transfers.values())


# ---------------------------------------------------------------------------
# terminal normalization and the k-scaling repair


def normalize_terminal(tree: ScenarioTree, strategy: Strategy, kind: MarketKind) -> Strategy:
    """Adjust each leaf transfer so the terminal portfolio is pure cash of the same value.

    With ``V`` the leaf portfolio and ``L`` its liquidation value, the leaf
    transfer loses ``ζ = V - (L, 0)``; the kind liquidates ``ζ`` to 0, so the
    adjusted transfer stays solvent.
    """
    _require_sf(tree, strategy, kind)
    out = dict(strategy.transfers)
    for lv in terminal_liquidation(tree, strategy, kind):
        if lv.value < -1e-9 * (1.0 + abs(lv.portfolio.cash)):
            raise DomainError(f"leaf {lv.node_id} has negative terminal value {lv.value}")
        if lv.portfolio.units == 0.0:
            continue
        zeta = lv.portfolio - Position(lv.value, 0.0)
        out[lv.node_id] = out[lv.node_id] - zeta
    return Strategy(out, strategy.integer and all(p.units == round(p.units) for p in out.values()))


def _repaired(tree: ScenarioTree, base: Strategy, k: int) -> Strategy:
    out = {}
    for n in tree.nodes:
        kx = k * base.at(n.id)
        out[n.id] = kx + Position(liquidate(n.curve, -kx), 0.0)
    return Strategy(out, base.integer)


@dataclass(frozen=True)
class RepairResult:
    strategy: Strategy | None
    k: int | None
    trace: tuple[tuple[int, float], ...]  # (k, min leaf value over the active leaves)
    leaf_values: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.strategy is not None


def repair_to_G(tree: ScenarioTree, strategy: Strategy, k: int | str = "auto", cap: int = SCALE_CAP) -> RepairResult:
    """Scale a limit-cone strategy by ``k`` and pay each node's liquidation shortfall in cash.

    The new transfer at a node is ``k·ξ + L(-k·ξ)·(1, 0)``, so its negation
    liquidates to exactly 0 on the concave-cost market. The strategy is first
    normalized to a pure-cash terminal portfolio. With ``k="auto"`` the
    smallest ``k`` making every leaf with a positive cone value strictly
    positive (and no leaf negative) is searched by doubling and bisection;
    per-unit leaf values are nondecreasing in ``k``, which makes this exact.
    """
    base = normalize_terminal(tree, strategy, KBAR)
    cone_vals = {lv.node_id: lv for lv in terminal_liquidation(tree, base, KBAR)}
    active = [i for i, lv in cone_vals.items() if lv.value > 1e-9 * (1.0 + abs(lv.value))]
    seen: dict[int, float] = {}

    def leaf_values(kk: int) -> dict[str, float]:
        return {lv.node_id: lv.value for lv in terminal_liquidation(tree, _repaired(tree, base, kk), G)}

    def good(kk: int) -> bool:
        vals = leaf_values(kk)
        tol = {i: 1e-9 * (1.0 + kk * abs(cone_vals[i].portfolio.cash)) for i in vals}
        seen[kk] = min((vals[i] for i in active), default=min(vals.values()))
        return all(v >= -tol[i] for i, v in vals.items()) and all(vals[i] > tol[i] for i in active)

    if k == "auto":
        k_used = first_true_int(good, 1, cap)
    elif isinstance(k, (int, np.integer)) and not isinstance(k, bool) and k >= 1:
        # an explicit k is honoured even when its leaves are not yet positive
        positive = good(int(k))
        rep = _repaired(tree, base, int(k))
        return RepairResult(rep, int(k), tuple(sorted(seen.items())), leaf_values(int(k)), {"positive": positive})
    else:
        raise DomainError(f"k must be a positive integer or 'auto', got {k!r}")
    trace = tuple(sorted(seen.items()))
    if k_used is None:
        decay = {n.id: [float(delta_rate(n.curve, base.at(n.id).units, lam)) for lam in (1.0, 1e3, 1e6, 1e9)]
                 for n in tree.nodes if base.at(n.id).units != 0.0}
        return RepairResult(None, None, trace, {}, {"reason": f"no k <= {cap}", "delta_rate": decay})
    rep = _repaired(tree, base, k_used)
    return RepairResult(rep, k_used, trace, leaf_values(k_used), {"positive": True})


# ---------------------------------------------------------------------------
# amplification from the widened proportional market


def _alpha_pipeline(tree: ScenarioTree, strategy: Strategy, strict_terminal: bool = True):
    """Scale ``strategy`` so every transfer and every terminal position lies in the solvency set.

    Returns ``(N, info)``. With ``strict_terminal`` false, leaves whose terminal
    position admits no finite scale are skipped instead of raising.
    """
    n_t: dict[int, int] = {}
    for node in tree.nodes:
        xi = strategy.at(node.id)
        if xi.is_zero():
            continue
        s = min_scale_into_solvency(node.curve, -xi, integer_only=True)
        if s is None:
            raise DomainError(f"node {node.id}: transfer {xi.as_tuple()} admits no finite scale into solvency")
        n_t[node.t] = max(n_t.get(node.t, 0), int(s))
    n = max(1, sum(n_t.values()))
    terminal = evolve(tree, strategy)
    n_d, skipped = 1, []
    for lf in tree.leaves:
        v = terminal[lf.id]
        if v.units == 0.0:
            continue
        s = min_scale_into_solvency(lf.curve, n * v, integer_only=True, strict=True)
        if s is None:
            if strict_terminal:
                raise DomainError(f"leaf {lf.id}: terminal position {v.as_tuple()} admits no finite scale")
            skipped.append(lf.id)
            continue
        n_d = max(n_d, int(s))
    info = {"n_t": {str(t): v for t, v in sorted(n_t.items())}, "n": n, "n_d": n_d, "N": n * n_d}
    if skipped:
        info["unscalable_leaves"] = skipped
    return n * n_d, info


def _check_cap(tree: ScenarioTree, alpha_level: float) -> None:
    for node in tree.nodes:
        cap = alpha_cap(node.curve)
        if alpha_level > cap * (1.0 + 1e-9) + 1e-12:
            raise DomainError(f"alpha_level {alpha_level} exceeds the cap {cap:.6g} at node {node.id}")


def _trivial(tree: ScenarioTree, strategy: Strategy, **info) -> AmplificationTrace:
    return AmplificationTrace((TraceStep(1, 1, *_probabilities(tree, strategy)),), {"trivial": True, **info})


def amplify_alpha_to_G(tree: ScenarioTree, strategy: Strategy, alpha_level: float,
                       check_cap: bool = True) -> tuple[Strategy, AmplificationTrace]:
    """Turn an arbitrage on the alpha-market into an exact arbitrage on the concave-cost market.

    Per time ``t``, ``n_t`` is the largest integer scale any node needs to put
    ``-ξ`` into the solvency set; ``n = Σ n_t``. Then ``n_d`` is the integer
    scale putting every terminal position with nonzero units strictly inside.
    The output is ``N·ξ`` with ``N = n·n_d``.
    """
    if strategy.is_zero() or _pure_cash(strategy):
        return strategy, _trivial(tree, strategy)
    if check_cap:
        _check_cap(tree, alpha_level)
    kind = Kalpha(alpha_level)
    v = arbitrage_verdict(tree, strategy, kind)
    if not v.is_arbitrage:
        raise DomainError("strategy is not an arbitrage on the alpha-market")
    N, info = _alpha_pipeline(tree, strategy)
    out = strategy.scaled(N)
    info["p_alpha_pos"] = v.prob_positive
    step = TraceStep(1, N, *_probabilities(tree, out))
    return out, AmplificationTrace((step,), info)


def tilt_Kbar_to_K(strategy: Strategy, n: int) -> Strategy:
    """Shift the units of every transfer with opposite-sign cash and units by ``-1/n``."""
    if not n > 0:
        raise DomainError("n must be positive")
    out = {}
    for i, p in strategy.transfers.items():
        out[i] = Position(p.cash, p.units - 1.0 / n) if p.cash * p.units < 0 else p
    return Strategy(out)


def tilt_perturbation_bound(tree: ScenarioTree, n: int) -> float:
    """Bound ``(T+1)·max ask_inf / n`` on the terminal limit-value change caused by the tilt."""
    if not n > 0:
        raise DomainError("n must be positive")
    return (tree.T + 1) * max(node.curve.ask_inf for node in tree.nodes) / n


def _unit_tilt(strategy: Strategy, n: int) -> Strategy:
    # buying transfers keep 1/(1+1/n) of their units, selling ones grow by 1/(1-1/n)
    out = {}
    for i, p in strategy.transfers.items():
        if p.cash * p.units < 0:
            out[i] = Position(p.cash, p.units / (1.0 + 1.0 / n) if p.units > 0 else p.units / (1.0 - 1.0 / n))
        else:
            out[i] = p
    return Strategy(out)


def _cash_tilt(strategy: Strategy, n: int) -> Strategy:
    # buying transfers pay (1+1/n) times the cash, selling ones receive (1-1/n) times it
    out = {}
    for i, p in strategy.transfers.items():
        if p.cash * p.units < 0:
            out[i] = Position(p.cash * (1.0 + 1.0 / n) if p.cash < 0 else p.cash * (1.0 - 1.0 / n), p.units)
        else:
            out[i] = p
    return Strategy(out, strategy.integer)


def _sequence(tree: ScenarioTree, strategy: Strategy, n_grid: Sequence[int], tilt, integer: bool):
    grid = [int(n) for n in n_grid]
    if not grid:
        raise DomainError("n_grid must not be empty")
    if any(n < 2 for n in grid):
        raise DomainError("n_grid entries must be >= 2")
    steps, per_n, last = [], {}, strategy
    prev = 0
    for n in grid:
        tilted = tilt(strategy, n)
        N, info = _alpha_pipeline(tree, tilted, strict_terminal=False)
        N = max(N, prev + 1)
        prev = N
        last = tilted.scaled(N)
        if integer:
            last = restrict_integer(last)
        steps.append(TraceStep(n, N, *_probabilities(tree, last)))
        per_n[str(n)] = info
    return last, AmplificationTrace(tuple(steps), {"per_n": per_n})


def amplify_Kbar_to_G(tree: ScenarioTree, strategy: Strategy, n_grid: Sequence[int]) -> AmplificationTrace:
    """Run the alpha-amplifier at level ``1/n`` on the unit-tilted strategy for every ``n`` in the grid."""
    if not list(n_grid):
        raise DomainError("n_grid must not be empty")
    if not arbitrage_verdict(tree, strategy, KBAR).is_arbitrage:
        raise DomainError("strategy is not an arbitrage on the limit cone market")
    return _sequence(tree, strategy, n_grid, _unit_tilt, integer=False)[1]


def amplify_integer(tree: ScenarioTree, strategy: Strategy, alpha_level: float | None = None,
                    kind: str = "MalphaN", n_grid: Sequence[int] | None = None,
                    check_cap: bool = True) -> tuple[Strategy, AmplificationTrace]:
    """Integer-unit versions of the amplifiers; all scales are positive integers.

    ``kind="MalphaN"`` runs the alpha pipeline on an integer strategy.
    ``kind="KbarN"`` tilts the cash of each trade by ``1 ∓ 1/n`` for every ``n``
    in ``n_grid`` (units stay whole) and amplifies at level ``1/n``.
    """
    bad = [i for i, p in strategy.transfers.items() if abs(p.units - round(p.units)) > 1e-9]
    if bad:
        raise DomainError(f"fractional units at nodes {sorted(bad)}")
    strategy = restrict_integer(strategy)
    if strategy.is_zero() or _pure_cash(strategy):
        return strategy, _trivial(tree, strategy)
    if kind == "MalphaN":
        if alpha_level is None:
            raise DomainError("MalphaN needs alpha_level")
        if check_cap:
            _check_cap(tree, alpha_level)
        v = arbitrage_verdict(tree, strategy, MalphaN(alpha_level))
        if not v.is_arbitrage:
            raise DomainError("strategy is not an arbitrage on the integer alpha-market")
        N, info = _alpha_pipeline(tree, strategy)
        out = restrict_integer(strategy.scaled(N))
        info["p_alpha_pos"] = v.prob_positive
        return out, AmplificationTrace((TraceStep(1, N, *_probabilities(tree, out)),), info)
    if kind == "KbarN":
        if not arbitrage_verdict(tree, strategy, KBARN).is_arbitrage:
            raise DomainError("strategy is not an arbitrage on the integer limit cone market")
        return _sequence(tree, strategy, n_grid or (), _cash_tilt, integer=True)
    raise DomainError(f"amplify_integer supports MalphaN and KbarN, got {kind!r}")


def integer_self_financing(tree: ScenarioTree, strategy: Strategy) -> bool:
    return self_financing_check(tree, strategy, GN).passed


# ---------------------------------------------------------------------------
# the two-period strong-arbitrage example


@dataclass(frozen=True)
class ExampleParams:
    """Inputs of the two-period buy-then-sell example.

    ``bid1_0``/``ask1_0`` are the zero-volume prices at time 1; ``p``/``q`` the
    relative bid gain and ask discount reached at large volume for times 1 and 2;
    ``e1_bar`` the growth of the zero-volume bid from time 1 to 2 on the event.
    """

    bid1_0: float
    ask1_0: float
    p: tuple[float, float]
    q: tuple[float, float]
    e1_bar: float
    event_prob: float = 1.0
    l: float | None = None
    shape: float = 0.5
    e_down: float = 0.0

    def __post_init__(self) -> None:
        for t in (0, 1):
            if not 0 <= self.q[t] < 1:
                raise DomainError(f"q_{t + 1} must lie in [0, 1)")
            if self.p[t] < 0:
                raise DomainError(f"p_{t + 1} must be >= 0")
            if (1 - self.q[t]) * self.ask1_0 < (1 + self.p[t]) * self.bid1_0:
                raise DomainError(f"(1-q_{t + 1})·ask(0) >= (1+p_{t + 1})·bid(0) fails")
        if not 0 < self.event_prob <= 1:
            raise DomainError("event_prob must lie in (0, 1]")


def ask_factor(q: float, shape: float, l):
    """Normalized ask curve ``1 - q + q/(l+1)**shape``."""
    return 1.0 - q + q / (np.asarray(l, dtype=float) + 1.0) ** shape


def bid_factor(p: float, shape: float, l):
    """Normalized bid curve ``1 + p - p/(l+1)**shape``."""
    return 1.0 + p - p / (np.asarray(l, dtype=float) + 1.0) ** shape


def example_margin(bid1_0: float, ask1_0: float, e1_bar: float, q1: float, p2: float, shape: float, l):
    """Per-unit profit ``(1+ē)·bid1_0·bid_factor(l) - ask1_0·ask_factor(l)`` of buying ``l`` then selling."""
    m = (1.0 + e1_bar) * bid1_0 * bid_factor(p2, shape, l) - ask1_0 * ask_factor(q1, shape, l)
    return float(m) if np.ndim(m) == 0 else m


def _example_curve(bid0: float, ask0: float, p: float, q: float, shape: float) -> CostCurve:
    return power_law(bid0, (1 + p) * bid0, ask0, (1 - q) * ask0, shape)


def example_tree(params: ExampleParams) -> ScenarioTree:
    """Root at t=0, the event ``B1`` and its complement at t=1, one child each at t=2."""
    pr = params
    c1 = _example_curve(pr.bid1_0, pr.ask1_0, pr.p[0], pr.q[0], pr.shape)
    up = _example_curve((1 + pr.e1_bar) * pr.bid1_0, (1 + pr.e1_bar) * pr.ask1_0, pr.p[1], pr.q[1], pr.shape)
    down = _example_curve((1 + pr.e_down) * pr.bid1_0, (1 + pr.e_down) * pr.ask1_0, pr.p[1], pr.q[1], pr.shape)
    nodes = [Node("root", 0, None, 1.0, c1), Node("B1", 1, "root", pr.event_prob, c1), Node("B1.2", 2, "B1", 1.0, up)]
    if pr.event_prob < 1:
        nodes += [Node("B1c", 1, "root", 1.0 - pr.event_prob, c1), Node("B1c.2", 2, "B1c", 1.0, down)]
    return ScenarioTree(tuple(nodes))


def round_trip(tree: ScenarioTree, buy_node: str, sell_node: str, kind: MarketKind, units: float) -> Strategy:
    """Buy ``units`` at one node and sell them at a later node, both on the kind's boundary."""
    b, s = tree.by_id[buy_node], tree.by_id[sell_node]
    return Strategy.on(tree, {buy_node: boundary_transfer(b.curve, kind, units),
                              sell_node: boundary_transfer(s.curve, kind, -units)})


@dataclass(frozen=True)
class ExampleResult:
    tree: ScenarioTree
    strategy: Strategy | None
    m1: float
    l: float
    margins: tuple[tuple[float, float], ...] = ()


def example_strong_arbitrage(params: ExampleParams, l_grid: Sequence[float] | None = None) -> ExampleResult:
    """Build the example tree and the buy-at-1, sell-at-2 strategy on ``B1``.

    Without ``params.l`` the grid point maximizing the margin is used. No
    strategy is emitted when the best margin is not positive.
    """
    if params.l is not None:
        ls = np.array([params.l], dtype=float)
    else:
        if l_grid is None or len(l_grid) == 0:
            raise DomainError("need params.l or a nonempty l_grid")
        ls = np.asarray(l_grid, dtype=float)
    if np.any(ls <= 0):
        raise DomainError("volumes must be positive")
    ms = np.atleast_1d(example_margin(params.bid1_0, params.ask1_0, params.e1_bar, params.q[0],
                                      params.p[1], params.shape, ls))
    i = int(np.argmax(ms))
    tree = example_tree(params)
    m1, l = float(ms[i]), float(ls[i])
    margins = tuple(zip(ls.tolist(), ms.tolist()))
    if m1 <= 0:
        return ExampleResult(tree, None, m1, l, margins)
    return ExampleResult(tree, round_trip(tree, "B1", "B1.2", G, l), m1, l, margins)


# ---------------------------------------------------------------------------
# brute-force oracle


def brute_force_search(tree: ScenarioTree, kind: MarketKind, unit_grid: Sequence[float],
                       budget: int = 100_000, seed: int = 0) -> Verdict:
    """Search strategies built from boundary trades with unit changes drawn from ``unit_grid``.

    Every non-leaf node trades a net ``d`` units at the kind's boundary price
    (selling ``m`` and buying ``l`` at the same node is never better than the
    net trade, by superadditivity). Leaves hold. All ``|grid|**nodes``
    combinations are tried when that fits in ``budget``; otherwise ``budget``
    random combinations are drawn with ``seed`` and the verdict is flagged
    partial. Returns the arbitrage with the largest worst-leaf value, or
    ``no_arbitrage_witnessed`` carrying the best worst-leaf value seen.
    """
    grid = np.unique(np.asarray(unit_grid, dtype=float))
    if grid.size == 0:
        raise DomainError("unit_grid must not be empty")
    if budget < 1:
        raise DomainError("budget must be >= 1")
    traders = [n for n in tree.nodes if tree.children[n.id]]
    col = {n.id: j for j, n in enumerate(traders)}
    cash = np.array([[boundary_transfer(n.curve, kind, d).cash for d in grid] for n in traders]).reshape(len(traders), -1)

    total = grid.size ** len(traders)
    partial = total > budget
    if partial:
        idx = np.random.default_rng(seed).integers(0, grid.size, size=(budget, len(traders)))
    elif traders:
        idx = np.indices((grid.size,) * len(traders)).reshape(len(traders), -1).T
    else:
        idx = np.zeros((1, 0), dtype=int)

    vals, probs = [], []
    for lf in tree.leaves:
        on_path = [col[m.id] for m in tree.path(lf.id) if m.id in col]
        x = cash[on_path, idx[:, on_path]].sum(axis=1) if on_path else np.zeros(len(idx))
        y = grid[idx[:, on_path]].sum(axis=1) if on_path else np.zeros(len(idx))
        v = np.asarray(kind.liquidation_values(lf.curve, x, y), dtype=float).reshape(-1)
        tol = 1e-9 * (1.0 + np.abs(x) + np.abs(y) * lf.curve.ask0)
        vals.append((v, tol))
        probs.append(tree.path_prob[lf.id])
    V = np.stack([v for v, _ in vals], axis=1)
    TOL = np.stack([t for _, t in vals], axis=1)
    P = np.array(probs)
    worst = V.min(axis=1)
    nonneg = np.all(V >= -TOL, axis=1)
    ppos = ((V > TOL) * P).sum(axis=1)
    is_arb = nonneg & (ppos > 0)
    best_min = float(worst.max())
    if not is_arb.any():
        return Verdict("no_arbitrage_witnessed", None, partial=partial, best_min=best_min, evaluations=len(idx))
    cand = np.nonzero(is_arb)[0]
    expected = (V[cand] * P).sum(axis=1)
    order = np.lexsort((-expected, -worst[cand]))
    pick = int(cand[order[0]])
    witness = Strategy.on(tree, {n.id: boundary_transfer(n.curve, kind, float(grid[idx[pick, col[n.id]]]))
                                 for n in traders})
    v = arbitrage_verdict(tree, witness, kind)
    return replace(v, partial=partial, best_min=best_min, evaluations=len(idx))


__all__ = [
    "AmplificationTrace", "ExampleParams", "ExampleResult", "RepairResult", "TRACE_COLUMNS", "TraceStep",
    "amplify_Kbar_to_G", "amplify_alpha_to_G", "amplify_integer", "ask_factor", "bid_factor",
    "brute_force_search", "example_margin", "example_strong_arbitrage", "example_tree",
    "integer_self_financing", "normalize_terminal", "repair_to_G", "round_trip", "tilt_Kbar_to_K",
    "tilt_perturbation_bound",
]
