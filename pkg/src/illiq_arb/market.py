"""Finite scenario trees, strategies as per-node transfers, and arbitrage verdicts.

Every node carries the cost curve valid in that state. A strategy assigns one
transfer ``ξ`` to each node; it is self-financing for a market kind when
``-ξ`` is solvent for that kind's liquidation function at every node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping

import numpy as np

from .curves import CostCurve, DomainError, validate_axioms
from .liquidation import (
    ZERO,
    Position,
    alpha_values,
    cone_of,
    default_tol,
    limit_values,
    liquidation_values,
)

PROB_TOL = 1e-12
INT_TOL = 1e-9


@dataclass(frozen=True)
class Node:
    id: str
    t: int
    parent: str | None
    prob: float  # branch probability from the parent; 1 for the root
    curve: CostCurve


@dataclass(frozen=True)
class ScenarioTree:
    """A finite event tree; ``horizon`` defaults to the deepest node's time."""

    nodes: tuple[Node, ...]
    horizon: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if not self.nodes:
            raise DomainError("a tree needs at least one node")

    @property
    def T(self) -> int:
        return self.horizon if self.horizon is not None else max(n.t for n in self.nodes)

    @cached_property
    def by_id(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def children(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for n in self.nodes:
            if n.parent is not None and n.parent in out:
                out[n.parent].append(n.id)
        return out

    @cached_property
    def root(self) -> Node:
        roots = [n for n in self.nodes if n.parent is None]
        if len(roots) != 1:
            raise DomainError(f"tree must have exactly one root, found {len(roots)}")
        return roots[0]

    @cached_property
    def leaves(self) -> list[Node]:
        return [n for n in self.nodes if not self.children[n.id]]

    def path(self, node_id: str) -> list[Node]:
        """Nodes from the root down to ``node_id`` inclusive."""
        out = []
        cur: str | None = node_id
        while cur is not None:
            node = self.by_id[cur]
            out.append(node)
            cur = node.parent
            if len(out) > len(self.nodes):
                raise DomainError("cycle in parent links")
        return out[::-1]

    @cached_property
    def path_prob(self) -> dict[str, float]:
        return {n.id: float(np.prod([m.prob for m in self.path(n.id)[1:]])) for n in self.nodes}

    def subtree(self, node_id: str) -> list[str]:
        out, stack = [], [node_id]
        while stack:
            cur = stack.pop()
            out.append(cur)
            stack.extend(self.children[cur])
        return out

    def at_time(self, t: int) -> list[Node]:
        return [n for n in self.nodes if n.t == t]


@dataclass(frozen=True)
class TreeReport:
    violations: tuple[str, ...]
    axiom_failures: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations


def validate_tree(tree: ScenarioTree, grid=None) -> TreeReport:
    """Check structure, sibling probabilities and every node's curve axioms."""
    v: list[str] = []
    ids = [n.id for n in tree.nodes]
    dup = sorted({i for i in ids if ids.count(i) > 1})
    if dup:
        v.append(f"duplicate node ids: {dup}")
    roots = [n for n in tree.nodes if n.parent is None]
    if len(roots) != 1:
        v.append(f"expected exactly one root, found {len(roots)}")
    for r in roots:
        if r.t != 0:
            v.append(f"root {r.id} must be at t=0, found t={r.t}")
    for n in tree.nodes:
        if n.parent is None:
            continue
        par = tree.by_id.get(n.parent)
        if par is None:
            v.append(f"node {n.id}: unknown parent {n.parent}")
        elif n.t != par.t + 1:
            v.append(f"node {n.id}: time {n.t} does not follow parent time {par.t}")
        if not 0 <= n.prob <= 1:
            v.append(f"node {n.id}: branch probability {n.prob} outside [0, 1]")
    for n in tree.nodes:
        kids = tree.children.get(n.id, [])
        if kids:
            s = sum(tree.by_id[k].prob for k in kids)
            if abs(s - 1.0) > PROB_TOL:
                v.append(f"node {n.id}: children probabilities sum to {s:.12g}")
        elif n.t < tree.T:
            v.append(f"node {n.id}: no children before the horizon T={tree.T}")
    axioms = {}
    for n in tree.nodes:
        rep = validate_axioms(n.curve, grid)
        if not rep.passed:
            axioms[n.id] = rep
            v.append(f"node {n.id}: curve fails {', '.join(c.name for c in rep.violations)}")
    return TreeReport(tuple(v), axioms)


@dataclass(frozen=True, eq=True)
class Strategy:
    """One transfer per node. ``integer`` tags strategies restricted to whole units."""

    transfers: Mapping[str, Position]
    integer: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "transfers", dict(self.transfers))
        if self.integer:
            bad = [k for k, p in self.transfers.items() if p.units != round(p.units)]
            if bad:
                raise DomainError(f"integer strategy has fractional units at {bad}")

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def zero(cls, tree: ScenarioTree) -> Strategy:
        return cls({n.id: ZERO for n in tree.nodes})

    @classmethod
    def on(cls, tree: ScenarioTree, transfers: Mapping[str, Position | tuple], integer: bool = False) -> Strategy:
        """Fill unlisted nodes with the zero transfer."""
        unknown = set(transfers) - set(tree.by_id)
        if unknown:
            raise DomainError(f"transfers for unknown nodes: {sorted(unknown)}")
        full = {n.id: _pos(transfers.get(n.id, ZERO)) for n in tree.nodes}
        return cls(full, integer)

    def at(self, node_id: str) -> Position:
        try:
            return self.transfers[node_id]
        except KeyError:
            raise DomainError(f"strategy has no transfer at node {node_id}") from None

    def scaled(self, k: float) -> Strategy:
        integer = self.integer and float(k).is_integer()
        return Strategy({i: k * p for i, p in self.transfers.items()}, integer)

    def __add__(self, other: Strategy) -> Strategy:
        keys = set(self.transfers) | set(other.transfers)
        return Strategy({k: self.transfers.get(k, ZERO) + other.transfers.get(k, ZERO) for k in keys})

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.transfers.values())


def _pos(p) -> Position:
    return p if isinstance(p, Position) else Position(*p)


KIND_TAGS = ("G", "Kbar", "Kalpha", "GN", "KbarN", "MalphaN")


@dataclass(frozen=True)
class MarketKind:
    tag: str
    alpha_level: float | None = None

    def __post_init__(self) -> None:
        if self.tag not in KIND_TAGS:
            raise DomainError(f"unknown market kind {self.tag!r}; expected one of {KIND_TAGS}")
        needs = self.tag in ("Kalpha", "MalphaN")
        if needs and self.alpha_level is None:
            raise DomainError(f"kind {self.tag} needs alpha_level")
        if not needs and self.alpha_level is not None:
            raise DomainError(f"kind {self.tag} takes no alpha_level")
        if needs and not 0 <= self.alpha_level < 1:
            raise DomainError("alpha_level must lie in [0, 1)")

    @property
    def integer(self) -> bool:
        return self.tag.endswith("N")

    def liquidation_values(self, curve: CostCurve, x, y):
        if self.tag in ("G", "GN"):
            return liquidation_values(curve, x, y)
        if self.tag in ("Kbar", "KbarN"):
            return limit_values(cone_of(curve), x, y)
        return alpha_values(cone_of(curve, self.alpha_level), x, y)

    def liquidate(self, curve: CostCurve, p: Position) -> float:
        return self.liquidation_values(curve, p.cash, p.units)

    def price_scale(self, curve: CostCurve) -> float:
        """The ask price entering the default solvency tolerance."""
        if self.tag in ("G", "GN"):
            return curve.ask0
        return cone_of(curve, self.alpha_level or 0.0).ask

    def __str__(self) -> str:
        return self.tag if self.alpha_level is None else f"{self.tag}({self.alpha_level:g})"


G = MarketKind("G")
KBAR = MarketKind("Kbar")
GN = MarketKind("GN")
KBARN = MarketKind("KbarN")


def Kalpha(alpha_level: float) -> MarketKind:
    return MarketKind("Kalpha", alpha_level)


def MalphaN(alpha_level: float) -> MarketKind:
    return MarketKind("MalphaN", alpha_level)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NodeCheck:
    node_id: str
    value: float  # kind liquidation of -ξ
    solvent: bool
    integral: bool

    @property
    def ok(self) -> bool:
        return self.solvent and self.integral


@dataclass(frozen=True)
class SelfFinancingReport:
    nodes: tuple[NodeCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.nodes)

    @property
    def failures(self) -> list[NodeCheck]:
        return [c for c in self.nodes if not c.ok]

    @property
    def worst(self) -> NodeCheck:
        return min(self.nodes, key=lambda c: c.value)


def self_financing_check(tree: ScenarioTree, strategy: Strategy, kind: MarketKind,
                         tol: float | None = None) -> SelfFinancingReport:
    """Per node, is ``-ξ`` solvent for the kind (and are units whole for integer kinds)?"""
    out = []
    for n in tree.nodes:
        xi = strategy.at(n.id)
        v = kind.liquidate(n.curve, -xi)
        tl = default_tol(xi, kind.price_scale(n.curve)) if tol is None else tol
        integral = (not kind.integer) or abs(xi.units - round(xi.units)) <= INT_TOL
        out.append(NodeCheck(n.id, v, v >= -tl, integral))
    return SelfFinancingReport(tuple(out))


def evolve(tree: ScenarioTree, strategy: Strategy, initial: Position = ZERO) -> dict[str, Position]:
    """Portfolio at every node: ``initial`` plus all transfers on the path to it."""
    out: dict[str, Position] = {}
    order = sorted(tree.nodes, key=lambda n: n.t)
    for n in order:
        base = initial if n.parent is None else out[n.parent]
        out[n.id] = base + strategy.at(n.id)
    return out


@dataclass(frozen=True)
class LeafValue:
    node_id: str
    value: float
    prob: float
    portfolio: Position


def terminal_liquidation(tree: ScenarioTree, strategy: Strategy, kind: MarketKind,
                         initial: Position = ZERO) -> list[LeafValue]:
    v = evolve(tree, strategy, initial)
    return [LeafValue(n.id, kind.liquidate(n.curve, v[n.id]), tree.path_prob[n.id], v[n.id]) for n in tree.leaves]


def event_probability(tree: ScenarioTree, pred: Callable[[Node], bool]) -> float:
    """Total path probability of the leaves satisfying ``pred``."""
    p = sum(tree.path_prob[n.id] for n in tree.leaves if pred(n))
    return float(min(1.0, max(0.0, p)))


def restrict_integer(strategy: Strategy) -> Strategy:
    """Tag a strategy as integer, failing if any unit amount is fractional."""
    bad = [k for k, p in strategy.transfers.items() if abs(p.units - round(p.units)) > INT_TOL]
    if bad:
        raise DomainError(f"fractional units at nodes {sorted(bad)}")
    return Strategy({k: Position(p.cash, float(round(p.units))) for k, p in strategy.transfers.items()}, True)


def boundary_transfer(curve: CostCurve, kind: MarketKind, d: float) -> Position:
    """The transfer changing units by ``d`` whose negation liquidates to exactly 0."""
    return Position(kind.liquidation_values(curve, 0.0, -d), d)


# ---------------------------------------------------------------------------
# verdicts


VERDICT_TAGS = ("no_arbitrage_witnessed", "arbitrage", "strong_arbitrage", "bounded_arbitrage")


@dataclass(frozen=True)
class Verdict:
    tag: str
    witness: Strategy | None
    leaves: tuple[LeafValue, ...] = ()
    prob_positive: float = 0.0
    is_strong: bool = False
    t_star: int | None = None
    event: tuple[str, ...] = ()
    floor: float | None = None
    floors: dict = field(default_factory=dict)
    is_bounded: bool = False
    bound: float | None = None
    realized_bound: float | None = None
    partial: bool = False
    best_min: float | None = None
    evaluations: int = 0

    @property
    def is_arbitrage(self) -> bool:
        return self.tag != "no_arbitrage_witnessed"

    def to_dict(self) -> dict:
        d = {
            "tag": self.tag,
            "prob_positive": self.prob_positive,
            "leaves": [{"node": lv.node_id, "value": lv.value, "prob": lv.prob,
                        "portfolio": list(lv.portfolio.as_tuple())} for lv in self.leaves],
            "strong": self.is_strong,
            "bounded": self.is_bounded,
        }
        if self.is_strong:
            d.update(t_star=self.t_star, event=list(self.event), m=self.floor, floors=dict(self.floors))
        if self.bound is not None:
            d.update(bound=self.bound)
        if self.realized_bound is not None:
            d.update(realized_bound=self.realized_bound)
        if self.witness is not None:
            d["witness"] = {k: list(p.as_tuple()) for k, p in sorted(self.witness.transfers.items())}
        if self.best_min is not None:
            d.update(best_min=self.best_min, partial=self.partial, evaluations=self.evaluations)
        return d


def _leaf_tol(lv: LeafValue, tree: ScenarioTree) -> float:
    return default_tol(lv.portfolio, tree.by_id[lv.node_id].curve.ask0)


def _strong_pattern(tree: ScenarioTree, strategy: Strategy, leaves: list[LeafValue]):
    active = [n for n in tree.nodes if not strategy.at(n.id).is_zero()]
    if not active:
        return None
    t_star = min(n.t for n in active)
    event = []
    for n in tree.at_time(t_star):
        if any(not strategy.at(k).is_zero() for k in tree.subtree(n.id)):
            event.append(n.id)
    covered = set()
    for b in event:
        covered.update(tree.subtree(b))
    if any(n.id not in covered for n in active):
        return None
    value = {lv.node_id: lv for lv in leaves}
    floors = {}
    for b in event:
        below = [value[k] for k in tree.subtree(b) if k in value]
        m = min(lv.value for lv in below)
        if not all(lv.value > _leaf_tol(lv, tree) for lv in below):
            return None
        floors[b] = m
    return t_star, tuple(event), min(floors.values()), floors


def arbitrage_verdict(tree: ScenarioTree, strategy: Strategy, kind: MarketKind, bound: float | None = None,
                      initial: Position = ZERO) -> Verdict:
    """Classify a self-financing strategy by its terminal liquidation values.

    Arbitrage needs every leaf value ``>= -tol`` and positive probability of a
    value ``> tol``. The strong pattern localizes all trading below the nodes
    ``B`` at the first trading time and needs a positive floor on every leaf
    below ``B``. With ``bound`` given, the bounded tag applies when no transfer
    exceeds it in ``|cash| + |units|``. Strong takes precedence over bounded.
    """
    sf = self_financing_check(tree, strategy, kind)
    if not sf.passed:
        bad = ", ".join(f"{c.node_id} ({c.value:.6g})" for c in sf.failures)
        raise DomainError(f"strategy is not self-financing for {kind}: {bad}")
    leaves = terminal_liquidation(tree, strategy, kind, initial)
    nonneg = all(lv.value >= -_leaf_tol(lv, tree) for lv in leaves)
    p_pos = sum(lv.prob for lv in leaves if lv.value > _leaf_tol(lv, tree))
    realized = max((abs(p.cash) + abs(p.units) for p in strategy.transfers.values()), default=0.0)
    if not (nonneg and p_pos > 0):
        return Verdict("no_arbitrage_witnessed", strategy, tuple(leaves), p_pos, realized_bound=realized,
                       bound=bound)
    strong = _strong_pattern(tree, strategy, leaves)
    bounded = bound is not None and realized <= bound
    tag = "strong_arbitrage" if strong else "bounded_arbitrage" if bounded else "arbitrage"
    kw = {}
    if strong:
        t_star, event, floor, floors = strong
        kw = dict(is_strong=True, t_star=t_star, event=event, floor=floor, floors=floors)
    return Verdict(tag, strategy, tuple(leaves), p_pos, is_bounded=bounded, bound=bound,
                   realized_bound=realized, **kw)


def leaf_probabilities(leaves: Iterable[LeafValue], tree: ScenarioTree) -> tuple[float, float]:
    """``(P{value >= -tol}, P{value > tol})`` over the given leaf values."""
    leaves = list(leaves)
    nonneg = sum(lv.prob for lv in leaves if lv.value >= -_leaf_tol(lv, tree))
    pos = sum(lv.prob for lv in leaves if lv.value > _leaf_tol(lv, tree))
    return float(min(nonneg, 1.0)), float(min(pos, 1.0))


__all__ = [
    "G", "GN", "KBAR", "KBARN", "KIND_TAGS", "Kalpha", "LeafValue", "MalphaN", "MarketKind", "Node",
    "NodeCheck", "ScenarioTree", "SelfFinancingReport", "Strategy", "TreeReport", "VERDICT_TAGS",
    "Verdict", "arbitrage_verdict", "boundary_transfer", "event_probability", "evolve",
    "leaf_probabilities", "restrict_integer", "self_financing_check", "terminal_liquidation",
    "validate_tree",
]
