"""Reference curves, trees and strategies used by the tests, the CLI and the docs."""

from __future__ import annotations

from .arbitrage import ExampleParams, example_tree, round_trip
from .curves import PowerLaw, power_law
from .liquidation import Position
from .market import KBAR, Kalpha, Node, ScenarioTree, Strategy


def curve_a() -> PowerLaw:
    return power_law(90.0, 94.5, 110.0, 99.0, 0.5, a0=2.0, b0=-1.0)


def curve_b() -> PowerLaw:
    return power_law(104.0, 110.0, 120.0, 115.0, 0.5, a0=2.0, b0=-1.0)


def tree_d() -> ScenarioTree:
    """Deterministic two-period chain: t=0 and t=1 on curve A, t=2 on curve B."""
    a, b = curve_a(), curve_b()
    return ScenarioTree((Node("root", 0, None, 1.0, a), Node("n1", 1, "root", 1.0, a), Node("n2", 2, "n1", 1.0, b)))


def chain_strategy(tree: ScenarioTree | None = None) -> Strategy:
    """Buy one unit at the cone ask 99 at t=1, sell it at the cone bid 110 at t=2."""
    tree = tree or tree_d()
    return Strategy.on(tree, {"n1": Position(-99.0, 1.0), "n2": Position(110.0, -1.0)})


def alpha_strategy(alpha_level: float = 0.04, tree: ScenarioTree | None = None) -> Strategy:
    """The same round trip at the widened prices of the alpha-market."""
    tree = tree or tree_d()
    return round_trip(tree, "n1", "n2", Kalpha(alpha_level), 1.0)


def example_params(event_prob: float = 0.6) -> ExampleParams:
    """Two-period example whose margin at ``l = 99`` is 18.495 on the up branch."""
    return ExampleParams(bid1_0=88.0, ask1_0=101.0, p=(0.05, 0.05), q=(0.05, 0.05), e1_bar=0.25,
                         event_prob=event_prob, l=99.0, shape=0.5)


def example_two_leaf_tree(event_prob: float = 0.6) -> ScenarioTree:
    return example_tree(example_params(event_prob))


def cone_chain_on(tree: ScenarioTree, buy: str, sell: str) -> Strategy:
    return round_trip(tree, buy, sell, KBAR, 1.0)


__all__ = [
    "alpha_strategy", "chain_strategy", "cone_chain_on", "curve_a", "curve_b", "example_params",
    "example_two_leaf_tree", "tree_d",
]
