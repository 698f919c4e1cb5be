"""JSON configuration: a scenario tree, named strategies and per-command parameters."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .curves import CostCurve, DomainError, FixedFees, FixedProportional, PowerLaw, Tabulated
from .liquidation import Position
from .market import KIND_TAGS, MarketKind, Node, ScenarioTree, Strategy, TreeReport, validate_tree

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """A configuration document is malformed or semantically invalid."""

    def __init__(self, message: str, report: TreeReport | None = None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class Config:
    tree: ScenarioTree
    strategies: dict[str, Strategy] = field(default_factory=dict)
    commands: dict[str, Any] = field(default_factory=dict)


def _num(obj: dict, key: str, where: str, default: float | None = None) -> float:
    if key not in obj:
        if default is None:
            raise ConfigError(f"{where}.{key}: missing")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {v!r}")
    return float(v)


def curve_from_dict(d: dict, where: str = "curve") -> CostCurve:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    fam = d.get("family")
    try:
        fees = FixedFees(_num(d, "a0", where, 0.0), _num(d, "b0", where, 0.0))
        if fam == "power_law":
            return PowerLaw(*(_num(d, k, where) for k in ("bid0", "bid_inf", "ask0", "ask_inf", "shape")), fees)
        if fam == "proportional":
            return FixedProportional(_num(d, "bid", where), _num(d, "ask", where), fees)
        if fam == "tabulated":
            return Tabulated(tuple(map(tuple, d["bid_knots"])), tuple(map(tuple, d["ask_knots"])), fees)
    except DomainError as e:
        raise ConfigError(f"{where}: {e}") from None
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"{where}: malformed curve ({e})") from None
    raise ConfigError(f"{where}.family: unknown curve family {fam!r}; expected power_law, proportional or tabulated")


def curve_to_dict(c: CostCurve) -> dict:
    fees = {"a0": c.fees.a0, "b0": c.fees.b0}
    if isinstance(c, PowerLaw):
        return {"family": "power_law", "bid0": c.bid0, "bid_inf": c.bid_inf, "ask0": c.ask0,
                "ask_inf": c.ask_inf, "shape": c.shape, **fees}
    if isinstance(c, FixedProportional):
        return {"family": "proportional", "bid": c.bid, "ask": c.ask, **fees}
    return {"family": "tabulated", "bid_knots": [list(k) for k in c.bid_knots],
            "ask_knots": [list(k) for k in c.ask_knots], **fees}


def kind_from(tag: str, alpha: float | None = None) -> MarketKind:
    if tag not in KIND_TAGS:
        raise ConfigError(f"unknown kind {tag!r}; expected one of {', '.join(KIND_TAGS)}")
    try:
        return MarketKind(tag, alpha if tag in ("Kalpha", "MalphaN") else None)
    except DomainError as e:
        raise ConfigError(str(e)) from None


def tree_from_dict(d: dict) -> ScenarioTree:
    if not isinstance(d, dict) or not isinstance(d.get("nodes"), list):
        raise ConfigError("tree.nodes: expected a list")
    nodes = []
    for i, nd in enumerate(d["nodes"]):
        where = f"tree.nodes[{i}]"
        if not isinstance(nd, dict) or "id" not in nd:
            raise ConfigError(f"{where}: expected an object with an id")
        where = f"tree.nodes[{i}] (node {nd['id']})"
        t = nd.get("t")
        if not isinstance(t, int) or isinstance(t, bool) or t < 0:
            raise ConfigError(f"{where}.t: expected a nonnegative integer")
        nodes.append(Node(str(nd["id"]), t, None if nd.get("parent") is None else str(nd["parent"]),
                          _num(nd, "prob", where, 1.0), curve_from_dict(nd.get("curve"), f"{where}.curve")))
    if not nodes:
        raise ConfigError("tree.nodes: empty")
    horizon = d.get("horizon")
    if horizon is not None and (not isinstance(horizon, int) or horizon < 0):
        raise ConfigError("tree.horizon: expected a nonnegative integer")
    return ScenarioTree(tuple(nodes), horizon)


def tree_to_dict(tree: ScenarioTree) -> dict:
    out: dict = {"nodes": [{"id": n.id, "t": n.t, "parent": n.parent, "prob": n.prob,
                            "curve": curve_to_dict(n.curve)} for n in tree.nodes]}
    if tree.horizon is not None:
        out["horizon"] = tree.horizon
    return out


def strategy_from_dict(tree: ScenarioTree, d: dict, name: str) -> Strategy:
    where = f"strategies.{name}"
    if not isinstance(d, dict) or not isinstance(d.get("transfers", {}), dict):
        raise ConfigError(f"{where}.transfers: expected an object mapping node ids to [cash, units]")
    tr = {}
    for node, v in d.get("transfers", {}).items():
        if node not in tree.by_id:
            raise ConfigError(f"{where}.transfers: unknown node {node!r}")
        if not (isinstance(v, list) and len(v) == 2 and all(isinstance(a, (int, float)) for a in v)):
            raise ConfigError(f"{where}.transfers.{node}: expected [cash, units]")
        tr[node] = Position(*v)
    try:
        return Strategy.on(tree, tr, bool(d.get("integer", False)))
    except DomainError as e:
        raise ConfigError(f"{where}: {e}") from None


def strategy_to_dict(s: Strategy) -> dict:
    return {"integer": s.integer, "transfers": {k: list(p.as_tuple()) for k, p in s.transfers.items()}}


def config_from_dict(doc: Any, validate: bool = True, grid=None) -> Config:
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected an object")
    ver = doc.get("schema_version")
    if ver != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: expected {SCHEMA_VERSION}, got {ver!r}")
    tree = tree_from_dict(doc.get("tree"))
    if validate:
        rep = validate_tree(tree, grid)
        if not rep.passed:
            raise ConfigError("tree: " + "; ".join(rep.violations), rep)
    strategies = {str(k): strategy_from_dict(tree, v, k) for k, v in (doc.get("strategies") or {}).items()}
    commands = doc.get("commands") or {}
    if not isinstance(commands, dict):
        raise ConfigError("commands: expected an object")
    for name, params in commands.items():
        if isinstance(params, dict) and "kind" in params:
            kind_from(params["kind"], params.get("alpha", 0.0))
    return Config(tree, strategies, commands)


def config_to_dict(cfg: Config) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tree": tree_to_dict(cfg.tree),
        "strategies": {k: strategy_to_dict(v) for k, v in cfg.strategies.items()},
        "commands": cfg.commands,
    }


def load_config(path: str | Path, validate: bool = True) -> Config:
    """Read and validate a configuration file; errors name the offending line or field."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: JSON parse error at line {e.lineno}, column {e.colno}: {e.msg}") from None
    return config_from_dict(doc, validate)


def dump_config(cfg: Config) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"


__all__ = [
    "Config", "ConfigError", "SCHEMA_VERSION", "config_from_dict", "config_to_dict", "curve_from_dict",
    "curve_to_dict", "dump_config", "kind_from", "load_config", "strategy_from_dict", "strategy_to_dict",
    "tree_from_dict", "tree_to_dict",
]
