"""Command-line entry point ``illiq-arb``.

Exit codes: 0 completed, 1 usage or configuration error, 2 internal failure
(including a failed invariant suite under ``props``).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .arbitrage import amplify_alpha_to_G, amplify_integer, amplify_Kbar_to_G, brute_force_search, repair_to_G
from .config import Config, ConfigError, kind_from, load_config, strategy_to_dict
from .curves import DomainError, beta_modulus, validate_axioms
from .liquidation import (
    Position,
    check_L_conditions,
    classify_position,
    cone_of,
    delta_gap,
    liquidate,
    liquidate_alpha,
    liquidate_limit,
)
from .market import arbitrage_verdict, validate_tree
from .props import DEFAULT_SEED, SUITES

COMMANDS = ("validate", "liquidate", "verdict", "repair", "amplify", "search", "conditions", "props")
DEFAULT_N_GRID = [4, 16, 64, 256, 1024]
DEFAULT_LAMBDAS = [10.0**k for k in range(9)]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="illiq-arb", description="Arbitrage analysis for markets with concave transaction costs.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path, help="JSON configuration file")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    p.add_argument("--seed", type=int, default=None, help=f"64-bit seed (default {DEFAULT_SEED})")
    p.add_argument("--kind", default=None, help="G, Kbar, Kalpha, GN, KbarN or MalphaN")
    p.add_argument("--alpha", type=float, default=None, help="proportional level for Kalpha/MalphaN")
    p.add_argument("--tol", type=float, default=None, help="solvency tolerance for classification")
    return p


def _write_json(path: Path, obj: Any) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n", encoding="utf-8")


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, Position):
        return list(o.as_tuple())
    raise TypeError(f"not serializable: {type(o).__name__}")


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _params(cfg: Config | None, name: str) -> dict:
    return dict((cfg.commands.get(name) or {}) if cfg else {})


def _kind(args, params: dict, default: str):
    tag = args.kind or params.get("kind", default)
    alpha = args.alpha if args.alpha is not None else params.get("alpha")
    if tag in ("Kalpha", "MalphaN") and alpha is None:
        raise UsageError(f"kind {tag} needs --alpha")
    return kind_from(tag, alpha), alpha


def _strategy(cfg: Config, params: dict):
    name = params.get("strategy") or (next(iter(cfg.strategies)) if cfg.strategies else None)
    if name is None or name not in cfg.strategies:
        raise UsageError(f"unknown or missing strategy {name!r}")
    return name, cfg.strategies[name]


# ---------------------------------------------------------------------------


def cmd_validate(cfg: Config, args) -> int:
    rep = validate_tree(cfg.tree, _params(cfg, "validate").get("grid"))
    _write_json(args.out / "axioms.json", _tree_report(cfg, rep))
    print("tree valid" if rep.passed else "\n".join(rep.violations))
    return 0 if rep.passed else 1


def _tree_report(cfg: Config, rep) -> dict:
    nodes = {n.id: (rep.axiom_failures.get(n.id) or validate_axioms(n.curve)).to_dict() for n in cfg.tree.nodes}
    return {"passed": rep.passed, "violations": list(rep.violations), "nodes": nodes}


def cmd_liquidate(cfg: Config, args) -> int:
    params = _params(cfg, "liquidate")
    alpha = args.alpha if args.alpha is not None else params.get("alpha", 0.0)
    node_ids = params.get("nodes") or [n.id for n in cfg.tree.nodes]
    rows = []
    for nid in node_ids:
        if nid not in cfg.tree.by_id:
            raise UsageError(f"unknown node {nid!r}")
        c = cfg.tree.by_id[nid].curve
        for x, y in params.get("positions", [[0.0, 0.0]]):
            p = Position(x, y)
            cls = classify_position(c, p, args.tol)
            rows.append({"node": nid, "position": [p.cash, p.units], "L": liquidate(c, p),
                         "L_limit": liquidate_limit(cone_of(c), p),
                         "L_alpha": liquidate_alpha(cone_of(c, alpha), p), "alpha": alpha,
                         "delta": delta_gap(c, p), "class": cls.tag})
    _write_json(args.out / "liquidation.json", rows)
    for r in rows:
        print(f"{r['node']} {r['position']}: L={r['L']:.10g} Lbar={r['L_limit']:.10g} delta={r['delta']:.10g} {r['class']}")
    return 0


def cmd_verdict(cfg: Config, args) -> int:
    params = _params(cfg, "verdict")
    kind, _ = _kind(args, params, "G")
    names = params.get("strategies") or list(cfg.strategies)
    out = {}
    for name in names:
        if name not in cfg.strategies:
            raise UsageError(f"unknown strategy {name!r}")
        try:
            v = arbitrage_verdict(cfg.tree, cfg.strategies[name], kind, params.get("bound"))
            out[name] = {"kind": str(kind), **v.to_dict()}
        except DomainError as e:
            out[name] = {"kind": str(kind), "tag": "not_self_financing", "error": str(e)}
        print(f"{name}: {out[name]['tag']}" + (f" m={out[name]['m']:.10g}" if "m" in out[name] else ""))
    _write_json(args.out / "verdict.json", out)
    return 0


def cmd_repair(cfg: Config, args) -> int:
    params = _params(cfg, "repair")
    name, s = _strategy(cfg, params)
    r = repair_to_G(cfg.tree, s, params.get("k", "auto"))
    doc = {"strategy": name, "k": r.k, "ok": r.ok, "trace": [list(t) for t in r.trace],
           "leaf_values": r.leaf_values, "diagnostics": r.diagnostics}
    if r.ok:
        doc["repaired"] = strategy_to_dict(r.strategy)
        doc["verdict"] = arbitrage_verdict(cfg.tree, r.strategy, kind_from("G")).to_dict()
    _write_json(args.out / "verdict.json", doc)
    print(f"{name}: k={r.k}" if r.ok else f"{name}: no finite k")
    return 0


def cmd_amplify(cfg: Config, args) -> int:
    params = _params(cfg, "amplify")
    default = "Kalpha" if (args.alpha is not None or "alpha" in params) else "Kbar"
    kind, alpha = _kind(args, params, default)
    name, s = _strategy(cfg, params)
    n_grid = params.get("n_grid", DEFAULT_N_GRID)
    out_strategy = None
    if kind.tag == "Kalpha":
        out_strategy, trace = amplify_alpha_to_G(cfg.tree, s, alpha)
    elif kind.tag == "Kbar":
        trace = amplify_Kbar_to_G(cfg.tree, s, n_grid)
    elif kind.tag in ("MalphaN", "KbarN"):
        out_strategy, trace = amplify_integer(cfg.tree, s, alpha, kind.tag, n_grid)
    else:
        raise UsageError(f"amplify needs kind Kalpha, Kbar, MalphaN or KbarN, got {kind.tag}")
    _write_text(args.out / "trace.csv", trace.to_csv())
    doc = {"strategy": name, "kind": str(kind), **trace.to_dict()}
    if out_strategy is not None:
        doc["amplified"] = strategy_to_dict(out_strategy)
    _write_json(args.out / "verdict.json", doc)
    print(f"{name}: {trace.verdict}, N={[st.N for st in trace.steps]}")
    return 0


def cmd_search(cfg: Config, args) -> int:
    params = _params(cfg, "search")
    kind, _ = _kind(args, params, "G")
    seed = args.seed if args.seed is not None else params.get("seed", DEFAULT_SEED)
    v = brute_force_search(cfg.tree, kind, params.get("unit_grid", [-1.0, 0.0, 1.0]),
                           params.get("budget", 100_000), seed)
    _write_json(args.out / "verdict.json", {"kind": str(kind), "seed": seed, **v.to_dict()})
    print(f"{v.tag} (best worst-leaf value {v.best_min:.10g}{', partial' if v.partial else ''})")
    return 0


def cmd_conditions(cfg: Config, args) -> int:
    params = _params(cfg, "conditions")
    curves = list(dict.fromkeys(n.curve for n in cfg.tree.nodes))
    lams = params.get("lambda_grid", DEFAULT_LAMBDAS)
    rep = check_L_conditions(curves, params.get("y_bound", 10.0), lams)
    lines = ["lambda,sup_bounded,sup_unbounded"]
    lines += [f"{lam!r},{a!r},{b!r}" for lam, a, b in rep.rows()]
    _write_text(args.out / "conditions.csv", "\n".join(lines) + "\n")
    doc = {"L0": rep.L0_pass, "gL0": rep.gL0_pass, "L1": rep.L1_pass, "L1_min": rep.L1_min,
           "probe_lambda": rep.probe_lambda, "probe": list(zip(rep.probe_y, rep.probe_values))}
    z = params.get("z_grid")
    if z:
        bm = beta_modulus(curves, z, params.get("eps"))
        doc["beta"] = {"z": bm.z, "beta": bm.beta, "B1_bound": bm.b1_bound, "B2": bm.b2_pass, "M_eps": bm.m_eps}
    _write_json(args.out / "conditions.json", doc)
    print(f"L0={'pass' if rep.L0_pass else 'fail'} gL0={'pass' if rep.gL0_pass else 'fail'} "
          f"L1={'pass' if rep.L1_pass else 'fail'}")
    return 0


def cmd_props(cfg: Config | None, args) -> int:
    params = _params(cfg, "props")
    seed = args.seed if args.seed is not None else params.get("seed", DEFAULT_SEED)
    names = params.get("suites") or list(SUITES)
    results = [SUITES[n](seed) for n in names]
    for r in results:
        print(r.line())
    _write_json(args.out / "props.json", {"seed": seed, "suites": [
        {"name": r.name, "passed": r.passed, "checks": r.checks, "worst": r.worst, "details": r.details}
        for r in results]})
    return 0 if all(r.passed for r in results) else 2


HANDLERS = {
    "validate": cmd_validate, "liquidate": cmd_liquidate, "verdict": cmd_verdict, "repair": cmd_repair,
    "amplify": cmd_amplify, "search": cmd_search, "conditions": cmd_conditions, "props": cmd_props,
}


def run(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    cfg = None
    if args.config is not None:
        try:
            cfg = load_config(args.config)
        except ConfigError as e:
            if args.command == "validate" and e.report is not None:
                cfg = load_config(args.config, validate=False)
                return cmd_validate(cfg, args)
            raise
    elif args.command != "props":
        raise UsageError(f"{args.command} needs --config")
    return HANDLERS[args.command](cfg, args)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except (ConfigError, UsageError, DomainError, FileNotFoundError) as e:
        print(f"illiq-arb: error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001
        print(f"illiq-arb: internal failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
