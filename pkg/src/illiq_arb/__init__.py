"""Arbitrage in discrete-time markets with concave, volume-dependent transaction costs."""

from .arbitrage import (
    AmplificationTrace,
    ExampleParams,
    amplify_alpha_to_G,
    amplify_integer,
    amplify_Kbar_to_G,
    brute_force_search,
    example_strong_arbitrage,
    normalize_terminal,
    repair_to_G,
    tilt_Kbar_to_K,
)
from .curves import (
    CostCurve,
    DomainError,
    FixedFees,
    FixedProportional,
    PowerLaw,
    Tabulated,
    ask_cost,
    ask_price,
    beta_modulus,
    bid_price,
    bid_proceeds,
    break_even_units,
    power_law,
    proportional,
    validate_axioms,
)
from .liquidation import (
    ConeParams,
    Position,
    check_L_conditions,
    classify_position,
    cone_membership,
    delta_gap,
    delta_rate,
    liquidate,
    liquidate_alpha,
    liquidate_limit,
    min_scale_into_solvency,
    project_into_cone,
    scaling_threshold,
)
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
    event_probability,
    evolve,
    restrict_integer,
    self_financing_check,
    terminal_liquidation,
    validate_tree,
)

__version__ = "0.1.0"
