"""Liquidation values under concave costs and under their proportional-cost cones.

``L(x, y)`` closes a position in one trade, with the option of not selling
when the fixed fee exceeds the proceeds. ``L̄`` does the same at the limit
prices, and ``L^α`` at the limit prices worsened by a proportional level α.
The gap ``δ = L̄ - L`` measures how far the concave market is from its cone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ._search import first_true_int, first_true_real
from .curves import (
    REL_TOL,
    CostCurve,
    DomainError,
    FixedProportional,
    PowerLaw,
    Tabulated,
    alpha_cap,
    break_even_units,
    modulus_threshold,
)

SCALE_CAP = 2**60


def _out(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


@dataclass(frozen=True)
class Position:
    """Cash ``x`` on the bank account and ``y`` units of the risky asset."""

    cash: float = 0.0
    units: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "cash", float(self.cash))
        object.__setattr__(self, "units", float(self.units))
        if not (np.isfinite(self.cash) and np.isfinite(self.units)):
            raise DomainError(f"position must be finite, got ({self.cash}, {self.units})")

    def __add__(self, other: Position) -> Position:
        return Position(self.cash + other.cash, self.units + other.units)

    def __sub__(self, other: Position) -> Position:
        return Position(self.cash - other.cash, self.units - other.units)

    def __neg__(self) -> Position:
        return Position(-self.cash, -self.units)

    def __mul__(self, k: float) -> Position:
        return Position(k * self.cash, k * self.units)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.cash == 0.0 and self.units == 0.0

    def as_tuple(self) -> tuple[float, float]:
        return (self.cash, self.units)


ZERO = Position(0.0, 0.0)


@dataclass(frozen=True)
class ConeParams:
    """Limit prices of a curve, optionally widened by a proportional level ``alpha_level``."""

    bid_inf: float
    ask_inf: float
    alpha_level: float = 0.0

    def __post_init__(self) -> None:
        if not all(np.isfinite(v) for v in (self.bid_inf, self.ask_inf, self.alpha_level)):
            raise DomainError("cone parameters must be finite")
        if not self.bid_inf < self.ask_inf:
            raise DomainError(f"cone needs bid_inf < ask_inf, got {self.bid_inf} >= {self.ask_inf}")
        if self.alpha_level < 0:
            raise DomainError("alpha_level must be >= 0")
        if (1.0 - self.alpha_level) * self.bid_inf <= 0:
            raise DomainError("alpha_level leaves a nonpositive bid price")

    @property
    def bid(self) -> float:
        return (1.0 - self.alpha_level) * self.bid_inf

    @property
    def ask(self) -> float:
        return (1.0 + self.alpha_level) * self.ask_inf


def cone_of(curve: CostCurve, alpha_level: float = 0.0) -> ConeParams:
    return ConeParams(curve.bid_inf, curve.ask_inf, alpha_level)


@dataclass(frozen=True)
class SolvencyClass:
    tag: str  # "interior" | "boundary" | "insolvent"
    value: float

    @property
    def solvent(self) -> bool:
        return self.tag != "insolvent"


# ---------------------------------------------------------------------------
# vectorized kernels on (x, y) arrays


def liquidation_values(curve: CostCurve, x, y):
    """``L(x, y)`` for arrays of cash and units."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ay = np.abs(y)
    sell = x + np.maximum(np.asarray(curve.proceeds(ay)), 0.0)
    buy = x - np.asarray(curve.cost(ay))
    return _out(np.where(y >= 0, sell, buy))


def _linear_values(bid: float, ask: float, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return _out(x + y * np.where(y >= 0, bid, ask))


def limit_values(cone: ConeParams, x, y):
    """``L̄(x, y)`` at the limit prices; any alpha level is ignored."""
    return _linear_values(cone.bid_inf, cone.ask_inf, x, y)


def alpha_values(cone: ConeParams, x, y):
    """``L^α(x, y)`` at bid ``(1-α)·bid_inf`` and ask ``(1+α)·ask_inf``."""
    return _linear_values(cone.bid, cone.ask, x, y)


def delta_values(curve: CostCurve, y):
    """The gap ``δ(0, y)`` from its explicit piecewise form (it does not depend on cash)."""
    y = np.asarray(y, dtype=float)
    ay = np.abs(y)
    be = break_even_units(curve)
    short = curve.a0 + ay * np.asarray(curve.ask_gap(ay))
    idle = y * curve.bid_inf
    sold = -curve.b0 + y * np.asarray(curve.bid_gap(ay))
    return _out(np.where(y < 0, short, np.where(y <= be, idle, sold)))


# ---------------------------------------------------------------------------
# scalar operations


def liquidate(curve: CostCurve, p: Position) -> float:
    """Cash obtained by closing ``p`` at once on the concave-cost market."""
    return liquidation_values(curve, p.cash, p.units)


def liquidate_limit(cone: ConeParams, p: Position) -> float:
    return limit_values(cone, p.cash, p.units)


def liquidate_alpha(cone: ConeParams, p: Position, curve: CostCurve | None = None) -> float:
    """Liquidation on the alpha-market; with ``curve`` given the level is checked against its cap."""
    if curve is not None:
        cap = alpha_cap(curve)
        if cone.alpha_level > cap * (1.0 + REL_TOL) + REL_TOL:
            raise DomainError(f"alpha_level {cone.alpha_level} exceeds the curve's cap {cap}")
    return alpha_values(cone, p.cash, p.units)


def delta_gap(curve: CostCurve, p: Position) -> float:
    return delta_values(curve, p.units)


def delta_rate(curve: CostCurve, y, lam: float):
    """``δ(λ·(0, y)) / λ``, which decreases to 0 as ``λ`` grows."""
    if not lam >= 1.0:
        raise DomainError(f"lambda must be >= 1, got {lam}")
    return _out(np.asarray(delta_values(curve, lam * np.asarray(y, dtype=float))) / lam)


def default_tol(p: Position, ask0: float) -> float:
    return 1e-9 * (1.0 + abs(p.cash) + abs(p.units) * ask0)


def _classify(value: float, tol: float) -> SolvencyClass:
    if value > tol:
        return SolvencyClass("interior", value)
    if value < -tol:
        return SolvencyClass("insolvent", value)
    return SolvencyClass("boundary", value)


def classify_position(curve: CostCurve, p: Position, tol: float | None = None) -> SolvencyClass:
    """Interior, boundary or insolvent according to ``L(p)`` against ``±tol``.

    Points ``(x, 0)`` with ``0 < x <= a0`` have ``L > 0`` and count as interior.
    """
    if tol is None:
        tol = default_tol(p, curve.ask0)
    if tol < 0:
        raise DomainError("tol must be >= 0")
    return _classify(liquidate(curve, p), tol)


def cone_membership(cone: ConeParams, p: Position, tol: float | None = None) -> SolvencyClass:
    """Membership in the closed cone, using ``L^α`` when the cone carries an alpha level."""
    if tol is None:
        tol = default_tol(p, cone.ask)
    if tol < 0:
        raise DomainError("tol must be >= 0")
    value = alpha_values(cone, p.cash, p.units) if cone.alpha_level > 0 else limit_values(cone, p.cash, p.units)
    return _classify(value, tol)


def project_into_cone(cone: ConeParams, p: Position, eps: float) -> Position:
    """Raise the units of ``p`` just enough to land strictly inside the cone.

    Cash is kept. For ``x <= 0`` the floor is ``-x / (bid_inf - min(bid_inf/2, eps))``;
    for ``x >= 0`` it is ``-x / (ask_inf + eps)``. Both floors tend to the
    boundary ray as ``eps -> 0``, so points of the closed cone are recovered in the limit.
    """
    if not eps > 0:
        raise DomainError("eps must be > 0")
    x = p.cash
    if x <= 0:
        floor = -x / (cone.bid_inf - min(cone.bid_inf / 2.0, eps))
    else:
        floor = -x / (cone.ask_inf + eps)
    return Position(x, max(p.units, floor))


# ---------------------------------------------------------------------------
# scaling


class ScalingThreshold(NamedTuple):
    m_eps: float
    y_buy: float
    y_sell: float


def scaling_threshold(curve: CostCurve, alpha_level: float, eps: float, S: float | None = None) -> ScalingThreshold:
    """Unit thresholds beyond which the alpha-cone boundary lies inside the solvency set.

    A short position ``(-y·(1+α)·ask_inf, y)`` with ``y <= y_buy`` and a long
    position ``(-y·(1-α)·bid_inf, y)`` with ``y >= y_sell`` both have ``L >= 0``.
    ``S`` bounds the ask limits of the curve family (default: this curve's).
    When ``eps`` is too coarse for one side it is halved against that side's margin.
    """
    S = curve.ask_inf if S is None else S
    if not 0 < eps < alpha_level * S:
        raise DomainError(f"need 0 < eps < alpha_level*S = {alpha_level * S}, got {eps}")
    m_eps = modulus_threshold([curve], eps)

    margin_a = alpha_level * curve.ask_inf
    eps_a = eps if eps < margin_a else margin_a / 2.0
    m_a = m_eps if eps_a == eps else modulus_threshold([curve], eps_a)
    y_buy = -max(m_a, curve.a0 / (margin_a - eps_a))

    margin_b = alpha_level * curve.bid_inf
    eps_b = eps if eps < margin_b else margin_b / 2.0
    m_b = m_eps if eps_b == eps else modulus_threshold([curve], eps_b)
    y_sell = max(m_b, -curve.b0 / (margin_b - eps_b))
    return ScalingThreshold(m_eps, y_buy, y_sell)


def min_scale_into_solvency(
    curve: CostCurve, p: Position, integer_only: bool = False, strict: bool = False
) -> float | int | None:
    """Smallest ``λ >= 1`` with ``λ·p`` solvent (``L > 0`` when ``strict``).

    Solvent scales are upward closed, so the answer is found by doubling then
    bisection, capped at ``2**60``. Returns None when no finite scale exists:
    the limit value ``L̄(p)`` is not positive (and ``p`` is not nonnegative
    cash), or the cap is reached.
    """
    if p.units == 0.0:
        if p.cash > 0 or (p.cash == 0 and not strict):
            return 1
        return None
    if limit_values(cone_of(curve), p.cash, p.units) <= 0:
        return None

    def ok(lam) -> bool:
        q = lam * p
        v = liquidate(curve, q)
        tol = default_tol(q, curve.ask0)
        return v > tol if strict else v >= -tol

    if integer_only:
        return first_true_int(ok, 1, SCALE_CAP)
    return first_true_real(ok, 1.0, cap=float(SCALE_CAP))


# ---------------------------------------------------------------------------
# conditions on the decay of the gap


@dataclass(frozen=True)
class LConditionsReport:
    lambdas: tuple[float, ...]
    sup_bounded: tuple[float, ...]
    L0_pass: bool
    gL0_tail_bounded: bool
    gL0_sup: tuple[float, ...]
    gL0_pass: bool
    probe_lambda: float
    probe_y: tuple[float, ...]
    probe_values: tuple[float, ...]
    L1_min: float
    L1_pass: bool

    def rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.lambdas, self.sup_bounded, self.gL0_sup))


def _tail_bounded(curve: CostCurve) -> bool:
    # sup_z δ(0, z) is finite iff both prices reach their limits fast enough
    if isinstance(curve, PowerLaw):
        return curve.bid0 == curve.bid_inf and curve.ask0 == curve.ask_inf
    return isinstance(curve, (FixedProportional, Tabulated))


def _unbounded_sup(curve: CostCurve) -> float:
    if not _tail_bounded(curve):
        return float("inf")
    z = np.geomspace(1e-6, 1e6, 1201)
    if isinstance(curve, Tabulated):
        z = np.unique(np.concatenate([z, [v for v, _ in curve.bid_knots], [v for v, _ in curve.ask_knots]]))
    be = break_even_units(curve)
    z = np.concatenate([z, [be], -z])
    return float(np.max(delta_values(curve, z)))


def check_L_conditions(
    curves: Sequence[CostCurve],
    y_bound: float,
    lambda_grid: Sequence[float],
    n_points: int = 2001,
    probe_lambda: float = 1e3,
) -> LConditionsReport:
    """Estimate the decay of ``sup_y δ(λ·(0,y))/λ`` on bounded and unbounded unit ranges.

    The bounded sup uses a symmetric y-grid on ``[-y_bound, y_bound]``. Since
    ``δ(λ·(0,y))/λ`` over all ``y`` equals ``sup_z δ(0,z)/λ``, the unbounded
    sup is finite for every λ exactly when the gap itself is bounded, which is
    decided from the tail of each curve family. A probe along growing ``y`` at
    ``probe_lambda`` shows the divergence when it occurs.
    """
    curves = list(curves)
    lams = np.asarray(lambda_grid, dtype=float)
    if not curves or lams.ndim != 1 or lams.size < 2:
        raise DomainError("need at least one curve and a lambda grid of >= 2 points")
    if np.any(np.diff(lams) <= 0) or lams[0] < 1:
        raise DomainError("lambda_grid must be increasing and >= 1")
    if not y_bound > 0:
        raise DomainError("y_bound must be > 0")

    ys = np.linspace(-y_bound, y_bound, n_points)
    sup_b = [max(float(np.max(delta_rate(c, ys, lam))) for c in curves) for lam in lams]
    diffs = np.diff(sup_b)
    L0 = bool(np.all(diffs <= REL_TOL * (1.0 + np.abs(sup_b[:-1])))) and sup_b[-1] < sup_b[0]

    bounded = all(_tail_bounded(c) for c in curves)
    base = max(_unbounded_sup(c) for c in curves)
    gsup = tuple(float(base / lam) for lam in lams)

    probe_y = np.geomspace(1.0, 1e12, 13)
    probe = [max(float(delta_rate(c, yy, probe_lambda)) for c in curves) for yy in probe_y]

    nz = ys[ys != 0]
    l1 = min(float(np.min(delta_values(c, nz))) for c in curves)
    return LConditionsReport(
        tuple(lams.tolist()), tuple(sup_b), L0, bounded, gsup, bounded,
        float(probe_lambda), tuple(probe_y.tolist()), tuple(probe), l1, l1 > 0,
    )


__all__ = [
    "ConeParams", "LConditionsReport", "Position", "ScalingThreshold", "SolvencyClass", "ZERO",
    "alpha_values", "check_L_conditions", "classify_position", "cone_membership", "cone_of",
    "default_tol", "delta_gap", "delta_rate", "delta_values", "limit_values", "liquidate",
    "liquidate_alpha", "liquidate_limit", "liquidation_values", "min_scale_into_solvency",
    "project_into_cone", "scaling_threshold",
]
