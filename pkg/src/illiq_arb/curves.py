"""Volume-dependent bid/ask curves with fixed fees, and numerical checks of their axioms.

A curve describes one trading date. Selling ``m`` units yields
``b(m) = b0 + m * bid(m)`` and buying ``l`` units costs ``a(l) = a0 + l * ask(l)``.
For a small investor the bid curve rises and the ask curve falls with volume,
so ``b`` is convex and ``a`` is concave.

All evaluation methods accept scalars or numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._search import first_true_real

REL_TOL = 1e-9


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


def _out(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


def _volume(v, name: str = "volume") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {v!r}")
    if np.any(arr < 0):
        raise DomainError(f"{name} must be >= 0, got {v!r}")
    return arr


@dataclass(frozen=True)
class FixedFees:
    """Fixed transaction fees: ``a0 >= 0`` is added to every purchase, ``b0 <= 0`` to every sale."""

    a0: float = 0.0
    b0: float = 0.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.a0) and np.isfinite(self.b0)):
            raise DomainError("fees must be finite")
        if self.a0 < 0:
            raise DomainError(f"a0 must be >= 0, got {self.a0}")
        if self.b0 > 0:
            raise DomainError(f"b0 must be <= 0, got {self.b0}")


class CostCurve:
    """Base class for the three curve families.

    Subclasses provide ``bid_at``/``ask_at`` (raw, unvalidated evaluation) and
    the endpoint prices ``bid0``, ``bid_inf``, ``ask0``, ``ask_inf``.
    """

    fees: FixedFees
    family: str = ""

    def bid_at(self, m):  # pragma: no cover - abstract
        raise NotImplementedError

    def ask_at(self, l):  # pragma: no cover - abstract
        raise NotImplementedError

    @property
    def a0(self) -> float:
        return self.fees.a0

    @property
    def b0(self) -> float:
        return self.fees.b0

    def proceeds(self, m):
        m = np.asarray(m, dtype=float)
        return _out(self.fees.b0 + m * self.bid_at(m))

    def cost(self, l):
        l = np.asarray(l, dtype=float)
        return _out(self.fees.a0 + l * self.ask_at(l))

    def bid_gap(self, m):
        """``bid_inf - bid(m)``; families with a closed form avoid the cancellation."""
        return _out(self.bid_inf - np.asarray(self.bid_at(np.asarray(m, dtype=float))))

    def ask_gap(self, l):
        return _out(np.asarray(self.ask_at(np.asarray(l, dtype=float))) - self.ask_inf)


@dataclass(frozen=True)
class PowerLaw(CostCurve):
    """``bid(m) = bid_inf - (bid_inf - bid0) / (m+1)**shape`` and the mirrored ask curve."""

    bid0: float
    bid_inf: float
    ask0: float
    ask_inf: float
    shape: float
    fees: FixedFees = field(default_factory=FixedFees)
    family = "power_law"

    def __post_init__(self) -> None:
        vals = (self.bid0, self.bid_inf, self.ask0, self.ask_inf, self.shape)
        if not all(np.isfinite(v) for v in vals):
            raise DomainError("curve parameters must be finite")
        if not 0 < self.shape < 1:
            raise DomainError(f"shape must lie in (0, 1), got {self.shape}")
        if self.bid0 > self.bid_inf:
            raise DomainError("power-law bid curve needs bid0 <= bid_inf")
        if self.ask0 < self.ask_inf:
            raise DomainError("power-law ask curve needs ask0 >= ask_inf")
        if self.bid0 <= 0:
            raise DomainError("prices must be positive")

    def bid_at(self, m):
        m = np.asarray(m, dtype=float)
        return _out(self.bid_inf - (self.bid_inf - self.bid0) / (m + 1.0) ** self.shape)

    def ask_at(self, l):
        l = np.asarray(l, dtype=float)
        return _out(self.ask_inf + (self.ask0 - self.ask_inf) / (l + 1.0) ** self.shape)

    def bid_gap(self, m):
        return _out((self.bid_inf - self.bid0) / (np.asarray(m, dtype=float) + 1.0) ** self.shape)

    def ask_gap(self, l):
        return _out((self.ask0 - self.ask_inf) / (np.asarray(l, dtype=float) + 1.0) ** self.shape)

    def tail_slope(self, v):
        """``v * |S'(v)|`` for the bid and ask curves, in closed form."""
        v = np.asarray(v, dtype=float)
        k = self.shape * v * (v + 1.0) ** (-self.shape - 1.0)
        return _out(k * (self.bid_inf - self.bid0)), _out(k * (self.ask0 - self.ask_inf))


def power_law(bid0: float, bid_inf: float, ask0: float, ask_inf: float, shape: float,
              a0: float = 0.0, b0: float = 0.0) -> PowerLaw:
    return PowerLaw(bid0, bid_inf, ask0, ask_inf, shape, FixedFees(a0, b0))


@dataclass(frozen=True)
class FixedProportional(CostCurve):
    """Constant bid and ask prices (fixed plus proportional costs)."""

    bid: float
    ask: float
    fees: FixedFees = field(default_factory=FixedFees)
    family = "proportional"

    def __post_init__(self) -> None:
        if not (np.isfinite(self.bid) and np.isfinite(self.ask)):
            raise DomainError("prices must be finite")
        if self.bid <= 0:
            raise DomainError("prices must be positive")

    bid0 = property(lambda self: self.bid)
    bid_inf = property(lambda self: self.bid)
    ask0 = property(lambda self: self.ask)
    ask_inf = property(lambda self: self.ask)

    def bid_at(self, m):
        return _out(np.full_like(np.asarray(m, dtype=float), self.bid))

    def ask_at(self, l):
        return _out(np.full_like(np.asarray(l, dtype=float), self.ask))


def proportional(bid: float, ask: float, a0: float = 0.0, b0: float = 0.0) -> FixedProportional:
    return FixedProportional(bid, ask, FixedFees(a0, b0))


def _knots(raw: Iterable[Sequence[float]], side: str) -> tuple[tuple[float, float], ...]:
    knots = tuple((float(v), float(p)) for v, p in raw)
    if len(knots) < 1:
        raise DomainError(f"{side} curve needs at least one knot")
    vols = np.array([k[0] for k in knots])
    prices = np.array([k[1] for k in knots])
    if not (np.all(np.isfinite(vols)) and np.all(np.isfinite(prices))):
        raise DomainError(f"{side} knots must be finite")
    if vols[0] != 0.0:
        raise DomainError(f"{side} knots must start at volume 0")
    if np.any(np.diff(vols) <= 0):
        raise DomainError(f"{side} knot volumes must be strictly increasing")
    return knots


@dataclass(frozen=True)
class Tabulated(CostCurve):
    """Piecewise-linear curves through ``(volume, price)`` knots.

    Beyond the last knot the price is held at the last knot's price, which is
    therefore the curve's limit. Monotonicity is *not* enforced here;
    :func:`validate_axioms` reports offending knots.
    """

    bid_knots: tuple[tuple[float, float], ...]
    ask_knots: tuple[tuple[float, float], ...]
    fees: FixedFees = field(default_factory=FixedFees)
    family = "tabulated"

    def __post_init__(self) -> None:
        object.__setattr__(self, "bid_knots", _knots(self.bid_knots, "bid"))
        object.__setattr__(self, "ask_knots", _knots(self.ask_knots, "ask"))

    @property
    def bid0(self) -> float:
        return self.bid_knots[0][1]

    @property
    def ask0(self) -> float:
        return self.ask_knots[0][1]

    @property
    def bid_inf(self) -> float:
        return self.bid_knots[-1][1]

    @property
    def ask_inf(self) -> float:
        return self.ask_knots[-1][1]

    def bid_at(self, m):
        v, p = zip(*self.bid_knots)
        return _out(np.interp(np.asarray(m, dtype=float), v, p))

    def ask_at(self, l):
        v, p = zip(*self.ask_knots)
        return _out(np.interp(np.asarray(l, dtype=float), v, p))

    @property
    def last_knot(self) -> float:
        return max(self.bid_knots[-1][0], self.ask_knots[-1][0])


# ---------------------------------------------------------------------------
# operations


def bid_price(curve: CostCurve, m):
    """Per-unit price received when selling ``m`` units."""
    return curve.bid_at(_volume(m, "m"))


def ask_price(curve: CostCurve, l):
    """Per-unit price paid when buying ``l`` units."""
    return curve.ask_at(_volume(l, "l"))


def bid_proceeds(curve: CostCurve, m):
    """Net proceeds ``b(m) = b0 + m * bid(m)`` of selling ``m`` units."""
    return curve.proceeds(_volume(m, "m"))


def ask_cost(curve: CostCurve, l):
    """Total cost ``a(l) = a0 + l * ask(l)`` of buying ``l`` units."""
    return curve.cost(_volume(l, "l"))


def break_even_units(curve: CostCurve) -> float:
    """Smallest ``y >= 0`` whose sale covers the fixed fee, i.e. ``b(y) >= 0``.

    Located by bisection to 1e-12 relative; exact for constant bid curves.
    """
    if curve.b0 == 0.0:
        return 0.0
    if isinstance(curve, FixedProportional):
        return -curve.b0 / curve.bid
    # b(y) >= b0 + y*bid0, so the root lies below -b0/bid0 (which may underflow)
    lo, hi = 0.0, max(-curve.b0 / curve.bid0, 5e-324)
    while curve.proceeds(hi) < 0.0:
        lo, hi = hi, 2.0 * hi
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if curve.proceeds(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def alpha_cap(curve: CostCurve) -> float:
    """Largest admissible proportional level for the alpha-market built on ``curve``."""
    return min(curve.ask0 / curve.ask_inf - 1.0, 1.0 - curve.bid0 / curve.bid_inf)


def default_grid() -> np.ndarray:
    return np.unique(np.concatenate([np.arange(0.0, 101.0), np.geomspace(1e-3, 1e4, 121)]))


# ---------------------------------------------------------------------------
# axiom validation


@dataclass(frozen=True)
class AxiomCheck:
    name: str
    passed: bool
    worst_point: object = None
    magnitude: float = 0.0

    def to_dict(self) -> dict:
        wp = self.worst_point
        if isinstance(wp, tuple):
            wp = list(wp)
        return {"name": self.name, "passed": self.passed, "worst_point": wp, "magnitude": self.magnitude}


@dataclass(frozen=True)
class AxiomReport:
    checks: tuple[AxiomCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def violations(self) -> list[AxiomCheck]:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> AxiomCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def _worst(name: str, slack: np.ndarray, tol: np.ndarray, points) -> AxiomCheck:
    """Build a check from ``slack >= -tol`` evaluated pointwise."""
    slack = np.asarray(slack, dtype=float)
    if slack.size == 0:
        return AxiomCheck(name, True)
    excess = -slack - np.asarray(tol, dtype=float)
    i = int(np.argmax(excess))
    if excess[i] > 0:
        return AxiomCheck(name, False, points[i], float(-slack[i]))
    return AxiomCheck(name, True)


def _monotone(name, pts, f, increasing: bool) -> AxiomCheck:
    d = np.diff(f)
    slack = d if increasing else -d
    tol = REL_TOL * (1.0 + np.abs(f[1:]) + np.abs(f[:-1]))
    return _worst(name, slack, tol, [float(p) for p in pts[1:]])


def _curvature(name, pts, f, convex: bool) -> AxiomCheck:
    h = np.diff(pts)
    s = np.diff(f) / h
    ds = np.diff(s)
    slack = ds if convex else -ds
    mag = np.maximum.reduce([np.abs(f[:-2]), np.abs(f[1:-1]), np.abs(f[2:])])
    tol = REL_TOL * (1.0 + mag) * (1.0 / h[:-1] + 1.0 / h[1:])
    return _worst(name, slack, tol, [float(p) for p in pts[1:-1]])


def _and(a: AxiomCheck, b: AxiomCheck) -> AxiomCheck:
    if a.passed:
        return b
    if b.passed:
        return a
    return a if a.magnitude >= b.magnitude else b


def grid_pairs(grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All pairs ``(v1, v2)`` from the grid with ``0 < v2 < v1``."""
    pos = grid[grid > 0]
    i, j = np.triu_indices(pos.size, k=1)
    return pos[j], pos[i]


def inequality_slacks(curve: CostCurve, v1, v2) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Slack and tolerance of the six consequence inequalities at pairs ``0 < v2 < v1``.

    Each entry maps to ``(slack, tol)``; an inequality holds when ``slack >= -tol``.
    The chord inequalities are compared in multiplied form to avoid dividing
    rounding noise by small ``v2``.
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    a1, a12, a2 = curve.cost(v1), curve.cost(v1 - v2), curve.cost(v2)
    b1, b12, b2 = curve.proceeds(v1), curve.proceeds(v1 - v2), curve.proceeds(v2)
    da, db = a1 - a12, b1 - b12
    sa = REL_TOL * (1.0 + np.abs(a1) + np.abs(a12) + np.abs(a2))
    sb = REL_TOL * (1.0 + np.abs(b1) + np.abs(b12) + np.abs(b2))
    ineq3 = np.minimum(curve.ask0 * v2 - da, da - curve.ask_inf * v2)
    ineq4 = np.minimum(db - curve.bid0 * v2, curve.bid_inf * v2 - db)
    return {
        "ineq1": (a2 - da, sa),
        "ineq2": (db - b2, sb),
        "ineq3": (ineq3, sa),
        "ineq4": (ineq4, sb),
        "ineq5": (a1 - b2 - a12, sa + sb),
        "ineq6": (b12 - b1 + a2, sa + sb),
    }


def validate_axioms(curve: CostCurve, grid=None) -> AxiomReport:
    """Check the curve axioms and their consequence inequalities on a volume grid.

    Monotonicity of both price curves, convexity of ``b`` and concavity of ``a``
    are checked through first and second differences, the spread of the limits
    exactly, and the six inequalities on every grid pair ``0 < v2 < v1``.
    For tabulated curves the knot volumes are added to the grid so an offending
    knot is reported at its own volume.
    """
    g = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < 3:
        raise DomainError("grid needs at least 3 points")
    if not np.all(np.isfinite(g)) or np.any(g < 0) or np.any(np.diff(g) <= 0):
        raise DomainError("grid must be finite, nonnegative and strictly increasing")

    pts = g
    if isinstance(curve, Tabulated):
        knots = [v for v, _ in curve.bid_knots] + [v for v, _ in curve.ask_knots]
        pts = np.unique(np.concatenate([g, knots]))

    bid, ask = np.asarray(curve.bid_at(pts)), np.asarray(curve.ask_at(pts))
    b, a = np.asarray(curve.proceeds(pts)), np.asarray(curve.cost(pts))

    a1 = _monotone("a1", pts, bid, increasing=True)
    a3 = _monotone("a3", pts, ask, increasing=False)
    if isinstance(curve, PowerLaw):
        # differentiability tail: v * |S'(v)| must vanish; checked in closed form
        far = np.array([1e6, 1e9, 1e12])
        tb, ta = curve.tail_slope(far)
        a1 = _and(a1, _monotone("a1", far, np.asarray(tb), increasing=False))
        a3 = _and(a3, _monotone("a3", far, np.asarray(ta), increasing=False))
    checks = [
        a1,
        _and(_monotone("a2", pts, b, True), _curvature("a2", pts, b, convex=True)),
        a3,
        _and(_monotone("a4", pts, a, True), _curvature("a4", pts, a, convex=False)),
    ]
    gap = curve.ask_inf - curve.bid_inf
    checks.append(AxiomCheck("a5", gap > 0, None if gap > 0 else (curve.bid_inf, curve.ask_inf),
                             0.0 if gap > 0 else float(-gap)))

    v1, v2 = grid_pairs(g)
    pairs = list(zip(v1.tolist(), v2.tolist()))
    for name, (slack, tol) in inequality_slacks(curve, v1, v2).items():
        checks.append(_worst(name, slack, tol, pairs))
    return AxiomReport(tuple(checks))


# ---------------------------------------------------------------------------
# convergence modulus of a family of curves


def beta(curves: Sequence[CostCurve], z):
    """Largest distance of any bid or ask price at volume ``z`` from its limit."""
    z = np.asarray(z, dtype=float)
    vals = [np.maximum(np.abs(np.asarray(c.bid_at(z)) - c.bid_inf), np.abs(np.asarray(c.ask_at(z)) - c.ask_inf))
            for c in curves]
    return _out(np.maximum.reduce(vals))


@dataclass(frozen=True)
class BetaModulus:
    z: tuple[float, ...]
    beta: tuple[float, ...]
    b1_bound: float
    b2_pass: bool
    m_eps: float | None = None


def beta_modulus(curves: Sequence[CostCurve], z_grid, eps: float | None = None) -> BetaModulus:
    """Tabulate the convergence modulus of a curve family on ``z_grid``.

    ``b1_bound`` is the largest ask limit; ``b2_pass`` says the modulus is
    nonincreasing along the grid. With ``eps`` given, ``m_eps`` is the first
    grid point where the modulus is at most ``eps`` (None if none is).
    """
    curves = list(curves)
    if not curves:
        raise DomainError("beta_modulus needs at least one curve")
    z = _volume(z_grid, "z_grid")
    if z.ndim != 1 or z.size == 0 or np.any(np.diff(z) <= 0):
        raise DomainError("z_grid must be a strictly increasing list")
    vals = np.atleast_1d(np.asarray(beta(curves, z)))
    b2 = bool(np.all(np.diff(vals) <= REL_TOL * (1.0 + np.abs(vals[:-1]))))
    m_eps = None
    if eps is not None:
        hit = np.nonzero(vals <= eps)[0]
        m_eps = float(z[hit[0]]) if hit.size else None
    return BetaModulus(tuple(z.tolist()), tuple(vals.tolist()), max(c.ask_inf for c in curves), b2, m_eps)


def modulus_threshold(curves: Sequence[CostCurve], eps: float) -> float:
    """Smallest real ``z >= 0`` with ``beta(z) <= eps`` (the volume ``M(eps)``)."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    z = first_true_real(lambda v: beta(curves, v) <= eps, start=0.0)
    if z is None:
        raise DomainError(f"modulus never drops below {eps}")
    return z


__all__ = [
    "AxiomCheck", "AxiomReport", "BetaModulus", "CostCurve", "DomainError", "FixedFees",
    "FixedProportional", "PowerLaw", "Tabulated", "alpha_cap", "ask_cost", "ask_price", "beta",
    "beta_modulus", "bid_price", "bid_proceeds", "break_even_units", "default_grid", "grid_pairs",
    "inequality_slacks", "modulus_threshold", "power_law", "proportional", "validate_axioms",
]
