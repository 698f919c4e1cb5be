"""Doubling + bisection searches for the first point where a monotone predicate turns true."""

from __future__ import annotations

from typing import Callable

MAX_DOUBLINGS = 60


def first_true_int(pred: Callable[[int], bool], start: int = 1, cap: int = 2**MAX_DOUBLINGS) -> int | None:
    """Smallest integer n >= start with ``pred(n)``, assuming pred is monotone.

    Returns None when pred is still false at ``cap``.
    """
    if pred(start):
        return start
    lo, hi = start, max(start * 2, start + 1)
    while not pred(hi):
        if hi >= cap:
            return None
        lo, hi = hi, min(hi * 2, cap)
    # invariant: pred(lo) false, pred(hi) true
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def first_true_real(
    pred: Callable[[float], bool],
    start: float,
    rtol: float = 1e-12,
    cap: float = float(2**MAX_DOUBLINGS),
) -> float | None:
    """Smallest real x >= start with ``pred(x)`` up to relative tolerance ``rtol``.

    The returned point always satisfies pred (it is the upper end of the final
    bracket). ``start`` must be > 0 unless pred(start) holds.
    """
    if pred(start):
        return start
    lo = start
    hi = start * 2 if start > 0 else 1.0
    while not pred(hi):
        if hi >= cap:
            return None
        lo, hi = hi, min(hi * 2, cap)
    for _ in range(400):
        if hi - lo <= rtol * hi:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi
