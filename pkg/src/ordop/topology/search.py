"""Least-witness search over ordinals for monotone predicates.

``least_true(pred, hi)`` finds the least x <= hi with ``pred(x)`` when
``pred`` is monotone (false on an initial segment, then true).  The answer
is built one CNF term at a time: find the least exponent e for which
``P + w^e`` already satisfies ``pred``; a limit e pins the answer to
``P + w^e``, a successor e = d+1 fixes the next term ``w^d * k`` by
galloping on k.  Exponents are searched recursively with the same routine.

Probing alone cannot tell ``P + w^(d+1)`` from ``P + w^d * k`` for huge k,
so callers pass ``tight(x)``: for a limit x with pred(x), whether pred is
false everywhere below x.  Without it the gallop is capped.
"""

from __future__ import annotations

from typing import Callable, Optional

from ..ordinal import OMEGA1, ONE, ZERO, Ordinal, add, left_subtract, mul, nat, omega_pow

__all__ = ["least_true", "divide", "SearchError"]


class SearchError(RuntimeError):
    pass


GALLOP_CAP = 1 << 24


def least_true(pred: Callable[[Ordinal], bool], hi: Ordinal,
               hint: Optional[Ordinal] = None,
               tight: Optional[Callable[[Ordinal], bool]] = None,
               trust_hint: bool = False) -> Optional[Ordinal]:
    """Least x in [0, hi] with pred(x), or None if pred(hi) is false.

    For ``hi == OMEGA1`` the search needs a countable ``hint`` with
    ``pred(hint)`` true; without one the answer is OMEGA1 when pred(OMEGA1)
    holds (the caller asserts no countable witness exists).  With
    ``trust_hint`` pred(hint) is taken as known and never evaluated, which
    matters when pred is expensive far above the answer.
    """
    if pred(ZERO):
        return ZERO
    if hi.top:
        if hint is not None and not hint.top and (trust_hint or pred(hint)):
            hi = hint
        elif pred(OMEGA1):
            return OMEGA1
        else:
            return None
    elif not pred(hi):
        return None
    return _search(pred, hi, tight)


def _search(pred, hi: Ordinal, tight) -> Ordinal:
    prefix = ZERO
    bound = add(hi.leading_exponent, ONE)
    while True:
        base = prefix

        def exp_pred(e, base=base):
            x = add(base, omega_pow(e))
            return x > hi or pred(x)

        def exp_tight(e, base=base):
            x = add(base, omega_pow(e))
            return x <= hi and tight(x)

        e = ZERO if exp_pred(ZERO) else _search(exp_pred, bound, exp_tight if tight is not None else None)
        if e.is_zero:
            return add(prefix, ONE)
        if not e.is_successor:
            return add(prefix, omega_pow(e))
        cand = add(base, omega_pow(e))
        if tight is not None and cand <= hi and tight(cand):
            return cand
        d = e.predecessor()
        unit = omega_pow(d)

        def at(k, base=base, unit=unit):
            x = add(base, mul(unit, nat(k)))
            return x > hi or pred(x)

        # at(1) is false (d < e) and at(k) is true for large k
        lo, step = 1, 1
        while not at(lo + step):
            lo += step
            step *= 2
            if step > GALLOP_CAP:
                raise SearchError(f"no finite witness below {cand}; pass tight() to decide limits")
        top = lo + step
        while top - lo > 1:
            mid = (lo + top) // 2
            if at(mid):
                top = mid
            else:
                lo = mid
        prefix = add(prefix, mul(unit, nat(lo)))
        bound = d
        if bound.is_zero:
            # only finite increments remain and prefix + 1 satisfies pred
            return add(prefix, ONE)


def divide(alpha: Ordinal, t: Ordinal) -> tuple[Ordinal, Ordinal]:
    """(d, r) with alpha = t * d + r and r < t (ordinal left division)."""
    if t.is_zero:
        raise ZeroDivisionError("ordinal division by 0")
    if alpha.top:
        return OMEGA1, ZERO
    d = least_true(lambda x: mul(t, add(x, ONE)) > alpha, alpha,
                   tight=lambda lam: mul(t, lam) <= alpha)
    return d, left_subtract(mul(t, d), alpha)
