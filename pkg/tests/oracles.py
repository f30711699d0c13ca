"""Brute-force oracles on the truncation [0, w^3] (plus the top point W).

Nothing here calls the refinement, support or recursion code under test.
Operators are only probed through ``apply`` on generators and ``row``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from ordop.ordinal import OMEGA, OMEGA1, ONE, ZERO, Ordinal, add, fundamental_sequence, nat, omega_pow
from ordop.topology.steps import StepFunction

from gen import grid

FAR = omega_pow(OMEGA)  # above every constant the generators use


def _left_of(p: Ordinal) -> Ordinal:
    """A point below p with no support points in between (for small supports)."""
    if p.top:
        return FAR
    if p.is_successor:
        return p.predecessor()
    return fundamental_sequence(p, 40)


def variation_partition(n: int) -> list[Ordinal]:
    pts = set(grid(n))
    pts.update(_left_of(p) for p in list(pts) if p.is_limit and not p.is_zero)
    pts.update({FAR, OMEGA1})
    return sorted(pts)


def brute_row_sums(T, alphas: Iterable[Ordinal], partition: Sequence[Ordinal]) -> dict:
    """|r_alpha|_1 as the total variation of sigma -> (T 1_[0, sigma])(alpha).

    The row is a finite combination of point masses, so the variation over
    a partition fine enough to separate its support is exactly its l1 norm.
    """
    images = [T.apply(StepFunction.generator(s)) for s in partition]
    out = {}
    for a in alphas:
        vals = [Fraction(0)] + [h(a) for h in images]
        out[a] = sum(abs(y - x) for x, y in zip(vals, vals[1:]))
    return out


def brute_norm(T, alpha_grid: int = 3, partition_grid: int = 4) -> Fraction:
    alphas = grid(alpha_grid) + [OMEGA1]
    return max(brute_row_sums(T, alphas, variation_partition(partition_grid)).values())


def brute_product_entry(S, T, alpha: Ordinal, gamma: Ordinal) -> Fraction:
    """(ST)_{alpha, gamma} = sum over beta in supp r_alpha^S of S_{alpha beta} T_{beta gamma}."""
    total = Fraction(0)
    for beta, c in S.row(alpha).coeffs.items():
        total += c * T.row(beta)[gamma]
    return total


def brute_sup_norm(f: StepFunction, points: Iterable[Ordinal]) -> Fraction:
    return max(abs(f(p)) for p in points)


# ---------------------------------------------------------------------------
# eta / xi by enumeration


class NaiveSupports:
    """Support suprema of a finite operator read off rows at grid points."""

    def __init__(self, T, n: int = 12, coarse: int = 6):
        self.pts = grid(n)
        # limit candidates: a sequence outgrowing these coefficients has its sup here
        self.coarse = grid(coarse) + [omega_pow(nat(3))]
        self.rows = {a: sorted(T.row(a).coeffs) for a in self.pts}

    def colsup(self, x: Ordinal) -> Ordinal:
        hits = [a for a, r in self.rows.items() if r and r[0] <= x]
        return max(hits, default=ZERO)

    def rowsup(self, y: Ordinal) -> Ordinal:
        outs = [r[-1] for a, r in self.rows.items() if a <= y and r]
        return max(outs, default=ZERO)

    def sup_of(self, values: Sequence[Ordinal]) -> Ordinal:
        """Least grid point bounding the given prefix of an increasing sequence."""
        top = max(values)
        return min(p for p in self.coarse if p >= top)


def naive_eta_xi(T2, terms: int = 10) -> dict:
    """eta, xi at 0..terms-1, w, w+1..w+terms-1 and w*2 by direct enumeration.

    Limits are the least coarse grid point above the first ``terms`` values;
    with ``terms`` larger than the coarse coefficients this is the true
    supremum for sequences that grow by at least w per step.
    """
    sup = NaiveSupports(T2)
    eta, xi = {ZERO: ZERO}, {ZERO: ZERO}

    def run(start: Ordinal, count: int):
        s = start
        for _ in range(count):
            nxt = add(s, ONE)
            eta[nxt] = add(max(add(eta[s], OMEGA), sup.colsup(xi[s])), ONE)
            xi[nxt] = max(add(xi[s], ONE), sup.rowsup(add(eta[nxt], OMEGA)))
            s = nxt

    def limit(lam: Ordinal, base: Ordinal):
        seq_eta = [eta[add(base, nat(k))] for k in range(terms)]
        seq_xi = [xi[add(base, nat(k))] for k in range(terms)]
        eta[lam] = sup.sup_of(seq_eta)
        xi[lam] = max(sup.sup_of(seq_xi), sup.rowsup(add(eta[lam], OMEGA)))

    run(ZERO, terms)
    limit(OMEGA, ZERO)
    run(OMEGA, terms)
    limit(add(OMEGA, OMEGA), OMEGA)
    return {"eta": eta, "xi": xi}


# ---------------------------------------------------------------------------
# closedness of finite unions


def naive_closed(intervals: Sequence[tuple[Ordinal, Ordinal]], with_top: bool, n: int = 6) -> bool:
    """Closedness of a union of intervals [a, end) in [0, W], ends on grid(n) or W.

    A limit lam is a missing limit point when lam is outside the set and
    every neighbourhood (fundamental_sequence(lam, k), lam) meets it.  An
    interval [a, end) meets (x, lam) iff max(a, x + 1) < min(end, lam).
    """
    def member(x):
        return any(a <= x < e for a, e in intervals)

    for lam in grid(n):
        if lam.is_zero or not lam.is_limit or member(lam):
            continue
        if all(any(max(a, add(fundamental_sequence(lam, k), ONE)) < min(e, lam) for a, e in intervals)
               for k in range(1, 40)):
            return False
    unbounded = any(e.top for a, e in intervals)
    return with_top or not unbounded


# -- the clopen sets A_alpha, written from their definition -----------------


def in_H(a: Ordinal) -> bool:
    if a.top:
        return True
    if len(a.terms) != 1 or a.terms[0][1] != 1:
        return False
    e = a.terms[0][0]
    return e >= OMEGA and e.is_limit


def A(alpha: Ordinal) -> StepFunction:
    """1_{A_alpha}: [0, alpha] below w^w, else (w^lam, alpha] for the limit lam below the exponent."""
    if alpha < omega_pow(OMEGA):
        return StepFunction.generator(alpha)
    e = alpha.leading_exponent
    lam = Ordinal(e.terms[:-1]) if e.is_successor else e
    return StepFunction.indicator(add(omega_pow(lam), ONE), alpha)
