"""Norms, equality, support suprema and the matrix clauses for operators."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from ..ordinal import OMEGA, OMEGA1, ONE, ZERO, Ordinal, add, format_ordinal, omega_pow, parse_ordinal
from ..topology.maps import PiecewiseMap
from ..topology.steps import StepFunction
from .canonical import NotFiniteError, col_sup_of_piece, refine, row_sup_of_piece
from .core import Comp, Operator, Tensor

__all__ = [
    "NormResult",
    "Difference",
    "operator_norm",
    "norm",
    "equals",
    "equal_on",
    "row_support_sup",
    "col_support_sup",
    "boundaries",
    "standard_generators",
    "RudinReport",
    "rudin_validate",
    "random_ordinal",
]


@dataclass(frozen=True)
class NormResult:
    value: Fraction
    exact: bool
    # a row index where the value is attained
    at: Optional[Ordinal] = None


def boundaries(T: Operator) -> list[Ordinal]:
    """Piece starts of every step function and map in T, plus tensor points."""
    pts = {ZERO, OMEGA1}
    for t in T.terms:
        if isinstance(t, Comp):
            pts.update(t.weight.starts)
            if isinstance(t.phi, PiecewiseMap):
                pts.update(t.phi.starts)
                pts.update(p.value for p in t.phi.pieces)
        else:
            pts.update(t.g.starts)
            pts.update(t.mu.points())
    return sorted(pts)


def standard_generators(extra: Iterable[Ordinal] = ()) -> list[Ordinal]:
    """sigma values for the generator set {1_[0, sigma]}."""
    base = [ZERO, ONE, OMEGA, add(OMEGA, ONE), omega_pow(parse_ordinal("2")),
            omega_pow(OMEGA), OMEGA1]
    return sorted(set(base) | set(extra))


def operator_norm(T: Operator, samples: Sequence[Ordinal] = ()) -> NormResult:
    """sup of the absolute row sums.

    Exact for finite operators.  Otherwise the best sampled row is reported,
    flagged exact when it meets the bound sum of the term norms.
    """
    if T.finite:
        best, at = Fraction(0), ZERO
        for piece in refine(T):
            r = piece.row_sum()
            if r > best:
                best, at = r, piece.start
        return NormResult(best, True, at)
    bound = Fraction(0)
    for t in T.terms:
        bound += t.weight.norm() if isinstance(t, Comp) else t.g.norm() * t.mu.norm()
    pts = set(samples) | set(boundaries(T))
    best, at = Fraction(0), ZERO
    for a in sorted(pts):
        r = T.row(a).norm()
        if r > best:
            best, at = r, a
    return NormResult(best, best == bound, at)


def norm(T: Operator) -> Fraction:
    return operator_norm(T).value


@dataclass(frozen=True)
class Difference:
    """Where two operators differ: row alpha, and a generator 1_[0, sigma]."""

    alpha: Ordinal
    sigma: Ordinal

    def describe(self) -> str:
        return f"row {format_ordinal(self.alpha)}, generator 1_[0, {format_ordinal(self.sigma)}]"


def equals(S: Operator, T: Operator, generators: Iterable[Ordinal] = ()) -> Optional[Difference]:
    """None when S == T, else a distinguishing row and generator.

    Finite operators are compared exactly on the refined row structure of
    S - T.  Otherwise S and T are compared on the generators 1_[0, sigma]
    for the given sigmas together with all boundaries of both operators.
    """
    D = S - T
    if D.finite:
        for piece in refine(D):
            if piece.targets:
                return Difference(piece.start, piece.least_target())
        return None
    sigmas = set(generators) | set(standard_generators()) | set(boundaries(S)) | set(boundaries(T))
    return equal_on(S, T, sorted(sigmas))


def equal_on(S: Operator, T: Operator, sigmas: Iterable[Ordinal]) -> Optional[Difference]:
    for sigma in sigmas:
        f = StepFunction.generator(sigma)
        a, b = S.apply(f), T.apply(f)
        if a != b:
            diff = a - b
            alpha = next(s for s, _, v in diff.pieces() if v != 0)
            return Difference(alpha, sigma)
    return None


def row_support_sup(T: Operator, y: Ordinal) -> Ordinal:
    """sup of the union of supp(r_alpha) over alpha <= y (0 if empty).

    Exact for finite operators.  For lazy terms each term is bounded on its
    own (phi(y) for a monotone phi), ignoring cancellation between terms, so
    the result is an upper bound.
    """
    if not T.finite:
        return _row_sup_by_term(T, y)
    best = ZERO
    for piece in refine(T):
        if piece.start > y:
            break
        best = max(best, row_sup_of_piece(piece, y))
    return best


def _row_sup_by_term(T: Operator, y: Ordinal) -> Ordinal:
    from ..topology.maps import MonotoneMap
    best = ZERO
    for t in T.terms:
        if isinstance(t, Tensor):
            if t.g.support_min() is not None and t.g.support_min() <= y:
                best = max([best] + t.mu.points())
            continue
        lo = t.weight.support_min()
        if lo is None or lo > y:
            continue
        if isinstance(t.phi, PiecewiseMap):
            best = max(best, row_support_sup(Operator([t]), y))
        elif isinstance(t.phi, MonotoneMap):
            best = max(best, t.phi(y))
        else:
            raise NotFiniteError("row supports of this map are not monotone-bounded")
    return best


def col_support_sup(T: Operator, x: Ordinal) -> Ordinal:
    """sup of the union of supp(k_beta) over beta <= x (0 if empty).

    Exact for finite operators, a per-term upper bound otherwise.
    """
    if not T.finite:
        return _col_sup_by_term(T, x)
    best = ZERO
    for piece in refine(T):
        best = max(best, col_sup_of_piece(piece, x))
    return best


# ---------------------------------------------------------------------------
# matrix clauses


def random_ordinal(rng: random.Random, depth: int = 2, max_coef: int = 4) -> Ordinal:
    """A random ordinal below w^(w^depth)-ish, small coefficients."""
    from ..ordinal import Ordinal as O, nat
    if depth <= 0:
        return nat(rng.randint(0, max_coef))
    n = rng.randint(0, 3)
    exps = sorted({random_ordinal(rng, depth - 1, max_coef) for _ in range(n)}, reverse=True)
    return O(tuple((e, rng.randint(1, max_coef)) for e in exps))


@dataclass
class RudinReport:
    clauses: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    norm: Optional[Fraction] = None
    top_column_limit: Optional[Fraction] = None

    @property
    def ok(self) -> bool:
        return all(self.clauses.values())

    def lines(self) -> list[str]:
        out = [f"norm: {self.norm}"]
        for k in sorted(self.clauses):
            w = self.witnesses.get(k)
            out.append(f"clause {k}: {'pass' if self.clauses[k] else 'FAIL'}"
                       + ("" if w is None else f" (witness {w})"))
        if self.top_column_limit is not None:
            out.append(f"limit of column W: {self.top_column_limit}")
        return out


def rudin_validate(T: Operator, samples: int = 200, seed: int = 0,
                   extra: Iterable[Ordinal] = ()) -> RudinReport:
    """Check the four matrix clauses on piece boundaries plus random points.

    (i)   rows are absolutely summable and their sums bound the norm;
    (ii)  column k_a is continuous for a = 0 and a successor;
    (iii) column k_a is continuous at W for countable a;
    (iv)  column k_W restricted to [0, W) is continuous.
    """
    rng = random.Random(seed)
    pts = set(boundaries(T)) | set(extra)
    for b in list(pts):
        if not b.top:
            pts.add(add(b, ONE))
    for _ in range(samples):
        pts.add(random_ordinal(rng))
    pts = sorted(pts)
    rep = RudinReport()
    nr = operator_norm(T, pts)
    rep.norm = nr.value
    worst = max(T.row(a).norm() for a in pts)
    rep.clauses["i"] = worst <= nr.value
    if not rep.clauses["i"]:
        rep.witnesses["i"] = "row sum above norm"
    rep.clauses["ii"] = True
    rep.clauses["iii"] = True
    for a in pts:
        if a.top:
            continue
        k = T.column(a)
        if (a.is_zero or a.is_successor) and rep.clauses["ii"]:
            d = k.discontinuity()
            if d is not None:
                rep.clauses["ii"] = False
                rep.witnesses["ii"] = f"column {format_ordinal(a)} jumps at {format_ordinal(d)}"
        if rep.clauses["iii"] and k.left_limit_at_top() != k(OMEGA1):
            rep.clauses["iii"] = False
            rep.witnesses["iii"] = f"column {format_ordinal(a)} at W"
    kw = T.column(OMEGA1)
    d = kw.discontinuity(include_top=False)
    rep.clauses["iv"] = d is None
    if d is not None:
        rep.witnesses["iv"] = f"column W jumps at {format_ordinal(d)}"
    rep.top_column_limit = kw.left_limit_at_top()
    return rep


def _col_sup_by_term(T: Operator, x: Ordinal) -> Ordinal:
    from ..topology.maps import is_monotone
    from ..topology.steps import interval_sup
    best = ZERO
    for t in T.terms:
        if isinstance(t, Tensor):
            if any(p <= x for p in t.mu.points()):
                best = max(best, t.g.support_sup() or ZERO)
            continue
        if isinstance(t.phi, PiecewiseMap):
            best = max(best, col_support_sup(Operator([t]), x))
            continue
        if not is_monotone(t.phi):
            raise NotFiniteError("column supports of this map are not monotone-bounded")
        hi = t.weight.support_sup()
        if hi is None:
            continue
        # rows alpha with phi(alpha) <= x form [0, threshold(x + 1))
        cut = None if x.top else t.phi.threshold(add(x, ONE))
        if cut is not None:
            if cut.is_zero:
                continue
            hi = min(hi, interval_sup(ZERO, cut))
        best = max(best, hi)
    return best
