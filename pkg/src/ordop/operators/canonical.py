"""Row structure of finite operators on a refined partition.

On each piece of the refinement every row has the same shape: a finite set
of targets, each either a fixed ordinal or a translate ``a -> v + (a - s)``,
with constant coefficients.  Refining at the points where a translate meets
a fixed target, and where two translates start to coincide, makes distinct
targets distinct on the whole piece.  Row sums, equality and support sups
are then read off piece by piece.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from ..ordinal import OMEGA1, ONE, ZERO, Ordinal, add, left_subtract, omega_pow
from ..topology.maps import PiecewiseMap, Shift
from ..topology.steps import End, end_lt, end_min, interval_sup
from .core import Comp, Operator, Tensor

__all__ = ["RowPiece", "refine", "NotFiniteError"]


class NotFiniteError(TypeError):
    """The operation needs an operator whose maps have finitely many pieces."""


@dataclass(frozen=True)
class RowPiece:
    start: Ordinal
    end: End
    # ("c", d) -> coefficient for the fixed target d,
    # ("s", v) -> coefficient for the translate with value v at ``start``
    targets: dict

    @property
    def single(self) -> bool:
        return self.end is not None and self.end == add(self.start, ONE)

    def target_at(self, key, alpha: Ordinal) -> Ordinal:
        kind, v = key
        return v if kind == "c" else add(v, left_subtract(self.start, alpha))

    def row_sum(self) -> Fraction:
        return sum((abs(c) for c in self.targets.values()), Fraction(0))

    def least_target(self) -> Optional[Ordinal]:
        if not self.targets:
            return None
        return min(v for _, v in self.targets)


def _top_difference(a: Ordinal, b: Ordinal) -> Ordinal:
    """Largest exponent at which the CNF coefficients of a and b differ."""
    ca, cb = dict(a.terms), dict(b.terms)
    return max(e for e in set(ca) | set(cb) if ca.get(e, 0) != cb.get(e, 0))


def _piece_kind(phi: PiecewiseMap, s: Ordinal):
    i = phi.index_of(s)
    p = phi.pieces[i]
    return p, p.at(phi.starts[i], s)


def refine(T: Operator) -> list[RowPiece]:
    if not T.finite:
        raise NotFiniteError("refinement needs finite piecewise maps")
    starts = {ZERO, OMEGA1}
    for t in T.terms:
        if isinstance(t, Comp):
            starts.update(t.weight.starts)
            starts.update(t.phi.starts)
        else:
            starts.update(t.g.starts)
    base = sorted(starts)
    tensor_points = {p for t in T.terms if isinstance(t, Tensor) for p in t.mu.points()}

    extra = set()
    for i, s in enumerate(base):
        e = base[i + 1] if i + 1 < len(base) else None
        fixed = set(tensor_points)
        shifts = set()
        for t in T.terms:
            if isinstance(t, Comp):
                p, v = _piece_kind(t.phi, s)
                (shifts if isinstance(p, Shift) else fixed).add(v)
        for v in shifts:
            for d in fixed:
                if v <= d:
                    x = add(s, left_subtract(v, d))
                    if end_lt(x, e):
                        extra.add(x)
                        if not x.top:
                            extra.add(add(x, ONE))
        vs = sorted(shifts)
        for a in range(len(vs)):
            for b in range(a + 1, len(vs)):
                x = add(s, omega_pow(add(_top_difference(vs[a], vs[b]), ONE)))
                if end_lt(x, e):
                    extra.add(x)
    points = sorted(starts | {x for x in extra})

    pieces = []
    for i, s in enumerate(points):
        e = points[i + 1] if i + 1 < len(points) else None
        single = e is not None and e == add(s, ONE) or s.top
        targets: dict = {}
        for t in T.terms:
            if isinstance(t, Comp):
                w = t.weight(s)
                if not w:
                    continue
                p, v = _piece_kind(t.phi, s)
                key = ("s", v) if isinstance(p, Shift) and not single else ("c", v)
                targets[key] = targets.get(key, 0) + w
            else:
                gs = t.g(s)
                if not gs:
                    continue
                for q, c in t.mu.coeffs.items():
                    targets[("c", q)] = targets.get(("c", q), 0) + gs * c
        pieces.append(RowPiece(s, e, {k: c for k, c in targets.items() if c != 0}))
    return pieces


def row_sup_of_piece(piece: RowPiece, y: Ordinal) -> Ordinal:
    """sup of the row supports over alpha in piece, alpha <= y."""
    m = end_min(piece.end, None if y.top else add(y, ONE))
    if not end_lt(piece.start, m):
        return ZERO
    best = ZERO
    for key in piece.targets:
        kind, v = key
        if kind == "c":
            best = max(best, v)
        elif m is None:
            best = OMEGA1
        elif m.is_successor:
            best = max(best, piece.target_at(key, m.predecessor()))
        else:
            best = max(best, add(v, left_subtract(piece.start, m)))
    return best


def col_sup_of_piece(piece: RowPiece, x: Ordinal) -> Ordinal:
    """sup of the alpha in piece whose row meets [0, x]."""
    best = ZERO
    for kind, v in piece.targets:
        if v > x:
            continue
        if kind == "c" or x.top:
            hi = piece.end
        else:
            hi = end_min(piece.end, add(piece.start, left_subtract(v, add(x, ONE))))
        if end_lt(piece.start, hi):
            best = max(best, interval_sup(piece.start, hi))
    return best
