"""Subsets of [0, W] built from intervals and one schematic block family.

``ClosedSetExpr`` holds a finite union of intervals, optionally a family of
blocks ``[l(s), l(s) + width]`` for s in [s_lo, s_hi), a flag for the sup
of that family and a flag for W.  ``is_closed`` decides closedness with a
least bad limit as witness; ``order_iso`` builds the increasing enumeration
of the set, which is continuous exactly when the set is closed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..ordinal import OMEGA1, ONE, ZERO, Ordinal, OrdinalError, add, format_ordinal, left_subtract, mul
from .maps import Const, MonotoneMap, OrdinalMap, PiecewiseMap, Shift, merge_intervals
from .search import divide
from .sequences import Seq, SupError, sample_points, seq_inverse, seq_sup
from .steps import end_lt, format_end

__all__ = ["BlockFamily", "ClosedSetExpr", "NotClosedError", "is_closed", "order_iso", "order_iso_map",
           "map_discontinuity", "iso_defect"]


class NotClosedError(OrdinalError):
    def __init__(self, witness: Ordinal):
        super().__init__(f"set is not closed: limit point {format_ordinal(witness)} is missing")
        self.witness = witness


@dataclass(frozen=True)
class BlockFamily:
    """Blocks [left(s), left(s) + width] for s in [lo, hi); hi=None means up to W."""

    left: Seq
    width: Ordinal
    lo: Ordinal = ZERO
    hi: Optional[Ordinal] = None
    with_sup: bool = False

    @property
    def block_type(self) -> Ordinal:
        return add(self.width, ONE)

    def block_end(self, s: Ordinal) -> Ordinal:
        return add(self.left(s), self.width)

    def upper(self) -> Seq:
        return self.left + self.width

    def count(self) -> Ordinal:
        return OMEGA1 if self.hi is None else left_subtract(self.lo, self.hi)

    def sup(self) -> Ordinal:
        """sup of the union of blocks (the family's own limit point)."""
        if self.hi is None:
            return OMEGA1
        if self.hi.is_successor:
            return self.block_end(self.hi.predecessor())
        return seq_sup(self.upper(), self.hi)

    def index_for(self, x: Ordinal) -> Optional[Ordinal]:
        """Least s with left(s) + width >= x (x countable)."""
        after = seq_inverse(self.left, add(x, ONE), self.lo, self.hi)
        if after is None:
            if self.hi is not None and self.hi.is_successor and self.hi > self.lo:
                p = self.hi.predecessor()
                return p if self.block_end(p) >= x else None
            return None
        if after > self.lo and after.is_successor:
            p = after.predecessor()
            if self.block_end(p) >= x:
                return p
        return after


@dataclass
class ClosedSetExpr:
    intervals: list = field(default_factory=list)
    family: Optional[BlockFamily] = None
    with_top: bool = False

    def __post_init__(self):
        self.intervals = merge_intervals(self.intervals)
        if self.family is not None and not self.family.left.strict:
            raise ValueError("block family needs a strictly increasing left end")

    @classmethod
    def of(cls, *closed: tuple[Ordinal, Ordinal], family: Optional[BlockFamily] = None,
           with_top: bool = False) -> "ClosedSetExpr":
        """From closed intervals [a, b]."""
        ivs = [(a, None if b.top else add(b, ONE)) for a, b in closed]
        return cls(ivs, family, with_top)

    def contains(self, x: Ordinal) -> bool:
        if x.top and self.with_top:
            return True
        for lo, hi in self.intervals:
            if lo <= x and end_lt(x, hi):
                return True
        fam = self.family
        if fam is None or x.top:
            return False
        if fam.with_sup and fam.hi is not None and x == fam.sup():
            return True
        s = fam.index_for(x)
        return s is not None and not s.top and fam.left(s) <= x

    def to_text(self) -> str:
        parts = [f"[{format_ordinal(lo)}, {format_end(hi)}" for lo, hi in self.intervals]
        if self.family is not None:
            f = self.family
            rng = f"[{format_ordinal(f.lo)}, {'W' if f.hi is None else format_ordinal(f.hi)})"
            lt = f.left.to_text()
            lt = f"{lt}(s)" if lt.isidentifier() else lt
            parts.append(f"U_s in {rng} [{lt}, {lt} + {format_ordinal(f.width)}]"
                         + (" + sup" if f.with_sup else ""))
        if self.with_top:
            parts.append("{W}")
        return " U ".join(parts) if parts else "{}"


def _limit_samples(fam: BlockFamily) -> list[Ordinal]:
    pts = [p for p in sample_points(4) if p.is_limit and not p.is_zero]
    out = []
    for p in pts:
        lam = add(fam.lo, p)
        if fam.hi is None or lam < fam.hi:
            out.append(lam)
    return sorted(set(out))


def is_closed(H: ClosedSetExpr) -> tuple[bool, Optional[Ordinal]]:
    """(closed?, least missing limit point found)."""
    bad = []
    for lo, hi in H.intervals:
        if hi is not None and hi.is_limit and not H.contains(hi):
            bad.append(hi)
    fam = H.family
    if fam is not None:
        if not fam.left.continuous:
            for lam in _limit_samples(fam):
                try:
                    sup_below = seq_sup(fam.left, lam) if lam > fam.lo else None
                except SupError:
                    continue
                if sup_below is not None and lam > fam.lo and not H.contains(sup_below):
                    bad.append(sup_below)
                    break
        hi = fam.hi
        if hi is None:
            if not H.with_top:
                bad.append(OMEGA1)
        elif hi.is_limit and hi > fam.lo:
            top = fam.sup()
            if not H.contains(top):
                bad.append(top)
    if bad:
        return False, min(bad)
    return True, None


# ---------------------------------------------------------------------------
# order isomorphisms


def _finite_blocks(H: ClosedSetExpr):
    """(offset, start, length) for each interval, with the total length."""
    off = ZERO
    out = []
    for lo, hi in H.intervals:
        length = OMEGA1 if hi is None else left_subtract(lo, hi)
        out.append((off, lo, length))
        off = add(off, length) if not length.top else OMEGA1
    return out, off


def order_iso_map(H: ClosedSetExpr) -> OrdinalMap:
    """Increasing enumeration of H, constant at max H past the order type.

    Without a maximum the finite-union map parks its tail at min H (a visible
    jump); the schematic map parks it at the missing sup so it stays
    monotone, and ``iso_defect`` reports that the tail leaves H.

    Built for any H (closed or not) so that its continuity can be compared
    with closedness of H.
    """
    if H.family is None:
        return _finite_iso(H)
    return _family_iso(H)


def _finite_iso(H: ClosedSetExpr) -> PiecewiseMap:
    blocks, total = _finite_blocks(H)
    if H.with_top and (not H.intervals or H.intervals[-1][1] is not None):
        blocks.append((total, OMEGA1, ONE))
        total = OMEGA1 if total.top else add(total, ONE)
    if not blocks:
        raise ValueError("the empty set has no enumeration")
    items = [(off, None if length.top or add(off, length).top else add(off, length), Shift(start))
             for off, start, length in blocks]
    if items[-1][1] is not None:
        _, start, length = blocks[-1]
        if length.is_successor:
            tail = add(start, length.predecessor())
        else:
            # no maximum: park the tail at min H, which makes the jump visible
            tail = blocks[0][1]
        items.append((items[-1][1], None, Const(tail)))
    return PiecewiseMap.from_pieces(items).canonical()


def _family_iso(H: ClosedSetExpr) -> MonotoneMap:
    fam = H.family
    blocks, off_f = _finite_blocks(H)
    if H.intervals and H.intervals[-1][1] is None:
        raise ValueError("intervals reaching W cannot precede a block family")
    first = fam.left(fam.lo)
    if H.intervals and not H.intervals[-1][1] <= first:
        raise ValueError("finite intervals must lie below the block family")
    t = fam.block_type
    span = mul(t, fam.count())
    off_sup = OMEGA1 if span.top else add(off_f, span)
    finite_map = _finite_iso(ClosedSetExpr(H.intervals)) if H.intervals else None
    sup_point = fam.sup() if fam.with_sup and fam.hi is not None else None
    tail = [] if sup_point is None else [sup_point]
    if H.with_top and (sup_point is None or not sup_point.top):
        tail.append(OMEGA1)
    max_point = tail[-1] if tail else None

    def fn(alpha: Ordinal) -> Ordinal:
        if alpha < off_f:
            return finite_map(alpha)
        if off_sup.top and alpha.top:
            return OMEGA1 if H.with_top else _raise_no_top()
        rel = left_subtract(off_f, alpha)
        if off_sup.top or alpha < off_sup:
            d, r = divide(rel, t)
            return add(fam.left(add(fam.lo, d)), r)
        k = left_subtract(off_sup, alpha)
        if k.is_finite and k.to_int() < len(tail):
            return tail[k.to_int()]
        if max_point is not None:
            return max_point
        if fam.hi.is_successor:
            return fam.block_end(fam.hi.predecessor())
        # no maximum: park the tail at the missing sup, outside H
        return fam.sup()

    def threshold(y: Ordinal) -> Optional[Ordinal]:
        if H.intervals and y < first:
            for off, start, length in blocks:
                end = add(start, length)
                if y < end:
                    return off if y <= start else add(off, left_subtract(start, y))
        s = fam.index_for(y) if not y.top else None
        if s is not None and not s.top:
            base = add(off_f, mul(t, left_subtract(fam.lo, s)))
            start = fam.left(s)
            return base if y <= start else add(base, left_subtract(start, y))
        for k, p in enumerate(tail):
            if y <= p:
                return OMEGA1 if off_sup.top else add(off_sup, _nat(k))
        if not tail and fam.hi is not None and fam.hi.is_limit and y <= fam.sup():
            return off_sup
        return None

    return MonotoneMap(fn, threshold, name="psi_H")


def _nat(k: int) -> Ordinal:
    from ..ordinal import nat
    return nat(k)


def _raise_no_top():
    raise OrdinalError("enumeration of a set without W is undefined at W")


def order_iso(H: ClosedSetExpr) -> OrdinalMap:
    """psi_H for closed H; raises NotClosedError with the missing limit point."""
    ok, witness = is_closed(H)
    if not ok:
        raise NotClosedError(witness)
    return order_iso_map(H)


def iso_defect(H: ClosedSetExpr, phi: OrdinalMap) -> Optional[Ordinal]:
    """Where the enumeration fails to be a continuous map into H, or None."""
    w = map_discontinuity(phi)
    if w is not None:
        return w
    if isinstance(phi, MonotoneMap):
        try:
            top = phi(OMEGA1)
        except OrdinalError:
            return OMEGA1  # unbounded below W without W itself
        if not H.contains(top):
            return phi.threshold(top) or OMEGA1
    return None


def map_discontinuity(phi: OrdinalMap, limits: Sequence[Ordinal] = ()) -> Optional[Ordinal]:
    """Continuity witness for either kind of map."""
    if isinstance(phi, PiecewiseMap):
        return phi.discontinuity()
    if isinstance(phi, MonotoneMap):
        return phi.continuity_witness(limits or [p for p in sample_points(4) if p.is_limit])
    raise TypeError("continuity of general maps is not decidable here")
