"""Self-maps of [0, W].

Two flavours share the ``OrdinalMap`` interface:

* ``PiecewiseMap``: finitely many pieces, each constant or a translate
  ``x -> c + (x - s)`` based at the piece start s.  Everything about these
  is decidable exactly.
* ``MonotoneMap``: a non-decreasing map given by a value function and its
  threshold function ``t -> least x with phi(x) >= t``.  Maps with
  uncountably many pieces (block maps built from transfinite sequences)
  live here and are handled through preimages.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from ..ordinal import (ONE, ZERO, Ordinal, add, format_ordinal,
                       fundamental_sequence, left_subtract, parse_ordinal)
from .steps import End, _parse_piece_head, _split_top, end_lt, end_min, format_end

__all__ = [
    "OrdinalMap",
    "Const",
    "Shift",
    "PiecewiseMap",
    "MonotoneMap",
    "ComposedMap",
    "identity_map",
    "constant_map",
    "merge_intervals",
    "is_monotone",
]

Interval = tuple[Ordinal, End]


def merge_intervals(items: Iterable[Interval]) -> list[Interval]:
    out: list[Interval] = []
    for lo, hi in sorted((i for i in items if end_lt(i[0], i[1])), key=lambda i: i[0]):
        if out and (out[-1][1] is None or lo <= out[-1][1]):
            prev_lo, prev_hi = out[-1]
            out[-1] = (prev_lo, None if hi is None or prev_hi is None else max(prev_hi, hi))
        else:
            out.append((lo, hi))
    return out


class OrdinalMap:
    """Interface: evaluation and preimages of intervals."""

    finite = False

    def __call__(self, alpha: Ordinal) -> Ordinal:
        raise NotImplementedError

    def preimage(self, lo: Ordinal, end: End) -> list[Interval]:
        """Sorted disjoint intervals whose union is phi^-1([lo, end))."""
        raise NotImplementedError

    def preimage_point(self, beta: Ordinal) -> list[Interval]:
        return self.preimage(beta, None if beta.top else add(beta, ONE))

    def then(self, outer: "OrdinalMap") -> "OrdinalMap":
        """outer o self."""
        if _is_identity(outer):
            return self
        if _is_identity(self):
            return outer
        if isinstance(outer, PiecewiseMap) and isinstance(self, PiecewiseMap):
            return outer.compose(self)
        if is_monotone(outer) and is_monotone(self):
            return MonotoneMap(lambda a: outer(self(a)),
                               lambda t: _chain_threshold(outer, self, t),
                               name=f"{_name(outer)} o {_name(self)}")
        return ComposedMap(outer, self)

    def threshold(self, t: Ordinal) -> Optional[Ordinal]:
        """Least x with phi(x) >= t for a monotone map, None if there is none."""
        ivs = self.preimage(t, None)
        return ivs[0][0] if ivs else None

    def to_text(self) -> str:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# finite piecewise maps


@dataclass(frozen=True)
class Const:
    value: Ordinal

    def at(self, start: Ordinal, alpha: Ordinal) -> Ordinal:
        return self.value


@dataclass(frozen=True)
class Shift:
    """x -> value + (x - start); ``value`` is the image of the piece start."""

    value: Ordinal

    def at(self, start: Ordinal, alpha: Ordinal) -> Ordinal:
        return add(self.value, left_subtract(start, alpha))


Piece = "Const | Shift"


def _shift_preimage(s: Ordinal, e: End, c: Ordinal, a: Ordinal, b: End) -> Optional[Interval]:
    """{x in [s, e) : a <= c + (x - s) < b}."""
    lo = s if a <= c else add(s, left_subtract(c, a))
    if b is None:
        hi = e
    elif b <= c:
        return None
    else:
        hi = end_min(e, add(s, left_subtract(c, b)))
    if not end_lt(lo, hi):
        return None
    return lo, hi


class PiecewiseMap(OrdinalMap):
    """Finitely many Const / Shift pieces tiling [0, W]."""

    finite = True
    __slots__ = ("starts", "pieces")

    def __init__(self, starts: Sequence[Ordinal], pieces: Sequence):
        if not starts or starts[0] != ZERO or len(starts) != len(pieces):
            raise ValueError("a piecewise map needs starts beginning at 0 and one piece per start")
        for a, b in zip(starts, starts[1:]):
            if not a < b:
                raise ValueError("piece starts must strictly increase")
        self.starts = tuple(starts)
        self.pieces = tuple(pieces)

    @classmethod
    def from_pieces(cls, items: Iterable[tuple[Ordinal, End, object]]) -> "PiecewiseMap":
        items = sorted((p for p in items if end_lt(p[0], p[1])), key=lambda p: p[0])
        expect: End = ZERO
        for s, e, _ in items:
            if expect is None or s != expect:
                raise ValueError(f"map pieces do not tile [0, W] near {s}")
            expect = e
        if expect is not None:
            raise ValueError("map pieces stop before W")
        return cls([p[0] for p in items], [p[2] for p in items])

    def spans(self):
        n = len(self.starts)
        for i in range(n):
            yield self.starts[i], (self.starts[i + 1] if i + 1 < n else None), self.pieces[i]

    def index_of(self, alpha: Ordinal) -> int:
        return bisect.bisect_right(self.starts, alpha) - 1

    def __call__(self, alpha: Ordinal) -> Ordinal:
        i = self.index_of(alpha)
        return self.pieces[i].at(self.starts[i], alpha)

    def preimage(self, lo: Ordinal, end: End) -> list[Interval]:
        out = []
        for s, e, p in self.spans():
            if isinstance(p, Const):
                if lo <= p.value and end_lt(p.value, end):
                    out.append((s, e))
            else:
                iv = _shift_preimage(s, e, p.value, lo, end)
                if iv is not None:
                    out.append(iv)
        return merge_intervals(out)

    def compose(self, inner: "PiecewiseMap") -> "PiecewiseMap":
        """self o inner."""
        items = []
        for s, e, p in inner.spans():
            if isinstance(p, Const):
                items.append((s, e, Const(self(p.value))))
                continue
            for s2, e2, q in self.spans():
                iv = _shift_preimage(s, e, p.value, s2, e2)
                if iv is None:
                    continue
                lo, hi = iv
                v = q.at(s2, p.at(s, lo))
                items.append((lo, hi, Const(v) if isinstance(q, Const) else Shift(v)))
        return PiecewiseMap.from_pieces(items).canonical()

    def canonical(self) -> "PiecewiseMap":
        items = []
        for s, e, p in self.spans():
            if isinstance(p, Shift) and e is not None and e == add(s, ONE):
                p = Const(p.value)
            if items:
                ps, pe, pp = items[-1]
                if isinstance(p, Const) and isinstance(pp, Const) and p.value == pp.value:
                    items[-1] = (ps, e, pp)
                    continue
                if isinstance(p, Shift) and isinstance(pp, Shift) and pp.at(ps, s) == p.value:
                    items[-1] = (ps, e, pp)
                    continue
            items.append((s, e, p))
        return PiecewiseMap.from_pieces(items)

    def __eq__(self, other):
        if not isinstance(other, PiecewiseMap):
            return NotImplemented
        return self.difference(other) is None

    def __hash__(self):
        c = self.canonical()
        return hash((c.starts, c.pieces))

    def difference(self, other: "PiecewiseMap") -> Optional[Ordinal]:
        """Least point where the maps differ, or None."""
        starts = sorted(set(self.starts) | set(other.starts))
        for i, s in enumerate(starts):
            e = starts[i + 1] if i + 1 < len(starts) else None
            if self(s) != other(s):
                return s
            if e is not None and e == add(s, ONE):
                continue
            kinds = (type(self.pieces[self.index_of(s)]), type(other.pieces[other.index_of(s)]))
            if kinds[0] is not kinds[1]:
                return add(s, ONE)
        return None

    def left_limit(self, i: int) -> Ordinal:
        """Limit of phi from the left at starts[i] (i >= 1)."""
        s0, p = self.starts[i - 1], self.pieces[i - 1]
        if isinstance(p, Const):
            return p.value
        return add(p.value, left_subtract(s0, self.starts[i]))

    def discontinuity(self) -> Optional[Ordinal]:
        for i in range(1, len(self.starts)):
            s = self.starts[i]
            if s.is_limit and self.left_limit(i) != self(s):
                return s
        return None

    def is_continuous(self) -> bool:
        return self.discontinuity() is None

    def is_monotone(self) -> bool:
        """Non-decreasing: each piece starts at or above the sup of the previous one."""
        for i in range(1, len(self.starts)):
            s0, s1, p = self.starts[i - 1], self.starts[i], self.pieces[i - 1]
            if isinstance(p, Const):
                top = p.value
            elif s1.is_successor:
                top = p.at(s0, s1.predecessor())
            else:
                top = self.left_limit(i)
            if self(s1) < top:
                return False
        return True

    def constants(self) -> list[Ordinal]:
        """Every ordinal occurring in the description (starts and values)."""
        out = list(self.starts)
        out.extend(p.value for p in self.pieces)
        return out

    def to_text(self) -> str:
        parts = []
        for s, e, p in self.spans():
            head = f"[{format_ordinal(s)}, {format_end(e)}"
            if isinstance(p, Const):
                parts.append(f"{head} -> const {format_ordinal(p.value)}")
            else:
                parts.append(f"{head} -> {format_ordinal(p.value)} + @ - {format_ordinal(s)}")
        return " | ".join(parts)

    def __repr__(self):
        return f"PiecewiseMap({self.to_text()!r})"

    @classmethod
    def from_text(cls, text: str) -> "PiecewiseMap":
        items = []
        for chunk in _split_top(text.replace("\n", "|"), "|"):
            lo, end, rhs = _parse_piece_head(chunk)
            items.append((lo, end, _parse_map_rhs(rhs, lo)))
        return cls.from_pieces(items)


def _parse_map_rhs(rhs: str, start: Ordinal):
    rhs = rhs.strip()
    if rhs.startswith("const"):
        return Const(parse_ordinal(rhs[5:]))
    if "@" not in rhs:
        raise ValueError(f"map piece must be 'const c' or 'c + @ - a': {rhs!r}")
    left, right = rhs.split("@", 1)
    left, right = left.strip(), right.strip()
    if left:
        if not left.endswith("+"):
            raise ValueError(f"expected 'c + @': {rhs!r}")
        target = parse_ordinal(left[:-1])
    else:
        target = ZERO
    if right:
        if not right.startswith("-"):
            raise ValueError(f"expected '@ - a': {rhs!r}")
        base = parse_ordinal(right[1:])
    else:
        base = ZERO
    if start < base:
        raise ValueError(f"translate base {base} lies above its piece start {start}")
    # rebase at the piece start: c + (x - a) = (c + (s - a)) + (x - s)
    return Shift(add(target, left_subtract(base, start)))


def _is_identity(m: OrdinalMap) -> bool:
    return (isinstance(m, PiecewiseMap) and len(m.pieces) == 1
            and isinstance(m.pieces[0], Shift) and m.pieces[0].value.is_zero)


def is_monotone(m: OrdinalMap) -> bool:
    if isinstance(m, MonotoneMap):
        return True
    if isinstance(m, PiecewiseMap):
        return m.is_monotone()
    return False


def _name(m: OrdinalMap) -> str:
    return m.name if isinstance(m, MonotoneMap) else m.to_text()


def _chain_threshold(outer: OrdinalMap, inner: OrdinalMap, t: Ordinal) -> Optional[Ordinal]:
    u = outer.threshold(t)
    return None if u is None else inner.threshold(u)


def identity_map() -> PiecewiseMap:
    return PiecewiseMap((ZERO,), (Shift(ZERO),))


def constant_map(c: Ordinal) -> PiecewiseMap:
    return PiecewiseMap((ZERO,), (Const(c),))


# ---------------------------------------------------------------------------
# lazy monotone maps


class MonotoneMap(OrdinalMap):
    """A non-decreasing map known through its values and thresholds.

    ``threshold(t)`` is the least x with phi(x) >= t, or None if phi stays
    below t.  Then phi^-1([a, b)) = [threshold(a), threshold(b)).
    """

    def __init__(self, fn: Callable[[Ordinal], Ordinal],
                 threshold: Callable[[Ordinal], Optional[Ordinal]], name: str = "phi",
                 continuous: bool = True):
        self.fn = fn
        self.threshold_fn = threshold
        self.name = name
        self.continuous = continuous

    def __call__(self, alpha: Ordinal) -> Ordinal:
        return self.fn(alpha)

    def threshold(self, t: Ordinal) -> Optional[Ordinal]:
        return ZERO if t.is_zero else self.threshold_fn(t)

    def preimage(self, lo: Ordinal, end: End) -> list[Interval]:
        a = self.threshold(lo)
        if a is None:
            return []
        b = None if end is None else self.threshold(end)
        if not end_lt(a, b):
            return []
        return [(a, b)]

    def continuity_witness(self, limits: Iterable[Ordinal], depth: int = 8) -> Optional[Ordinal]:
        """First sampled limit where phi is not continuous.

        A monotone phi is continuous at a limit lam iff no point below lam
        reaches phi(lam) unless phi(lam) is attained earlier, and every
        t < phi(lam) is reached below lam.  Ordinals below phi(lam) are
        probed along its fundamental sequence.
        """
        for lam in limits:
            if lam.is_zero:
                continue
            v = self(lam)
            if self.threshold(v) < lam:
                continue  # constant on a neighbourhood to the left
            if not v.is_limit or v.is_zero:
                return lam
            if v.top:
                # countably many countable values cannot reach W; lam = W is
                # taken on trust since it has no fundamental sequence
                if lam.top:
                    continue
                return lam
            for n in range(1, depth + 1):
                t = fundamental_sequence(v, n)
                th = self.threshold(t)
                if th is None or not th < lam:
                    return lam
        return None

    def to_text(self) -> str:
        return f"<{self.name}>"

    def __repr__(self):
        return f"MonotoneMap({self.name})"


class ComposedMap(OrdinalMap):
    """outer o inner for maps that are not both finite."""

    def __init__(self, outer: OrdinalMap, inner: OrdinalMap):
        self.outer = outer
        self.inner = inner

    def __call__(self, alpha: Ordinal) -> Ordinal:
        return self.outer(self.inner(alpha))

    def preimage(self, lo: Ordinal, end: End) -> list[Interval]:
        out = []
        for a, b in self.outer.preimage(lo, end):
            out.extend(self.inner.preimage(a, b))
        return merge_intervals(out)

    @property
    def monotone(self) -> bool:
        return all(isinstance(m, MonotoneMap) or getattr(m, "monotone", False)
                   for m in (self.outer, self.inner))

    def to_text(self) -> str:
        return f"{self.outer.to_text()} o {self.inner.to_text()}"

    def __repr__(self):
        return f"ComposedMap({self.to_text()})"
