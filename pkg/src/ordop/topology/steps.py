"""Step functions on [0, W] and the interval helpers they share.

A partition of [0, W] is stored as a strictly increasing tuple of piece
starts beginning at 0; piece i is ``[starts[i], starts[i+1])`` and the last
piece runs through W.  ``None`` plays the role of the end point just past W.
"""

from __future__ import annotations

import bisect
from fractions import Fraction
from typing import TYPE_CHECKING, Callable, Iterable, Iterator, Optional, Sequence

from ..ordinal import OMEGA1, ONE, ZERO, Ordinal, add, format_ordinal, parse_ordinal

if TYPE_CHECKING:
    from .maps import OrdinalMap

__all__ = [
    "End",
    "StepFunction",
    "end_lt",
    "end_min",
    "interval_sup",
    "format_end",
]

End = Optional[Ordinal]


def end_lt(x: Ordinal, end: End) -> bool:
    """x < end, where None is past W."""
    return end is None or x < end


def end_le(a: End, b: End) -> bool:
    if b is None:
        return True
    if a is None:
        return False
    return a <= b


def end_min(a: End, b: End) -> End:
    if a is None:
        return b
    if b is None:
        return a
    return a if a <= b else b


def interval_sup(start: Ordinal, end: End) -> Ordinal:
    """sup of the nonempty interval [start, end)."""
    if end is None:
        return OMEGA1
    if end.is_successor:
        return end.predecessor()
    return end


def closed_end(hi: Ordinal) -> End:
    """The exclusive end of [.., hi]."""
    return None if hi.top else add(hi, ONE)


def format_end(end: End) -> str:
    return "W]" if end is None else (
        f"{format_ordinal(end.predecessor())}]" if end.is_successor else f"{format_ordinal(end)})")


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


class StepFunction:
    """A scalar function on [0, W] constant on finitely many intervals."""

    __slots__ = ("starts", "values")

    def __init__(self, starts: Sequence[Ordinal], values: Sequence):
        if not starts or starts[0] != ZERO or len(starts) != len(values):
            raise ValueError("a step function needs starts beginning at 0 and one value per piece")
        ss: list[Ordinal] = []
        vs: list[Fraction] = []
        for s, v in zip(starts, values):
            v = _frac(v)
            if ss and not ss[-1] < s:
                raise ValueError("piece starts must strictly increase")
            if vs and vs[-1] == v:
                continue
            ss.append(s)
            vs.append(v)
        self.starts = tuple(ss)
        self.values = tuple(vs)

    # -- constructors ----------------------------------------------------
    @classmethod
    def constant(cls, v=1) -> "StepFunction":
        return cls((ZERO,), (v,))

    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple[Ordinal, End, object]]) -> "StepFunction":
        """Build from (start, end, value) triples that tile [0, W]."""
        items = sorted((p for p in pieces if end_lt(p[0], p[1])), key=lambda p: p[0])
        starts, values = [], []
        expect: End = ZERO
        for s, e, v in items:
            if expect is None or s != expect:
                raise ValueError(f"pieces do not tile [0, W] near {s}")
            starts.append(s)
            values.append(v)
            expect = e
        if expect is not None:
            raise ValueError("pieces stop before W")
        return cls(starts, values)

    @classmethod
    def on_interval(cls, lo: Ordinal, end: End, v=1) -> "StepFunction":
        """v on [lo, end), 0 elsewhere."""
        pieces = []
        if lo > ZERO:
            pieces.append((ZERO, lo, 0))
        pieces.append((lo, end, v))
        if end is not None:
            pieces.append((end, None, 0))
        return cls.from_pieces(pieces)

    @classmethod
    def indicator(cls, lo: Ordinal, hi: Ordinal, v=1) -> "StepFunction":
        """v * 1_[lo, hi]."""
        if hi < lo:
            return cls.constant(0)
        return cls.on_interval(lo, closed_end(hi), v)

    @classmethod
    def generator(cls, sigma: Ordinal) -> "StepFunction":
        """1_[0, sigma]."""
        return cls.indicator(ZERO, sigma)

    @classmethod
    def point(cls, alpha: Ordinal, v=1) -> "StepFunction":
        return cls.indicator(alpha, alpha, v)

    # -- access ------------------------------------------------------------
    def pieces(self) -> Iterator[tuple[Ordinal, End, Fraction]]:
        n = len(self.starts)
        for i in range(n):
            yield self.starts[i], (self.starts[i + 1] if i + 1 < n else None), self.values[i]

    def index_of(self, alpha: Ordinal) -> int:
        return bisect.bisect_right(self.starts, alpha) - 1

    def __call__(self, alpha: Ordinal) -> Fraction:
        return self.values[self.index_of(alpha)]

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return self.starts == other.starts and self.values == other.values

    def __hash__(self):
        return hash((self.starts, self.values))

    @property
    def is_zero(self) -> bool:
        return self.values == (0,)

    def norm(self) -> Fraction:
        return max(abs(v) for v in self.values)

    def support_sup(self) -> Ordinal:
        """sup of the support (0 for the zero function)."""
        best = ZERO
        for s, e, v in self.pieces():
            if v != 0:
                best = interval_sup(s, e)
        return best

    def support_min(self) -> Optional[Ordinal]:
        for s, e, v in self.pieces():
            if v != 0:
                return s
        return None

    def left_limit_at_top(self) -> Fraction:
        """lim_{a -> W} f(a); the value of the last piece not reduced to {W}."""
        if len(self.starts) > 1 and self.starts[-1].top:
            return self.values[-2]
        return self.values[-1]

    # -- algebra ---------------------------------------------------------
    def combine(self, other: "StepFunction", fn: Callable[[Fraction, Fraction], object]) -> "StepFunction":
        starts = sorted(set(self.starts) | set(other.starts))
        return StepFunction(starts, [fn(self(s), other(s)) for s in starts])

    def __add__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return self.combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return self.combine(other, lambda a, b: a - b)

    def __neg__(self):
        return StepFunction(self.starts, [-v for v in self.values])

    def __mul__(self, other):
        if isinstance(other, StepFunction):
            return self.combine(other, lambda a, b: a * b)
        c = _frac(other)
        if c == 0:
            return StepFunction.constant(0)
        return StepFunction(self.starts, [c * v for v in self.values])

    __rmul__ = __mul__

    def replace_at_top(self, v) -> "StepFunction":
        """The same function with its value at W replaced by v."""
        pieces = [(s, e, val) for s, e, val in self.pieces()]
        s, e, val = pieces[-1]
        if s.top:
            pieces[-1] = (s, e, v)
        else:
            pieces[-1] = (s, OMEGA1, val)
            pieces.append((OMEGA1, None, v))
        return StepFunction.from_pieces(pieces)

    def compose(self, phi: "OrdinalMap") -> "StepFunction":
        """f o phi."""
        out = []
        for s, e, v in self.pieces():
            for lo, hi in phi.preimage(s, e):
                out.append((lo, hi, v))
        return StepFunction.from_pieces(out)

    # -- topology --------------------------------------------------------
    def discontinuity(self, include_top: bool = True) -> Optional[Ordinal]:
        """Least limit point where the left limit differs from the value.

        Discontinuities only occur where a piece starts at a limit ordinal.
        """
        for i in range(1, len(self.starts)):
            s = self.starts[i]
            if s.is_limit and (include_top or not s.top):
                return s
        return None

    def is_continuous(self) -> bool:
        return self.discontinuity() is None

    # -- text form -----------------------------------------------------------
    def to_text(self) -> str:
        return " | ".join(f"[{format_ordinal(s)}, {format_end(e)} -> {_fmt_scalar(v)}"
                         for s, e, v in self.pieces())

    def __repr__(self):
        return f"StepFunction({self.to_text()!r})"

    @classmethod
    def from_text(cls, text: str) -> "StepFunction":
        pieces = []
        for chunk in _split_top(text.replace("\n", "|"), "|"):
            lo, end, rhs = _parse_piece_head(chunk)
            pieces.append((lo, end, Fraction(rhs.strip())))
        return cls.from_pieces(pieces)


def _fmt_scalar(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        parts.append("".join(cur))
    return [p for p in parts if p.strip()]


def _parse_piece_head(chunk: str) -> tuple[Ordinal, End, str]:
    """'[lo, hi] -> rhs' or '[lo, hi) -> rhs'."""
    chunk = chunk.strip()
    if not chunk.startswith("["):
        raise ValueError(f"piece must start with '[': {chunk!r}")
    arrow = chunk.index("->")
    head, rhs = chunk[:arrow].strip(), chunk[arrow + 2:]
    closing = head[-1]
    if closing not in "])":
        raise ValueError(f"piece interval must end with ']' or ')': {chunk!r}")
    lo_text, hi_text = head[1:-1].split(",")
    lo = parse_ordinal(lo_text)
    hi = parse_ordinal(hi_text)
    end = closed_end(hi) if closing == "]" else hi
    return lo, end, rhs
