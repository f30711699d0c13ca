"""Ordinals below epsilon_0 in Cantor normal form, plus a top element.

The top element ``OMEGA1`` stands for the first uncountable ordinal.  It is
a separate constructor: no CNF value equals it and nothing above it can be
produced.  Values are immutable and hashable; comparison uses a nested-tuple
key so ``sorted`` and ``max`` work directly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional

__all__ = [
    "Ordinal",
    "OrdinalError",
    "OrdinalSyntaxError",
    "ZERO",
    "ONE",
    "OMEGA",
    "OMEGA1",
    "nat",
    "omega_pow",
    "add",
    "left_subtract",
    "mul",
    "power",
    "arithmetic",
    "compare",
    "classify",
    "OrdinalKind",
    "OrdinalClass",
    "fundamental_sequence",
    "parse_ordinal",
    "format_ordinal",
    "ord_sup",
]


class OrdinalError(ArithmeticError):
    """Raised for arithmetic that leaves the representable range."""


class OrdinalSyntaxError(ValueError):
    def __init__(self, message: str, text: str = "", position: int = 0):
        self.message = message
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position}" + (f" in {text!r}" if text else ""))


class Ordinal:
    __slots__ = ("terms", "top", "_key", "_hash")

    def __init__(self, terms: Iterable[tuple["Ordinal", int]] = (), top: bool = False):
        terms = tuple(terms)
        if top and terms:
            raise ValueError("the top element carries no terms")
        prev = None
        for e, c in terms:
            if not isinstance(e, Ordinal) or e.top:
                raise ValueError("exponents must be CNF ordinals")
            if not isinstance(c, int) or c < 1:
                raise ValueError("coefficients must be positive integers")
            if prev is not None and not e < prev:
                raise ValueError("exponents must be strictly decreasing")
            prev = e
        self.terms = terms
        self.top = top
        self._key = None if top else tuple((e._key, c) for e, c in terms)
        self._hash = hash(("top",)) if top else hash(self._key)

    # -- order -----------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, Ordinal):
            if isinstance(other, int) and not isinstance(other, bool):
                return not self.top and self._key == nat(other)._key
            return NotImplemented
        if self.top or other.top:
            return self.top == other.top
        return self._key == other._key

    def __hash__(self):
        return self._hash

    def __lt__(self, other: "Ordinal") -> bool:
        other = _coerce(other)
        if self.top:
            return False
        if other.top:
            return True
        return self._key < other._key

    def __le__(self, other):
        other = _coerce(other)
        return self == other or self < other

    def __gt__(self, other):
        return _coerce(other) < self

    def __ge__(self, other):
        return _coerce(other) <= self

    # -- structure -------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.top and not self.terms

    @property
    def is_finite(self) -> bool:
        return not self.top and (not self.terms or self.terms[0][0].is_zero)

    @property
    def is_successor(self) -> bool:
        return not self.top and bool(self.terms) and self.terms[-1][0].is_zero

    @property
    def is_limit(self) -> bool:
        """True for 0, for limit ordinals, and for the top element."""
        return not self.is_successor

    @property
    def finite_part(self) -> int:
        if self.is_successor:
            return self.terms[-1][1]
        return 0

    @property
    def leading_exponent(self) -> "Ordinal":
        if self.top:
            raise OrdinalError("the top element has no CNF exponent")
        return self.terms[0][0] if self.terms else ZERO

    def predecessor(self) -> "Ordinal":
        if not self.is_successor:
            raise OrdinalError(f"{self} is not a successor")
        e, c = self.terms[-1]
        if c == 1:
            return Ordinal(self.terms[:-1])
        return Ordinal(self.terms[:-1] + ((e, c - 1),))

    def to_int(self) -> int:
        if not self.is_finite:
            raise OrdinalError(f"{self} is infinite")
        return self.terms[0][1] if self.terms else 0

    def succ(self) -> "Ordinal":
        return add(self, ONE)

    # operator sugar for ordinal arithmetic
    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __repr__(self):
        return f"Ordinal({format_ordinal(self)!r})"

    def __str__(self):
        return format_ordinal(self)


def _coerce(x) -> Ordinal:
    if isinstance(x, Ordinal):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return nat(x)
    raise TypeError(f"cannot use {type(x).__name__} as an ordinal")


_NAT_CACHE: dict[int, Ordinal] = {}


def nat(n: int) -> Ordinal:
    if n < 0:
        raise OrdinalError("negative natural number")
    o = _NAT_CACHE.get(n)
    if o is None:
        o = Ordinal(() if n == 0 else ((ZERO, n),))
        if n < 256:
            _NAT_CACHE[n] = o
    return o


ZERO = Ordinal()
ONE = Ordinal(((ZERO, 1),))
OMEGA = Ordinal(((ONE, 1),))
OMEGA1 = Ordinal(top=True)


def omega_pow(e: Ordinal, c: int = 1) -> Ordinal:
    """omega^e * c; omega^OMEGA1 is OMEGA1."""
    if e.top:
        return OMEGA1
    return Ordinal(((e, c),))


def add(a: Ordinal, b: Ordinal) -> Ordinal:
    if b.top:
        return OMEGA1
    if a.top:
        if b.is_zero:
            return OMEGA1
        raise OrdinalError("OMEGA1 + x with x > 0 is not representable")
    if b.is_zero:
        return a
    if a.is_zero:
        return b
    e, c = b.terms[0]
    kept = []
    for ea, ca in a.terms:
        if ea > e:
            kept.append((ea, ca))
        elif ea == e:
            return Ordinal(tuple(kept) + ((e, ca + c),) + b.terms[1:])
        else:
            break
    return Ordinal(tuple(kept) + b.terms)


def left_subtract(a: Ordinal, b: Ordinal) -> Ordinal:
    """The unique d with a + d == b (requires a <= b)."""
    if b < a:
        raise OrdinalError(f"left_subtract needs a <= b, got {a} > {b}")
    if b.top:
        return ZERO if a.top else OMEGA1
    ta, tb = a.terms, b.terms
    i = 0
    while i < len(ta) and ta[i] == tb[i]:
        i += 1
    if i == len(ta):
        return Ordinal(tb[i:])
    ea, ca = ta[i]
    eb, cb = tb[i]
    if eb > ea:
        return Ordinal(tb[i:])
    # same exponent, larger coefficient in b
    return Ordinal(((eb, cb - ca),) + tb[i + 1:])


def mul(a: Ordinal, b: Ordinal) -> Ordinal:
    if a.is_zero or b.is_zero:
        return ZERO
    if a.top:
        if b == ONE:
            return OMEGA1
        raise OrdinalError("OMEGA1 * x with x > 1 is not representable")
    if b.top:
        return OMEGA1
    e1, c1 = a.terms[0]
    out = []
    for f, d in b.terms:
        if f.is_zero:
            out.append((e1, c1 * d))
            out.extend(a.terms[1:])
        else:
            out.append((add(e1, f), d))
    return Ordinal(out)


def power(base: Ordinal, exponent: Ordinal) -> Ordinal:
    if base != OMEGA:
        raise OrdinalError("only powers of omega are supported")
    return omega_pow(exponent)


def arithmetic(kind: str, a: Ordinal, b: Ordinal) -> Ordinal:
    ops = {"add": add, "left_subtract": left_subtract, "mul": mul, "pow": power}
    try:
        fn = ops[kind]
    except KeyError:
        raise ValueError(f"unknown arithmetic kind {kind!r}") from None
    return fn(a, b)


def compare(a: Ordinal, b: Ordinal) -> str:
    if a == b:
        return "equal"
    return "less" if a < b else "greater"


def ord_sup(values: Iterable[Ordinal], default: Ordinal = ZERO) -> Ordinal:
    """max of a finite collection; the empty sup is ``default``."""
    best = default
    for v in values:
        if v > best:
            best = v
    return best


class OrdinalKind(enum.Enum):
    ZERO = "zero"
    SUCCESSOR = "successor"
    LIMIT = "limit"


@dataclass(frozen=True)
class OrdinalClass:
    kind: OrdinalKind
    predecessor: Optional[Ordinal] = None

    @property
    def is_limit(self) -> bool:
        # 0 counts as a limit ordinal
        return self.kind is not OrdinalKind.SUCCESSOR

    @property
    def zero(self) -> bool:
        return self.kind is OrdinalKind.ZERO


def classify(a: Ordinal) -> OrdinalClass:
    if a.is_zero:
        return OrdinalClass(OrdinalKind.ZERO)
    if a.is_successor:
        return OrdinalClass(OrdinalKind.SUCCESSOR, a.predecessor())
    return OrdinalClass(OrdinalKind.LIMIT)


def fundamental_sequence(lam: Ordinal, n: int) -> Ordinal:
    """Standard fundamental sequence: (b + w^(d+1))[n] = b + w^d*n and
    (b + w^e)[n] = b + w^(e[n]) for limit e."""
    if lam.top or lam.is_zero or lam.is_successor:
        raise OrdinalError(f"fundamental_sequence needs a nonzero countable limit, got {lam}")
    if n < 0:
        raise ValueError("n must be a natural number")
    *head, (e, c) = lam.terms
    prefix = Ordinal(tuple(head) + (((e, c - 1),) if c > 1 else ()))
    if e.is_successor:
        return add(prefix, mul(omega_pow(e.predecessor()), nat(n)))
    return add(prefix, omega_pow(fundamental_sequence(e, n)))


# -- notation ------------------------------------------------------------

def format_ordinal(a: Ordinal) -> str:
    if a.top:
        return "W"
    if a.is_zero:
        return "0"
    parts = []
    for e, c in a.terms:
        if e.is_zero:
            parts.append(str(c))
            continue
        s = "w" if e == ONE else f"w^({format_ordinal(e)})"
        parts.append(s if c == 1 else f"{s}*{c}")
    return " + ".join(parts)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str):
        raise OrdinalSyntaxError(msg, self.text, self.pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def nat(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected a natural number")
        return int(self.text[start:self.pos])

    def expr(self) -> Ordinal:
        start = self.pos
        terms = [self.term()]
        while self.peek() == "+":
            self.pos += 1
            terms.append(self.term())
        if len(terms) == 1:
            return terms[0][1]
        out: list[tuple[Ordinal, int]] = []
        for where, t in terms:
            if t.top or t.is_zero:
                self.pos = where
                self.error("non-canonical term in sum")
            (e, c), = t.terms
            if out and not e < out[-1][0]:
                self.pos = where
                self.error("non-canonical CNF: exponents must strictly decrease")
            out.append((e, c))
        del start
        return Ordinal(out)

    def term(self) -> tuple[int, Ordinal]:
        where = (self.skip(), self.pos)[1]
        base = self.factor()
        if self.peek() == "*":
            self.pos += 1
            k = self.nat()
            if base.top:
                self.pos = where
                self.error("W cannot be scaled")
            if k == 0:
                base = ZERO
            elif base.terms:
                (e, c), = base.terms
                base = Ordinal(((e, c * k),))
        return where, base

    def factor(self) -> Ordinal:
        ch = self.peek()
        if ch == "W":
            self.pos += 1
            return OMEGA1
        if ch == "w":
            self.pos += 1
            if self.peek() == "^":
                self.pos += 1
                if self.peek() == "(":
                    self.pos += 1
                    e = self.expr()
                    self.expect(")")
                else:
                    # w^3, w^w: a bare atom binds tightest
                    e = self.factor()
                if e.top:
                    return OMEGA1
                return omega_pow(e)
            return OMEGA
        if ch.isdigit():
            return nat(self.nat())
        self.error("expected 'w', 'W' or a natural number")


def parse_ordinal(text: str) -> Ordinal:
    p = _Parser(text)
    value = p.expr()
    if p.peek():
        p.error("unexpected trailing input")
    return value


def parse_ordinal_prefix(text: str, pos: int) -> tuple[Ordinal, int]:
    """Parse an ordinal starting at ``pos``; return it and the end position."""
    p = _Parser(text)
    p.pos = pos
    value = p.expr()
    p.skip()
    return value, p.pos
