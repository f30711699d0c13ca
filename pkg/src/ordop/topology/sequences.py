"""Ordinal-valued functions of one ordinal variable, and their suprema.

A ``Seq`` maps sigma in [0, W] to an ordinal.  Expression nodes carry
structural flags: ``monotone`` (non-decreasing), ``strict`` (strictly
increasing) and ``continuous`` (sup at limits is attained).  Suprema at a
limit are exact for continuous sequences and are otherwise read off the
CNF shape of the values along the fundamental sequence.
"""

from __future__ import annotations

from typing import Callable, Iterable, Optional, Sequence

from ..ordinal import (OMEGA1, ONE, ZERO, Ordinal, OrdinalError, add, format_ordinal,
                       fundamental_sequence, mul, omega_pow)

__all__ = [
    "Seq",
    "SConst",
    "SVar",
    "SAdd",
    "SMul",
    "SPow",
    "SCases",
    "FunctionSeq",
    "SupError",
    "seq_eval",
    "seq_sup",
    "seq_inverse",
    "stabilized_sup",
    "sample_points",
    "DEFAULT_DEPTH",
]

DEFAULT_DEPTH = 8


class SupError(OrdinalError):
    """The supremum could not be determined symbolically."""


class Seq:
    monotone = False
    strict = False
    continuous = False
    constant = False

    def __call__(self, sigma: Ordinal) -> Ordinal:
        if sigma.top:
            return OMEGA1
        return self.at(sigma)

    def at(self, sigma: Ordinal) -> Ordinal:
        raise NotImplementedError

    def constants(self) -> list[Ordinal]:
        return []

    def __add__(self, other):
        return SAdd(self, _lift(other))

    def __radd__(self, other):
        return SAdd(_lift(other), self)

    def __mul__(self, other):
        return SMul(self, _lift(other))

    def __rmul__(self, other):
        return SMul(_lift(other), self)

    def __repr__(self):
        return f"Seq({self.to_text()})"

    def to_text(self) -> str:
        raise NotImplementedError


def _lift(x) -> Seq:
    if isinstance(x, Seq):
        return x
    if isinstance(x, int):
        from ..ordinal import nat
        x = nat(x)
    return SConst(x)


class SConst(Seq):
    monotone = True
    continuous = True
    constant = True

    def __init__(self, value: Ordinal):
        self.value = value

    def at(self, sigma):
        return self.value

    def constants(self):
        return [self.value]

    def to_text(self):
        return format_ordinal(self.value)


class SVar(Seq):
    monotone = strict = continuous = True

    def at(self, sigma):
        return sigma

    def to_text(self):
        return "s"


class SAdd(Seq):
    def __init__(self, left: Seq, right: Seq):
        self.left, self.right = left, right
        self.monotone = left.monotone and right.monotone
        self.constant = left.constant and right.constant
        # strict in the right argument; finite right constants keep a strict left strict
        finite_right = right.constant and right.value.is_finite
        self.strict = (left.monotone and right.strict) or (left.strict and finite_right)
        self.continuous = left.constant and right.continuous

    def at(self, sigma):
        return add(self.left.at(sigma), self.right.at(sigma))

    def constants(self):
        return self.left.constants() + self.right.constants()

    def to_text(self):
        return f"{self.left.to_text()} + {self.right.to_text()}"


class SMul(Seq):
    def __init__(self, left: Seq, right: Seq):
        self.left, self.right = left, right
        self.monotone = left.monotone and right.monotone
        self.constant = left.constant and right.constant
        pos_left = left.constant and not left.value.is_zero
        fin_right = right.constant and right.value.is_finite and not right.value.is_zero
        self.strict = (pos_left and right.strict) or (left.strict and fin_right)
        self.continuous = left.constant and right.continuous

    def at(self, sigma):
        return mul(self.left.at(sigma), self.right.at(sigma))

    def constants(self):
        return self.left.constants() + self.right.constants()

    def to_text(self):
        return f"({self.left.to_text()})*({self.right.to_text()})"


class SPow(Seq):
    """w^(e(sigma))."""

    def __init__(self, exponent: Seq):
        self.exponent = exponent
        self.monotone = exponent.monotone
        self.strict = exponent.strict
        self.continuous = exponent.continuous
        self.constant = exponent.constant

    def at(self, sigma):
        return omega_pow(self.exponent.at(sigma))

    def constants(self):
        return self.exponent.constants()

    def to_text(self):
        return f"w^({self.exponent.to_text()})"


class SCases(Seq):
    """branches[i] applies for sigma in [starts[i], starts[i+1])."""

    def __init__(self, starts: Sequence[Ordinal], branches: Sequence[Seq]):
        if not starts or starts[0] != ZERO or len(starts) != len(branches):
            raise ValueError("cases need thresholds starting at 0, one branch each")
        self.starts = tuple(starts)
        self.branches = tuple(branches)
        self.monotone = all(b.monotone for b in branches) and self._joins(lambda l, r: l <= r)
        self.strict = all(b.strict for b in branches) and self._joins(lambda l, r: l < r)
        self.continuous = all(b.continuous for b in branches) and self._limit_joins()
        self.constant = False

    def _branch(self, sigma):
        import bisect
        return self.branches[bisect.bisect_right(self.starts, sigma) - 1]

    def at(self, sigma):
        return self._branch(sigma).at(sigma)

    def _joins(self, ok) -> bool:
        for t, left, right in zip(self.starts[1:], self.branches, self.branches[1:]):
            below = t.predecessor() if t.is_successor else None
            r = right.at(t)
            if below is not None:
                if not ok(left.at(below), r):
                    return False
            else:
                try:
                    lim = seq_sup(left, t)
                except SupError:
                    return False
                # values below a limit stay under their sup, so lim <= r suffices
                if not lim <= r:
                    return False
        return True

    def _limit_joins(self) -> bool:
        for t, left, right in zip(self.starts[1:], self.branches, self.branches[1:]):
            if t.is_limit:
                try:
                    if seq_sup(left, t) != right.at(t):
                        return False
                except SupError:
                    return False
        return True

    def constants(self):
        out = list(self.starts)
        for b in self.branches:
            out.extend(b.constants())
        return out

    def to_text(self):
        parts = [f"[{format_ordinal(s)}..] {b.to_text()}" for s, b in zip(self.starts, self.branches)]
        return "cases(" + "; ".join(parts) + ")"


class FunctionSeq(Seq):
    """A sequence given by a callable, e.g. a memoized recursion."""

    def __init__(self, fn: Callable[[Ordinal], Ordinal], name: str = "f", *,
                 monotone: bool = True, strict: bool = False, continuous: bool = False,
                 sup: Optional[Callable[[Ordinal], Ordinal]] = None,
                 bound_hint: Optional[Callable[[Ordinal], Optional[Ordinal]]] = None):
        self.fn = fn
        # bound_hint(x): some sigma with fn(sigma) >= x, cheap to evaluate, or None
        self.bound_hint = bound_hint
        self.name = name
        self.monotone = monotone
        self.strict = strict
        self.continuous = continuous
        self.sup_fn = sup

    def at(self, sigma):
        return self.fn(sigma)

    def to_text(self):
        return self.name


def seq_eval(s: Seq, sigma: Ordinal) -> Ordinal:
    return s(sigma)


def seq_sup(s: Seq, lam: Ordinal, depth: int = DEFAULT_DEPTH) -> Ordinal:
    """sup { s(sigma) : sigma < lam } for a limit lam."""
    if lam.is_zero:
        return ZERO
    if not lam.is_limit:
        raise OrdinalError(f"seq_sup needs a limit ordinal, got {format_ordinal(lam)}")
    if not s.monotone:
        raise SupError("seq_sup needs a non-decreasing sequence")
    if lam.top:
        if s.strict:
            return OMEGA1
        raise SupError("sup below W needs a strictly increasing sequence")
    if isinstance(s, FunctionSeq) and s.sup_fn is not None:
        return s.sup_fn(lam)
    if s.continuous:
        return s.at(lam)
    probes = [s.at(fundamental_sequence(lam, n)) for n in range(1, depth + 1)]
    result = stabilized_sup(probes[len(probes) // 2:])
    at_lam = s.at(lam)
    if at_lam < result:
        raise SupError(f"inconsistent sup {format_ordinal(result)} above value at the limit")
    return result


def seq_inverse(s: Seq, x: Ordinal, lo: Ordinal = ZERO, hi: Optional[Ordinal] = None,
                depth: int = DEFAULT_DEPTH) -> Optional[Ordinal]:
    """Least sigma in [lo, hi) with s(sigma) >= x, or None.

    ``hi=None`` means the whole of [lo, W].  Needs s strictly increasing, so
    that s(sigma) >= sigma provides a search bound and limits are decided
    by comparing the sup below them with x.
    """
    from .search import least_true
    if not s.strict:
        raise SupError("seq_inverse needs a strictly increasing sequence")
    bound = OMEGA1 if hi is None else hi

    def pred(sigma):
        return sigma >= bound or sigma.top or s(sigma) >= x

    def tight(lam):
        return seq_sup(s, lam, depth) <= x

    # s(x) >= x for strictly increasing s, so x bounds the answer
    hint = x if not x.top and x < bound else None
    top = bound
    if hi is None and isinstance(s, FunctionSeq) and s.bound_hint is not None and not x.top:
        b = s.bound_hint(x)
        if b is not None:
            top = b
    found = least_true(pred, top, hint=hint, tight=tight, trust_hint=True)
    if found is None:
        return None
    if found < lo:
        found = lo
        if not pred(found):
            return None
    if hi is not None and found >= hi:
        return None
    if found.top and not s(found) >= x:
        return None
    return found


def stabilized_sup(values: Sequence[Ordinal]) -> Ordinal:
    """Limit of a non-decreasing run of probe values, read off their CNF shape."""
    if len(values) < 2:
        raise SupError("too few probes")
    for a, b in zip(values, values[1:]):
        if b < a:
            raise SupError("probe values decrease")
    if all(v == values[0] for v in values):
        return values[-1]
    if any(v.top for v in values):
        raise SupError("probes reach W")
    terms = [v.terms for v in values]
    k = 0
    while all(len(t) > k for t in terms) and all(t[k] == terms[0][k] for t in terms):
        k += 1
    prefix = Ordinal(terms[0][:k])
    if any(len(t) == k for t in terms):
        # the early probes equal the prefix itself; the rest has moved past it
        return stabilized_sup([v for v, t in zip(values, terms) if len(t) > k])
    rests = [t[k] for t in terms]
    exps = [r[0] for r in rests]
    coefs = [r[1] for r in rests]
    if all(e == exps[0] for e in exps):
        if all(a < b for a, b in zip(coefs, coefs[1:])):
            return add(prefix, omega_pow(add(exps[0], ONE)))
        raise SupError("coefficients do not grow")
    if all(a < b for a, b in zip(exps, exps[1:])):
        return add(prefix, omega_pow(stabilized_sup(exps)))
    raise SupError("exponents do not grow")


def sample_points(bound_exp: int = 3, extra: Iterable[Ordinal] = ()) -> list[Ordinal]:
    """A spread of ordinals below w^bound_exp used to spot-check properties."""
    from ..ordinal import nat, parse_ordinal
    pts = {ZERO, ONE, nat(2), nat(5)}
    for e in range(1, bound_exp):
        for c in (1, 2, 3):
            base = omega_pow(nat(e), c)
            pts.update({base, add(base, ONE), add(base, nat(4)), add(base, omega_pow(nat(e - 1), 2))})
    pts.update({parse_ordinal("w^(w)"), parse_ordinal("w^(w) + 1"), parse_ordinal("w^(w)*2 + w")})
    pts.update(extra)
    return sorted(pts)
