"""Text form of operators.

    op     := term (("+" | "-") term)*
    term   := scalar "*"? prim | prim
    prim   := "I" | "V" | "0" | "P(" ord ")" | "Pt(" ord ")"
            | "comp(" step ";" map ")" | "tensor(" step ";" functional ")"
            | "(" op ")" ("." "(" op ")")*
    step   := pieces "[lo, hi] -> v" joined by "|", or a bare scalar
    map    := pieces "[lo, hi] -> const c" / "[lo, hi] -> c + @ - a" joined by "|",
              "id", or a named map "<phi_H>"
    functional := scalar "*"? "e(" ord ")" (("+" | "-") ...)*

Scalars are integers or fractions ``p/q``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..ordinal import OrdinalSyntaxError, format_ordinal, parse_ordinal_prefix
from ..topology.maps import PiecewiseMap, identity_map
from ..topology.steps import StepFunction, _fmt_scalar
from .core import Comp, Functional, Operator, Tensor, compose, identity, proj, proj_tilde, zero

__all__ = ["parse_operator", "operator_to_text", "parse_step", "parse_map", "parse_functional"]

_SCALAR = re.compile(r"\s*(-?\d+(?:/\d+)?)")


class _OpParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str):
        raise OrdinalSyntaxError(msg, self.text, self.pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, s: str) -> bool:
        self.skip()
        return self.text.startswith(s, self.pos)

    def expect(self, s: str):
        if not self.peek(s):
            self.error(f"expected {s!r}")
        self.pos += len(s)

    def op(self) -> Operator:
        sign = 1
        if self.peek("-"):
            self.pos += 1
            sign = -1
        out = self.term().scale(sign)
        while True:
            if self.peek("+"):
                self.pos += 1
                out = out + self.term()
            elif self.peek("-"):
                self.pos += 1
                out = out - self.term()
            else:
                return out

    def term(self) -> Operator:
        self.skip()
        m = _SCALAR.match(self.text, self.pos)
        if m and not self._zero_prim(m):
            self.pos = m.end()
            c = Fraction(m.group(1))
            if self.peek("*"):
                self.pos += 1
            return self.prim().scale(c)
        return self.prim()

    def _zero_prim(self, m) -> bool:
        # a bare "0" is the zero operator rather than a scalar prefix
        rest = self.text[m.end():].lstrip()
        return m.group(1) == "0" and (not rest or rest[0] in "+-)")

    def prim(self) -> Operator:
        self.skip()
        if self.peek("Pt("):
            self.pos += 3
            return proj_tilde(self.ordinal_then(")"))
        if self.peek("P("):
            self.pos += 2
            return proj(self.ordinal_then(")"))
        if self.peek("comp("):
            self.pos += 5
            step, mp = self.split_args()
            return Operator([Comp(parse_step(step), parse_map(mp))])
        if self.peek("tensor("):
            self.pos += 7
            step, fn = self.split_args()
            return Operator([Tensor(parse_step(step), parse_functional(fn))])
        if self.peek("V"):
            self.pos += 1
            from ..ideals import build_V
            return build_V()
        if self.peek("I"):
            self.pos += 1
            return identity()
        if self.peek("0"):
            self.pos += 1
            return zero()
        if self.peek("("):
            self.pos += 1
            out = self.op()
            self.expect(")")
            while self.peek("."):
                self.pos += 1
                self.expect("(")
                rhs = self.op()
                self.expect(")")
                out = compose(out, rhs)
            return out
        self.error("expected an operator")

    def ordinal_then(self, close: str):
        try:
            value, end = parse_ordinal_prefix(self.text, self.pos)
        except OrdinalSyntaxError as exc:
            raise OrdinalSyntaxError(exc.message, self.text, exc.position) from None
        self.pos = end
        self.expect(close)
        return value

    def split_args(self) -> tuple[str, str]:
        """Text up to the matching ')' split at the top-level ';'."""
        depth, start, semi = 0, self.pos, None
        i = self.pos
        while i < len(self.text):
            ch = self.text[i]
            if ch in "([":
                depth += 1
            elif ch in ")]":
                if depth == 0 and ch == ")":
                    break
                depth -= 1
            elif ch == ";" and depth == 0 and semi is None:
                semi = i
            i += 1
        else:
            self.pos = len(self.text)
            self.error("unterminated argument list")
        if semi is None:
            self.pos = i
            self.error("expected ';' between arguments")
        self.pos = i + 1
        return self.text[start:semi], self.text[semi + 1:i]


def parse_operator(text: str) -> Operator:
    p = _OpParser(text)
    out = p.op()
    p.skip()
    if p.pos != len(text):
        p.error("unexpected trailing input")
    return out


def parse_step(text: str) -> StepFunction:
    t = text.strip()
    if _SCALAR.fullmatch(t):
        return StepFunction.constant(Fraction(t))
    return StepFunction.from_text(t)


def _named_maps() -> dict:
    from ..ideals import phi_H
    return {"phi_H": phi_H()}


def parse_map(text: str):
    t = text.strip()
    if t == "id":
        return identity_map()
    if t.startswith("<") and t.endswith(">"):
        named = _named_maps()
        if t[1:-1] not in named:
            raise OrdinalSyntaxError(f"unknown map {t}", t, 0)
        return named[t[1:-1]]
    return PiecewiseMap.from_text(t)


def parse_functional(text: str) -> Functional:
    out = Functional()
    pat = re.compile(r"\s*([+-])?\s*(\d+(?:/\d+)?)?\s*\*?\s*e\(")
    pos = 0
    t = text.strip()
    while pos < len(t):
        m = pat.match(t, pos)
        if not m:
            raise OrdinalSyntaxError("bad functional", t, pos)
        c = Fraction(m.group(2) or 1) * (-1 if m.group(1) == "-" else 1)
        value, end = parse_ordinal_prefix(t, m.end())
        rest = t[end:].lstrip()
        if not rest.startswith(")"):
            raise OrdinalSyntaxError("expected ')' in functional", t, end)
        pos = len(t) - len(rest) + 1
        out = out + Functional.point(value, c)
        while pos < len(t) and t[pos].isspace():
            pos += 1
    return out


def _functional_text(mu: Functional) -> str:
    parts = []
    for p, c in mu.coeffs.items():
        parts.append(f"{_fmt_scalar(c)}*e({format_ordinal(p)})")
    return " + ".join(parts).replace("+ -", "- ")


def operator_to_text(T: Operator) -> str:
    """Inverse of parse_operator for finite operators."""
    parts = []
    for t in T.terms:
        if isinstance(t, Comp):
            if not isinstance(t.phi, PiecewiseMap):
                parts.append(f"comp({t.weight.to_text()}; {t.phi.to_text()})")
                continue
            mp = "id" if t.phi == identity_map() else t.phi.to_text()
            parts.append(f"comp({_step_text(t.weight)}; {mp})")
        else:
            parts.append(f"tensor({_step_text(t.g)}; {_functional_text(t.mu)})")
    return " + ".join(parts) if parts else "0"


def _step_text(f: StepFunction) -> str:
    if len(f.starts) == 1:
        return _fmt_scalar(f.values[0])
    return f.to_text()
