"""Operators on C([0, W]) as finite sums of two kinds of primitive term.

``Comp(w, phi)`` acts by ``(Tf)(a) = w(a) * f(phi(a))`` and ``Tensor(g, mu)``
by ``(Tf)(a) = g(a) * mu(f)`` with ``mu`` a finitely supported functional.
Sums, scalings and products of such operators stay in this form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

from ..ordinal import OMEGA1, ONE, Ordinal, OrdinalError, add, format_ordinal
from ..topology.maps import OrdinalMap, PiecewiseMap, identity_map
from ..topology.steps import StepFunction, _fmt_scalar

__all__ = [
    "Functional",
    "Comp",
    "Tensor",
    "Operator",
    "identity",
    "zero",
    "proj",
    "proj_tilde",
    "comp",
    "tensor",
    "evaluation",
    "SCOPE",
]

Scalar = Union[int, Fraction]

# Results hold for this class only; certificates say so.
SCOPE = "finite sums and products of scaled I, P, Pt, comp, tensor and V"


class Functional:
    """sum c_i * eps_{p_i}."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[Ordinal, Scalar] = ()):
        items = dict(coeffs)
        self.coeffs = {p: Fraction(c) for p, c in sorted(items.items()) if c != 0}

    @classmethod
    def point(cls, p: Ordinal, c: Scalar = 1) -> "Functional":
        return cls({p: c})

    def __call__(self, f: StepFunction) -> Fraction:
        return sum((c * f(p) for p, c in self.coeffs.items()), Fraction(0))

    def __getitem__(self, p: Ordinal) -> Fraction:
        return self.coeffs.get(p, Fraction(0))

    def __add__(self, other: "Functional") -> "Functional":
        out = dict(self.coeffs)
        for p, c in other.coeffs.items():
            out[p] = out.get(p, 0) + c
        return Functional(out)

    def __mul__(self, c: Scalar) -> "Functional":
        return Functional({p: c * v for p, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __eq__(self, other):
        return isinstance(other, Functional) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(self.coeffs.items()))

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def norm(self) -> Fraction:
        return sum((abs(c) for c in self.coeffs.values()), Fraction(0))

    def points(self) -> list[Ordinal]:
        return list(self.coeffs)

    def pull_back(self, w: StepFunction, phi: OrdinalMap) -> "Functional":
        """f -> self(w * (f o phi))."""
        out: dict[Ordinal, Fraction] = {}
        for p, c in self.coeffs.items():
            q = phi(p)
            out[q] = out.get(q, 0) + c * w(p)
        return Functional(out)

    def to_text(self) -> str:
        if not self.coeffs:
            return "0"
        return " + ".join(f"{_fmt_scalar(c)}*e({format_ordinal(p)})" for p, c in self.coeffs.items())

    def __repr__(self):
        return f"Functional({self.to_text()})"


@dataclass(frozen=True)
class Comp:
    weight: StepFunction
    phi: OrdinalMap


@dataclass(frozen=True)
class Tensor:
    g: StepFunction
    mu: Functional


Term = Union[Comp, Tensor]


def _maps_equal(a: OrdinalMap, b: OrdinalMap) -> bool:
    if a is b:
        return True
    if isinstance(a, PiecewiseMap) and isinstance(b, PiecewiseMap):
        return a == b
    return False


class Operator:
    """A finite sum of Comp and Tensor terms (an immutable value)."""

    __slots__ = ("terms", "name")

    def __init__(self, terms: Iterable[Term] = (), name: Optional[str] = None):
        self.terms = _collect(terms)
        self.name = name

    # -- structure ---------------------------------------------------------
    @property
    def finite(self) -> bool:
        """Every map in the description has finitely many pieces."""
        return all(not isinstance(t, Comp) or isinstance(t.phi, PiecewiseMap) for t in self.terms)

    def named(self, name: str) -> "Operator":
        return Operator(self.terms, name)

    def constants(self) -> list[Ordinal]:
        """All ordinals mentioned by the description (finite operators only)."""
        out: list[Ordinal] = []
        for t in self.terms:
            if isinstance(t, Comp):
                out.extend(t.weight.starts)
                if isinstance(t.phi, PiecewiseMap):
                    out.extend(t.phi.constants())
            else:
                out.extend(t.g.starts)
                out.extend(t.mu.points())
        return out

    # -- action ------------------------------------------------------------
    def apply(self, f: StepFunction) -> StepFunction:
        out = StepFunction.constant(0)
        for t in self.terms:
            if isinstance(t, Comp):
                out = out + t.weight * f.compose(t.phi)
            else:
                out = out + t.g * t.mu(f)
        return out

    __call__ = apply

    def entry(self, alpha: Ordinal, beta: Ordinal) -> Fraction:
        total = Fraction(0)
        for t in self.terms:
            if isinstance(t, Comp):
                if t.phi(alpha) == beta:
                    total += t.weight(alpha)
            else:
                total += t.g(alpha) * t.mu[beta]
        return total

    def row(self, alpha: Ordinal) -> Functional:
        out: dict[Ordinal, Fraction] = {}
        for t in self.terms:
            if isinstance(t, Comp):
                b = t.phi(alpha)
                out[b] = out.get(b, 0) + t.weight(alpha)
            else:
                ga = t.g(alpha)
                if ga:
                    for p, c in t.mu.coeffs.items():
                        out[p] = out.get(p, 0) + ga * c
        return Functional(out)

    def column(self, beta: Ordinal) -> StepFunction:
        out = StepFunction.constant(0)
        for t in self.terms:
            if isinstance(t, Comp):
                for lo, hi in t.phi.preimage_point(beta):
                    out = out + t.weight * StepFunction.on_interval(lo, hi)
            else:
                c = t.mu[beta]
                if c:
                    out = out + t.g * c
        return out

    # -- algebra -----------------------------------------------------------
    def __add__(self, other: "Operator") -> "Operator":
        if not isinstance(other, Operator):
            return NotImplemented
        return Operator(self.terms + other.terms)

    def __neg__(self) -> "Operator":
        return self.scale(-1)

    def __sub__(self, other: "Operator") -> "Operator":
        if not isinstance(other, Operator):
            return NotImplemented
        return self + (-other)

    def scale(self, c: Scalar) -> "Operator":
        c = Fraction(c)
        out = []
        for t in self.terms:
            if isinstance(t, Comp):
                out.append(Comp(t.weight * c, t.phi))
            else:
                out.append(Tensor(t.g * c, t.mu))
        return Operator(out)

    def __rmul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    def __matmul__(self, other: "Operator") -> "Operator":
        """self o other: apply other first."""
        return compose(self, other)

    def __repr__(self):
        from .text import operator_to_text
        return f"Operator({self.name or operator_to_text(self)})"


def _collect(terms: Iterable[Term]) -> tuple:
    """Merge terms sharing a map or functional and drop zero terms."""
    comps: list[Comp] = []
    tensors: list[Tensor] = []
    for t in terms:
        if isinstance(t, Comp):
            if t.weight.is_zero:
                continue
            for i, u in enumerate(comps):
                if _maps_equal(u.phi, t.phi):
                    comps[i] = Comp(u.weight + t.weight, u.phi)
                    break
            else:
                comps.append(t)
        elif isinstance(t, Tensor):
            if t.g.is_zero or t.mu.is_zero:
                continue
            for i, u in enumerate(tensors):
                if u.mu == t.mu:
                    tensors[i] = Tensor(u.g + t.g, u.mu)
                    break
                if u.g == t.g:
                    tensors[i] = Tensor(u.g, u.mu + t.mu)
                    break
            else:
                tensors.append(t)
        else:
            raise TypeError(f"not an operator term: {t!r}")
    comps = [c for c in comps if not c.weight.is_zero]
    tensors = [t for t in tensors if not (t.g.is_zero or t.mu.is_zero)]
    return tuple(comps) + tuple(tensors)


def _compose_terms(s: Term, t: Term) -> Term:
    if isinstance(s, Comp) and isinstance(t, Comp):
        return Comp(s.weight * t.weight.compose(s.phi), s.phi.then(t.phi))
    if isinstance(s, Comp):
        return Tensor(s.weight * t.g.compose(s.phi), t.mu)
    if isinstance(t, Comp):
        return Tensor(s.g, s.mu.pull_back(t.weight, t.phi))
    return Tensor(s.g * s.mu(t.g), t.mu)


def compose(s: Operator, t: Operator) -> Operator:
    """s o t."""
    return Operator(_compose_terms(a, b) for a in s.terms for b in t.terms)


# -- primitives ------------------------------------------------------------


def _countable(sigma: Ordinal, what: str):
    if sigma.top:
        raise OrdinalError(f"{what} needs a countable ordinal")


def identity() -> Operator:
    return Operator([Comp(StepFunction.constant(1), identity_map())], "I")


def zero() -> Operator:
    return Operator([], "0")


def proj(sigma: Ordinal) -> Operator:
    """P_sigma f = f * 1_[0, sigma]."""
    _countable(sigma, "P")
    return Operator([Comp(StepFunction.generator(sigma), identity_map())])


def proj_tilde(sigma: Ordinal) -> Operator:
    """P_sigma + 1_[sigma+1, W] (x) eps_W."""
    _countable(sigma, "Pt")
    tail = StepFunction.indicator(add(sigma, ONE), OMEGA1)
    return proj(sigma) + Operator([Tensor(tail, Functional.point(OMEGA1))])


def comp(weight: StepFunction, phi: OrdinalMap) -> Operator:
    return Operator([Comp(weight, phi)])


def tensor(g: StepFunction, mu: Functional) -> Operator:
    return Operator([Tensor(g, mu)])


def evaluation(p: Ordinal) -> Functional:
    return Functional.point(p)
