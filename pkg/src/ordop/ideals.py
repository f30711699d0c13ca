"""Membership tests and constructions for the closed ideals of operators.

* ``in_loy_willis``: the final column is continuous at W.
* ``separable_range``: T = Pt_s T Pt_s for a countable s.
* ``lemma44_bound``: a countable xi with P_eta S (I - P_xi) = 0.
* ``disjoint_family``: disjointly supported f_i with ||T f_i|| >= eps.
* ``build_V``: the operator I - C_phi for the closed set of powers w^lam,
  lam a limit, which lies in M but outside G.
* ``decompose_X_plus_G``: T = Pt_s T + (I - Pt_s) T.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Iterable, Optional

from .ordinal import (OMEGA, OMEGA1, ONE, ZERO, Ordinal, OrdinalError, add, format_ordinal,
                      mul, nat, omega_pow)
from .operators.analysis import boundaries, equal_on, equals, row_support_sup, standard_generators
from .operators.core import SCOPE, Operator, comp, identity, proj, proj_tilde, tensor, zero
from .operators.text import operator_to_text
from .topology.maps import MonotoneMap
from .topology.steps import StepFunction

__all__ = [
    "MembershipCertificate",
    "in_loy_willis",
    "separable_range",
    "lemma44_bound",
    "disjoint_family",
    "DisjointFamily",
    "phi_H",
    "build_V",
    "decompose_X_plus_G",
    "Decomposition",
    "HypothesisError",
]


class HypothesisError(ValueError):
    """An operation was called outside its stated hypotheses."""


@dataclass
class MembershipCertificate:
    operator: str
    ideal: str
    verdict: bool
    witness: str = ""
    checked: list = field(default_factory=list)
    sigma: Optional[Ordinal] = None

    def to_text(self) -> str:
        lines = [
            f"ideal: {self.ideal}",
            f"operator: {self.operator}",
            f"verdict: {'member' if self.verdict else 'not a member'}",
        ]
        if self.sigma is not None:
            lines.append(f"sigma: {format_ordinal(self.sigma)}")
        if self.witness:
            lines.append(f"witness: {self.witness}")
        for c in self.checked:
            lines.append(f"checked: {c}")
        lines.append(f"scope: {SCOPE}")
        lines.append(f"replay: check {self.ideal} \"{self.operator}\"")
        return "\n".join(lines)


def _text(T: Operator) -> str:
    return T.name if T.name and not T.finite else operator_to_text(T)


def in_loy_willis(T: Operator) -> MembershipCertificate:
    k = T.column(OMEGA1)
    limit, at_top = k.left_limit_at_top(), k(OMEGA1)
    ok = limit == at_top
    cert = MembershipCertificate(_text(T), "M", ok)
    cert.checked.append(f"column W = {k.to_text()}")
    cert.checked.append(f"limit at W = {limit}, value at W = {at_top}")
    if not ok:
        cert.witness = f"column W jumps at W: {k.to_text()}"
    return cert


# ---------------------------------------------------------------------------
# separable range


def _candidates(T: Operator) -> list[Ordinal]:
    out = {ZERO}
    for c in boundaries(T):
        if c.top:
            continue
        out.add(c)
        out.add(add(c, ONE))
        if c.is_successor:
            out.add(c.predecessor())
    return sorted(out)


def _stable(T: Operator, sigma: Ordinal, probes: Iterable[Ordinal]):
    P = proj_tilde(sigma)
    lhs = P @ T @ P
    if T.finite:
        return equals(T, lhs)
    return equal_on(T, lhs, probes)


def separable_range(T: Operator) -> MembershipCertificate:
    """Least candidate s with T = Pt_s T Pt_s, or a non-separable verdict.

    The good s form an upward closed set, so the candidates (constants of T,
    their neighbours, and 0) are searched downward from the largest.
    Candidates only change at constants of the description; this is
    recorded in the certificate.
    """
    cands = _candidates(T)
    top = cands[-1]
    probes = _probe_sigmas(T, top)
    cert = MembershipCertificate(_text(T), "X", False)
    cert.checked.append("assumption: stability only changes at ordinal constants of T")
    if not T.finite:
        cert.checked.append(f"lazy operator: equality checked on {len(probes)} generators")
    diff = _stable(T, top, probes)
    if diff is not None:
        cert.witness = f"T != Pt_s T Pt_s for s = {format_ordinal(top)}: {diff.describe()}"
        return cert
    best = top
    for s in reversed(cands[:-1]):
        if _stable(T, s, probes) is not None:
            break
        best = s
    cert.verdict = True
    cert.sigma = best
    cert.checked.append(f"T == Pt_s T Pt_s at s = {format_ordinal(best)}")
    return cert


def _probe_sigmas(T: Operator, above: Ordinal) -> list[Ordinal]:
    pts = set(standard_generators()) | set(boundaries(T))
    for b in (above, add(above, ONE), add(above, OMEGA), mul(above, nat(2)) if not above.is_zero else ONE,
              omega_pow(add(above, ONE)), omega_pow(add(above, OMEGA)), add(omega_pow(add(above, OMEGA)), ONE)):
        pts.add(b)
    return sorted(pts)


# ---------------------------------------------------------------------------
# support bound


def lemma44_bound(S: Operator, zeta: Ordinal, eta: Ordinal) -> Ordinal:
    """xi = max(zeta, sup of the row supports of S over [0, eta]).

    Requires the final column of S to vanish; checks P_eta S (I - P_xi) = 0.
    """
    if not S.column(OMEGA1).is_zero:
        raise HypothesisError("the final column of S must vanish")
    xi = max(zeta, row_support_sup(S, eta))
    if xi.top:
        raise OrdinalError("row supports are not bounded below W")
    check = proj(eta) @ S @ (identity() - proj(xi))
    diff = equals(check, zero()) if check.finite else equal_on(check, zero(), _probe_sigmas(S, xi))
    if diff is not None:
        raise OrdinalError(f"support bound failed: {diff.describe()}")
    return xi


# ---------------------------------------------------------------------------
# disjoint families


@dataclass
class DisjointFamily:
    functions: list
    epsilon: Fraction
    bounds: list
    applicable: bool = True
    reason: str = ""

    def lines(self) -> list[str]:
        if not self.applicable:
            return [f"inapplicable: {self.reason}"]
        out = [f"epsilon: {self.epsilon}"]
        for f, b in zip(self.functions, self.bounds):
            out.append(f"above {format_ordinal(b)}: {f.to_text()}")
        return out


def _interval_probes(xi: Ordinal) -> list[Ordinal]:
    """Right ends sigma for the probe functions 1_(xi, sigma]."""
    return [add(xi, ONE), add(xi, nat(2)), add(xi, OMEGA), add(add(xi, OMEGA), ONE),
            mul(xi, nat(2)) if not xi.is_zero else OMEGA, omega_pow(add(xi, ONE))]


def disjoint_family(T: Operator, n: int) -> DisjointFamily:
    """The first n members of a disjointly supported family bounded away from 0 under T.

    The rank-one part F = k_W (x) eps_W is removed first, leaving S = T - F
    with vanishing final column.  Each member lives above the support bound
    of the previous one, so the supports are disjoint and increasing.
    """
    if n <= 0:
        return DisjointFamily([], Fraction(0), [])
    if not in_loy_willis(T).verdict:
        return DisjointFamily([], Fraction(0), [], False, "T is not in M")
    S = T - tensor(T.column(OMEGA1), _eps_top())
    zeta = ZERO
    funcs, bounds = [], []
    eps: Optional[Fraction] = None
    for i in range(n):
        xi = lemma44_bound(S, zeta, zeta)
        probes = [StepFunction.on_interval(add(xi, ONE), add(s, ONE)) for s in _interval_probes(xi)]
        scored = [(T.apply(f).norm(), f) for f in probes]
        if eps is None:
            best = max(v for v, _ in scored)
            if best == 0:
                return DisjointFamily([], Fraction(0), [], False, "T kills every probe")
            eps = best / 2
        pick = next((f for v, f in scored if v >= eps), None)
        if pick is None:
            return DisjointFamily(funcs, eps, bounds, False, f"no probe above {format_ordinal(xi)} reaches epsilon")
        funcs.append(pick)
        bounds.append(xi)
        zeta = pick.support_sup()
    return DisjointFamily(funcs, eps, bounds)


def _eps_top():
    from .operators.core import Functional
    return Functional.point(OMEGA1)


# ---------------------------------------------------------------------------
# the operator V


def _strip_finite(e: Ordinal) -> Ordinal:
    if e.is_successor:
        return Ordinal(e.terms[:-1])
    return e


def _next_limit(e: Ordinal) -> Ordinal:
    """Least limit ordinal > e (for e countable)."""
    return add(_strip_finite(e), OMEGA)


def _h_value(beta: Ordinal) -> Ordinal:
    """Least w^lam >= beta with lam a limit >= w, or W."""
    if beta.top:
        return OMEGA1
    first = omega_pow(OMEGA)
    if beta <= first:
        return first
    e = beta.leading_exponent
    exact = beta == omega_pow(e)
    if exact and e.is_limit:
        return beta
    lam = _next_limit(e) if not (e.is_limit and not exact) else add(e, OMEGA)
    return omega_pow(lam)


def _h_threshold(t: Ordinal) -> Ordinal:
    """Least beta with phi_H(beta) >= t."""
    if t.top:
        return OMEGA1
    h = _h_value(t)
    lam = h.leading_exponent
    if lam == OMEGA:
        return ZERO
    last_e, last_c = lam.terms[-1]
    if last_e == ONE:
        # lam = mu + w with mu a limit >= w: the previous element is w^mu
        mu = Ordinal(lam.terms[:-1] + (((ONE, last_c - 1),) if last_c > 1 else ()))
        return add(omega_pow(mu), ONE)
    return h


@lru_cache(maxsize=None)
def phi_H() -> MonotoneMap:
    """beta -> least element of {w^lam : lam limit, lam >= w} u {W} above beta."""
    return MonotoneMap(_h_value, _h_threshold, name="phi_H")


def build_V() -> Operator:
    return (identity() - comp(StepFunction.constant(1), phi_H())).named("V")


# ---------------------------------------------------------------------------
# X + G decomposition


@dataclass
class Decomposition:
    sigma: Ordinal
    separable: Operator
    remainder: Operator
    checked: list


def decompose_X_plus_G(T: Operator, sigma: Optional[Ordinal] = None) -> Decomposition:
    """T = Pt_s T + (I - Pt_s) T with range(Pt_s T) inside range(Pt_s)."""
    if sigma is None:
        countable = [b for b in boundaries(T) if not b.top]
        sigma = max(countable) if countable else ZERO
    P = proj_tilde(sigma)
    R = P @ T
    rem = (identity() - P) @ T
    probes = _probe_sigmas(T, sigma)
    checks = []
    for label, a, b in (("Pt_s R == R", P @ R, R), ("R + remainder == T", R + rem, T)):
        diff = equals(a, b, probes) if a.finite and b.finite else equal_on(a, b, probes)
        if diff is not None:
            raise OrdinalError(f"decomposition check {label} failed: {diff.describe()}")
        checks.append(label)
    return Decomposition(sigma, R, rem, checks)
