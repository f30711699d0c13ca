"""Factor the identity through an operator outside M.

Given T with a final column that jumps at W, the pipeline builds

    T1 = T(I - P_rho)                  final row moved onto {W}
    T2 = c^-1 (T1 - g (x) eps_W)       final row and column equal to 1_{W}
    eta, xi                            interleaved support recursion for T2
    T3 = T2 Phi_Xi, T4 = Psi_H T3      rows of T4 are point masses
    T5 = Q T4                          T5 = comp(1, theta o psi_H o max(., chi))
    V_N T5 U_M = I

and then S T R = I - F with F of rank at most one, which ``fredholm_upgrade``
turns into S' T R' = I.  Every stage checks its defining identity before
the next one runs and records it in the transcript.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .ordinal import (OMEGA, OMEGA1, ONE, ZERO, Ordinal, OrdinalError, add, format_ordinal,
                      left_subtract, mul, parse_ordinal)
from .operators.analysis import (Difference, col_support_sup, equal_on, equals, operator_norm,
                                 row_support_sup, standard_generators, boundaries)
from .operators.canonical import col_sup_of_piece, refine, row_sup_of_piece
from .operators.core import SCOPE, Functional, Operator, comp, identity, proj, tensor
from .operators.text import operator_to_text
from .topology.closed_sets import BlockFamily, ClosedSetExpr, is_closed, order_iso
from .topology.maps import Const, MonotoneMap, PiecewiseMap, Shift
from .topology.search import SearchError, divide
from .topology.sequences import FunctionSeq, Seq, SupError, seq_inverse, seq_sup, stabilized_sup
from .topology.steps import StepFunction
from .ordinal import fundamental_sequence

__all__ = [
    "FactorizationError",
    "reduce_T1",
    "reduce_T2",
    "eta_xi_recursion",
    "build_phi_xi",
    "build_U",
    "build_H_theta_psi",
    "FactorizationState",
    "FactorizationCertificate",
    "factorize",
    "fredholm_upgrade",
    "DEFAULT_TRUNCATION",
]

DEFAULT_TRUNCATION = parse_ordinal("w^3")
OMEGA_PLUS_ONE = add(OMEGA, ONE)


class FactorizationError(OrdinalError):
    """A stage identity failed; ``witness`` says where."""

    def __init__(self, stage: str, message: str, witness: Optional[Difference] = None):
        detail = f": {witness.describe()}" if witness is not None else ""
        super().__init__(f"{stage}: {message}{detail}")
        self.stage = stage
        self.witness = witness


def _ord(x: Ordinal) -> str:
    return format_ordinal(x)


def _text(T: Operator) -> str:
    return operator_to_text(T)


def _eps(p: Ordinal) -> Functional:
    return Functional.point(p)


def _limit(x: Ordinal) -> bool:
    return x.is_limit and not x.is_zero


# ---------------------------------------------------------------------------
# stages 1 and 2


def reduce_T1(T: Operator) -> tuple[Operator, Ordinal]:
    """(T(I - P_rho), rho) with rho the sup of the countable part of row W."""
    k = T.column(OMEGA1)
    if k.left_limit_at_top() == k(OMEGA1):
        raise FactorizationError("reduce_T1", "T lies in M (its final column is continuous at W)")
    countable = [p for p in T.row(OMEGA1).points() if not p.top]
    rho = max(countable) if countable else ZERO
    T1 = T @ (identity() - proj(rho))
    if T1.column(OMEGA1) != k:
        raise FactorizationError("reduce_T1", "final column changed")
    return T1, rho


def reduce_T2(T1: Operator) -> tuple[Operator, Fraction, StepFunction]:
    """(T2, c, g) with T2 = c^-1 (T1 - g (x) eps_W)."""
    k = T1.column(OMEGA1)
    g = k.replace_at_top(k.left_limit_at_top())
    c = T1.entry(OMEGA1, OMEGA1) - g(OMEGA1)
    if c == 0:
        raise FactorizationError("reduce_T2", "c = 0, so T1 lies in M")
    G = tensor(g, _eps(OMEGA1))
    T2 = (T1 - G).scale(1 / c)
    if T2.column(OMEGA1) != StepFunction.point(OMEGA1):
        raise FactorizationError("reduce_T2", f"final column of T2 is {T2.column(OMEGA1).to_text()}")
    if T2.row(OMEGA1) != _eps(OMEGA1):
        raise FactorizationError("reduce_T2", f"final row of T2 is {T2.row(OMEGA1).to_text()}")
    return T2, c, g


# ---------------------------------------------------------------------------
# the interleaved recursion


PROBES = (3, 4, 5)


class SupportRecursion:
    """Memoized eta and xi for T2.

    eta_0 = xi_0 = 0,
    eta_{s+1} = max(eta_s + w, colsup(xi_s)) + 1,   eta_lam = sup eta_s,
    xi_s = max(sup_{t<s} (xi_t + 1), rowsup(eta_s + w)).

    Limits are taken along fundamental sequences with CNF stabilization.
    colsup and rowsup may over-approximate for lazy operators; eta and xi
    remain strictly increasing and every later identity is checked on its
    own, so only the bounds (not correctness) depend on them.
    """

    def __init__(self, T2: Operator, budget: int = 50_000):
        self.T2 = T2
        self.eta_memo: dict = {ZERO: ZERO, OMEGA1: OMEGA1}
        self.xi_memo: dict = {ZERO: ZERO, OMEGA1: OMEGA1}
        self.zeta_memo: dict = {}
        self.pieces = refine(T2) if T2.finite else None
        self.budget = budget
        self.steps = 0

    def colsup(self, x: Ordinal) -> Ordinal:
        if self.pieces is None:
            return col_support_sup(self.T2, x)
        return max([ZERO] + [col_sup_of_piece(p, x) for p in self.pieces])

    def rowsup(self, y: Ordinal) -> Ordinal:
        if self.pieces is None:
            return row_support_sup(self.T2, y)
        return max([ZERO] + [row_sup_of_piece(p, y) for p in self.pieces if p.start <= y])

    def _fill(self, s: Ordinal) -> None:
        """Evaluate eta and xi at s and everything the recursion needs below it.

        Uses an explicit stack: a limit depends on its fundamental-sequence
        probes, and s = base + n on the limit base, filled in a loop.
        """
        stack = [s]
        while stack:
            self.steps += 1
            if len(self.xi_memo) > self.budget or self.steps > 4 * self.budget:
                raise SupError(f"recursion budget of {self.budget} evaluations exhausted below {_ord(s)}")
            x = stack[-1]
            if x in self.xi_memo:
                stack.pop()
                continue
            n = x.finite_part
            if n:
                base = Ordinal(x.terms[:-1])
                if base not in self.xi_memo:
                    stack.append(base)
                    continue
                self._successors(base, n)
            else:
                probes = [fundamental_sequence(x, k) for k in PROBES]
                missing = [p for p in probes if p not in self.xi_memo]
                if missing:
                    stack.extend(missing)
                    continue
                if x not in self.eta_memo:
                    self._store(self.eta_memo, x, stabilized_sup([self.eta_memo[p] for p in probes]), "eta")
                self.zeta_memo[x] = stabilized_sup([self.xi_memo[p] for p in probes])
                self._store(self.xi_memo, x, max(self.zeta_memo[x], self._rowsup(x)), "xi")
            stack.pop()

    def _successors(self, x: Ordinal, n: int) -> None:
        for _ in range(n):
            nxt = add(x, ONE)
            if nxt not in self.xi_memo:
                e = add(max(add(self.eta_memo[x], OMEGA), self.colsup(self.xi_memo[x])), ONE)
                self._store(self.eta_memo, nxt, e, "eta")
                self._store(self.xi_memo, nxt, max(add(self.xi_memo[x], ONE), self._rowsup(nxt)), "xi")
            x = nxt

    def _rowsup(self, s: Ordinal) -> Ordinal:
        return self.rowsup(add(self.eta_memo[s], OMEGA))

    @staticmethod
    def _store(memo: dict, s: Ordinal, v: Ordinal, what: str) -> None:
        if v.top:
            raise SupError(f"{what} reaches W at {_ord(s)}")
        memo[s] = v

    def eta(self, s: Ordinal) -> Ordinal:
        if s not in self.eta_memo:
            self._fill(s)
        return self.eta_memo[s]

    def xi(self, s: Ordinal) -> Ordinal:
        if s not in self.xi_memo:
            self._fill(s)
        return self.xi_memo[s]

    def zeta(self, lam: Ordinal) -> Ordinal:
        """sup of xi below a limit lam."""
        if lam.top:
            return OMEGA1
        if lam not in self.zeta_memo:
            self._fill(lam)
        return self.zeta_memo[lam]

    def bound_hint(self, memo: dict, x: Ordinal) -> Optional[Ordinal]:
        """Least evaluated sigma with memo[sigma] >= x.

        Searches for inverses can then stay below points already computed
        instead of probing far above the answer.
        """
        best, below = None, None
        for k, v in memo.items():
            if k.top:
                continue
            if v >= x:
                if best is None or k < best:
                    best = k
            elif below is None or k > below:
                below = k
        if best is None and below is not None:
            # a few successor steps past the largest evaluated point are cheap
            for _ in range(3):
                below = add(below, ONE)
                self._fill(below)
                if memo[below] >= x:
                    return below
        return best

    def sequences(self) -> tuple[FunctionSeq, FunctionSeq]:
        eta = FunctionSeq(self.eta, "eta", strict=True, continuous=True,
                          bound_hint=lambda x: self.bound_hint(self.eta_memo, x))
        xi = FunctionSeq(self.xi, "xi", strict=True, sup=self.zeta,
                         bound_hint=lambda x: self.bound_hint(self.xi_memo, x))
        return eta, xi

    def monotonicity_defect(self) -> Optional[str]:
        """First evaluated pair breaking eta_t + w < eta_s or xi_t < xi_s."""
        ks = sorted(k for k in self.eta_memo if not k.top)
        for a, b in zip(ks, ks[1:]):
            if not add(self.eta_memo[a], OMEGA) < self.eta_memo[b]:
                return f"eta at {_ord(a)} and {_ord(b)}"
        ks = sorted(k for k in self.xi_memo if not k.top)
        for a, b in zip(ks, ks[1:]):
            if not self.xi_memo[a] < self.xi_memo[b]:
                return f"xi at {_ord(a)} and {_ord(b)}"
        return None


def eta_xi_recursion(T2: Operator) -> tuple[FunctionSeq, FunctionSeq]:
    return SupportRecursion(T2).sequences()


# ---------------------------------------------------------------------------
# Phi_Xi and U_Xi


def _check_strict(xi: Seq) -> None:
    if not xi.strict:
        raise OrdinalError("Xi must be strictly increasing")


def _cell_start(xi: Seq, s: Ordinal) -> Ordinal:
    """Least alpha sent to the cell of s by phi_Xi."""
    if s.is_zero:
        return ZERO
    if s.top:
        return OMEGA1
    if s.is_successor:
        return add(xi(s.predecessor()), ONE)
    return seq_sup(xi, s)


def _cell_value(xi: Seq, s: Ordinal) -> Ordinal:
    if _limit(s) and not s.top:
        return seq_sup(xi, s)
    return xi(s)


def build_phi_xi(xi: Seq) -> tuple[MonotoneMap, Operator]:
    """phi_Xi sends [0, xi_0] to xi_0, [xi_s + 1, xi_{s+1}] to xi_{s+1}
    and [zeta_lam, xi_lam] to zeta_lam; Phi_Xi = comp(1, phi_Xi)."""
    _check_strict(xi)

    def fn(a: Ordinal) -> Ordinal:
        if a.top:
            return OMEGA1
        return _cell_value(xi, seq_inverse(xi, a))

    def threshold(t: Ordinal) -> Optional[Ordinal]:
        if t.top:
            return OMEGA1
        s = seq_inverse(xi, t)
        if _limit(s) and _cell_value(xi, s) < t:
            s = add(s, ONE)
        return _cell_start(xi, s)

    phi = MonotoneMap(fn, threshold, name=f"phi[{xi.to_text()}]")
    return phi, comp(StepFunction.constant(1), phi).named(f"Phi[{xi.to_text()}]")


def inverse_map(xi: Seq, name: str) -> MonotoneMap:
    """alpha -> least s with xi_s >= alpha."""
    _check_strict(xi)

    def fn(a: Ordinal) -> Ordinal:
        return OMEGA1 if a.top else seq_inverse(xi, a)

    def threshold(t: Ordinal) -> Optional[Ordinal]:
        # psi(alpha) >= t iff alpha > xi_s for every s < t
        return _cell_start(xi, t)

    return MonotoneMap(fn, threshold, name=name)


def build_U(xi: Seq) -> Operator:
    """U_Xi 1_[0, s] = 1_[0, xi_s]."""
    return comp(StepFunction.constant(1), inverse_map(xi, f"psi[{xi.to_text()}]")).named(f"U[{xi.to_text()}]")


# ---------------------------------------------------------------------------
# H, theta and psi_H


def _least_cell(xi: Seq, t: Ordinal, lo: Ordinal = ZERO) -> Ordinal:
    """Least s >= lo whose cell value (xi_s, or zeta_s at limits) is >= t."""
    if t.top:
        return OMEGA1
    s = seq_inverse(xi, t, lo=lo)
    if _limit(s) and not s.top and _cell_value(xi, s) < t:
        s = add(s, ONE)
    return s


def build_H(eta: Seq) -> ClosedSetExpr:
    """The union of the blocks [eta_s, eta_s + w] for s >= 1, together with W."""
    return ClosedSetExpr([], BlockFamily(eta, OMEGA, lo=ONE), with_top=True)


def theta_map(H: ClosedSetExpr, xi: Seq) -> MonotoneMap:
    """theta on H: block s goes to xi_s (s a successor) or zeta_s (s a limit)."""
    fam = H.family

    def fn(a: Ordinal) -> Ordinal:
        if a.top:
            return OMEGA1
        s = fam.index_for(a)
        if s is None or not H.contains(a):
            raise OrdinalError(f"theta is only defined on H, not at {_ord(a)}")
        return _cell_value(xi, s)

    def threshold(t: Ordinal) -> Optional[Ordinal]:
        s = _least_cell(xi, t, ONE)
        return OMEGA1 if s.top else fam.left(s)

    return MonotoneMap(fn, threshold, name="theta")


def theta_psi_map(xi: Seq) -> MonotoneMap:
    """theta o psi_H: position (w+1)*d + r, r <= w, goes to the cell value of 1 + d."""

    def fn(a: Ordinal) -> Ordinal:
        if a.top:
            return OMEGA1
        d, _ = divide(a, OMEGA_PLUS_ONE)
        return _cell_value(xi, add(ONE, d))

    def threshold(t: Ordinal) -> Optional[Ordinal]:
        s = _least_cell(xi, t, ONE)
        if s.top:
            return OMEGA1
        return mul(OMEGA_PLUS_ONE, left_subtract(ONE, s))

    return MonotoneMap(fn, threshold, name="theta.psi_H")


def build_H_theta_psi(eta: Seq, xi: Seq):
    """(H, theta, psi_H, Psi_H, theta o psi_H); raises if H is not closed."""
    H = build_H(eta)
    psi = order_iso(H)
    Psi = comp(StepFunction.constant(1), psi).named("Psi_H")
    return H, theta_map(H, xi), psi, Psi, theta_psi_map(xi)


# ---------------------------------------------------------------------------
# verification bookkeeping


class Verifier:
    """Checks operator identities on generators 1_[0, s] and logs them.

    Generators whose evaluation needs a supremum the engine cannot produce
    are dropped when they lie above ``bound``; the run is then marked as
    truncated.  A failure at or below the bound is an error.
    """

    def __init__(self, generators, bound: Ordinal):
        self.generators = sorted(set(generators))
        self.bound = bound
        self.skipped: set = set()

    @property
    def mode(self) -> str:
        return "symbolic" if not self.skipped else f"truncated-to-{_ord(self.bound)}"

    def usable(self, sigma: Ordinal) -> bool:
        return sigma not in self.skipped

    def guard(self, sigma: Ordinal, fn: Callable[[], object]):
        """fn() or None when sigma is above the bound and fn needs an unavailable sup."""
        try:
            return fn()
        except (SupError, SearchError):
            if sigma.top or sigma <= self.bound:
                raise
            self.skipped.add(sigma)
            return None

    def check(self, stage: str, label: str, A: Operator, B: Operator, lines: list) -> None:
        if A.finite and B.finite:
            diff = equals(A, B)
            if diff is not None:
                raise FactorizationError(stage, f"{label} fails", diff)
            lines.append(f"check: {label}: exact")
            return
        n = 0
        for sigma in self.generators:
            if not self.usable(sigma):
                continue
            diff = self.guard(sigma, lambda: equal_on(A, B, [sigma]))
            if sigma in self.skipped:
                continue
            if diff is not None:
                raise FactorizationError(stage, f"{label} fails", diff)
            n += 1
        lines.append(f"check: {label}: {n} generators")

    def points(self, sigmas):
        return [s for s in sigmas if self.usable(s) and (s.top or s <= self.bound or s in self.generators)]


@dataclass
class Section:
    name: str
    lines: list = field(default_factory=list)

    def to_text(self) -> str:
        return "\n".join([f"[{self.name}]"] + self.lines)


# ---------------------------------------------------------------------------
# the pipeline


@dataclass
class FactorizationState:
    T: Operator
    rho: Optional[Ordinal] = None
    T1: Optional[Operator] = None
    g: Optional[StepFunction] = None
    G: Optional[Operator] = None
    c: Optional[Fraction] = None
    T2: Optional[Operator] = None
    recursion: Optional[SupportRecursion] = None
    eta: Optional[Seq] = None
    xi: Optional[Seq] = None
    phi_xi: Optional[MonotoneMap] = None
    Phi: Optional[Operator] = None
    H: Optional[ClosedSetExpr] = None
    theta: Optional[MonotoneMap] = None
    psi_H: Optional[MonotoneMap] = None
    Psi: Optional[Operator] = None
    theta_psi: Optional[MonotoneMap] = None
    T3: Optional[Operator] = None
    T4: Optional[Operator] = None
    chi: Optional[Ordinal] = None
    Q: Optional[Operator] = None
    T5: Optional[Operator] = None
    k: Optional[Ordinal] = None
    mu: Optional[Seq] = None
    nu: Optional[Seq] = None
    U_M: Optional[Operator] = None
    V_N: Optional[Operator] = None


@dataclass
class FactorizationCertificate:
    operator: str
    S: Operator
    R: Operator
    F: Operator
    mode: str
    truncate: Ordinal
    sections: list
    exact: bool = False
    state: Optional[FactorizationState] = None

    def to_text(self) -> str:
        head = [
            "certificate: factorization of the identity",
            f"operator: {self.operator}",
            f"scope: {SCOPE}",
            f"mode: {self.mode}",
            f"truncate: {_ord(self.truncate)}",
        ]
        body = [s.to_text() for s in self.sections]
        tail = [f"replay: factorize \"{self.operator}\" --truncate {_ord(self.truncate)}"]
        return "\n\n".join(["\n".join(head)] + body + ["\n".join(tail)]) + "\n"


def _sample_sigmas() -> list[Ordinal]:
    return [parse_ordinal(t) for t in ("0", "1", "2", "w", "w+1", "w*2", "w^2")]


def _generators(T: Operator, extra=()) -> list[Ordinal]:
    return sorted(set(standard_generators(extra)) | set(boundaries(T)))


def _stage_reductions(st: FactorizationState, out: list) -> None:
    sec = Section("reduce_T1")
    st.T1, st.rho = reduce_T1(st.T)
    sec.lines += [f"column W of T: {st.T.column(OMEGA1).to_text()}",
                  f"rho: {_ord(st.rho)}",
                  "check: column W of T1 equals column W of T: exact"]
    out.append(sec)
    sec = Section("reduce_T2")
    st.T2, st.c, st.g = reduce_T2(st.T1)
    st.G = tensor(st.g, _eps(OMEGA1))
    sec.lines += [f"g: {st.g.to_text()}", f"c: {st.c}",
                  "check: column W of T2 is 1_{W}: exact",
                  "check: row W of T2 is e(W): exact"]
    out.append(sec)


def _stage_recursion(st: FactorizationState, ver: Verifier, out: list) -> None:
    sec = Section("eta_xi")
    st.recursion = SupportRecursion(st.T2)
    st.eta, st.xi = st.recursion.sequences()
    for s in ver.points(_sample_sigmas()):
        vals = ver.guard(s, lambda: (st.eta(s), st.xi(s)))
        if vals is not None:
            sec.lines.append(f"s = {_ord(s)}: eta = {_ord(vals[0])}, xi = {_ord(vals[1])}")
    out.append(sec)


def _stage_phi(st: FactorizationState, ver: Verifier, out: list) -> None:
    sec = Section("phi_xi")
    st.phi_xi, st.Phi = build_phi_xi(st.xi)
    ver.check("phi_xi", "Phi o Phi == Phi", st.Phi @ st.Phi, st.Phi, sec.lines)
    nr = operator_norm(st.Phi, ver.points(ver.generators))
    if nr.value != 1:
        raise FactorizationError("phi_xi", f"norm of Phi is {nr.value}, expected 1")
    sec.lines.append(f"norm of Phi: {nr.value}" + (" (exact)" if nr.exact else ""))
    U = build_U(st.xi)
    n = 0
    for s in ver.points(_sample_sigmas()):
        got = ver.guard(s, lambda: (U(StepFunction.generator(s)), StepFunction.generator(st.xi(s))))
        if got is None:
            continue
        if got[0] != got[1]:
            raise FactorizationError("phi_xi", f"U_Xi 1_[0, {_ord(s)}] is {got[0].to_text()}")
        n += 1
    sec.lines.append(f"check: U_Xi 1_[0, s] == 1_[0, xi_s]: {n} samples")
    out.append(sec)


def _stage_H(st: FactorizationState, ver: Verifier, out: list) -> None:
    sec = Section("H_theta_psi")
    ok, witness = is_closed(build_H(st.eta))
    if not ok:
        raise FactorizationError("H_theta_psi", f"H is not closed at {_ord(witness)}")
    st.H, st.theta, st.psi_H, st.Psi, st.theta_psi = build_H_theta_psi(st.eta, st.xi)
    sec.lines.append(f"H: {st.H.to_text()}")
    sec.lines.append("check: H is closed")
    for s in ver.points(_sample_sigmas()[1:]):
        vals = ver.guard(s, lambda: (st.eta(s), st.theta(st.eta(s))))
        if vals is not None:
            sec.lines.append(f"theta on [{_ord(vals[0])}, {_ord(add(vals[0], OMEGA))}]: {_ord(vals[1])}")
    out.append(sec)


def _H_samples(st: FactorizationState, ver: Verifier) -> list[Ordinal]:
    pts = [OMEGA1]
    for s in ver.points(_sample_sigmas()[1:]):
        e = ver.guard(s, lambda: st.eta(s))
        if e is not None:
            pts += [e, add(e, ONE), add(e, OMEGA)]
    return pts


def _stage_T3(st: FactorizationState, ver: Verifier, out: list) -> None:
    sec = Section("T3")
    st.T3 = st.T2 @ st.Phi
    n = 0
    for a in _H_samples(st, ver):
        row = st.T3.row(a)
        target = st.theta(a)
        if any(p != target for p in row.points()):
            raise FactorizationError("T3", f"row {_ord(a)} of T3 is {row.to_text()}, outside {{{_ord(target)}}}")
        n += 1
    sec.lines.append(f"check: supp row_a(T3) in {{theta(a)}}: {n} points of H")
    out.append(sec)


def _stage_T5(st: FactorizationState, ver: Verifier, out: list) -> None:
    sec = Section("T5")
    st.T4 = st.Psi @ st.T3
    one = st.T4.apply(StepFunction.constant(1))
    last = list(one.pieces())[-1]
    if last[2] != 1:
        raise FactorizationError("T5", f"T4(1) is {one.to_text()}, not 1 at W")
    st.chi = last[0]
    if st.chi.top:
        raise FactorizationError("T5", "T4(1) is 1 only at W")
    sec.lines.append(f"T4(1): {one.to_text()}")
    sec.lines.append(f"chi: {_ord(st.chi)}")
    st.Q = (identity() - proj(st.chi) + tensor(StepFunction.generator(st.chi), _eps(st.chi))).named("Q")
    st.T5 = st.Q @ st.T4
    samples = sorted({st.chi, add(st.chi, ONE), add(st.chi, OMEGA), OMEGA1}
                     | set(ver.points(_sample_sigmas())))
    for a in samples:
        want = _eps(st.theta_psi(max(a, st.chi)))
        got = st.T5.row(a)
        if got != want:
            raise FactorizationError("T5", f"row {_ord(a)} of T5 is {got.to_text()}, expected {want.to_text()}")
    sec.lines.append(f"check: row_a(T5) == e(theta.psi_H(max(a, chi))): {len(samples)} rows")
    if st.T5.column(OMEGA1) != StepFunction.point(OMEGA1):
        raise FactorizationError("T5", f"column W of T5 is {st.T5.column(OMEGA1).to_text()}")
    sec.lines.append("check: column W of T5 is 1_{W}")
    out.append(sec)


def _stage_gamma(st: FactorizationState, ver: Verifier, out: list) -> None:
    """mu_s = theta.psi_H at block k + s, nu_s the end of that block."""
    sec = Section("gamma")
    k, _ = divide(st.chi, OMEGA_PLUS_ONE)
    st.k = k
    xi = st.xi

    def mu(s: Ordinal) -> Ordinal:
        return OMEGA1 if s.top else _cell_value(xi, add(ONE, add(k, s)))

    def nu(s: Ordinal) -> Ordinal:
        return OMEGA1 if s.top else add(mul(OMEGA_PLUS_ONE, add(k, s)), OMEGA)

    def mu_hint(x: Ordinal) -> Optional[Ordinal]:
        b = xi.bound_hint(x) if isinstance(xi, FunctionSeq) and xi.bound_hint else None
        if b is None:
            return None
        b = add(b, ONE)
        base = add(ONE, k)
        return left_subtract(base, b) if base <= b else ZERO

    st.mu = FunctionSeq(mu, "mu", strict=True, sup=lambda lam: seq_sup(xi, add(ONE, add(k, lam))),
                        bound_hint=mu_hint)
    st.nu = FunctionSeq(nu, "nu", strict=True, sup=lambda lam: mul(OMEGA_PLUS_ONE, add(k, lam)))
    mu0 = st.theta_psi(st.chi)
    if mu(ZERO) != mu0:
        raise FactorizationError("gamma", f"mu_0 = {_ord(mu(ZERO))} differs from theta.psi_H(chi) = {_ord(mu0)}")
    sec.lines.append(f"block of chi: {_ord(k)}")
    sec.lines.append(f"mu_0 = theta.psi_H(chi) = {_ord(mu0)}")
    sec.lines.append(f"mu_W = {_ord(mu(OMEGA1))}")
    psi_M = inverse_map(st.mu, "psi_M")
    nu_hat = MonotoneMap(lambda s: _cell_value(st.nu, s), lambda t: _least_cell(st.nu, t), name="nu_hat")
    st.U_M = comp(StepFunction.constant(1), psi_M).named("U_M")
    st.V_N = comp(StepFunction.constant(1), nu_hat).named("V_N")
    prev = None
    n = 0
    for s in ver.points(ver.generators):
        pair = ver.guard(s, lambda: (st.T5.apply(st.U_M.apply(StepFunction.generator(s))), nu(s), mu(s)))
        if pair is None:
            continue
        img, v, m = pair
        if img != StepFunction.generator(v):
            raise FactorizationError("gamma", f"T5 1_[0, mu_{_ord(s)}] is {img.to_text()}, expected 1_[0, {_ord(v)}]")
        if prev is not None and not prev < v:
            raise FactorizationError("gamma", f"nu is not increasing at {_ord(s)}")
        prev = v
        sec.lines.append(f"s = {_ord(s)}: mu = {_ord(m)}, nu = {_ord(v)}")
        n += 1
    sec.lines.append(f"check: T5 1_[0, mu_s] == 1_[0, nu_s]: {n} generators")
    ver.check("gamma", "V_N T5 U_M == I", st.V_N @ st.T5 @ st.U_M, identity(), sec.lines)
    out.append(sec)


# ---------------------------------------------------------------------------
# S T R = I - F, and removing F


def _shift_maps() -> tuple[PiecewiseMap, PiecewiseMap]:
    """tau(a) = 1 + a and tau'(a) = a - 1 (tau'(0) = 0); both fix every a >= w."""
    tau = PiecewiseMap.from_pieces([(ZERO, None, Shift(ONE))])
    tau_back = PiecewiseMap.from_pieces([(ZERO, ONE, Const(ZERO)), (ONE, None, Shift(ZERO))])
    return tau, tau_back


def hyperplane_isomorphism(p: Ordinal) -> tuple[Operator, Operator]:
    """(J, K) with J an isomorphism of C onto ker eps_p and K J = I.

    J shifts the first w coordinates down by one and corrects by a constant
    so that the value at p vanishes; K shifts back and restores f(0).
    """
    tau, tau_back = _shift_maps()
    one = StepFunction.constant(1)
    tail = StepFunction.indicator(ONE, OMEGA1)
    if p.is_zero:
        J = comp(tail, tau_back)
        K = comp(one, tau)
    else:
        J = comp(one, tau_back) - tensor(tail, _eps(tau_back(p)))
        K = comp(one, tau) + tensor(one, _eps(ZERO) + _eps(ONE) * -1)
    return J, K


def _rank_one(F: Operator) -> Optional[tuple[StepFunction, Ordinal]]:
    """(h, p) when F = h (x) eps_p, else None."""
    if F.terms == ():
        return None
    if len(F.terms) != 1 or not hasattr(F.terms[0], "mu") or len(F.terms[0].mu.points()) != 1:
        raise FactorizationError("fredholm_upgrade", "only rank-one F = h (x) eps_p is handled")
    t = F.terms[0]
    (p, c), = t.mu.coeffs.items()
    return t.g * c, p


def fredholm_upgrade(S: Operator, T: Operator, R: Operator, F: Operator,
                     check: Optional[Callable[[str, Operator, Operator], None]] = None):
    """(S', R', note) with S' T R' = I, given S T R = I - F.

    F = h (x) eps_p.  If h(p) != 1 then I - F is invertible with inverse
    I + F / (1 - h(p)), and S' = (I - F)^-1 S.  If h(p) = 1 then I - F is
    the projection onto ker eps_p; with J, K from ``hyperplane_isomorphism``
    K (I - F) J = K J = I, so S' = K S and R' = R J.
    """
    data = _rank_one(F)
    if data is None:
        return S, R, "F = 0"
    h, p = data
    hp = h(p)
    if hp != 1:
        inv = identity() + F.scale(1 / (1 - hp))
        if check is not None:
            check("(I + F/(1 - h(p))) (I - F) == I", inv @ (identity() - F), identity())
        return inv @ S, R, f"I - F inverted (h(p) = {hp})"
    J, K = hyperplane_isomorphism(p)
    if check is not None:
        check("K J == I", K @ J, identity())
        check("(I - F) J == J", (identity() - F) @ J, J)
    return K @ S, R @ J, f"hyperplane shift at {_ord(p)} (h(p) = 1)"


def _stage_final(st: FactorizationState, ver: Verifier, out: list):
    sec = Section("factor")
    S = (st.V_N @ st.Q @ st.Psi).scale(1 / st.c)
    R = (identity() - proj(st.rho)) @ st.Phi @ st.U_M
    h = S.apply(st.g) * -1
    F = tensor(h, _eps(OMEGA1))
    sec.lines.append(f"F: {_text(F)}")
    ver.check("factor", "S T R == I - F", S @ st.T @ R, identity() - F, sec.lines)
    out.append(sec)
    sec = Section("fredholm_upgrade")

    def check(label, A, B):
        ver.check("fredholm_upgrade", label, A, B, sec.lines)

    S2, R2, note = fredholm_upgrade(S, st.T, R, F, check)
    sec.lines.append(f"upgrade: {note}")
    ver.check("fredholm_upgrade", "S' T R' == I", S2 @ st.T @ R2, identity(), sec.lines)
    out.append(sec)
    return S2.named("S"), R2.named("R"), F


def factorize(T: Operator, truncate: Ordinal = DEFAULT_TRUNCATION, text: Optional[str] = None,
              generators=()) -> FactorizationCertificate:
    """Run every stage and return the certificate (raises FactorizationError)."""
    st = FactorizationState(T)
    ver = Verifier(_generators(T, generators), truncate)
    sections = [Section("generators", ["sigma: " + ", ".join(_ord(s) for s in ver.generators)])]
    try:
        _stage_reductions(st, sections)
        _stage_recursion(st, ver, sections)
        _stage_phi(st, ver, sections)
        _stage_H(st, ver, sections)
        _stage_T3(st, ver, sections)
        _stage_T5(st, ver, sections)
        _stage_gamma(st, ver, sections)
        S, R, F = _stage_final(st, ver, sections)
    except (SupError, SearchError) as exc:
        raise FactorizationError("engine", f"symbolic evaluation failed within the bound: {exc}") from exc
    defect = st.recursion.monotonicity_defect()
    if defect is not None:
        raise FactorizationError("eta_xi", f"monotonicity fails: {defect}")
    next(x for x in sections if x.name == "eta_xi").lines.append(f"check: eta_t + w < eta_s and xi_t < xi_s on {len(st.recursion.xi_memo)} evaluated points")
    if ver.skipped:
        sections[0].lines.append("skipped above bound: " + ", ".join(_ord(s) for s in sorted(ver.skipped)))
    return FactorizationCertificate(text if text is not None else _text(T), S, R, F, ver.mode, truncate,
                                    sections, exact=True, state=st)
