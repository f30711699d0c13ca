"""End-to-end acceptance checks.  Each test prints one pass/FAIL line."""

import random
from fractions import Fraction

import pytest

from ordop.factorization import build_phi_xi, build_U, factorize
from ordop.ideals import build_V, decompose_X_plus_G, disjoint_family, in_loy_willis, lemma44_bound, separable_range
from ordop.ordinal import (OMEGA, OMEGA1, ONE, ZERO, Ordinal, add, fundamental_sequence, left_subtract, mul, nat,
                           omega_pow)
from ordop.operators.analysis import boundaries, equal_on, equals, operator_norm, rudin_validate, standard_generators
from ordop.operators.core import compose, identity, proj, proj_tilde
from ordop.operators.text import parse_operator
from ordop.topology.closed_sets import BlockFamily, ClosedSetExpr, NotClosedError, is_closed, iso_defect, \
    order_iso, order_iso_map
from ordop.topology.sequences import SAdd, SConst, SMul, SPow, SVar, stabilized_sup
from ordop.topology.steps import StepFunction

from gen import closed_set_cases, grid_point, random_operator, separable_instance, small_ordinal, support_free_top
from oracles import A, brute_norm, brute_product_entry, in_H, naive_closed, naive_eta_xi

ZERO_OP = identity() - identity()


@pytest.fixture
def report(capsys):
    def emit(name, failures):
        with capsys.disabled():
            status = "pass" if not failures else f"FAIL ({len(failures)}): {failures[0]}"
            print(f"\n{name}: {status}")
        assert not failures, failures[:5]
    return emit


def test_ac1_matrix_clauses_and_norm(report):
    failures = []
    for i in range(100):
        T = random_operator(random.Random(i))
        rep = rudin_validate(T, samples=200, seed=i)
        if not rep.ok:
            failures.append(f"seed {i}: clauses {rep.clauses}")
        n = operator_norm(T)
        if not n.exact or n.value != brute_norm(T):
            failures.append(f"seed {i}: norm {n.value} vs brute {brute_norm(T)}")
    report("AC1", failures)


def test_ac2_product_entries(report):
    failures = []
    rng = random.Random(2)
    for i in range(500):
        S, T = random_operator(rng), random_operator(rng)
        a = small_ordinal(rng, 3)
        g = rng.choice([small_ordinal(rng, 3), OMEGA1])
        got, want = compose(S, T).entry(a, g), brute_product_entry(S, T, a, g)
        if got != want:
            failures.append(f"case {i}: ({a}, {g}) {got} != {want}")
    report("AC2", failures)


# -- Phi_Xi -------------------------------------------------------------------


def xi_family(count: int):
    """(Xi, zeta) pairs: zeta(lam) is the closed-form sup of xi below the limit lam."""
    rng = random.Random(3)
    out = []
    for i in range(count):
        k, m = nat(rng.randint(0, 3)), nat(rng.randint(0, 3))
        if i % 2 == 0:
            a = small_ordinal(rng)
            b = rng.choice([ONE, nat(2), OMEGA, add(OMEGA, ONE), omega_pow(nat(2))])
            xi = SAdd(SAdd(SConst(a), SMul(SConst(b), SAdd(SVar(), SConst(k)))), SConst(m))
            zeta = (lambda lam, a=a, b=b: add(a, mul(b, lam)))
        else:
            xi = SAdd(SPow(SAdd(SVar(), SConst(k))), SConst(m))
            zeta = omega_pow
        out.append((xi, zeta))
    return out


def phi_cases(xi, zeta):
    """(alpha, phi(alpha)) at the ends of every cell with index below w*2 + 4."""
    cases = [(ZERO, xi(ZERO)), (xi(ZERO), xi(ZERO))]
    for base in (ZERO, OMEGA, mul(OMEGA, nat(2))):
        for n in range(6 if base != mul(OMEGA, nat(2)) else 4):
            s = add(base, nat(n))
            lo, hi = add(xi(s), ONE), xi(add(s, ONE))
            cases += [(lo, hi), (hi, hi)]
    for lam in (OMEGA, mul(OMEGA, nat(2))):
        z = zeta(lam)
        cases += [(z, z), (xi(lam), z)]
        if z < xi(lam):
            cases.append((add(z, ONE), z))
    return cases


def tail_norm(coeffs):
    total, best = Fraction(0), Fraction(0)
    for c in reversed(coeffs):
        total += c
        best = max(best, abs(total))
    return best


def test_ac3_phi_xi(report):
    failures = []
    rng = random.Random(33)
    for j, (xi, zeta) in enumerate(xi_family(20)):
        phi, Phi = build_phi_xi(xi)
        if equals(Phi @ Phi, Phi) is not None:
            failures.append(f"Xi {j}: not idempotent")
        n = operator_norm(Phi)
        if not (n.exact and n.value == 1):
            failures.append(f"Xi {j}: norm {n.value}")
        for alpha, target in phi_cases(xi, zeta):
            if phi(alpha) != target or Phi.row(alpha).points() != [target] or Phi.entry(alpha, target) != 1:
                failures.append(f"Xi {j}: row at {alpha} is {Phi.row(alpha)}, want e({target})")
        U = build_U(xi)
        for _ in range(5):
            sig = sorted({small_ordinal(rng) for _ in range(rng.randint(1, 4))})
            cs = [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in sig]
            f = sum((StepFunction.generator(s) * c for s, c in zip(sig, cs)), StepFunction.constant(0))
            image = U(f)
            want = sum((StepFunction.generator(xi(s)) * c for s, c in zip(sig, cs)), StepFunction.constant(0))
            if image != want or image.norm() != tail_norm(cs) or f.norm() != tail_norm(cs):
                failures.append(f"Xi {j}: U not isometric on {list(zip(sig, cs))}")
    report("AC3", failures)


# -- closed sets -----------------------------------------------------------------


def test_ac4_order_iso_continuity(report):
    failures = []
    sets = [(ClosedSetExpr(ivs, with_top=top), naive_closed(ivs, top)) for ivs, top in closed_set_cases(46, seed=4)]
    w2 = omega_pow(nat(2))
    for left, top, closed in [(SMul(SConst(w2), SVar()), True, True),
                              (SMul(SConst(w2), SAdd(SVar(), SConst(ONE))), True, False),
                              (SMul(SConst(w2), SVar()), False, False),
                              (SMul(SConst(OMEGA), SVar()), True, True)]:
        sets.append((ClosedSetExpr([], BlockFamily(left, OMEGA, lo=ONE), with_top=top), closed))
    for j, (H, closed) in enumerate(sets):
        verdict = is_closed(H)[0]
        continuous = iso_defect(H, order_iso_map(H)) is None
        if verdict != closed or continuous != closed:
            failures.append(f"set {j} {H.to_text()}: closed={closed} is_closed={verdict} continuous={continuous}")
        if not closed:
            try:
                order_iso(H)
                failures.append(f"set {j}: order_iso accepted a non-closed set")
            except NotClosedError:
                pass
    report("AC4", failures)


# -- factorization ----------------------------------------------------------------


FACTORIZE = ["I", "2*I", "I + tensor(1; e(W))", "I - P(0) + V", "I + 2*V", "I - P(0) - V"]


def test_ac5_factorization(report):
    failures = []
    for text in FACTORIZE:
        T = parse_operator(text)
        if in_loy_willis(T).verdict:
            failures.append(f"{text}: unexpectedly in M")
            continue
        cert = factorize(T, text=text)
        st = cert.state
        extra = set()
        for op in (T, st.T5):
            try:
                extra |= set(boundaries(op))
            except Exception:
                pass
        gens = standard_generators(extra)
        if equal_on(st.V_N @ st.T5 @ st.U_M, identity(), gens) is not None:
            failures.append(f"{text}: V_N T5 U_M != I")
        if equal_on(cert.S @ T @ cert.R, identity(), gens) is not None:
            failures.append(f"{text}: S T R != I")
        if text == "I":
            table = {ONE: (add(OMEGA, ONE), mul(OMEGA, nat(2))), nat(2): (add(mul(OMEGA, nat(2)), ONE),
                                                                      mul(OMEGA, nat(3)))}
            for s, (e, x) in table.items():
                if (st.eta(s), st.xi(s)) != (e, x):
                    failures.append(f"I: (eta, xi)({s}) = ({st.eta(s)}, {st.xi(s)})")
            if st.eta(OMEGA) != omega_pow(nat(2)):
                failures.append(f"I: eta_w = {st.eta(OMEGA)}")
            naive = naive_eta_xi(st.T2)
            for key, fn in (("eta", st.eta), ("xi", st.xi)):
                for s, v in naive[key].items():
                    if fn(s) != v:
                        failures.append(f"I: {key}({s}) = {fn(s)}, enumeration gives {v}")
    report("AC5", failures)


# -- ideals ------------------------------------------------------------------------


def test_ac6_separable_range(report):
    failures = []
    for i in range(50):
        T = separable_instance(i)
        c = separable_range(T)
        if not c.verdict:
            failures.append(f"instance {i}: reported non-separable")
            continue
        P_s = proj_tilde(c.sigma)
        if equals(T, P_s @ T @ P_s) is not None:
            failures.append(f"instance {i}: T != Pt T Pt at {c.sigma}")
    for name, T in (("I", identity()), ("V", build_V())):
        if separable_range(T).verdict:
            failures.append(f"{name} reported separable")
    rng = random.Random(6)
    for i in range(50):
        S = support_free_top(1000 + i)
        zeta, eta = small_ordinal(rng), small_ordinal(rng)
        xi = lemma44_bound(S, zeta, eta)
        if xi < zeta or equals(proj(eta) @ S @ (identity() - proj(xi)), ZERO_OP) is not None:
            failures.append(f"support bound {i}: xi = {xi}")
    V = build_V()
    fam = disjoint_family(V, 10)
    fs = fam.functions
    if not fam.applicable or len(fs) != 10:
        failures.append("disjoint family not produced")
    else:
        if any(f.support_sup() >= g.support_min() for f, g in zip(fs, fs[1:])):
            failures.append("family supports overlap")
        if any(f.norm() > 1 for f in fs):
            failures.append("family member with norm > 1")
        if not fam.epsilon > 0 or any(V.apply(f).norm() < fam.epsilon for f in fs):
            failures.append(f"family epsilon {fam.epsilon} not attained")
    report("AC6", failures)


def random_alpha(rng: random.Random) -> Ordinal:
    exps = [nat(1), nat(3), OMEGA, add(OMEGA, ONE), add(OMEGA, nat(4)), mul(OMEGA, nat(2)),
            add(mul(OMEGA, nat(2)), ONE), omega_pow(nat(2)), add(omega_pow(nat(2)), ONE), ZERO]
    chosen = sorted(set(rng.sample(exps, rng.randint(1, 3))), reverse=True)
    return Ordinal(tuple((e, rng.randint(1, 3)) for e in chosen))


def test_ac7_V(report):
    failures = []
    V = build_V()
    if not in_loy_willis(V).verdict:
        failures.append("V not in M")
    n = operator_norm(V)
    if not (n.exact and n.value == 2):
        failures.append(f"norm of V is {n.value}")
    rng = random.Random(7)
    alphas = [random_alpha(rng) for _ in range(99)] + [OMEGA1]
    for a in alphas:
        want = StepFunction.constant(0) if in_H(a) else A(a)
        if V.apply(StepFunction.generator(a)) != want:
            failures.append(f"V 1_[0, {a}] wrong")
    probes = standard_generators([omega_pow(mul(OMEGA, nat(2))), add(omega_pow(OMEGA), ONE)])
    for i in range(20):
        T = random_operator(random.Random(700 + i)) + V
        d = decompose_X_plus_G(T)
        if equal_on(d.separable + d.remainder, T, probes) is not None:
            failures.append(f"decomposition {i} does not reassemble")
    report("AC7", failures)


# -- ordinal kernel ----------------------------------------------------------------


def random_cnf(rng: random.Random) -> Ordinal:
    exps = {grid_point(rng.randint(0, 3), rng.randint(0, 3), rng.randint(0, 3)) for _ in range(rng.randint(0, 4))}
    return Ordinal(tuple((e, rng.randint(1, 5)) for e in sorted(exps, reverse=True)))


def all_limits_up_to_w_w():
    out = [omega_pow(OMEGA)]
    terms = [(nat(e), c) for e in range(4, -1, -1) for c in (1, 2)]

    def extend(prefix, start):
        if prefix and prefix[-1][0] != ZERO:
            out.append(Ordinal(tuple(prefix)))
        if len(prefix) == 3:
            return
        for j in range(start, len(terms)):
            e, c = terms[j]
            if prefix and e >= prefix[-1][0]:
                continue
            extend(prefix + [(e, c)], j + 1)
    extend([], 0)
    return out


def test_ac8_ordinal_kernel(report):
    failures = []
    rng = random.Random(8)
    for i in range(10_000):
        a, b, c = random_cnf(rng), random_cnf(rng), random_cnf(rng)
        if add(add(a, b), c) != add(a, add(b, c)):
            failures.append(f"({a} + {b}) + {c}")
        if mul(a, add(b, c)) != add(mul(a, b), mul(a, c)):
            failures.append(f"{a} * ({b} + {c})")
        if mul(mul(a, b), c) != mul(a, mul(b, c)):
            failures.append(f"({a} * {b}) * {c}")
        lo, hi = min(a, b), max(a, b)
        if add(lo, left_subtract(lo, hi)) != hi:
            failures.append(f"{lo} + ({hi} - {lo})")
    for lam in all_limits_up_to_w_w():
        seq = [fundamental_sequence(lam, n) for n in range(8)]
        if not all(x < y for x, y in zip(seq, seq[1:])) or not all(x < lam for x in seq):
            failures.append(f"fundamental sequence of {lam} not increasing below it")
        elif stabilized_sup(seq) != lam:
            failures.append(f"sup of fundamental sequence of {lam} is {stabilized_sup(seq)}")
    report("AC8", failures)
