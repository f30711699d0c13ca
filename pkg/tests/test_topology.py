import random

import pytest
from fractions import Fraction
from hypothesis import given, settings
from hypothesis import strategies as st

from ordop.ordinal import OMEGA, OMEGA1, ONE, ZERO, add, mul, nat, omega_pow, parse_ordinal
from ordop.topology.closed_sets import (BlockFamily, ClosedSetExpr, NotClosedError, is_closed, iso_defect,
                                        order_iso, order_iso_map)
from ordop.topology.maps import MonotoneMap, PiecewiseMap, identity_map, merge_intervals
from ordop.topology.search import divide, least_true
from ordop.topology.sequences import (SAdd, SCases, SConst, SMul, SPow, SupError, SVar, seq_inverse, seq_sup,
                                      stabilized_sup)
from ordop.topology.steps import StepFunction

from gen import closed_set_cases, continuous_map, continuous_step, grid, small_ordinal
from oracles import naive_closed
from strategies import ordinals

P = parse_ordinal
SAMPLES = grid(3) + [P("w^w"), OMEGA1]
seeds = st.integers(0, 2**32 - 1)


class TestStepFunctions:
    def test_generator_and_support(self):
        f = StepFunction.generator(OMEGA)
        assert f(nat(7)) == 1 and f(add(OMEGA, ONE)) == 0
        assert f.support_sup() == OMEGA and f.support_min() == ZERO
        assert StepFunction.constant(0).support_min() is None

    def test_text_round_trip(self):
        f = StepFunction.from_text("[0, w] -> 2 | [w + 1, W) -> -1/2 | [W, W] -> 3")
        assert StepFunction.from_text(f.to_text()) == f
        assert f.left_limit_at_top() == Fraction(-1, 2)

    def test_discontinuity_only_at_limit_starts(self):
        assert StepFunction.generator(nat(5)).discontinuity() is None
        jump = StepFunction.on_interval(OMEGA, None)
        assert jump.discontinuity() == OMEGA
        assert StepFunction.point(OMEGA1).discontinuity() == OMEGA1
        assert StepFunction.point(OMEGA1).discontinuity(include_top=False) is None

    def test_replace_at_top(self):
        f = StepFunction.constant(1).replace_at_top(0)
        assert f(OMEGA1) == 0 and f(P("w^w")) == 1

    def test_bad_tiling_rejected(self):
        with pytest.raises(ValueError):
            StepFunction.from_pieces([(ZERO, OMEGA, 1)])

    @given(seeds, seeds)
    def test_algebra_is_pointwise(self, s1, s2):
        f, g = continuous_step(random.Random(s1)), continuous_step(random.Random(s2))
        for a in SAMPLES:
            assert (f + g)(a) == f(a) + g(a)
            assert (f * g)(a) == f(a) * g(a)
            assert (f - g)(a) == f(a) - g(a)

    @given(seeds, seeds)
    def test_compose_is_pointwise(self, s1, s2):
        f, phi = continuous_step(random.Random(s1)), continuous_map(random.Random(s2))
        fc = f.compose(phi)
        for a in SAMPLES:
            assert fc(a) == f(phi(a))

    @given(seeds)
    def test_continuous_steps_stay_continuous_under_continuous_maps(self, s):
        rng = random.Random(s)
        f, phi = continuous_step(rng), continuous_map(rng)
        assert phi.is_continuous()
        assert f.compose(phi).is_continuous()


class TestMaps:
    def test_shift_and_const(self):
        m = PiecewiseMap.from_text("[0, w] -> const 3 | [w + 1, W] -> w*2 + @ - w")
        assert m(nat(4)) == nat(3)
        assert m(add(OMEGA, ONE)) == P("w*2 + 1")
        assert m(OMEGA1) == OMEGA1
        assert m.discontinuity() is None
        assert PiecewiseMap.from_text(m.to_text()) == m

    def test_discontinuous_map(self):
        m = PiecewiseMap.from_text("[0, w) -> const 0 | [w, W] -> @")
        assert m.discontinuity() == OMEGA

    def test_merge_intervals(self):
        assert merge_intervals([(ZERO, nat(3)), (nat(3), OMEGA), (add(OMEGA, ONE), None)]) == \
            [(ZERO, OMEGA), (add(OMEGA, ONE), None)]

    @given(seeds, seeds)
    def test_then_is_composition(self, s1, s2):
        a, b = continuous_map(random.Random(s1)), continuous_map(random.Random(s2))
        ab = a.then(b)
        for x in SAMPLES:
            assert ab(x) == b(a(x))

    @given(seeds)
    def test_preimage_matches_values(self, s):
        rng = random.Random(s)
        m = continuous_map(rng)
        lo = small_ordinal(rng)
        hi = add(lo, rng.choice([ONE, OMEGA, P("w^2")]))
        ivs = m.preimage(lo, hi)
        for x in SAMPLES:
            inside = any(a <= x and (e is None or x < e) for a, e in ivs)
            assert inside == (lo <= m(x) < hi)

    def test_monotone_map_threshold(self):
        m = MonotoneMap(lambda a: mul(OMEGA, a) if not a.top else OMEGA1,
                        lambda t: least_true(lambda x: mul(OMEGA, x) >= t, t), name="times_w")
        assert m.threshold(add(OMEGA, ONE)) == nat(2)
        assert m.preimage(OMEGA, P("w*3")) == [(ONE, nat(3))]
        assert identity_map().then(m) is m


class TestSearch:
    @given(ordinals(max_terms=3), ordinals(max_terms=3))
    def test_least_true_finds_threshold(self, a, t):
        # tight(lam): every x below lam fails, i.e. t + lam <= a by continuity
        found = least_true(lambda x: add(t, x) >= a, max(a, ONE), tight=lambda lam: add(t, lam) <= a)
        # the least x with t + x >= a
        assert add(t, found) >= a
        if not found.is_zero and found.is_successor:
            assert add(t, found.predecessor()) < a

    @given(ordinals(max_terms=3), ordinals(max_terms=2).filter(lambda t: not t.is_zero))
    def test_divide(self, alpha, t):
        d, r = divide(alpha, t)
        assert add(mul(t, d), r) == alpha and r < t

    def test_division_hand_values(self):
        assert divide(P("w^2 + 5"), add(OMEGA, ONE)) == (OMEGA, nat(5))
        with pytest.raises(ZeroDivisionError):
            divide(OMEGA, ZERO)


class TestSequences:
    def test_flags(self):
        s = SMul(SConst(OMEGA), SAdd(SVar(), SConst(ONE)))
        assert s.strict and not s.continuous
        assert SMul(SConst(OMEGA), SVar()).continuous

    def test_sup_of_w_times_successor(self):
        s = SMul(SConst(OMEGA), SAdd(SVar(), SConst(ONE)))
        assert seq_sup(s, OMEGA) == P("w^2")
        assert s(OMEGA) == P("w^2 + w")
        assert seq_sup(SPow(SVar()), OMEGA) == P("w^w")

    def test_inverse(self):
        s = SMul(SConst(OMEGA), SAdd(SVar(), SConst(ONE)))
        assert seq_inverse(s, P("w*3 + 7")) == nat(3)
        assert seq_inverse(s, P("w^2")) == OMEGA
        assert seq_inverse(s, OMEGA1) == OMEGA1

    def test_cases(self):
        s = SCases([ZERO, OMEGA], [SAdd(SVar(), SConst(ONE)), SAdd(SConst(OMEGA), SVar())])
        assert s(nat(3)) == nat(4) and s(add(OMEGA, ONE)) == P("w*2 + 1")
        assert s.monotone

    def test_stabilized_sup(self):
        assert stabilized_sup([P("w*3"), P("w*4"), P("w*5")]) == P("w^2")
        assert stabilized_sup([P("w^3"), P("w^4"), P("w^5")]) == P("w^w")
        with pytest.raises(SupError):
            stabilized_sup([P("w"), nat(3)])

    @settings(max_examples=40)
    @given(st.integers(0, 3), st.integers(1, 3), ordinals(max_terms=2))
    def test_inverse_is_least(self, k, c, x):
        s = SAdd(SMul(SConst(omega_pow(nat(c))), SAdd(SVar(), SConst(nat(k)))), SConst(ONE))
        found = seq_inverse(s, x)
        assert s(found) >= x
        if found.is_successor:
            assert s(found.predecessor()) < x


# -- closed sets ---------------------------------------------------------------


@pytest.mark.parametrize("ivs,top", closed_set_cases(40))
def test_is_closed_matches_oracle(ivs, top):
    H = ClosedSetExpr(ivs, with_top=top)
    assert is_closed(H)[0] == naive_closed(ivs, top)


@pytest.mark.parametrize("ivs,top", closed_set_cases(40, seed=1))
def test_enumeration_continuous_iff_closed(ivs, top):
    H = ClosedSetExpr(ivs, with_top=top)
    closed = is_closed(H)[0]
    assert (iso_defect(H, order_iso_map(H)) is None) == closed
    if not closed:
        with pytest.raises(NotClosedError):
            order_iso(H)


class TestFamilies:
    def fam(self, left, top=True):
        return ClosedSetExpr([], BlockFamily(left, OMEGA, lo=ONE), with_top=top)

    def test_continuous_left_end_is_closed(self):
        H = self.fam(SMul(SConst(P("w^2")), SVar()))
        assert is_closed(H) == (True, None)
        psi = order_iso(H)
        assert psi(ZERO) == P("w^2") and psi(add(OMEGA, ONE)) == P("w^2*2")
        assert iso_defect(H, psi) is None

    def test_jumping_left_end_misses_a_limit(self):
        H = self.fam(SMul(SConst(P("w^2")), SAdd(SVar(), SConst(ONE))))
        ok, witness = is_closed(H)
        assert not ok and witness == P("w^3")
        assert iso_defect(H, order_iso_map(H)) is not None

    def test_missing_top(self):
        H = self.fam(SMul(SConst(P("w^2")), SVar()), top=False)
        assert is_closed(H) == (False, OMEGA1)
        assert iso_defect(H, order_iso_map(H)) == OMEGA1

    def test_membership(self):
        H = self.fam(SMul(SConst(P("w^2")), SVar()))
        assert H.contains(P("w^2*3 + 4"))
        assert not H.contains(P("w^2*3 + w + 1"))
        assert H.contains(OMEGA1)

    def test_text(self):
        H = self.fam(SMul(SConst(P("w^2")), SVar()))
        assert H.to_text() == "U_s in [1, W) [(w^(2))*(s), (w^(2))*(s) + w] U {W}"

    def test_non_strict_left_end_rejected(self):
        with pytest.raises(ValueError):
            self.fam(SConst(OMEGA))
