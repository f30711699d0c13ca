import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ordop.ordinal import OMEGA, OMEGA1, ONE, ZERO, add, nat, parse_ordinal
from ordop.operators.analysis import (boundaries, col_support_sup, equals, operator_norm, row_support_sup,
                                      rudin_validate)
from ordop.operators.canonical import refine
from ordop.operators.core import Functional, compose, identity, proj, proj_tilde, zero
from ordop.operators.text import operator_to_text, parse_operator
from ordop.topology.steps import StepFunction

from gen import grid, random_operator, small_ordinal
from oracles import brute_norm, brute_product_entry, brute_sup_norm

P = parse_ordinal
seeds = st.integers(0, 2**32 - 1)
POINTS = grid(3) + [P("w^w"), OMEGA1]


def op(seed):
    return random_operator(random.Random(seed))


class TestBasics:
    def test_projections(self):
        f = StepFunction.constant(1)
        assert proj(OMEGA).apply(f) == StepFunction.generator(OMEGA)
        g = proj_tilde(OMEGA).apply(StepFunction.point(OMEGA1, 3))
        # Pt keeps the value at W on (sigma, W]
        assert g(nat(2)) == 0 and g(add(OMEGA, ONE)) == 3 and g(OMEGA1) == 3

    def test_norms(self):
        assert operator_norm(proj_tilde(OMEGA)).value == 1
        assert operator_norm(identity().scale(2) - proj(ZERO)).value == 2
        assert operator_norm(zero()).value == 0

    def test_tail_sum_norm_of_generator_combination(self):
        f = StepFunction.generator(OMEGA) * 2 - StepFunction.generator(P("w^2"))
        assert f.norm() == 1

    def test_entries_rows_columns(self):
        T = parse_operator("I + tensor([0, w] -> 1 | [w + 1, W] -> 0; 2*e(w^2))")
        assert T.entry(nat(3), P("w^2")) == 2
        assert T.row(nat(3)) == Functional({nat(3): 1, P("w^2"): 2})
        assert T.column(P("w^2")) == StepFunction.from_text("[0, w] -> 2 | [w + 1, w^2] -> 0 | "
                                                             "[w^2 + 1, W] -> 0") + StepFunction.point(P("w^2"))

    def test_support_sups(self):
        T = parse_operator("I + tensor([0, w] -> 1 | [w + 1, W] -> 0; e(w^2))")
        assert row_support_sup(T, nat(5)) == P("w^2")
        assert row_support_sup(T, P("w + 1")) == P("w^2")
        assert col_support_sup(T, P("w^2")) == P("w^2")
        assert col_support_sup(T, nat(4)) == nat(4)

    def test_boundaries(self):
        T = parse_operator("P(w) + tensor(1; e(w*2))")
        assert {ZERO, add(OMEGA, ONE), P("w*2"), OMEGA1} <= set(boundaries(T))

    def test_equals_reports_witness(self):
        d = equals(proj(OMEGA), proj(add(OMEGA, ONE)))
        assert d is not None and d.alpha == add(OMEGA, ONE)
        assert equals(proj(OMEGA) @ proj(OMEGA), proj(OMEGA)) is None

    def test_refine_covers_everything(self):
        pieces = refine(parse_operator("I - P(w) + tensor(1; e(3))"))
        assert pieces[0].start == ZERO
        assert all(a.start < b.start for a, b in zip(pieces, pieces[1:]))


class TestText:
    def test_round_trip_examples(self):
        for text in ["I", "0", "2*P(w) - Pt(w^2)", "comp([0, 3] -> 1 | [4, W] -> -1/2; [0, W] -> const w*2)",
                     "tensor(1; e(W) - 2*e(w))", "(P(w)).(I + P(0))"]:
            T = parse_operator(text)
            assert equals(parse_operator(operator_to_text(T)), T) is None

    def test_lazy_named_map(self):
        T = parse_operator("comp(1; <phi_H>)")
        assert T(StepFunction.generator(P("w^w")))(nat(3)) == 1
        assert "<phi_H>" in operator_to_text(T)

    @pytest.mark.parametrize("bad,pos", [("P(w", 3), ("I +", 3), ("comp(1 id)", 9), ("Q", 0)])
    def test_errors_have_positions(self, bad, pos):
        from ordop.ordinal import OrdinalSyntaxError
        with pytest.raises(OrdinalSyntaxError) as exc:
            parse_operator(bad)
        assert exc.value.position == pos

    @given(seeds)
    def test_random_round_trip(self, s):
        T = op(s)
        assert equals(parse_operator(operator_to_text(T)), T) is None


class TestAlgebra:
    @given(seeds, seeds)
    def test_compose_is_application(self, s1, s2):
        S, T = op(s1), op(s2)
        ST = compose(S, T)
        for sigma in (ZERO, nat(2), OMEGA, add(OMEGA, ONE), P("w^2*2"), OMEGA1):
            f = StepFunction.generator(sigma)
            assert ST.apply(f) == S.apply(T.apply(f))

    @given(seeds, seeds, seeds)
    def test_product_entries_are_row_sums(self, s1, s2, s3):
        S, T = op(s1), op(s2)
        rng = random.Random(s3)
        a, g = small_ordinal(rng, 3), rng.choice([small_ordinal(rng, 3), OMEGA1])
        assert compose(S, T).entry(a, g) == brute_product_entry(S, T, a, g)

    @given(seeds, seeds)
    def test_linearity(self, s1, s2):
        S, T = op(s1), op(s2)
        f = StepFunction.generator(OMEGA) - StepFunction.generator(P("w^2")) * 3
        assert (S + T).apply(f) == S.apply(f) + T.apply(f)
        assert S.scale(Fraction(1, 3)).apply(f) == S.apply(f) * Fraction(1, 3)

    @settings(max_examples=25, deadline=None)
    @given(seeds)
    def test_norm_is_max_row_sum(self, s):
        T = op(s)
        assert operator_norm(T).value == brute_norm(T)

    @given(seeds, seeds)
    def test_norm_bounds_images(self, s1, s2):
        T = op(s1)
        rng = random.Random(s2)
        f = StepFunction.generator(small_ordinal(rng)) - StepFunction.generator(small_ordinal(rng)) * 2
        n = operator_norm(T).value
        assert brute_sup_norm(T.apply(f), POINTS) <= n * f.norm()


class TestMatrixClauses:
    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_class_operators_pass(self, s):
        assert rudin_validate(op(s), samples=50, seed=s).ok

    def test_discontinuous_composition_fails_column_clause(self):
        T = parse_operator("comp(1; [0, w) -> const 0 | [w, W] -> @)")
        rep = rudin_validate(T, samples=20)
        assert not rep.clauses["ii"]
        assert "jumps at w" in rep.witnesses["ii"]

    def test_top_column_limit_reported(self):
        rep = rudin_validate(identity(), samples=10)
        assert rep.ok and rep.top_column_limit == 0 and rep.norm == 1
