"""Field towers, square classes, and element plumbing."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wittkit.errors import FieldMismatch, UnsupportedField, ZeroElement
from wittkit.fields import (
    QQ,
    FieldTower,
    MonomialElement,
    PrimeField,
    RationalFunction,
    Rationals,
    SquareClass,
    canonical_square_class,
    gf2_rank,
    is_square,
    minus_one_class,
    multiquad_degree,
    one_class,
    parse_element,
    parse_field_spec,
    rationals_tower,
    valuation,
)

QT2 = rationals_tower("t1", "t2")
F7 = FieldTower(PrimeField(7))
QS = FieldTower(RationalFunction("s"))


class TestTowerShape:
    def test_str_forms(self):
        assert str(QQ) == "Q"
        assert str(QT2) == "Q[[t1]][[t2]]"
        assert str(FieldTower(PrimeField(7), ("t",))) == "F7[[t]]"
        assert str(QS) == "Q(s)"

    def test_step_accessors(self):
        assert QT2.n_steps == 2
        assert QT2.drop_top() == rationals_tower("t1")
        assert QT2.base_only() == QQ
        assert QQ.n_steps == 0

    def test_parse_round_trip(self):
        for spec in ("Q", "Q[[t1]][[t2]]", "F7", "F13[[u]]", "Q(s)", "Q(x)[[t]]"):
            assert str(parse_field_spec(spec)) == spec

    def test_even_characteristic_rejected(self):
        with pytest.raises(UnsupportedField):
            PrimeField(2)


class TestSquareClasses:
    def test_rational_squarefree_reduction(self):
        # 8/9 = 2 * (2/3)^2, 18 = 2 * 9, -4/25 = -1 * (2/5)^2
        assert canonical_square_class(Fraction(8, 9), QQ).coeff == 2
        assert canonical_square_class(18, QQ).coeff == 2
        assert canonical_square_class(Fraction(-4, 25), QQ).coeff == -1

    def test_bare_value_needs_field(self):
        with pytest.raises(FieldMismatch):
            canonical_square_class(Fraction(8, 9))

    def test_zero_rejected(self):
        with pytest.raises(ZeroElement):
            canonical_square_class(0, QQ)

    def test_uniformizer_class_is_involutive(self):
        t1 = SquareClass(QT2, Fraction(1), (1, 0))
        assert str(t1) == "t1"
        assert t1.times(t1).is_one()

    def test_exponents_reduced_mod_two(self):
        c = SquareClass(QT2, Fraction(3), (2, 3))
        assert c.exps == (0, 1)

    def test_group_operations(self):
        two = canonical_square_class(2, QQ)
        assert two.neg().coeff == -2
        # 1/2 and 2 land in the same square class
        assert canonical_square_class(Fraction(1, 2), QQ) == two

    def test_prime_field_squares(self):
        # squares mod 7 are {1, 2, 4}
        assert is_square(2, F7)
        assert not is_square(3, F7)
        assert is_square(9, F7)

    def test_function_field_polynomial_class(self):
        k = canonical_square_class("s^2+8", QS)
        assert str(k) == "(s^2+8)"
        assert k.times(k).is_one()

    def test_unit_classes(self):
        assert one_class(QQ).is_one()
        assert minus_one_class(QQ).coeff == -1
        assert minus_one_class(QQ).times(minus_one_class(QQ)).is_one()


class TestElements:
    def test_parse_and_print(self):
        e = parse_element("3*t1", QT2)
        assert str(e) == "3*t1"
        assert e.exps == (1, 0)

    def test_valuation_ladder(self):
        v = valuation(MonomialElement(QT2, Fraction(3, 2), (1, 2)))
        assert v.value == (1, 2)
        # angular part: 3/2 = 6 / 2^2
        assert v.angular.coeff == 6

    def test_times_accumulates_exponents(self):
        a = MonomialElement(QT2, Fraction(2), (1, 0))
        b = MonomialElement(QT2, Fraction(3), (0, 1))
        ab = a.times(b)
        assert ab.coeff == 6 and ab.exps == (1, 1)

    def test_neg(self):
        a = MonomialElement(QT2, Fraction(2), (1, 0))
        assert a.neg().coeff == -2 and a.neg().exps == (1, 0)


class TestMultiquadDegree:
    def test_independent_primes(self):
        assert multiquad_degree((2, 3, 5), QQ) == 8

    def test_square_factor_collapses(self):
        # 8 = 2 * 4 lies in the class of 2
        assert multiquad_degree((2, 8), QQ) == 2

    def test_dependent_product_collapses(self):
        # 6 = 2 * 3 adds no new class
        assert multiquad_degree((2, 3, 6), QQ) == 4

    def test_prime_field_cap(self):
        # F7* has square index 2, and 3 * 5 = 15 = 1 mod 7
        assert multiquad_degree((3, 5), F7) == 2

    def test_gf2_rank(self):
        assert gf2_rank([(1, 0), (0, 1), (1, 1)]) == 2
        assert gf2_rank([]) == 0


SQUAREFREE_COEFFS = st.integers(min_value=-300, max_value=300).filter(lambda n: n != 0)


@given(SQUAREFREE_COEFFS)
@settings(max_examples=100, deadline=None)
def test_square_class_squares_to_one(n):
    c = canonical_square_class(n, QQ)
    assert c.times(c).is_one()


@given(SQUAREFREE_COEFFS)
@settings(max_examples=100, deadline=None)
def test_canonicalization_idempotent(n):
    c = canonical_square_class(n, QQ)
    assert canonical_square_class(c, QQ) == c
    # multiplying by a square does not move the class
    assert canonical_square_class(n * 49, QQ) == c


@given(st.lists(SQUAREFREE_COEFFS, min_size=1, max_size=5))
@settings(max_examples=60, deadline=None)
def test_multiquad_degree_is_a_power_of_two(values):
    d = multiquad_degree(values, QQ)
    assert d & (d - 1) == 0
    assert d <= 2 ** len(values)
