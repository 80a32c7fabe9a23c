"""Diagonal quadratic forms, Pfister builders, and form invariants."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wittkit.errors import DegenerateGram, ZeroSlot
from wittkit.fields import QQ, FieldTower, PrimeField, rationals_tower
from wittkit.forms import (
    brauer_from_symbols,
    clifford_class,
    diagonalize_gram,
    discriminant,
    height_le1,
    hyperbolic,
    in_In,
    is_isometric,
    karpenko_bound,
    orthogonal_sum,
    parse_form_expr,
    pfister,
    quadform,
    scale,
    tensor,
    witt_data,
)

QT = rationals_tower("t1")


def q(*entries):
    return quadform(QQ, list(entries))


class TestConstruction:
    def test_entries_are_canonical_classes(self):
        phi = q(8, Fraction(1, 2), -18)
        assert [str(e) for e in phi.entries] == ["2", "2", "-2"]
        assert phi.dim == 3

    def test_empty_form(self):
        assert q().dim == 0

    def test_orthogonal_sum_and_scale(self):
        phi = orthogonal_sum(q(1, -2), q(3))
        assert [str(e) for e in phi.entries] == ["1", "-2", "3"]
        assert [str(e) for e in scale(-1, phi).entries] == ["-1", "2", "-3"]

    def test_tensor_matches_pfister(self):
        assert is_isometric(tensor(pfister(QQ, [2]), pfister(QQ, [3])), pfister(QQ, [2, 3]))

    def test_parse_form_expr(self):
        assert parse_form_expr("<1,-2,15,-30>", QQ).entries == q(1, -2, 15, -30).entries


class TestPfister:
    def test_one_fold_shape(self):
        # <<a>> = <1, -a>, hyperbolic exactly over the sqrt(a) extension
        assert [str(e) for e in pfister(QQ, [2]).entries] == ["1", "-2"]

    def test_two_fold_shape(self):
        assert [str(e) for e in pfister(QQ, [2, 3]).entries] == ["1", "-2", "-3", "6"]

    def test_dimension_doubles_per_slot(self):
        assert pfister(QQ, [2, 3, 5]).dim == 8

    def test_zero_slot_rejected(self):
        with pytest.raises(ZeroSlot):
            pfister(QQ, [2, 0])

    def test_string_slots_over_tower(self):
        phi = pfister(QT, ["t1"])
        assert [str(e) for e in phi.entries] == ["1", "-t1"]


class TestInvariants:
    def test_discriminant_signed(self):
        # dim 2 carries the sign (-1)^(n(n-1)/2)
        assert str(discriminant(q(1, 1))) == "-1"
        assert discriminant(q(1, -2, 15, -30)).is_one()

    def test_witt_data_hyperbolic(self):
        wd = witt_data(q(1, 1, -2, -2))
        assert wd.witt_index == 2 and wd.anisotropic_dim == 0

    def test_witt_data_anisotropic(self):
        # <<3,5>>: the quaternion symbol (3,5) ramifies at 3
        wd = witt_data(q(1, -3, -5, 15))
        assert wd.witt_index == 0 and wd.anisotropic_dim == 4

    def test_isometry_binary(self):
        # <1,-2> represents -1 = 1 - 2, so it matches <-1,2>
        assert is_isometric(q(1, -2), q(-1, 2))
        assert not is_isometric(q(1, 2), q(1, -2))

    def test_isometry_needs_equal_dim(self):
        assert not is_isometric(q(1, -1), q(1, -1, 1, -1))

    def test_fundamental_ideal_filtration(self):
        assert in_In(q(1, 1), 1) == "yes"
        assert in_In(q(1, 1), 2) == "no"
        assert in_In(pfister(QQ, [2, 3]), 2) == "yes"
        assert in_In(pfister(QQ, [2, 3]), 3) == "no"

    def test_height_le1(self):
        # trivial discriminant makes a dim-4 form similar to a 2-fold Pfister
        assert height_le1(q(1, -2, 15, -30)) == "yes"
        assert height_le1(q(1, 5, -7, -11)) == "no"

    def test_karpenko_bound(self):
        assert karpenko_bound(14, 3, 2)
        assert not karpenko_bound(6, 3, 2)


class TestCliffordClass:
    def test_hyperbolic_is_trivial(self):
        assert clifford_class(hyperbolic(2, QQ)).is_trivial()

    def test_ramified_symbol_is_not_trivial(self):
        assert not clifford_class(pfister(QQ, [3, 5])).is_trivial()

    def test_scaling_inside_I2_is_invisible(self):
        phi = pfister(QQ, [2, 3])
        assert clifford_class(scale(5, phi)) == clifford_class(phi)

    def test_symbol_order_is_immaterial(self):
        assert brauer_from_symbols(QQ, [(2, 3), (5, 7)]) == brauer_from_symbols(
            QQ, [(5, 7), (2, 3)]
        )

    def test_matches_pfister_symbol(self):
        assert brauer_from_symbols(QQ, [(2, 3)]) == clifford_class(pfister(QQ, [2, 3]))


class TestGram:
    def test_hyperbolic_plane(self):
        phi = diagonalize_gram(QQ, [[0, 1], [1, 0]])
        assert witt_data(phi).witt_index == 1

    def test_off_diagonal_reduction(self):
        phi = diagonalize_gram(QQ, [[2, 1], [1, 2]])
        assert [str(e) for e in phi.entries] == ["2", "6"]

    def test_singular_rejected(self):
        with pytest.raises(DegenerateGram):
            diagonalize_gram(QQ, [[1, 1], [1, 1]])


ENTRIES = st.integers(min_value=-50, max_value=50).filter(lambda n: n != 0)


@given(st.lists(ENTRIES, min_size=1, max_size=5))
@settings(max_examples=80, deadline=None)
def test_witt_decomposition_dimensions(entries):
    phi = quadform(QQ, entries)
    wd = witt_data(phi)
    assert 2 * wd.witt_index + wd.anisotropic_dim == phi.dim
    assert wd.anisotropic_dim >= 0


@given(st.lists(ENTRIES, min_size=1, max_size=4), ENTRIES)
@settings(max_examples=60, deadline=None)
def test_scaling_preserves_witt_index(entries, c):
    phi = quadform(QQ, entries)
    assert witt_data(phi).witt_index == witt_data(scale(c, phi)).witt_index


@given(st.lists(ENTRIES, min_size=2, max_size=4))
@settings(max_examples=60, deadline=None)
def test_form_plus_negation_is_hyperbolic(entries):
    phi = quadform(QQ, entries)
    doubled = orthogonal_sum(phi, scale(-1, phi))
    assert witt_data(doubled).witt_index == phi.dim


@given(st.lists(ENTRIES, min_size=1, max_size=3))
@settings(max_examples=40, deadline=None)
def test_hyperbolic_forms_have_trivial_discriminant(entries):
    # the sign twist in the discriminant exists precisely so this holds
    phi = quadform(QQ, entries)
    doubled = orthogonal_sum(phi, scale(-1, phi))
    assert discriminant(doubled).is_one()
