"""Hilbert symbols, local invariants, and the rational isotropy layer."""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wittkit.errors import UnsupportedLocalField, ZeroArgument
from wittkit.fields import QQ, FieldTower, PrimeField, RationalPrime, RealEmbedding
from wittkit.forms import is_isometric, pfister, quadform, scale, witt_data
from wittkit.localglobal import (
    anisotropic_dim_Q,
    anisotropic_part_Q,
    hilbert_symbol,
    is_hyperbolic_Q,
    is_hyperbolic_quadfield,
    is_isotropic_Fp,
    is_isotropic_Q,
    local_invariants,
    places_Q,
    realize_form_Q,
    symbol_support,
    witt_index_Fp,
)

F7 = FieldTower(PrimeField(7))
F13 = FieldTower(PrimeField(13))
REAL = RealEmbedding()


def q(*entries):
    return quadform(QQ, list(entries))


def brute_isotropic_dyadic(a, b, modulus=64):
    """Primitive solutions of ax^2 + by^2 = z^2 modulo a dyadic power."""
    a, b = a % modulus, b % modulus
    for x, y, z in itertools.product(range(modulus), repeat=3):
        if x % 2 == 0 and y % 2 == 0 and z % 2 == 0:
            continue
        if (a * x * x + b * y * y - z * z) % modulus == 0:
            return True
    return False


class TestHilbertSymbol:
    def test_dyadic_spot_values(self):
        assert hilbert_symbol(2, 3, RationalPrime(2)) == -1
        assert hilbert_symbol(-1, -1, RationalPrime(2)) == -1
        assert hilbert_symbol(-1, 7, RationalPrime(2)) == -1
        assert hilbert_symbol(2, 7, RationalPrime(2)) == 1
        assert hilbert_symbol(-1, 17, RationalPrime(2)) == 1

    def test_dyadic_matches_brute_force_sample(self):
        for a, b in [(3, 5), (-1, 3), (2, -5), (6, 14), (-2, -10)]:
            want = brute_isotropic_dyadic(a, b)
            assert (hilbert_symbol(a, b, RationalPrime(2)) == 1) == want

    def test_odd_prime_values(self):
        assert hilbert_symbol(3, 5, RationalPrime(3)) == -1
        assert hilbert_symbol(3, 5, RationalPrime(5)) == -1
        assert hilbert_symbol(3, 5, RationalPrime(7)) == 1
        # unit pairs are invisible at odd places
        assert hilbert_symbol(2, 3, RationalPrime(5)) == 1

    def test_real_place(self):
        assert hilbert_symbol(-2, -3, REAL) == -1
        assert hilbert_symbol(-2, 3, REAL) == 1

    def test_zero_rejected(self):
        with pytest.raises(ZeroArgument):
            hilbert_symbol(0, 3, RationalPrime(2))

    def test_bare_integer_place_rejected(self):
        with pytest.raises(UnsupportedLocalField):
            hilbert_symbol(2, 3, 2)

    def test_support_and_places(self):
        assert symbol_support([6, 10]) == [2, 3, 5]
        places = places_Q([2, 3])
        assert places[0] == REAL
        assert [p.p for p in places[1:]] == [2, 3]


NONZERO = st.integers(min_value=-400, max_value=400).filter(lambda n: n != 0)


@given(NONZERO, NONZERO)
@settings(max_examples=150, deadline=None)
def test_product_formula(a, b):
    assert math_prod(hilbert_symbol(a, b, v) for v in places_Q([a, b])) == 1


@given(NONZERO, NONZERO)
@settings(max_examples=80, deadline=None)
def test_symbol_symmetry(a, b):
    for v in places_Q([a, b]):
        assert hilbert_symbol(a, b, v) == hilbert_symbol(b, a, v)


@given(NONZERO, NONZERO, NONZERO)
@settings(max_examples=60, deadline=None)
def test_symbol_bimultiplicative(a, b, c):
    for v in places_Q([a, b, c]):
        assert hilbert_symbol(a, b * c, v) == hilbert_symbol(a, b, v) * hilbert_symbol(a, c, v)


def math_prod(it):
    out = 1
    for x in it:
        out *= x
    return out


class TestLocalInvariants:
    def test_dim4_torsion_profile(self):
        inv = local_invariants(q(1, -2, 15, -30))
        assert inv.dim == 4
        assert inv.disc.is_one()
        assert sorted((str(k), v) for k, v in inv.hasse.items()) == [
            ("p=2", -1),
            ("p=3", -1),
            ("p=5", -1),
            ("real", -1),
        ]
        assert list(inv.signatures.values()) == [0]

    def test_hasse_at_defaults_to_one(self):
        inv = local_invariants(q(1, -2, 15, -30))
        assert inv.hasse_at(RationalPrime(2)) == -1
        assert inv.hasse_at(RationalPrime(7)) == 1

    def test_definite_signature(self):
        inv = local_invariants(q(1, 1, 1))
        assert list(inv.signatures.values()) == [3]


class TestIsotropyOverQ:
    def test_anisotropic_dims(self):
        assert anisotropic_dim_Q(q(1, 1, 1, 1, 1)) == 5
        assert anisotropic_dim_Q(q(1, -3, -5, 15)) == 4
        assert anisotropic_dim_Q(q(1, 2, -3)) == 1
        assert anisotropic_dim_Q(q(1, -1)) == 0

    def test_dim5_indefinite_is_isotropic(self):
        # five variables with both signs: isotropic at every place
        assert is_isotropic_Q(q(1, 3, 7, -11, -13))

    def test_anisotropic_part_is_witt_equivalent(self):
        ap = anisotropic_part_Q(q(1, 2, -3))
        assert [str(e) for e in ap.entries] == ["6"]

    def test_hyperbolicity(self):
        assert is_hyperbolic_Q(q(1, 1, -2, -2))
        assert not is_hyperbolic_Q(q(1, -3, -5, 15))

    def test_known_isotropic_vector_exists(self):
        # 1*1 + 2*1 - 3*1 = 0
        assert is_isotropic_Q(q(1, 2, -3))


class TestQuadraticExtensions:
    def test_norm_form_splits_over_its_own_root(self):
        assert is_hyperbolic_quadfield(q(1, -2), 2)
        assert not is_hyperbolic_quadfield(q(1, -2), 3)

    def test_sum_of_squares_splits_over_i(self):
        assert is_hyperbolic_quadfield(q(1, 1), -1)

    def test_two_fold_pfister_splits_over_either_slot(self):
        phi = pfister(QQ, [3, 5])
        assert is_hyperbolic_quadfield(phi, 3)
        assert is_hyperbolic_quadfield(phi, 5)

    def test_split_prime_keeps_the_obstruction(self):
        # 7 is a square mod 3, so 3 splits in Q(sqrt(7)) and the local
        # symbol at either factor survives the extension
        phi = pfister(QQ, [3, 5])
        assert not is_hyperbolic_quadfield(phi, 7)
        # 2 stays inert at both 3 and 5; the p-adic division algebra is
        # split by every quadratic extension, so the form dies
        assert is_hyperbolic_quadfield(phi, 2)


class TestFiniteFields:
    def test_binary_isotropy_is_minus_one_squareness(self):
        # -1 is a square mod 13 but not mod 7
        assert not is_isotropic_Fp(quadform(F7, [1, 1]))
        assert is_isotropic_Fp(quadform(F13, [1, 1]))

    def test_dim3_always_isotropic(self):
        assert witt_index_Fp(quadform(F7, [1, 1, 1])) == 1
        for entries in ([1, 3, 3], [3, 5, 6], [1, 1, 3]):
            assert is_isotropic_Fp(quadform(F7, entries))


ENTRIES = st.integers(min_value=-30, max_value=30).filter(lambda n: n != 0)


@given(st.lists(ENTRIES, min_size=1, max_size=4))
@settings(max_examples=60, deadline=None)
def test_isotropy_consistent_with_witt_data(entries):
    phi = quadform(QQ, entries)
    wd = witt_data(phi)
    assert is_isotropic_Q(phi) == (wd.witt_index > 0)
    assert anisotropic_dim_Q(phi) == wd.anisotropic_dim


@given(st.lists(ENTRIES, min_size=1, max_size=3))
@settings(max_examples=40, deadline=None)
def test_realize_inverts_classification(entries):
    phi = quadform(QQ, entries)
    inv = local_invariants(phi)
    det = 1
    for e in phi.entries:
        det *= e.coeff
    from wittkit.numutil import squarefree_part

    hasse = {k: v for k, v in inv.hasse.items() if isinstance(k, RationalPrime) and v == -1}
    sig = next(iter(inv.signatures.values()))
    got = realize_form_Q(phi.dim, squarefree_part(det), hasse, sig, None)
    assert got is not None
    assert is_isometric(quadform(QQ, got), phi)
