"""Residue recursion over Laurent towers and the similarity-factor layer."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wittkit import groups
from wittkit.errors import (
    DuplicateIndexSets,
    FieldMismatch,
    UnsupportedExponent,
    UnsupportedField,
)
from wittkit.fields import (
    QQ,
    FieldTower,
    PrimeField,
    canonical_square_class,
    rationals_tower,
)
from wittkit.forms import orthogonal_sum, pfister, quadform, scale
from wittkit.henselian import (
    adjoin_sqrt_odd,
    anisotropic_part_tower,
    base_residue_pieces,
    bhaskhar_sample_check,
    glued_family_reduce,
    is_anisotropic_tower,
    is_hyperbolic_tower,
    odd_simfactor_certificate,
    rigid_norm_group,
    springer_decompose,
    witt_index_tower,
)

QT = rationals_tower("t")
QT2 = rationals_tower("t1", "t2")
F7T = FieldTower(PrimeField(7), ("t",))

NORM_DOUBLE = quadform(QT, ["1", "-2", "t", "-2*t"])


class TestSpringer:
    def test_split_by_top_parity(self):
        d = springer_decompose(NORM_DOUBLE)
        assert [str(e) for e in d.phi1.entries] == ["1", "-2"]
        assert [str(e) for e in d.phi2.entries] == ["1", "-2"]

    def test_even_powers_are_units(self):
        d = springer_decompose(quadform(QT, ["3*t", "5"]))
        assert [str(e) for e in d.phi1.entries] == ["5"]
        assert [str(e) for e in d.phi2.entries] == ["3"]

    def test_base_residue_pieces(self):
        pieces = base_residue_pieces(quadform(QT2, ["1", "-2*t1", "t2", "-3*t1*t2"]))
        flat = {k: [str(e) for e in v.entries] for k, v in pieces.items()}
        assert flat == {(0, 0): ["1"], (1, 0): ["-2"], (0, 1): ["1"], (1, 1): ["-3"]}


class TestTowerDecisions:
    def test_rational_base_values(self):
        assert witt_index_tower(quadform(QT, [1, -1])) == 1
        assert witt_index_tower(NORM_DOUBLE) == 0
        assert is_anisotropic_tower(NORM_DOUBLE)

    def test_hyperbolic_needs_every_residue_split(self):
        assert is_hyperbolic_tower(quadform(QT2, ["1", "-1", "t1", "-t1"]))
        assert not is_hyperbolic_tower(quadform(QT2, ["1", "-1", "t1", "-2*t1"]))

    def test_prime_field_base_values(self):
        # -3 = 4 is a square mod 7; -1 = 6 is not
        assert is_hyperbolic_tower(quadform(F7T, [1, 3]))
        assert witt_index_tower(quadform(F7T, [1, 1])) == 0
        assert witt_index_tower(quadform(F7T, ["1", "t", "3", "3*t"])) == 2

    def test_anisotropic_part(self):
        part = anisotropic_part_tower(quadform(QT, ["1", "-1", "t", "-2*t"]))
        assert sorted(str(e) for e in part.entries) == ["-2*t", "t"]


class TestRigidNorms:
    def test_norm_group_classes(self):
        rg = rigid_norm_group("t", QT)
        assert [str(c) for c in rg.classes] == ["1", "-t"]

    def test_membership_matches_representation(self):
        # c is a norm of <1,-t> iff <1,-t,-c> is isotropic over the tower
        rg = rigid_norm_group("t", QT)
        for u in (1, -1, 2, -2):
            for eps in (0, 1):
                spec = "%d*t" % u if eps else "%d" % u
                c = canonical_square_class(spec, QT)
                probe = quadform(QT, ["1", "-t", str(c.neg())])
                represented = witt_index_tower(probe) > 0
                assert (c in rg.classes) == represented


class TestAdjoinRoot:
    def test_odd_root_rewrites_the_form(self):
        new_field, rewritten = adjoin_sqrt_odd(NORM_DOUBLE, canonical_square_class("t", QT))
        assert new_field.n_steps == 1
        assert [str(e) for e in rewritten.entries] == ["1", "-2", "1", "-2"]
        assert is_hyperbolic_tower(rewritten)

    def test_even_valued_root_rejected(self):
        with pytest.raises(UnsupportedExponent):
            adjoin_sqrt_odd(NORM_DOUBLE, canonical_square_class(2, QT))


class TestOddSimilarityFactor:
    def test_odd_target_single_part(self):
        cert = odd_simfactor_certificate(NORM_DOUBLE)
        assert cert and len(cert.parts) == 1
        assert [str(r) for r in cert.parts[0].tower.roots] == ["-t"]
        assert groups.verify_certificate(cert, NORM_DOUBLE).ok

    def test_even_target_two_parts(self):
        cert = odd_simfactor_certificate(NORM_DOUBLE, canonical_square_class(2, QT))
        assert len(cert.parts) == 2
        assert groups.verify_certificate(cert, NORM_DOUBLE).ok

    def test_no_odd_factor_reports_reason(self):
        missing = odd_simfactor_certificate(quadform(QT, [1, 1]))
        assert not missing
        assert "odd-valued" in missing.reason


class TestGluedFamilies:
    def test_odd_factor_refutes(self):
        rep = glued_family_reduce(
            [quadform(QQ, [1]), quadform(QQ, [1])], [(), (0,)], rationals_tower("t1")
        )
        assert rep.verdict == "refuted"
        assert str(rep.refuting_factor) == "t1"

    def test_difference_of_two_fold_pfisters_proves(self):
        comps = [pfister(QQ, [1]), pfister(QQ, [2]), pfister(QQ, [3]), pfister(QQ, [6])]
        rep = glued_family_reduce(comps, [(), (0,), (1,), (0, 1)], QT2)
        assert rep.verdict == "proved"
        assert rep.dim_anisotropic == 6

    def test_binary_survivor_stays_open(self):
        rep = glued_family_reduce(
            [pfister(QQ, [1]), pfister(QQ, [2])], [(), (0,)], rationals_tower("t1")
        )
        assert rep.verdict == "undetermined"

    def test_duplicate_index_sets_rejected(self):
        with pytest.raises(DuplicateIndexSets):
            glued_family_reduce(
                [quadform(QQ, [1]), quadform(QQ, [1])], [(0,), (0,)], rationals_tower("t1")
            )

    def test_out_of_range_index_rejected(self):
        with pytest.raises(UnsupportedField):
            glued_family_reduce([quadform(QQ, [1])], [(3,)], rationals_tower("t1"))

    def test_component_field_must_match_base(self):
        with pytest.raises(FieldMismatch):
            glued_family_reduce([quadform(QT, [1])], [()], QT2)

    def test_transport_membership(self):
        comps = [pfister(QQ, [1]), pfister(QQ, [2]), pfister(QQ, [3]), pfister(QQ, [6])]
        rep = glued_family_reduce(comps, [(), (0,), (1,), (0, 1)], QT2)
        # -1 multiplies every component into itself over Q, so it transports
        assert rep.in_G_transported(-1) == groups.in_G_tuple(-1, comps)


class TestSampleAudit:
    def test_valid_samples_pass(self):
        phi = quadform(QQ, [1, -2])
        ok = bhaskhar_sample_check(
            phi, pfister(QQ, [2]), [(2, (1, 1), -1), (2, (3, 2), 1), (2, (2, 1), 2)]
        )
        assert ok

    def test_wrong_norm_class_fails(self):
        phi = quadform(QQ, [1, -2])
        assert not bhaskhar_sample_check(phi, pfister(QQ, [2]), [(2, (1, 1), 3)])

    def test_non_splitting_root_fails(self):
        phi = quadform(QQ, [1, -2])
        assert not bhaskhar_sample_check(phi, pfister(QQ, [3]), [(2, (1, 1), -1)])

    def test_tower_input_rejected(self):
        with pytest.raises(FieldMismatch):
            bhaskhar_sample_check(quadform(QT, [1]), quadform(QT, [1]), [])


UNIT = st.sampled_from([1, 2, 3, 5, 6, -1, -2, -3])
EXP = st.tuples(st.integers(0, 1), st.integers(0, 1))


@st.composite
def monomial_forms(draw, field=QT2, size=4):
    entries = []
    n = draw(st.integers(min_value=1, max_value=size))
    for _ in range(n):
        u = draw(UNIT)
        e1, e2 = draw(EXP)
        spec = str(u)
        if e1:
            spec += "*t1"
        if e2:
            spec += "*t2"
        entries.append(spec)
    return quadform(field, entries)


@given(monomial_forms())
@settings(max_examples=60, deadline=None)
def test_witt_index_invariant_under_rescale_and_permutation(phi):
    base = witt_index_tower(phi)
    assert witt_index_tower(scale(-3, phi)) == base
    assert witt_index_tower(quadform(phi.field, list(reversed(phi.entries)))) == base


@given(monomial_forms(size=3))
@settings(max_examples=40, deadline=None)
def test_doubling_with_negation_goes_hyperbolic(phi):
    assert is_hyperbolic_tower(orthogonal_sum(phi, scale(-1, phi)))


@given(monomial_forms(size=3))
@settings(max_examples=40, deadline=None)
def test_springer_additivity(phi):
    d = springer_decompose(phi)
    lifted1 = quadform(phi.field, [str(e) for e in d.phi1.entries])
    lifted2 = quadform(phi.field, [str(e) + "*" + phi.field.steps[-1] for e in d.phi2.entries])
    assert witt_index_tower(phi) == witt_index_tower(lifted1) + witt_index_tower(lifted2)
