"""Néron-Severi lattice, generator matrices, and isometry classification."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from k3heights import (
    GramLattice,
    classify_isometry,
    exp_parabolic,
    is_isometry,
    ns_norm_sq,
    parabolic_xi,
    parse_word,
    reduce_word,
    reduced_words,
    wehler_lattice,
    word_matrix,
    word_str,
)
from k3heights.errors import InputError, NonParabolicInput
from k3heights.lattice import char_poly_coeffs, mat_mul, mat_vec, wehler_generator

LAM = 9.0 + 4.0 * math.sqrt(5.0)

words = st.lists(st.integers(min_value=1, max_value=3), min_size=0, max_size=8).map(tuple)


def test_gram_matrix():
    lat = wehler_lattice()
    assert lat.gram == ((0, 2, 2), (2, 0, 2), (2, 2, 0))
    assert lat.ample == (1, 1, 1)
    assert lat.pair((1, 0, 0), (0, 1, 0)) == 2
    assert lat.pair(lat.ample, lat.ample) == 12


def test_signature_rejected():
    with pytest.raises(InputError):
        GramLattice(((1, 0, 0), (0, 1, 0), (0, 0, 1)))


def test_generator_matrices():
    assert wehler_generator(1) == ((-1, 0, 0), (2, 1, 0), (2, 0, 1))
    assert wehler_generator(2) == ((1, 2, 0), (0, -1, 0), (0, 2, 1))
    assert wehler_generator(3) == ((1, 0, 2), (0, 1, 2), (0, 0, -1))
    lat = wehler_lattice()
    for i in (1, 2, 3):
        M = wehler_generator(i)
        assert is_isometry(lat, M)
        assert mat_mul(M, M) == ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def test_word_matrix_products():
    assert word_matrix(()) == ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    assert word_matrix((1, 2)) == ((-1, -2, 0), (2, 3, 0), (2, 6, 1))
    assert word_matrix((1, 2, 3)) == ((-1, -2, -6), (2, 3, 10), (2, 6, 15))
    assert word_matrix((1, 2)) == mat_mul(wehler_generator(1), wehler_generator(2))


def test_not_isometry_detected():
    lat = wehler_lattice()
    assert not is_isometry(lat, ((1, 1, 0), (0, 1, 0), (0, 0, 1)))


def test_classify_finite():
    lat = wehler_lattice()
    cls = classify_isometry(lat, word_matrix(()))
    assert cls.kind == "finite"
    assert classify_isometry(lat, wehler_generator(2)).kind == "finite"


def test_classify_parabolic_translation():
    lat = wehler_lattice()
    M = word_matrix((1, 2))
    cls = classify_isometry(lat, M)
    assert cls.kind == "parabolic"
    assert cls.E == (0, 0, 1)
    assert cls.xi == (-1, 1, 0)
    assert ns_norm_sq(lat, M) == 4
    # xi is well defined mod E: -h1 + h2 up to a multiple of h3
    diff = tuple(a - b for a, b in zip(cls.xi, (-1, 1, 0)))
    assert diff[0] == 0 and diff[1] == 0


def test_exp_parabolic_round_trip():
    lat = wehler_lattice()
    for w in ((1, 2), (1, 3), (2, 3), (2, 1), (1, 2, 1, 2)):
        M = word_matrix(w)
        E, xi = parabolic_xi(lat, M)
        assert exp_parabolic(lat, E, xi) == M


def test_parabolic_xi_rejects_hyperbolic():
    lat = wehler_lattice()
    with pytest.raises(NonParabolicInput):
        parabolic_xi(lat, word_matrix((1, 2, 3)))


def test_classify_hyperbolic():
    lat = wehler_lattice()
    M = word_matrix((1, 2, 3))
    cls = classify_isometry(lat, M)
    assert cls.kind == "hyperbolic"
    assert abs(cls.lam - LAM) < 1e-12 * LAM
    assert abs(cls.lam * cls.lam - 18.0 * cls.lam + 1.0) < 1e-9 * cls.lam**2
    # expanded/contracted rays are null and eigen within float error
    for ray, ev in ((cls.alpha_plus, cls.lam), (cls.alpha_minus, 1.0 / cls.lam)):
        img = mat_vec(M, ray)
        assert max(abs(img[k] - ev * ray[k]) for k in range(3)) < 1e-9 * ev
        assert abs(lat.pair_float(ray, ray)) < 1e-12


def test_char_poly_invariants():
    # (trace, minor sum, det) of the full three-letter word
    assert char_poly_coeffs(word_matrix((1, 2, 3))) == (17, -17, -1)
    assert char_poly_coeffs(word_matrix((1, 2))) == (3, 3, 1)


def test_word_parsing_and_reduction():
    assert parse_word("1,2,3") == (1, 2, 3)
    assert parse_word("") == ()
    assert word_str((1, 2, 3)) == "1,2,3"
    assert reduce_word((1, 1, 2)) == (2,)
    assert reduce_word((1, 2, 2, 1)) == ()
    with pytest.raises(InputError):
        parse_word("1,4")


def test_reduced_words_counts():
    assert len(reduced_words(0)) == 1
    assert len(reduced_words(1)) == 4
    assert len(reduced_words(2)) == 10
    assert len(reduced_words(3)) == 22
    assert reduced_words(1)[0] == ()


@given(w=words)
@settings(max_examples=80)
def test_word_matrix_is_isometry(w):
    lat = wehler_lattice()
    assert is_isometry(lat, word_matrix(w))


@given(w=words)
@settings(max_examples=80)
def test_reduction_preserves_matrix(w):
    r = reduce_word(w)
    assert reduce_word(r) == r
    assert word_matrix(r) == word_matrix(w)


@given(w=words)
@settings(max_examples=40)
def test_exact_pairing_equivariance(w):
    lat = wehler_lattice()
    M = word_matrix(w)
    u = (Fraction(3, 7), Fraction(-1, 2), Fraction(5))
    v = (Fraction(1), Fraction(2, 3), Fraction(-4, 9))
    assert lat.pair(mat_vec(M, u), mat_vec(M, v)) == lat.pair(u, v)
