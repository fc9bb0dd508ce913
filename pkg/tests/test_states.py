"""Tests for the state constructors"""

import math

import pytest

from bounds import certificate_gate
from errors import DomainError
from groups import enumerate_ball, inverse, parse_word
from models.group import FreeGroup, UniversalCoxeter
from models.state import DecayCertificate, RadialCoefficients
from oracle import certificate_check
from states import (
    build_state,
    counit_state,
    free_product_state,
    haar_state,
    length_state,
    power_state,
    radial_closed_form,
    radial_count,
    radial_state,
)
from tests.helpers import ball, extremal_unit_coefficients, random_unit_coefficients


def test_length_state_values(free2):
    """Tests whether the length state is exp(-t |g|)"""
    state = length_state(free2, 1.0)
    assert state(parse_word(free2, "ab")) == pytest.approx(0.1353352832, rel=1e-9)
    assert state(parse_word(free2, "e")) == 1.0
    assert state.certificate == DecayCertificate(0, 1.0)
    assert state.tight and state.radial and state.nonnegative


def test_length_state_needs_positive_t(free2):
    """Tests whether t <= 0 is refused"""
    with pytest.raises(DomainError):
        length_state(free2, 0)
    with pytest.raises(DomainError):
        length_state(free2, -0.5)


def test_counit_and_haar(coxeter3):
    """Tests whether the counit is constant and the Haar state is delta_e"""
    counit, haar = counit_state(coxeter3), haar_state(coxeter3)
    g = parse_word(coxeter3, "abc")
    assert counit(g) == 1.0
    assert haar(g) == 0.0
    assert haar(parse_word(coxeter3, "e")) == 1.0
    assert counit.certificate is None
    assert haar.certificate is None


def test_free_product_state_mixes_factors(z_star_z):
    """Tests whether each block is evaluated by the state of its factor"""
    left, right = z_star_z.factors
    state = free_product_state(z_star_z, [length_state(left, 1.0), counit_state(right)])
    assert state(parse_word(z_star_z, "ab")) == pytest.approx(math.exp(-1))
    assert state(parse_word(z_star_z, "aaBa")) == pytest.approx(math.exp(-3))
    assert not state.radial
    assert state.certificate is None


def test_free_product_of_equal_lengths_is_length(z_star_z, z_star_z_state):
    """Tests whether equal length factors give the length state of Z * Z"""
    whole = length_state(z_star_z, 1.0)
    for g in enumerate_ball(z_star_z, 5):
        assert z_star_z_state(g) == pytest.approx(whole(g), rel=1e-12)
    assert z_star_z_state.radial and z_star_z_state.tight
    assert z_star_z_state.certificate == DecayCertificate(0, 1.0)


def test_free_product_certificate_takes_smallest_rate(z_star_z):
    """Tests whether the slower factor sets the certified rate"""
    left, right = z_star_z.factors
    state = free_product_state(z_star_z, [length_state(left, 0.5), length_state(right, 2.0)])
    assert state.certificate == DecayCertificate(0, 0.5)
    assert not state.tight


def test_free_product_state_alignment(z_star_z, free2):
    """Tests whether misaligned factor states are refused"""
    left, _ = z_star_z.factors
    with pytest.raises(DomainError):
        free_product_state(z_star_z, [length_state(left, 1.0)])
    with pytest.raises(DomainError):
        free_product_state(z_star_z, [length_state(free2, 1.0), length_state(left, 1.0)])
    with pytest.raises(DomainError):
        free_product_state(free2, [])


def test_radial_delta_e(free2):
    """Tests whether lambda = (1) gives the Haar state"""
    state = radial_state(free2, RadialCoefficients((1.0,)))
    assert state(parse_word(free2, "e")) == pytest.approx(1.0)
    assert state(parse_word(free2, "a")) == 0.0
    assert state(parse_word(free2, "abab")) == 0.0


@pytest.mark.parametrize("rank", [2, 3, 5])
def test_radial_first_sphere(rank):
    """Tests whether chi_1 / sqrt(2N) vanishes on S(1) and is 1/(2N) on S(2)"""
    model = FreeGroup(rank)
    state = radial_state(model, RadialCoefficients((0.0, 1 / math.sqrt(2 * rank))))
    assert state(parse_word(model, "e")) == pytest.approx(1.0)
    assert state(parse_word(model, "a")) == pytest.approx(0.0, abs=1e-15)
    assert state(parse_word(model, "ab")) == pytest.approx(1 / (2 * rank))
    assert state(parse_word(model, "aa")) == pytest.approx(1 / (2 * rank))
    assert state(parse_word(model, "aab")) == 0.0


def test_radial_count_small_cases():
    """Tests the counts of h in S(i) with g h in S(j) on Free(2)"""
    # |g| = 0 leaves h free
    assert radial_count(4, 0, 2, 0) == 12
    # nothing cancels: h may start with anything but the inverse of g's last letter
    assert radial_count(4, 1, 1, 0) == 3
    # h = g^-1 exactly
    assert radial_count(4, 2, 2, 2) == 1
    # partial cancellation fixes one letter and forbids another
    assert radial_count(4, 2, 2, 1) == 2


def test_radial_closed_form_matches_coefficients():
    """Tests whether phi(e) is the squared norm of the vector"""
    lam = (0.3, 0.2, 0.1)
    norm = RadialCoefficients(lam).norm_squared(6)
    assert radial_closed_form(6, lam, 0) == pytest.approx(norm)


def test_radial_state_errors(free2, free3, coxeter3):
    """Tests whether unsupported radial states are refused"""
    unit = RadialCoefficients((1.0,))
    with pytest.raises(DomainError):
        radial_state(coxeter3, unit)
    with pytest.raises(DomainError):
        radial_state(FreeGroup(1), unit)
    with pytest.raises(DomainError):
        radial_state(free2, RadialCoefficients((1.0, 1.0)))
    with pytest.raises(DomainError):
        radial_state(free2, unit, "gaussian")
    with pytest.raises(DomainError):
        radial_state(free2, unit, "pure")
    pure = radial_state(free3, unit, "pure")
    assert pure.certificate == DecayCertificate(0, math.log(5) / 2 - math.log(2))
    assert radial_state(free3, unit).certificate == DecayCertificate(1, math.log(5) / 2)


def test_power_exponent_law(free2):
    """Tests whether powers of powers multiply their exponents"""
    base = length_state(free2, 0.3)
    g = parse_word(free2, "abA")
    nested = power_state(power_state(base, 2), 3)
    assert nested(g) == pytest.approx(base(g) ** 6)
    assert nested.certificate.poly_degree == 0
    assert nested.certificate.rate == pytest.approx(1.8)
    assert power_state(base, 1) is base
    with pytest.raises(DomainError):
        power_state(base, 0)


def test_build_state_unknown_kind():
    """Tests whether build_state refuses unknown kinds"""
    with pytest.raises(DomainError):
        build_state({"kind": "gaussian"}, UniversalCoxeter(3))


def test_build_state_from_descriptors(free2, z_star_z):
    """Tests whether every descriptor kind builds an equivalent state"""
    g = parse_word(free2, "ab")
    assert build_state({"kind": "length", "t": 1}, free2)(g) == pytest.approx(math.exp(-2))
    radial = build_state({"kind": "radial", "lambda": [0, 1], "normalize": True}, free2)
    assert radial(g) == pytest.approx(0.25)
    power = build_state({"kind": "power", "k": 2, "base": {"kind": "length", "t": 1}}, free2)
    assert power(g) == pytest.approx(math.exp(-4))
    product = build_state(
        {"kind": "free_product", "factors": [{"kind": "length", "t": 1}, {"kind": "haar"}]},
        z_star_z,
    )
    assert product(parse_word(z_star_z, "a")) == pytest.approx(math.exp(-1))
    assert product(parse_word(z_star_z, "ab")) == 0.0
    with pytest.raises(DomainError):
        build_state({"kind": "free_product", "factors": []}, free2)


def certified_states(free2, coxeter3, path_racg, z_star_z):
    """One state per constructor that carries a decay certificate, on small marked groups"""
    left, right = z_star_z.factors
    return [
        length_state(free2, 1.0),
        length_state(coxeter3, 0.4),
        length_state(path_racg, 0.7),
        free_product_state(z_star_z, [length_state(left, 0.5), length_state(right, 2.0)]),
        power_state(length_state(free2, 0.3), 3),
    ]


def test_certificates_hold_on_ball(free2, coxeter3, path_racg, z_star_z):
    """
    Test for the decay certificates against every element of B(8)

    - Length, free product and power states, enumerated by breadth-first
    search on raw words

    Expected outcome includes:
    No excess of |phi(g)| over (|g| + 1)^d exp(-alpha |g|)
    """
    for state in certified_states(free2, coxeter3, path_racg, z_star_z):
        check = certificate_check(state, 8)
        assert check.passed, (state.describe(), check.max_deviation)


@pytest.mark.parametrize("certificate", ["polynomial", "pure"])
@pytest.mark.parametrize("rank", [3, 5, 30])
def test_radial_certificates_hold(rank, certificate):
    """Tests both radial certificates for random unit vectors up to radius 8"""
    model = FreeGroup(rank)
    for seed in range(5):
        state = radial_state(model, random_unit_coefficients(model.size_S, 6, seed), certificate)
        assert certificate_gate(state, 8).passed
        assert certificate_gate(power_state(state, 2), 8).passed


@pytest.mark.parametrize("rank, support", [(3, 25), (5, 6), (30, 4)])
def test_pure_certificate_holds_for_extremal_vector(rank, support):
    """
    Test for the pure radial certificate where it is tightest

    - lambda maximizes phi on the first sphere among unit radial vectors
    with the given support
    - Checks one representative per sphere up to radius 8 and all of B(2)
    by enumeration

    Expected outcome includes:
    phi(a) above e^(1/2) (|S| - 1)^(-1/2), which rules out the rate
    (ln(|S| - 1) - 1) / 2, and no excess over the pure certificate
    """
    model = FreeGroup(rank)
    q = model.size_S - 1
    state = radial_state(model, extremal_unit_coefficients(model.size_S, support), "pure")
    value = state(parse_word(model, "a"))
    assert value > math.exp(0.5) / math.sqrt(q)
    assert value <= state.certificate.bound(1)
    assert certificate_gate(state, 8).passed
    assert certificate_check(state, 2).passed


def test_states_are_hermitian(free2, coxeter3, path_racg, z_star_z):
    """Tests phi(g^-1) = conj(phi(g)) on B(4) for every constructor"""
    states = certified_states(free2, coxeter3, path_racg, z_star_z) + [
        counit_state(coxeter3),
        haar_state(path_racg),
        radial_state(free2, random_unit_coefficients(free2.size_S, 3, 0)),
    ]
    for state in states:
        for g in ball(state.model, 4):
            value = complex(state(g))
            assert complex(state(inverse(state.model, g))) == pytest.approx(value.conjugate())
