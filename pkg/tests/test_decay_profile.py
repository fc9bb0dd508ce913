"""Tests for decay profiles, strictness and the character subgroup"""

import math

import pytest

from errors import DomainError
from groups import parse_word
from models.state import DecayProfile, RadialCoefficients
from states import (
    character_subgroup,
    counit_state,
    decay_profile,
    empirical_decay_rate,
    free_product_state,
    haar_state,
    length_state,
    radial_state,
    strictness_scan,
)


def test_length_profile_is_linear(free2):
    """Tests whether the length state has phi+(i) = phi-(i) = t i"""
    profile = decay_profile(length_state(free2, 0.7), 4)
    for i in range(1, 5):
        assert profile.plus(i) == pytest.approx(0.7 * i)
        assert profile.minus(i) == pytest.approx(0.7 * i)


def test_free_product_profile_spreads(z_star_z):
    """Tests whether unequal factors give phi-(1) = t1 and phi+(1) = t2"""
    left, right = z_star_z.factors
    state = free_product_state(z_star_z, [length_state(left, 0.5), length_state(right, 2.0)])
    profile = decay_profile(state, 3)
    assert profile.minus(1) == pytest.approx(0.5)
    assert profile.plus(1) == pytest.approx(2.0)
    assert profile.minus(3) == pytest.approx(1.5)
    assert profile.plus(3) == pytest.approx(6.0)
    assert empirical_decay_rate(state, 3) == pytest.approx(0.5)


def test_radial_even_support_vanishes_on_odd_spheres(free2):
    """Tests whether an even radial vector gives inf on odd spheres"""
    coeffs = RadialCoefficients((1.0, 0.0, 1.0)).normalized(4)
    profile = decay_profile(radial_state(free2, coeffs), 5)
    assert profile.plus(1) == math.inf
    assert profile.minus(3) == math.inf
    assert profile.plus(5) == math.inf
    assert math.isfinite(profile.plus(2))
    assert math.isfinite(profile.minus(4))


def test_haar_profile_is_infinite(coxeter3):
    """Tests whether delta_e vanishes on every sphere"""
    profile = decay_profile(haar_state(coxeter3), 2)
    assert profile.phi_plus == (math.inf, math.inf)


def test_profile_needs_positive_radius(free2):
    """Tests whether radius 0 is refused"""
    with pytest.raises(DomainError):
        decay_profile(length_state(free2, 1.0), 0)


def test_profile_orientation():
    """Tests whether a profile with phi- above phi+ is refused"""
    with pytest.raises(DomainError):
        DecayProfile(2, (0.5, 1.0), (0.5, 1.5))


def test_strictness_scan(free2):
    """Tests whether the counit is nowhere strict and the length state everywhere"""
    assert len(strictness_scan(counit_state(free2), 2)) == 4 + 12
    assert strictness_scan(length_state(free2, 1.0), 2) == []
    with pytest.raises(DomainError):
        strictness_scan(counit_state(free2), 0)


def test_character_subgroup_of_counit(coxeter3):
    """Tests whether the counit is a character on the whole ball"""
    subgroup = character_subgroup(counit_state(coxeter3), 2)
    assert len(subgroup.elements) == 1 + 3 + 6
    assert subgroup.closed
    assert subgroup.bimodular


def test_character_subgroup_of_length_state(free2):
    """Tests whether a strict state only has |phi| = 1 at the identity"""
    subgroup = character_subgroup(length_state(free2, 1.0), 2)
    assert subgroup.elements == (parse_word(free2, "e"),)
    assert subgroup.closed and subgroup.bimodular
