"""
Acceptance checks: closed forms reproduced against enumeration at desk
scale, together with the cut-off and no cut-off behaviour of whole
families
"""

import math
import random

import pytest

from bounds import (
    cutoff_scan,
    density_verdict,
    l2_upper_bound,
    lower_offset_constant,
    upper_offset_constant,
)
from experiments import expected_intersection
from groups import enumerate_sphere, sphere_representative
from models.group import FreeGroup, UniversalCoxeter
from models.results import Rigor, Verdict
from models.state import RadialCoefficients
from oracle import (
    intersection_table,
    radial_direct_inner_product,
    radial_from_table,
    variance_exact,
)
from spectra import cogrowth_count, growth_rate
from states import (
    decay_profile,
    gram_psd_check,
    length_state,
    power_state,
    radial_closed_form,
    radial_state,
)
from tests.helpers import ball, geometric_bound, random_unit_coefficients


pytestmark = pytest.mark.slow

EPSILON = 0.01


def free_lengths(n):
    model = FreeGroup(n)
    return model, length_state(model, 1.0)


def coxeter_lengths(n):
    model = UniversalCoxeter(n)
    return model, length_state(model, 1.0)


def flattening_radials(n):
    model = FreeGroup(n)
    return model, radial_state(model, RadialCoefficients((1.0, 0.5)).normalized(model.size_S))


@pytest.mark.parametrize("rank", range(2, 7))
def test_geometric_series_fidelity(rank):
    """
    Tests the certified bound of the length state against the exact sum

    - Runs l2_upper_bound with R = 20 on Free(rank), t = 1, for every
    k <= 6 where (2 rank - 1) e^(-2k) < 1
    - Compares with 1/2 sqrt(2N e^(-2k) / (1 - (2N - 1) e^(-2k)))

    Expected outcome includes:
    Agreement to a relative 1e-9 and an Exact rigor
    """
    model, state = free_lengths(rank)
    checked = 0
    for k in range(1, 7):
        if (2 * rank - 1) * math.exp(-2 * k) >= 1:
            continue
        result = l2_upper_bound(state, k, radius=20)
        assert result.rigor == Rigor.EXACT
        assert result.value == pytest.approx(geometric_bound(model.size_S, 1.0, k), rel=1e-9)
        checked += 1
    assert checked >= 5


@pytest.mark.parametrize(
    "family, params, smallest",
    [(free_lengths, range(3, 51), 6), (coxeter_lengths, range(4, 51), 4)],
    ids=["free", "universal-coxeter"],
)
def test_cutoff_window_is_bounded(family, params, smallest):
    """
    Test for a cut-off window whose offsets do not grow with the rank

    - Scans the length states t = 1 with epsilon = 0.01
    - c* is the offset at which the closed-form upper bound reaches
    epsilon for the smallest generating set in the family, where it is
    largest; c** solves 8 e^(-2c) = epsilon
    - Offsets are measured from the integer powers, so they are allowed
    one extra step

    Expected outcome includes:
    k_upper - ln(|S| - 1) / 2 <= c* + 1 and ln(|S| - 1) / 2 - k_lower <=
    c** + 1 for every member
    """
    c_upper = upper_offset_constant(smallest, 1.0, EPSILON)
    c_lower = lower_offset_constant(EPSILON)
    scan = cutoff_scan(family, params, epsilon=EPSILON, threads=4)
    for window in scan.windows:
        model, _ = family(window.family_param)
        assert window.predicted_location == pytest.approx(math.log(model.size_S - 1) / 2)
        assert window.k_upper is not None
        own = upper_offset_constant(model.size_S, 1.0, EPSILON)
        assert own - 1e-9 <= window.upper_offset <= c_upper + 1
        if window.k_lower is None:
            assert window.predicted_location - c_lower < 1
        else:
            assert window.lower_offset <= c_lower + 1
    assert scan.max_upper_offset <= c_upper + 1


def test_radial_closed_form_on_free2():
    """
    Test for the radial closed form against enumerated inner products

    - Counts |g S(i) intersected with S(j)| for every g in B(6) of
    Free(2) and i <= 5
    - Evaluates <g.xi, xi> from those counts for 20 random unit vectors
    with support 5
    - Builds g.xi explicitly for one element of every length up to 3

    Expected outcome includes:
    Closed form and enumeration agree within 1e-10
    """
    model = FreeGroup(2)
    vectors = [random_unit_coefficients(model.size_S, 5, seed) for seed in range(20)]
    for g in ball(model, 6):
        table = intersection_table(model, g, 5)
        for coeffs in vectors:
            assert radial_closed_form(model.size_S, coeffs.lam, len(g)) == pytest.approx(
                radial_from_table(table, coeffs.lam), abs=1e-10
            )
    for length in range(4):
        g = sphere_representative(model, length)
        for coeffs in vectors[:3]:
            direct = radial_direct_inner_product(model, coeffs, g, 5 + length)
            assert radial_closed_form(model.size_S, coeffs.lam, length) == pytest.approx(
                direct.real, abs=1e-10
            )


def test_radial_closed_form_on_free3():
    """
    Tests the closed form on Free(3) over all of B(3) and ten sampled
    elements of every length from 4 to 6, with support 4
    """
    model = FreeGroup(3)
    rng = random.Random(3)
    elements = ball(model, 3)
    for length in range(4, 7):
        elements.extend(rng.sample(list(enumerate_sphere(model, length)), 10))
    vectors = [random_unit_coefficients(model.size_S, 4, seed) for seed in range(20)]
    for g in elements:
        table = intersection_table(model, g, 4)
        for coeffs in vectors:
            assert radial_closed_form(model.size_S, coeffs.lam, len(g)) == pytest.approx(
                radial_from_table(table, coeffs.lam), abs=1e-10
            )


def test_intersection_counting_lemma():
    """
    Tests every count |g S(i) intersected with S(j)| on Free(2) for
    |g| <= 3 and i, j <= 4, zero counts included
    """
    model = FreeGroup(2)
    for g in ball(model, 3):
        table = intersection_table(model, g, 4)
        for i in range(5):
            for j in range(5):
                assert table.get((i, j), 0) == expected_intersection(model, len(g), i, j)


@pytest.mark.parametrize("rank", [3, 5, 10])
def test_radial_decay_bound(rank):
    """Tests |phi(g)| <= (|g| + 1) (|S| - 1)^(-|g|/2) on B(6)"""
    model = FreeGroup(rank)
    q = model.size_S - 1
    for seed in range(10):
        state = radial_state(model, random_unit_coefficients(model.size_S, 4, seed))
        for length in range(7):
            value = state.evaluate(sphere_representative(model, length))
            assert abs(value) <= (length + 1) * q ** (-length / 2) + 1e-12


def test_flattening_radial_family_has_no_cutoff():
    """
    Test for the no cut-off behaviour of a fixed radial profile

    - lambda proportional to (1, 1/2), renormalized for Free(N), N from
    5 to 60
    - Under the polynomial certificate the series at k = 1 sits on its
    convergence threshold

    Expected outcome includes:
    k = 1 reported Divergent, k_upper nonincreasing in N and equal to 2
    from some N on
    """
    params = range(5, 61)
    scan = cutoff_scan(flattening_radials, params, epsilon=EPSILON, threads=4)
    k_uppers = [window.k_upper for window in scan.windows]
    assert all(later <= earlier for earlier, later in zip(k_uppers, k_uppers[1:]))
    assert k_uppers[-1] == 2
    assert scan.no_cutoff
    _, state = flattening_radials(5)
    assert l2_upper_bound(state, 1).rigor == Rigor.DIVERGENT
    assert l2_upper_bound(state, 2).rigor == Rigor.UPPER_CERTIFIED


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_psd_suite(t, free2, coxeter3, path_racg):
    """Tests the length states and their Schur powers on B(3)"""
    for model in (free2, coxeter3, path_racg):
        state = length_state(model, t)
        elements = ball(model, 3)
        for k in (1, 2, 3):
            check = gram_psd_check(power_state(state, k), elements, tolerance=1e-9)
            assert check.psd, (model.name, k, check.min_eigenvalue)


def test_free_product_of_integers_is_free2_length(free2, z_star_z, z_star_z_state):
    """
    Tests e^(-|n|) on each Z factor against e^(-|g|) on B(8) and the
    additivity of the chi_1 variance
    """
    reference = length_state(free2, 1.0)
    for g in ball(z_star_z, 8):
        assert z_star_z_state.evaluate(g) == pytest.approx(reference.evaluate(g), rel=1e-12)
    total = variance_exact(z_star_z_state, 1)[1]
    parts = math.fsum(
        variance_exact(length_state(factor, 1.0), 1)[1] for factor in z_star_z.factors
    )
    assert total == pytest.approx(parts, abs=1e-12)


@pytest.mark.parametrize(
    "rank, counts",
    [(2, (0, 4, 0, 28)), (3, (0, 6, 0, 78))],
)
def test_cogrowth_floor(rank, counts):
    """
    Test for the relation counts of universal Coxeter groups

    - Counts the reduced words of the free group on the marking that
    are trivial in UC(rank) up to length 8
    - Free groups see no relation at all

    Expected outcome includes:
    r_1..r_4 as counted by hand, a nondecreasing gamma_hat trend, and
    the sqrt(|S| - 1) convention for Free(2)
    """
    estimate = cogrowth_count(UniversalCoxeter(rank), 8)
    assert estimate.counts[:4] == counts
    assert all(later >= earlier for earlier, later in zip(estimate.trend, estimate.trend[1:]))
    free = cogrowth_count(FreeGroup(2), 6)
    assert free.counts == (0,) * 6
    assert free.gamma_convention
    assert free.gamma_hat == pytest.approx(math.sqrt(3))


def test_density_verdicts(free2):
    """
    Tests HasL2 for t = 1 at every k and the flip for t = 0.1 at the
    least k with 0.1 > ln 3 / (2k), which is 6
    """
    omega = growth_rate(free2)
    assert omega == pytest.approx(3.0)
    profile = decay_profile(length_state(free2, 1.0), 8)
    for k in range(1, 9):
        assert density_verdict(profile, omega, k).verdict == Verdict.HAS_L2

    crossover = math.ceil(math.log(3) / 0.2)
    assert crossover == 6
    profile = decay_profile(length_state(free2, 0.1), 8)
    assert density_verdict(profile, omega, 1).verdict == Verdict.NO_L2
    assert density_verdict(profile, omega, crossover - 1).verdict == Verdict.NO_L2
    for k in range(crossover, crossover + 4):
        assert density_verdict(profile, omega, k).verdict == Verdict.HAS_L2
