"""Growth and cogrowth statistics of marked groups"""

import logging
import math

from config import DEFAULT_CAP
from errors import DomainError
from groups import enumerate_sphere, normal_form, sphere_size
from models.group import FreeGroup, GroupModel
from models.results import CogrowthEstimate, SphereTable


logger = logging.getLogger(__name__)


def growth_table(model: GroupModel, radius: int, cap: int = DEFAULT_CAP) -> SphereTable:
    """
    Sphere sizes s_0..s_R and the growth diagnostics s_i^(1/i)

    Args:
        model (GroupModel): The marked group.
        radius (int): Largest sphere radius, at least 1.
        cap (int): Enumeration cap for models without closed-form spheres.

    Raises:
        DomainError: If radius < 1.
        CapacityError: If a sphere has to be enumerated past the cap.
    """
    if radius < 1:
        raise DomainError(f"Growth tables need radius >= 1, got {radius}")
    sizes = tuple(sphere_size(model, i, cap) for i in range(radius + 1))
    estimates = tuple(sizes[i] ** (1 / i) for i in range(1, radius + 1))
    return SphereTable(radius, sizes, estimates)


def growth_rate(model: GroupModel, radius: int = 8, cap: int = DEFAULT_CAP) -> float:
    """
    The growth rate omega(S)

    Exact when spheres have a closed form (|S| - 1 for free groups, N - 1
    for universal Coxeter groups), otherwise the ratio s_R / s_(R-1)
    """
    closed_1 = model.closed_form_sphere_size(1)
    closed_2 = model.closed_form_sphere_size(2)
    if closed_1 is not None and closed_2 is not None:
        return closed_2 / closed_1
    last = sphere_size(model, radius, cap)
    previous = sphere_size(model, radius - 1, cap)
    if last == 0 or previous == 0:
        return 1.0
    return last / previous


def cogrowth_count(model: GroupModel, max_length: int, cap: int = DEFAULT_CAP) -> CogrowthEstimate:
    """
    Counts reduced words of the free group on the marking that are
    trivial in the model

    The marking sends the i-th free generator to the i-th generator of
    the model, so for Coxeter models both a^2 and a^-2 are relations.
    Triviality is decided with the model's normal form.

    Returns:
        CogrowthEstimate: r_1..r_L, the estimate r_i^(1/i) at the largest
                          i with r_i > 0 and its running values. When no
                          relation shows up gamma_hat is sqrt(|S| - 1).

    Raises:
        DomainError: If max_length < 1.
        CapacityError: If a sphere of the marking group exceeds the cap.
    """
    if max_length < 1:
        raise DomainError(f"Cogrowth counts need a length >= 1, got {max_length}")
    marking = FreeGroup(model.rank)
    counts = []
    for i in range(1, max_length + 1):
        relations = sum(
            1
            for word in enumerate_sphere(marking, i, cap)
            if normal_form(model, word.letters).is_identity()
        )
        counts.append(relations)
        logger.debug("r_%d = %d for %s", i, relations, model.name)

    trend = []
    current = None
    for i, r in enumerate(counts, start=1):
        if r > 0:
            current = r ** (1 / i)
        if current is not None:
            trend.append(current)

    if current is None:
        if not model.free_on_generators:
            logger.warning(
                "No relation of length <= %d in %s; using the free convention",
                max_length,
                model.name,
            )
        return CogrowthEstimate(
            max_length, tuple(counts), math.sqrt(model.size_S - 1), True, ()
        )

    if any(later < earlier for earlier, later in zip(trend, trend[1:])):
        logger.warning("Cogrowth estimates for %s decrease with the length", model.name)
    return CogrowthEstimate(max_length, tuple(counts), current, False, tuple(trend))


def chi1_norm_cohen(size_S: int, gamma: float, tolerance: float = 1e-12) -> float:
    """
    Operator norm gamma + (|S| - 1) / gamma of the sum of the generators

    Raises:
        DomainError: If gamma is below sqrt(|S| - 1).
    """
    floor = math.sqrt(size_S - 1)
    if gamma < floor - tolerance:
        raise DomainError(f"gamma = {gamma} is below the floor sqrt(|S| - 1) = {floor}")
    return gamma + (size_S - 1) / gamma
