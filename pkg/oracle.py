"""
Brute-force verifiers

Everything here enumerates group elements with its own breadth-first
traversal and recomputes values the long way; closed forms elsewhere in
the package are checked against these functions
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from config import DEFAULT_CAP
from errors import CapacityError, DomainError
from groups import inverse, multiply, normal_form
from models.group import IDENTITY, GroupElement, GroupModel
from models.results import VerificationCheck
from models.state import RadialCoefficients, StateModel
from states import free_product_state


logger = logging.getLogger(__name__)


def ball_layers(model: GroupModel, radius: int, cap: int = DEFAULT_CAP) -> list[list[GroupElement]]:
    """Spheres S(0)..S(radius) found by breadth-first search on raw words"""
    layers = [[IDENTITY]]
    seen = {IDENTITY}
    for i in range(radius):
        layer = []
        for g in layers[-1]:
            for s in model.generators:
                h = normal_form(model, g.letters + (s,))
                if h not in seen:
                    seen.add(h)
                    layer.append(h)
        if len(seen) > cap:
            raise CapacityError(
                f"Oracle ball of radius {i + 1} in {model.name} exceeds the cap of {cap}",
                requested=len(seen),
                cap=cap,
            )
        layers.append(layer)
    return layers


@dataclass
class TruncatedL2Vector:
    """A finitely supported vector of l2(G) with support inside B(radius)"""

    model: GroupModel
    radius: int
    amplitudes: dict[GroupElement, complex] = field(default_factory=dict)

    def norm_squared(self) -> float:
        return math.fsum(abs(value) ** 2 for value in self.amplitudes.values())

    def translate(self, g: GroupElement) -> "TruncatedL2Vector":
        """Left regular action: (g.xi)(gh) = xi(h)"""
        return TruncatedL2Vector(
            self.model,
            self.radius + len(g),
            {multiply(self.model, g, h): value for h, value in self.amplitudes.items()},
        )

    def inner(self, other: "TruncatedL2Vector") -> complex:
        terms = [
            value * other.amplitudes[h].conjugate()
            for h, value in self.amplitudes.items()
            if h in other.amplitudes
        ]
        return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


def radial_vector(model: GroupModel, coeffs: RadialCoefficients, cap: int = DEFAULT_CAP) -> TruncatedL2Vector:
    radius = len(coeffs.lam) - 1
    amplitudes = {}
    for i, layer in enumerate(ball_layers(model, radius, cap)):
        if coeffs.lam[i] != 0:
            amplitudes.update({h: complex(coeffs.lam[i]) for h in layer})
    return TruncatedL2Vector(model, radius, amplitudes)


def tv_l2_truncated_sum(state: StateModel, k: int, radius: int, cap: int = DEFAULT_CAP) -> float:
    """sum of |phi(g)|^(2k) over g in B(radius) minus the identity"""
    layers = ball_layers(state.model, radius, cap)
    return math.fsum(
        abs(state.evaluate(g)) ** (2 * k) for layer in layers[1:] for g in layer
    )


def radial_direct_inner_product(
    model: GroupModel,
    coeffs: RadialCoefficients,
    g: GroupElement,
    radius: int,
    cap: int = DEFAULT_CAP,
) -> complex:
    """
    <g.xi, xi> for xi = sum_i lambda_i chi_i built as an explicit vector

    Raises:
        DomainError: If radius is below the support of xi plus |g|, where
                     the translated vector would be cut off.
    """
    needed = coeffs.support + len(g)
    if radius < needed:
        raise DomainError(f"Radius {radius} truncates g.xi; need at least {needed}")
    xi = radial_vector(model, coeffs, cap)
    return xi.translate(g).inner(xi)


def intersection_count(
    model: GroupModel, g: GroupElement, i: int, j: int, cap: int = DEFAULT_CAP
) -> int:
    """|g S(i) intersected with S(j)| by enumeration of S(i)"""
    sphere = ball_layers(model, i, cap)[i]
    return sum(1 for h in sphere if len(multiply(model, g, h)) == j)


def intersection_table(
    model: GroupModel, g: GroupElement, max_radius: int, cap: int = DEFAULT_CAP
) -> dict[tuple[int, int], int]:
    """
    All counts |g S(i) intersected with S(j)| for i <= max_radius in one
    pass over the ball
    """
    table: dict[tuple[int, int], int] = {}
    for i, layer in enumerate(ball_layers(model, max_radius, cap)):
        for h in layer:
            key = (i, len(multiply(model, g, h)))
            table[key] = table.get(key, 0) + 1
    return table


def radial_from_table(table: dict[tuple[int, int], int], lam: Sequence[float]) -> float:
    """sum_{i,j} lambda_i lambda_j |g S(i) intersected with S(j)|"""
    top = len(lam) - 1
    return math.fsum(
        lam[i] * lam[j] * count
        for (i, j), count in table.items()
        if i <= top and j <= top
    )


def variance_exact(state: StateModel, k: int, radius: int = 2, cap: int = DEFAULT_CAP) -> tuple[float, float]:
    """
    Mean and variance of chi_1 under phi^k

    The second moment sums phi^k(g h^-1) over ordered pairs g, h in S(1),
    which equals phi^k(chi_1^2) because S is symmetric.
    """
    if radius < 2:
        raise DomainError(f"Variances need radius >= 2, got {radius}")
    model = state.model
    sphere = ball_layers(model, 1, cap)[1]
    mean = math.fsum((state.evaluate(g) ** k).real for g in sphere)
    second = math.fsum(
        (state.evaluate(multiply(model, g, inverse(model, h))) ** k).real
        for g in sphere
        for h in sphere
    )
    return mean, second - mean**2


def free_product_refactor_check(
    model: GroupModel,
    factors: Sequence[StateModel],
    g: GroupElement,
    tolerance: float = 1e-12,
) -> bool:
    """
    Splits g into maximal runs of letters from one factor and compares
    the product of factor values with the free product evaluator
    """
    state = free_product_state(model, factors)
    expected = 1.0
    run: list = []
    owner = None
    for letter in g.letters:
        position = model.factor_of(letter.generator_index)
        if run and position != owner:
            expected *= factors[owner].evaluate(GroupElement(tuple(run)))
            run = []
        owner = position
        run.append(model.to_local(letter))
    if run:
        expected *= factors[owner].evaluate(GroupElement(tuple(run)))
    return abs(state.evaluate(g) - expected) <= tolerance


def certificate_check(state: StateModel, radius: int, slack: float = 1e-12, cap: int = DEFAULT_CAP) -> VerificationCheck:
    """Largest excess of |phi(g)| over the decay certificate on B(radius)"""
    certificate = state.certificate
    if certificate is None:
        raise DomainError(f"{state} carries no decay certificate")
    layers = ball_layers(state.model, radius, cap)
    excess = max(
        abs(state.evaluate(g)) - certificate.bound(i)
        for i, layer in enumerate(layers)
        for g in layer
    )
    checked = sum(len(layer) for layer in layers)
    if excess > slack:
        logger.warning("%s exceeds its certificate by %.3e on B(%d)", state, excess, radius)
    return VerificationCheck("certificate", max(excess, 0.0), slack, checked)
