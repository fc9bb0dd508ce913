"""Normalized positive definite functions and their decay data"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

from errors import DomainError
from models.group import GroupElement, GroupModel


@dataclass(frozen=True)
class DecayCertificate:
    """
    Pointwise bound |phi(g)| <= (|g| + 1)^poly_degree * exp(-rate * |g|)
    """

    poly_degree: int
    rate: float

    def bound(self, length: int) -> float:
        return (length + 1) ** self.poly_degree * math.exp(-self.rate * length)

    def power(self, k: int) -> "DecayCertificate":
        return DecayCertificate(self.poly_degree * k, self.rate * k)

    def holds(self, value: complex, length: int, slack: float = 1e-12) -> bool:
        return abs(value) <= self.bound(length) + slack


@dataclass(frozen=True)
class RadialCoefficients:
    """
    Coefficients of a radial vector sum_i lambda_i chi_i in l2 of a free group

    lam[i] multiplies the indicator of the sphere of radius i
    """

    lam: tuple[float, ...]

    @property
    def support(self) -> int:
        """Largest radius with a nonzero coefficient (0 for the zero vector)"""
        nonzero = [i for i, value in enumerate(self.lam) if value != 0]
        return nonzero[-1] if nonzero else 0

    def eta(self, size_S: int) -> tuple[float, ...]:
        q = size_S - 1
        return tuple(q ** (i / 2) * value for i, value in enumerate(self.lam))

    def norm_squared(self, size_S: int) -> float:
        """||xi||^2 = sum_i lambda_i^2 s_i with free-group sphere sizes"""
        total = 0.0
        for i, value in enumerate(self.lam):
            sphere = 1 if i == 0 else size_S * (size_S - 1) ** (i - 1)
            total += abs(value) ** 2 * sphere
        return total

    def normalized(self, size_S: int) -> "RadialCoefficients":
        norm = math.sqrt(self.norm_squared(size_S))
        return RadialCoefficients(tuple(value / norm for value in self.lam))


@dataclass(frozen=True)
class DecayProfile:
    """
    phi_plus[i-1] = -min_{S(i)} ln|phi| and phi_minus[i-1] = -max_{S(i)} ln|phi|

    Entries are math.inf where phi vanishes (on the whole sphere for
    phi_minus, somewhere on it for phi_plus)
    """

    radius: int
    phi_plus: tuple[float, ...]
    phi_minus: tuple[float, ...]

    def __post_init__(self):
        for i, (plus, minus) in enumerate(zip(self.phi_plus, self.phi_minus), start=1):
            if minus > plus:
                raise DomainError(
                    f"phi-({i}) = {minus:.6g} exceeds phi+({i}) = {plus:.6g}; "
                    "check the orientation of the profile"
                )

    def plus(self, i: int) -> float:
        return self.phi_plus[i - 1]

    def minus(self, i: int) -> float:
        return self.phi_minus[i - 1]


class StateModel(ABC):
    """
    A normalized positive definite function on a group model

    radial states take a value that depends only on |g|, and
    nonnegative states only take real values >= 0; bound code uses both
    flags to pick shortcuts and applicable lower bounds. tight states
    meet their certificate with equality everywhere, so the certified
    tail of their L2 series is exact
    """

    kind: str = "state"
    model: GroupModel
    certificate: DecayCertificate | None = None
    radial: bool = False
    nonnegative: bool = False
    tight: bool = False

    @abstractmethod
    def evaluate(self, g: GroupElement) -> complex: ...

    @abstractmethod
    def describe(self) -> dict: ...

    def __call__(self, g: GroupElement) -> complex:
        return self.evaluate(g)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.describe()} on {self.model.name}>"


@dataclass(frozen=True)
class GramCheck:
    min_eigenvalue: float
    psd: bool
    size: int


@dataclass(frozen=True)
class CharacterSubgroup:
    """Elements of a ball where |phi| = 1, with the checks run on them"""

    radius: int
    elements: tuple[GroupElement, ...] = field(default_factory=tuple)
    closed: bool = True
    bimodular: bool = True
