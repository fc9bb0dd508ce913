"""
Normalized positive definite functions and their diagnostics

Constructors return StateModel instances; the diagnostics (Gram
matrices, strictness, decay profiles) only evaluate them on finite
balls
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from config import DEFAULT_CAP, DEFAULT_PSD_TOLERANCE, DEFAULT_STRICT_TOLERANCE
from errors import DomainError
from groups import enumerate_ball, enumerate_sphere, inverse, multiply, sphere_representative
from models.group import (
    FreeGroup,
    FreeProduct,
    GroupElement,
    GroupModel,
    RightAngledCoxeter,
    UniversalCoxeter,
)
from models.state import (
    CharacterSubgroup,
    DecayCertificate,
    DecayProfile,
    GramCheck,
    RadialCoefficients,
    StateModel,
)


logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-9


@dataclass(frozen=True, repr=False)
class LengthState(StateModel):
    """g -> exp(-t |g|), positive definite when the word length is
    conditionally negative definite"""

    model: GroupModel
    t: float
    kind = "length"
    radial = True
    nonnegative = True
    tight = True

    @property
    def certificate(self) -> DecayCertificate:
        return DecayCertificate(0, self.t)

    def evaluate(self, g: GroupElement) -> float:
        return math.exp(-self.t * len(g))

    def describe(self) -> dict:
        return {"kind": "length", "t": self.t}


@dataclass(frozen=True, repr=False)
class CounitState(StateModel):
    model: GroupModel
    kind = "counit"
    radial = True
    nonnegative = True

    def evaluate(self, g: GroupElement) -> float:
        return 1.0

    def describe(self) -> dict:
        return {"kind": "counit"}


@dataclass(frozen=True, repr=False)
class HaarState(StateModel):
    """The canonical trace delta_e"""

    model: GroupModel
    kind = "haar"
    radial = True
    nonnegative = True

    def evaluate(self, g: GroupElement) -> float:
        return 1.0 if g.is_identity() else 0.0

    def describe(self) -> dict:
        return {"kind": "haar"}


@dataclass(frozen=True, repr=False)
class FreeProductState(StateModel):
    """Product of the factor states over the alternating block decomposition"""

    model: FreeProduct
    factors: tuple[StateModel, ...]
    kind = "free_product"

    @property
    def certificate(self) -> DecayCertificate | None:
        certificates = [factor.certificate for factor in self.factors]
        if any(c is None for c in certificates):
            return None
        rate = min(c.rate for c in certificates)
        degree = max(c.poly_degree for c in certificates)
        if degree == 0:
            return DecayCertificate(0, rate)
        # A product of (|g_j|+1)^d factors is not bounded by (|g|+1)^d;
        # fold it into the rate with |g_j| + 1 <= 2^|g_j|
        folded = rate - degree * math.log(2)
        if folded <= 0:
            return None
        return DecayCertificate(0, folded)

    @property
    def radial(self) -> bool:
        if not all(isinstance(factor, LengthState) for factor in self.factors):
            return False
        return len({factor.t for factor in self.factors}) == 1

    @property
    def nonnegative(self) -> bool:
        return all(factor.nonnegative for factor in self.factors)

    @property
    def tight(self) -> bool:
        return self.radial

    def evaluate(self, g: GroupElement) -> complex:
        value = 1.0
        for position, run in self.model.blocks(g.letters):
            value *= self.factors[position].evaluate(GroupElement(tuple(run)))
        return value

    def describe(self) -> dict:
        return {
            "kind": "free_product",
            "factors": [factor.describe() for factor in self.factors],
        }


def radial_count(size_S: int, length: int, i: int, t: int) -> int:
    """
    Number of h in S(i) with g h in S(i + |g| - 2t) on a free group

    Exact count for |g| = length; see the free-group reduction argument:
    t letters of g cancel against the start of h and the remaining
    i - t letters of h are free apart from the first one
    """
    q = size_S - 1
    if length == 0:
        return 1 if i == 0 else size_S * q ** (i - 1)
    m = i - t
    if m == 0:
        return 1
    if t == 0 or t == length:
        return q**m
    return (q - 1) * q ** (m - 1)


@dataclass(frozen=True, repr=False)
class RadialState(StateModel):
    """
    g -> <g.xi, xi> for the radial vector xi = sum_i lambda_i chi_i on a
    free group; the value only depends on |g|
    """

    model: FreeGroup
    coeffs: RadialCoefficients
    certificate_kind: str = "polynomial"
    kind = "radial"
    radial = True
    values_cache: dict = field(default_factory=dict, compare=False)

    @property
    def certificate(self) -> DecayCertificate:
        q = self.model.size_S - 1
        if self.certificate_kind == "pure":
            # |g| + 1 <= 2^|g| turns the polynomial factor into a rate
            return DecayCertificate(0, math.log(q) / 2 - math.log(2))
        return DecayCertificate(1, math.log(q) / 2)

    @property
    def nonnegative(self) -> bool:
        return all(value >= 0 for value in self.coeffs.lam)

    def value_at_length(self, length: int) -> float:
        if length not in self.values_cache:
            self.values_cache[length] = radial_closed_form(
                self.model.size_S, self.coeffs.lam, length
            )
        return self.values_cache[length]

    def evaluate(self, g: GroupElement) -> float:
        return self.value_at_length(len(g))

    def describe(self) -> dict:
        return {
            "kind": "radial",
            "lambda": list(self.coeffs.lam),
            "certificate": self.certificate_kind,
        }


def radial_closed_form(size_S: int, lam: Sequence[float], length: int) -> float:
    """
    sum_i sum_t lambda_i lambda_{i+|g|-2t} * count(i, t), t = 0..min(i, |g|)
    """
    top = len(lam) - 1
    terms = []
    for i in range(top + 1):
        if lam[i] == 0:
            continue
        for t in range(min(i, length) + 1):
            j = i + length - 2 * t
            if j > top or lam[j] == 0:
                continue
            terms.append(lam[i] * lam[j] * radial_count(size_S, length, i, t))
    return math.fsum(terms)


@dataclass(frozen=True, repr=False)
class PowerState(StateModel):
    """Pointwise k-th power, positive definite by the Schur product theorem"""

    base: StateModel
    k: int
    kind = "power"

    @property
    def model(self) -> GroupModel:
        return self.base.model

    @property
    def certificate(self) -> DecayCertificate | None:
        if self.base.certificate is None:
            return None
        return self.base.certificate.power(self.k)

    @property
    def radial(self) -> bool:
        return self.base.radial

    @property
    def nonnegative(self) -> bool:
        return self.base.nonnegative

    @property
    def tight(self) -> bool:
        return self.base.tight

    def evaluate(self, g: GroupElement) -> complex:
        return self.base.evaluate(g) ** self.k

    def describe(self) -> dict:
        return {"kind": "power", "k": self.k, "base": self.base.describe()}


def length_state(model: GroupModel, t: float) -> LengthState:
    """
    Returns the state g -> exp(-t |g|)

    Raises:
        DomainError: If t is not positive or the model is not one of the
                     supported classes.
    """
    if not t > 0:
        raise DomainError(f"The length state needs t > 0, got {t}")
    if not _length_is_negative_type(model):
        raise DomainError(f"No length state is available on {model.name}")
    return LengthState(model, float(t))


def _length_is_negative_type(model: GroupModel) -> bool:
    if isinstance(model, (FreeGroup, UniversalCoxeter, RightAngledCoxeter)):
        return True
    if isinstance(model, FreeProduct):
        return all(_length_is_negative_type(factor) for factor in model.factors)
    return False


def counit_state(model: GroupModel) -> CounitState:
    return CounitState(model)


def haar_state(model: GroupModel) -> HaarState:
    return HaarState(model)


def free_product_state(model: FreeProduct, factors: Sequence[StateModel]) -> FreeProductState:
    """
    Returns the free product of factor states

    Raises:
        DomainError: If the model is not a free product, or the factor
                     states are not aligned with its factors.
    """
    if not isinstance(model, FreeProduct):
        raise DomainError(f"{model.name} is not a free product")
    factors = tuple(factors)
    if len(factors) != len(model.factors):
        raise DomainError(
            f"Expected {len(model.factors)} factor states, got {len(factors)}"
        )
    for position, (state, factor) in enumerate(zip(factors, model.factors)):
        if state.model != factor:
            raise DomainError(
                f"Factor state {position} lives on {state.model.name}, "
                f"expected {factor.name}"
            )
    return FreeProductState(model, factors)


def radial_state(
    model: GroupModel,
    coeffs: RadialCoefficients,
    certificate: str = "polynomial",
) -> RadialState:
    """
    Returns the radial state of a unit radial vector on a free group

    Args:
        model (GroupModel): A free group of rank >= 2.
        coeffs (RadialCoefficients): lambda_0..lambda_M with
                                     sum lambda_i^2 s_i = 1.
        certificate (str): "polynomial" for (|g|+1) |S|-1^(-|g|/2), or
                           "pure" for the exponential certificate valid
                           from rank 3 on.

    Raises:
        DomainError: For a non-free model, rank 1, unnormalized
                     coefficients or an unavailable certificate.
    """
    if not isinstance(model, FreeGroup) or model.rank < 2:
        raise DomainError(f"Radial states need a free group of rank >= 2, got {model.name}")
    norm = coeffs.norm_squared(model.size_S)
    if abs(norm - 1) > NORMALIZATION_TOLERANCE:
        raise DomainError(
            f"Radial coefficients must have unit l2 norm, got norm^2 = {norm:.12g}"
        )
    if certificate not in ("polynomial", "pure"):
        raise DomainError(f"Unknown certificate kind {certificate!r}")
    if certificate == "pure" and model.rank < 3:
        raise DomainError("The pure exponential certificate needs rank >= 3")
    return RadialState(model, coeffs, certificate)


def power_state(state: StateModel, k: int) -> StateModel:
    if k < 1:
        raise DomainError(f"Powers start at k = 1, got {k}")
    if k == 1:
        return state
    return PowerState(state, k)


def gram_psd_check(
    state: StateModel,
    elements: Sequence[GroupElement],
    tolerance: float = DEFAULT_PSD_TOLERANCE,
) -> GramCheck:
    """
    Checks positive semidefiniteness of [phi(g_i g_j^-1)] on a finite set

    Returns:
        GramCheck: The smallest eigenvalue of the Hermitian Gram matrix
                   and whether it is >= -tolerance.

    Raises:
        DomainError: If the elements are not distinct.
    """
    elements = list(elements)
    if len(set(elements)) != len(elements):
        raise DomainError("Gram matrix elements must be distinct")
    model = state.model
    inverses = [inverse(model, g) for g in elements]
    size = len(elements)
    gram = np.empty((size, size), dtype=complex)
    for i, g in enumerate(elements):
        for j in range(size):
            gram[i, j] = state.evaluate(multiply(model, g, inverses[j]))
    min_eigenvalue = float(np.linalg.eigvalsh(gram).min())
    psd = min_eigenvalue >= -tolerance
    if not psd:
        logger.warning(
            "Gram matrix of %s on %d elements has eigenvalue %.3e",
            state,
            size,
            min_eigenvalue,
        )
    return GramCheck(min_eigenvalue, psd, size)


def strictness_scan(
    state: StateModel,
    radius: int,
    tolerance: float = DEFAULT_STRICT_TOLERANCE,
    cap: int = DEFAULT_CAP,
) -> list[GroupElement]:
    """Lists every g != e in B(radius) with |phi(g)| >= 1 - tolerance"""
    if radius < 1:
        raise DomainError(f"Strictness scans need radius >= 1, got {radius}")
    return [
        g
        for g in enumerate_ball(state.model, radius, cap)
        if not g.is_identity() and abs(state.evaluate(g)) >= 1 - tolerance
    ]


def character_subgroup(
    state: StateModel,
    radius: int,
    tolerance: float = DEFAULT_STRICT_TOLERANCE,
    cap: int = DEFAULT_CAP,
) -> CharacterSubgroup:
    """
    Collects the elements of B(radius) where |phi| = 1 and checks, inside
    the ball, that they form a subgroup on which phi is bimodular:
    |phi(gh)| = |phi(g)| = |phi(hg)| for every such h
    """
    model = state.model
    ball = list(enumerate_ball(model, radius, cap))
    hits = [g for g in ball if abs(state.evaluate(g)) >= 1 - tolerance]
    members = set(hits)

    closed = all(inverse(model, h) in members for h in hits)
    for h1 in hits:
        for h2 in hits:
            product = multiply(model, h1, h2)
            if len(product) <= radius and product not in members:
                closed = False

    bimodular = True
    for h in hits:
        if h.is_identity():
            continue
        for g in ball:
            target = abs(state.evaluate(g))
            for product in (multiply(model, g, h), multiply(model, h, g)):
                if len(product) > radius:
                    continue
                if abs(abs(state.evaluate(product)) - target) > tolerance:
                    bimodular = False
    return CharacterSubgroup(radius, tuple(hits), closed, bimodular)


def _neg_log(value: float) -> float:
    return math.inf if value == 0 else -math.log(value)


def decay_profile(state: StateModel, radius: int, cap: int = DEFAULT_CAP) -> DecayProfile:
    """
    Computes phi+(i) = -min ln|phi| and phi-(i) = -max ln|phi| over each
    sphere S(i), 1 <= i <= radius

    Radial states are evaluated on one representative per sphere; every
    other state is evaluated on the whole sphere.
    """
    if radius < 1:
        raise DomainError(f"Decay profiles need radius >= 1, got {radius}")
    plus, minus = [], []
    for i in range(1, radius + 1):
        if state.radial:
            representative = sphere_representative(state.model, i)
            sphere = [] if representative is None else [representative]
        else:
            sphere = enumerate_sphere(state.model, i, cap)
        magnitudes = [abs(state.evaluate(g)) for g in sphere]
        if not magnitudes:
            # Empty sphere in a finite group: no constraint
            plus.append(math.inf)
            minus.append(math.inf)
            continue
        plus.append(_neg_log(min(magnitudes)))
        minus.append(_neg_log(max(magnitudes)))
    return DecayProfile(radius, tuple(plus), tuple(minus))


def empirical_decay_rate(state: StateModel, radius: int, cap: int = DEFAULT_CAP) -> float:
    """inf over B(radius) minus e of -ln|phi(g)| / |g|"""
    profile = decay_profile(state, radius, cap)
    return min(profile.minus(i) / i for i in range(1, radius + 1))


def build_state(descriptor: dict, model: GroupModel) -> StateModel:
    """
    Builds a state from its config descriptor on an already built model

    Supported kinds are length, counit, haar, free_product, radial and
    power

    Raises:
        DomainError: If the descriptor does not fit the model.
    """
    kind = descriptor.get("kind")
    if kind == "length":
        return length_state(model, float(descriptor["t"]))
    if kind == "counit":
        return counit_state(model)
    if kind == "haar":
        return haar_state(model)
    if kind == "free_product":
        if not isinstance(model, FreeProduct):
            raise DomainError(f"A free product state needs a free product group, got {model.name}")
        factors = descriptor["factors"]
        if len(factors) != len(model.factors):
            raise DomainError(
                f"Expected {len(model.factors)} factor states, got {len(factors)}"
            )
        return free_product_state(
            model, [build_state(d, f) for d, f in zip(factors, model.factors)]
        )
    if kind == "radial":
        coeffs = RadialCoefficients(tuple(float(x) for x in descriptor["lambda"]))
        if descriptor.get("normalize", False):
            if not isinstance(model, FreeGroup):
                raise DomainError(f"Radial states need a free group, got {model.name}")
            coeffs = coeffs.normalized(model.size_S)
        return radial_state(model, coeffs, descriptor.get("certificate", "polynomial"))
    if kind == "power":
        return power_state(build_state(descriptor["base"], model), int(descriptor["k"]))
    raise DomainError(f"Unknown state kind {kind!r}")
