"""
Word arithmetic on the supported group models

Normal forms, products, inverses and sphere enumeration. Every
operation is a pure function of immutable values; spheres are cached
per model so repeated scans do not re-enumerate them
"""

import logging
from functools import lru_cache
from typing import Iterable, Iterator

from config import DEFAULT_CAP
from errors import CapacityError, DomainError
from models.group import (
    IDENTITY,
    FreeGroup,
    FreeProduct,
    GroupElement,
    GroupModel,
    Letter,
    RightAngledCoxeter,
    UniversalCoxeter,
)


logger = logging.getLogger(__name__)


def normal_form(model: GroupModel, raw: Iterable[Letter]) -> GroupElement:
    """
    Returns the unique normal form of a raw word

    Args:
        model (GroupModel): The group the word is read in.
        raw (Iterable[Letter]): Letters in any order, possibly unreduced.

    Returns:
        GroupElement: The canonical representative.

    Raises:
        DomainError: If a generator index is not valid for the model.
    """
    letters = [model.check_letter(letter) for letter in raw]
    return GroupElement(model.reduce(letters))


def multiply(model: GroupModel, g: GroupElement, h: GroupElement) -> GroupElement:
    if h.is_identity():
        return g
    if g.is_identity():
        return h
    return GroupElement(model.reduce(g.letters + h.letters))


def inverse(model: GroupModel, g: GroupElement) -> GroupElement:
    flipped = [
        letter if model.is_involutive(letter.generator_index)
        else Letter(letter.generator_index, not letter.inverted)
        for letter in reversed(g.letters)
    ]
    return GroupElement(model.reduce(flipped))


def parse_word(model: GroupModel, text: str) -> GroupElement:
    """
    Reads a word written with one character per letter

    Lowercase a, b, c, ... are generators 0, 1, 2, ... and uppercase
    letters their inverses, so "abA" is a b a^-1. Whitespace and "e"
    on its own are ignored.
    """
    text = text.strip()
    if text in ("", "e"):
        return IDENTITY
    letters = []
    for char in text:
        if char.isspace():
            continue
        if not char.isalpha() or not char.isascii():
            raise DomainError(f"Cannot read {char!r} as a generator letter")
        letters.append(Letter(ord(char.lower()) - ord("a"), char.isupper()))
    return normal_form(model, letters)


def _tree_like(model: GroupModel) -> bool:
    # Normal forms are exactly the freely reduced words
    if isinstance(model, (FreeGroup, UniversalCoxeter)):
        return True
    if isinstance(model, FreeProduct):
        return all(_tree_like(factor) for factor in model.factors)
    return False


def _cancels(model: GroupModel, last: Letter, letter: Letter) -> bool:
    if last.generator_index != letter.generator_index:
        return False
    return model.is_involutive(letter.generator_index) or last.inverted != letter.inverted


@lru_cache(maxsize=64)
def _sphere(model: GroupModel, i: int, cap: int) -> tuple[GroupElement, ...]:
    if i == 0:
        return (IDENTITY,)
    expected = model.closed_form_sphere_size(i)
    if expected is not None and expected > cap:
        raise CapacityError(
            f"Sphere of radius {i} in {model.name} has {expected} elements, "
            f"above the cap of {cap}",
            requested=expected,
            cap=cap,
        )
    previous = _sphere(model, i - 1, cap)
    generators = model.generators

    if _tree_like(model):
        # Extending sorted reduced words letter by letter keeps shortlex order
        layer = [
            GroupElement(g.letters + (s,))
            for g in previous
            for s in generators
            if not g.letters or not _cancels(model, g.letters[-1], s)
        ]
        if len(layer) > cap:
            raise CapacityError(
                f"Sphere of radius {i} in {model.name} has {len(layer)} elements, "
                f"above the cap of {cap}",
                requested=len(layer),
                cap=cap,
            )
        return tuple(layer)

    found: set[GroupElement] = set()
    for g in previous:
        for s in generators:
            candidate = GroupElement(model.reduce(g.letters + (s,)))
            if len(candidate) == i:
                found.add(candidate)
        if len(found) > cap:
            raise CapacityError(
                f"Sphere of radius {i} in {model.name} exceeds the cap of {cap}",
                cap=cap,
            )
    logger.debug("Sphere %d of %s enumerated by rewriting: %d elements", i, model.name, len(found))
    return tuple(sorted(found))


def enumerate_sphere(
    model: GroupModel, i: int, cap: int = DEFAULT_CAP
) -> Iterator[GroupElement]:
    """
    Yields the elements of word length i once each, in shortlex order

    Raises:
        DomainError: If i is negative.
        CapacityError: If the sphere has more than cap elements.
    """
    if i < 0:
        raise DomainError(f"Sphere radius must be >= 0, got {i}")
    return iter(_sphere(model, i, cap))


def enumerate_ball(
    model: GroupModel, radius: int, cap: int = DEFAULT_CAP
) -> Iterator[GroupElement]:
    """Yields B(radius) sphere by sphere, each sphere in shortlex order"""
    total = 0
    for i in range(radius + 1):
        sphere = _sphere(model, i, cap)
        total += len(sphere)
        if total > cap:
            raise CapacityError(
                f"Ball of radius {radius} in {model.name} exceeds the cap of {cap}",
                requested=total,
                cap=cap,
            )
        yield from sphere


def sphere_size(model: GroupModel, i: int, cap: int = DEFAULT_CAP) -> int:
    if i < 0:
        raise DomainError(f"Sphere radius must be >= 0, got {i}")
    closed = model.closed_form_sphere_size(i)
    if closed is not None:
        return closed
    return len(_sphere(model, i, cap))


def sphere_representative(model: GroupModel, i: int) -> GroupElement | None:
    """
    An element of length i built greedily from the smallest generators,
    or None when the sphere is empty
    """
    current = IDENTITY
    for _ in range(i):
        for s in model.generators:
            extended = GroupElement(model.reduce(current.letters + (s,)))
            if len(extended) == len(current) + 1:
                current = extended
                break
        else:
            return None
    return current


def build_model(descriptor: dict) -> GroupModel:
    """
    Builds a group model from its config descriptor

    Supported kinds are free, universal_coxeter, right_angled_coxeter
    (with edges or a coxeter_matrix) and free_product (with factors)

    Raises:
        DomainError: If the descriptor does not describe a supported group.
    """
    kind = descriptor.get("kind")
    if kind == "free":
        return FreeGroup(int(descriptor["rank"]))
    if kind == "universal_coxeter":
        return UniversalCoxeter(int(descriptor["rank"]))
    if kind == "right_angled_coxeter":
        if "coxeter_matrix" in descriptor:
            return RightAngledCoxeter.from_coxeter_matrix(descriptor["coxeter_matrix"])
        edges = frozenset(
            (min(u, v), max(u, v)) for u, v in descriptor.get("edges", [])
        )
        return RightAngledCoxeter(int(descriptor["rank"]), edges)
    if kind == "free_product":
        return FreeProduct(tuple(build_model(f) for f in descriptor["factors"]))
    raise DomainError(f"Unknown group kind {kind!r}")
