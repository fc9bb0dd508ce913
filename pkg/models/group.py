"""Group elements and the marked groups they live in

A model knows its generating set and how to rewrite a word into its
normal form; the operations built on top of that live in groups.py
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import networkx as nx

from errors import DomainError


@dataclass(frozen=True, order=True)
class Letter:
    """
    One letter of the signed generator alphabet

    Ordering is (generator_index, inverted), which is the shortlex
    order used for every enumeration
    """

    generator_index: int
    inverted: bool = False

    def __str__(self) -> str:
        name = letter_name(self.generator_index)
        return name.upper() if self.inverted else name


def letter_name(index: int) -> str:
    if index < 26:
        return chr(ord("a") + index)
    return f"x{index}"


@dataclass(frozen=True, order=True)
class GroupElement:
    letters: tuple[Letter, ...] = ()

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __str__(self) -> str:
        if not self.letters:
            return "e"
        return "".join(str(letter) for letter in self.letters)

    def is_identity(self) -> bool:
        return not self.letters


IDENTITY = GroupElement()


class GroupModel(ABC):
    """
    A finitely generated group together with its canonical generating set

    Generators are numbered 0..rank-1; S is made of the letters
    (i, False) and, for non-involutive generators, (i, True)
    """

    rank: int

    @abstractmethod
    def is_involutive(self, index: int) -> bool: ...

    @abstractmethod
    def reduce(self, letters: Sequence[Letter]) -> tuple[Letter, ...]:
        """Rewrites validated letters into the model's normal form"""

    @property
    @abstractmethod
    def name(self) -> str: ...

    @abstractmethod
    def describe(self) -> dict: ...

    @property
    def minimal(self) -> bool:
        # No generator of the supported classes lies in the subgroup
        # generated by the others
        return True

    @property
    def free_on_generators(self) -> bool:
        return False

    @cached_property
    def generators(self) -> tuple[Letter, ...]:
        """The symmetric generating set S in shortlex order"""
        letters = []
        for index in range(self.rank):
            letters.append(Letter(index))
            if not self.is_involutive(index):
                letters.append(Letter(index, True))
        return tuple(letters)

    @property
    def size_S(self) -> int:
        return len(self.generators)

    def closed_form_sphere_size(self, i: int) -> int | None:
        """|S(i)| when a closed form is known, None otherwise"""
        if i == 0:
            return 1
        if self.free_on_generators:
            return self.size_S * (self.size_S - 1) ** (i - 1)
        return None

    def check_letter(self, letter: Letter) -> Letter:
        if not 0 <= letter.generator_index < self.rank:
            raise DomainError(
                f"Generator index {letter.generator_index} is not valid for {self.name}"
            )
        if letter.inverted and self.is_involutive(letter.generator_index):
            return Letter(letter.generator_index)
        return letter

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class FreeGroup(GroupModel):
    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise DomainError(f"A free group needs rank >= 1, got {self.rank}")

    @property
    def name(self) -> str:
        return f"Free({self.rank})"

    @property
    def free_on_generators(self) -> bool:
        return True

    def is_involutive(self, index: int) -> bool:
        return False

    def reduce(self, letters: Sequence[Letter]) -> tuple[Letter, ...]:
        word: list[Letter] = []
        for letter in letters:
            if (
                word
                and word[-1].generator_index == letter.generator_index
                and word[-1].inverted != letter.inverted
            ):
                word.pop()
            else:
                word.append(letter)
        return tuple(word)

    def describe(self) -> dict:
        return {"kind": "free", "rank": self.rank}


@dataclass(frozen=True)
class UniversalCoxeter(GroupModel):
    """The free product of rank copies of Z/2"""

    rank: int

    def __post_init__(self):
        if self.rank < 2:
            raise DomainError(
                f"A universal Coxeter group needs rank >= 2, got {self.rank}"
            )

    @property
    def name(self) -> str:
        return f"UniversalCoxeter({self.rank})"

    def is_involutive(self, index: int) -> bool:
        return True

    def closed_form_sphere_size(self, i: int) -> int | None:
        if i == 0:
            return 1
        return self.rank * (self.rank - 1) ** (i - 1)

    def reduce(self, letters: Sequence[Letter]) -> tuple[Letter, ...]:
        word: list[Letter] = []
        for letter in letters:
            if word and word[-1].generator_index == letter.generator_index:
                word.pop()
            else:
                word.append(Letter(letter.generator_index))
        return tuple(word)

    def describe(self) -> dict:
        return {"kind": "universal_coxeter", "rank": self.rank}


@dataclass(frozen=True)
class RightAngledCoxeter(GroupModel):
    """
    Coxeter group whose generators either commute or generate a free
    product of two copies of Z/2

    commuting holds the pairs (i, j), i < j, joined in the commutation
    graph
    """

    rank: int
    commuting: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.rank < 2:
            raise DomainError(
                f"A right-angled Coxeter group needs rank >= 2, got {self.rank}"
            )
        for i, j in self.commuting:
            if i == j:
                raise DomainError(f"The commutation graph has a loop at {i}")
            if not (0 <= i < j < self.rank):
                raise DomainError(f"Edge {(i, j)} is not valid for rank {self.rank}")

    @classmethod
    def from_graph(cls, graph: nx.Graph) -> "RightAngledCoxeter":
        """
        Builds the group of a commutation graph on vertices 0..n-1

        Raises:
            DomainError: If the graph is directed, has loops or its
                         vertices are not 0..n-1.
        """
        if graph.is_directed():
            raise DomainError("The commutation graph must be undirected")
        if nx.number_of_selfloops(graph):
            raise DomainError("The commutation graph must be loop-free")
        if sorted(graph.nodes) != list(range(graph.number_of_nodes())):
            raise DomainError("Commutation graph vertices must be 0..n-1")
        edges = frozenset((min(u, v), max(u, v)) for u, v in graph.edges)
        return cls(graph.number_of_nodes(), edges)

    @classmethod
    def from_coxeter_matrix(cls, matrix: Sequence[Sequence]) -> "RightAngledCoxeter":
        """
        Builds the group of a Coxeter matrix whose off-diagonal entries
        are 2 or infinity

        Infinity may be written as math.inf, 0, "inf" or "infinity".
        Other entries need the Tits word-problem solution and are
        rejected.
        """
        n = len(matrix)
        edges = set()
        for i in range(n):
            if len(matrix[i]) != n:
                raise DomainError("The Coxeter matrix must be square")
            if matrix[i][i] != 1:
                raise DomainError("A Coxeter matrix has ones on its diagonal")
            for j in range(i + 1, n):
                entry, mirror = _coxeter_entry(matrix[i][j]), _coxeter_entry(matrix[j][i])
                if entry != mirror:
                    raise DomainError("The Coxeter matrix must be symmetric")
                if entry == 2:
                    edges.add((i, j))
                elif entry != "inf":
                    raise DomainError(
                        f"Coxeter entry m({i},{j}) = {matrix[i][j]} is not supported; "
                        "only 2 and infinity are"
                    )
        return cls(n, frozenset(edges))

    @cached_property
    def graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.rank))
        graph.add_edges_from(self.commuting)
        return graph

    @property
    def name(self) -> str:
        edges = ",".join(f"{i}-{j}" for i, j in sorted(self.commuting))
        return f"RightAngledCoxeter({self.rank};{edges})"

    def is_involutive(self, index: int) -> bool:
        return True

    def commute(self, i: int, j: int) -> bool:
        return self.graph.has_edge(i, j)

    def reduce(self, letters: Sequence[Letter]) -> tuple[Letter, ...]:
        word: list[int] = []
        for letter in letters:
            s = letter.generator_index
            # Look for an earlier s that can be shuffled next to this one
            for pos in range(len(word) - 1, -1, -1):
                if word[pos] == s:
                    del word[pos]
                    break
                if not self.commute(s, word[pos]):
                    word.append(s)
                    break
            else:
                word.append(s)
        return tuple(Letter(s) for s in self._shortlex(word))

    def _shortlex(self, word: list[int]) -> list[int]:
        # word is reduced; peel off the smallest letter that can be moved
        # to the front until nothing is left
        remaining = list(word)
        ordered = []
        while remaining:
            best = None
            for pos, s in enumerate(remaining):
                if best is not None and s >= remaining[best]:
                    continue
                if all(self.commute(s, remaining[p]) for p in range(pos)):
                    best = pos
            ordered.append(remaining.pop(best))
        return ordered

    def describe(self) -> dict:
        return {
            "kind": "right_angled_coxeter",
            "rank": self.rank,
            "edges": [list(edge) for edge in sorted(self.commuting)],
        }


def _coxeter_entry(value):
    if value in (0, "inf", "infinity", float("inf")):
        return "inf"
    return value


@dataclass(frozen=True)
class FreeProduct(GroupModel):
    """
    Free product of factor models; the generators are the factors'
    generators renumbered consecutively
    """

    factors: tuple[GroupModel, ...]

    def __post_init__(self):
        if not self.factors:
            raise DomainError("A free product needs at least one factor")
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def rank(self) -> int:
        return sum(factor.rank for factor in self.factors)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        offsets, total = [], 0
        for factor in self.factors:
            offsets.append(total)
            total += factor.rank
        return tuple(offsets)

    @cached_property
    def _owner(self) -> tuple[int, ...]:
        return tuple(
            position
            for position, factor in enumerate(self.factors)
            for _ in range(factor.rank)
        )

    def factor_of(self, index: int) -> int:
        """Position of the factor owning a global generator index"""
        return self._owner[index]

    def to_local(self, letter: Letter) -> Letter:
        position = self._owner[letter.generator_index]
        return Letter(letter.generator_index - self.offsets[position], letter.inverted)

    def to_global(self, position: int, letter: Letter) -> Letter:
        return Letter(letter.generator_index + self.offsets[position], letter.inverted)

    @property
    def name(self) -> str:
        return " * ".join(factor.name for factor in self.factors)

    @property
    def minimal(self) -> bool:
        return all(factor.minimal for factor in self.factors)

    @property
    def free_on_generators(self) -> bool:
        return all(factor.free_on_generators for factor in self.factors)

    def is_involutive(self, index: int) -> bool:
        position = self._owner[index]
        return self.factors[position].is_involutive(index - self.offsets[position])

    def closed_form_sphere_size(self, i: int) -> int | None:
        if i > 0 and all(isinstance(f, UniversalCoxeter) for f in self.factors):
            return self.rank * (self.rank - 1) ** (i - 1)
        return super().closed_form_sphere_size(i)

    def blocks(self, letters: Sequence[Letter]) -> list[tuple[int, list[Letter]]]:
        """Splits a word into maximal runs of letters from one factor, as local letters"""
        runs: list[tuple[int, list[Letter]]] = []
        for letter in letters:
            position = self._owner[letter.generator_index]
            if runs and runs[-1][0] == position:
                runs[-1][1].append(self.to_local(letter))
            else:
                runs.append((position, [self.to_local(letter)]))
        return runs

    def reduce(self, letters: Sequence[Letter]) -> tuple[Letter, ...]:
        stack: list[tuple[int, tuple[Letter, ...]]] = []
        for position, run in self.blocks(letters):
            factor = self.factors[position]
            if stack and stack[-1][0] == position:
                merged = factor.reduce(stack.pop()[1] + tuple(run))
            else:
                merged = factor.reduce(run)
            # After a pop the new top belongs to another factor
            if merged:
                stack.append((position, merged))
        return tuple(
            self.to_global(position, letter)
            for position, block in stack
            for letter in block
        )

    def describe(self) -> dict:
        return {
            "kind": "free_product",
            "factors": [factor.describe() for factor in self.factors],
        }
