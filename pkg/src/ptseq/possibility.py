"""Finite possibility distributions and the max/min algebra built on them.

A possibility distribution assigns each element of a finite domain a degree
in [0, 1].  The possibility of a set is the largest degree it contains and
its necessity is one minus the possibility of its complement.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Literal

from .errors import DomainError

__all__ = [
    "Algebra",
    "PossibilityDistribution",
    "possibility_of",
    "necessity_of",
    "combine",
    "check_degree",
]


class Algebra(enum.Enum):
    """Conjunction used when composing joint possibilistic events.

    Disjunction is ``max`` in both modes.  ``MIN_MAX`` is the max-min
    semiring; ``ALL_MAX`` composes every joint term with ``max``,
    which is what makes the linear-time forward pass possible.
    """

    MIN_MAX = "minmax"
    ALL_MAX = "paper"

    @classmethod
    def parse(cls, value: "Algebra | str") -> "Algebra":
        if isinstance(value, Algebra):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(
                f"unknown algebra {value!r}; expected one of "
                f"{[a.value for a in cls]}"
            ) from None

    def conjunction(self, a: float, b: float) -> float:
        return min(a, b) if self is Algebra.MIN_MAX else max(a, b)

    @staticmethod
    def disjunction(a: float, b: float) -> float:
        return max(a, b)

    @property
    def conjunction_identity(self) -> float:
        """Neutral element of the conjunction on [0, 1]."""
        return 1.0 if self is Algebra.MIN_MAX else 0.0


def check_degree(value: float, name: str = "degree") -> float:
    value = float(value)
    if math.isnan(value) or value < 0.0 or value > 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class PossibilityDistribution:
    """Degrees ``pi(u)`` over a finite ordered domain.

    Degrees outside [0, 1] are rejected rather than clamped.  With
    ``normalized=True`` at least one degree must equal 1.
    """

    degrees: tuple[float, ...]
    normalized: bool = False

    def __post_init__(self) -> None:
        degrees = tuple(
            check_degree(d, f"degree[{i}]") for i, d in enumerate(self.degrees)
        )
        if not degrees:
            raise DomainError("a possibility distribution needs a nonempty domain")
        if self.normalized and max(degrees) != 1.0:
            raise DomainError("a normalized distribution needs a degree equal to 1")
        object.__setattr__(self, "degrees", degrees)

    @property
    def domain_size(self) -> int:
        return len(self.degrees)

    def _indices(self, subset: Iterable[int]) -> set[int]:
        idx = set()
        for i in subset:
            i = int(i)
            if i < 0 or i >= self.domain_size:
                raise DomainError(
                    f"index {i} outside domain of size {self.domain_size}"
                )
            idx.add(i)
        return idx

    def complement(self, subset: Iterable[int]) -> set[int]:
        return set(range(self.domain_size)) - self._indices(subset)


def possibility_of(dist: PossibilityDistribution, subset: Iterable[int]) -> float:
    """Sup of the degrees over ``subset``; the empty set has possibility 0."""
    idx = dist._indices(subset)
    return max((dist.degrees[i] for i in idx), default=0.0)


def necessity_of(dist: PossibilityDistribution, subset: Iterable[int]) -> float:
    """Inf of ``1 - pi(u)`` over the complement of ``subset``.

    The full domain has necessity 1 (infimum over the empty complement).
    """
    rest = dist.complement(subset)
    return min((1.0 - dist.degrees[i] for i in rest), default=1.0)


def combine(
    a: float,
    b: float,
    op: Literal["conjunction", "disjunction"],
    algebra: Algebra | str = Algebra.MIN_MAX,
) -> float:
    a = check_degree(a, "a")
    b = check_degree(b, "b")
    algebra = Algebra.parse(algebra)
    if op == "disjunction":
        return Algebra.disjunction(a, b)
    if op == "conjunction":
        return algebra.conjunction(a, b)
    raise DomainError(f"unknown connective {op!r}")
