"""Modular-sum draw arithmetic.

Stakeholder contributions live in {0, ..., m-1} for a modulus m and are
combined by addition mod m.  If any single contribution is uniform and
independent of the rest, the sum is uniform, so one honest party is
enough to make the draw fair.
"""

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TypeVar

from .errors import ConfigurationError, DomainError

# Sums are reduced after every addition, so intermediates stay below 2*m.
# Capping m below 2^63 keeps every intermediate inside 64 bits and lets
# values be serialized as fixed 8-byte words.
MAX_MODULUS = 2**63 - 1

T = TypeVar("T")


@dataclass(frozen=True)
class Modulus:
    """Wrap-around bound of the draw; outcomes live in {0, ..., m-1}."""

    m: int

    def __post_init__(self) -> None:
        if not isinstance(self.m, int) or isinstance(self.m, bool):
            raise DomainError("modulus must be an integer")
        if self.m < 2:
            raise DomainError(f"modulus must be at least 2, got {self.m}")
        if self.m > MAX_MODULUS:
            raise DomainError(f"modulus must be at most 2^63 - 1, got {self.m}")


@dataclass(frozen=True)
class ContributionValue:
    """A value in [0, m), tagged with the modulus it belongs to."""

    n: int
    modulus: Modulus

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or isinstance(self.n, bool):
            raise DomainError("contribution must be an integer")
        if not 0 <= self.n < self.modulus.m:
            raise DomainError(
                f"contribution {self.n} outside [0, {self.modulus.m})"
            )


def contribution(n: int, m: int) -> ContributionValue:
    """Shorthand for ContributionValue(n, Modulus(m))."""
    return ContributionValue(n, Modulus(m))


def mod_add(values: Iterable[ContributionValue], m: Modulus) -> ContributionValue:
    """Sum contributions mod m.

    All inputs must carry the same modulus m; the reduction happens after
    every addition so intermediates never exceed 2*m.  The result does
    not depend on input order.
    """
    total = 0
    count = 0
    for v in values:
        if v.modulus != m:
            raise DomainError(
                f"mixed moduli: contribution carries {v.modulus.m}, expected {m.m}"
            )
        total = (total + v.n) % m.m
        count += 1
    if count == 0:
        raise DomainError("mod_add requires at least one contribution")
    return ContributionValue(total, m)


def to_unit_fraction(value: ContributionValue) -> float:
    """Map n in [0, m) to the nearest float to n/m, always strictly below 1.0.

    For m <= 2^53 the mapping is strictly increasing in n.  For larger m
    distinct contributions can round to the same float, and (m-1)/m can
    round up to 1.0; the result is clamped to the largest float below 1.
    """
    f = value.n / value.modulus.m
    if f >= 1.0:
        f = math.nextafter(1.0, 0.0)
    return f


def select_candidate(value: ContributionValue, candidates: Sequence[T]) -> T:
    """Pick the candidate indexed by the drawn value.

    The pool size must equal the modulus exactly.  Reducing the draw mod a
    smaller pool would skew probabilities, so a mismatched pool is a
    configuration error, never a silent wrap.
    """
    if len(candidates) != value.modulus.m:
        raise ConfigurationError(
            f"candidate pool size {len(candidates)} != modulus {value.modulus.m}"
        )
    return candidates[value.n]
