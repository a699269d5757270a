"""
Sparsity-pattern distributions and leakage table rows.
"""

import itertools
import math
from fractions import Fraction
from numbers import Rational
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from app.utils.errors import IndexOutOfRange, InvalidB, InvalidParams

Probability = Union[Fraction, float]

# Supports above this size fall back to double precision
DEFAULT_EXACT_SUPPORT_LIMIT = 10_000


class SegmentHistogram(BaseModel):
    """Number of sparse subpackets in each segment, in segment order."""

    counts: Tuple[int, ...] = Field(..., description="Per-segment counts")

    @property
    def multiset(self) -> Tuple[int, ...]:
        """Order-insensitive form."""
        return tuple(sorted(self.counts, reverse=True))

    class Config:
        frozen = True


class LeakageRow(BaseModel):
    """One row of a leakage curve."""

    B: int = Field(..., description="Number of segments")
    H_hat_bits: float = Field(..., description="Leakage with within-segment permutations only")
    H_tilde_bits: float = Field(..., description="Leakage with inter-segment permutations added")


class PatternDistribution:
    """
    Probability mass over Pr-subsets of subpacket indices {1..P}.

    Masses given as Fractions or ints are kept exact while the support has at
    most ``exact_support_limit`` elements; float masses, or larger supports,
    use double precision and must sum to 1 within 1e-12.
    """

    def __init__(
        self,
        num_subpackets: int,
        num_segments: int,
        sparse_count: int,
        mass: Mapping[Iterable[int], Union[Probability, int]],
        exact_support_limit: int = DEFAULT_EXACT_SUPPORT_LIMIT,
    ):
        if num_segments < 1 or num_subpackets % num_segments:
            raise InvalidB(
                f"number of segments B={num_segments} must divide P={num_subpackets}"
            )
        if not 1 <= sparse_count <= num_subpackets:
            raise InvalidParams(f"Pr={sparse_count} outside 1..{num_subpackets}")

        support: Dict[FrozenSet[int], Probability] = {}
        for subset, probability in mass.items():
            key = frozenset(int(s) for s in subset)
            if len(key) != sparse_count:
                raise InvalidParams(f"{sorted(key)} does not have {sparse_count} distinct indices")
            if any(not 1 <= s <= num_subpackets for s in key):
                raise IndexOutOfRange(f"{sorted(key)} has indices outside 1..{num_subpackets}")
            if probability < 0:
                raise InvalidParams(f"negative probability for {sorted(key)}")
            if probability:
                support[key] = support.get(key, 0) + probability

        exact = len(support) <= exact_support_limit and all(
            isinstance(p, Rational) for p in support.values()
        )
        if exact:
            support = {k: Fraction(p) for k, p in support.items()}
            if sum(support.values()) != 1:
                raise InvalidParams("probabilities must sum to 1")
        else:
            support = {k: float(p) for k, p in support.items()}
            if abs(math.fsum(support.values()) - 1.0) > 1e-12:
                raise InvalidParams("probabilities must sum to 1 within 1e-12")

        self.num_subpackets = num_subpackets
        self.num_segments = num_segments
        self.sparse_count = sparse_count
        self.mass = support
        self.exact = exact

    @property
    def segment_size(self) -> int:
        return self.num_subpackets // self.num_segments

    @classmethod
    def uniform(
        cls,
        num_subpackets: int,
        num_segments: int,
        sparse_count: int,
        exact_support_limit: int = DEFAULT_EXACT_SUPPORT_LIMIT,
    ) -> "PatternDistribution":
        """Every Pr-subset equally likely."""
        subsets = list(itertools.combinations(range(1, num_subpackets + 1), sparse_count))
        weight = Fraction(1, len(subsets))
        return cls(
            num_subpackets,
            num_segments,
            sparse_count,
            {s: weight for s in subsets},
            exact_support_limit,
        )

    @classmethod
    def point_mass(
        cls, num_subpackets: int, num_segments: int, subset: Iterable[int]
    ) -> "PatternDistribution":
        subset = tuple(subset)
        return cls(num_subpackets, num_segments, len(subset), {subset: Fraction(1)})

    @classmethod
    def random(
        cls,
        num_subpackets: int,
        num_segments: int,
        sparse_count: int,
        rng: np.random.Generator,
        support_size: Optional[int] = None,
        max_weight: int = 100,
    ) -> "PatternDistribution":
        """Random rational masses on a random support (all subsets by default)."""
        subsets = list(itertools.combinations(range(1, num_subpackets + 1), sparse_count))
        if support_size is not None and support_size < len(subsets):
            chosen = rng.choice(len(subsets), size=support_size, replace=False)
            subsets = [subsets[i] for i in sorted(chosen)]
        weights = rng.integers(1, max_weight + 1, size=len(subsets))
        total = int(weights.sum())
        return cls(
            num_subpackets,
            num_segments,
            sparse_count,
            {s: Fraction(int(w), total) for s, w in zip(subsets, weights)},
        )

    def __repr__(self) -> str:
        return (
            f"PatternDistribution(P={self.num_subpackets}, B={self.num_segments}, "
            f"Pr={self.sparse_count}, support={len(self.mass)}, exact={self.exact})"
        )
