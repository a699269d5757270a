"""
Permutation data model: the user-side secret shared by all users.
"""

from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

from app.utils.errors import DimensionMismatch, IndexOutOfRange


class SubpacketId(NamedTuple):
    """
    A (segment, subpacket) pair, both 1-based.

    Depending on context the pair is real, permuted, or (cases 1/2) a real
    segment with a permuted subpacket slot.
    """

    segment: int
    subpacket: int


class Permutation:
    """
    One-line permutation of {1..m}.

    mapping[i - 1] is the real index stored at permuted position i; the
    inverse is precomputed so both directions are O(1).
    """

    def __init__(self, mapping: Iterable[int]):
        mapping = tuple(int(v) for v in mapping)
        size = len(mapping)
        if size < 1 or sorted(mapping) != list(range(1, size + 1)):
            raise DimensionMismatch(f"{mapping} is not a permutation of 1..{size}")

        inverse = [0] * size
        for slot, real in enumerate(mapping, start=1):
            inverse[real - 1] = slot

        self._mapping = mapping
        self._inverse = tuple(inverse)

    @classmethod
    def identity(cls, size: int) -> "Permutation":
        return cls(range(1, size + 1))

    @property
    def mapping(self) -> Tuple[int, ...]:
        return self._mapping

    @property
    def inverse(self) -> Tuple[int, ...]:
        return self._inverse

    @property
    def size(self) -> int:
        return len(self._mapping)

    def forward(self, slot: int) -> int:
        """Real index stored at a permuted slot."""
        self._check(slot)
        return self._mapping[slot - 1]

    def backward(self, real: int) -> int:
        """Permuted slot holding a real index."""
        self._check(real)
        return self._inverse[real - 1]

    def _check(self, index: int) -> None:
        if not 1 <= index <= len(self._mapping):
            raise IndexOutOfRange(f"index {index} outside 1..{len(self._mapping)}")

    def __len__(self) -> int:
        return len(self._mapping)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Permutation) and self._mapping == other._mapping

    def __hash__(self) -> int:
        return hash(self._mapping)

    def __repr__(self) -> str:
        return f"Permutation{self._mapping}"


class PermutationSet:
    """
    B within-segment permutations plus the inter-segment permutation of
    cases 3 and 4.
    """

    def __init__(self, within: Sequence[Permutation], inter: Optional[Permutation] = None):
        if not within:
            raise DimensionMismatch("at least one within-segment permutation is required")
        sizes = {p.size for p in within}
        if len(sizes) != 1:
            raise DimensionMismatch(f"within-segment permutations differ in size: {sorted(sizes)}")
        if inter is not None and inter.size != len(within):
            raise DimensionMismatch(
                f"inter-segment permutation has size {inter.size}, expected {len(within)}"
            )
        self.within: List[Permutation] = list(within)
        self.inter = inter

    @classmethod
    def from_mappings(
        cls,
        within: Sequence[Sequence[int]],
        inter: Optional[Sequence[int]] = None,
    ) -> "PermutationSet":
        """Build from plain one-line tuples, e.g. fixture permutations."""
        return cls(
            [Permutation(m) for m in within],
            Permutation(inter) if inter is not None else None,
        )

    @property
    def num_segments(self) -> int:
        return len(self.within)

    @property
    def segment_size(self) -> int:
        return self.within[0].size

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PermutationSet)
            and self.within == other.within
            and self.inter == other.inter
        )

    def __repr__(self) -> str:
        return f"PermutationSet(within={self.within}, inter={self.inter})"
