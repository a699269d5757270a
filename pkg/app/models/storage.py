"""
Model and per-database storage state.
"""

from collections import Counter
from typing import TYPE_CHECKING, List, Optional

import galois
import numpy as np

from app.models.permutation import SubpacketId
from app.utils.errors import DimensionMismatch, IndexOutOfRange

if TYPE_CHECKING:
    from app.services.permutation_engine import NoisyReversingMatrix


class ModelState:
    """
    The plaintext model: P subpackets of ell parameters each.

    values[g] holds subpacket g = (segment - 1) * (P / B) + (subpacket - 1).
    """

    def __init__(self, values: galois.FieldArray, num_segments: int):
        if values.ndim != 2:
            raise DimensionMismatch(f"model values must be (P, ell), got shape {values.shape}")
        if values.shape[0] % num_segments:
            raise DimensionMismatch(
                f"{num_segments} segments do not divide {values.shape[0]} subpackets"
            )
        self.values = values
        self.num_segments = num_segments

    @classmethod
    def zeros(cls, field, num_subpackets: int, ell: int, num_segments: int) -> "ModelState":
        return cls(field.Zeros((num_subpackets, ell)), num_segments)

    @classmethod
    def random(
        cls, field, num_subpackets: int, ell: int, num_segments: int, rng: np.random.Generator
    ) -> "ModelState":
        return cls(field.Random((num_subpackets, ell), seed=rng), num_segments)

    @property
    def num_subpackets(self) -> int:
        return self.values.shape[0]

    @property
    def ell(self) -> int:
        return self.values.shape[1]

    @property
    def segment_size(self) -> int:
        return self.num_subpackets // self.num_segments

    @property
    def size(self) -> int:
        """L = P * ell."""
        return int(self.values.size)

    def row_of(self, sid: SubpacketId) -> int:
        if not 1 <= sid.segment <= self.num_segments:
            raise IndexOutOfRange(f"segment {sid.segment} outside 1..{self.num_segments}")
        if not 1 <= sid.subpacket <= self.segment_size:
            raise IndexOutOfRange(f"subpacket {sid.subpacket} outside 1..{self.segment_size}")
        return (sid.segment - 1) * self.segment_size + sid.subpacket - 1

    def subpacket(self, sid: SubpacketId) -> galois.FieldArray:
        return self.values[self.row_of(sid)]

    def add(self, sid: SubpacketId, delta: galois.FieldArray) -> None:
        row = self.row_of(sid)
        self.values[row] = self.values[row] + delta

    def copy(self) -> "ModelState":
        return ModelState(self.values.copy(), self.num_segments)


class DatabaseState:
    """
    Everything one database holds: its storage symbols, its noise-added
    reversing matrices and the popularity counts of the current round.

    Storage has length P * ell for uncoded cases and P for coded ones. The
    combined matrix of cases 3/4 is a cache derived from the other matrices.
    """

    def __init__(self, index: int, storage: galois.FieldArray):
        self.index = index
        self.storage = storage
        self.within_matrices: List["NoisyReversingMatrix"] = []
        self.inter_matrix: Optional["NoisyReversingMatrix"] = None
        self.combined_matrix: Optional[galois.FieldArray] = None
        self.popularity: Counter = Counter()

    def storage_counts(self) -> dict:
        """Stored symbol counts split into data, within matrices and inter matrix."""
        return {
            "data": int(self.storage.size),
            "within": sum(m.symbol_count for m in self.within_matrices),
            "inter": self.inter_matrix.symbol_count if self.inter_matrix is not None else 0,
        }

    def __repr__(self) -> str:
        return (
            f"DatabaseState(index={self.index}, storage={self.storage.size}, "
            f"within={len(self.within_matrices)}, inter={self.inter_matrix is not None})"
        )
