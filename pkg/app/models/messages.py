"""
Messages exchanged between users and databases in one round.
"""

from typing import Dict, List

from pydantic import BaseModel, Field, model_validator

from app.models.permutation import SubpacketId
from app.utils.errors import IndexOutOfRange


class DownlinkSelection(BaseModel):
    """
    The P * r' permuted ids broadcast by the designated database.

    Cases 1/2 carry (real segment, permuted subpacket) pairs, cases 3/4
    (permuted segment, permuted subpacket) pairs.
    """

    targets: List[SubpacketId] = Field(default_factory=list, description="Permuted ids")

    @model_validator(mode="after")
    def check_distinct(self) -> "DownlinkSelection":
        if len(set(self.targets)) != len(self.targets):
            raise IndexOutOfRange(f"downlink targets repeat: {self.targets}")
        return self

    def by_segment(self) -> Dict[int, List[int]]:
        """Per-segment lists of permuted subpacket slots (the V_j sets of cases 1/2)."""
        grouped: Dict[int, List[int]] = {}
        for target in self.targets:
            grouped.setdefault(target.segment, []).append(target.subpacket)
        return grouped


class ReadAnswer(BaseModel):
    """One database's scalar answer to a read query."""

    db_index: int = Field(..., ge=1, description="Answering database n")
    target: SubpacketId = Field(..., description="Permuted id that was queried")
    value: int = Field(..., ge=0, description="Answer residue")


class UpdateTuple(BaseModel):
    """
    One (update, subpacket, segment) triple of a writing phase.

    subpacket is always a permuted slot; segment is real for cases 1/2 and
    permuted for cases 3/4.
    """

    update: int = Field(..., ge=0, description="Noise-masked combined update residue")
    subpacket: int = Field(..., ge=1, description="Permuted subpacket index")
    segment: int = Field(..., ge=1, description="Segment index")

    @property
    def index(self) -> SubpacketId:
        return SubpacketId(self.segment, self.subpacket)


class DecodedSubpacket(BaseModel):
    """ell parameters recovered for one real subpacket."""

    real_id: SubpacketId = Field(..., description="Real (segment, subpacket)")
    params: List[int] = Field(..., description="Decoded parameter residues")


class LocalUpdate(BaseModel):
    """
    A user's full update for one round.

    deltas maps every real id to its ell increments; magnitude_key is the
    integer ranking score used by top-r selection.
    """

    deltas: Dict[SubpacketId, List[int]] = Field(..., description="Increments per real id")
    magnitude_key: Dict[SubpacketId, int] = Field(..., description="Ranking score per real id")

    @model_validator(mode="after")
    def check_keys(self) -> "LocalUpdate":
        missing = set(self.deltas) - set(self.magnitude_key)
        if missing:
            raise IndexOutOfRange(f"magnitude_key missing for {sorted(missing)}")
        return self
