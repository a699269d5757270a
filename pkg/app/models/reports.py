"""
Round transcripts, cost reports and verification reports.
"""

import math
from fractions import Fraction
from typing import Any, Dict, List, NamedTuple, Optional

from pydantic import BaseModel, Field

from app.models.messages import DecodedSubpacket, DownlinkSelection, ReadAnswer, UpdateTuple
from app.models.params import SchemeParams
from app.models.permutation import SubpacketId


class CostExpression(NamedTuple):
    """
    constant + log_q_p * log_q(P), with both coefficients exact rationals.

    Keeping log_q(P) symbolic makes measured and closed-form costs
    comparable with exact equality.
    """

    constant: Fraction
    log_q_p: Fraction

    @classmethod
    def zero(cls) -> "CostExpression":
        return cls(Fraction(0), Fraction(0))

    def plus(self, other: "CostExpression") -> "CostExpression":
        return CostExpression(self.constant + other.constant, self.log_q_p + other.log_q_p)

    def scaled(self, factor: Fraction) -> "CostExpression":
        return CostExpression(self.constant * factor, self.log_q_p * factor)

    def evaluate(self, q: int, num_subpackets: int) -> float:
        return float(self.constant) + float(self.log_q_p) * math.log(num_subpackets) / math.log(q)

    def describe(self) -> str:
        return f"{self.constant} + {self.log_q_p} * log_q(P)"


class StorageBreakdown(BaseModel):
    """Symbols stored at one database."""

    db_index: int = Field(..., description="Database n")
    data: int = Field(..., description="Model storage symbols")
    within: int = Field(..., description="Within-segment matrix symbols")
    inter: int = Field(default=0, description="Inter-segment matrix symbols")

    @property
    def total(self) -> int:
        return self.data + self.within + self.inter


class StorageComplexity(BaseModel):
    """Closed-form storage count for one database."""

    data: int
    within: int
    inter: int
    total: int
    dominant: str = Field(..., description="Asymptotic order of the total")


class SymbolCounts(BaseModel):
    """Raw tallies of one round, per user."""

    download_data: Dict[int, int] = Field(default_factory=dict)
    download_index: int = Field(default=0, description="Indices broadcast by the designated database")
    upload_tuples: Dict[int, Dict[int, int]] = Field(default_factory=dict)


class RoundTranscript(BaseModel):
    """Everything exchanged in one round."""

    round: int = Field(..., ge=1)
    downlink: DownlinkSelection
    answers: Dict[int, List[ReadAnswer]] = Field(default_factory=dict, description="Per user")
    reads: Dict[int, List[DecodedSubpacket]] = Field(default_factory=dict, description="Per user")
    writes: Dict[int, Dict[int, List[UpdateTuple]]] = Field(
        default_factory=dict, description="Per user, per database"
    )
    symbol_counts: SymbolCounts = Field(default_factory=SymbolCounts)
    storage_sizes: List[StorageBreakdown] = Field(default_factory=list)


class CostReport(BaseModel):
    """Measured communication and storage against the closed forms."""

    params: SchemeParams
    read_cost: CostExpression
    write_cost: CostExpression
    read_formula: CostExpression
    write_formula: CostExpression
    storage_sizes: List[StorageBreakdown]
    storage_formula: StorageComplexity

    @property
    def read_matches(self) -> bool:
        return self.read_cost == self.read_formula

    @property
    def write_matches(self) -> bool:
        return self.write_cost == self.write_formula

    @property
    def storage_matches(self) -> bool:
        return all(s.total == self.storage_formula.total for s in self.storage_sizes)

    @property
    def matches(self) -> bool:
        return self.read_matches and self.write_matches and self.storage_matches

    def as_dict(self) -> Dict[str, Any]:
        """JSON-ready view; rationals as strings plus their numeric value."""
        q, p = self.params.q, self.params.num_subpackets

        def render(expr: CostExpression) -> Dict[str, Any]:
            return {
                "constant": str(expr.constant),
                "log_q_P_coefficient": str(expr.log_q_p),
                "value": expr.evaluate(q, p),
            }

        return {
            "params": self.params.model_dump(mode="json"),
            "ell": self.params.ell,
            "model_size": self.params.model_size,
            "read_cost": render(self.read_cost),
            "read_formula": render(self.read_formula),
            "write_cost": render(self.write_cost),
            "write_formula": render(self.write_formula),
            "storage": [s.model_dump() | {"total": s.total} for s in self.storage_sizes],
            "storage_formula": self.storage_formula.model_dump(),
            "read_matches": self.read_matches,
            "write_matches": self.write_matches,
            "storage_matches": self.storage_matches,
            "matches": self.matches,
        }

    class Config:
        arbitrary_types_allowed = True


class Mismatch(BaseModel):
    """One subpacket whose decode differs from the oracle."""

    real_id: SubpacketId
    expected: List[int]
    decoded: List[int]


class VerificationReport(BaseModel):
    """Outcome of decoding the full model and diffing it against the oracle."""

    rounds_completed: int = Field(default=0)
    subpackets_checked: int = Field(default=0)
    mismatches: List[Mismatch] = Field(default_factory=list)
    error: Optional[str] = Field(default=None, description="Decode failure, if any")

    @property
    def ok(self) -> bool:
        return not self.mismatches and self.error is None
