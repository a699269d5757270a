"""
Scheme parameters and the per-case subpacketization rule.
"""

from enum import IntEnum
from fractions import Fraction
from typing import Union

import galois
from pydantic import BaseModel, Field, model_validator

from app.utils.errors import InadmissibleN, InvalidB, InvalidCase, InvalidParams


class SchemeCase(IntEnum):
    """The four storage / permutation variants."""

    UNCODED_WITHIN = 1
    CODED_WITHIN = 2
    UNCODED_TWO_STAGE = 3
    CODED_TWO_STAGE = 4

    @property
    def is_coded(self) -> bool:
        """MDS-coded storage: one symbol per subpacket per database."""
        return self in (SchemeCase.CODED_WITHIN, SchemeCase.CODED_TWO_STAGE)

    @property
    def has_inter(self) -> bool:
        """Segments are permuted as well as subpackets within them."""
        return self in (SchemeCase.UNCODED_TWO_STAGE, SchemeCase.CODED_TWO_STAGE)


# case -> (offset, divisor, minimum N) with ell = (N - offset) / divisor
_SUBPACKETIZATION_RULES = {
    SchemeCase.UNCODED_WITHIN: (2, 2, "N = 2l + 2"),
    SchemeCase.CODED_WITHIN: (1, 3, "N = 3l + 1"),
    SchemeCase.UNCODED_TWO_STAGE: (4, 2, "N = 2l + 4"),
    SchemeCase.CODED_TWO_STAGE: (1, 5, "N = 5l + 1"),
}


def as_case(case: Union[int, SchemeCase]) -> SchemeCase:
    """Coerce an integer to a SchemeCase, raising InvalidCase."""
    try:
        return SchemeCase(int(case))
    except (TypeError, ValueError):
        raise InvalidCase(f"case must be one of 1, 2, 3, 4 (got {case!r})") from None


def derive_subpacketization(case: Union[int, SchemeCase], n_databases: int) -> int:
    """
    Subpacketization ell for a case and database count.

    Args:
        case: Scheme case 1..4
        n_databases: Number of databases N

    Returns:
        ell >= 1

    Raises:
        InadmissibleN: If N is not of the form required by the case
    """
    case = as_case(case)
    offset, divisor, rule = _SUBPACKETIZATION_RULES[case]
    excess = n_databases - offset
    if excess < divisor or excess % divisor:
        raise InadmissibleN(
            f"case {int(case)} requires {rule} for an integer l >= 1 (got N={n_databases})"
        )
    return excess // divisor


def rate_count(rate: float, total: int) -> int:
    """Number of items selected by a sparsification rate, which must be integral."""
    exact = Fraction(rate).limit_denominator(10**6) * total
    if exact.denominator != 1 or exact < 1:
        raise InvalidParams(
            f"rate {rate} times {total} must be a positive integer (got {float(exact)})"
        )
    return int(exact)


class SchemeParams(BaseModel):
    """All protocol constants of one deployment."""

    case: SchemeCase = Field(..., description="Scheme case 1..4")
    num_databases: int = Field(..., ge=1, description="Number of databases N")
    num_subpackets: int = Field(..., ge=2, description="Number of subpackets P")
    num_segments: int = Field(..., ge=1, description="Number of segments B")
    r: float = Field(..., gt=0, le=1, description="Uplink sparsification rate")
    r_prime: float = Field(..., gt=0, le=1, description="Downlink sparsification rate")
    q: int = Field(default=2147483647, description="Prime field modulus")

    @model_validator(mode="after")
    def check_invariants(self) -> "SchemeParams":
        """Divisibility, rate integrality and admissibility of N."""
        derive_subpacketization(self.case, self.num_databases)
        if self.num_subpackets % self.num_segments:
            raise InvalidB(
                f"number of segments B={self.num_segments} must divide P={self.num_subpackets}"
            )
        if self.num_segments >= self.num_subpackets:
            raise InvalidB(
                f"number of segments B={self.num_segments} must be smaller than P={self.num_subpackets}"
            )
        rate_count(self.r, self.num_subpackets)
        rate_count(self.r_prime, self.num_subpackets)
        if not galois.is_prime(self.q):
            raise InvalidParams(f"q={self.q} is not prime")
        return self

    @property
    def ell(self) -> int:
        """Subpacketization: parameters per subpacket."""
        return derive_subpacketization(self.case, self.num_databases)

    @property
    def model_size(self) -> int:
        """L = P * ell."""
        return self.num_subpackets * self.ell

    @property
    def segment_size(self) -> int:
        """Subpackets per segment, P / B."""
        return self.num_subpackets // self.num_segments

    @property
    def upload_count(self) -> int:
        """P * r subpackets written per user per round."""
        return rate_count(self.r, self.num_subpackets)

    @property
    def download_count(self) -> int:
        """P * r' subpackets read per user per round."""
        return rate_count(self.r_prime, self.num_subpackets)

    class Config:
        json_schema_extra = {
            "example": {
                "case": 1,
                "num_databases": 6,
                "num_subpackets": 12,
                "num_segments": 3,
                "r": 0.25,
                "r_prime": 0.25,
                "q": 2147483647,
            }
        }
