"""Models module for the PRUW simulator."""

from app.models.params import SchemeCase, SchemeParams, derive_subpacketization
from app.models.permutation import Permutation, PermutationSet, SubpacketId
from app.models.storage import DatabaseState, ModelState
from app.models.messages import (
    DecodedSubpacket,
    DownlinkSelection,
    LocalUpdate,
    ReadAnswer,
    UpdateTuple,
)
from app.models.reports import (
    CostExpression,
    CostReport,
    RoundTranscript,
    StorageBreakdown,
    StorageComplexity,
    VerificationReport,
)
from app.models.leakage import LeakageRow, PatternDistribution, SegmentHistogram
from app.models.run_config import RunConfig


__all__ = [
    "SchemeCase",
    "SchemeParams",
    "derive_subpacketization",
    "Permutation",
    "PermutationSet",
    "SubpacketId",
    "DatabaseState",
    "ModelState",
    "DecodedSubpacket",
    "DownlinkSelection",
    "LocalUpdate",
    "ReadAnswer",
    "UpdateTuple",
    "CostExpression",
    "CostReport",
    "RoundTranscript",
    "StorageBreakdown",
    "StorageComplexity",
    "VerificationReport",
    "LeakageRow",
    "PatternDistribution",
    "SegmentHistogram",
    "RunConfig",
]
