"""
Communication and storage accounting.

Costs are normalized by the model size L = P * ell. An index over P values
costs log_q(P) symbols and stays symbolic, so measured and closed-form costs
compare exactly.
"""

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Union

from app.logging_config import get_logger
from app.models.params import SchemeCase, SchemeParams, as_case
from app.models.reports import (
    CostExpression,
    CostReport,
    RoundTranscript,
    StorageComplexity,
)
from app.utils.errors import MalformedTranscript


logger = get_logger(__name__)

# case -> (k, a) with per-rate coefficient k / (1 - a / N)
_COST_COEFFICIENTS = {
    SchemeCase.UNCODED_WITHIN: (2, 2),
    SchemeCase.CODED_WITHIN: (3, 1),
    SchemeCase.UNCODED_TWO_STAGE: (2, 4),
    SchemeCase.CODED_TWO_STAGE: (5, 1),
}


def cost_coefficient(case: Union[int, SchemeCase], num_databases: int) -> Fraction:
    """k / (1 - a / N), which equals N / ell for admissible N."""
    k, a = _COST_COEFFICIENTS[as_case(case)]
    return Fraction(k) / (1 - Fraction(a, num_databases))


def read_formula(params: SchemeParams) -> CostExpression:
    """C_R = coef * r' * (1 + log_q(P) / N)."""
    rate = Fraction(params.download_count, params.num_subpackets)
    coef = cost_coefficient(params.case, params.num_databases) * rate
    return CostExpression(coef, coef / params.num_databases)


def write_formula(params: SchemeParams) -> CostExpression:
    """C_W = coef * r * (1 + log_q(P))."""
    rate = Fraction(params.upload_count, params.num_subpackets)
    coef = cost_coefficient(params.case, params.num_databases) * rate
    return CostExpression(coef, coef)


def _dominant(case: SchemeCase, num_segments: int, within: int, inter: int) -> str:
    if case.is_coded:
        data_term = "O(L^2/N^2)" if num_segments == 1 else "O(L^2/(N^2 B))"
        inter_term = "O(B^2)"
    else:
        data_term = "O(L^2)" if num_segments == 1 else "O(L^2/B)"
        inter_term = "O(N^2 B^2)"
    if not case.has_inter:
        return data_term
    return inter_term if inter > within else data_term


def storage_counts(
    case: Union[int, SchemeCase], num_subpackets: int, num_segments: int, ell: int
) -> StorageComplexity:
    """
    Closed-form symbols stored per database.

    Data is P * ell symbols (uncoded) or P (coded); each of the B within
    matrices is (P ell / B)^2 or (P / B)^2; cases 3/4 add (B ell)^2 or B^2.
    """
    case = as_case(case)
    if case.is_coded:
        data = num_subpackets
        within = num_segments * (num_subpackets // num_segments) ** 2
        inter = num_segments**2 if case.has_inter else 0
    else:
        data = num_subpackets * ell
        within = num_segments * (num_subpackets * ell // num_segments) ** 2
        inter = (num_segments * ell) ** 2 if case.has_inter else 0
    return StorageComplexity(
        data=data,
        within=within,
        inter=inter,
        total=data + within + inter,
        dominant=_dominant(case, num_segments, within, inter),
    )


def storage_complexity(params: SchemeParams) -> StorageComplexity:
    return storage_counts(params.case, params.num_subpackets, params.num_segments, params.ell)


def measure_round(
    transcript: RoundTranscript, params: SchemeParams, user: Optional[int] = None
) -> CostReport:
    """
    Costs of one round from a single user's perspective.

    Downloads are every data answer plus the designated database's index
    broadcast; uploads are every tuple to every database, each one data
    symbol plus one index.

    Raises:
        MalformedTranscript: If tallies are missing or disagree with the messages
    """
    counts = transcript.symbol_counts
    if user is None:
        if not counts.download_data:
            raise MalformedTranscript(f"round {transcript.round} has no users")
        user = min(counts.download_data)

    if user not in counts.download_data or user not in counts.upload_tuples:
        raise MalformedTranscript(f"round {transcript.round} has no tallies for user {user}")
    if counts.download_index != len(transcript.downlink.targets):
        raise MalformedTranscript(
            f"index tally {counts.download_index} does not match "
            f"{len(transcript.downlink.targets)} broadcast targets"
        )
    answers = transcript.answers.get(user, [])
    if counts.download_data[user] != len(answers):
        raise MalformedTranscript(
            f"download tally {counts.download_data[user]} does not match {len(answers)} answers"
        )
    uploads = counts.upload_tuples[user]
    writes = transcript.writes.get(user, {})
    if set(uploads) != set(range(1, params.num_databases + 1)):
        raise MalformedTranscript(
            f"uploads reach databases {sorted(uploads)}, expected 1..{params.num_databases}"
        )
    for n, tally in uploads.items():
        if tally != len(writes.get(n, [])):
            raise MalformedTranscript(f"upload tally to database {n} does not match its tuples")

    model_size = params.model_size
    read_cost = CostExpression(
        Fraction(counts.download_data[user], model_size),
        Fraction(counts.download_index, model_size),
    )
    uploaded = sum(uploads.values())
    write_cost = CostExpression(Fraction(uploaded, model_size), Fraction(uploaded, model_size))

    report = CostReport(
        params=params,
        read_cost=read_cost,
        write_cost=write_cost,
        read_formula=read_formula(params),
        write_formula=write_formula(params),
        storage_sizes=list(transcript.storage_sizes),
        storage_formula=storage_complexity(params),
    )
    logger.info(
        "Round costs measured",
        extra={
            "round": transcript.round,
            "user": user,
            "case": int(params.case),
            "read_cost": read_cost.describe(),
            "write_cost": write_cost.describe(),
            "matches": report.matches,
        },
    )
    return report


def communication_identical(reports: Sequence[CostReport]) -> bool:
    """True when every report has the same measured read and write costs."""
    if not reports:
        return True
    first = reports[0]
    return all(
        r.read_cost == first.read_cost and r.write_cost == first.write_cost for r in reports
    )


def write_cost_report(
    payload: Mapping[str, Any],
    path: Union[str, Path],
) -> Path:
    """Write a JSON cost document."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n")
    logger.info("Cost report written", extra={"path": str(path)})
    return path


def cost_document(
    reports: Sequence[CostReport], config: Mapping[str, Any]
) -> Dict[str, Any]:
    """JSON-ready document: resolved config, one entry per report and the overall verdict."""
    return {
        "config": dict(config),
        "reports": [r.as_dict() for r in reports],
        "communication_identical_across_B": communication_identical(reports),
        "matches": all(r.matches for r in reports),
    }
