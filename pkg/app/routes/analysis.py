"""
Analysis endpoints: leakage curves, cost reports and verified simulations.
"""

from typing import Any, Dict, List

from fastapi import APIRouter, Depends, Query
from pydantic import BaseModel, Field

from app.config import get_settings
from app.logging_config import get_logger
from app.models.leakage import LeakageRow
from app.models.params import SchemeParams
from app.models.run_config import parse_int_list
from app.services.cost_accountant import cost_document, measure_round
from app.services.leakage_analyzer import leakage_curve
from app.services.simulation import create_world, run_round, verify_world


logger = get_logger(__name__)
router = APIRouter(tags=["analysis"])


class SchemeRequest(BaseModel):
    """Scheme parameters as sent by a client; validated when converted."""

    case: int = Field(..., description="Scheme case 1..4")
    num_databases: int
    num_subpackets: int
    num_segments: int = 1
    r: float
    r_prime: float
    q: int = Field(default_factory=lambda: get_settings().field_modulus)
    seed: int = Field(default_factory=lambda: get_settings().default_seed, ge=0)
    users: int = Field(default=1, ge=1, le=16)

    def to_params(self) -> SchemeParams:
        return SchemeParams(**self.model_dump(exclude={"seed", "users"}))

    class Config:
        json_schema_extra = {
            "example": {
                "case": 2,
                "num_databases": 4,
                "num_subpackets": 60,
                "num_segments": 3,
                "r": 0.05,
                "r_prime": 0.05,
                "seed": 7,
                "users": 1,
            }
        }


class SimulateRequest(SchemeRequest):
    rounds: int = Field(default=1, ge=1, le=32)


class LeakageResponse(BaseModel):
    P: int
    Pr: int
    base: float
    rows: List[LeakageRow]


# Dependency for settings
def get_app_settings():
    return get_settings()


@router.get("/leakage", response_model=LeakageResponse)
def leakage(
    P: int = Query(..., ge=2, description="Number of subpackets"),
    Pr: int = Query(..., ge=1, description="Sparse-set size"),
    B: str = Query("1", description="Comma-separated segment counts"),
    base: float = Query(2.0, gt=1, description="Logarithm base"),
):
    """Closed-form leakage for uniform sparse sets, one row per segment count."""
    rows = leakage_curve(P, Pr, parse_int_list(B), base)
    return LeakageResponse(P=P, Pr=Pr, base=base, rows=rows)


@router.post("/costs")
def costs(request: SchemeRequest, settings=Depends(get_app_settings)) -> Dict[str, Any]:
    """Measure one round and compare it with the closed forms."""
    params = request.to_params()
    world = create_world(params, request.seed, request.users)
    report = measure_round(run_round(world), params)
    logger.info(
        "Costs requested",
        extra={"case": int(params.case), "matches": report.matches, "environment": settings.environment},
    )
    return report.as_dict()


@router.post("/simulate")
def simulate(request: SimulateRequest) -> Dict[str, Any]:
    """Run the rounds, verify against the oracle and return costs per round."""
    params = request.to_params()
    world = create_world(params, request.seed, request.users)
    reports = [measure_round(run_round(world), params) for _ in range(request.rounds)]
    verification = verify_world(world)
    return {
        "verification": {
            "ok": verification.ok,
            "rounds_completed": verification.rounds_completed,
            "subpackets_checked": verification.subpackets_checked,
            "mismatches": len(verification.mismatches),
            "error": verification.error,
        },
        "costs": cost_document(reports, request.model_dump()),
    }
