"""Services module for the PRUW simulator."""

from app.services.field_core import FieldConfig
from app.services.coordinator import Coordinator
from app.services.database_node import DatabaseNode, select_downlink
from app.services.user_client import UserClient
from app.services.quantizer import FixedPointQuantizer, local_update_from_gradient
from app.services.leakage_analyzer import (
    brute_force_mi,
    choose_segment_count,
    entropy_hat,
    entropy_tilde,
    leakage_curve,
    posterior_matches_closed_form,
)
from app.services.cost_accountant import (
    measure_round,
    read_formula,
    storage_complexity,
    write_formula,
)
from app.services.simulation import World, create_world, run_round, verify_world
from app.services.snapshot import read_snapshot, write_snapshot


__all__ = [
    "FieldConfig",
    "Coordinator",
    "DatabaseNode",
    "select_downlink",
    "UserClient",
    "FixedPointQuantizer",
    "local_update_from_gradient",
    "brute_force_mi",
    "choose_segment_count",
    "entropy_hat",
    "entropy_tilde",
    "leakage_curve",
    "posterior_matches_closed_form",
    "measure_round",
    "read_formula",
    "storage_complexity",
    "write_formula",
    "World",
    "create_world",
    "run_round",
    "verify_world",
    "read_snapshot",
    "write_snapshot",
]
