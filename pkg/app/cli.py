"""
Command-line entry point.

Usage:
    python -m app.cli init --case 1 --N 6 --P 12 --B 3 --r 0.25 --r-prime 0.25
    python -m app.cli simulate --case 1 --N 6 --P 12 --B 3 --r 0.25 --r-prime 0.25 \\
        --rounds 2 --users 3 --seed 7
    python -m app.cli leakage --P 12 --Pr 3 --B 1,2,3,4,6 [--oracle] [--base 2]
    python -m app.cli costs --case 2 --N 4 --P 60 --B 1,2,3 --r 0.05 --r-prime 0.05

Every command accepts --config FILE (KEY=VALUE lines); flags win over the
file, the file wins over environment settings. Exit status is 0 when the run
verified, 1 on a verification mismatch and 2 on a configuration error.
"""

import argparse
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from app.config import Settings, get_settings
from app.logging_config import get_logger, setup_logging
from app.models.leakage import PatternDistribution
from app.models.run_config import RunConfig
from app.models.storage import ModelState
from app.services.coordinator import Coordinator
from app.services.cost_accountant import cost_document, measure_round, write_cost_report
from app.services.leakage_analyzer import (
    WITHIN,
    WITHIN_INTER,
    brute_force_mi,
    check_segments,
    leakage_curve,
    posterior_matches_closed_form,
    write_leakage_csv,
)
from app.services.field_core import FieldConfig
from app.services.simulation import create_world, dump_transcript, run_round, verify_world
from app.services.snapshot import write_snapshot
from app.utils.error_handlers import EXIT_MISMATCH, EXIT_OK, ErrorHandler
from app.utils.errors import PruwError, VerificationMismatch


logger = get_logger(__name__)

# closed-form entropy vs. enumerated mutual information, after the exact
# posterior check has passed (or for float distributions)
ORACLE_TOLERANCE = 1e-9


def _default_output(cfg: RunConfig, settings: Settings, name: str) -> Path:
    return cfg.output_path or Path(settings.output_dir) / name


def cmd_init(cfg: RunConfig, settings: Settings) -> int:
    """Initialize N databases from a random model and write a snapshot."""
    params = cfg.scheme_params()
    field = FieldConfig.for_params(params)
    rng = np.random.default_rng(cfg.seed)
    model = ModelState.random(field.GF, params.num_subpackets, params.ell, params.num_segments, rng)
    states, ps = Coordinator(params, field, rng).initialize(model)
    path = write_snapshot(
        _default_output(cfg, settings, "snapshot.bin"), params, field, states, ps, seed=cfg.seed
    )
    print(f"snapshot: {path}")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, settings: Settings) -> int:
    """Run the rounds, dump transcript and cost report, exit per verification."""
    params = cfg.scheme_params()
    out_dir = _default_output(cfg, settings, "simulate")
    provenance = cfg.provenance()

    world = create_world(params, cfg.seed, cfg.users)
    reports = []
    for _ in range(cfg.rounds):
        transcript = run_round(world)
        reports.append(measure_round(transcript, params))

    dump_transcript(world, out_dir / "transcript.txt", provenance)
    document = cost_document(reports, provenance)
    write_cost_report(document, out_dir / "costs.json")

    report = verify_world(world)
    print(
        f"rounds={report.rounds_completed} checked={report.subpackets_checked} "
        f"mismatches={len(report.mismatches)} costs_match={document['matches']}"
    )
    if not report.ok:
        raise VerificationMismatch(
            report.error or f"{len(report.mismatches)} subpackets differ from the oracle model"
        )
    return EXIT_OK


def cmd_leakage(cfg: RunConfig, settings: Settings) -> int:
    """Leakage curve CSV, optionally cross-checked by enumeration."""
    cfg.require("P")
    for b in cfg.B:
        check_segments(cfg.P, b)
    cfg.require("Pr")
    rows = leakage_curve(cfg.P, cfg.Pr, cfg.B, cfg.base)

    if cfg.oracle:
        for row in rows:
            dist = PatternDistribution.uniform(
                cfg.P, row.B, cfg.Pr, exact_support_limit=settings.exact_support_limit
            )
            checks = (
                (WITHIN, row.H_hat_bits),
                (WITHIN_INTER, row.H_tilde_bits),
            )
            for mode, closed_form in checks:
                if dist.exact and not posterior_matches_closed_form(
                    dist, mode, settings.enumeration_limit
                ):
                    raise VerificationMismatch(
                        f"B={row.B} {mode}: enumerated posterior differs from the closed-form classes"
                    )
                mi = brute_force_mi(dist, mode, settings.enumeration_limit, cfg.base)
                if abs(mi - closed_form) > ORACLE_TOLERANCE:
                    raise VerificationMismatch(
                        f"B={row.B} {mode}: enumerated MI {mi:.12g} != closed form {closed_form:.12g}"
                    )
                logger.info("Oracle agrees", extra={"B": row.B, "mode": mode, "mi": mi})

    path = write_leakage_csv(rows, _default_output(cfg, settings, "leakage.csv"), cfg.provenance())
    for row in rows:
        print(f"B={row.B} H_hat={row.H_hat_bits:.6f} H_tilde={row.H_tilde_bits:.6f}")
    print(f"csv: {path}")
    return EXIT_OK


def cmd_costs(cfg: RunConfig, settings: Settings) -> int:
    """One measured round per segment count against the closed forms."""
    reports = []
    for b in cfg.B:
        params = cfg.scheme_params(b)
        world = create_world(params, cfg.seed, cfg.users)
        reports.append(measure_round(run_round(world), params))

    document = cost_document(reports, cfg.provenance())
    path = write_cost_report(document, _default_output(cfg, settings, "costs.json"))
    print(
        f"matches={document['matches']} "
        f"identical_across_B={document['communication_identical_across_B']} json: {path}"
    )
    if document["matches"] and document["communication_identical_across_B"]:
        return EXIT_OK
    logger.error("Measured costs differ from the closed forms", extra={"path": str(path)})
    return EXIT_MISMATCH


COMMANDS: Dict[str, Callable[[RunConfig, Settings], int]] = {
    "init": cmd_init,
    "simulate": cmd_simulate,
    "leakage": cmd_leakage,
    "costs": cmd_costs,
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", dest="config_file", default=None, help="KEY=VALUE config file")
    parser.add_argument("--case", type=int, default=None, help="Scheme case 1..4")
    parser.add_argument("--N", dest="N", type=int, default=None, help="Number of databases")
    parser.add_argument("--P", dest="P", type=int, default=None, help="Number of subpackets")
    parser.add_argument("--B", dest="B", default=None, help="Segment count, or a list like 1,2,3")
    parser.add_argument("--r", type=float, default=None, help="Uplink sparsification rate")
    parser.add_argument("--r-prime", dest="r_prime", type=float, default=None, help="Downlink rate")
    parser.add_argument("--q", type=int, default=None, help="Prime field modulus")
    parser.add_argument("--seed", type=int, default=None, help="Master seed")
    parser.add_argument("--output", dest="output_path", default=None, help="Output file or directory")
    parser.add_argument(
        "--log-level",
        type=str.upper,
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        default=None,
        help="Override LOG_LEVEL",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pruw", description="Private read-update-write simulator and analyzers"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    init = sub.add_parser("init", help="Initialize databases and write a snapshot")
    _add_common(init)

    simulate = sub.add_parser("simulate", help="Run rounds and verify against the oracle model")
    _add_common(simulate)
    simulate.add_argument("--rounds", type=int, default=None)
    simulate.add_argument("--users", type=int, default=None)

    leakage = sub.add_parser("leakage", help="Index leakage curve as CSV")
    _add_common(leakage)
    leakage.add_argument("--Pr", dest="Pr", type=int, default=None, help="Sparse-set size")
    leakage.add_argument("--base", type=float, default=None, help="Logarithm base (2 = bits)")
    leakage.add_argument(
        "--oracle", action="store_true", default=None, help="Cross-check by enumeration"
    )

    costs = sub.add_parser("costs", help="Measured vs closed-form costs as JSON")
    _add_common(costs)
    costs.add_argument("--users", type=int, default=None)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_file = args.pop("config_file")
    log_level = args.pop("log_level")

    settings = get_settings()
    setup_logging(
        log_level=log_level or settings.log_level,
        use_json=settings.environment == "production",
        stream=sys.stderr,
    )
    handler = ErrorHandler(command)

    try:
        cfg = RunConfig.resolve(command, args, settings, config_file)
        logger.info("Command started", extra={"command": command, "config": cfg.provenance()})
        code = COMMANDS[command](cfg, settings)
    except (PruwError, ValidationError) as e:
        print(handler.describe(e), file=sys.stderr)
        return handler.handle(e, {"command": command})

    logger.info("Command finished", extra={"command": command, "exit_code": code})
    return code


if __name__ == "__main__":
    sys.exit(main())
