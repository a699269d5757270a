"""
Multi-round, multi-user simulation over N in-process databases.

Each round is two barriers: every user reads before anyone writes. A
plaintext oracle model is updated alongside for verification only.
"""

from pathlib import Path
from typing import Callable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from app.logging_config import LogContext, get_logger, log_with_context
from app.models.messages import DecodedSubpacket, LocalUpdate, ReadAnswer
from app.models.params import SchemeParams
from app.models.permutation import PermutationSet, SubpacketId
from app.models.reports import (
    Mismatch,
    RoundTranscript,
    StorageBreakdown,
    SymbolCounts,
    VerificationReport,
)
from app.models.storage import DatabaseState, ModelState
from app.services.coordinator import Coordinator
from app.services.database_node import DESIGNATED_DATABASE, DatabaseNode, select_downlink
from app.services.field_core import FieldConfig
from app.services.permutation_engine import all_ids, real_to_permuted
from app.services.user_client import UserClient
from app.utils.errors import DimensionMismatch, InvalidParams, PruwError


logger = get_logger(__name__)

TRANSCRIPT_HEADER = "PRUW-TRANSCRIPT v1"

# (user, round, rng) -> that user's full update for the round
UpdateSupplier = Callable[[UserClient, int, np.random.Generator], LocalUpdate]


def random_update_supplier(user: UserClient, round_number: int, rng: np.random.Generator) -> LocalUpdate:
    return user.random_local_update(rng)


class World:
    """Databases, users and the oracle model of one simulated deployment."""

    def __init__(
        self,
        params: SchemeParams,
        cfg: FieldConfig,
        states: List[DatabaseState],
        ps: PermutationSet,
        oracle: ModelState,
        num_users: int,
        seed: int,
        zero_noise: bool = False,
    ):
        if len(states) != params.num_databases:
            raise DimensionMismatch(f"expected {params.num_databases} databases, got {len(states)}")
        self.params = params
        self.cfg = cfg
        self.ps = ps
        self.oracle = oracle
        self.seed = seed
        self.zero_noise = zero_noise
        self.nodes = [DatabaseNode(state, params, cfg) for state in states]
        self.users = [
            UserClient(
                ps,
                params,
                cfg,
                rng=None if zero_noise else np.random.default_rng([seed, 0, u]),
                user_id=u,
            )
            for u in range(1, num_users + 1)
        ]
        self.round = 0
        self.transcripts: List[RoundTranscript] = []

    @property
    def designated(self) -> DatabaseNode:
        return self.nodes[DESIGNATED_DATABASE - 1]

    @property
    def states(self) -> List[DatabaseState]:
        return [node.state for node in self.nodes]

    def read(self, target: SubpacketId) -> List[ReadAnswer]:
        """One answer per database for a permuted target."""
        return [node.read(target) for node in self.nodes]

    def corrupt_symbol(self, db_index: int, position: int, delta: int = 1) -> None:
        """Add delta to one stored symbol (fault injection for tests)."""
        state = self.nodes[db_index - 1].state
        state.storage[position] = state.storage[position] + self.cfg.element(delta)
        logger.warning(
            "Storage symbol corrupted", extra={"db_index": db_index, "position": position}
        )


def create_world(
    params: SchemeParams,
    seed: int,
    num_users: int = 1,
    zero_noise: bool = False,
    permutations: Optional[PermutationSet] = None,
    model: Optional[ModelState] = None,
    cfg: Optional[FieldConfig] = None,
) -> World:
    """
    Run the coordinator once and wrap its output with users and an oracle.

    The model is random unless given; every random draw derives from seed.
    """
    if seed < 0:
        raise InvalidParams(f"seed must be non-negative (got {seed})")
    cfg = cfg or FieldConfig.for_params(params)
    rng = np.random.default_rng(seed)
    if model is None:
        model = ModelState.random(
            cfg.GF, params.num_subpackets, params.ell, params.num_segments, rng
        )
    states, ps = Coordinator(params, cfg, rng, zero_noise=zero_noise).initialize(
        model, permutations
    )
    world = World(params, cfg, states, ps, model.copy(), num_users, seed, zero_noise)
    logger.info(
        "World created",
        extra={"case": int(params.case), "users": num_users, "seed": seed, "zero_noise": zero_noise},
    )
    return world


def run_round(
    world: World, users: Optional[Sequence[UpdateSupplier]] = None
) -> RoundTranscript:
    """
    One read-update-write round for every user.

    Args:
        world: Initialized world, mutated in place
        users: One supplier per user; random full updates when omitted

    Returns:
        The round's transcript
    """
    params = world.params
    t = world.round + 1
    suppliers = list(users) if users is not None else [random_update_supplier] * len(world.users)
    if len(suppliers) != len(world.users):
        raise DimensionMismatch(f"{len(suppliers)} suppliers for {len(world.users)} users")

    selection = select_downlink(world.designated.state.popularity, params)
    for node in world.nodes:
        node.reset_popularity()

    transcript = RoundTranscript(
        round=t,
        downlink=selection,
        symbol_counts=SymbolCounts(download_index=len(selection.targets)),
    )

    # reading phase
    for user in world.users:
        with LogContext(logger, round=t, user=user.user_id):
            answers: List[ReadAnswer] = []
            decoded: List[DecodedSubpacket] = []
            for target in selection.targets:
                batch = world.read(target)
                answers.extend(batch)
                decoded.append(user.decode_subpacket(batch))
            transcript.answers[user.user_id] = answers
            transcript.reads[user.user_id] = decoded
            transcript.symbol_counts.download_data[user.user_id] = len(answers)
            logger.debug("Reading phase done", extra={"subpackets": len(decoded)})

    # writing phase
    for user, supplier in zip(world.users, suppliers):
        with LogContext(logger, round=t, user=user.user_id):
            update = supplier(user, t, np.random.default_rng([world.seed, t, user.user_id]))
            chosen = user.select_top_r(update)
            per_db = user.build_update_tuples(update, chosen)
            for node in world.nodes:
                node.apply_write(per_db[node.index])
            for real in chosen:
                world.oracle.add(real, world.cfg.vector(update.deltas[real]))
            transcript.writes[user.user_id] = per_db
            transcript.symbol_counts.upload_tuples[user.user_id] = {
                n: len(tuples) for n, tuples in per_db.items()
            }
            logger.debug("Writing phase done", extra={"subpackets": len(chosen)})

    transcript.storage_sizes = [
        StorageBreakdown(db_index=node.index, **node.state.storage_counts()) for node in world.nodes
    ]
    world.round = t
    world.transcripts.append(transcript)
    logger.info(
        "Round completed",
        extra={"round": t, "users": len(world.users), "downlink": len(selection.targets)},
    )
    return transcript


def verify_world(world: World) -> VerificationReport:
    """Decode every subpacket through the read protocol and diff against the oracle."""
    params = world.params
    verifier = world.users[0] if world.users else UserClient(world.ps, params, world.cfg)
    report = VerificationReport(rounds_completed=world.round)

    for real in all_ids(params.num_segments, params.segment_size):
        target = real_to_permuted(world.ps, params.case, real)
        try:
            decoded = verifier.decode_subpacket(world.read(target))
        except PruwError as e:
            report.error = f"decode of {tuple(real)} failed: {e}"
            logger.error("Verification decode failed", extra={"real_id": tuple(real), "error": str(e)})
            break
        expected = [int(v) for v in world.oracle.subpacket(real)]
        report.subpackets_checked += 1
        if decoded.real_id != real or decoded.params != expected:
            report.mismatches.append(
                Mismatch(real_id=real, expected=expected, decoded=decoded.params)
            )
            log_with_context(
                logger,
                "warning",
                "Decoded subpacket differs from oracle",
                real_id=tuple(real),
                decoded_id=tuple(decoded.real_id),
            )

    log = logger.info if report.ok else logger.error
    log(
        "World verified",
        extra={
            "rounds": report.rounds_completed,
            "checked": report.subpackets_checked,
            "mismatches": len(report.mismatches),
        },
    )
    return report


def _pair(sid: SubpacketId) -> str:
    return f"({sid.segment},{sid.subpacket})"


def render_transcript(
    transcripts: Sequence[RoundTranscript],
    provenance: Optional[Mapping[str, object]] = None,
) -> str:
    """
    Versioned text form, one message per line: direction round party payload.

    The downlink broadcast, every read answer and every uploaded tuple get a
    line, in protocol order.
    """
    lines = [TRANSCRIPT_HEADER]
    lines.extend(f"# {key}={value}" for key, value in (provenance or {}).items())
    for tr in transcripts:
        targets = ";".join(_pair(t) for t in tr.downlink.targets)
        lines.append(f"downlink {tr.round} db{DESIGNATED_DATABASE} targets={targets}")
        for user, answers in sorted(tr.answers.items()):
            for a in answers:
                lines.append(
                    f"answer {tr.round} db{a.db_index}->u{user} target={_pair(a.target)} value={a.value}"
                )
        for user, per_db in sorted(tr.writes.items()):
            for n, tuples in sorted(per_db.items()):
                for item in tuples:
                    lines.append(
                        f"upload {tr.round} u{user}->db{n} update={item.update} "
                        f"subpacket={item.subpacket} segment={item.segment}"
                    )
    return "\n".join(lines) + "\n"


def dump_transcript(
    world: World,
    path: Union[str, Path],
    provenance: Optional[Mapping[str, object]] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_transcript(world.transcripts, provenance))
    logger.info("Transcript written", extra={"path": str(path), "rounds": len(world.transcripts)})
    return path


def run_simulation(
    params: SchemeParams,
    seed: int,
    rounds: int,
    num_users: int,
    suppliers: Optional[Sequence[UpdateSupplier]] = None,
) -> Tuple[World, VerificationReport]:
    """Create a world, run the rounds and verify it."""
    world = create_world(params, seed, num_users)
    for _ in range(rounds):
        run_round(world, suppliers)
    return world, verify_world(world)
