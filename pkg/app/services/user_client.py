"""
User-side protocol engine: resolve and decode downloads, pick the top-r
update set and build the noise-masked update tuples.
"""

from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.logging_config import get_logger
from app.models.messages import (
    DecodedSubpacket,
    DownlinkSelection,
    LocalUpdate,
    ReadAnswer,
    UpdateTuple,
)
from app.models.params import SchemeCase, SchemeParams, as_case
from app.models.permutation import PermutationSet, SubpacketId
from app.services.field_core import (
    DecodeLayout,
    FieldConfig,
    FieldElement,
    field_inv,
    lagrange_denominator,
    solve_mixed_vandermonde,
)
from app.services.permutation_engine import all_ids, permuted_to_real, real_to_permuted
from app.utils.errors import DimensionMismatch, IndexOutOfRange


logger = get_logger(__name__)


def resolve_downlink(
    ps: PermutationSet, case: Union[int, SchemeCase], sel: DownlinkSelection
) -> List[SubpacketId]:
    """Real ids of the broadcast permuted ids, in broadcast order."""
    return [permuted_to_real(ps, case, target) for target in sel.targets]


def select_top_r(upd: LocalUpdate, params: SchemeParams) -> List[SubpacketId]:
    """
    The P * r real ids with the largest magnitude_key.

    Ties go to the lexicographically smaller (segment, subpacket).
    """
    ids = all_ids(params.num_segments, params.segment_size)
    missing = [sid for sid in ids if sid not in upd.magnitude_key]
    if missing:
        raise IndexOutOfRange(f"magnitude_key missing for {missing}")
    ranked = sorted(ids, key=lambda sid: (-upd.magnitude_key[sid], sid))
    return ranked[: params.upload_count]


def update_coefficients(
    case: Union[int, SchemeCase], alpha: int, cfg: FieldConfig
) -> Tuple[FieldElement, FieldElement]:
    """
    Per-database weights (c, m) of a combined update U = c . delta + m * Z.

    Uncoded cases use c_k = prod_{r != k}(f_r - alpha) / prod_{r != k}(f_r - f_k)
    and m = prod_r (f_r - alpha); coded cases use c_k = alpha^-k and m = 1.
    """
    case = as_case(case)
    if case.is_coded:
        return cfg.powers(alpha, range(-1, -cfg.ell - 1, -1)), cfg.element(1)

    q = cfg.q
    weights = []
    for k in range(1, cfg.ell + 1):
        product = 1
        for r, fr in enumerate(cfg.f, start=1):
            if r != k:
                product = product * (fr - alpha) % q
        weights.append(cfg.element(product) * field_inv(lagrange_denominator(k, cfg), cfg))
    mask = 1
    for fr in cfg.f:
        mask = mask * (fr - alpha) % q
    return cfg.GF([int(w) for w in weights]), cfg.element(mask)


def combine_update(
    case: Union[int, SchemeCase],
    deltas: FieldElement,
    noise: FieldElement,
    alpha: int,
    cfg: FieldConfig,
) -> FieldElement:
    """Combined, noise-masked update symbol of one subpacket at the database with constant alpha."""
    if deltas.shape != (cfg.ell,):
        raise DimensionMismatch(f"expected {cfg.ell} increments, got shape {deltas.shape}")
    weights, mask = update_coefficients(case, alpha, cfg)
    return weights @ deltas + mask * noise


class UserClient:
    """
    One simulated user.

    Holds the shared PermutationSet and its own randomness stream for the
    fresh per-round masking noise.
    """

    def __init__(
        self,
        ps: PermutationSet,
        params: SchemeParams,
        cfg: FieldConfig,
        rng: Optional[np.random.Generator] = None,
        user_id: int = 1,
    ):
        cfg.check_matches(params)
        self.ps = ps
        self.params = params
        self.cfg = cfg
        # None gives zero masking noise
        self.rng = rng
        self.user_id = user_id
        self.layout = DecodeLayout.for_case(params.case, params.ell)
        self._weights = {
            n: update_coefficients(params.case, cfg.alpha_of(n), cfg)
            for n in range(1, params.num_databases + 1)
        }

    @property
    def case(self) -> SchemeCase:
        return self.params.case

    def resolve_downlink(self, sel: DownlinkSelection) -> List[SubpacketId]:
        return resolve_downlink(self.ps, self.case, sel)

    def decode_subpacket(self, answers: Sequence[ReadAnswer]) -> DecodedSubpacket:
        """
        Recover the ell parameters of the queried subpacket from N answers.

        Raises:
            DimensionMismatch: If answers are missing, repeated or mix targets
            SingularSystem: If the decode matrix is not invertible
        """
        if not answers:
            raise DimensionMismatch("no answers to decode")
        targets = {a.target for a in answers}
        if len(targets) != 1:
            raise DimensionMismatch(f"answers refer to different targets: {sorted(targets)}")
        ordered = sorted(answers, key=lambda a: a.db_index)
        indices = [a.db_index for a in ordered]
        if indices != list(range(1, self.params.num_databases + 1)):
            raise DimensionMismatch(
                f"need one answer from each of {self.params.num_databases} databases, got {indices}"
            )

        alphas = [self.cfg.alpha_of(n) for n in indices]
        rows = self.layout.matrix(self.cfg, alphas)
        rhs = self.cfg.vector(a.value for a in ordered)
        solution = solve_mixed_vandermonde(rows, rhs, self.layout)

        params = [int(v) for v in solution[: self.params.ell]]
        if self.case.is_coded:
            # unknowns are ordered W_ell .. W_1
            params.reverse()
        target = ordered[0].target
        return DecodedSubpacket(
            real_id=permuted_to_real(self.ps, self.case, target), params=params
        )

    def select_top_r(self, upd: LocalUpdate) -> List[SubpacketId]:
        return select_top_r(upd, self.params)

    def build_update_tuples(
        self, upd: LocalUpdate, chosen: Sequence[SubpacketId]
    ) -> Dict[int, List[UpdateTuple]]:
        """
        Per-database tuples for the chosen real ids.

        One fresh noise symbol per chosen subpacket is shared by all
        databases; index fields are permuted coordinates.

        Raises:
            IndexOutOfRange: If a chosen id is invalid or has no delta
        """
        if len(set(chosen)) != len(chosen):
            raise IndexOutOfRange(f"chosen ids repeat: {list(chosen)}")
        per_db: Dict[int, List[UpdateTuple]] = {
            n: [] for n in range(1, self.params.num_databases + 1)
        }

        for real in chosen:
            if real not in upd.deltas:
                raise IndexOutOfRange(f"no increments for {tuple(real)}")
            deltas = self.cfg.vector(upd.deltas[real])
            if deltas.shape != (self.params.ell,):
                raise DimensionMismatch(
                    f"{tuple(real)} has {deltas.shape[0]} increments, expected {self.params.ell}"
                )
            permuted = real_to_permuted(self.ps, self.case, real)
            noise = (
                self.cfg.GF.Random(seed=self.rng) if self.rng is not None else self.cfg.element(0)
            )
            for n, (weights, mask) in self._weights.items():
                value = weights @ deltas + mask * noise
                per_db[n].append(
                    UpdateTuple(
                        update=int(value), subpacket=permuted.subpacket, segment=permuted.segment
                    )
                )

        logger.debug(
            "Built update tuples",
            extra={"user_id": self.user_id, "chosen": len(chosen), "case": int(self.case)},
        )
        return per_db

    def random_local_update(self, rng: np.random.Generator, key_range: int = 1000) -> LocalUpdate:
        """Synthetic full update: random increments and random ranking keys."""
        ids = all_ids(self.params.num_segments, self.params.segment_size)
        deltas = self.cfg.GF.Random((len(ids), self.params.ell), seed=rng)
        keys = rng.integers(0, key_range, size=len(ids))
        return LocalUpdate(
            deltas={sid: [int(v) for v in row] for sid, row in zip(ids, deltas)},
            magnitude_key={sid: int(k) for sid, k in zip(ids, keys)},
        )
