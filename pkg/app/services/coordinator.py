"""
One-shot trusted initialization.

The coordinator encodes the model into per-database storage, samples the
permutations handed to users and places the noise-added reversing matrices
at every database. It keeps nothing afterwards.
"""

from typing import List, Optional, Tuple

import numpy as np

from app.logging_config import get_logger
from app.models.params import SchemeCase, SchemeParams, derive_subpacketization
from app.models.permutation import PermutationSet
from app.models.storage import DatabaseState, ModelState
from app.services.field_core import FieldConfig, FieldElement, random_elements
from app.services.permutation_engine import (
    build_noisy_inter,
    build_noisy_within,
    combine_case3,
    combine_case4,
    sample_inter_noise,
    sample_permutation_set,
    sample_within_noise,
)
from app.utils.errors import DimensionMismatch, FieldConfigError


logger = get_logger(__name__)

__all__ = ["Coordinator", "derive_subpacketization", "encode_subpacket", "noise_degree"]


def noise_degree(case: SchemeCase, ell: int) -> int:
    """Degree of the storage masking polynomial in alpha_n."""
    return {
        SchemeCase.UNCODED_WITHIN: ell,
        SchemeCase.CODED_WITHIN: ell,
        SchemeCase.UNCODED_TWO_STAGE: ell + 1,
        SchemeCase.CODED_TWO_STAGE: 2 * ell,
    }[case]


def encode_subpacket(
    case: SchemeCase,
    w: FieldElement,
    noise: FieldElement,
    n: int,
    cfg: FieldConfig,
) -> FieldElement:
    """
    Stored symbols of one subpacket at database n.

    Uncoded cases return ell symbols W_k / (f_k - alpha_n) + sum_j alpha_n^j Z_kj
    with noise of shape (ell, degree + 1); coded cases return the single
    symbol sum_i alpha_n^-i W_i + sum_j alpha_n^j Z_j with noise of shape
    (degree + 1,).
    """
    alpha = cfg.alpha_of(n)
    degree = noise.shape[-1] - 1
    powers = cfg.powers(alpha, range(degree + 1))
    if case.is_coded:
        negative = cfg.powers(alpha, range(-1, -w.shape[-1] - 1, -1))
        return w @ negative + noise @ powers
    gamma = cfg.vector(fk - alpha for fk in cfg.f[: w.shape[-1]]) ** -1
    return w * gamma + noise @ powers


class Coordinator:
    """
    Trusted party available only at initialization.

    Noise coefficients are drawn once and evaluated at every alpha_n, so
    all databases hold evaluations of a common polynomial; the permutations
    are never given to a database.
    """

    def __init__(
        self,
        params: SchemeParams,
        cfg: FieldConfig,
        rng: np.random.Generator,
        zero_noise: bool = False,
    ):
        cfg.check_matches(params)
        self.params = params
        self.cfg = cfg
        self.rng = rng
        self.zero_noise = zero_noise

    @property
    def _noise_rng(self) -> Optional[np.random.Generator]:
        return None if self.zero_noise else self.rng

    def encode_storage(self, model: ModelState) -> List[DatabaseState]:
        """
        Encode the model for every database.

        Raises:
            DimensionMismatch: If the model shape does not match the params
        """
        params, cfg = self.params, self.cfg
        if model.values.shape != (params.num_subpackets, params.ell):
            raise DimensionMismatch(
                f"model must be ({params.num_subpackets}, {params.ell}), got {model.values.shape}"
            )
        if type(model.values) is not cfg.GF:
            raise FieldConfigError("model values are not elements of the configured field")

        degree = noise_degree(params.case, params.ell)
        if params.case.is_coded:
            noise = random_elements(cfg, (params.num_subpackets, degree + 1), self._noise_rng)
        else:
            noise = random_elements(
                cfg, (params.num_subpackets, params.ell, degree + 1), self._noise_rng
            )

        states = []
        for n in range(1, params.num_databases + 1):
            if params.case.is_coded:
                storage = encode_subpacket(params.case, model.values, noise, n, cfg)
            else:
                flat_noise = noise.reshape(params.model_size, degree + 1)
                alpha = cfg.alpha_of(n)
                gamma = cfg.vector(fk - alpha for fk in cfg.f) ** -1
                evaluated = (flat_noise @ cfg.powers(alpha, range(degree + 1))).reshape(
                    params.num_subpackets, params.ell
                )
                storage = (model.values * gamma + evaluated).reshape(params.model_size)
            states.append(DatabaseState(n, storage))

        logger.info(
            "Storage encoded",
            extra={
                "case": int(params.case),
                "databases": params.num_databases,
                "symbols_per_database": int(states[0].storage.size),
                "noise_degree": degree,
            },
        )
        return states

    def sample_permutations(self) -> PermutationSet:
        return sample_permutation_set(self.params, self.rng)

    def place_matrices(self, states: List[DatabaseState], ps: PermutationSet) -> None:
        """Build each database's noisy matrices from shared noise and cache the combined matrix."""
        params, cfg = self.params, self.cfg
        if ps.num_segments != params.num_segments or ps.segment_size != params.segment_size:
            raise DimensionMismatch(
                f"permutations cover {ps.num_segments} segments of {ps.segment_size}, "
                f"params need {params.num_segments} of {params.segment_size}"
            )
        if params.case.has_inter and ps.inter is None:
            raise DimensionMismatch(f"case {int(params.case)} needs an inter-segment permutation")

        within_noise = [
            sample_within_noise(params.case, params.segment_size, cfg, self._noise_rng)
            for _ in range(params.num_segments)
        ]
        inter_noise = (
            sample_inter_noise(params.case, params.num_segments, cfg, self._noise_rng)
            if params.case.has_inter
            else None
        )

        for state in states:
            state.within_matrices = [
                build_noisy_within(params.case, p, state.index, cfg, noise)
                for p, noise in zip(ps.within, within_noise)
            ]
            if params.case.has_inter:
                state.inter_matrix = build_noisy_inter(
                    params.case, ps.inter, state.index, cfg, inter_noise
                )
                combine = combine_case3 if params.case == SchemeCase.UNCODED_TWO_STAGE else combine_case4
                state.combined_matrix = combine(state.within_matrices, state.inter_matrix, params)

    def initialize(
        self, model: ModelState, permutations: Optional[PermutationSet] = None
    ) -> Tuple[List[DatabaseState], PermutationSet]:
        """
        Encode storage, sample (or accept) the permutations and place matrices.

        Args:
            model: Initial model
            permutations: Fixed permutations, e.g. worked-example fixtures;
                sampled when omitted

        Returns:
            One DatabaseState per database and the users' PermutationSet
        """
        states = self.encode_storage(model)
        ps = permutations if permutations is not None else self.sample_permutations()
        self.place_matrices(states, ps)

        logger.info(
            "Coordinator initialized system",
            extra={
                "case": int(self.params.case),
                "N": self.params.num_databases,
                "P": self.params.num_subpackets,
                "B": self.params.num_segments,
                "ell": self.params.ell,
                "zero_noise": self.zero_noise,
            },
        )
        return states, ps
