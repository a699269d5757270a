"""
Permutation sampling, noise-added permutation-reversing matrices and index
maps between real and permuted coordinates.
"""

from typing import List, Optional, Sequence, Union

import numpy as np

from app.logging_config import get_logger
from app.models.params import SchemeCase, SchemeParams, as_case
from app.models.permutation import Permutation, PermutationSet, SubpacketId
from app.services.field_core import (
    FieldConfig,
    FieldElement,
    GammaDiagonal,
    kron,
    random_elements,
)
from app.utils.errors import DimensionMismatch, IndexOutOfRange, InvalidCase


logger = get_logger(__name__)


class NoisyReversingMatrix:
    """A structural permutation-reversing matrix plus field noise, as stored at one database."""

    def __init__(self, case: SchemeCase, kind: str, entries: FieldElement):
        self.case = case
        self.kind = kind
        self.entries = entries

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def symbol_count(self) -> int:
        return int(self.entries.size)

    def __repr__(self) -> str:
        return f"NoisyReversingMatrix(case={int(self.case)}, kind={self.kind}, size={self.size})"


def sample_permutation(m: int, rng: np.random.Generator) -> Permutation:
    """Uniformly random permutation of {1..m}."""
    if m < 1:
        raise DimensionMismatch(f"permutation size must be positive (got {m})")
    return Permutation(rng.permutation(m) + 1)


def sample_permutation_set(params: SchemeParams, rng: np.random.Generator) -> PermutationSet:
    """B independent within-segment permutations, plus the inter-segment one for cases 3/4."""
    within = [sample_permutation(params.segment_size, rng) for _ in range(params.num_segments)]
    inter = sample_permutation(params.num_segments, rng) if params.case.has_inter else None
    return PermutationSet(within, inter)


def reversing_matrix(p: Permutation) -> np.ndarray:
    """0/1 matrix with entry (i, j) = 1 iff p maps permuted slot j to real index i."""
    m = p.size
    matrix = np.zeros((m, m), dtype=np.int64)
    matrix[np.asarray(p.mapping) - 1, np.arange(m)] = 1
    return matrix


def within_matrix_size(case: Union[int, SchemeCase], segment_size: int, ell: int) -> int:
    case = as_case(case)
    return segment_size if case.is_coded else segment_size * ell


def inter_matrix_size(case: Union[int, SchemeCase], num_segments: int, ell: int) -> int:
    case = as_case(case)
    if not case.has_inter:
        raise InvalidCase(f"case {int(case)} has no inter-segment permutation")
    return num_segments if case.is_coded else num_segments * ell


def sample_within_noise(
    case: Union[int, SchemeCase],
    segment_size: int,
    cfg: FieldConfig,
    rng: Optional[np.random.Generator],
) -> FieldElement:
    """Noise matrix shared by every database's copy of one within-segment matrix."""
    size = within_matrix_size(case, segment_size, cfg.ell)
    return random_elements(cfg, (size, size), rng)


def sample_inter_noise(
    case: Union[int, SchemeCase],
    num_segments: int,
    cfg: FieldConfig,
    rng: Optional[np.random.Generator],
) -> FieldElement:
    """Noise matrix shared by every database's copy of the inter-segment matrix."""
    size = inter_matrix_size(case, num_segments, cfg.ell)
    return random_elements(cfg, (size, size), rng)


def _checked_noise(noise: Optional[FieldElement], size: int, cfg: FieldConfig) -> FieldElement:
    if noise is None:
        return cfg.GF.Zeros((size, size))
    if noise.shape != (size, size):
        raise DimensionMismatch(f"noise must be {size}x{size}, got {noise.shape}")
    return noise


def build_noisy_within(
    case: Union[int, SchemeCase],
    p: Permutation,
    n: int,
    cfg: FieldConfig,
    noise: Optional[FieldElement] = None,
) -> NoisyReversingMatrix:
    """
    Noise-added reversing matrix of one within-segment permutation at database n.

    Cases 1/3 store (R kron Gamma_n) + Z, cases 2/4 store R + alpha_n^ell Z.
    The same noise matrix must be used for every database; ``noise=None``
    gives the zero-noise structural part.

    Raises:
        InvalidCase: If case is not 1..4
        DimensionMismatch: If noise has the wrong shape
    """
    case = as_case(case)
    structural = cfg.GF(reversing_matrix(p))
    size = within_matrix_size(case, p.size, cfg.ell)
    noise = _checked_noise(noise, size, cfg)

    if case.is_coded:
        scale = cfg.powers(cfg.alpha_of(n), [cfg.ell])[0]
        entries = structural + scale * noise
    else:
        entries = kron(structural, GammaDiagonal(n, cfg).matrix()) + noise

    return NoisyReversingMatrix(case, "within", entries)


def build_noisy_inter(
    case: Union[int, SchemeCase],
    p_hat: Permutation,
    n: int,
    cfg: FieldConfig,
    noise: Optional[FieldElement] = None,
) -> NoisyReversingMatrix:
    """
    Noise-added reversing matrix of the inter-segment permutation at database n.

    Case 3 stores (R kron I_ell) + (I_B kron Gamma_n^-1) Z, case 4 stores
    R + alpha_n^ell Z.

    Raises:
        InvalidCase: If case is not 3 or 4
        DimensionMismatch: If noise has the wrong shape
    """
    case = as_case(case)
    size = inter_matrix_size(case, p_hat.size, cfg.ell)
    structural = cfg.GF(reversing_matrix(p_hat))
    noise = _checked_noise(noise, size, cfg)

    if case.is_coded:
        scale = cfg.powers(cfg.alpha_of(n), [cfg.ell])[0]
        entries = structural + scale * noise
    else:
        identity_ell = cfg.GF.Identity(cfg.ell)
        prefactor = kron(cfg.GF.Identity(p_hat.size), GammaDiagonal(n, cfg).inverse_matrix())
        entries = kron(structural, identity_ell) + prefactor @ noise

    return NoisyReversingMatrix(case, "inter", entries)


def _check_within(within: Sequence[NoisyReversingMatrix], params: SchemeParams, size: int) -> None:
    if len(within) != params.num_segments:
        raise DimensionMismatch(
            f"expected {params.num_segments} within-segment matrices, got {len(within)}"
        )
    for matrix in within:
        if matrix.entries.shape != (size, size):
            raise DimensionMismatch(
                f"within-segment matrix must be {size}x{size}, got {matrix.entries.shape}"
            )


def combine_case3(
    within: Sequence[NoisyReversingMatrix],
    inter: NoisyReversingMatrix,
    params: SchemeParams,
) -> FieldElement:
    """
    L x L combined matrix blockdiag(R^[1..B]) x [I_{P/B} kron b_ij].

    b_ij is the (i, j) ell x ell block of the inter-segment matrix.
    """
    ell = params.ell
    block = params.segment_size * ell
    _check_within(within, params, block)
    if inter.entries.shape != (params.num_segments * ell,) * 2:
        raise DimensionMismatch(
            f"inter-segment matrix must be {params.num_segments * ell} square, got {inter.entries.shape}"
        )

    field = type(inter.entries)
    identity_m = field.Identity(params.segment_size)
    combined = field.Zeros((params.model_size, params.model_size))
    for i in range(params.num_segments):
        for j in range(params.num_segments):
            b_ij = inter.entries[i * ell : (i + 1) * ell, j * ell : (j + 1) * ell]
            combined[i * block : (i + 1) * block, j * block : (j + 1) * block] = (
                within[i].entries @ kron(identity_m, b_ij)
            )
    return combined


def combine_case4(
    within: Sequence[NoisyReversingMatrix],
    inter: NoisyReversingMatrix,
    params: SchemeParams,
) -> FieldElement:
    """P x P combined matrix blockdiag(R^[1..B]) x (R_hat kron I_{P/B})."""
    block = params.segment_size
    _check_within(within, params, block)
    if inter.entries.shape != (params.num_segments,) * 2:
        raise DimensionMismatch(
            f"inter-segment matrix must be {params.num_segments} square, got {inter.entries.shape}"
        )

    field = type(inter.entries)
    combined = field.Zeros((params.num_subpackets, params.num_subpackets))
    for i in range(params.num_segments):
        for j in range(params.num_segments):
            combined[i * block : (i + 1) * block, j * block : (j + 1) * block] = (
                within[i].entries * inter.entries[i, j]
            )
    return combined


def _check_target(ps: PermutationSet, target: SubpacketId) -> None:
    if not 1 <= target.segment <= ps.num_segments:
        raise IndexOutOfRange(f"segment {target.segment} outside 1..{ps.num_segments}")
    if not 1 <= target.subpacket <= ps.segment_size:
        raise IndexOutOfRange(f"subpacket {target.subpacket} outside 1..{ps.segment_size}")


def permuted_to_real(
    ps: PermutationSet, case: Union[int, SchemeCase], target: SubpacketId
) -> SubpacketId:
    """
    Real id of a permuted id.

    Cases 1/2 keep the (real) segment and map the slot through its
    within-segment permutation; cases 3/4 map the segment through the
    inter-segment permutation first.
    """
    case = as_case(case)
    _check_target(ps, target)
    segment = target.segment
    if case.has_inter:
        if ps.inter is None:
            raise InvalidCase(f"case {int(case)} needs an inter-segment permutation")
        segment = ps.inter.forward(segment)
    return SubpacketId(segment, ps.within[segment - 1].forward(target.subpacket))


def real_to_permuted(
    ps: PermutationSet, case: Union[int, SchemeCase], real: SubpacketId
) -> SubpacketId:
    """Exact inverse of permuted_to_real."""
    case = as_case(case)
    _check_target(ps, real)
    slot = ps.within[real.segment - 1].backward(real.subpacket)
    segment = real.segment
    if case.has_inter:
        if ps.inter is None:
            raise InvalidCase(f"case {int(case)} needs an inter-segment permutation")
        segment = ps.inter.backward(segment)
    return SubpacketId(segment, slot)


def all_ids(num_segments: int, segment_size: int) -> List[SubpacketId]:
    """Every (segment, subpacket) pair in lexicographic order."""
    return [
        SubpacketId(segment, subpacket)
        for segment in range(1, num_segments + 1)
        for subpacket in range(1, segment_size + 1)
    ]
