"""
Binary snapshots of an initialized deployment.

Layout (all integers little-endian u64 unless noted):
    magic b"PRUWSNAP", version (u16)
    header: case, N, P, B, ell, q, seed, Pr, Pr'
    arrays, each a length prefix followed by residues:
        f, alpha, B within permutations, inter permutation (empty for 1/2),
        then per database: storage, B within matrices, inter matrix (empty
        for 1/2)
Combined matrices are rebuilt on load. Popularity counts are not stored.
"""

import io
import struct
from fractions import Fraction
from pathlib import Path
from typing import BinaryIO, List, NamedTuple, Optional, Sequence, Union

import galois
import numpy as np

from app.logging_config import get_logger
from app.models.params import SchemeCase, SchemeParams
from app.models.permutation import Permutation, PermutationSet
from app.models.storage import DatabaseState
from app.services.field_core import FieldConfig
from app.services.permutation_engine import (
    NoisyReversingMatrix,
    combine_case3,
    combine_case4,
    inter_matrix_size,
    within_matrix_size,
)
from app.utils.errors import PruwError, SnapshotError


logger = get_logger(__name__)

MAGIC = b"PRUWSNAP"
VERSION = 1
NO_SEED = 2**64 - 1

_HEADER = struct.Struct("<9Q")
_VERSION = struct.Struct("<H")
_LENGTH = struct.Struct("<Q")
_RESIDUE = np.dtype("<u8")


class Snapshot(NamedTuple):
    params: SchemeParams
    cfg: FieldConfig
    states: List[DatabaseState]
    ps: PermutationSet
    seed: Optional[int]


def _write_array(out: BinaryIO, values) -> None:
    if isinstance(values, galois.FieldArray):
        values = values.view(np.ndarray)
    data = np.asarray(values, dtype=np.int64).reshape(-1).astype(_RESIDUE)
    out.write(_LENGTH.pack(data.size))
    out.write(data.tobytes())


def _read_exact(src: BinaryIO, size: int) -> bytes:
    data = src.read(size)
    if len(data) != size:
        raise SnapshotError(f"snapshot truncated: wanted {size} bytes, got {len(data)}")
    return data


def _read_array(src: BinaryIO, expected: Optional[int] = None) -> np.ndarray:
    (length,) = _LENGTH.unpack(_read_exact(src, _LENGTH.size))
    if expected is not None and length != expected:
        raise SnapshotError(f"array of length {length} where {expected} was expected")
    return np.frombuffer(_read_exact(src, length * _RESIDUE.itemsize), dtype=_RESIDUE).astype(
        np.int64
    )


def write_snapshot(
    path: Union[str, Path],
    params: SchemeParams,
    cfg: FieldConfig,
    states: Sequence[DatabaseState],
    ps: PermutationSet,
    seed: Optional[int] = None,
) -> Path:
    """Serialize an initialized deployment."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buffer = io.BytesIO()
    buffer.write(MAGIC)
    buffer.write(_VERSION.pack(VERSION))
    buffer.write(
        _HEADER.pack(
            int(params.case),
            params.num_databases,
            params.num_subpackets,
            params.num_segments,
            params.ell,
            params.q,
            NO_SEED if seed is None else seed,
            params.upload_count,
            params.download_count,
        )
    )
    _write_array(buffer, cfg.f)
    _write_array(buffer, cfg.alpha)
    for p in ps.within:
        _write_array(buffer, p.mapping)
    _write_array(buffer, ps.inter.mapping if ps.inter is not None else [])
    for state in states:
        _write_array(buffer, state.storage)
        for matrix in state.within_matrices:
            _write_array(buffer, matrix.entries)
        _write_array(buffer, state.inter_matrix.entries if state.inter_matrix is not None else [])

    path.write_bytes(buffer.getvalue())
    logger.info(
        "Snapshot written",
        extra={"path": str(path), "bytes": buffer.tell(), "case": int(params.case)},
    )
    return path


def read_snapshot(path: Union[str, Path]) -> Snapshot:
    """
    Load a snapshot and rebuild the combined matrices.

    Raises:
        SnapshotError: On bad magic, unknown version, truncation or
            inconsistent contents
    """
    path = Path(path)
    try:
        src = io.BytesIO(path.read_bytes())
    except OSError as e:
        raise SnapshotError(f"cannot read snapshot {path}: {e}") from e

    if _read_exact(src, len(MAGIC)) != MAGIC:
        raise SnapshotError(f"{path} is not a snapshot (bad magic)")
    (version,) = _VERSION.unpack(_read_exact(src, _VERSION.size))
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")

    case, n_db, n_sub, n_seg, ell, q, seed, pr, pr_prime = _HEADER.unpack(
        _read_exact(src, _HEADER.size)
    )
    try:
        params = SchemeParams(
            case=case,
            num_databases=n_db,
            num_subpackets=n_sub,
            num_segments=n_seg,
            r=float(Fraction(pr, n_sub)),
            r_prime=float(Fraction(pr_prime, n_sub)),
            q=q,
        )
        if params.ell != ell:
            raise SnapshotError(f"header ell={ell} does not match derived ell={params.ell}")
        cfg = FieldConfig(q, _read_array(src, ell), _read_array(src, n_db))
        within = [Permutation(_read_array(src, params.segment_size)) for _ in range(n_seg)]
        inter_mapping = _read_array(src)
        if bool(inter_mapping.size) != params.case.has_inter:
            raise SnapshotError(f"case {case} snapshot has the wrong inter-segment permutation")
        ps = PermutationSet(within, Permutation(inter_mapping) if inter_mapping.size else None)
        states = [_read_state(src, n, params, cfg) for n in range(1, n_db + 1)]
    except SnapshotError:
        raise
    except (PruwError, ValueError) as e:
        raise SnapshotError(f"inconsistent snapshot {path}: {e}") from e

    if src.read(1):
        raise SnapshotError(f"trailing bytes after snapshot contents in {path}")

    logger.info("Snapshot loaded", extra={"path": str(path), "case": case})
    return Snapshot(params, cfg, states, ps, None if seed == NO_SEED else seed)


def _read_state(src: BinaryIO, n: int, params: SchemeParams, cfg: FieldConfig) -> DatabaseState:
    case = params.case
    data_size = params.num_subpackets if case.is_coded else params.model_size
    state = DatabaseState(n, cfg.vector(_read_array(src, data_size)))

    size = within_matrix_size(case, params.segment_size, params.ell)
    state.within_matrices = [
        NoisyReversingMatrix(case, "within", cfg.vector(_read_array(src, size * size)).reshape(size, size))
        for _ in range(params.num_segments)
    ]
    inter = _read_array(src)
    if case.has_inter:
        size = inter_matrix_size(case, params.num_segments, params.ell)
        if inter.size != size * size:
            raise SnapshotError(f"inter matrix of database {n} has {inter.size} entries")
        state.inter_matrix = NoisyReversingMatrix(case, "inter", cfg.vector(inter).reshape(size, size))
        combine = combine_case3 if case == SchemeCase.UNCODED_TWO_STAGE else combine_case4
        state.combined_matrix = combine(state.within_matrices, state.inter_matrix, params)
    elif inter.size:
        raise SnapshotError(f"case {int(case)} snapshot carries an inter matrix")
    return state
