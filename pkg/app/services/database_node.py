"""
Per-database protocol engine.

A node sees only its own storage, its noisy matrices and the permuted
indices it receives; it never has access to the PermutationSet.
"""

from collections import Counter
from typing import Iterable, List, Mapping, Sequence

from app.logging_config import get_logger
from app.models.messages import DownlinkSelection, ReadAnswer, UpdateTuple
from app.models.params import SchemeCase, SchemeParams
from app.models.permutation import SubpacketId
from app.models.storage import DatabaseState
from app.services.field_core import FieldConfig, FieldElement, kron
from app.services.permutation_engine import all_ids
from app.utils.errors import DimensionMismatch, DuplicateIndex, IndexOutOfRange


logger = get_logger(__name__)

# Database 1 broadcasts the downlink selection
DESIGNATED_DATABASE = 1


def select_downlink(popularity: Mapping[SubpacketId, int], params: SchemeParams) -> DownlinkSelection:
    """
    The P * r' most popular permuted ids.

    Ties, and the empty first-round counts, fall back to lexicographic
    (segment, subpacket) order.
    """
    universe = all_ids(params.num_segments, params.segment_size)
    ranked = sorted(universe, key=lambda sid: (-popularity.get(sid, 0), sid))
    return DownlinkSelection(targets=ranked[: params.download_count])


class DatabaseNode:
    """Answers read queries and applies permutation-reversed writes for one database."""

    def __init__(self, state: DatabaseState, params: SchemeParams, cfg: FieldConfig):
        self.state = state
        self.params = params
        self.cfg = cfg
        alpha = cfg.alpha_of(state.index)
        # f_k - alpha_n, tiled over subpackets
        self._inverse_gamma = cfg.vector(fk - alpha for fk in cfg.f)

    @property
    def index(self) -> int:
        return self.state.index

    @property
    def case(self) -> SchemeCase:
        return self.params.case

    def reset_popularity(self) -> None:
        self.state.popularity = Counter()

    def _check_target(self, target: SubpacketId) -> None:
        if not 1 <= target.segment <= self.params.num_segments:
            raise IndexOutOfRange(f"segment {target.segment} outside 1..{self.params.num_segments}")
        if not 1 <= target.subpacket <= self.params.segment_size:
            raise IndexOutOfRange(
                f"subpacket {target.subpacket} outside 1..{self.params.segment_size}"
            )

    def _tiled_inverse_gamma(self, repeats: int) -> FieldElement:
        return kron(self.cfg.GF.Ones((repeats, 1)), self._inverse_gamma.reshape(-1, 1)).reshape(-1)

    def make_read_query(self, target: SubpacketId) -> FieldElement:
        """
        Query vector for one permuted target, built from this node's noisy matrices.

        Raises:
            IndexOutOfRange: If the target is outside the index space
        """
        self._check_target(target)
        ell, m = self.params.ell, self.params.segment_size
        case = self.case

        if case == SchemeCase.UNCODED_WITHIN:
            matrix = self.state.within_matrices[target.segment - 1].entries
            start = (target.subpacket - 1) * ell
            return matrix[:, start : start + ell].sum(axis=1)
        if case == SchemeCase.CODED_WITHIN:
            matrix = self.state.within_matrices[target.segment - 1].entries
            return matrix[:, target.subpacket - 1].copy()
        if case == SchemeCase.UNCODED_TWO_STAGE:
            start = (target.segment - 1) * m * ell + (target.subpacket - 1) * ell
            columns = self.state.combined_matrix[:, start : start + ell].sum(axis=1)
            return self._tiled_inverse_gamma(self.params.num_subpackets) * columns
        column = (target.segment - 1) * m + target.subpacket - 1
        return self.state.combined_matrix[:, column].copy()

    def answer_read(self, query: FieldElement, target: SubpacketId) -> ReadAnswer:
        """
        Inner product of the query with this node's (segment) storage.

        Raises:
            DimensionMismatch: If the query length does not fit the case
        """
        self._check_target(target)
        ell, m = self.params.ell, self.params.segment_size
        storage = self.state.storage
        case = self.case

        if case == SchemeCase.UNCODED_WITHIN:
            block = m * ell
            segment = storage[(target.segment - 1) * block : target.segment * block]
            symbols = self._tiled_inverse_gamma(m) * segment
        elif case == SchemeCase.CODED_WITHIN:
            symbols = storage[(target.segment - 1) * m : target.segment * m]
        else:
            symbols = storage

        if query.shape != symbols.shape:
            raise DimensionMismatch(
                f"query of length {query.shape[0]} does not match {symbols.shape[0]} stored symbols"
            )
        value = int(symbols @ query)
        logger.debug(
            "Answered read",
            extra={"db_index": self.index, "target": tuple(target), "case": int(case)},
        )
        return ReadAnswer(db_index=self.index, target=target, value=value)

    def read(self, target: SubpacketId) -> ReadAnswer:
        return self.answer_read(self.make_read_query(target), target)

    def apply_write(self, tuples: Sequence[UpdateTuple]) -> None:
        """
        Add one user's permutation-reversed incremental update to storage.

        Absent subpackets contribute a zero update. Popularity is counted at
        the permuted indices.

        Raises:
            DuplicateIndex: If two tuples share a permuted index
            IndexOutOfRange: If a tuple index is outside its range
        """
        seen = set()
        for item in tuples:
            self._check_target(item.index)
            if item.index in seen:
                raise DuplicateIndex(f"permuted index {tuple(item.index)} appears twice")
            seen.add(item.index)
        if not tuples:
            return

        params, field = self.params, self.cfg.GF
        ell, m = params.ell, params.segment_size
        case = self.case

        if case.has_inter:
            permuted = field.Zeros(params.num_subpackets)
            for item in tuples:
                permuted[(item.segment - 1) * m + item.subpacket - 1] = self.cfg.element(item.update)
            if not case.is_coded:
                permuted = _spread(permuted, ell)
            self.state.storage = self.state.storage + self.state.combined_matrix @ permuted
        else:
            block = m if case.is_coded else m * ell
            for segment, items in _group_by_segment(tuples).items():
                permuted = field.Zeros(m)
                for item in items:
                    permuted[item.subpacket - 1] = self.cfg.element(item.update)
                if not case.is_coded:
                    permuted = _spread(permuted, ell)
                increment = self.state.within_matrices[segment - 1].entries @ permuted
                start = (segment - 1) * block
                self.state.storage[start : start + block] = (
                    self.state.storage[start : start + block] + increment
                )

        self.state.popularity.update(item.index for item in tuples)
        logger.debug(
            "Applied write",
            extra={"db_index": self.index, "tuples": len(tuples), "case": int(case)},
        )


def _spread(vector: FieldElement, ell: int) -> FieldElement:
    """vector kron 1_ell."""
    field = type(vector)
    return kron(vector.reshape(-1, 1), field.Ones((ell, 1))).reshape(-1)


def _group_by_segment(tuples: Iterable[UpdateTuple]) -> dict:
    grouped: dict = {}
    for item in tuples:
        grouped.setdefault(item.segment, []).append(item)
    return grouped
