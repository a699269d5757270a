"""Tests for the per-database read and write engine."""

from collections import Counter

import numpy as np
import pytest

from app.models.messages import UpdateTuple
from app.models.permutation import SubpacketId
from app.models.storage import ModelState
from app.services.coordinator import Coordinator
from app.services.database_node import DatabaseNode, select_downlink
from app.services.field_core import FieldConfig
from app.utils.errors import DimensionMismatch, DuplicateIndex, IndexOutOfRange
from tests.conftest import make_params


def build_nodes(params, rng, permutations, zero_noise=True, model=None):
    cfg = FieldConfig.for_params(params)
    if model is None:
        model = ModelState.random(
            cfg.GF, params.num_subpackets, params.ell, params.num_segments, rng
        )
    states, _ = Coordinator(params, cfg, rng, zero_noise=zero_noise).initialize(model, permutations)
    return cfg, model, [DatabaseNode(s, params, cfg) for s in states]


def ints(vector):
    return [int(v) for v in vector]


class TestSelectDownlink:
    def test_first_round_is_lexicographic(self):
        params = make_params(1, 6)
        selection = select_downlink(Counter(), params)
        assert selection.targets == [SubpacketId(1, 1), SubpacketId(1, 2), SubpacketId(1, 3)]

    def test_most_popular_with_tie_break(self):
        params = make_params(1, 6)
        popularity = Counter(
            {SubpacketId(2, 3): 5, SubpacketId(3, 1): 2, SubpacketId(1, 4): 2, SubpacketId(1, 1): 1}
        )
        selection = select_downlink(popularity, params)
        assert selection.targets == [SubpacketId(2, 3), SubpacketId(1, 4), SubpacketId(3, 1)]

    def test_by_segment_grouping(self):
        params = make_params(1, 6)
        popularity = Counter({SubpacketId(3, 2): 4, SubpacketId(1, 4): 3, SubpacketId(3, 1): 2})
        assert select_downlink(popularity, params).by_segment() == {3: [2, 1], 1: [4]}


class TestReadQuery:
    def test_case_two_query_is_structural_column(self, fifteen_permutations, rng):
        params = make_params(2, 4, num_subpackets=15, rate=0.2)
        _, _, nodes = build_nodes(params, rng, fifteen_permutations)
        query = nodes[0].make_read_query(SubpacketId(1, 1))
        assert ints(query) == [0, 1, 0, 0, 0]

    def test_case_two_answer_is_scaled_symbol(self, fifteen_permutations, rng):
        params = make_params(2, 4, num_subpackets=15, rate=0.2)
        cfg, model, nodes = build_nodes(params, rng, fifteen_permutations)
        for node in nodes:
            answer = node.read(SubpacketId(1, 1))
            alpha = cfg.element(cfg.alpha_of(node.index))
            assert answer.value == int(model.subpacket(SubpacketId(1, 2))[0] * alpha**-1)

    def test_case_one_query_holds_gamma_block(self, fifteen_permutations, rng):
        params = make_params(1, 6, num_subpackets=15, rate=0.2)
        cfg, _, nodes = build_nodes(params, rng, fifteen_permutations)
        node = nodes[2]
        query = node.make_read_query(SubpacketId(1, 1))
        alpha = cfg.alpha_of(node.index)
        expected = [0] * 10
        expected[2] = int(cfg.element(cfg.f[0] - alpha) ** -1)
        expected[3] = int(cfg.element(cfg.f[1] - alpha) ** -1)
        assert ints(query) == expected

    def test_case_one_answer_sums_scaled_parameters(self, fifteen_permutations, rng):
        params = make_params(1, 6, num_subpackets=15, rate=0.2)
        cfg, model, nodes = build_nodes(params, rng, fifteen_permutations)
        real = model.subpacket(SubpacketId(1, 2))
        for node in nodes:
            alpha = cfg.alpha_of(node.index)
            expected = sum(
                (real[k] * cfg.element(fk - alpha) ** -1 for k, fk in enumerate(cfg.f)),
                cfg.element(0),
            )
            assert node.read(SubpacketId(1, 1)).value == int(expected)

    def test_case_four_query_is_unit_vector(self, twelve_permutations, rng):
        params = make_params(4, 6)
        cfg, model, nodes = build_nodes(params, rng, twelve_permutations)
        query = nodes[0].make_read_query(SubpacketId(3, 1))
        expected = [0] * 12
        expected[1] = 1
        assert ints(query) == expected
        alpha = cfg.element(cfg.alpha_of(1))
        answer = nodes[0].answer_read(query, SubpacketId(3, 1))
        assert answer.value == int(model.subpacket(SubpacketId(1, 2))[0] * alpha**-1)

    def test_case_three_query_length(self, twelve_permutations, rng):
        params = make_params(3, 6)
        _, _, nodes = build_nodes(params, rng, twelve_permutations, zero_noise=False)
        assert nodes[0].make_read_query(SubpacketId(2, 4)).shape == (12,)

    def test_target_out_of_range(self, fifteen_permutations, rng):
        params = make_params(2, 4, num_subpackets=15, rate=0.2)
        _, _, nodes = build_nodes(params, rng, fifteen_permutations)
        with pytest.raises(IndexOutOfRange):
            nodes[0].make_read_query(SubpacketId(1, 6))
        with pytest.raises(IndexOutOfRange):
            nodes[0].make_read_query(SubpacketId(4, 1))

    def test_query_length_mismatch(self, fifteen_permutations, rng):
        params = make_params(2, 4, num_subpackets=15, rate=0.2)
        cfg, _, nodes = build_nodes(params, rng, fifteen_permutations)
        with pytest.raises(DimensionMismatch):
            nodes[0].answer_read(cfg.GF.Zeros(4), SubpacketId(1, 1))


class TestApplyWrite:
    def test_case_four_lands_on_real_positions(self, twelve_permutations, rng):
        params = make_params(4, 6)
        cfg = FieldConfig.for_params(params)
        model = ModelState.zeros(cfg.GF, 12, 1, 3)
        _, _, nodes = build_nodes(params, rng, twelve_permutations, model=model)
        tuples = [
            UpdateTuple(update=7, subpacket=1, segment=3),
            UpdateTuple(update=11, subpacket=3, segment=1),
            UpdateTuple(update=13, subpacket=1, segment=2),
        ]
        nodes[0].apply_write(tuples)
        expected = [0] * 12
        expected[1], expected[5], expected[10] = 7, 11, 13
        assert ints(nodes[0].state.storage) == expected

    def test_case_one_scales_by_gamma(self, fifteen_permutations, rng):
        params = make_params(1, 6, num_subpackets=15, rate=0.2)
        cfg = FieldConfig.for_params(params)
        model = ModelState.zeros(cfg.GF, 15, 2, 3)
        _, _, nodes = build_nodes(params, rng, fifteen_permutations, model=model)
        node = nodes[1]
        node.apply_write([UpdateTuple(update=9, subpacket=1, segment=1)])
        alpha = cfg.alpha_of(node.index)
        expected = [0] * 30
        expected[2] = int(cfg.element(9) * cfg.element(cfg.f[0] - alpha) ** -1)
        expected[3] = int(cfg.element(9) * cfg.element(cfg.f[1] - alpha) ** -1)
        assert ints(node.state.storage) == expected

    def test_popularity_counts_permuted_indices(self, fifteen_permutations, rng):
        params = make_params(2, 4, num_subpackets=15, rate=0.2)
        _, _, nodes = build_nodes(params, rng, fifteen_permutations)
        nodes[0].apply_write(
            [UpdateTuple(update=1, subpacket=1, segment=1), UpdateTuple(update=2, subpacket=3, segment=2)]
        )
        nodes[0].apply_write([UpdateTuple(update=3, subpacket=1, segment=1)])
        assert nodes[0].state.popularity == Counter({SubpacketId(1, 1): 2, SubpacketId(2, 3): 1})
        nodes[0].reset_popularity()
        assert not nodes[0].state.popularity

    def test_empty_write_is_noop(self, twelve_permutations, rng):
        params = make_params(3, 6)
        _, _, nodes = build_nodes(params, rng, twelve_permutations, zero_noise=False)
        before = nodes[0].state.storage.copy()
        nodes[0].apply_write([])
        assert np.array_equal(nodes[0].state.storage, before)
        assert not nodes[0].state.popularity

    def test_duplicate_index_rejected(self, twelve_permutations, rng):
        params = make_params(4, 6)
        _, _, nodes = build_nodes(params, rng, twelve_permutations)
        before = nodes[0].state.storage.copy()
        with pytest.raises(DuplicateIndex):
            nodes[0].apply_write(
                [UpdateTuple(update=1, subpacket=2, segment=1), UpdateTuple(update=5, subpacket=2, segment=1)]
            )
        assert np.array_equal(nodes[0].state.storage, before)

    def test_tuple_out_of_range(self, twelve_permutations, rng):
        params = make_params(4, 6)
        _, _, nodes = build_nodes(params, rng, twelve_permutations)
        with pytest.raises(IndexOutOfRange):
            nodes[0].apply_write([UpdateTuple(update=1, subpacket=5, segment=1)])

    @pytest.mark.parametrize("case, n_databases", [(1, 6), (2, 4), (3, 6), (4, 6)])
    def test_writes_commute(self, case, n_databases, rng):
        params = make_params(case, n_databases)
        cfg, _, nodes = build_nodes(params, rng, None, zero_noise=False)
        first = [UpdateTuple(update=3, subpacket=1, segment=1), UpdateTuple(update=8, subpacket=4, segment=3)]
        second = [UpdateTuple(update=5, subpacket=1, segment=1), UpdateTuple(update=2, subpacket=2, segment=2)]

        node = nodes[0]
        start = node.state.storage.copy()
        node.apply_write(first)
        node.apply_write(second)
        forward = node.state.storage.copy()

        node.state.storage = start
        node.apply_write(second)
        node.apply_write(first)
        assert np.array_equal(node.state.storage, forward)
