"""Tests for permutations, reversing matrices and index maps."""

import itertools
from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from app.models.params import SchemeCase
from app.models.permutation import Permutation, PermutationSet, SubpacketId
from app.services.field_core import FieldConfig, GammaDiagonal, kron
from app.services.permutation_engine import (
    NoisyReversingMatrix,
    all_ids,
    build_noisy_inter,
    build_noisy_within,
    combine_case3,
    combine_case4,
    permuted_to_real,
    real_to_permuted,
    reversing_matrix,
    sample_permutation,
    sample_permutation_set,
)
from app.utils.errors import DimensionMismatch, IndexOutOfRange, InvalidCase
from tests.conftest import make_params


R1 = [
    [0, 1, 0, 0, 0],
    [1, 0, 0, 0, 0],
    [0, 0, 0, 0, 1],
    [0, 0, 1, 0, 0],
    [0, 0, 0, 1, 0],
]
RHAT4 = [[0, 0, 1], [1, 0, 0], [0, 1, 0]]


def plain(matrix):
    return np.asarray(matrix.view(np.ndarray), dtype=np.int64)


class TestPermutation:
    def test_rejects_non_permutation(self):
        with pytest.raises(DimensionMismatch):
            Permutation([1, 1, 2])

    def test_forward_and_backward(self):
        p = Permutation((2, 1, 4, 5, 3))
        assert p.forward(1) == 2
        assert p.backward(2) == 1
        assert all(p.backward(p.forward(i)) == i for i in range(1, 6))

    def test_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            Permutation((2, 1)).forward(3)

    def test_set_rejects_mixed_sizes(self):
        with pytest.raises(DimensionMismatch):
            PermutationSet.from_mappings([(1, 2), (1, 2, 3)])

    def test_set_rejects_wrong_inter_size(self):
        with pytest.raises(DimensionMismatch):
            PermutationSet.from_mappings([(1, 2), (2, 1)], (1, 2, 3))


class TestSampling:
    def test_size_one(self, rng):
        assert sample_permutation(1, rng).mapping == (1,)

    def test_fixture_permutation_is_valid(self):
        assert Permutation((2, 1, 4, 5, 3)).size == 5

    def test_uniformity_chi_square(self, rng):
        """60000 draws of m=3 spread evenly over the 6 permutations."""
        counts = Counter(sample_permutation(3, rng).mapping for _ in range(60000))
        assert len(counts) == 6
        _, p_value = chisquare(list(counts.values()))
        assert p_value > 0.001

    def test_set_has_inter_only_for_two_stage(self, rng):
        assert sample_permutation_set(make_params(1, 6), rng).inter is None
        ps = sample_permutation_set(make_params(3, 6), rng)
        assert ps.inter is not None and ps.inter.size == 3
        assert ps.num_segments == 3 and ps.segment_size == 4

    def test_non_positive_size(self, rng):
        with pytest.raises(DimensionMismatch):
            sample_permutation(0, rng)


class TestReversingMatrix:
    def test_identity(self):
        assert np.array_equal(reversing_matrix(Permutation.identity(4)), np.eye(4, dtype=np.int64))

    def test_worked_example(self):
        assert reversing_matrix(Permutation((2, 1, 4, 5, 3))).tolist() == R1

    def test_reverses_every_small_permutation(self):
        for m in range(1, 5):
            v = np.arange(10, 10 + m)
            for mapping in itertools.permutations(range(1, m + 1)):
                p = Permutation(mapping)
                permuted = v[np.asarray(p.mapping) - 1]
                assert np.array_equal(reversing_matrix(p) @ permuted, v)


class TestNoisyWithin:
    def test_case_two_zero_noise_is_structural(self):
        cfg = FieldConfig.default(2147483647, 1, 4)
        matrix = build_noisy_within(SchemeCase.CODED_WITHIN, Permutation((2, 1, 4, 5, 3)), 1, cfg)
        assert plain(matrix.entries).tolist() == R1
        assert matrix.symbol_count == 25

    def test_case_one_identity_is_gamma_blocks(self):
        cfg = FieldConfig.default(2147483647, 2, 6)
        matrix = build_noisy_within(SchemeCase.UNCODED_WITHIN, Permutation.identity(3), 2, cfg)
        expected = kron(cfg.GF.Identity(3), GammaDiagonal(2, cfg).matrix())
        assert np.array_equal(matrix.entries, expected)

    def test_case_two_noise_scaled_by_alpha_power(self):
        cfg = FieldConfig.default(13, 1, 4)
        noise = cfg.GF.Ones((2, 2))
        matrix = build_noisy_within(2, Permutation((2, 1)), 1, cfg, noise)
        alpha = cfg.alpha_of(1)
        expected = cfg.GF([[0, 1], [1, 0]]) + cfg.element(alpha) * noise
        assert np.array_equal(matrix.entries, expected)

    def test_wrong_noise_shape(self):
        cfg = FieldConfig.default(13, 1, 4)
        with pytest.raises(DimensionMismatch):
            build_noisy_within(2, Permutation((2, 1)), 1, cfg, cfg.GF.Zeros((3, 3)))

    def test_entry_marginals_uniform_for_every_permutation(self):
        """Each entry over its own noise symbol is uniform on F_5, for all of S_3."""
        cfg = FieldConfig(5, [1], [2, 3])
        for mapping in itertools.permutations((1, 2, 3)):
            p = Permutation(mapping)
            histograms = []
            for i, j in itertools.product(range(3), repeat=2):
                seen = Counter()
                for value in range(5):
                    noise = cfg.GF.Zeros((3, 3))
                    noise[i, j] = value
                    seen[int(build_noisy_within(2, p, 1, cfg, noise).entries[i, j])] += 1
                histograms.append(sorted(seen.items()))
            assert all(h == [(v, 1) for v in range(5)] for h in histograms)


class TestNoisyInter:
    def test_case_four_zero_noise(self):
        cfg = FieldConfig.default(2147483647, 1, 6)
        matrix = build_noisy_inter(SchemeCase.CODED_TWO_STAGE, Permutation((2, 3, 1)), 1, cfg)
        assert plain(matrix.entries).tolist() == RHAT4

    def test_case_three_single_segment(self):
        cfg = FieldConfig.default(13, 1, 6)
        noise = cfg.GF([[4]])
        matrix = build_noisy_inter(3, Permutation.identity(1), 2, cfg, noise)
        inverse_gamma = cfg.element(cfg.f[0] - cfg.alpha_of(2))
        assert int(matrix.entries[0, 0]) == int(cfg.element(1) + inverse_gamma * noise[0, 0])

    def test_rejects_within_only_case(self):
        cfg = FieldConfig.default(13, 1, 4)
        with pytest.raises(InvalidCase):
            build_noisy_inter(2, Permutation((1, 2)), 1, cfg)


class TestCombine:
    def _structural(self, case, ps, n, cfg):
        within = [build_noisy_within(case, p, n, cfg) for p in ps.within]
        inter = build_noisy_inter(case, ps.inter, n, cfg)
        return within, inter

    def test_case_four_places_within_blocks(self, twelve_permutations):
        params = make_params(4, 6)
        cfg = FieldConfig.for_params(params)
        within, inter = self._structural(4, twelve_permutations, 1, cfg)
        combined = plain(combine_case4(within, inter, params))

        # block (i, j) is R^[i] where row i of R_hat has its 1
        expected = np.zeros((12, 12), dtype=np.int64)
        for i, j in enumerate([2, 0, 1]):
            expected[i * 4 : (i + 1) * 4, j * 4 : (j + 1) * 4] = reversing_matrix(
                twelve_permutations.within[i]
            )
        assert np.array_equal(combined, expected)

    def test_case_three_structural(self, twelve_permutations):
        params = make_params(3, 6)
        cfg = FieldConfig.for_params(params)
        within, inter = self._structural(3, twelve_permutations, 2, cfg)
        combined = combine_case3(within, inter, params)

        gamma = GammaDiagonal(2, cfg).matrix()
        expected = cfg.GF.Zeros((12, 12))
        for i, j in enumerate([2, 0, 1]):
            block = kron(cfg.GF(reversing_matrix(twelve_permutations.within[i])), gamma)
            expected[i * 4 : (i + 1) * 4, j * 4 : (j + 1) * 4] = block
        assert np.array_equal(combined, expected)

    def test_case_three_single_segment_identity(self):
        params = make_params(3, 8, num_subpackets=4, num_segments=1)
        cfg = FieldConfig.for_params(params)
        ps = PermutationSet.from_mappings([(1, 2, 3, 4)], (1,))
        within, inter = self._structural(3, ps, 1, cfg)
        combined = combine_case3(within, inter, params)
        expected = kron(cfg.GF.Identity(4), GammaDiagonal(1, cfg).matrix())
        assert np.array_equal(combined, expected)

    def test_case_four_single_segment_scales_by_inter_symbol(self):
        params = make_params(4, 6, num_subpackets=4, num_segments=1)
        cfg = FieldConfig.for_params(params)
        within = [build_noisy_within(4, Permutation((2, 1, 4, 3)), 1, cfg)]
        inter = build_noisy_inter(4, Permutation.identity(1), 1, cfg, cfg.GF([[5]]))
        combined = combine_case4(within, inter, params)
        assert np.array_equal(combined, within[0].entries * inter.entries[0, 0])

    def test_dimension_mismatch(self, twelve_permutations):
        params = make_params(4, 6)
        cfg = FieldConfig.for_params(params)
        within, inter = self._structural(4, twelve_permutations, 1, cfg)
        with pytest.raises(DimensionMismatch):
            combine_case4(within[:2], inter, params)
        bad_inter = NoisyReversingMatrix(SchemeCase.CODED_TWO_STAGE, "inter", cfg.GF.Zeros((2, 2)))
        with pytest.raises(DimensionMismatch):
            combine_case4(within, bad_inter, params)


class TestIndexMaps:
    def test_downlink_segment_one(self, fifteen_permutations):
        permuted = [SubpacketId(1, 1), SubpacketId(1, 3)]
        real = [permuted_to_real(fifteen_permutations, 1, t) for t in permuted]
        assert real == [SubpacketId(1, 2), SubpacketId(1, 4)]

    def test_two_stage_reading_example(self, twelve_permutations):
        assert permuted_to_real(twelve_permutations, 3, SubpacketId(3, 1)) == SubpacketId(1, 2)

    def test_case_one_writing_example(self, fifteen_permutations):
        assert real_to_permuted(fifteen_permutations, 1, SubpacketId(1, 2)) == SubpacketId(1, 1)

    def test_two_stage_writing_example(self, twelve_permutations):
        assert real_to_permuted(twelve_permutations, 4, SubpacketId(1, 2)) == SubpacketId(3, 1)

    def test_identity_permutations(self):
        ps = PermutationSet.from_mappings([(1, 2, 3)] * 2, (1, 2))
        for sid in all_ids(2, 3):
            assert permuted_to_real(ps, 3, sid) == sid

    @pytest.mark.parametrize("case", [1, 2, 3, 4])
    def test_bijection_round_trip(self, case, rng):
        params = make_params(case, {1: 6, 2: 4, 3: 6, 4: 6}[case])
        ps = sample_permutation_set(params, rng)
        for sid in all_ids(params.num_segments, params.segment_size):
            assert real_to_permuted(ps, case, permuted_to_real(ps, case, sid)) == sid
            assert permuted_to_real(ps, case, real_to_permuted(ps, case, sid)) == sid

    def test_out_of_range(self, fifteen_permutations):
        with pytest.raises(IndexOutOfRange):
            permuted_to_real(fifteen_permutations, 1, SubpacketId(4, 1))
        with pytest.raises(IndexOutOfRange):
            real_to_permuted(fifteen_permutations, 1, SubpacketId(1, 6))

    def test_two_stage_needs_inter(self, fifteen_permutations):
        with pytest.raises(InvalidCase):
            permuted_to_real(fifteen_permutations, 3, SubpacketId(1, 1))
