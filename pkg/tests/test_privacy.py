"""
Exhaustive one-time-pad checks over small fields.

Whatever a single database sees (stored symbols, noisy matrices, update
symbols) must be uniformly distributed for every value of the secret it
masks.
"""

import itertools
from collections import Counter

import pytest

from app.models.params import SchemeCase
from app.models.permutation import Permutation
from app.services.coordinator import encode_subpacket
from app.services.field_core import FieldConfig
from app.services.permutation_engine import build_noisy_inter, build_noisy_within
from app.services.user_client import combine_update


pytestmark = pytest.mark.slow


def enumerate_matrices(cfg, size):
    for values in itertools.product(range(cfg.q), repeat=size * size):
        yield cfg.GF(values).reshape(size, size)


def flat(array):
    return tuple(int(v) for v in array.reshape(-1))


class TestStoredSymbols:
    @pytest.mark.parametrize("case", [SchemeCase.UNCODED_WITHIN, SchemeCase.CODED_WITHIN])
    def test_symbol_uniform_for_every_parameter(self, case, tiny_field):
        for secret in range(tiny_field.q):
            for n in range(1, 5):
                seen = Counter(
                    int(
                        encode_subpacket(
                            case, tiny_field.vector([secret]), tiny_field.GF([list(z)]), n, tiny_field
                        )[0]
                    )
                    for z in itertools.product(range(tiny_field.q), repeat=2)
                )
                assert sorted(seen) == list(range(tiny_field.q))
                assert set(seen.values()) == {tiny_field.q}


class TestNoisyMatrices:
    @pytest.mark.parametrize("case", [SchemeCase.UNCODED_WITHIN, SchemeCase.CODED_WITHIN])
    def test_within_matrix_hides_permutation(self, case, tiny_field):
        for mapping in itertools.permutations((1, 2)):
            p = Permutation(mapping)
            for n in range(1, 5):
                seen = Counter(
                    flat(build_noisy_within(case, p, n, tiny_field, z).entries)
                    for z in enumerate_matrices(tiny_field, 2)
                )
                assert len(seen) == tiny_field.q**4
                assert set(seen.values()) == {1}

    @pytest.mark.parametrize("case", [SchemeCase.UNCODED_TWO_STAGE, SchemeCase.CODED_TWO_STAGE])
    def test_inter_matrix_hides_permutation(self, case):
        cfg = FieldConfig.default(11, 1, 6)
        for mapping in itertools.permutations((1, 2)):
            p = Permutation(mapping)
            for n in (1, 6):
                seen = Counter(
                    flat(build_noisy_inter(case, p, n, cfg, z).entries)
                    for z in enumerate_matrices(cfg, 2)
                )
                assert len(seen) == cfg.q**4


class TestUpdateSymbols:
    @pytest.mark.parametrize("case", [SchemeCase.UNCODED_WITHIN, SchemeCase.CODED_WITHIN])
    def test_update_uniform_for_every_increment(self, case, tiny_field):
        for delta in range(tiny_field.q):
            for n in range(1, 5):
                alpha = tiny_field.alpha_of(n)
                seen = {
                    int(
                        combine_update(
                            case, tiny_field.vector([delta]), tiny_field.element(z), alpha, tiny_field
                        )
                    )
                    for z in range(tiny_field.q)
                }
                assert seen == set(range(tiny_field.q))

    def test_two_parameter_update_uniform(self):
        cfg = FieldConfig(11, [1, 2], [3, 4, 5, 6, 7, 8])
        for deltas in itertools.product(range(cfg.q), repeat=2):
            alpha = cfg.alpha_of(3)
            seen = {
                int(combine_update(1, cfg.vector(deltas), cfg.element(z), alpha, cfg))
                for z in range(cfg.q)
            }
            assert len(seen) == cfg.q
