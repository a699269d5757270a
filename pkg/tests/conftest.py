"""Pytest configuration and fixtures."""

import os
import sys
from pathlib import Path

import numpy as np
import pytest

# Add the project root to the Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

os.environ.setdefault("LOG_LEVEL", "WARNING")
os.environ.setdefault("ENVIRONMENT", "test")

from app.models.params import SchemeParams  # noqa: E402
from app.models.permutation import PermutationSet  # noqa: E402
from app.services.field_core import FieldConfig  # noqa: E402


# Worked-example permutations: P=15, B=3 (cases 1/2) and P=12, B=3 (cases 3/4)
WITHIN_FIFTEEN = [(2, 1, 4, 5, 3), (3, 5, 2, 4, 1), (5, 2, 3, 1, 4)]
WITHIN_TWELVE = [(2, 4, 3, 1), (1, 3, 2, 4), (3, 1, 4, 2)]
INTER_THREE = (2, 3, 1)

# Smallest admissible N per case, and one larger N
MINIMAL_N = {1: 6, 2: 4, 3: 6, 4: 6}
LARGER_N = {1: 8, 2: 7, 3: 8, 4: 11}


@pytest.fixture(scope="session")
def test_env():
    """Set up test environment variables."""
    os.environ.setdefault("FIELD_MODULUS", "2147483647")
    os.environ.setdefault("LOG_LEVEL", "WARNING")
    os.environ.setdefault("ENVIRONMENT", "test")

    yield


@pytest.fixture
def fifteen_permutations():
    """Within-segment permutations of the P=15, B=3 example."""
    return PermutationSet.from_mappings(WITHIN_FIFTEEN)


@pytest.fixture
def twelve_permutations():
    """Within and inter-segment permutations of the P=12, B=3 example."""
    return PermutationSet.from_mappings(WITHIN_TWELVE, INTER_THREE)


@pytest.fixture
def rng():
    """Seeded generator; every test gets the same stream."""
    return np.random.default_rng(20240601)


@pytest.fixture
def small_field():
    """q=13, ell=1, four databases: f=(1), alpha=(2, 3, 4, 5)."""
    return FieldConfig(13, [1], [2, 3, 4, 5])


@pytest.fixture
def tiny_field():
    """q=7, ell=1, four databases; the privacy suite enumerates over it."""
    return FieldConfig(7, [1], [2, 3, 4, 5])


def make_params(case, num_databases, num_subpackets=12, num_segments=3, rate=0.25, q=2147483647):
    """SchemeParams with equal uplink and downlink rates."""
    return SchemeParams(
        case=case,
        num_databases=num_databases,
        num_subpackets=num_subpackets,
        num_segments=num_segments,
        r=rate,
        r_prime=rate,
        q=q,
    )
