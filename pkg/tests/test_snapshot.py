"""Tests for binary snapshots."""

import numpy as np
import pytest

from app.services.simulation import World, create_world, run_round, verify_world
from app.services.snapshot import MAGIC, read_snapshot, write_snapshot
from app.utils.errors import SnapshotError
from tests.conftest import MINIMAL_N, make_params


@pytest.fixture
def snapshot_file(tmp_path):
    params = make_params(3, 6)
    world = create_world(params, seed=12)
    path = write_snapshot(tmp_path / "snapshot.bin", params, world.cfg, world.states, world.ps, seed=12)
    return world, path


class TestRoundTrip:
    @pytest.mark.parametrize("case", [1, 2, 3, 4])
    def test_reload_verifies(self, case, tmp_path):
        params = make_params(case, MINIMAL_N[case])
        world = create_world(params, seed=31)
        run_round(world)
        path = write_snapshot(tmp_path / "s.bin", params, world.cfg, world.states, world.ps, seed=31)

        loaded = read_snapshot(path)
        assert loaded.params == params
        assert loaded.seed == 31
        assert loaded.ps == world.ps
        for original, restored in zip(world.states, loaded.states):
            assert np.array_equal(original.storage, restored.storage)
            if params.case.has_inter:
                assert np.array_equal(original.combined_matrix, restored.combined_matrix)

        reloaded = World(
            loaded.params, loaded.cfg, loaded.states, loaded.ps, world.oracle.copy(), 1, 31
        )
        assert verify_world(reloaded).ok
        run_round(reloaded)
        assert verify_world(reloaded).ok

    def test_missing_seed(self, tmp_path):
        params = make_params(2, 4)
        world = create_world(params, seed=1)
        path = write_snapshot(tmp_path / "s.bin", params, world.cfg, world.states, world.ps)
        assert read_snapshot(path).seed is None

    def test_popularity_not_stored(self, tmp_path):
        params = make_params(2, 4)
        world = create_world(params, seed=1)
        run_round(world)
        path = write_snapshot(tmp_path / "s.bin", params, world.cfg, world.states, world.ps)
        assert all(not state.popularity for state in read_snapshot(path).states)


class TestCorruptFiles:
    def test_bad_magic(self, snapshot_file):
        _, path = snapshot_file
        data = path.read_bytes()
        path.write_bytes(b"NOTASNAP" + data[len(MAGIC):])
        with pytest.raises(SnapshotError, match="magic"):
            read_snapshot(path)

    def test_unknown_version(self, snapshot_file):
        _, path = snapshot_file
        data = bytearray(path.read_bytes())
        data[len(MAGIC)] = 9
        path.write_bytes(bytes(data))
        with pytest.raises(SnapshotError, match="version"):
            read_snapshot(path)

    def test_truncated(self, snapshot_file):
        _, path = snapshot_file
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(SnapshotError, match="truncated"):
            read_snapshot(path)

    def test_trailing_bytes(self, snapshot_file):
        _, path = snapshot_file
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(SnapshotError, match="trailing"):
            read_snapshot(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(SnapshotError):
            read_snapshot(tmp_path / "absent.bin")

    def test_inconsistent_header(self, snapshot_file):
        _, path = snapshot_file
        data = bytearray(path.read_bytes())
        # N field follows case in the header
        offset = len(MAGIC) + 2 + 8
        data[offset] = 5
        path.write_bytes(bytes(data))
        with pytest.raises(SnapshotError):
            read_snapshot(path)
