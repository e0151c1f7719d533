import json
import math

import numpy as np
import pytest

from ersatz.io import (
    FileFormatError,
    load_trajectory,
    read_rows,
    save_trajectory,
    sidecar_path,
    write_json,
    write_rows,
)
from ersatz.synthesis import NoiseSpec, Trajectory, synth_motion


def test_trajectory_round_trip(tmp_path):
    traj = synth_motion(NoiseSpec(length=2**8, seed=3))
    path = save_trajectory(traj, tmp_path / "sub" / "m.csv")
    back = load_trajectory(path)
    np.testing.assert_array_equal(back.samples, traj.samples)
    assert back.role == "motion"
    assert back.spec == traj.spec


def test_missing_sidecar_means_bare_motion(tmp_path):
    path = save_trajectory(Trajectory(np.arange(4.0), "noise"), tmp_path / "n.csv")
    assert load_trajectory(path).role == "noise"
    sidecar_path(path).unlink()
    back = load_trajectory(path)
    assert back.role == "motion" and back.spec is None


@pytest.mark.parametrize(
    "text",
    ["", "time,value\n0,1\n", "index,value\n", "index,value\n0,nan\n", "index,value\n0\n", "index,value\n0,x\n"],
)
def test_malformed_trajectory(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(FileFormatError):
        load_trajectory(path)


def test_bad_sidecar(tmp_path):
    path = save_trajectory(Trajectory(np.arange(4.0), "motion"), tmp_path / "m.csv")
    sidecar_path(path).write_text("{not json")
    with pytest.raises(FileFormatError):
        load_trajectory(path)


def test_rows_round_trip(tmp_path):
    rows = [{"a": 1, "b": 0.1, "c": "x", "d": True}, {"a": np.int64(2), "b": float("nan"), "c": None, "d": False}]
    path = write_rows(tmp_path / "r.csv", rows, ["a", "b", "c", "d"])
    assert path.read_text().splitlines()[0] == "a,b,c,d"
    back = read_rows(path)
    assert back[0]["b"] == 0.1 and back[0]["c"] == "x" and back[0]["d"] == "true"
    assert back[1]["a"] == 2.0 and math.isnan(back[1]["b"]) and back[1]["c"] == ""


def test_write_json_numpy(tmp_path):
    path = write_json(tmp_path / "x.json", {"i": np.int32(3), "f": np.float64(0.5), "a": np.arange(2)})
    assert json.loads(path.read_text()) == {"a": [0, 1], "f": 0.5, "i": 3}
    with pytest.raises(TypeError):
        write_json(tmp_path / "y.json", {"o": object()})
