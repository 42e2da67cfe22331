"""Test output storage and export helpers."""

import os
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from hilbert_asip.utils.export import dumps, write_csv, write_path_csv
from hilbert_asip.utils.storage import (
    MANIFEST_NAME,
    get_latest_run_dir,
    get_output_dir,
    get_run_dir,
)


@pytest.fixture
def _config_teardown():
    """Make sure environment variables are unset after running `test_output_directory`"""
    yield
    for varname in ("XDG_DATA_DIRS", "XDG_DATA_HOME", "HILBERT_ASIP_DIR"):
        if varname in os.environ:
            del os.environ[varname]


@pytest.mark.usefixtures("_config_teardown")
def test_output_directory():
    """Basic tests of directory configuration that shouldn't affect non-temporary files."""
    tempdir = Path(tempfile.gettempdir())

    data_dirs_dir = tempdir / "xdg_data_dirs"
    os.environ["XDG_DATA_DIRS"] = str(data_dirs_dir)
    assert get_output_dir() == data_dirs_dir / "hilbert_asip"

    data_home_dir = tempdir / "xdg_data_home"
    os.environ["XDG_DATA_HOME"] = str(data_home_dir)
    assert get_output_dir() == data_home_dir / "hilbert_asip"

    asip_dir = tempdir / "hilbert_asip_dir"
    os.environ["HILBERT_ASIP_DIR"] = str(asip_dir)
    output_dir = get_output_dir()
    assert output_dir == asip_dir
    assert output_dir.exists()
    assert output_dir.is_dir()


@pytest.mark.skipif(
    os.environ.get("HILBERT_ASIP_TEST_ENV", "").lower() != "true", reason="Not in CI"
)
def test_default_directory_configs():
    """Test default directory in ~/.local/share

    Since this could affects things outside of the immediate code repo, this test
    should mainly run in CI, where we can guarantee a clean user environment.
    """
    expected = Path.home() / ".local" / "share" / "hilbert_asip"
    assert get_output_dir() == expected
    assert expected.is_dir()

    # test again to ensure it's safe if the directory already exists
    assert get_output_dir() == expected


@pytest.mark.usefixtures("_config_teardown")
def test_run_directory(base_data_dir: Path):
    """Test run directory naming under an explicit and the configured base."""
    assert get_run_dir("verify", "far", 1729, base_data_dir) == base_data_dir / "verify_far_1729"
    os.environ["HILBERT_ASIP_DIR"] = str(base_data_dir / "env")
    run_dir = get_run_dir("simulate", "markov", 7)
    assert run_dir == base_data_dir / "env" / "simulate_markov_7"
    assert run_dir.parent.is_dir()
    assert not run_dir.exists()


def test_get_latest_run_dir(base_data_dir: Path):
    """Test lookup of the most recently written run."""
    with pytest.raises(FileNotFoundError):
        get_latest_run_dir(base_data_dir)

    (base_data_dir / "no_manifest").mkdir()
    with pytest.raises(FileNotFoundError):
        get_latest_run_dir(base_data_dir)

    for name in ("verify_far_1", "verify_far_2"):
        (base_data_dir / name).mkdir()
        (base_data_dir / name / MANIFEST_NAME).write_text("{}\n")
    older = base_data_dir / "verify_far_1" / MANIFEST_NAME
    stamp = time.time() - 60
    os.utime(older, (stamp, stamp))
    assert get_latest_run_dir(base_data_dir) == base_data_dir / "verify_far_2"


def test_dumps():
    """Test stable JSON text."""
    text = dumps({"b": np.float64(0.5), "a": np.arange(2), "c": Path("x")})
    assert text == '{\n  "a": [\n    0,\n    1\n  ],\n  "b": 0.5,\n  "c": "x"\n}\n'
    assert dumps({"a": 1, "b": 2}) == dumps({"b": 2, "a": 1})
    with pytest.raises(TypeError, match="not JSON serializable"):
        dumps({"a": object()})


def test_write_csv(tmp_path: Path):
    """Test table and path exports."""
    outfile = write_csv(tmp_path / "table.csv", ("n", "value"), [(1, np.float64(0.5)), (2, float("nan"))])
    assert outfile.read_text().splitlines() == ["n,value", "1,0.5", "2,"]

    path = np.array([[0.0, 1.0, 2.0], [3.0, 4.0, 5.0]])
    lines = write_path_csv(tmp_path / "path.csv", path).read_text().splitlines()
    assert lines == ["t,c1,c2,c3", "0,0.0,1.0,2.0", "1,3.0,4.0,5.0"]
