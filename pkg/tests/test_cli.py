import json
import subprocess
import sys

import pytest

from icnrsim.cli import EXIT_INVALID, EXIT_IO, EXIT_OK, main, parse_args
from icnrsim.scenario import ALL_LEVELS, IntegrationLevel

SMALL = "vehicle_count = 30\n"


@pytest.fixture
def small_cfg(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL)
    return path


def test_defaults():
    spec = parse_args([])
    assert spec.levels == ALL_LEVELS
    assert (spec.trials, spec.seed, spec.output_format, spec.workers) == (10_000, 42, "all", 1)


def test_level_list_parsing():
    spec = parse_args(["--levels", "signal,traditional,signal"])
    assert spec.levels == (IntegrationLevel.SIGNAL_LEVEL, IntegrationLevel.TRADITIONAL)


def test_all_outputs_written(tmp_path, small_cfg, capsys):
    out = tmp_path / "run"
    code = main(["--config", str(small_cfg), "--trials", "3", "--out", str(out)])
    assert code == EXIT_OK
    names = sorted(p.name for p in out.iterdir())
    assert names == ["radar.svg", "report.csv", "report.json"]
    printed = capsys.readouterr().out.split()
    assert len(printed) == 3
    doc = json.loads((out / "report.json").read_text())
    assert doc["trials"] == 3 and doc["master_seed"] == 42
    assert set(doc["levels"]) == {"traditional", "function", "signal"}


def test_single_format(tmp_path, small_cfg):
    code = main(["--config", str(small_cfg), "--trials", "2", "--format", "csv",
                 "--levels", "traditional", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert [p.name for p in tmp_path.iterdir() if p.suffix != ".cfg"] == ["report.csv"]
    assert len((tmp_path / "report.csv").read_text().splitlines()) == 1 + 7


def test_workers_do_not_change_outputs(tmp_path, small_cfg):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--config", str(small_cfg), "--trials", "5", "--out", str(a)]) == EXIT_OK
    assert main(["--config", str(small_cfg), "--trials", "5", "--out", str(b),
                 "--workers", "2"]) == EXIT_OK
    for name in ("report.csv", "report.json", "radar.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


@pytest.mark.parametrize("argv,needle", [
    (["--trials", "0"], "--trials"),
    (["--trials", "ten"], "--trials"),
    (["--seed", "-1"], "--seed"),
    (["--levels", "quantum"], "--levels"),
    (["--format", "pdf"], "--format"),
    (["--bogus"], "--bogus"),
])
def test_bad_flags_exit_one_and_name_flag(argv, needle, capsys):
    assert main(argv) == EXIT_INVALID
    assert needle in capsys.readouterr().err


def test_invalid_config_exits_one(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("comm_bandwidth_mhz = -5\n")
    assert main(["--config", str(path), "--trials", "1", "--out", str(tmp_path)]) == EXIT_INVALID
    assert "comm_bandwidth_mhz" in capsys.readouterr().err


def test_duplicate_key_exits_one(tmp_path, capsys):
    path = tmp_path / "dup.cfg"
    path.write_text("vehicle_count = 1400\nvehicle_count = 1400\n")
    assert main(["--config", str(path), "--trials", "1", "--out", str(tmp_path)]) == EXIT_INVALID
    assert "line 2" in capsys.readouterr().err


def test_missing_config_exits_two(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "absent.cfg"), "--trials", "1"]) == EXIT_IO
    assert "absent.cfg" in capsys.readouterr().err


def test_unwritable_out_exits_two(tmp_path, small_cfg):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["--config", str(small_cfg), "--trials", "1",
                 "--out", str(blocker / "sub")]) == EXIT_IO


def test_module_entry_point(tmp_path, small_cfg):
    proc = subprocess.run([sys.executable, "-m", "icnrsim", "--config", str(small_cfg),
                           "--trials", "1", "--format", "json", "--out", str(tmp_path)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "report.json").exists()
