import csv
import io
from pathlib import Path

import numpy as np
import pytest

from powerdecay.cli import main

ROOT = Path(__file__).resolve().parents[1] / "scenarios"


@pytest.mark.parametrize("verb, file, code", [
    ("run", "minimal.json", 0),
    ("verify", "minimal.json", 0),
    ("verify", "failing/missing_h.json", 2),
    ("run", "failing/linear_g_strict.json", 3),
    ("run", "failing/blowup_large_y0.json", 4),
    ("verify", "failing/blowup_large_y0.json", 4),
])
def test_exit_codes(tmp_path, verb, file, code):
    assert main([verb, str(ROOT / file), "--out", str(tmp_path)]) == code


def test_verify_identity_failure(tmp_path):
    argv = ["verify", str(ROOT / "sym3_diag125.json"), "--t-end", "1e4", "--out", str(tmp_path)]
    assert main(argv) == 5


def test_strict_flag(tmp_path):
    bad = tmp_path / "lin.json"
    bad.write_text((ROOT / "failing" / "linear_g_strict.json").read_text().replace('"strict": true', '"strict": false'))
    # without the check the run goes ahead (short horizon: |y| does not decay here)
    assert main(["run", str(bad), "--t-end", "100", "--out", str(tmp_path / "o")]) == 0
    assert main(["run", str(bad), "--strict", "--out", str(tmp_path / "o")]) == 3


def test_seed_and_rel_tol(tmp_path, capsys):
    argv = ["run", str(ROOT / "sym3_diag125.json"), "--seed", "3", "--rel-tol", "1e-9",
            "--t-end", "1e6", "--out", str(tmp_path)]
    assert main(argv) == 0
    assert "sym3_diag125" in capsys.readouterr().out


def test_batch(tmp_path, capsys):
    assert main(["batch", str(ROOT / "failing"), "--jobs", "2", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "summary.csv").exists()
    assert main(["batch", str(tmp_path / "nope"), "--out", str(tmp_path)]) == 2


def test_oracle_table(capsys):
    assert main(["oracle", str(ROOT / "basic_alpha1.json"), "--t-end", "100"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    t = np.array([float(r["t"]) for r in rows])
    norm = np.array([float(r["norm"]) for r in rows])
    assert t[-1] == 100.0
    np.testing.assert_allclose(norm, 1 / (1 + t), rtol=1e-15)
    assert float(rows[0]["xi_star_norm"]) == 1.0


def test_oracle_rejects_general_system(capsys):
    assert main(["oracle", str(ROOT / "sym3_diag125.json")]) == 3
