"""Recompute the frozen fixtures from scratch (``pytest -m slow``)."""

import importlib.util
import json
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]


def _script():
    spec = importlib.util.spec_from_file_location("make_oracles", ROOT / "scripts" / "make_oracles.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def test_implicit_matches_fixture():
    ref = json.loads((ROOT / "tests" / "fixtures" / "oracles.json").read_text())["forced_scalar_rk4"]
    assert _script().implicit_forced() == pytest.approx(ref["y_implicit"], rel=1e-13)


@pytest.mark.slow
def test_rk4_matches_fixture():
    ref = json.loads((ROOT / "tests" / "fixtures" / "oracles.json").read_text())["forced_scalar_rk4"]
    assert _script().rk4_forced() == pytest.approx(ref["y"], rel=1e-13)
