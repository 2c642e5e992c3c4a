from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plattice import config as cfgmod
from plattice.config import ConfigError
from plattice.domain import build_domain
from plattice.io import atomic_write_text, dumps_json, read_grid_function, write_grid_function

BASE = {"domain": {"dim": 1, "side": 3}, "p": 2, "nonlinearity": {"q": 4}}


def write(tmp_path, text, name="c.json"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_minimal(tmp_path):
    rc = cfgmod.load(write(tmp_path, json.dumps(BASE)))
    assert rc.problem.domain.vertex_count == 3
    assert rc.problem.V.tolist() == [0.0, 0.0, 0.0]
    assert rc.seed == 0 and not rc.solver.override_hypotheses


def test_cli_overrides(tmp_path):
    rc = cfgmod.load(write(tmp_path, json.dumps({**BASE, "seed": 4})), seed=9, override=True)
    assert rc.seed == 9 and rc.solver.seed == 9 and rc.solver.override_hypotheses


def test_unknown_key_is_line_anchored(tmp_path):
    text = '{\n  "domain": {"dim": 1, "side": 3},\n  "p": 2,\n  "nonlinearity": {"q": 4},\n  "colour": 1\n}'
    with pytest.raises(ConfigError, match=r"c\.json:5: .*'colour' was unexpected"):
        cfgmod.load(write(tmp_path, text))


def test_nested_unknown_key(tmp_path):
    text = '{\n  "domain": {"dim": 1, "side": 3},\n  "p": 2,\n  "nonlinearity": {"q": 4},\n  "solver": {\n    "tolerance": 1\n  }\n}'
    with pytest.raises(ConfigError, match=r"c\.json:6: solver"):
        cfgmod.load(write(tmp_path, text))


def test_bad_value_is_line_anchored(tmp_path):
    text = '{\n  "domain": {"dim": 1,\n     "side": 0},\n  "p": 2,\n  "nonlinearity": {"q": 4}\n}'
    with pytest.raises(ConfigError, match=r"c\.json:3: domain\.side"):
        cfgmod.load(write(tmp_path, text))


def test_malformed_json(tmp_path):
    with pytest.raises(ConfigError, match=r"c\.json:2:\d+: malformed JSON"):
        cfgmod.load(write(tmp_path, '{"p": 2,\n "x": }'))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        cfgmod.load(tmp_path / "nope.json")


def test_semantic_errors_become_config_errors(tmp_path):
    raw = {**BASE, "domain": {"dim": 1, "side": 3, "boundary": "torus", "generators": [[1]]}}
    with pytest.raises(ConfigError, match="symmetric"):
        cfgmod.load(write(tmp_path, json.dumps(raw)))


def test_initial_guess_file(tmp_path):
    d = build_domain(1, 3)
    write_grid_function(tmp_path / "g.csv", d, np.array([0.1, 0.2, 0.3]))
    raw = {**BASE, "solver": {"initial_guess": {"file": "g.csv"}}}
    rc = cfgmod.load(write(tmp_path, json.dumps(raw)))
    assert rc.solver.initial_guess.tolist() == [0.1, 0.2, 0.3]


def test_with_value():
    assert cfgmod.with_value(BASE, "side", 8.0)["domain"]["side"] == 8
    assert cfgmod.with_value(BASE, "q", 5)["nonlinearity"]["q"] == 5
    assert BASE["domain"]["side"] == 3
    with pytest.raises(ConfigError):
        cfgmod.with_value(BASE, "side", 8.5)
    with pytest.raises(ConfigError):
        cfgmod.with_value(BASE, "potential.depth", 1)
    with pytest.raises(ConfigError):
        cfgmod.with_value(BASE, "domain", 1)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=6, max_size=6))
def test_grid_csv_round_trip(tmp_path_factory, values):
    d = build_domain(1, 6)
    path = tmp_path_factory.mktemp("csv") / "u.csv"
    u = np.array(values)
    write_grid_function(path, d, u)
    assert np.array_equal(read_grid_function(path, d), u)


def test_grid_csv_layout(tmp_path):
    d = build_domain(2, 2)
    write_grid_function(tmp_path / "u.csv", d, np.array([0.1, 0.2, 0.3, 1 / 3]))
    lines = (tmp_path / "u.csv").read_text().splitlines()
    assert lines[0] == "x0,x1,value"
    assert lines[2] == "0,1,0.2"
    assert lines[4] == "1,1,0.3333333333333333"


def test_grid_csv_missing_rows(tmp_path):
    (tmp_path / "u.csv").write_text("x0,value\n0,1.0\n")
    with pytest.raises(ValueError, match="missing"):
        read_grid_function(tmp_path / "u.csv", build_domain(1, 2))


def test_json_is_sorted_and_finite():
    text = dumps_json({"b": np.float64(1.5), "a": [np.int64(2), float("inf")]})
    assert text.index('"a"') < text.index('"b"')
    assert '"inf"' in text


def test_atomic_write_replaces(tmp_path):
    target = tmp_path / "sub" / "f.txt"
    atomic_write_text(target, "one")
    atomic_write_text(target, "two")
    assert target.read_text() == "two"
    assert [p.name for p in target.parent.iterdir()] == ["f.txt"]
