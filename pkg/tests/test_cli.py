from __future__ import annotations

import csv
import json
import math
import subprocess
import sys

import pytest

from plattice.cli import main

TINY = {"domain": {"dim": 1, "side": 1}, "p": 2, "nonlinearity": {"q": 4}}
TORUS = {
    "domain": {"dim": 1, "side": 12, "boundary": "torus"},
    "p": 2,
    "potential": {"mode": "periodic", "period": 2, "table": [1.5, 1.0]},
    "nonlinearity": {"q": 4},
    "distinct": {"starts": 5, "period": 2},
}


def config(tmp_path, payload, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload, indent=2))
    return str(path)


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_solve_tiny(tmp_path):
    out = tmp_path / "out"
    assert main(["solve", "--config", config(tmp_path, TINY), "--out", str(out)]) == 0
    res = json.loads((out / "result.json").read_text())
    assert abs(res["result"]["energy"] - 1.0) <= 1e-8
    assert res["config"]["domain"] == TINY["domain"]
    assert rows(out / "u.csv")[0]["x0"] == "0"
    assert list(rows(out / "trace.csv")[0]) == ["iteration", "energy", "residual"]
    assert (out / "trace.gp").exists()


def test_default_out_dir(tmp_path):
    assert main(["solve", "--config", config(tmp_path, TINY)]) == 0
    assert (tmp_path / "run-solve" / "result.json").exists()


def test_solve_hypothesis_failure(tmp_path, capsys):
    bad = {**TINY, "nonlinearity": {"q": 2}}
    assert main(["solve", "--config", config(tmp_path, bad), "--out", str(tmp_path / "o")]) == 1
    assert "monotone" in capsys.readouterr().err


def test_solve_iteration_cap(tmp_path):
    capped = {"domain": {"dim": 2, "side": 8}, "p": 2, "nonlinearity": {"q": 6}, "solver": {"max_iterations": 1}}
    out = tmp_path / "o"
    assert main(["solve", "--config", config(tmp_path, capped), "--out", str(out)]) == 2
    assert len(rows(out / "trace.csv")) == 1
    assert json.loads((out / "result.json").read_text())["result"]["converged"] is False


def test_malformed_config(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"domain": {"dim": 1,\n  "side": 1,}}')
    assert main(["solve", "--config", str(path)]) == 1
    assert "bad.json:2:" in capsys.readouterr().err


def test_override_flag(tmp_path):
    bad = {**TINY, "domain": {"dim": 1, "side": 3}, "nonlinearity": {"q": 2}}
    # override lets the run start; the fibering map then diverges
    assert main(["solve", "--config", config(tmp_path, bad), "--out", str(tmp_path / "o"), "--override-hypotheses"]) == 2


def test_sobolev(tmp_path):
    cfg = {"domain": {"dim": 2, "side": 15}, "p": 1.5, "nonlinearity": {"q": 6}}
    out = tmp_path / "o"
    assert main(["sobolev", "--config", config(tmp_path, cfg), "--out", str(out)]) == 0
    s = json.loads((out / "sobolev.json").read_text())
    assert s["relative_gap"] < 1e-3
    assert max(s["S_nehari"], s["S_direct"]) <= 4 ** (2 / 3)
    assert s["delta_bound"] == pytest.approx(4 ** (2 / 3), rel=1e-14)
    assert (out / "extremal.csv").exists()


def test_sobolev_side_sweep(tmp_path):
    values = []
    for side in (10, 15, 20):
        cfg = {"domain": {"dim": 2, "side": side}, "p": 1.5, "nonlinearity": {"q": 6}, "sobolev": {"starts": 1}}
        out = tmp_path / f"o{side}"
        assert main(["sobolev", "--config", config(tmp_path, cfg), "--out", str(out)]) == 0
        values.append(json.loads((out / "sobolev.json").read_text())["S_nehari"])
    assert values[0] >= values[1] >= values[2]


def test_fiber_tiny(tmp_path):
    cfg = {**TINY, "fiber": {"t": [0.5, 1, math.sqrt(2), 2]}}
    out = tmp_path / "o"
    assert main(["fiber", "--config", config(tmp_path, cfg), "--out", str(out)]) == 0
    r = rows(out / "fiber.csv")
    assert [float(x["psi"]) for x in r] == pytest.approx([0.234375, 0.75, 1.0, 0.0], abs=1e-14)
    assert [x["mark"] for x in r] == ["", "", "t_u", ""]


def test_fiber_default_grid_unimodal(tmp_path):
    cfg = {"domain": {"dim": 2, "side": 8}, "p": 3, "nonlinearity": {"q": 6}}
    out = tmp_path / "o"
    assert main(["fiber", "--config", config(tmp_path, cfg), "--out", str(out)]) == 0
    slopes = [float(x["slope"]) for x in rows(out / "fiber.csv") if x["mark"] != "t_u"]
    changes = sum(1 for a, b in zip(slopes, slopes[1:]) if (a > 0) != (b > 0))
    assert changes == 1
    assert json.loads((out / "fiber.json").read_text())["slope_sign_changes"] == 1


def test_fiber_single_point(tmp_path):
    cfg = {**TINY, "fiber": {"t": [1.0]}}
    out = tmp_path / "o"
    assert main(["fiber", "--config", config(tmp_path, cfg), "--out", str(out)]) == 0
    r = {float(x["t"]): float(x["psi"]) for x in rows(out / "fiber.csv")}
    assert r[1.0] == 0.75


def test_fiber_zero_u(tmp_path):
    (tmp_path / "z.csv").write_text("x0,value\n0,0.0\n")
    cfg = {**TINY, "fiber": {"u": "z.csv"}}
    assert main(["fiber", "--config", config(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 1


@pytest.mark.parametrize("extra,count", [({}, 1), ({"sign_companions": True}, 2), ({"delta": "inf"}, 1)])
def test_distinct(tmp_path, extra, count):
    cfg = {**TORUS, "distinct": {**TORUS["distinct"], **extra}}
    out = tmp_path / "o"
    assert main(["distinct", "--config", config(tmp_path, cfg), "--out", str(out)]) == 0
    orbits = json.loads((out / "orbits" / "orbits.json").read_text())
    assert orbits["orbit_count"] == count
    assert len(list((out / "orbits").glob("u_*.csv"))) == count


def test_distinct_needs_torus(tmp_path):
    assert main(["distinct", "--config", config(tmp_path, TINY), "--out", str(tmp_path / "o")]) == 1


def test_verify_exit_codes(tmp_path):
    good = {"domain": {"dim": 2, "side": 15}, "p": 2, "nonlinearity": {"q": 6}}
    out = tmp_path / "good"
    assert main(["verify", "--config", config(tmp_path, good, "g.json"), "--out", str(out)]) == 0
    assert json.loads((out / "verify.json").read_text())["ok"] is True
    assert (out / "verify.txt").read_text().startswith("check")

    low = {"domain": {"dim": 2, "side": 12}, "p": 1.5, "nonlinearity": {"q": 7}}
    out = tmp_path / "low"
    assert main(["verify", "--config", config(tmp_path, low, "l.json"), "--out", str(out)]) == 0
    statuses = [c["status"] for c in json.loads((out / "verify.json").read_text())["checks"]]
    assert statuses.count("skipped") == 1

    flat = {"domain": {"dim": 1, "side": 5}, "p": 2, "nonlinearity": {"q": 2},
            "verify": {"samples": {"p_inequality": 200, "fs_vs_pF": 200}}}
    assert main(["verify", "--config", config(tmp_path, flat, "f.json"), "--out", str(tmp_path / "f")]) == 3


def test_verify_unknown_check(tmp_path):
    cfg = {**TINY, "verify": {"tolerances": {"nonsense": 1.0}}}
    assert main(["verify", "--config", config(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 1


def test_sweep_side(tmp_path):
    cfg = {"domain": {"dim": 1, "side": 8}, "p": 2, "nonlinearity": {"q": 4}}
    out = tmp_path / "o"
    code = main(["sweep", "--config", config(tmp_path, cfg), "--out", str(out), "--axis", "side", "--values", "8,12,16"])
    assert code == 0
    r = rows(out / "sweep.csv")
    assert list(r[0]) == ["parameter", "b", "S", "iterations", "converged", "error"]
    b = [float(x["b"]) for x in r]
    assert b[0] >= b[1] >= b[2]


def test_sweep_potential_from_config(tmp_path):
    cfg = {"domain": {"dim": 1, "side": 15}, "p": 2, "potential": {"mode": "constant", "value": 0},
           "nonlinearity": {"q": 4}, "sweep": {"axis": "potential.value", "values": [0, 0.5, 1]}}
    out = tmp_path / "o"
    assert main(["sweep", "--config", config(tmp_path, cfg), "--out", str(out)]) == 0
    b = [float(x["b"]) for x in rows(out / "sweep.csv")]
    assert b[0] <= b[1] <= b[2]


def test_sweep_failures_recorded_in_row(tmp_path):
    cfg = {"domain": {"dim": 1, "side": 8}, "p": 2, "nonlinearity": {"q": 4}}
    out = tmp_path / "o"
    code = main(["sweep", "--config", config(tmp_path, cfg), "--out", str(out), "--axis", "q", "--values", "2,4"])
    assert code == 2
    r = rows(out / "sweep.csv")
    assert "HypothesisError" in r[0]["error"] and r[1]["error"] == ""


def test_sweep_empty_axis(tmp_path):
    cfg = {"domain": {"dim": 1, "side": 8}, "p": 2, "nonlinearity": {"q": 4}, "sweep": {"axis": "side", "values": []}}
    assert main(["sweep", "--config", config(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 1


def test_sweep_is_deterministic_with_threads(tmp_path, monkeypatch):
    cfg = {"domain": {"dim": 1, "side": 8}, "p": 2, "nonlinearity": {"q": 4},
           "solver": {"initial_guess": "random"}, "sweep": {"axis": "side", "values": [8, 10, 12, 14]}}
    path = config(tmp_path, cfg)
    assert main(["sweep", "--config", path, "--out", str(tmp_path / "a")]) == 0
    monkeypatch.setenv("PLATTICE_THREADS", "4")
    assert main(["sweep", "--config", path, "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()


def test_all_outputs_byte_identical(tmp_path):
    cfg = {"domain": {"dim": 2, "side": 10}, "p": 3, "nonlinearity": {"q": 6}, "solver": {"initial_guess": "random"}, "seed": 3}
    path = config(tmp_path, cfg)
    for name in ("a", "b"):
        assert main(["solve", "--config", path, "--out", str(tmp_path / name)]) == 0
    for f in ("result.json", "u.csv", "trace.csv", "trace.gp"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_seed_changes_random_start(tmp_path):
    cfg = {"domain": {"dim": 2, "side": 8}, "p": 2, "nonlinearity": {"q": 6}, "solver": {"initial_guess": "random"}}
    path = config(tmp_path, cfg)
    main(["solve", "--config", path, "--out", str(tmp_path / "a"), "--seed", "1"])
    main(["solve", "--config", path, "--out", str(tmp_path / "b"), "--seed", "2"])
    a = json.loads((tmp_path / "a" / "result.json").read_text())
    b = json.loads((tmp_path / "b" / "result.json").read_text())
    assert a["config"]["seed"] == 1 and b["config"]["seed"] == 2
    assert a["trace"][0] != b["trace"][0]


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "plattice.cli", "solve", "--config", config(tmp_path, TINY), "--out", str(tmp_path / "o")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "energy=" in proc.stdout


def test_missing_subcommand():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1
