import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boussinesq_abcd import cli
from boussinesq_abcd import experiments as ex
from boussinesq_abcd.initial import make_initial, topography
from boussinesq_abcd.integrator import ConfigInvalid
from boussinesq_abcd.model import Classification, WaveState, validate_params
from boussinesq_abcd.snapshot import load_state, read_snapshot, write_snapshot
from boussinesq_abcd.spectral import GridSpec

SMALL = {"grid": {"n": 1, "N": 64, "L": 16 * math.pi}, "output_every": 5}


def small_cfg(**kw):
    return ex.parse_config({**SMALL, **kw})


def test_parse_defaults_and_quadruple():
    cfg = ex.parse_config({})
    assert cfg.preset_name == "bbm-bbm" and cfg.K == 8.0
    assert cfg.epsilon_ladder == (0.1, 0.05, 0.025, 0.0125)
    cfg = ex.parse_config({"params": {"a": -1 / 6, "b": 1 / 6, "c": -1 / 6, "d": 1 / 2}})
    assert cfg.params().classification is Classification.LONG_TIME
    assert ex.parse_config({"topography": "flat"}).topography is None


@pytest.mark.parametrize(
    "doc",
    [
        {"bogus": 1},
        {"preset": "bbm-bbm", "params": {"a": 0, "b": 0, "c": 0, "d": 1 / 3}},
        {"preset": "nope"},
        {"params": {"a": 0}},
        {"epsilon_ladder": [0.1, 0.2]},
        {"epsilon_ladder": [2.0, 0.1]},
        {"grid": {"N": 100}},
        {"initial": {"shape": "box"}},
        {"preset": "excluded-1"},
        {"dt": 0},
    ],
)
def test_parse_rejects(doc):
    with pytest.raises((ConfigInvalid, ValueError)):
        ex.parse_config(doc)


def test_config_round_trip():
    cfg = small_cfg(preset="bona-smith", seeds=[3, 4], initial={"family": "random", "velocity": 0.5})
    assert ex.parse_config(ex.config_to_doc(cfg)) == cfg


def test_initial_families():
    g = GridSpec(N=64, L=16 * math.pi)
    for fam in ("gaussian", "random", "single-mode", "zero"):
        s = make_initial(g, fam, velocity=0.5, seed=1)
        assert s.eta.shape == g.shape
    assert not make_initial(g, "zero").eta.any()
    with pytest.raises(ValueError):
        make_initial(g, "square")
    g2 = GridSpec(n=2, N=32, L=8 * math.pi)
    s = make_initial(g2, "random", velocity=1.0, seed=2)
    assert s.has_W
    assert topography(g, "flat") is None
    with pytest.raises(ValueError):
        topography(g, "canyon")


def test_sweep_refuses_excluded_case(tmp_path):
    with pytest.raises(ConfigInvalid, match="a=d=0, c<0, b>0"):
        ex.sweep_epsilon(small_cfg(preset="excluded-1"), tmp_path)
    with pytest.raises(ConfigInvalid, match="b \\+ d > 0"):
        ex.sweep_epsilon(small_cfg(preset="kdv-kdv"), tmp_path)


@settings(max_examples=200, deadline=None)
@given(a=st.floats(-1, 1), b=st.floats(-1, 1), c=st.floats(-1, 1))
def test_refusal_names_a_failed_clause(a, b, c):
    p = validate_params(a, b, c, 1 / 3 - a - b - c, 0.1)
    if p.classification is Classification.LONG_TIME:
        ex.refuse_unless_admissible(p)
        return
    with pytest.raises(ConfigInvalid) as info:
        ex.refuse_unless_admissible(p)
    assert any(clause in str(info.value) for clause in p.failed_clauses)


def test_zero_amplitude_sweep_is_censored(tmp_path):
    cfg = small_cfg(K=0.5, initial={"amplitude": 0.0}, epsilon_ladder=[0.1, 0.05])
    out = ex.sweep_epsilon(cfg, tmp_path)
    assert all(r["censored"] and math.isinf(r["T_exist"]) for r in out["rows"])
    assert out["summary"]["all_censored"]
    rows = (tmp_path / "scaling.csv").read_text().splitlines()
    assert rows[0].split(",") == ex.SCALING_HEADER
    assert all(line.split(",")[3] == "inf" for line in rows[1:])


def test_uncensored_rows_report_finite_times(tmp_path):
    cfg = small_cfg(K=2.0, epsilon_ladder=[0.2, 0.1], blow_up={"mode": "absolute", "cap": 1e-3})
    out = ex.sweep_epsilon(cfg, tmp_path)
    for r in out["rows"]:
        assert not r["censored"] and math.isfinite(r["T_exist"])
    assert out["summary"]["ratio"] >= 1


def test_sweep_is_deterministic_across_jobs(tmp_path):
    cfg = small_cfg(K=0.5, epsilon_ladder=[0.2, 0.1], seeds=[0, 1], initial={"family": "random", "amplitude": 1.0})
    ex.sweep_epsilon(cfg, tmp_path / "a", jobs=1)
    ex.sweep_epsilon(cfg, tmp_path / "b", jobs=2)
    assert (tmp_path / "a" / "scaling.csv").read_bytes() == (tmp_path / "b" / "scaling.csv").read_bytes()
    run = "eps_0.1_seed_1/energy.csv"
    assert (tmp_path / "a" / run).read_bytes() == (tmp_path / "b" / run).read_bytes()


def test_snapshot_round_trip(tmp_path):
    g = GridSpec(n=2, N=16, L=2 * math.pi)
    s = make_initial(g, "random", velocity=1.0, seed=3)
    s.t = 1.25
    path = write_snapshot(tmp_path / "s.bin", s, validate_params(0, 1 / 6, 0, 1 / 6, 0.1))
    header, arrays = read_snapshot(path)
    assert header["t"] == 1.25 and header["params"]["b"] == 1 / 6
    assert [f["name"] for f in header["fields"]] == ["eta", "V", "W"]
    back = load_state(path)
    assert np.array_equal(back.eta, s.eta) and np.array_equal(back.V, s.V) and np.array_equal(back.W, s.W)
    raw = path.read_bytes()
    assert raw[raw.index(b"\n") + 1:][:8] == np.asarray(s.eta, "<f8").tobytes()[:8]
    (tmp_path / "t.bin").write_bytes(raw[:-8])
    with pytest.raises(ValueError, match="truncated"):
        read_snapshot(tmp_path / "t.bin")


def test_besov_of_zero_snapshot(tmp_path):
    g = GridSpec(N=64, L=16 * math.pi)
    path = write_snapshot(tmp_path / "z.bin", WaveState.zeros(g))
    assert ex.besov(path, 1.5, 2) == {"eta": 0.0, "V": 0.0, "W": 0.0}


def test_report(tmp_path):
    with pytest.raises(FileNotFoundError, match="no runs found"):
        ex.report(tmp_path)
    ex.run_to_dir(small_cfg(t_end=1.0), tmp_path / "r")
    csv_path = ex.report(tmp_path)
    text = csv_path.read_text()
    assert "completed" in text
    assert (tmp_path / "summary.html").exists()


def test_cli_run_is_byte_reproducible(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({**SMALL, "t_end": 1.0, "snapshot_every": 4, "initial": {"family": "random"}}))
    for d in ("a", "b"):
        assert cli.main(["--quiet", "run", "--config", str(cfg), "--out", str(tmp_path / d)]) == 0
    a, b = tmp_path / "a", tmp_path / "b"
    assert (a / "energy.csv").read_bytes() == (b / "energy.csv").read_bytes()
    assert (a / "events.jsonl").read_bytes() == (b / "events.jsonl").read_bytes()
    snaps = sorted(p.name for p in a.glob("snapshot_t*.bin"))
    assert snaps[0] == "snapshot_t0.000000.bin" and len(snaps) >= 2
    events = [json.loads(line) for line in (a / "events.jsonl").read_text().splitlines()]
    assert events[-1]["event"] == "exit" and events[-1]["status"] == "completed"


def test_cli_errors(tmp_path, capsys):
    assert cli.main(["report", str(tmp_path)]) == 2
    assert "no runs found" in capsys.readouterr().err
    assert cli.main(["run", "--preset", "excluded-2", "--out", str(tmp_path / "x")]) == 2
    with pytest.raises(SystemExit):
        cli.main(["verify", "nonsense"])
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["run", "--config", str(bad), "--out", str(tmp_path / "y")]) == 2


def test_cli_verify_partition(tmp_path):
    assert cli.main(["--quiet", "verify", "partition", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "verify_partition.json").read_text())
    assert rep["passed"] and all(c["measured"] <= 1e-12 for c in rep["checks"])


def test_cli_besov(tmp_path, capsys):
    g = GridSpec(N=64, L=16 * math.pi)
    path = write_snapshot(tmp_path / "z.bin", WaveState.zeros(g))
    assert cli.main(["besov", str(path), "1.0", "inf"]) == 0
    assert json.loads(capsys.readouterr().out) == {"eta": 0.0, "V": 0.0, "W": 0.0}


def test_topography_run(tmp_path):
    cfg = small_cfg(t_end=0.5, topography={"name": "bump", "height": 0.1, "width": 4.0})
    res = ex.run_to_dir(cfg, tmp_path)
    assert res.status.value == "completed"
