"""Acceptance criteria, one test per criterion (PASS/FAIL lines in the terminal summary)."""

import math
import time
import warnings

import numpy as np
import pytest

from boussinesq_abcd import experiments as ex
from boussinesq_abcd import littlewood_paley as lp
from boussinesq_abcd import spectral as sp
from boussinesq_abcd import verification as vf
from boussinesq_abcd.initial import gaussian
from boussinesq_abcd.integrator import RunConfig, simulate
from boussinesq_abcd.model import WaveState, decompose_initial, preset
from boussinesq_abcd.spectral import GridSpec

from .test_model import OMEGA2_ORACLE


def check_map(report):
    return {c["name"]: c for c in report["checks"]}


@pytest.mark.criterion(1, "partition structure on the default grid")
def test_partition_structure(tmp_path, record_property):
    t0 = time.perf_counter()
    reps = ex.verify("partition", tmp_path)
    elapsed = time.perf_counter() - t0
    checks = check_map(reps[0])
    worst = max(checks[n]["measured"] for n in ("sum_equals_one", "disjoint_supports", "squares_between_half_and_one"))
    record_property("sup_err", f"{worst:.1e}")
    record_property("seconds", f"{elapsed:.2f}")
    assert reps[0]["passed"]
    assert worst <= 1e-12
    assert elapsed < 5.0
    assert (tmp_path / "verify_partition.json").exists()


@pytest.mark.criterion(2, "block calculus over 100 random fields")
def test_block_calculus(record_property):
    t0 = time.perf_counter()
    rep = vf.run_suite("blocks", n_fields=100)
    elapsed = time.perf_counter() - t0
    checks = check_map(rep)
    record_property("reconstruction", f"{checks['reconstruction']['measured']:.1e}")
    record_property("cross", f"{checks['almost_orthogonal_products']['measured']:.1e}")
    record_property("seconds", f"{elapsed:.2f}")
    assert checks["reconstruction"]["measured"] <= 1e-12
    assert checks["almost_orthogonal_products"]["measured"] <= 1e-12
    assert elapsed < 10.0


@pytest.mark.criterion(3, "Leray structure and curl preservation on a 2D BBM-BBM run")
def test_leray_and_curl(record_property):
    rep = check_map(vf.run_suite("leray"))
    assert rep["divergence_free"]["measured"] <= 1e-12
    assert rep["idempotent"]["measured"] <= 1e-12

    g = GridSpec(n=2, N=128, L=16 * np.pi)
    rng = np.random.default_rng(11)
    Vbar = sp.gradient(g, 2.0 * sp.random_field(g, rng, decay=3)) + 0.5 * sp.stream_field(g, sp.random_field(g, rng, decay=3))
    W, V0 = decompose_initial(g, Vbar)
    st = WaveState(g, gaussian(g, 1.0, 3.0), V0, W=W)
    cfg = RunConfig(preset("bbm-bbm", 0.05), g, t_end=5.0, output_every=1, blow_up_factor=math.inf)
    res = simulate(cfg, st, store_every=10**9)
    worst = max(r.curl_res for r in res.reports)
    record_property("div_P", f"{rep['divergence_free']['measured']:.1e}")
    record_property("max_curl", f"{worst:.1e}")
    record_property("outputs", len(res.reports))
    assert res.status.value == "completed"
    assert worst <= 1e-8


@pytest.mark.criterion(4, "Hamiltonian conservation and order")
def test_hamiltonian(record_property):
    d1 = vf.hamiltonian_drift(1e-3)
    d2 = vf.hamiltonian_drift(5e-4)
    record_property("drift_1e-3", f"{d1:.2e}")
    record_property("drift_5e-4", f"{d2:.2e}")
    record_property("reduction", f"{d1 / d2:.1f}")
    assert d1 <= 1e-6
    assert d1 / d2 >= 8


@pytest.mark.criterion(5, "linear dispersion, 5 wavenumbers x 3 presets")
def test_dispersion(record_property):
    worst = 0.0
    g = GridSpec()
    for (name, k), w2 in OMEGA2_ORACLE.items():
        k_index = int(round(k * g.L / (2 * np.pi)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            measured = vf.measured_omega2(name, k_index)
        worst = max(worst, abs(measured - w2) / w2)
    record_property("max_rel_err", f"{worst:.1e}")
    assert worst <= 1e-6



@pytest.mark.criterion(6, "localized energy identity for three blocks")
def test_energy_identity(record_property):
    errs = [vf.identity_residual(j, dt=1e-4)["relative_error"] for j in (0, 1, 2)]
    record_property("rel_errs", ",".join(f"{e:.1e}" for e in errs))
    assert max(errs) <= 1e-4


@pytest.mark.criterion(7, "sandwich Us <= Ns <= (1+2eps|eta|)^(1/2) Us on 1000 states")
def test_sandwich(record_property):
    g = GridSpec()
    p = lp.build_partition(g)
    rng = np.random.default_rng(7)
    worst = -math.inf
    for _ in range(1000):
        params = vf.random_admissible_params(rng)
        worst = max(worst, vf.sandwich_violation(p, vf.random_state(g, rng), params, rng.uniform(0.5, 3.0)))
    record_property("max_violation", f"{worst:.1e}")
    assert worst <= 1e-10


@pytest.mark.criterion(8, "commutator constant stable under refinement")
def test_commutator(record_property):
    t0 = time.perf_counter()
    audit = vf.commutator_audit(N_coarse=256, n_pairs=200)
    elapsed = time.perf_counter() - t0
    ratio = audit[512]["commutator"] / audit[256]["commutator"]
    record_property("C_256", f"{audit[256]['commutator']:.3f}")
    record_property("C_512", f"{audit[512]['commutator']:.3f}")
    record_property("seconds", f"{elapsed:.1f}")
    assert ratio <= 2.0
    assert elapsed < 120


SWEEP_DOC = {
    "preset": "bbm-bbm",
    "epsilon_ladder": [0.1, 0.05, 0.025, 0.0125],
    "grid": {"n": 1, "N": 512, "L": 32 * math.pi},
    "initial": {"family": "gaussian", "amplitude": 1.0},
    "blow_up": {"mode": "factor", "factor": 4.0},
    "K": 8,
    "output_every": 200,
}


@pytest.fixture(scope="module")
def sweep_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    t0 = time.perf_counter()
    result = ex.sweep_epsilon(ex.parse_config(SWEEP_DOC), out)
    return out, result, time.perf_counter() - t0


@pytest.mark.criterion(9, "O(1/eps) scaling of the existence time")
def test_scaling(sweep_dir, record_property):
    out, result, elapsed = sweep_dir
    sm = result["summary"]
    record_property("all_censored", sm["all_censored"])
    record_property("ratio", sm["ratio"])
    record_property("seconds", f"{elapsed:.1f}")
    assert all(r["t_end"] == pytest.approx(8 / r["epsilon"]) for r in result["rows"])
    assert sm["all_censored"] or sm["ratio"] <= 2.0
    assert elapsed < 30 * 60


@pytest.mark.criterion(10, "byte-identical energy.csv and scaling.csv on repeat")
def test_determinism(sweep_dir, tmp_path):
    out, _, _ = sweep_dir
    ex.sweep_epsilon(ex.parse_config(SWEEP_DOC), tmp_path / "again", jobs=2)
    assert (out / "scaling.csv").read_bytes() == (tmp_path / "again" / "scaling.csv").read_bytes()
    for run in sorted(out.glob("eps_*/energy.csv")):
        assert run.read_bytes() == (tmp_path / "again" / run.parent.name / "energy.csv").read_bytes()
    cfg = ex.parse_config({**SWEEP_DOC, "t_end": 5.0, "initial": {"family": "random", "velocity": 0.5}, "seed": 9})
    ex.run_to_dir(cfg, tmp_path / "r1")
    ex.run_to_dir(cfg, tmp_path / "r2")
    assert (tmp_path / "r1" / "energy.csv").read_bytes() == (tmp_path / "r2" / "energy.csv").read_bytes()
