import dataclasses
import math

import numpy as np
import pytest

from boussinesq_abcd import spectral as sp
from boussinesq_abcd.initial import gaussian
from boussinesq_abcd.integrator import (
    BlowUpNumeric,
    ConfigInvalid,
    ExitStatus,
    RunConfig,
    Stepper,
    default_dt,
    friedrichs_cutoff,
    m_refinement_study,
    simulate,
    step,
)
from boussinesq_abcd.energy import bound_G
from boussinesq_abcd.model import RhsOperator, WaveState, curl_residual, decompose_initial, preset
from boussinesq_abcd.spectral import GridSpec

G = GridSpec()
BBM = preset("bbm-bbm", 0.1)


def test_cutoff_keeps_band_limited_field():
    f = sp.random_field(G, np.random.default_rng(0), kmax=20)
    assert np.abs(friedrichs_cutoff(G, f, 2 * np.pi * 20 / G.L + 1e-9) - f).max() < 1e-13


def test_cutoff_idempotent_and_commutes_with_derivatives():
    f = sp.random_field(G, np.random.default_rng(1))
    once = friedrichs_cutoff(G, f, 3.0)
    assert np.abs(friedrichs_cutoff(G, once, 3.0) - once).max() < 1e-15
    lhs = friedrichs_cutoff(G, sp.gradient(G, f)[0], 3.0)
    rhs = sp.gradient(G, friedrichs_cutoff(G, f, 3.0))[0]
    assert np.abs(lhs - rhs).max() < 1e-12
    with pytest.raises(ValueError):
        friedrichs_cutoff(G, f, 0.0)


def test_cutoff_is_bitwise_idempotent_on_spectra():
    mask = (G.xi_norm <= 3.0).astype(float)
    fh = G.fft(sp.random_field(G, np.random.default_rng(2)))
    assert np.array_equal(mask * (mask * fh), mask * fh)


@pytest.mark.parametrize(
    "kw",
    [dict(dt=0.0), dict(t_end=0.0), dict(t_end=-1.0), dict(m=100.0), dict(scheme="euler"),
     dict(blow_up_mode="absolute"), dict(blow_up_mode="nope"), dict(output_every=0), dict(r=0.5)],
)
def test_config_validation(kw):
    with pytest.raises(ConfigInvalid):
        RunConfig(BBM, G, **kw)


def test_config_refuses_excluded_params():
    with pytest.raises(ConfigInvalid, match="ExcludedCase"):
        RunConfig(preset("excluded-1", 0.1), G)


def test_default_dt_is_positive_and_capped():
    dt = default_dt(G, BBM, G.dealias_radius)
    assert 0 < dt <= 0.5 * G.dx * (1 + 1e-6)  # BBM group speed peaks at 1 (k = 0)
    kdv = preset("kdv-kdv", 0.1)
    assert default_dt(G, kdv, G.dealias_radius) < 0.5 * G.dx


def test_zero_state_steps_to_zero():
    cfg = RunConfig(BBM, G, dt=0.1)
    out = step(WaveState.zeros(G), cfg)
    assert not out.eta.any() and not out.V.any()
    assert out.t == pytest.approx(0.1)


def test_step_preserves_curl_free_velocity():
    g = GridSpec(n=2, N=64, L=16 * np.pi)
    rng = np.random.default_rng(3)
    Vbar = sp.gradient(g, sp.random_field(g, rng)) + sp.stream_field(g, sp.random_field(g, rng))
    W, V = decompose_initial(g, Vbar)
    st = WaveState(g, sp.random_field(g, rng), V, W=W)
    out = step(st, RunConfig(preset("bona-smith", 0.1), g, dt=0.05))
    assert curl_residual(g, out.V) < 1e-10


def test_rk4_order_on_linear_plane_wave():
    k_idx = 16
    k = 2 * np.pi * k_idx / G.L
    omega = math.sqrt(0.96748185971513034)  # plane-wave oracle at k = 1, eps = 0.1
    A = 1e-8
    st = WaveState(G, A * np.cos(k * G.x[0]), np.zeros((1,) + G.shape))
    T = 10.0
    errs = []
    for dt in (0.1, 0.05, 0.025):
        cfg = RunConfig(BBM, G, dt=dt, t_end=T, blow_up_factor=math.inf, output_every=10**6)
        res = simulate(cfg, st, store_every=10**6)
        # the fundamental's coefficient; the second harmonic carries the O(eps A) nonlinear part
        coef = 2 * res.trajectory.eta_h[-1][k_idx].real / G.N
        errs.append(abs(coef - A * math.cos(omega * T)) / A)
    orders = [math.log2(e0 / e1) for e0, e1 in zip(errs, errs[1:])]
    assert min(orders) >= 3.8


def test_rk2_is_second_order():
    k = 2 * np.pi * 16 / G.L
    st = WaveState(G, 1e-8 * np.cos(k * G.x[0]), np.zeros((1,) + G.shape))
    errs = []
    omega = math.sqrt(0.96748185971513034)
    for dt in (0.1, 0.05):
        cfg = RunConfig(BBM, G, dt=dt, t_end=5.0, scheme="rk2", blow_up_factor=math.inf)
        end = simulate(cfg, st).trajectory.state(-1)
        errs.append(np.abs(end.eta - 1e-8 * np.cos(k * G.x[0]) * np.cos(omega * 5.0)).max())
    assert 1.8 <= math.log2(errs[0] / errs[1]) <= 2.3


def test_zero_initial_data_runs_to_end():
    cfg = RunConfig(BBM, G, t_end=2.0, output_every=3)
    res = simulate(cfg, WaveState.zeros(G))
    assert res.status is ExitStatus.COMPLETED
    assert res.t_final == pytest.approx(2.0)
    assert res.T_exist is None
    assert all(r.Us == 0 and r.Ns == 0 for r in res.reports)


def test_threshold_factor_one_exits_at_zero():
    st = WaveState(G, gaussian(G), np.zeros((1,) + G.shape))
    res = simulate(RunConfig(BBM, G, blow_up_factor=1.0), st)
    assert res.status is ExitStatus.BLOW_UP_THRESHOLD
    assert res.T_exist == 0.0
    assert res.reports[-1].blow_up


def test_threshold_modes():
    st = WaveState(G, gaussian(G), np.zeros((1,) + G.shape))
    res = simulate(RunConfig(BBM, G, blow_up_mode="absolute", blow_up_cap=1e-3, t_end=1.0), st)
    assert res.status is ExitStatus.BLOW_UP_THRESHOLD and res.threshold == 1e-3
    res = simulate(RunConfig(BBM, G, blow_up_mode="G", t_end=0.5), st)
    assert res.threshold == pytest.approx(bound_G(res.Us0))


def test_non_finite_values_raise_with_last_state():
    st = WaveState(G, 1e300 * gaussian(G), np.zeros((1,) + G.shape))
    with np.errstate(all="ignore"):
        with pytest.raises(BlowUpNumeric) as info:
            step(st, RunConfig(BBM, G, dt=0.1))
        assert info.value.last_state is st
        res = simulate(RunConfig(BBM, G, dt=0.1, t_end=1.0, blow_up_factor=math.inf), st)
    assert res.status is ExitStatus.BLOW_UP_NUMERIC
    assert any(e["event"] == "non_finite" for e in res.events)


def test_simulation_is_deterministic():
    rng = np.random.default_rng(4)
    st = WaveState(G, sp.random_field(G, rng), sp.random_field(G, rng, components=1))
    cfg = RunConfig(preset("bona-smith", 0.1), G, t_end=1.0, output_every=2)
    a = [r.csv_row() for r in simulate(cfg, st).reports]
    b = [r.csv_row() for r in simulate(cfg, st).reports]
    assert a == b


def test_states_stay_inside_the_ball():
    m = 4.0
    rng = np.random.default_rng(5)
    st = WaveState(G, sp.random_field(G, rng), sp.random_field(G, rng, components=1))
    res = simulate(RunConfig(BBM, G, m=m, t_end=1.0, output_every=1), st, store_every=1)
    outside = G.xi_norm > m
    for eh, vh in zip(res.trajectory.eta_h, res.trajectory.V_h):
        assert np.all(eh[outside] == 0) and np.all(vh[..., outside] == 0)


def test_mass_and_momentum_are_conserved():
    rng = np.random.default_rng(6)
    st = WaveState(G, sp.random_field(G, rng) + 0.3, sp.random_field(G, rng, components=1) + 0.2)
    T = 2.0
    res = simulate(RunConfig(preset("bona-smith", 0.2), G, dt=0.02, t_end=T, blow_up_factor=math.inf), st)
    end = res.trajectory.state(-1)
    assert abs(np.sum(end.eta) - np.sum(st.eta)) * G.dx / T <= 1e-10
    assert abs(np.sum(end.V) - np.sum(st.V)) * G.dx / T <= 1e-10


def test_linear_flow_is_time_reversible():
    rng = np.random.default_rng(7)
    eta, V = sp.random_field(G, rng), sp.random_field(G, rng, components=1)
    lin = dataclasses.replace(BBM, epsilon=0.0)
    cfg = RunConfig(BBM, G, dt=0.005)
    stepper = Stepper(cfg)
    stepper.op = RhsOperator(G, lin, cutoff=stepper.mask)
    y0 = stepper.project(G.fft(eta), G.fft(V))
    y = y0
    for h in [0.005] * 200 + [-0.005] * 200:
        y = stepper.advance(y, h)
    assert np.abs(G.ifft(y[0] - y0[0])).max() <= 1e-8
    assert np.abs(G.ifft(y[1] - y0[1])).max() <= 1e-8


def test_negative_dt_runs_backwards():
    st = WaveState(G, gaussian(G), np.zeros((1,) + G.shape))
    res = simulate(RunConfig(BBM, G, dt=-0.1, t_end=1.0), st)
    assert res.t_final == pytest.approx(-1.0)


def test_bona_smith_hamiltonian_drift():
    st = WaveState(G, gaussian(G), np.zeros((1,) + G.shape))
    cfg = RunConfig(preset("bona-smith", 0.1), G, dt=0.01, t_end=10.0, output_every=100, blow_up_factor=math.inf)
    ham = [r.hamiltonian for r in simulate(cfg, st).reports]
    assert max(abs(h - ham[0]) for h in ham) / ham[0] <= 1e-6


def test_m_refinement_examples():
    g = GridSpec(N=128, L=16 * np.pi)
    rng = np.random.default_rng(8)
    # near-linear amplitude: the quadratic terms would otherwise feed modes above min(m)
    low = WaveState(g, 1e-6 * sp.random_field(g, rng, kmax=8), np.zeros((1,) + g.shape))
    cfg = RunConfig(BBM, g, t_end=0.5, dt=0.05)
    rows = m_refinement_study(cfg, low, [1.5, 2.5, 4.0])
    assert len(rows) == 2
    assert all(r["distance"] <= 1e-10 for r in rows)
    assert m_refinement_study(cfg, low, [2.0]) == []
    with pytest.raises(ValueError):
        m_refinement_study(cfg, low, [2.0, 1.0])


def test_m_refinement_gaussian_decays():
    g = GridSpec(N=128, L=16 * np.pi)
    st = WaveState(g, gaussian(g, 1.0, 1.0), np.zeros((1,) + g.shape))
    cfg = RunConfig(BBM, g, t_end=0.5, dt=0.05)
    rows = m_refinement_study(cfg, st, [1.0, 2.0, 4.0])
    assert rows[1]["distance"] < rows[0]["distance"]
