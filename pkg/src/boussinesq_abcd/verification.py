"""Invariant suites behind ``abcd verify``.

Each suite returns a JSON-ready dict ``{"suite", "passed", "seconds",
"checks"}`` where every check records the measured quantity next to the
tolerance it is held to.
"""

from __future__ import annotations

import dataclasses
import math
import time

import numpy as np

from . import energy as en
from . import littlewood_paley as lp
from . import spectral as sp
from .initial import gaussian
from .integrator import RunConfig, Stepper, simulate
from .model import (
    Classification,
    RhsOperator,
    WaveState,
    curl_residual,
    decompose_initial,
    preset,
    validate_params,
)
from .spectral import GridSpec

SUITES = ("partition", "blocks", "leray", "energy", "commutator", "conservation")


def _check(name, measured, tol, *, op="<=", detail=None) -> dict:
    measured = float(measured)
    passed = measured <= tol if op == "<=" else measured >= tol
    out = {"name": name, "passed": bool(passed), "measured": measured, "tolerance": tol, "op": op}
    if detail is not None:
        out["detail"] = detail
    return out


def _suite(name, fn, **kw) -> dict:
    t0 = time.perf_counter()
    checks = fn(**kw)
    return {
        "suite": name,
        "passed": all(c["passed"] for c in checks),
        "seconds": round(time.perf_counter() - t0, 3),
        "checks": checks,
    }


# ---------------------------------------------------------------------------
# partition
# ---------------------------------------------------------------------------

def _partition_checks(grid: GridSpec | None = None, n_random: int = 500, seed: int = 0) -> list:
    grid = grid or GridSpec()
    p = lp.build_partition(grid)
    tab = p.table
    checks = [
        _check("sum_equals_one", np.abs(tab.sum(axis=0) - 1.0).max(), 1e-12),
    ]
    overlap = 0.0
    for i in range(p.n_blocks):
        for k in range(i + 2, p.n_blocks):
            overlap = max(overlap, float(np.abs(tab[i] * tab[k]).max()))
    checks.append(_check("disjoint_supports", overlap, 1e-12, detail="max |phi_j phi_j'| over |j-j'|>=2"))
    sq = p.table_sq.sum(axis=0)
    violation = max(0.0, 0.5 - float(sq.min()), float(sq.max()) - 1.0)
    checks.append(_check("squares_between_half_and_one", violation, 1e-12,
                         detail={"min": float(sq.min()), "max": float(sq.max())}))

    rng = np.random.default_rng(seed)
    radii = rng.uniform(0.0, grid.xi_max, n_random)
    total = sum(lp.block_profile(radii, j) for j in range(-1, p.j_max + 1))
    checks.append(_check("sum_equals_one_random_xi", np.abs(total - 1.0).max(), 1e-12))

    checks.append(_check("chi_at_zero", abs(float(lp.chi(0.0)) - 1.0), 0.0))
    outside = np.concatenate([np.linspace(4 / 3 + 1e-9, 10, 200)])
    checks.append(_check("chi_support", np.abs(lp.chi(outside)).max(), 0.0))
    r = np.linspace(0, 6, 6001)
    out_ann = (r <= 3 / 4) | (r >= 8 / 3)
    checks.append(_check("phi_support", np.abs(lp.phi(r[out_ann])).max(), 0.0))
    return checks


# ---------------------------------------------------------------------------
# blocks
# ---------------------------------------------------------------------------

def _block_checks(grid: GridSpec | None = None, n_fields: int = 100, seed: int = 1) -> list:
    grid = grid or GridSpec()
    p = lp.build_partition(grid)
    rng = np.random.default_rng(seed)
    recon, cross, low, ortho_lo, ortho_hi, mono = 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    pairs = [(j, k) for j in p.js for k in p.js if abs(j - k) >= 2]
    for _ in range(n_fields):
        u = sp.random_field(grid, rng, decay=rng.uniform(0.5, 3.0))
        nu = sp.norm_l2(grid, u)
        blocks = lp.all_blocks(p, u)
        recon = max(recon, sp.norm_l2(grid, u - blocks.sum(axis=0)) / nu)
        for j, k in pairs:
            cross = max(cross, sp.norm_l2(grid, lp.dyadic_block(p, blocks[j - p.j_min], k)) / nu)
        low = max(low, sp.norm_l2(grid, u - lp.low_pass(p, u, p.j_max + 1)) / nu)
        bn2 = np.sum(lp.block_norms(p, u) ** 2)
        ortho_lo = max(ortho_lo, 0.5 * nu**2 - bn2)
        ortho_hi = max(ortho_hi, bn2 - nu**2)
        s = rng.uniform(-1, 3)
        b1, b2, binf = (lp.besov_norm(p, u, s, r) for r in (1, 2, math.inf))
        mono = max(mono, (b2 - b1) / b1, (binf - b2) / b2)
    return [
        _check("reconstruction", recon, 1e-12, detail="||u - sum_j Delta_j u|| / ||u||"),
        _check("almost_orthogonal_products", cross, 1e-12, detail="||Delta_k Delta_j u|| / ||u||, |j-k|>=2"),
        _check("low_pass_top_is_identity", low, 1e-12),
        _check("sum_block_norms_lower", ortho_lo, 1e-10, detail="||u||^2/2 - sum ||Delta_j u||^2"),
        _check("sum_block_norms_upper", ortho_hi, 1e-10, detail="sum ||Delta_j u||^2 - ||u||^2"),
        _check("besov_r_monotone", mono, 1e-12),
    ]


# ---------------------------------------------------------------------------
# leray
# ---------------------------------------------------------------------------

def _leray_checks(n_fields: int = 100, seed: int = 2) -> list:
    g2 = GridSpec(n=2, N=32, L=2 * np.pi)
    rng = np.random.default_rng(seed)
    div_err, idem, grad_kill, fixed = 0.0, 0.0, 0.0, 0.0
    for _ in range(n_fields):
        V = sp.random_field(g2, rng, components=2, kmax=g2.N // 2)
        P = sp.leray_project(g2, V)
        div_err = max(div_err, sp.norm_l2(g2, sp.divergence(g2, P)))
        idem = max(idem, sp.norm_l2(g2, sp.leray_project(g2, P) - P))
        f = sp.random_field(g2, rng)
        grad_kill = max(grad_kill, sp.norm_l2(g2, sp.leray_project(g2, sp.gradient(g2, f))))
        S = sp.stream_field(g2, sp.random_field(g2, rng))
        fixed = max(fixed, sp.norm_l2(g2, sp.leray_project(g2, S) - S))
    g1 = GridSpec()
    V1 = (3.0 + np.cos(2 * np.pi * g1.x[0] / g1.L))[None]
    mean_err = np.abs(sp.leray_project(g1, V1) - 3.0).max()
    return [
        _check("divergence_free", div_err, 1e-12),
        _check("idempotent", idem, 1e-12),
        _check("gradients_annihilated", grad_kill, 1e-12),
        _check("stream_fields_fixed", fixed, 1e-12),
        _check("one_d_mean_extraction", mean_err, 1e-12),
    ]


# ---------------------------------------------------------------------------
# energy
# ---------------------------------------------------------------------------

def random_admissible_params(rng: np.random.Generator, epsilon: float | None = None):
    """Random ``LongTimeAdmissible`` quadruple on the ``a+b+c+d = 1/3`` surface."""
    while True:
        a = -rng.uniform(0, 0.3) * (rng.random() < 0.6)
        c = -rng.uniform(0, 0.3) * (rng.random() < 0.6)
        share = rng.uniform(0, 1)
        rest = 1.0 / 3.0 - a - c
        b, d = share * rest, (1 - share) * rest
        eps = rng.uniform(0.01, 1.0) if epsilon is None else epsilon
        p = validate_params(a, b, c, d, eps)
        if p.classification is Classification.LONG_TIME:
            return p


def random_state(grid: GridSpec, rng: np.random.Generator, amplitude: float | None = None) -> WaveState:
    amp = rng.uniform(0.1, 3.0) if amplitude is None else amplitude
    eta = amp * sp.random_field(grid, rng, decay=rng.uniform(1.0, 3.0))
    V = rng.uniform(0.1, 2.0) * sp.random_field(grid, rng, components=grid.n)
    V = V - sp.leray_project(grid, V) if grid.n == 2 else V
    return WaveState(grid, eta, V)


def sandwich_violation(p: lp.DyadicPartition, st: WaveState, params, s: float, r: float = 2) -> float:
    """Largest relative violation of ``Us <= Ns <= (1 + 2 eps |eta|_inf)^(1/2) Us``."""
    rep = en.energy_report(p, st, params, s, r)
    upper = math.sqrt(1 + 2 * params.epsilon * rep.eta_sup) * rep.Us
    scale = max(rep.Us, 1e-300)
    return max(rep.Us - rep.Ns, rep.Ns - upper) / scale


def lr_equivalence_ratio(p: lp.DyadicPartition, st: WaveState, params, s: float, r: float) -> float:
    """``||(2^{js} U_j)||_{l^r} / U_s`` at index ``r``."""
    Uj = en.block_energies(p, st, params)
    return lp.lr_norm(p.weights(s) * Uj, r) / en.total_energy(p, st, params, s, r)


def identity_residual(j: int, *, dt: float = 1e-4, eps: float = 0.1, t_warm: float = 1.0,
                      grid: GridSpec | None = None, preset_name: str = "bbm-bbm") -> dict:
    """Centered difference of the block energy against the assembled identity terms."""
    grid = grid or GridSpec()
    params = preset(preset_name, eps)
    p = lp.build_partition(grid)
    eta = gaussian(grid, 1.0, 2.0)
    V = 0.5 * gaussian(grid, 1.0, 3.0, center=grid.L / 2 + 2.0)[None]
    cfg = RunConfig(params, grid, t_end=t_warm, dt=0.01, blow_up_factor=math.inf, output_every=10**9)
    st = simulate(cfg, WaveState(grid, eta, V)).trajectory.state(-1)
    stepper = Stepper(cfg)
    y = stepper.project(grid.fft(st.eta), grid.fft(st.V))
    E = []
    for h in (-dt, dt):
        e_h, v_h = stepper.advance(y, h)
        E.append(en.block_identity_energy(p, WaveState(grid, grid.ifft(e_h), grid.ifft(v_h)), params, j))
    fd = (E[1] - E[0]) / (2 * dt)
    terms = en.block_identity_terms(p, st, params, j)
    rel = abs(fd - terms["predicted"]) / max(abs(fd), abs(terms["predicted"]), 1e-300)
    return {"j": j, "finite_difference": fd, "predicted": terms["predicted"], "relative_error": rel}


def _energy_checks(n_states: int = 1000, seed: int = 3, identity_blocks=(0, 1, 2)) -> list:
    grid = GridSpec(N=256)
    p = lp.build_partition(grid)
    rng = np.random.default_rng(seed)
    sandwich, exact2, lo, hi = -math.inf, 0.0, math.inf, 0.0
    for i in range(n_states):
        params = random_admissible_params(rng)
        st = random_state(grid, rng)
        s = rng.uniform(0.5, 3.0)
        sandwich = max(sandwich, sandwich_violation(p, st, params, s))
        if i % 10 == 0:
            exact2 = max(exact2, abs(lr_equivalence_ratio(p, st, params, s, 2) - 1.0))
            for r in (1, math.inf):
                q = lr_equivalence_ratio(p, st, params, s, r)
                lo, hi = min(lo, q), max(hi, q)
    checks = [
        _check("sandwich", sandwich, 1e-10, detail=f"{n_states} random states"),
        _check("r2_exactness", exact2, 1e-10),
        _check("r1_rinf_lower", lo, 1 / math.sqrt(6), op=">="),
        _check("r1_rinf_upper", hi, math.sqrt(6)),
    ]
    zero = WaveState.zeros(grid)
    checks.append(_check("zero_state_energy", np.abs(en.block_energies(p, zero, preset("bbm-bbm", 0.1))).max(), 0.0))
    checks.append(_check("short_time_bound_example",
                         abs(en.existence_time_lower_bound(1.0, 1.0, 0.01, 1.0) - math.log(2) / 0.1), 1e-12))
    checks.append(_check("G_at_zero", abs(en.bound_G(0.0) - 2 * math.log(2)), 1e-12))
    for j in identity_blocks:
        res = identity_residual(j)
        checks.append(_check(f"block_identity_j{j}", res["relative_error"], 1e-4, detail=res))
    return checks


# ---------------------------------------------------------------------------
# commutator
# ---------------------------------------------------------------------------

def commutator_audit(N_coarse: int = 256, n_pairs: int = 200, s: float = 1.5, r: float = 2,
                     seed: int = 4, L: float = 32 * np.pi) -> dict:
    """Worst commutator and product ratios over random pairs at ``N`` and ``2N``."""
    out = {}
    for N in (N_coarse, 2 * N_coarse):
        g = GridSpec(N=N, L=L)
        p = lp.build_partition(g)
        rng = np.random.default_rng(seed)
        comm, prod = 0.0, 0.0
        for _ in range(n_pairs):
            decay = rng.uniform(1.0, 3.0)
            u = sp.random_field(g, rng, decay=decay, kmax=N // 4)
            v = sp.random_field(g, rng, decay=decay, kmax=N // 4)
            comm = max(comm, lp.commutator_ratio(p, u, v, s, r))
            prod = max(prod, lp.product_ratio(p, u, v, s, r))
        out[N] = {"commutator": comm, "product": prod}
    return out


def _commutator_checks(n_pairs: int = 200, N_coarse: int = 256) -> list:
    audit = commutator_audit(N_coarse=N_coarse, n_pairs=n_pairs)
    c, f = audit[N_coarse], audit[2 * N_coarse]
    g = GridSpec(N=N_coarse)
    p = lp.build_partition(g)
    v = sp.random_field(g, np.random.default_rng(0))
    return [
        _check("commutator_constant_stable", f["commutator"] / c["commutator"], 2.0,
               detail={"coarse": c["commutator"], "fine": f["commutator"]}),
        _check("product_constant_stable", f["product"] / c["product"], 2.0,
               detail={"coarse": c["product"], "fine": f["product"]}),
        _check("constant_u_gives_zero", lp.commutator_ratio(p, np.full(g.shape, 2.0), v, 1.5), 0.0),
        _check("zero_v_gives_zero", lp.commutator_ratio(p, v, np.zeros(g.shape), 1.5), 0.0),
    ]


# ---------------------------------------------------------------------------
# conservation
# ---------------------------------------------------------------------------

def hamiltonian_drift(dt: float, t_end: float = 10.0, sigma: float = 0.5, eps: float = 0.1,
                      grid: GridSpec | None = None, preset_name: str = "bbm-bbm") -> float:
    """Largest relative deviation of the Hamiltonian along a Gaussian run."""
    grid = grid or GridSpec()
    params = preset(preset_name, eps)
    st = WaveState(grid, gaussian(grid, 1.0, sigma), np.zeros((1,) + grid.shape))
    n_out = max(1, int(round(1.0 / dt)))
    cfg = RunConfig(params, grid, dt=dt, t_end=t_end, blow_up_factor=math.inf, output_every=n_out)
    res = simulate(cfg, st, store_every=10**12)
    ham = np.array([rep.hamiltonian for rep in res.reports])
    return float(np.abs(ham - ham[0]).max() / abs(ham[0]))


def _conservation_checks(t_end: float = 1.0) -> list:
    grid = GridSpec()
    checks = []
    d1, d2 = hamiltonian_drift(2e-3, t_end), hamiltonian_drift(1e-3, t_end)
    checks.append(_check("hamiltonian_drift", d2, 1e-6, detail={"dt=2e-3": d1, "dt=1e-3": d2}))

    params = preset("bona-smith", 0.1)
    rng = np.random.default_rng(5)
    eta = sp.random_field(grid, rng, decay=3)
    V = sp.random_field(grid, rng, decay=3, components=1)
    cfg = RunConfig(params, grid, dt=0.01, t_end=t_end, blow_up_factor=math.inf, output_every=10)
    res = simulate(cfg, WaveState(grid, eta, V))
    mass = [grid.cell_volume * np.sum(res.trajectory.state(i).eta) for i in range(len(res.trajectory))]
    vmass = [grid.cell_volume * np.sum(res.trajectory.state(i).V) for i in range(len(res.trajectory))]
    checks.append(_check("mass_drift_per_unit_time", np.abs(np.array(mass) - mass[0]).max() / t_end, 1e-10))
    checks.append(_check("velocity_mean_drift_per_unit_time", np.abs(np.array(vmass) - vmass[0]).max() / t_end, 1e-10))

    # epsilon = 0: the linear flow conserves ||eta||^2 + ||V||^2 and is time reversible
    lin = dataclasses.replace(params, epsilon=0.0)
    op = RhsOperator(grid, lin)
    eh, vh = grid.fft(eta), grid.fft(V)
    de, dv = op(eh, vh)
    rate = 2 * (sp.inner_product_l2(grid, eta, grid.ifft(de)) + sp.inner_product_l2(grid, V, grid.ifft(dv)))
    checks.append(_check("linear_energy_rate", abs(rate), 1e-10))
    h = 0.005
    cfg_lin = RunConfig(params, grid, dt=h, t_end=t_end, blow_up_factor=math.inf)
    stepper = Stepper(cfg_lin)
    stepper.op = op
    y = stepper.project(eh, vh)
    y0 = y
    n = int(round(t_end / h))
    for _ in range(n):
        y = stepper.advance(y, h)
    for _ in range(n):
        y = stepper.advance(y, -h)
    back = max(np.abs(grid.ifft(y[0] - y0[0])).max(), np.abs(grid.ifft(y[1] - y0[1])).max())
    checks.append(_check("linear_time_reversal", back, 1e-8))

    # 2D curl preservation with a nonzero divergence-free part
    g2 = GridSpec(n=2, N=64, L=16 * np.pi)
    rng = np.random.default_rng(6)
    Vbar = sp.gradient(g2, sp.random_field(g2, rng, decay=3)) + 0.3 * sp.stream_field(g2, sp.random_field(g2, rng, decay=3))
    W, V0 = decompose_initial(g2, Vbar)
    st2 = WaveState(g2, 0.5 * sp.random_field(g2, rng, decay=3), V0, W=W)
    cfg2 = RunConfig(preset("bbm-bbm", 0.05), g2, t_end=t_end, blow_up_factor=math.inf, output_every=1)
    res2 = simulate(cfg2, st2)
    checks.append(_check("curl_preserved_2d", max(rep.curl_res for rep in res2.reports), 1e-8))
    checks.append(_check("initial_curl_free_2d", curl_residual(g2, V0), 1e-10))
    return checks


_RUNNERS = {
    "partition": _partition_checks,
    "blocks": _block_checks,
    "leray": _leray_checks,
    "energy": _energy_checks,
    "commutator": _commutator_checks,
    "conservation": _conservation_checks,
}


def run_suite(name: str, **kw) -> dict:
    if name not in _RUNNERS:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES + ('all',)}")
    return _suite(name, _RUNNERS[name], **kw)


def measured_omega2(preset_name: str, k_index: int, eps: float = 0.1, amplitude: float = 1e-8,
                    steps: int = 400, grid: GridSpec | None = None) -> float:
    """Squared frequency of a tiny single-mode run from the three-term recurrence.

    A standing wave ``eta_k(t) = A cos(omega t)`` satisfies
    ``eta(t + h) + eta(t - h) = 2 cos(omega h) eta(t)``; ``cos(omega h)`` is
    fitted by least squares over the stored samples.
    """
    grid = grid or GridSpec()
    params = preset(preset_name, eps)
    k = 2 * np.pi * k_index / grid.L
    h = 0.05 / max(k, 1.0)
    eta = amplitude * np.cos(k * grid.x[0])
    cfg = RunConfig(params, grid, dt=h, t_end=steps * h, blow_up_factor=math.inf, output_every=steps)
    res = simulate(cfg, WaveState(grid, eta, np.zeros((1,) + grid.shape)), store_every=1)
    x = np.array([e[k_index].real for e in res.trajectory.eta_h])
    mid = x[1:-1]
    cos_wh = np.dot(mid, x[2:] + x[:-2]) / (2 * np.dot(mid, mid))
    return float((np.arccos(cos_wh) / h) ** 2)
