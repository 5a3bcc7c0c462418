"""Time stepping of the Friedrichs-truncated abcd system.

The spatial discretization is the Galerkin truncation itself: the state
lives on the modes ``|xi| <= m`` and every tendency is cut back to that
ball. Stepping is explicit Runge-Kutta on the rfft coefficients.
"""

from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import energy as en
from .littlewood_paley import DyadicPartition, build_partition
from .model import AbcdParams, RhsOperator, WaveState, dispersion_relation
from .spectral import GridSpec

log = logging.getLogger(__name__)


class ConfigInvalid(ValueError):
    pass


class BlowUpNumeric(FloatingPointError):
    """Non-finite values appeared; ``last_state`` is the last finite state."""

    def __init__(self, message: str, last_state: WaveState | None = None):
        super().__init__(message)
        self.last_state = last_state


class ExitStatus(str, enum.Enum):
    COMPLETED = "completed"
    BLOW_UP_THRESHOLD = "blow_up_threshold"
    BLOW_UP_NUMERIC = "blow_up_numeric"


@dataclass(frozen=True)
class RunConfig:
    params: AbcdParams
    grid: GridSpec = field(default_factory=GridSpec)
    s: float | None = None
    r: float = 2
    m: float | None = None
    dt: float | None = None
    t_end: float = 1.0
    scheme: str = "rk4"
    blow_up_factor: float = 4.0
    blow_up_mode: str = "factor"
    blow_up_cap: float | None = None
    output_every: int = 10
    snapshot_every: int | None = None
    seed: int = 0
    constant_C: float = 1.0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigInvalid(f"unknown scheme {self.scheme!r}; choose from {sorted(SCHEMES)}")
        if not self.t_end > 0:
            raise ConfigInvalid(f"t_end must be positive, got {self.t_end}")
        if self.dt is not None and self.dt == 0:
            raise ConfigInvalid("dt must be nonzero")
        if self.m is not None and not 0 < self.m <= self.grid.dealias_radius + 1e-12:
            raise ConfigInvalid(
                f"cutoff m={self.m} must lie in (0, {self.grid.dealias_radius:.6g}] (dealiased band)"
            )
        if self.blow_up_mode not in ("factor", "G", "absolute"):
            raise ConfigInvalid(f"unknown blow-up mode {self.blow_up_mode!r}")
        if self.blow_up_mode == "absolute" and self.blow_up_cap is None:
            raise ConfigInvalid("absolute blow-up mode needs blow_up_cap")
        if self.output_every < 1:
            raise ConfigInvalid("output_every must be >= 1")
        if not self.params.evolvable:
            raise ConfigInvalid(
                f"parameters are {self.params.classification.value}: {self.params.diagnostic}"
            )
        if self.r < 1:
            raise ConfigInvalid(f"r must lie in [1, inf], got {self.r}")

    @property
    def cutoff(self) -> float:
        return self.grid.dealias_radius if self.m is None else self.m

    @property
    def sobolev_index(self) -> float:
        return self.grid.n / 2 + 1.5 if self.s is None else self.s

    @property
    def time_step(self) -> float:
        return default_dt(self.grid, self.params, self.cutoff) if self.dt is None else self.dt


def default_dt(grid: GridSpec, params: AbcdParams, m: float) -> float:
    """``0.5 dx / c_max`` with the RK4 stability cap ``1 / omega_max``.

    ``c_max`` is the largest group speed of the linear dispersion relation
    on ``|xi| <= m``; the cap keeps ``omega dt`` well inside the RK4
    stability interval for bounded but large dispersive frequencies.
    """
    k = np.linspace(0.0, m, 4001)
    omega = np.sqrt(np.maximum(dispersion_relation(k, params), 0.0))
    group = np.abs(np.gradient(omega, k))
    c_max = max(float(group.max()), 1e-300)
    omega_max = float(omega.max())
    dt = 0.5 * grid.dx / c_max
    if omega_max > 0:
        dt = min(dt, 1.0 / omega_max)
    return dt


def friedrichs_mask(grid: GridSpec, m: float) -> np.ndarray:
    return (grid.xi_norm <= m).astype(float)


def friedrichs_cutoff(grid: GridSpec, f: np.ndarray, m: float) -> np.ndarray:
    """Sharp indicator of the ball ``|xi| <= m`` applied to a field."""
    if not m > 0:
        raise ValueError(f"cutoff radius must be positive, got {m}")
    return grid.ifft(friedrichs_mask(grid, m) * grid.fft(np.asarray(f, dtype=float)))


# ---------------------------------------------------------------------------
# Runge-Kutta schemes on (eta_h, V_h)
# ---------------------------------------------------------------------------

def _rk4(f, y, dt):
    e0, v0 = y
    k1 = f(e0, v0)
    k2 = f(e0 + 0.5 * dt * k1[0], v0 + 0.5 * dt * k1[1])
    k3 = f(e0 + 0.5 * dt * k2[0], v0 + 0.5 * dt * k2[1])
    k4 = f(e0 + dt * k3[0], v0 + dt * k3[1])
    return (
        e0 + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        v0 + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
    )


def _rk2(f, y, dt):
    # Heun's method
    e0, v0 = y
    k1 = f(e0, v0)
    k2 = f(e0 + dt * k1[0], v0 + dt * k1[1])
    return e0 + 0.5 * dt * (k1[0] + k2[0]), v0 + 0.5 * dt * (k1[1] + k2[1])


SCHEMES = {"rk4": _rk4, "rk2": _rk2}


class Stepper:
    """Advance spectral states of the cutoff system for a fixed configuration."""

    def __init__(self, config: RunConfig, W: np.ndarray | None = None, topography=None):
        self.config = config
        g = config.grid
        self.mask = friedrichs_mask(g, config.cutoff)
        if W is not None:
            W = g.ifft(self.mask * g.fft(W))
        self.W = W
        self.op = RhsOperator(g, config.params, W=W, topography=topography, cutoff=self.mask)
        self._scheme = SCHEMES[config.scheme]

    def project(self, eta_h, V_h):
        return self.mask * eta_h, self.mask * V_h

    def advance(self, y, dt):
        return self._scheme(self.op, y, dt)


def step(state: WaveState, config: RunConfig, dt: float | None = None, topography=None) -> WaveState:
    """One explicit step of the cutoff system from a physical-space state."""
    g = config.grid
    stepper = Stepper(config, W=state.W, topography=topography)
    y = stepper.project(g.fft(state.eta), g.fft(state.V))
    dt = config.time_step if dt is None else dt
    e_h, v_h = stepper.advance(y, dt)
    if not (np.all(np.isfinite(e_h)) and np.all(np.isfinite(v_h))):
        raise BlowUpNumeric(f"non-finite values at t={state.t + dt}", last_state=state)
    return WaveState(g, g.ifft(e_h), g.ifft(v_h), W=state.W, t=state.t + dt)


# ---------------------------------------------------------------------------
# Simulation driver
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Stored outputs of a run: times and spectral coefficients."""

    grid: GridSpec
    W: np.ndarray
    times: list = field(default_factory=list)
    eta_h: list = field(default_factory=list)
    V_h: list = field(default_factory=list)

    def append(self, t, eta_h, V_h):
        self.times.append(t)
        self.eta_h.append(eta_h.copy())
        self.V_h.append(V_h.copy())

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> WaveState:
        g = self.grid
        return WaveState(g, g.ifft(self.eta_h[i]), g.ifft(self.V_h[i]), W=self.W, t=self.times[i])


@dataclass
class SimulationResult:
    trajectory: Trajectory
    reports: list
    status: ExitStatus
    t_final: float
    T_exist: float | None
    Us0: float
    threshold: float
    events: list
    metadata: dict


def blow_up_threshold(config: RunConfig, Us0: float) -> float:
    if config.blow_up_mode == "factor":
        return config.blow_up_factor * Us0
    if config.blow_up_mode == "G":
        return en.bound_G(Us0)
    return float(config.blow_up_cap)


def simulate(
    config: RunConfig,
    initial: WaveState,
    *,
    topography: np.ndarray | None = None,
    store_every: int | None = None,
    on_report=None,
    on_snapshot=None,
    partition: DyadicPartition | None = None,
) -> SimulationResult:
    """Integrate the cutoff system from ``initial`` to ``config.t_end``.

    Stops early when ``U_s`` reaches the blow-up threshold (first crossing
    time reported as ``T_exist``) or when values stop being finite. An
    :class:`~boussinesq_abcd.energy.EnergyReport` is produced every
    ``output_every`` steps and at the final time. ``store_every`` keeps
    spectral states in the returned trajectory (default: at every report).
    """
    g = config.grid
    if initial.grid != g:
        raise ConfigInvalid("initial state lives on a different grid")
    params = config.params
    s, r = config.sobolev_index, config.r
    p = partition or build_partition(g)
    stepper = Stepper(config, W=initial.W if initial.has_W else None, topography=topography)
    W = stepper.W if stepper.W is not None else np.zeros_like(initial.V)
    y = stepper.project(g.fft(initial.eta), g.fft(initial.V))

    H = en.forcing_norm(p, W, params, s, r)
    Us0 = en.us_spectral(p, y[0], y[1], params, s, r)
    threshold = blow_up_threshold(config, Us0)
    n_steps = max(1, int(math.ceil(config.t_end / abs(config.time_step) - 1e-9)))
    dt = math.copysign(config.t_end / n_steps, config.time_step)
    store_every = config.output_every if store_every is None else store_every

    traj = Trajectory(g, W)
    reports, events = [], []
    metadata = {
        "dt": dt,
        "n_steps": n_steps,
        "m": config.cutoff,
        "s": s,
        "r": r,
        "H": H,
        "Us0": Us0,
        "threshold": threshold,
        "linear_demo_only": params.is_kdv_kdv,
    }
    if params.is_kdv_kdv:
        warnings.warn("KdV-KdV parameters (b=d=0): explicit stepping is meant for linear demos only",
                      RuntimeWarning, stacklevel=2)

    def make_state(t, yy):
        return WaveState(g, g.ifft(yy[0]), g.ifft(yy[1]), W=W, t=t)

    def emit(i, t, yy, crossed=False):
        st = make_state(t, yy)
        rep = en.energy_report(p, st, params, s, r, H=H)
        rep.blow_up = crossed
        reports.append(rep)
        if on_report is not None:
            on_report(rep)

    def crossed(us):
        return Us0 > 0 and us >= threshold

    status, T_exist, t = ExitStatus.COMPLETED, None, 0.0
    emit(0, 0.0, y, crossed(Us0))
    traj.append(0.0, *y)
    if on_snapshot is not None:
        on_snapshot(make_state(0.0, y))
    if crossed(Us0):
        status, T_exist = ExitStatus.BLOW_UP_THRESHOLD, 0.0
        events.append({"event": "threshold_crossing", "t": 0.0, "Us": Us0, "threshold": threshold})
    else:
        for i in range(1, n_steps + 1):
            y_new = stepper.advance(y, dt)
            t_new = i * dt
            if not (np.all(np.isfinite(y_new[0])) and np.all(np.isfinite(y_new[1]))):
                status = ExitStatus.BLOW_UP_NUMERIC
                events.append({"event": "non_finite", "t": t_new, "last_valid_t": t})
                break
            y, t = y_new, t_new
            us = en.us_spectral(p, y[0], y[1], params, s, r)
            hit = crossed(us)
            if hit or i % config.output_every == 0 or i == n_steps:
                emit(i, t, y, hit)
            if hit or i % store_every == 0 or i == n_steps:
                traj.append(t, *y)
            if on_snapshot is not None and config.snapshot_every and i % config.snapshot_every == 0:
                on_snapshot(make_state(t, y))
            if hit:
                status, T_exist = ExitStatus.BLOW_UP_THRESHOLD, t
                events.append({"event": "threshold_crossing", "t": t, "Us": us, "threshold": threshold})
                break
    events.append({"event": "exit", "status": status.value, "t": t, "T_exist": T_exist})
    return SimulationResult(traj, reports, status, t, T_exist, Us0, threshold, events, metadata)


def m_refinement_study(config: RunConfig, initial: WaveState, m_list) -> list[dict]:
    """L2 distances at ``t_end`` between runs at successive cutoffs ``m``."""
    m_list = list(m_list)
    if any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ValueError("m_list must be increasing")
    g = config.grid
    finals = []
    for m in m_list:
        cfg = replace(config, m=m, blow_up_factor=math.inf)
        res = simulate(cfg, initial, store_every=10**12)
        finals.append(res.trajectory.state(-1))
    rows = []
    for (m0, a), (m1, b) in zip(zip(m_list, finals), zip(m_list[1:], finals[1:])):
        diff = np.sum((a.eta - b.eta) ** 2) + np.sum((a.V - b.V) ** 2)
        rows.append({"m_coarse": m0, "m_fine": m1, "distance": float(np.sqrt(g.cell_volume * diff))})
    dists = [row["distance"] for row in rows]
    if any(d1 > d0 for d0, d1 in zip(dists, dists[1:])):
        warnings.warn("m-refinement distances are not monotonically decreasing", RuntimeWarning, stacklevel=2)
    return rows
