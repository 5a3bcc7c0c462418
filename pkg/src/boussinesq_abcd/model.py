"""The abcd Boussinesq family: parameters, states and the evolution operator.

The solver evolves the system with the divergence-free part ``W`` of the
initial velocity split out: ``W`` is constant in time and only the curl-free
remainder ``V`` is advanced, together with the surface deviation ``eta``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import spectral as sp
from .spectral import GridSpec

SUM_TOL = 1e-12


class Classification(str, enum.Enum):
    LONG_TIME = "LongTimeAdmissible"
    GENERIC_2222 = "GenericCase2222"
    EXCLUDED = "ExcludedCase"
    INADMISSIBLE = "Inadmissible"


def sgn(x: float) -> int:
    return (x > 0) - (x < 0)


def _failed_clauses(a, b, c, d) -> list[str]:
    """Clauses of the long-time hypothesis that a quadruple violates."""
    failed = []
    if abs(a + b + c + d - 1.0 / 3.0) > SUM_TOL:
        failed.append(f"sum constraint a+b+c+d=1/3 (got {a + b + c + d:.15g})")
    if a > 0:
        failed.append("a <= 0")
    if c > 0:
        failed.append("c <= 0")
    if b < 0:
        failed.append("b >= 0")
    if d < 0:
        failed.append("d >= 0")
    if not b + d > 0:
        failed.append("b + d > 0")
    if a == 0 and d == 0 and c < 0 and b > 0:
        failed.append("excluded case a=d=0, c<0, b>0")
    if a == 0 and b == 0 and c < 0 and d > 0:
        failed.append("excluded case a=b=0, c<0, d>0")
    return failed


def classify(a: float, b: float, c: float, d: float) -> Classification:
    if abs(a + b + c + d - 1.0 / 3.0) > SUM_TOL:
        return Classification.INADMISSIBLE
    regime_1111 = a <= 0 and c <= 0 and b >= 0 and d >= 0
    excluded = (a == 0 and d == 0 and c < 0 and b > 0) or (a == 0 and b == 0 and c < 0 and d > 0)
    if regime_1111 and b + d > 0:
        return Classification.EXCLUDED if excluded else Classification.LONG_TIME
    if math.isclose(a, c, rel_tol=0.0, abs_tol=SUM_TOL) and a >= 0 and b >= 0 and d >= 0:
        return Classification.GENERIC_2222
    return Classification.INADMISSIBLE


@dataclass(frozen=True)
class AbcdParams:
    a: float
    b: float
    c: float
    d: float
    epsilon: float
    classification: Classification
    diagnostic: str = ""

    @property
    def failed_clauses(self) -> list[str]:
        return _failed_clauses(self.a, self.b, self.c, self.d)

    @property
    def is_kdv_kdv(self) -> bool:
        return self.b == 0 and self.d == 0

    @property
    def evolvable(self) -> bool:
        return self.classification in (Classification.LONG_TIME, Classification.GENERIC_2222)

    def with_epsilon(self, epsilon: float) -> "AbcdParams":
        return validate_params(self.a, self.b, self.c, self.d, epsilon)

    def as_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "d": self.d,
            "epsilon": self.epsilon,
            "classification": self.classification.value,
        }


def validate_params(a: float, b: float, c: float, d: float, epsilon: float) -> AbcdParams:
    """Build and classify a parameter set.

    A quadruple off the ``a+b+c+d = 1/3`` surface is returned as
    ``Inadmissible`` with a diagnostic rather than rejected; ``epsilon``
    outside ``(0, 1]`` and non-finite values raise ``ValueError``.
    """
    vals = [float(v) for v in (a, b, c, d, epsilon)]
    if not all(math.isfinite(v) for v in vals):
        raise ValueError(f"parameters must be finite, got {vals}")
    a, b, c, d, epsilon = vals
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    cls = classify(a, b, c, d)
    diag = ""
    if cls is not Classification.LONG_TIME:
        diag = "; ".join(_failed_clauses(a, b, c, d))
    return AbcdParams(a, b, c, d, epsilon, cls, diag)


PRESETS: dict[str, tuple[float, float, float, float]] = {
    "bbm-bbm": (0.0, 1.0 / 6.0, 0.0, 1.0 / 6.0),
    "kdv-kdv": (1.0 / 6.0, 0.0, 1.0 / 6.0, 0.0),
    # Bona-Smith member with theta^2 = 5/6
    "bona-smith": (0.0, 1.0 / 4.0, -1.0 / 6.0, 1.0 / 4.0),
    "excluded-1": (0.0, 1.0 / 2.0, -1.0 / 6.0, 0.0),
    "excluded-2": (0.0, 0.0, -1.0 / 6.0, 1.0 / 2.0),
}


def preset(name: str, epsilon: float) -> AbcdParams:
    try:
        quad = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return validate_params(*quad, epsilon)


def regularity_indices(p: AbcdParams, s: float) -> tuple[float, float, float]:
    if p.classification is Classification.INADMISSIBLE:
        raise ValueError(f"indices undefined for inadmissible parameters: {p.diagnostic}")
    s1 = s + sgn(p.b) - sgn(p.c)
    s2 = s + sgn(p.d) - sgn(p.a)
    s3 = s + 1 - sgn(p.a)
    return s1, s2, s3


def dispersion_relation(k, p: AbcdParams) -> np.ndarray:
    """Squared frequency of linear plane waves with wave number ``|k|``."""
    k2 = np.asarray(k, dtype=float) ** 2
    e = p.epsilon
    return k2 * (1 - e * p.a * k2) * (1 - e * p.c * k2) / ((1 + e * p.b * k2) * (1 + e * p.d * k2))


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

@dataclass
class WaveState:
    """Surface deviation ``eta``, curl-free velocity ``V`` and the fixed field ``W``."""

    grid: GridSpec
    eta: np.ndarray
    V: np.ndarray
    W: np.ndarray = None
    t: float = 0.0

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=float)
        self.V = np.asarray(self.V, dtype=float)
        self.grid.check_scalar(self.eta)
        self.grid.check_vector(self.V)
        if self.W is None:
            self.W = np.zeros_like(self.V)
        else:
            self.W = np.asarray(self.W, dtype=float)
            self.grid.check_vector(self.W)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "WaveState":
        return cls(grid, np.zeros(grid.shape), np.zeros((grid.n,) + grid.shape))

    @property
    def has_W(self) -> bool:
        return bool(np.any(self.W))


def decompose_initial(grid: GridSpec, Vbar0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split an initial velocity into ``(W, V0)`` with ``W`` its Leray projection."""
    W = sp.leray_project(grid, Vbar0)
    return W, np.asarray(Vbar0, dtype=float) - W


def curl_residual(grid: GridSpec, V: np.ndarray) -> float:
    if grid.n == 1:
        grid.check_vector(V)
        return 0.0
    return sp.norm_l2(grid, sp.curl(grid, V))


# ---------------------------------------------------------------------------
# Evolution operator
# ---------------------------------------------------------------------------

@dataclass
class RhsOperator:
    """Spectral evaluator of ``(d eta/dt, dV/dt)`` for one grid and parameter set.

    Symbols are tabulated once. ``cutoff`` (a boolean spectral mask) is
    applied to the output when given; the Friedrichs scheme passes the ball
    indicator of radius ``m`` here. All quadratic products are dealiased.
    """

    grid: GridSpec
    params: AbcdParams
    W: np.ndarray | None = None
    topography: np.ndarray | None = None
    cutoff: np.ndarray | None = None
    _tables: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        g, p = self.grid, self.params
        if not p.evolvable:
            raise ValueError(
                f"cannot evolve {p.classification.value} parameters: {p.diagnostic}"
            )
        e = p.epsilon
        lap = -g.xi_norm2
        keep = g.dealias_mask.astype(float)
        if self.cutoff is not None:
            keep = keep * self.cutoff
        self._tables = {
            "ik": 1j * g.xi_odd,
            "inv_b": sp.helmholtz_symbol(g, e * p.b),
            "inv_d": sp.helmholtz_symbol(g, e * p.d),
            "lin_a": 1.0 + p.a * e * lap,
            "lin_c": 1.0 + p.c * e * lap,
            "dealias": g.dealias_mask.astype(float),
            "out": keep,
        }
        if self.topography is not None:
            if self.W is not None and np.any(self.W):
                raise ValueError("the topography variant assumes curl-free initial velocity (W = 0)")
            g.check_scalar(self.topography)
            self.topography = np.asarray(self.topography, dtype=float)
        if self.W is not None:
            g.check_vector(self.W)
            self.W = np.asarray(self.W, dtype=float)
            if not np.any(self.W):
                self.W = None

    def __call__(self, eta_h: np.ndarray, V_h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Tendencies from and to rfft coefficients."""
        g, e, T = self.grid, self.params.epsilon, self._tables
        ik = T["ik"]
        eta = g.ifft(eta_h)
        V = g.ifft(V_h)
        depth = eta if self.topography is None else eta - self.topography

        div_V_h = np.sum(ik * V_h, axis=0)
        flux_h = T["dealias"] * g.fft(depth[None] * V)
        transport_h = np.sum(ik * flux_h, axis=0)
        forcing_h = T["lin_a"] * div_V_h + e * transport_h
        Vtot = V
        if self.W is not None:
            grad_eta = g.ifft(ik * eta_h)
            forcing_h = forcing_h + e * T["dealias"] * g.fft(np.sum(self.W * grad_eta, axis=0))
            Vtot = V + self.W
        deta_h = -T["out"] * T["inv_b"] * forcing_h

        kinetic_h = T["dealias"] * g.fft(0.5 * np.sum(Vtot * Vtot, axis=0))
        potential_h = T["lin_c"] * eta_h + e * kinetic_h
        dV_h = -T["out"] * T["inv_d"] * (ik * potential_h)
        return deta_h, dV_h


def rhs(
    state: WaveState,
    params: AbcdParams,
    topography: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, dict]:
    """Physical-space tendencies ``(d eta/dt, dV/dt, metadata)`` of a state."""
    g = state.grid
    op = RhsOperator(g, params, W=state.W if topography is None else None, topography=topography)
    if topography is not None and state.has_W:
        raise ValueError("the topography variant assumes curl-free initial velocity (W = 0)")
    deta_h, dV_h = op(g.fft(state.eta), g.fft(state.V))
    meta = {"linear_demo_only": params.is_kdv_kdv, "classification": params.classification.value}
    return g.ifft(deta_h), g.ifft(dV_h), meta
