"""Energy functionals of the dyadic energy method and the existence-time bounds.

All bounds that involve the unquantified constant ``C`` take it as an
argument (default 1); reported values are meaningful only up to that
constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import spectral as sp
from .littlewood_paley import (
    DyadicPartition,
    all_blocks,
    besov_norm,
    block_norms_spectral,
    lr_norm,
)
from .model import AbcdParams, WaveState, curl_residual, sgn


@dataclass
class EnergyReport:
    t: float
    Uj: np.ndarray
    Us: float
    Ns: float
    H: float
    hamiltonian: float | None
    curl_res: float
    eta_sup: float
    blow_up: bool = False
    extra: dict = field(default_factory=dict)

    def csv_row(self) -> list:
        ham = "" if self.hamiltonian is None else repr(float(self.hamiltonian))
        return [
            repr(float(self.t)),
            repr(float(self.Us)),
            repr(float(self.Ns)),
            repr(float(self.H)),
            ham,
            repr(float(self.curl_res)),
            repr(float(self.eta_sup)),
            str(int(self.blow_up)),
        ]


CSV_HEADER = ["t", "Us", "Ns", "H", "hamiltonian", "curl_res", "max_abs_eta", "blow_up"]


def _weights(params: AbcdParams):
    e, a, b, c, d = params.epsilon, params.a, params.b, params.c, params.d
    eta_w = (1.0, e * (b - c), e * e * (-c) * b)
    V_w = (1.0, e * (d - a), e * e * (-a) * d)
    return eta_w, V_w


def _block_sq_spectral(p: DyadicPartition, fh: np.ndarray, order: int) -> np.ndarray:
    """``||grad^order Delta_j f||^2`` for every block (full tensor norms)."""
    g = p.grid
    return block_norms_spectral(p, fh * g.xi_norm**order) ** 2


def _component_block_sq(p: DyadicPartition, eta_h: np.ndarray, V_h: np.ndarray):
    eta_sq = [_block_sq_spectral(p, eta_h, k) for k in range(3)]
    V_sq = [_block_sq_spectral(p, V_h, k) for k in range(3)]
    return eta_sq, V_sq


def block_energies_spectral(p: DyadicPartition, eta_h, V_h, params: AbcdParams) -> np.ndarray:
    eta_w, V_w = _weights(params)
    eta_sq, V_sq = _component_block_sq(p, eta_h, V_h)
    Uj2 = sum(w * q for w, q in zip(eta_w, eta_sq)) + sum(w * q for w, q in zip(V_w, V_sq))
    # indefinite weights (a = c > 0) can make a block negative; report zero there
    return np.sqrt(np.maximum(Uj2, 0.0))


def block_energies(p: DyadicPartition, st: WaveState, params: AbcdParams, s: float | None = None):
    """Block energies ``U_j`` for ``j = -1..j_max`` (independent of ``s``)."""
    g = p.grid
    return block_energies_spectral(p, g.fft(st.eta), g.fft(st.V), params)


def _graded_block_sq(p: DyadicPartition, fh: np.ndarray) -> np.ndarray:
    """``||grad^k Delta_j f||^2`` for ``k = 0, 1, 2`` and every block, shape ``(3, n_blocks)``."""
    g = p.grid
    power = np.abs(fh) ** 2
    if power.ndim > g.n:
        power = power.reshape((-1,) + g.spectral_shape).sum(axis=0)
    power = power.reshape(-1)
    k2 = g.xi_norm2.reshape(-1)
    graded = np.stack([power, k2 * power, k2 * k2 * power])
    return graded @ p.table_sq_flat.T


def us_spectral(p: DyadicPartition, eta_h, V_h, params: AbcdParams, s: float, r: float) -> float:
    """Total energy ``U_s``: weighted sum of squared Besov norms of the six pieces."""
    eta_w, V_w = _weights(params)
    wts = p.weights(s)
    nb_eta = np.sqrt(np.maximum(_graded_block_sq(p, eta_h), 0.0))
    nb_V = np.sqrt(np.maximum(_graded_block_sq(p, V_h), 0.0))
    total = 0.0
    for order in range(3):
        total += eta_w[order] * lr_norm(wts * nb_eta[order], r) ** 2
        total += V_w[order] * lr_norm(wts * nb_V[order], r) ** 2
    return math.sqrt(max(total, 0.0))


def total_energy(p: DyadicPartition, st: WaveState, params: AbcdParams, s: float, r: float = 2) -> float:
    g = p.grid
    return us_spectral(p, g.fft(st.eta), g.fft(st.V), params, s, r)


def modified_block_energies(p: DyadicPartition, st: WaveState, params: AbcdParams) -> np.ndarray:
    """``N_j`` with the ``(1 + eps ||eta||_inf)`` and ``(1 + eps eta + eps ||eta||_inf)`` weights."""
    g = p.grid
    e, a, d = params.epsilon, params.a, params.d
    eta_w, V_w = _weights(params)
    eta_h = g.fft(st.eta)
    V_h = g.fft(st.V)
    eta_sq, V_sq = _component_block_sq(p, eta_h, V_h)
    M = float(np.abs(st.eta).max())
    lift = 1.0 + e * M

    Vj = all_blocks(p, st.V)  # (nb, n, ...)
    Vj_h = g.fft(Vj)
    dVj = g.ifft(1j * g.xi_odd[None, :, None] * Vj_h[:, None])  # (nb, i, k, ...)
    spatial = tuple(range(-g.n, 0))
    eta_V2 = g.cell_volume * np.sum(st.eta * np.sum(Vj**2, axis=1), axis=spatial)
    eta_dV2 = g.cell_volume * np.sum(
        st.eta * np.sum(dVj**2, axis=(1, 2)), axis=spatial
    )

    Nj2 = lift * sum(w * q for w, q in zip(eta_w, eta_sq))
    Nj2 = Nj2 + lift * V_sq[0] + e * eta_V2
    Nj2 = Nj2 + (e * (d - a) + e * e * d * M) * V_sq[1] + e * e * d * eta_dV2
    Nj2 = Nj2 + lift * V_w[2] * V_sq[2]
    return np.sqrt(np.maximum(Nj2, 0.0))


def forcing_norm(p: DyadicPartition, W: np.ndarray, params: AbcdParams, s: float, r: float = 2) -> float:
    """``H = ||W|| + ||grad W|| - sgn(a) sqrt(eps) ||grad^2 W||`` in ``B^s_{2,r}``."""
    g = p.grid
    if not np.any(W):
        return 0.0
    Wh = g.fft(W)
    parts = [lr_norm(p.weights(s) * block_norms_spectral(p, Wh * g.xi_norm**k), r) for k in range(3)]
    return parts[0] + parts[1] - sgn(params.a) * math.sqrt(params.epsilon) * parts[2]


def hamiltonian(st: WaveState, params: AbcdParams) -> float:
    """``int eta^2 + (1 + eps eta) V^2 - eps c (eta_x)^2 - eps a (V_x)^2`` in 1D with ``b = d``."""
    if params.b != params.d:
        raise ValueError("Hamiltonian only defined for b=d")
    g = st.grid
    if g.n != 1:
        raise ValueError("Hamiltonian only defined for n=1")
    if st.has_W:
        raise ValueError("Hamiltonian only defined for W=0")
    e = params.epsilon
    eta, V = st.eta, st.V[0]
    eta_x = sp.gradient(g, eta)[0]
    V_x = sp.gradient(g, V)[0]
    dens = eta**2 + (1 + e * eta) * V**2 - e * params.c * eta_x**2 - e * params.a * V_x**2
    return float(g.cell_volume * np.sum(dens))


def energy_report(
    p: DyadicPartition,
    st: WaveState,
    params: AbcdParams,
    s: float,
    r: float = 2,
    *,
    H: float | None = None,
) -> EnergyReport:
    g = p.grid
    eta_h, V_h = g.fft(st.eta), g.fft(st.V)
    Uj = block_energies_spectral(p, eta_h, V_h, params)
    Us = us_spectral(p, eta_h, V_h, params, s, r)
    Nj = modified_block_energies(p, st, params)
    Ns = lr_norm(p.weights(s) * Nj, r)
    if H is None:
        H = forcing_norm(p, st.W, params, s, r)
    ham = None
    if g.n == 1 and params.b == params.d and not st.has_W:
        ham = hamiltonian(st, params)
    return EnergyReport(
        t=st.t,
        Uj=Uj,
        Us=Us,
        Ns=Ns,
        H=H,
        hamiltonian=ham,
        curl_res=curl_residual(g, st.V),
        eta_sup=float(np.abs(st.eta).max()),
        extra={"Nj": Nj},
    )


# ---------------------------------------------------------------------------
# Localized energy identity
# ---------------------------------------------------------------------------

def _dot(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.sum(A * B, axis=0)


def _jac_times(J: np.ndarray, U: np.ndarray) -> np.ndarray:
    """``(grad V) U`` with ``(grad V)_{ik} = d_i V^k``: result ``i -> d_i V^k U^k``."""
    return np.sum(J * U[None], axis=1)


def block_identity_energy(p: DyadicPartition, st: WaveState, params: AbcdParams, j: int) -> float:
    """``1/2 (||eta_j||^2 + eps b ||grad eta_j||^2 + ||V_j||^2 + eps d ||grad V_j||^2)``."""
    g = p.grid
    e = params.epsilon
    m = p.multiplier(j)
    eta_h = m * g.fft(st.eta)
    V_h = m * g.fft(st.V)
    q = g.spectral_norm2
    val = q(eta_h) + e * params.b * q(g.xi_norm * eta_h)
    val += np.sum(q(V_h)) + e * params.d * np.sum(q(g.xi_norm * V_h))
    return 0.5 * float(val)


def block_identity_terms(p: DyadicPartition, st: WaveState, params: AbcdParams, j: int) -> dict:
    """Assemble every term of the localized L2 energy identity for block ``j``.

    Returns the predicted time derivative of :func:`block_identity_energy`:

    ``- a eps <eta_j, div Lap V_j> - c eps <V_j, grad Lap eta_j>
      - eps <eta eta_j, div V_j> + T1``

    with ``T1 = eps/2 <div V, eta_j^2 + |V_j|^2> + eps <R1j, eta_j> + eps <R2j, V_j>``
    and the commutator remainders evaluated directly.
    """
    g = p.grid
    e, a, c = params.epsilon, params.a, params.c
    ip = lambda f, h: g.cell_volume * float(np.sum(f * h))
    D = lambda f: dyadicize(p, f, j)
    grad = lambda f: sp.gradient(g, f)
    div = lambda V: sp.divergence(g, V)
    lap = lambda f: sp.laplacian(g, f)

    eta, V, W = st.eta, st.V, st.W
    eta_j, V_j = D(eta), D(V)
    grad_eta, grad_eta_j = grad(eta), grad(eta_j)
    div_V, div_V_j = div(V), div(V_j)
    JV, JV_j, JW = sp.jacobian(g, V), sp.jacobian(g, V_j), sp.jacobian(g, W)

    R1 = (_dot(W, grad_eta_j) - D(_dot(W, grad_eta)))
    R1 += _dot(V, grad_eta_j) - D(_dot(V, grad_eta))
    R1 += eta * div_V_j - D(eta * div_V)

    R2 = _jac_times(JV_j, W) - D(_jac_times(JV, W))
    R2 += _jac_times(JV_j, V) - D(_jac_times(JV, V))
    R2 -= 0.5 * grad(D(_dot(W, W)))
    R2 -= D(_jac_times(JW, V))

    T1 = 0.5 * e * ip(div_V, eta_j**2 + _dot(V_j, V_j)) + e * ip(R1, eta_j) + e * ip(R2, V_j)
    dispersive_a = a * e * ip(eta_j, div(lap(V_j)))
    dispersive_c = c * e * ip(V_j, grad(lap(eta_j)))
    cubic = e * ip(eta * eta_j, div_V_j)
    return {
        "T1": T1,
        "dispersive_a": dispersive_a,
        "dispersive_c": dispersive_c,
        "cubic": cubic,
        "predicted": T1 - dispersive_a - dispersive_c - cubic,
    }


def dyadicize(p: DyadicPartition, f: np.ndarray, j: int) -> np.ndarray:
    g = p.grid
    return g.ifft(p.multiplier(j) * g.fft(f))


# ---------------------------------------------------------------------------
# Existence-time bounds
# ---------------------------------------------------------------------------

def bound_F(x: float, H: float, C: float = 1.0) -> float:
    """Lower-bound profile ``F`` for the long-time existence (times ``1/eps``)."""
    x = float(x)
    first = math.inf if H == 0 else math.sqrt(1 + 2 * abs(x)) * x / (C * H * H)
    second = math.log(2) / (C * (1 + H * H) * (1 + 16 * x * x))
    return min(first, second)


def bound_G(x: float) -> float:
    """Uniform norm cap ``G`` valid on the long-time interval."""
    x = float(x)
    root = math.sqrt(1 + 2 * abs(x))
    return max(2 * (root * x + math.log(2) / (1 + 16 * x * x)), 4 * root * x)


def existence_time_lower_bound(Us0: float, H: float, eps: float, C: float = 1.0) -> float:
    """Short-time bound ``ln(1 + 1/U_s(0)) / (sqrt(eps) C max(1, H))``."""
    if not Us0 > 0:
        raise ValueError(f"U_s(0) must be positive, got {Us0}")
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    return math.log1p(1.0 / Us0) / (math.sqrt(eps) * C * max(1.0, H))


def uniform_short_time_bound(Us0: float, H: float, eps: float, T: float, C: float = 1.0) -> float:
    """Cap on ``U_s`` over ``[0, T]`` from the short-time Gronwall argument (inf past the bound)."""
    denom = math.exp(math.log1p(1.0 / Us0) - math.sqrt(eps) * C * max(1.0, H) * T) - 1.0
    return math.inf if denom <= 0 else 1.0 / denom


@dataclass(frozen=True)
class LongTimeBounds:
    T_long: float
    norm_cap: float
    N0_cap: float
    T_gronwall: float


def long_time_bounds(Us0: float, eta0_sup: float, H: float, eps: float, C: float = 1.0) -> LongTimeBounds:
    """``T_long = F(U_s(0)) / eps`` and the norm cap ``G(U_s(0))``.

    ``N0_cap`` is the bound ``(1 + 2 eps ||eta_0||_inf)^(1/2) U_s(0)`` on the
    modified initial energy; ``T_gronwall`` is the explicit lower bound from
    the two-case Gronwall argument evaluated at that cap.
    """
    if not Us0 > 0:
        raise ValueError(f"U_s(0) must be positive, got {Us0}")
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    N0 = math.sqrt(1 + 2 * eps * abs(eta0_sup)) * Us0
    branch_a = math.inf if H == 0 else N0 / (eps * C * H * H)
    branch_b = 0.5 * math.log1p(1.0 / (4 * N0 * N0)) / (eps * C * (1 + H * H))
    return LongTimeBounds(
        T_long=bound_F(Us0, H, C) / eps,
        norm_cap=bound_G(Us0),
        N0_cap=N0,
        T_gronwall=min(branch_a, branch_b),
    )
