"""Nonhomogeneous dyadic partition of unity, dyadic blocks and Besov norms.

The low-frequency profile ``chi`` is a radial smooth step equal to 1 on
``|xi| <= 3/4`` and vanishing for ``|xi| >= 4/3``; the annular profile is
``phi(xi) = chi(xi/2) - chi(xi)``. With this choice the partition
``chi + sum_{j>=0} phi(2^-j .)`` telescopes to ``chi(2^-(J+1) .)``, which is
identically 1 on every resolved mode once ``J`` is large enough.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .spectral import GridMismatch, GridSpec

INNER_RADIUS = 3.0 / 4.0
OUTER_RADIUS = 4.0 / 3.0
ANNULUS = (3.0 / 4.0, 8.0 / 3.0)


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity transition: 1 for ``t <= 0``, 0 for ``t >= 1``."""
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < 1)
    tc = np.where(inside, t, 0.5)
    g_left = np.exp(-1.0 / (1.0 - tc))
    g_right = np.exp(-1.0 / tc)
    mid = g_left / (g_left + g_right)
    return np.where(t <= 0, 1.0, np.where(t >= 1, 0.0, mid))


def chi(r: np.ndarray) -> np.ndarray:
    """Radial low-frequency cutoff evaluated at ``|xi| = r``."""
    return smooth_step((np.asarray(r) - INNER_RADIUS) / (OUTER_RADIUS - INNER_RADIUS))


def phi(r: np.ndarray) -> np.ndarray:
    """Radial annular profile, supported in ``3/4 < |xi| < 8/3``."""
    r = np.asarray(r)
    return chi(r / 2.0) - chi(r)


def block_profile(r: np.ndarray, j: int) -> np.ndarray:
    """Fourier profile of the dyadic block ``j`` at radius ``r``."""
    if j <= -2:
        return np.zeros_like(np.asarray(r, dtype=float))
    if j == -1:
        return chi(r)
    return phi(np.ldexp(np.asarray(r, dtype=float), -j))


def max_block_index(xi_max: float) -> int:
    """Largest ``j`` with ``2^j * 3/4 < xi_max``."""
    j = -1
    while np.ldexp(INNER_RADIUS, j + 1) < xi_max:
        j += 1
    return j


@dataclass(frozen=True)
class DyadicPartition:
    """Tabulated dyadic partition on a grid's spectrum.

    ``table[i]`` holds the multiplier of block ``j = j_min + i`` on the rfft
    layout of ``grid``.
    """

    grid: GridSpec
    j_max: int
    table: np.ndarray = field(repr=False, compare=False)
    j_min: int = -1

    @property
    def js(self) -> np.ndarray:
        return np.arange(self.j_min, self.j_max + 1)

    @property
    def n_blocks(self) -> int:
        return self.j_max - self.j_min + 1

    @property
    def chi_table(self) -> np.ndarray:
        return self.table[0]

    @cached_property
    def table_sq(self) -> np.ndarray:
        return self.table**2

    @cached_property
    def table_sq_flat(self) -> np.ndarray:
        """Squared block multipliers times Hermitian multiplicity and L2 scale, ``(n_blocks, modes)``."""
        g = self.grid
        scale = g.L**g.n / float(g.N) ** (2 * g.n)
        return (scale * g.hermitian_weight * self.table_sq).reshape(self.n_blocks, -1)

    def weights(self, s: float) -> np.ndarray:
        return np.power(2.0, s * self.js)

    def multiplier(self, j: int) -> np.ndarray:
        if j < -2 or j > self.j_max:
            raise ValueError(f"block index {j} outside [-2, {self.j_max}]")
        if j == -2:
            return np.zeros(self.grid.spectral_shape)
        return self.table[j - self.j_min]

    def low_pass_multiplier(self, j: int) -> np.ndarray:
        """Multiplier of ``S_j = sum_{k <= j-1} Delta_k``."""
        if j < -1 or j > self.j_max + 1:
            raise ValueError(f"low-pass index {j} outside [-1, {self.j_max + 1}]")
        if j == -1:
            return np.zeros(self.grid.spectral_shape)
        return np.sum(self.table[: j - self.j_min], axis=0)


def build_partition(grid: GridSpec) -> DyadicPartition:
    """Tabulate ``chi`` and ``phi(2^-j .)`` for ``j = -1..j_max`` on ``grid``.

    ``j_max`` is the largest ``j`` with ``2^j * 3/4`` below the largest
    resolved ``|xi|``, so the blocks reconstruct every mode on the grid.
    """
    j_max = max_block_index(grid.xi_max)
    if j_max < 1:
        raise ValueError(
            f"grid resolves |xi| <= {grid.xi_max:.3g}; need blocks -1, 0, 1 (increase N or L)"
        )
    r = grid.xi_norm
    table = np.array([block_profile(r, j) for j in range(-1, j_max + 1)])
    return DyadicPartition(grid=grid, j_max=j_max, table=table)


# ---------------------------------------------------------------------------
# Block operators
# ---------------------------------------------------------------------------

def _field_spectrum(p: DyadicPartition, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    g = p.grid
    if u.shape[u.ndim - g.n:] != g.shape:
        raise GridMismatch(f"field of shape {u.shape} does not match grid {g.shape}")
    return g.fft(u)


def dyadic_block(p: DyadicPartition, u: np.ndarray, j: int) -> np.ndarray:
    """``Delta_j u``; works componentwise on vector and tensor fields."""
    return p.grid.ifft(p.multiplier(j) * _field_spectrum(p, u))


def low_pass(p: DyadicPartition, u: np.ndarray, j: int) -> np.ndarray:
    """``S_j u = sum_{k <= j-1} Delta_k u``."""
    return p.grid.ifft(p.low_pass_multiplier(j) * _field_spectrum(p, u))


def all_blocks(p: DyadicPartition, u: np.ndarray) -> np.ndarray:
    """Every block at once: shape ``(n_blocks,) + u.shape``."""
    uh = _field_spectrum(p, u)
    extra = uh.ndim - p.grid.n
    tab = p.table.reshape((p.n_blocks,) + (1,) * extra + p.grid.spectral_shape)
    return p.grid.ifft(tab * uh[None])


def block_norms_spectral(p: DyadicPartition, uh: np.ndarray) -> np.ndarray:
    """``||Delta_j u||_{L2}`` for every block from rfft coefficients.

    Leading component axes of ``uh`` are folded into the norm (vector and
    tensor fields use the Euclidean norm of their components).
    """
    g = p.grid
    power = np.abs(uh) ** 2
    if power.ndim > g.n:
        power = power.reshape((-1,) + g.spectral_shape).sum(axis=0)
    scale = g.L**g.n / float(g.N) ** (2 * g.n)
    sq = scale * np.tensordot(p.table_sq, g.hermitian_weight * power, axes=g.n)
    return np.sqrt(np.maximum(sq, 0.0))


def block_norms(p: DyadicPartition, u: np.ndarray) -> np.ndarray:
    return block_norms_spectral(p, _field_spectrum(p, u))


def lr_norm(seq: np.ndarray, r: float) -> float:
    """``l^r`` norm of a finite sequence, ``r = inf`` meaning the supremum."""
    seq = np.abs(np.asarray(seq, dtype=float))
    if not (r >= 1):
        raise ValueError(f"r must lie in [1, inf], got {r}")
    if seq.size == 0:
        return 0.0
    if np.isinf(r):
        return float(seq.max())
    top = seq.max()
    if top == 0:
        return 0.0
    return float(top * np.sum((seq / top) ** r) ** (1.0 / r))


def besov_norm_from_blocks(p: DyadicPartition, norms: np.ndarray, s: float, r: float) -> float:
    return lr_norm(p.weights(s) * norms, r)


def besov_norm(p: DyadicPartition, u: np.ndarray, s: float, r: float = 2) -> float:
    """``||u||_{B^s_{2,r}} = || (2^{js} ||Delta_j u||_{L2})_j ||_{l^r}``."""
    return besov_norm_from_blocks(p, block_norms(p, u), s, r)


def besov_norm_spectral(p: DyadicPartition, uh: np.ndarray, s: float, r: float = 2) -> float:
    return besov_norm_from_blocks(p, block_norms_spectral(p, uh), s, r)


def sobolev_norm(grid: GridSpec, u: np.ndarray, s: float) -> float:
    """``(sum (1 + |xi|^2)^s |u_hat|^2)^(1/2)`` with the box's L2 normalization."""
    uh = grid.fft(np.asarray(u, dtype=float))
    w = (1.0 + grid.xi_norm2) ** s
    total = grid.spectral_norm2(np.sqrt(w) * uh)
    return float(np.sqrt(np.sum(total)))


def sobolev_equivalence_constants(p: DyadicPartition, s: float) -> tuple[float, float]:
    """Brute-force bounds ``c <= ||u||_{B^s_{2,2}} / ||u||_{H^s} <= C`` over the grid's modes."""
    w_besov = np.tensordot(p.weights(s) ** 2, p.table_sq, axes=1)
    ratio = w_besov / (1.0 + p.grid.xi_norm2) ** s
    return float(np.sqrt(ratio.min())), float(np.sqrt(ratio.max()))


# ---------------------------------------------------------------------------
# Inequality audits
# ---------------------------------------------------------------------------

def commutator_blocks(p: DyadicPartition, u: np.ndarray, v: np.ndarray, axis: int = 0) -> np.ndarray:
    """``R_j = Delta_j(u d v) - u Delta_j d v`` for every block ``j``.

    The derivative is along spatial axis ``axis`` (``x_1`` by default).
    Products are pointwise on the grid, so inputs should be band-limited to
    a quarter of the grid for the products to be exact.
    """
    g = p.grid
    g.check_scalar(u)
    g.check_scalar(v)
    vh = g.fft(v)
    dvh = 1j * g.xi_odd[axis] * vh
    dv = g.ifft(dvh)
    prod_h = g.fft(u * dv)
    delta_prod = g.ifft(p.table * prod_h[None])
    delta_dv = g.ifft(p.table * dvh[None])
    return delta_prod - u[None] * delta_dv


def commutator_ratio(
    p: DyadicPartition, u: np.ndarray, v: np.ndarray, s: float, r: float = 2, axis: int = 0
) -> float:
    """Left side over right side of the dyadic commutator estimate.

    Returns ``|| (2^{js} ||R_j||) ||_{l^r} / (||grad u||_{B^{s-1}} ||v||_{B^s})``,
    defined as 0 when the denominator vanishes.
    """
    from .spectral import gradient

    g = p.grid
    grad_u = gradient(g, u)
    rhs = besov_norm(p, grad_u, s - 1, r) * besov_norm(p, v, s, r)
    if rhs == 0:
        return 0.0
    R = commutator_blocks(p, u, v, axis=axis)
    norms = np.sqrt(g.cell_volume * np.sum(R.reshape(p.n_blocks, -1) ** 2, axis=1))
    lhs = lr_norm(p.weights(s) * norms, r)
    return float(lhs / rhs)


def product_ratio(p: DyadicPartition, u: np.ndarray, v: np.ndarray, s: float, r: float = 2) -> float:
    """``||uv||_{B^s}`` over ``||u||_inf ||v||_{B^s} + ||u||_{B^s} ||v||_inf``."""
    rhs = np.abs(u).max() * besov_norm(p, v, s, r) + besov_norm(p, u, s, r) * np.abs(v).max()
    if rhs == 0:
        return 0.0
    return float(besov_norm(p, u * v, s, r) / rhs)
