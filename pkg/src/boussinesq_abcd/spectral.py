"""Periodic-grid spectral machinery.

Fields are plain real numpy arrays. A scalar field on an ``n``-dimensional
grid has shape ``(N,) * n``; a vector field has shape ``(n,) + (N,) * n``.
Spectral coefficients use the ``rfftn`` layout over the trailing ``n`` axes.

Every operator here is diagonal in Fourier space. The Nyquist row of each
axis is zeroed in odd-order multipliers so that derivatives of real fields
stay real.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np

Symbol = Union[np.ndarray, Callable[[np.ndarray], np.ndarray], float, complex]


class GridMismatch(ValueError):
    """Raised when a field's shape does not belong to the grid in use."""


@dataclass(frozen=True)
class GridSpec:
    """Periodic box ``[0, L)^n`` sampled with ``N`` points per axis.

    Derived tables (wavevectors, masks, quadrature weights) are computed
    lazily and cached; the dataclass itself is immutable and hashable, so a
    grid can be shared between threads or shipped to worker processes.
    """

    n: int = 1
    N: int = 512
    L: float = 32 * np.pi

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got n={self.n}")
        if self.N < 8 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two >= 8, got N={self.N}")
        if not self.L > 0:
            raise ValueError(f"box length must be positive, got L={self.L}")

    # -- shapes -----------------------------------------------------------
    @property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    @property
    def spectral_shape(self) -> tuple:
        return (self.N,) * (self.n - 1) + (self.N // 2 + 1,)

    @property
    def axes(self) -> tuple:
        return tuple(range(-self.n, 0))

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def cell_volume(self) -> float:
        return self.dx**self.n

    @property
    def mode_count(self) -> int:
        return self.N**self.n

    @cached_property
    def x(self) -> np.ndarray:
        """Coordinate arrays, shape ``(n,) + shape``."""
        x1 = np.arange(self.N) * self.dx
        return np.array(np.meshgrid(*([x1] * self.n), indexing="ij"))

    # -- wavevector tables ------------------------------------------------
    @cached_property
    def integer_modes(self) -> np.ndarray:
        """Integer wave numbers ``k`` per axis, shape ``(n,) + spectral_shape``."""
        full = np.fft.fftfreq(self.N, d=1.0 / self.N)
        half = np.fft.rfftfreq(self.N, d=1.0 / self.N)
        axes1d = [full] * (self.n - 1) + [half]
        return np.array(np.meshgrid(*axes1d, indexing="ij"))

    @cached_property
    def xi(self) -> np.ndarray:
        """Wavevectors ``2 pi k / L``, shape ``(n,) + spectral_shape``."""
        return 2 * np.pi / self.L * self.integer_modes

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """Per-axis boolean mask, True on that axis' Nyquist row."""
        return np.abs(self.integer_modes) == self.N // 2

    @cached_property
    def xi_odd(self) -> np.ndarray:
        """Wavevectors with Nyquist rows zeroed, for odd-order symbols."""
        return np.where(self.nyquist_mask, 0.0, self.xi)

    @cached_property
    def xi_norm2(self) -> np.ndarray:
        return np.sum(self.xi**2, axis=0)

    @cached_property
    def xi_norm(self) -> np.ndarray:
        return np.sqrt(self.xi_norm2)

    @property
    def xi_max(self) -> float:
        """Largest resolved ``|xi|`` on the grid (a corner in 2D)."""
        return float(self.xi_norm.max())

    @cached_property
    def dealias_cutoff(self) -> int:
        """Largest integer mode kept by the two-thirds rule."""
        return self.N // 3

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        return np.all(np.abs(self.integer_modes) <= self.dealias_cutoff, axis=0)

    @property
    def dealias_radius(self) -> float:
        """Radius of the largest ball contained in the dealiased square."""
        return 2 * np.pi / self.L * self.dealias_cutoff

    @cached_property
    def hermitian_weight(self) -> np.ndarray:
        """Multiplicity of each stored rfft coefficient in the full spectrum."""
        k_last = np.abs(self.integer_modes[-1])
        w = np.where((k_last == 0) | (k_last == self.N // 2), 1.0, 2.0)
        return w

    @cached_property
    def leray(self) -> np.ndarray:
        return leray_symbol(self)

    # -- transforms -------------------------------------------------------
    def check_scalar(self, f: np.ndarray) -> None:
        if np.shape(f) != self.shape:
            raise GridMismatch(f"scalar field of shape {np.shape(f)} does not match grid {self.shape}")

    def check_vector(self, V: np.ndarray) -> None:
        if np.shape(V) != (self.n,) + self.shape:
            raise GridMismatch(
                f"vector field of shape {np.shape(V)} does not match grid {(self.n,) + self.shape}"
            )

    def check_spectral(self, fh: np.ndarray) -> None:
        if np.shape(fh)[-self.n:] != self.spectral_shape:
            raise GridMismatch(f"spectral array of shape {np.shape(fh)} does not match grid")

    def fft(self, f: np.ndarray) -> np.ndarray:
        """Forward transform over the trailing spatial axes (leading axes batched)."""
        if self.n == 1:
            return np.fft.rfft(f, axis=-1)
        return np.fft.rfftn(f, axes=self.axes)

    def ifft(self, fh: np.ndarray) -> np.ndarray:
        if self.n == 1:
            return np.fft.irfft(fh, n=self.N, axis=-1)
        return np.fft.irfftn(fh, s=self.shape, axes=self.axes)

    def spectral_norm2(self, fh: np.ndarray) -> np.ndarray:
        """Squared L2 norm from rfft coefficients, summed over any leading component axes.

        Returns an array over whatever leading axes are not spatial, reduced
        only across the trailing spectral axes.
        """
        scale = self.L**self.n / float(self.N) ** (2 * self.n)
        return scale * np.sum(self.hermitian_weight * np.abs(fh) ** 2, axis=self.axes)

    # -- diagnostics ------------------------------------------------------
    def boundary_wrap_excess(self, f: np.ndarray) -> float:
        """Ratio of the largest edge value to the global max of ``|f|``."""
        a = np.abs(np.asarray(f))
        peak = a.max()
        if peak == 0:
            return 0.0
        edge = max(np.take(a, 0, axis=ax).max() for ax in range(-self.n, 0))
        return float(edge / peak)

    def warn_if_wrapping(self, f: np.ndarray, name: str = "field", tol: float = 1e-8) -> bool:
        """Warn when a localized profile has not decayed at the box edge."""
        excess = self.boundary_wrap_excess(f)
        if excess > tol:
            warnings.warn(
                f"{name} reaches {excess:.2e} of its peak at the box edge; "
                "periodic images may interact",
                RuntimeWarning,
                stacklevel=2,
            )
            return True
        return False


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------

def _resolve_symbol(grid: GridSpec, symbol: Symbol) -> np.ndarray:
    if callable(symbol):
        symbol = symbol(grid.xi)
    sym = np.asarray(symbol)
    if sym.ndim and sym.shape[-grid.n:] != grid.spectral_shape:
        raise GridMismatch(f"symbol of shape {sym.shape} does not match grid spectrum {grid.spectral_shape}")
    if not np.all(np.isfinite(sym)):
        raise ValueError("multiplier symbol has non-finite values")
    return sym


def apply_multiplier(grid: GridSpec, field: np.ndarray, symbol: Symbol) -> np.ndarray:
    """Scale every Fourier coefficient of ``field`` by ``symbol(xi)``.

    ``symbol`` is an array on the rfft spectrum or a callable receiving the
    wavevector table ``grid.xi`` of shape ``(n,) + spectral_shape``. Works on
    scalar and vector fields alike (the multiplier acts componentwise).
    """
    field = np.asarray(field, dtype=float)
    if field.shape == grid.shape:
        pass
    elif field.shape == (grid.n,) + grid.shape:
        pass
    else:
        raise GridMismatch(f"field of shape {field.shape} does not match grid {grid.shape}")
    sym = _resolve_symbol(grid, symbol)
    return grid.ifft(sym * grid.fft(field))


def gradient(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    grid.check_scalar(f)
    return grid.ifft(1j * grid.xi_odd * grid.fft(f))


def divergence(grid: GridSpec, V: np.ndarray) -> np.ndarray:
    grid.check_vector(V)
    return grid.ifft(np.sum(1j * grid.xi_odd * grid.fft(V), axis=0))


def laplacian(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    """Laplacian with the full symbol ``-|xi|^2`` (Nyquist kept: the symbol is even)."""
    f = np.asarray(f, dtype=float)
    if f.shape not in (grid.shape, (grid.n,) + grid.shape):
        raise GridMismatch(f"field of shape {f.shape} does not match grid {grid.shape}")
    return grid.ifft(-grid.xi_norm2 * grid.fft(f))


def hessian(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    """Second derivatives ``d_i d_j f``, shape ``(n, n) + shape``."""
    grid.check_scalar(f)
    fh = grid.fft(f)
    k = grid.xi_odd
    return grid.ifft(-k[:, None] * k[None, :] * fh)


def jacobian(grid: GridSpec, V: np.ndarray) -> np.ndarray:
    """``(grad V)_{ij} = d_i V^j``, shape ``(n, n) + shape``."""
    grid.check_vector(V)
    Vh = grid.fft(V)
    return grid.ifft(1j * grid.xi_odd[:, None] * Vh[None, :])


def curl(grid: GridSpec, V: np.ndarray) -> np.ndarray:
    """Scalar curl ``d_1 V^2 - d_2 V^1`` in 2D; identically zero in 1D."""
    grid.check_vector(V)
    if grid.n == 1:
        return np.zeros(grid.shape)
    Vh = grid.fft(V)
    k = grid.xi_odd
    return grid.ifft(1j * (k[0] * Vh[1] - k[1] * Vh[0]))


def helmholtz_symbol(grid: GridSpec, coeff: float) -> np.ndarray:
    if coeff < 0:
        raise ValueError(f"(I - c Laplacian) is not uniformly invertible for c={coeff} < 0")
    return 1.0 / (1.0 + coeff * grid.xi_norm2)


def helmholtz_invert(grid: GridSpec, f: np.ndarray, coeff: float) -> np.ndarray:
    """Solve ``(I - coeff * Laplacian) u = f``."""
    return apply_multiplier(grid, f, helmholtz_symbol(grid, coeff))


def leray_symbol(grid: GridSpec) -> np.ndarray:
    """Projector ``I - xi xi^T / |xi|^2`` as an ``(n, n) + spectral_shape`` array.

    Built from the Nyquist-zeroed wavevectors so that the discrete divergence
    of the output vanishes identically. The zero mode passes through
    unchanged; pure-Nyquist modes (nonzero ``xi`` but zero odd symbol) are
    dropped, which makes the 1D projector exactly the mean extraction.
    """
    k = grid.xi_odd
    k2 = np.sum(k**2, axis=0)
    safe = np.where(k2 > 0, k2, 1.0)
    eye = np.eye(grid.n).reshape((grid.n, grid.n) + (1,) * grid.n)
    P = eye - k[:, None] * k[None, :] / safe
    zero_mode = grid.xi_norm2 == 0
    nyquist_only = (k2 == 0) & ~zero_mode
    P = np.where(zero_mode, eye, P)
    P = np.where(nyquist_only, 0.0, P)
    return P


def leray_project(grid: GridSpec, V: np.ndarray) -> np.ndarray:
    grid.check_vector(V)
    P = grid.leray
    Vh = grid.fft(V)
    return grid.ifft(np.einsum("ij...,j...->i...", P, Vh))


def dealias(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    """Zero the top third of modes on every axis."""
    return apply_multiplier(grid, f, grid.dealias_mask.astype(float))


def inner_product_l2(grid: GridSpec, f: np.ndarray, g: np.ndarray) -> float:
    """Periodic rectangle-rule quadrature of ``int f g`` (vector fields: dot product)."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape or f.shape[f.ndim - grid.n:] != grid.shape:
        raise GridMismatch(f"cannot pair shapes {f.shape} and {g.shape} on grid {grid.shape}")
    return float(grid.cell_volume * np.sum(f * g))


def norm_l2(grid: GridSpec, f: np.ndarray) -> float:
    return float(np.sqrt(inner_product_l2(grid, f, f)))


# ---------------------------------------------------------------------------
# Sample fields
# ---------------------------------------------------------------------------

def random_field(
    grid: GridSpec,
    rng: np.random.Generator,
    *,
    decay: float = 2.0,
    kmax: int | None = None,
    components: int | None = None,
) -> np.ndarray:
    """Random smooth real field with spectrum ``(1 + |xi|^2)^(-decay/2)``.

    Modes with ``|k_i| > kmax`` on any axis are zero (default: the dealiased
    band), so the Nyquist rows never carry energy.
    """
    kmax = grid.dealias_cutoff if kmax is None else kmax
    lead = () if components is None else (components,)
    shape = lead + grid.spectral_shape
    coef = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    band = np.all(np.abs(grid.integer_modes) <= kmax, axis=0)
    coef *= band * (1.0 + grid.xi_norm2) ** (-decay / 2)
    f = grid.ifft(coef)
    rms = np.sqrt(np.mean(f**2))
    return f / rms if rms > 0 else f


def stream_field(grid: GridSpec, psi: np.ndarray) -> np.ndarray:
    """Divergence-free 2D field ``(-d_y psi, d_x psi)``."""
    if grid.n != 2:
        raise ValueError("stream functions need n = 2")
    g = gradient(grid, psi)
    return np.array([-g[1], g[0]])
