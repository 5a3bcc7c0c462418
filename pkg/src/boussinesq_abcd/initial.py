"""Initial-data families and bottom profiles."""

from __future__ import annotations

import numpy as np

from . import spectral as sp
from .model import WaveState, decompose_initial
from .spectral import GridSpec

FAMILIES = ("gaussian", "random", "single-mode", "zero")
TOPOGRAPHIES = ("flat", "bump", "ridge")


def gaussian(grid: GridSpec, amplitude: float = 1.0, sigma: float = 2.0, center=None) -> np.ndarray:
    """Periodized ``A exp(-|x - x0|^2 / sigma^2)`` (nearest image)."""
    center = np.full(grid.n, grid.L / 2) if center is None else np.broadcast_to(center, (grid.n,))
    r2 = np.zeros(grid.shape)
    for i in range(grid.n):
        d = grid.x[i] - center[i]
        d = d - grid.L * np.round(d / grid.L)
        r2 = r2 + d**2
    return amplitude * np.exp(-r2 / sigma**2)


def single_mode(grid: GridSpec, k: int = 1, amplitude: float = 1.0, axis: int = 0) -> np.ndarray:
    return amplitude * np.cos(2 * np.pi * k * grid.x[axis] / grid.L)


def make_initial(
    grid: GridSpec,
    family: str = "gaussian",
    *,
    amplitude: float = 1.0,
    sigma: float = 2.0,
    k: int = 1,
    velocity: float = 0.0,
    seed: int = 0,
    decay: float = 2.0,
    kmax: int | None = None,
) -> WaveState:
    """Build ``(eta0, Vbar0)`` of a named family and split off ``W``.

    ``velocity`` scales the initial velocity relative to ``eta0``: for the
    Gaussian and single-mode families ``Vbar0 = velocity * eta0`` along
    ``x_1``; for the random family every component is an independent
    random field of RMS ``velocity * amplitude``.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown initial family {family!r}; choose from {FAMILIES}")
    Vbar = np.zeros((grid.n,) + grid.shape)
    if family == "zero":
        eta = np.zeros(grid.shape)
    elif family == "gaussian":
        eta = gaussian(grid, amplitude, sigma)
        grid.warn_if_wrapping(eta, "eta0")
        Vbar[0] = velocity * eta
    elif family == "single-mode":
        eta = single_mode(grid, k, amplitude)
        Vbar[0] = velocity * eta
    else:
        rng = np.random.default_rng(seed)
        eta = amplitude * sp.random_field(grid, rng, decay=decay, kmax=kmax)
        if velocity:
            Vbar = velocity * amplitude * sp.random_field(grid, rng, decay=decay, kmax=kmax, components=grid.n)
    W, V0 = decompose_initial(grid, Vbar)
    return WaveState(grid, eta, V0, W=W)


def topography(grid: GridSpec, name: str | None, height: float = 0.1, width: float = 4.0) -> np.ndarray | None:
    """Bottom profile ``S``; ``None`` or ``"flat"`` means no topography term."""
    if name in (None, "flat"):
        return None
    if name == "bump":
        return gaussian(grid, height, width)
    if name == "ridge":
        return height * np.cos(2 * np.pi * grid.x[0] / grid.L)
    raise ValueError(f"unknown topography {name!r}; choose from {TOPOGRAPHIES}")
