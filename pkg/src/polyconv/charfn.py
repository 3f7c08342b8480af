"""Characteristic functions and certified membership in the classes F^(alpha)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .dist import SparseDistribution, lattice_indices, lattice_step, reflect, to_float_masses
from .errors import DimensionMismatch, IncompatibleLattice, NotLattice, NotSymmetric

SYMMETRY_TOL = 1e-14
DEFAULT_GRID = {1: 4096, 2: 512}
FALLBACK_GRID = 48


def cf_eval(F: SparseDistribution, t) -> complex | np.ndarray:
    """F^(t) = sum_x F{x} exp(i<t,x>); ``t`` may be one d-vector or a (T, d) stack."""
    t = np.asarray(t, dtype=float)
    single = t.ndim <= 1
    t = t.reshape(1, -1) if single else t
    if F.dim == 1 and t.shape[1] != 1 and single:
        t = t.reshape(-1, 1)
        single = False
    if t.shape[1] != F.dim:
        raise DimensionMismatch(f"t has dim {t.shape[1]}, distribution has dim {F.dim}")
    phase = t @ F.points.T
    vals = np.exp(1j * phase) @ to_float_masses(F.masses)
    return complex(vals[0]) if single else vals


def is_symmetric(F: SparseDistribution) -> bool:
    R = reflect(F)
    if len(R) != len(F) or not np.array_equal(R.points, F.points):
        return False
    if F.exact:
        return bool(np.all(R.masses == F.masses))
    return bool(np.all(np.abs(R.masses - F.masses) <= SYMMETRY_TOL))


@dataclass(frozen=True)
class ClassCertificate:
    """F^(t) >= -1 + alpha_lower for every t in R^d."""

    alpha_lower: float
    grid_min: float
    lipschitz: float
    grid_step: tuple[float, ...]
    radius: float

    @property
    def nonnegative(self) -> bool:
        return self.alpha_lower >= 1.0


def _lattice_grid(F: SparseDistribution) -> tuple[np.ndarray, np.ndarray]:
    try:
        steps = np.array([lattice_step(F.points[:, j], origin=True) or 1.0 for j in range(F.dim)])
        idx = np.stack([lattice_indices(F.points[:, j], steps[j], 0.0) for j in range(F.dim)], axis=1)
    except IncompatibleLattice as exc:
        raise NotLattice(str(exc)) from exc
    return steps, idx


def cf_on_period_grid(F: SparseDistribution, points_per_axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Re F^ on the uniform grid over one period cell, plus the per-axis grid spacing.

    With x = h*k on the lattice, F^(2*pi*j/(h*G)) = sum_k F{hk} exp(2*pi*i*j*k/G),
    an inverse DFT of the masses wrapped modulo G.
    """
    steps, idx = _lattice_grid(F)
    G = int(points_per_axis)
    shape = (G,) * F.dim
    arr = np.zeros(shape)
    np.add.at(arr, tuple((idx % G).T), to_float_masses(F.masses))
    vals = sfft.ifftn(arr) * float(G) ** F.dim
    spacing = 2 * np.pi / (steps * G)
    return vals.real, spacing


def certify_alpha(F: SparseDistribution, grid_points_per_axis: int | None = None) -> ClassCertificate:
    """Lower bound alpha with F in F^(alpha), rigorous over all of R^d.

    Grid minimum of F^ over one period cell minus L*r, where L = sum F{x}|x|
    bounds the gradient and r is the half-diagonal of a grid cell.
    """
    if not is_symmetric(F):
        raise NotSymmetric("certification needs a symmetric distribution")
    G = grid_points_per_axis or DEFAULT_GRID.get(F.dim, FALLBACK_GRID)
    vals, spacing = cf_on_period_grid(F, G)
    grid_min = float(vals.min())
    lipschitz = float(to_float_masses(F.masses) @ np.linalg.norm(F.points, axis=1))
    radius = 0.5 * float(np.linalg.norm(spacing))
    alpha = 1.0 + grid_min - lipschitz * radius
    return ClassCertificate(
        alpha_lower=float(np.clip(alpha, 0.0, 2.0)),
        grid_min=grid_min,
        lipschitz=lipschitz,
        grid_step=tuple(float(s) for s in spacing),
        radius=radius,
    )


def cf_sup_distance(F: SparseDistribution, G: SparseDistribution, t_samples: np.ndarray) -> float:
    """max over sampled t of |F^(t) - G^(t)|."""
    return float(np.max(np.abs(cf_eval(F, t_samples) - cf_eval(G, t_samples))))


__all__ = [
    "ClassCertificate",
    "certify_alpha",
    "cf_eval",
    "cf_on_period_grid",
    "cf_sup_distance",
    "is_symmetric",
]
