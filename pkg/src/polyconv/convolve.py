"""Convolution, convolution powers and prefix sequences of powers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.fft as sfft

from .dist import (
    SparseDistribution,
    coerce_pair,
    lattice_indices,
    lattice_step,
    point_mass,
    to_float_masses,
)
from .errors import BudgetExceeded, DimensionMismatch, IncompatibleLattice

NEGATIVE_CLAMP = 1e-13
AUTO_FFT_MAX_CELLS = 2**24
DEFAULT_BUDGET = 1e-9


@dataclass
class ConvolutionBudget:
    """Running account of the mass touched by negative-value clamping."""

    clamp_loss: float = 0.0
    max_negative: float = 0.0
    renormalizations: int = 0
    threshold: float = DEFAULT_BUDGET

    def absorb(self, values: np.ndarray) -> np.ndarray:
        """Zero out tiny negatives in place and account for them."""
        neg = values < 0
        if not neg.any():
            return values
        worst = float(values[neg].min())
        if worst < -NEGATIVE_CLAMP:
            raise BudgetExceeded(f"FFT produced {worst:.3e} < -{NEGATIVE_CLAMP:g}; aliasing?")
        self.max_negative = min(self.max_negative, worst)
        self.clamp_loss += float(-values[neg].sum())
        values[neg] = 0.0
        if self.clamp_loss > self.threshold:
            raise BudgetExceeded(f"clamp loss {self.clamp_loss:.3e} exceeds {self.threshold:g}")
        return values


def fft_convolve_arrays(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Linear (not circular) convolution of two dense real arrays."""
    shape = tuple(sa + sb - 1 for sa, sb in zip(a.shape, b.shape))
    fshape = tuple(sfft.next_fast_len(s, real=True) for s in shape)
    axes = tuple(range(a.ndim))
    fa = sfft.rfftn(a, fshape, axes=axes)
    fb = sfft.rfftn(b, fshape, axes=axes)
    out = sfft.irfftn(fa * fb, fshape, axes=axes)
    return out[tuple(slice(0, s) for s in shape)]


def _combined_defect(F: SparseDistribution, G: SparseDistribution, exact: bool):
    dF, dG = F.mass_defect, G.mass_defect
    if not exact:
        dF, dG = float(dF), float(dG)
    return dF + dG - dF * dG


def _direct(F: SparseDistribution, G: SparseDistribution) -> SparseDistribution:
    a, b = coerce_pair(F.masses, G.masses)
    exact = a.dtype == object
    pts = (F.points[:, None, :] + G.points[None, :, :]).reshape(-1, F.dim)
    masses = np.multiply.outer(a, b).reshape(-1)
    return SparseDistribution.from_arrays(pts, masses, _combined_defect(F, G, exact))


def _common_steps(F: SparseDistribution, G: SparseDistribution) -> np.ndarray:
    steps = []
    for j in range(F.dim):
        h = lattice_step(F.points[:, j], G.points[:, j])
        steps.append(1.0 if h is None else h)
    return np.asarray(steps)


def _grid(F: SparseDistribution, steps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    offset = F.points.min(axis=0)
    idx = np.stack([lattice_indices(F.points[:, j], steps[j], offset[j]) for j in range(F.dim)], axis=1)
    shape = tuple(idx.max(axis=0) + 1)
    arr = np.zeros(shape)
    arr[tuple(idx.T)] = to_float_masses(F.masses)
    return arr, offset


def _result_cells(F: SparseDistribution, G: SparseDistribution, steps: np.ndarray) -> int:
    span = (np.ptp(F.points, axis=0) + np.ptp(G.points, axis=0)) / steps
    return int(np.prod(np.rint(span) + 1))


def _fft(F: SparseDistribution, G: SparseDistribution, budget: ConvolutionBudget,
         steps: np.ndarray | None = None) -> SparseDistribution:
    if steps is None:
        steps = _common_steps(F, G)
    a, off_a = _grid(F, steps)
    b, off_b = _grid(G, steps)
    out = budget.absorb(fft_convolve_arrays(a, b))
    nz = np.nonzero(out > 0)
    pts = off_a + off_b + steps * np.stack(nz, axis=1)
    return SparseDistribution.from_arrays(pts, out[nz], _combined_defect(F, G, False))


def convolve(F: SparseDistribution, G: SparseDistribution, method: str = "auto",
             budget: ConvolutionBudget | None = None) -> SparseDistribution:
    """Law of xi + eta for independent xi ~ F, eta ~ G.

    ``method`` is ``"direct"`` (pairwise sums, exact for rational masses),
    ``"fft"`` (dense lattice embedding) or ``"auto"``.  ``auto`` keeps exact
    inputs on the direct path and otherwise uses the FFT whenever both laws
    share a lattice and the result box has at most 2**24 cells.
    """
    if F.dim != G.dim:
        raise DimensionMismatch(f"dims differ: {F.dim} vs {G.dim}")
    budget = budget if budget is not None else ConvolutionBudget()
    if method == "direct":
        return _direct(F, G)
    if method == "fft":
        return _fft(F, G, budget)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    if (F.exact and G.exact) or len(F) * len(G) <= 64:
        return _direct(F, G)
    try:
        steps = _common_steps(F, G)
    except IncompatibleLattice:
        return _direct(F, G)
    if _result_cells(F, G, steps) > min(AUTO_FFT_MAX_CELLS, 64 * len(F) * len(G)):
        return _direct(F, G)
    return _fft(F, G, budget, steps)


def power(F: SparseDistribution, n: int, method: str = "auto",
          budget: ConvolutionBudget | None = None) -> SparseDistribution:
    """F^n by binary exponentiation; F^0 is the unit mass at the origin."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return point_mass(np.zeros(F.dim))
    budget = budget if budget is not None else ConvolutionBudget()
    result = None
    base = F
    while True:
        if n & 1:
            result = base if result is None else convolve(result, base, method, budget)
        n >>= 1
        if not n:
            return result
        base = convolve(base, base, method, budget)


def power_sequence(F: SparseDistribution, ns: Sequence[int], method: str = "auto",
                   budget: ConvolutionBudget | None = None) -> list[SparseDistribution]:
    """[F^n for n in ns] for ascending ``ns``, sharing the squarings F^(2^j)."""
    ns = [int(n) for n in ns]
    if not ns:
        raise ValueError("ns must be nonempty")
    if any(b < a for a, b in zip(ns, ns[1:])) or ns[0] < 0:
        raise ValueError("ns must be ascending and nonnegative")
    budget = budget if budget is not None else ConvolutionBudget()
    squares = [F]

    def from_squares(k: int) -> SparseDistribution | None:
        out = None
        j = 0
        while k:
            while len(squares) <= j:
                squares.append(convolve(squares[-1], squares[-1], method, budget))
            if k & 1:
                out = squares[j] if out is None else convolve(out, squares[j], method, budget)
            k >>= 1
            j += 1
        return out

    out = []
    cur = power(F, 0) if ns[0] == 0 else from_squares(ns[0])
    out.append(cur)
    for prev, n in zip(ns, ns[1:]):
        if n != prev:
            cur = convolve(cur, from_squares(n - prev), method, budget)
        out.append(cur)
    return out


def shared_lattice(F: SparseDistribution) -> bool:
    """True when F sits on a rational lattice (so the FFT path applies)."""
    try:
        for j in range(F.dim):
            lattice_step(F.points[:, j])
    except IncompatibleLattice:
        return False
    return True


__all__ = [
    "ConvolutionBudget",
    "convolve",
    "fft_convolve_arrays",
    "power",
    "power_sequence",
    "shared_lattice",
]
