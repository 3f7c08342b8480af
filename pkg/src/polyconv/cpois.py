"""Accompanying compound Poisson laws e(aH) and the rare-event comparison laws.

``e(aH) = exp(-a) * sum_k a^k H^k / k!`` is computed two ways: as a truncated
Poisson mixture of convolution powers, and spectrally by exponentiating the
discrete Fourier transform of H on a lattice box large enough to hold the
truncated sum.  The two paths share nothing but the lattice bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.fft as sfft
from scipy import stats

from .convolve import ConvolutionBudget, convolve, fft_convolve_arrays, power
from .dist import (
    SparseDistribution,
    lattice_indices,
    lattice_step,
    mixture,
    point_mass,
    symmetrize,
    to_float_masses,
)
from .errors import BoxOverflow, DimensionMismatch, IncompatibleLattice

DEFAULT_TAIL_EPS = 1e-12
SPECTRAL_MAX_CELLS = 2**26
AUTO_MIXTURE_WORK = 5e7


def truncation_level(alpha: float, tail_eps: float) -> int:
    """Smallest K with P(Poisson(alpha) > K) <= tail_eps."""
    if alpha == 0:
        return 0
    k = max(int(stats.poisson.isf(tail_eps, alpha)) - 2, 0)
    while stats.poisson.sf(k, alpha) > tail_eps:
        k += 1
    while k > 0 and stats.poisson.sf(k - 1, alpha) <= tail_eps:
        k -= 1
    return k


@dataclass(frozen=True)
class CompoundPoissonSpec:
    intensity: float
    base: SparseDistribution
    tail_eps: float = DEFAULT_TAIL_EPS

    def __post_init__(self):
        if self.intensity < 0:
            raise ValueError("intensity must be nonnegative")
        if self.tail_eps <= 0:
            raise ValueError("tail_eps must be positive")

    @property
    def truncation(self) -> int:
        return truncation_level(float(self.intensity), self.tail_eps)


@dataclass(frozen=True)
class RareEventSpec:
    """Summands G_i = (1 - p_i) E + p_i V_i."""

    p_list: Sequence
    V_list: Sequence[SparseDistribution]
    dim: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "p_list", tuple(self.p_list))
        object.__setattr__(self, "V_list", tuple(self.V_list))
        if len(self.p_list) != len(self.V_list) or not self.p_list:
            raise ValueError("need one V_i per p_i, n >= 1")
        if any(not 0 <= p <= 1 for p in self.p_list):
            raise ValueError("every p_i must lie in [0, 1]")
        dims = {V.dim for V in self.V_list}
        if len(dims) != 1:
            raise DimensionMismatch("all V_i must share a dimension")
        object.__setattr__(self, "dim", dims.pop())

    @property
    def n(self) -> int:
        return len(self.p_list)

    @property
    def p(self):
        return max(self.p_list)

    @classmethod
    def homogeneous(cls, n: int, p, V: SparseDistribution) -> "RareEventSpec":
        return cls([p] * n, [V] * n)


def _origin_lattice(H: SparseDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Steps of the lattice generated by supp(H) and 0, plus H's integer indices."""
    steps = np.array([lattice_step(H.points[:, j], origin=True) or 1.0 for j in range(H.dim)])
    idx = np.stack([lattice_indices(H.points[:, j], steps[j], 0.0) for j in range(H.dim)], axis=1)
    return steps, idx


def _sum_box(idx: np.ndarray, K: int) -> tuple[np.ndarray, np.ndarray]:
    lo = K * np.minimum(idx.min(axis=0), 0)
    hi = K * np.maximum(idx.max(axis=0), 0)
    return lo, hi


def _to_sparse(arr: np.ndarray, lo: np.ndarray, steps: np.ndarray) -> SparseDistribution:
    nz = np.nonzero(arr > 0)
    pts = steps * (np.stack(nz, axis=1) + lo)
    vals = arr[nz]
    defect = max(0.0, 1.0 - float(vals.sum()))
    return SparseDistribution.from_arrays(pts, vals, defect)


def _mixture_path(alpha, H, K, steps, idx, budget) -> SparseDistribution:
    d = H.dim
    weights = stats.poisson.pmf(np.arange(K + 1), alpha)
    box_lo, box_hi = _sum_box(idx, K)
    acc = np.zeros(tuple(box_hi - box_lo + 1))
    h_lo = idx.min(axis=0)
    h_arr = np.zeros(tuple(idx.max(axis=0) - h_lo + 1))
    h_arr[tuple((idx - h_lo).T)] = to_float_masses(H.masses)
    cur = np.ones((1,) * d)
    cur_lo = np.zeros(d, dtype=np.int64)
    acc[tuple(-box_lo)] += weights[0]
    for k in range(1, K + 1):
        cur = budget.absorb(fft_convolve_arrays(cur, h_arr))
        cur_lo = cur_lo + h_lo
        start = cur_lo - box_lo
        sl = tuple(slice(s, s + n) for s, n in zip(start, cur.shape))
        acc[sl] += weights[k] * cur
    return _to_sparse(acc, box_lo, steps)


def _spectral_path(alpha, H, K, steps, idx, budget) -> SparseDistribution:
    box_lo, box_hi = _sum_box(idx, K)
    shape = tuple(int(v) for v in box_hi - box_lo + 1)
    if np.prod(shape, dtype=float) > SPECTRAL_MAX_CELLS:
        raise BoxOverflow(f"spectral box {shape} exceeds {SPECTRAL_MAX_CELLS} cells")
    arr = np.zeros(shape)
    np.add.at(arr, tuple((idx % np.array(shape)).T), to_float_masses(H.masses))
    cf = sfft.fftn(arr)
    out = sfft.ifftn(np.exp(alpha * (cf - 1.0))).real
    out = np.roll(out, tuple(int(-v) for v in box_lo), axis=tuple(range(len(shape))))
    return _to_sparse(budget.absorb(out), box_lo, steps)


def compound_poisson(spec: CompoundPoissonSpec, method: str = "mixture",
                     budget: ConvolutionBudget | None = None) -> SparseDistribution:
    """e(aH) truncated at K = spec.truncation summands.

    ``method="mixture"`` sums Poisson-weighted powers of H; ``"spectral"``
    inverts exp(a(H^ - 1)) on the same lattice box; ``"auto"`` takes the
    mixture path unless its K box-sized convolutions get expensive.  Mass beyond K summands
    (at most ``tail_eps``) is either dropped into ``mass_defect`` (mixture) or
    aliased into the box (spectral).
    """
    alpha = float(spec.intensity)
    H = spec.base
    if alpha == 0 or np.all(H.points == 0):
        return point_mass(np.zeros(H.dim))
    budget = budget if budget is not None else ConvolutionBudget()
    try:
        steps, idx = _origin_lattice(H)
    except IncompatibleLattice as exc:
        raise IncompatibleLattice(f"compound Poisson base must be a lattice law: {exc}") from exc
    K = spec.truncation
    if method == "auto":
        lo, hi = _sum_box(idx, K)
        method = "mixture" if np.prod(hi - lo + 1, dtype=float) * K <= AUTO_MIXTURE_WORK else "spectral"
    if method == "mixture":
        return _mixture_path(alpha, H, K, steps, idx, budget)
    if method == "spectral":
        return _spectral_path(alpha, H, K, steps, idx, budget)
    raise ValueError(f"unknown method {method!r}")


def accompanying(F: SparseDistribution, n: float, tail_eps: float = DEFAULT_TAIL_EPS,
                 method: str = "auto") -> SparseDistribution:
    """e(nF), the accompanying law of F^n."""
    return compound_poisson(CompoundPoissonSpec(n, F, tail_eps), method)


def _levy_base(weights: Sequence, laws: Sequence[SparseDistribution]):
    total = sum(weights)
    if total == 0:
        return total, None
    comps = [(w / total, V) for w, V in zip(weights, laws) if w > 0]
    return total, mixture(comps)


def accompanying_product(spec: RareEventSpec, tail_eps: float = DEFAULT_TAIL_EPS,
                         method: str = "auto") -> SparseDistribution:
    """prod_i e(G_i), collapsed to one compound Poisson with Levy part sum p_i V_i."""
    lam, H = _levy_base(spec.p_list, spec.V_list)
    if H is None:
        return point_mass(np.zeros(spec.dim))
    return compound_poisson(CompoundPoissonSpec(float(lam), H, tail_eps), method)


def d0_law(spec: RareEventSpec, tail_eps: float = DEFAULT_TAIL_EPS,
           method: str = "auto") -> SparseDistribution:
    """Infinitely divisible law with c.f. prod_i exp(-p_i(1-p_i)(1 - Re V_i^))."""
    weights = [p * (1 - p) for p in spec.p_list]
    lam, H = _levy_base(weights, [symmetrize(V) for V in spec.V_list])
    if H is None:
        return point_mass(np.zeros(spec.dim))
    return compound_poisson(CompoundPoissonSpec(float(lam), H, tail_eps), method)


def rare_event_summand(p, V: SparseDistribution) -> SparseDistribution:
    E = point_mass(np.zeros(V.dim))
    q = 1 - p
    return mixture([(q, E), (p, V)])


def rare_event_sum(spec: RareEventSpec, method: str = "auto") -> SparseDistribution:
    """G = prod_i G_i; identical summands are raised to a power."""
    pairs = list(zip(spec.p_list, spec.V_list))
    first = pairs[0]
    if all(p == first[0] and V is first[1] for p, V in pairs):
        return power(rare_event_summand(*first), spec.n, method)
    out = None
    for p, V in pairs:
        G = rare_event_summand(p, V)
        out = G if out is None else convolve(out, G, method)
    return out


def poisson_law(lam: float, tail_eps: float = DEFAULT_TAIL_EPS) -> SparseDistribution:
    """Poisson(lam) on Z>=0 truncated at the tail level, as a 1-d law."""
    K = truncation_level(lam, tail_eps)
    k = np.arange(K + 1)
    pmf = stats.poisson.pmf(k, lam)
    return SparseDistribution.from_arrays(k.reshape(-1, 1).astype(float), pmf,
                                          max(0.0, 1.0 - float(pmf.sum())))


__all__ = [
    "CompoundPoissonSpec",
    "RareEventSpec",
    "accompanying",
    "accompanying_product",
    "compound_poisson",
    "d0_law",
    "poisson_law",
    "rare_event_sum",
    "rare_event_summand",
    "truncation_level",
]
