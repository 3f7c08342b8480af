"""Couplings of laws on Z>=0 and the random-sum bounds built on them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
import scipy.fft as sfft
from scipy import optimize, sparse

from ..convolve import power_sequence
from ..dist import SparseDistribution, lattice_indices, lattice_step, to_float_masses
from ..errors import IncompatibleLattice, InvalidDistribution, SupportTooLarge

MAX_PLAN_CELLS = 10_000
Law = Mapping[int, float]


def _law(U) -> tuple[np.ndarray, np.ndarray]:
    """(sorted support, probabilities) of a law on Z>=0 given as mapping or 1-d distribution."""
    if isinstance(U, SparseDistribution):
        if U.dim != 1:
            raise InvalidDistribution("counting laws must be one-dimensional")
        ks, ps = U.points[:, 0], to_float_masses(U.masses)
    else:
        items = sorted((int(k), float(p)) for k, p in U.items() if p > 0)
        ks = np.array([k for k, _ in items], dtype=float)
        ps = np.array([p for _, p in items])
    if np.any(ks < 0) or np.any(ks != np.rint(ks)):
        raise InvalidDistribution("counting laws live on nonnegative integers")
    if abs(ps.sum() - 1.0) > 1e-9:
        ps = ps / ps.sum()
    return ks.astype(np.int64), ps


@dataclass(frozen=True)
class Coupling:
    """Joint law of (mu, nu) on Z>=0 x Z>=0."""

    joint: dict

    def __post_init__(self):
        vals = np.array(list(self.joint.values()), dtype=float)
        if vals.size == 0 or np.any(vals < -1e-15) or abs(vals.sum() - 1.0) > 1e-9:
            raise InvalidDistribution("coupling masses must be nonnegative and sum to 1")

    @classmethod
    def from_plan(cls, ks, ls, plan: np.ndarray) -> "Coupling":
        joint = {}
        for i, j in zip(*np.nonzero(plan > 1e-16)):
            joint[(int(ks[i]), int(ls[j]))] = float(plan[i, j])
        return cls(joint)

    def marginals(self) -> tuple[dict, dict]:
        U, V = {}, {}
        for (k, l), w in self.joint.items():
            U[k] = U.get(k, 0.0) + w
            V[l] = V.get(l, 0.0) + w
        return U, V

    def expect(self, fn: Callable[[int, int], float]) -> float:
        return float(sum(w * fn(k, l) for (k, l), w in sorted(self.joint.items())))


def comonotone_coupling(U, V) -> Coupling:
    """Quantile coupling: sweep both CDFs together."""
    ks, us = _law(U)
    ls, vs = _law(V)
    joint: dict = {}
    i = j = 0
    ru, rv = us[0], vs[0]
    while i < len(ks) and j < len(ls):
        w = min(ru, rv)
        if w > 0:
            joint[(int(ks[i]), int(ls[j]))] = joint.get((int(ks[i]), int(ls[j])), 0.0) + float(w)
        ru -= w
        rv -= w
        if ru <= 1e-15:
            i += 1
            ru = us[i] if i < len(ks) else 0.0
        if rv <= 1e-15:
            j += 1
            rv = vs[j] if j < len(ls) else 0.0
    return Coupling(joint)


def independent_coupling(U, V) -> Coupling:
    ks, us = _law(U)
    ls, vs = _law(V)
    return Coupling.from_plan(ks, ls, np.outer(us, vs))


def optimal_coupling(U, V, cost: Callable[[int, int], float]) -> Coupling:
    """Minimum expected cost over all couplings, by the transport linear program."""
    ks, us = _law(U)
    ls, vs = _law(V)
    a, b = len(ks), len(ls)
    if a * b > MAX_PLAN_CELLS:
        raise SupportTooLarge(f"{a} x {b} plan exceeds {MAX_PLAN_CELLS} cells")
    C = np.array([[cost(int(k), int(l)) for l in ls] for k in ks], dtype=float)
    rows = sparse.kron(sparse.eye(a), np.ones((1, b)))
    cols = sparse.kron(np.ones((1, a)), sparse.eye(b))
    A_eq = sparse.vstack([rows, cols]).tocsr()
    b_eq = np.concatenate([us, vs])
    res = optimize.linprog(C.reshape(-1), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    plan = np.clip(res.x.reshape(a, b), 0.0, None)
    plan /= plan.sum()
    return Coupling.from_plan(ks, ls, plan)


def theorem7_cost(m: int, c_small: float, c_m: float, plus_form: str) -> Callable[[int, int], float]:
    """Integrand min{c m / sqrt(l+1) + c(m)|k-l|/(l+1), 1}, or its form without the root term."""
    if plus_form not in ("with_sqrt", "without_sqrt"):
        raise ValueError(f"unknown plus_form {plus_form!r}")
    root = plus_form == "with_sqrt"

    def cost(k: int, l: int) -> float:
        val = c_m * abs(k - l) / (l + 1)
        if root:
            val += c_small * m / np.sqrt(l + 1)
        return min(val, 1.0)

    return cost


def theorem7_rhs(coupling: Coupling, m: int, c_small: float = 1.0, c_m: float = 1.0,
                 plus_form: str = "with_sqrt") -> float:
    return coupling.expect(theorem7_cost(m, c_small, c_m, plus_form))


def best_coupling_rhs(U, V, m: int, c_small: float = 1.0, c_m: float = 1.0,
                      plus_form: str = "with_sqrt") -> tuple[float, str]:
    """Infimum of the bound over couplings: exact LP when small, else the better of two feasible plans.

    The truncated cost is not submodular, so the comonotone plan need not beat
    the independent one; both bound the infimum from above.
    """
    cost = theorem7_cost(m, c_small, c_m, plus_form)
    try:
        return optimal_coupling(U, V, cost).expect(cost), "optimal"
    except SupportTooLarge:
        como = comonotone_coupling(U, V).expect(cost)
        indep = independent_coupling(U, V).expect(cost)
        return (como, "comonotone") if como <= indep else (indep, "independent")


def random_sum_law(U, F: SparseDistribution, method: str = "mixture") -> SparseDistribution:
    """Law of xi_1 + ... + xi_mu with mu ~ U independent of the iid xi_j ~ F.

    ``mixture`` sums P{mu=k} F^k over precomputed powers; ``spectral`` composes
    the generating function of mu with F^ on a lattice box.
    """
    ks, us = _law(U)
    if method == "mixture":
        powers = power_sequence(F, [int(k) for k in ks])
        pts = np.concatenate([P.points for P in powers])
        masses = np.concatenate([u * to_float_masses(P.masses) for u, P in zip(us, powers)])
        defect = float(sum(u * float(P.mass_defect) for u, P in zip(us, powers)))
        return SparseDistribution.from_arrays(pts, masses, defect)
    if method == "spectral":
        return _random_sum_spectral(ks, us, F)
    raise ValueError(f"unknown method {method!r}")


def _random_sum_spectral(ks, us, F: SparseDistribution) -> SparseDistribution:
    try:
        steps = np.array([lattice_step(F.points[:, j], origin=True) or 1.0 for j in range(F.dim)])
        idx = np.stack([lattice_indices(F.points[:, j], steps[j], 0.0) for j in range(F.dim)], axis=1)
    except IncompatibleLattice as exc:
        raise IncompatibleLattice(f"spectral random sums need a lattice law: {exc}") from exc
    kmax = int(ks.max())
    lo = kmax * np.minimum(idx.min(axis=0), 0)
    hi = kmax * np.maximum(idx.max(axis=0), 0)
    shape = tuple(int(v) for v in hi - lo + 1)
    arr = np.zeros(shape)
    np.add.at(arr, tuple((idx % np.array(shape)).T), to_float_masses(F.masses))
    z = sfft.fftn(arr)
    pgf = np.zeros_like(z)
    coeff = np.zeros(kmax + 1)
    coeff[ks] = us
    for c in coeff[::-1]:
        pgf = pgf * z + c
    out = sfft.ifftn(pgf).real
    out = np.roll(out, tuple(int(-v) for v in lo), axis=tuple(range(len(shape))))
    out[(out < 0) & (out > -1e-13)] = 0.0
    nz = np.nonzero(out > 0)
    pts = steps * (np.stack(nz, axis=1) + lo)
    vals = out[nz]
    return SparseDistribution.from_arrays(pts, vals, max(0.0, 1.0 - float(vals.sum())))
