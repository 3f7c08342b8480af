"""Distances and concentration functionals on finitely supported laws.

Every sup over intervals reduces to a maximum-subarray problem on the signed
measure G - H after projecting to the chosen directions: for one direction
the sup over closed intervals of |(G-H){[a,b]}| is max(prefix) - min(prefix);
for two directions the first-axis windows are enumerated and the second axis
is scanned the same way.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np
from scipy import optimize, stats
from scipy.spatial.transform import Rotation

from .dist import (
    SparseDistribution,
    _coerce_point,
    _parse_number,
    _signed_union,
    aggregate,
    directions_array,
    is_exact,
    snap_axis,
    to_float_masses,
)
from .errors import DimensionMismatch, InvalidDistribution, ModeUnsupported, NegativeLength

VERTEX_TOL = 1e-10
MAX_KOLMOGOROV_CELLS = 5 * 10**7
MAX_VERTEX_COMBINATIONS = 200_000


# ---------------------------------------------------------------------------
# polyhedra
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Polyhedron:
    """{x : a_j <= <x, t_j> <= b_j, j = 1..m}, closed, bounds may be infinite."""

    directions: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    vertices: np.ndarray | None = None

    def __post_init__(self):
        T = np.atleast_2d(np.asarray(self.directions, dtype=float))
        object.__setattr__(self, "directions", T)
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float).reshape(-1))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float).reshape(-1))
        if T.shape[0] < 1 or self.lower.shape != (T.shape[0],) or self.upper.shape != (T.shape[0],):
            raise InvalidDistribution("need m >= 1 constraints with one (a, b) pair each")
        if np.any(self.lower > self.upper):
            raise ValueError("every constraint needs a_j <= b_j")
        if self.vertices is not None:
            V = np.atleast_2d(np.asarray(self.vertices, dtype=float))
            if V.shape[1] != self.dim:
                raise DimensionMismatch("vertex dimension differs from constraint dimension")
            object.__setattr__(self, "vertices", V)
            if not np.all(self.contains(V, tol=VERTEX_TOL)):
                raise ValueError("every vertex must satisfy all constraints")

    @classmethod
    def from_constraints(cls, constraints: Sequence[tuple], vertices=None) -> "Polyhedron":
        T = [_coerce_point(t) for t, _, _ in constraints]
        a = [float(_parse_number(lo)) for _, lo, _ in constraints]
        b = [float(_parse_number(hi)) for _, _, hi in constraints]
        return cls(np.array(T), np.array(a), np.array(b), vertices)

    @classmethod
    def box(cls, lows, highs) -> "Polyhedron":
        lows = np.atleast_1d(np.asarray(lows, dtype=float))
        highs = np.atleast_1d(np.asarray(highs, dtype=float))
        return cls(np.eye(len(lows)), lows, highs)

    @classmethod
    def whole_space(cls, d: int) -> "Polyhedron":
        return cls(np.eye(d), np.full(d, -np.inf), np.full(d, np.inf))

    @classmethod
    def from_literal(cls, obj: Mapping) -> "Polyhedron":
        try:
            cons = [(c["t"], c.get("a", "-inf"), c.get("b", "inf")) for c in obj["constraints"]]
        except (KeyError, TypeError) as exc:
            raise InvalidDistribution(f"bad polyhedron literal: {exc}") from exc
        verts = obj.get("vertices")
        return cls.from_constraints(cons, None if verts is None else np.array(verts, dtype=float))

    def to_literal(self) -> dict:
        def enc(v):
            return "inf" if v == np.inf else "-inf" if v == -np.inf else float(v)

        out = {"constraints": [{"t": [float(c) for c in t], "a": enc(a), "b": enc(b)}
                               for t, a, b in zip(self.directions, self.lower, self.upper)]}
        if self.vertices is not None:
            out["vertices"] = self.vertices.tolist()
        return out

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    @property
    def m(self) -> int:
        return self.directions.shape[0]

    def contains(self, points: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        vals = np.atleast_2d(points) @ self.directions.T
        lo = self.lower - tol * np.maximum(1.0, np.abs(np.where(np.isfinite(self.lower), self.lower, 0)))
        hi = self.upper + tol * np.maximum(1.0, np.abs(np.where(np.isfinite(self.upper), self.upper, 0)))
        return np.all((vals >= lo) & (vals <= hi), axis=1)

    def _halfspaces(self) -> tuple[np.ndarray, np.ndarray]:
        rows, rhs = [], []
        for t, a, b in zip(self.directions, self.lower, self.upper):
            if np.isfinite(b):
                rows.append(t)
                rhs.append(b)
            if np.isfinite(a):
                rows.append(-t)
                rhs.append(-a)
        d = self.dim
        return np.array(rows).reshape(-1, d), np.array(rhs)

    def _linprog_extent(self, t: np.ndarray) -> tuple[float, float] | None:
        A, c = self._halfspaces()
        bounds = [(None, None)] * self.dim
        kw = dict(A_ub=A if len(A) else None, b_ub=c if len(A) else None, bounds=bounds, method="highs")
        lo = optimize.linprog(t, **kw)
        if lo.status == 2:
            return None
        hi = optimize.linprog(-t, **kw)
        lo_v = -np.inf if lo.status == 3 else lo.fun
        hi_v = np.inf if hi.status == 3 else -hi.fun
        return lo_v, hi_v

    @cached_property
    def bounded(self) -> bool:
        if self.vertices is not None:
            return True
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = 1.0
            ext = self._linprog_extent(e)
            if ext is not None and not (np.isfinite(ext[0]) and np.isfinite(ext[1])):
                return False
        return True

    @cached_property
    def vertex_array(self) -> np.ndarray | None:
        """Explicit vertices, or enumerated ones for a bounded X; None if unavailable."""
        if self.vertices is not None:
            return self.vertices
        if not self.bounded:
            return None
        A, c = self._halfspaces()
        d = self.dim
        if math.comb(len(A), d) > MAX_VERTEX_COMBINATIONS:
            return None
        found = []
        for rows in itertools.combinations(range(len(A)), d):
            M = A[list(rows)]
            if abs(np.linalg.det(M)) < 1e-12:
                continue
            x = np.linalg.solve(M, c[list(rows)])
            if np.all(A @ x <= c + VERTEX_TOL * np.maximum(1.0, np.abs(c))):
                found.append(x)
        if not found:
            return np.zeros((0, d))
        V = np.unique(np.round(np.array(found), 12), axis=0)
        return V


def projection_length(X: Polyhedron, t) -> float:
    """Lebesgue measure of {<x,t> : x in X}; +inf when <.,t> is unbounded on X."""
    t = _coerce_point(t, X.dim)
    if abs(np.linalg.norm(t) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    V = X.vertex_array
    if V is not None:
        if len(V) == 0:
            return 0.0
        proj = V @ t
        return float(proj.max() - proj.min())
    ext = X._linprog_extent(t)
    if ext is None:
        return 0.0
    return float(ext[1] - ext[0])


def polyhedron_measure(F: SparseDistribution, X: Polyhedron):
    """F{X} for the closed polyhedron X."""
    if F.dim != X.dim:
        raise DimensionMismatch(f"distribution dim {F.dim} vs polyhedron dim {X.dim}")
    mask = X.contains(F.points)
    sel = F.masses[mask]
    if F.exact:
        return sel.sum() if sel.size else Fraction(0)
    return float(sel.sum())


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------

def _signed_grid(points: np.ndarray, signed: np.ndarray):
    reps, codes = [], []
    for j in range(points.shape[1]):
        u, inv = snap_axis(points[:, j])
        reps.append(u)
        codes.append(inv)
    sizes = tuple(len(u) for u in reps)
    return reps, codes, sizes


def _dense(codes, sizes, signed) -> np.ndarray:
    keys = np.ravel_multi_index(tuple(codes), sizes) if len(sizes) > 1 else codes[0]
    flat = aggregate(keys, signed, int(np.prod(sizes)))
    return flat.reshape(sizes)


def _abs_max(arr):
    if is_exact(arr):
        return max((abs(v) for v in arr.reshape(-1)), default=Fraction(0))
    return float(np.abs(arr).max()) if arr.size else 0.0


def kolmogorov(G: SparseDistribution, H: SparseDistribution):
    """sup_x |G(x) - H(x)| with G(x) the measure of the closed lower orthant at x."""
    pts, signed = _signed_union(G, H)
    _, codes, sizes = _signed_grid(pts, signed)
    if math.prod(sizes) > MAX_KOLMOGOROV_CELLS:
        raise ModeUnsupported(f"orthant grid of {math.prod(sizes)} cells is too large")
    grid = _dense(codes, sizes, signed)
    for axis in range(grid.ndim):
        grid = np.cumsum(grid, axis=axis)
    return _abs_max(grid)


def _interval_sup_1d(signed_sorted) -> float | Fraction:
    """sup over closed windows of |sum|, i.e. max prefix - min prefix with P_0 = 0."""
    prefix = np.cumsum(signed_sorted)
    if is_exact(prefix):
        vals = [Fraction(0)] + list(prefix)
        return max(vals) - min(vals)
    return float(max(prefix.max(), 0.0) - min(prefix.min(), 0.0)) if prefix.size else 0.0


def _box_sup_2d(A: np.ndarray):
    """sup over axis-aligned closed boxes of |sum A| for a dense 2-d signed array."""
    if A.shape[0] > A.shape[1]:
        A = A.T
    k1 = A.shape[0]
    if is_exact(A):
        best = Fraction(0)
        for i in range(k1):
            S = np.cumsum(A[i:], axis=0)
            for row in S:
                best = max(best, _interval_sup_1d(row))
        return best
    best = 0.0
    for i in range(k1):
        S = np.cumsum(A[i:], axis=0)
        P = np.cumsum(S, axis=1)
        hi = np.maximum(P.max(axis=1), 0.0)
        lo = np.minimum(P.min(axis=1), 0.0)
        best = max(best, float((hi - lo).max()))
    return best


def polyhedral_distance(G: SparseDistribution, H: SparseDistribution, directions,
                        mode: str = "exact", samples: int = 4096, seed: int = 0):
    """sup |G{X} - H{X}| over X in the family cut by the fixed directions t_1..t_m.

    ``exact`` handles m <= 2.  ``sampled`` evaluates quasi-random boxes in the
    projected coordinates and therefore returns a lower bound.
    """
    pts, signed = _signed_union(G, H)
    T = directions_array(directions, G.dim)
    m = T.shape[0]
    proj = pts @ T.T + 0.0
    _, codes, sizes = _signed_grid(proj, signed)
    if mode == "exact":
        if m == 1:
            return _interval_sup_1d(aggregate(codes[0], signed, sizes[0]))
        if m == 2:
            return _box_sup_2d(_dense(codes, sizes, signed))
        raise ModeUnsupported(f"exact mode supports m <= 2, got m = {m}")
    if mode == "sampled":
        return _sampled_box_sup(np.stack(codes, axis=1), to_float_masses(signed), sizes, samples, seed)
    raise ValueError(f"unknown mode {mode!r}")


def _sampled_box_sup(codes: np.ndarray, signed: np.ndarray, sizes, samples: int, seed: int) -> float:
    m = codes.shape[1]
    u = stats.qmc.Halton(d=2 * m, scramble=True, seed=seed).random(samples)
    sizes = np.asarray(sizes)
    ends = np.minimum((u * np.tile(sizes, 2)).astype(np.int64), np.tile(sizes - 1, 2))
    lo = np.minimum(ends[:, :m], ends[:, m:])
    hi = np.maximum(ends[:, :m], ends[:, m:])
    best = 0.0
    for start in range(0, samples, 256):
        l, h = lo[start:start + 256, None, :], hi[start:start + 256, None, :]
        inside = np.all((codes[None] >= l) & (codes[None] <= h), axis=2)
        best = max(best, float(np.abs(inside @ signed).max()))
    return best


def rho_m_lower_bound(G: SparseDistribution, H: SparseDistribution, m: int,
                      tuples: int = 32, seed: int = 0) -> float:
    """Randomized lower bound on the sup over all direction tuples (m <= 2 exact per tuple)."""
    rng = np.random.default_rng(seed)
    d = G.dim
    best = 0.0
    candidates = [np.eye(d)[:m]] if m <= d else []
    for _ in range(tuples):
        T = rng.standard_normal((m, d))
        candidates.append(T / np.linalg.norm(T, axis=1, keepdims=True))
    for T in candidates:
        mode = "exact" if m <= 2 else "sampled"
        best = max(best, float(polyhedral_distance(G, H, T, mode=mode, seed=seed)))
    return best


# ---------------------------------------------------------------------------
# concentration
# ---------------------------------------------------------------------------

def _concentration_sorted(x: np.ndarray, w: np.ndarray, b: float):
    order = np.argsort(x, kind="stable")
    x, w = x[order], w[order]
    cum = np.concatenate([np.array([w[:0].sum()], dtype=w.dtype), np.cumsum(w)])
    if not np.isfinite(b):
        return cum[-1]
    slack = 1e-12 * np.maximum(1.0, np.abs(x) + b)
    j = np.searchsorted(x, x + b + slack, side="right")
    # single-atom windows read the mass directly, so Q(F, 0) is the largest atom without rounding
    window = np.where(j - np.arange(len(x)) == 1, w, cum[j] - cum[:-1])
    return window.max()


def concentration_Q(F: SparseDistribution, b: float):
    """Q(F, b) = sup_x F{[x, x + b]}."""
    if F.dim != 1:
        raise DimensionMismatch("the concentration function needs a 1-d law")
    if b < 0:
        raise NegativeLength("interval length must be nonnegative")
    val = _concentration_sorted(F.points[:, 0], F.masses, b)
    return val if F.exact else float(val)


@dataclass(frozen=True)
class DirectionSearchConfig:
    samples: int = 64
    refine_steps: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")


@dataclass(frozen=True)
class QSearchResult:
    value: float
    direction: np.ndarray
    unbounded: bool
    evaluations: int


def sphere_directions(d: int, n: int, seed: int = 0) -> np.ndarray:
    """Deterministic low-discrepancy unit vectors with a seeded orientation."""
    if d == 1:
        return np.array([[1.0]])
    rng = np.random.default_rng(seed)
    if d == 2:
        theta = (np.arange(n) + rng.random()) / n * np.pi
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if d == 3:
        i = np.arange(n) + 0.5
        z = 1 - 2 * i / n
        phi = np.pi * (1 + 5**0.5) * i
        r = np.sqrt(1 - z**2)
        pts = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
        return Rotation.random(random_state=seed).apply(pts)
    u = stats.qmc.Sobol(d, scramble=True, seed=seed).random(n)
    g = stats.norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _golden_min(fn, lo: float, hi: float, iters: int = 12):
    phi = (5**0.5 - 1) / 2
    c, d = hi - phi * (hi - lo), lo + phi * (hi - lo)
    fc, fd = fn(c), fn(d)
    best = min((fc, c), (fd, d))
    for _ in range(iters):
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - phi * (hi - lo)
            fc = fn(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + phi * (hi - lo)
            fd = fn(d)
        best = min(best, (fc, c), (fd, d))
    return best


def search_q(H: SparseDistribution, X: Polyhedron, cfg: DirectionSearchConfig = DirectionSearchConfig()) -> QSearchResult:
    """Upper bound on q(H, X) = inf_t Q(<xi,t>, length of <X,t>) over unit t."""
    if H.dim != X.dim:
        raise DimensionMismatch(f"distribution dim {H.dim} vs polyhedron dim {X.dim}")
    w = to_float_masses(H.masses)
    evals = 0
    unbounded_seen = False

    def objective(t: np.ndarray) -> float:
        nonlocal evals, unbounded_seen
        evals += 1
        t = t / np.linalg.norm(t)
        length = projection_length(X, t)
        if not np.isfinite(length):
            unbounded_seen = True
            return 1.0
        return float(_concentration_sorted(H.points @ t, w, length))

    dirs = sphere_directions(H.dim, cfg.samples, cfg.seed)
    vals = [objective(t) for t in dirs]
    k = int(np.argmin(vals))
    best_val, best_t = vals[k], dirs[k]
    if H.dim > 1:
        width = 1.0 / cfg.samples ** (1.0 / (H.dim - 1))
        for _ in range(cfg.refine_steps):
            for i in range(H.dim):
                e = np.zeros(H.dim)
                e[i] = 1.0
                base = best_t.copy()
                val, s = _golden_min(lambda s: objective(base + s * e), -width, width)
                if val < best_val:
                    best_val, best_t = val, (base + s * e) / np.linalg.norm(base + s * e)
            width /= 2
    return QSearchResult(min(best_val, 1.0), best_t, unbounded_seen and best_val >= 1.0, evals)


def q_value(H: SparseDistribution, X: Polyhedron, cfg: DirectionSearchConfig = DirectionSearchConfig()) -> float:
    return search_q(H, X, cfg).value


__all__ = [
    "DirectionSearchConfig",
    "Polyhedron",
    "QSearchResult",
    "concentration_Q",
    "kolmogorov",
    "polyhedral_distance",
    "polyhedron_measure",
    "projection_length",
    "q_value",
    "rho_m_lower_bound",
    "search_q",
    "sphere_directions",
]
