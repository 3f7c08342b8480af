"""Finitely supported distributions on R^d and the measure-level primitives.

Two carriers are provided:

* :class:`SparseDistribution` -- sorted unique atoms plus masses.  Masses are
  either ``float64`` or exact :class:`fractions.Fraction` objects (``object``
  dtype); exact masses survive every operation that does not need floating
  point (direct convolution, projection, mixtures with rational weights).
* :class:`GridDistribution` -- a dense mass array over an integer-lattice box,
  the representation the FFT paths work on.

Coordinates are always stored as ``float64``.  Integer and dyadic coordinates
are therefore exact, and coincident images are merged with a relative
tolerance of ``MERGE_TOL``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    IncompatibleLattice,
    InvalidDistribution,
    NegativeWeight,
    WeightSumMismatch,
)

ZERO_CLAMP = 1e-15
MASS_TOL = 1e-12
MERGE_TOL = 1e-12
LATTICE_DENOM = 10**9
LATTICE_MAX_CELLS = 10**8


# ---------------------------------------------------------------------------
# mass arrays
# ---------------------------------------------------------------------------

def _is_exact_scalar(v) -> bool:
    return isinstance(v, Rational) and not isinstance(v, bool)


def as_mass_array(values: Iterable) -> np.ndarray:
    """Exact ``object`` array when every value is rational, else ``float64``."""
    vals = list(values)
    if isinstance(values, np.ndarray) and values.dtype != object:
        return np.asarray(values, dtype=float)
    if vals and all(_is_exact_scalar(v) for v in vals):
        return np.array([Fraction(v) for v in vals], dtype=object)
    return np.array([float(v) for v in vals], dtype=float)


def is_exact(masses: np.ndarray) -> bool:
    return masses.dtype == object


def to_float_masses(masses: np.ndarray) -> np.ndarray:
    if masses.dtype == object:
        return np.array([float(v) for v in masses], dtype=float)
    return masses


def coerce_pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if is_exact(a) and is_exact(b):
        return a, b
    return to_float_masses(a), to_float_masses(b)


def _parse_number(v) -> float | Fraction:
    if isinstance(v, str):
        s = v.strip()
        if s.lower() in ("inf", "+inf", "infinity"):
            return math.inf
        if s.lower() in ("-inf", "-infinity"):
            return -math.inf
        return Fraction(s)
    return v


# ---------------------------------------------------------------------------
# grouping of atoms
# ---------------------------------------------------------------------------

def snap_axis(values: np.ndarray, tol: float = MERGE_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Cluster nearly equal coordinates; return (sorted representatives, inverse)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return values.copy(), np.zeros(0, dtype=np.int64)
    order = np.argsort(values, kind="stable")
    s = values[order]
    gaps = np.diff(s) > tol * np.maximum(1.0, np.abs(s[1:]))
    starts = np.concatenate([[True], gaps])
    group = np.cumsum(starts) - 1
    inverse = np.empty(values.size, dtype=np.int64)
    inverse[order] = group
    return s[starts], inverse


def aggregate(inverse: np.ndarray, masses: np.ndarray, size: int) -> np.ndarray:
    """Sum ``masses`` by group label; works for float and exact masses."""
    if not is_exact(masses):
        return np.bincount(inverse, weights=masses, minlength=size)
    out = np.empty(size, dtype=object)
    out[:] = Fraction(0)
    if inverse.size == 0:
        return out
    order = np.argsort(inverse, kind="stable")
    inv_sorted = inverse[order]
    starts = np.flatnonzero(np.concatenate([[True], np.diff(inv_sorted) != 0]))
    sums = np.add.reduceat(masses[order], starts)
    out[inv_sorted[starts]] = sums
    return out


def group_atoms(points: np.ndarray, masses: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Merge coincident points (per-axis tolerance); output sorted lexicographically."""
    points = np.asarray(points, dtype=float)
    k, d = points.shape
    if k == 0:
        return points.reshape(0, d), masses[:0]
    reps, codes = [], []
    for j in range(d):
        u, inv = snap_axis(points[:, j])
        reps.append(u)
        codes.append(inv)
    sizes = [len(u) for u in reps]
    if math.prod(sizes) < 2**62:
        keys = np.ravel_multi_index(tuple(codes), sizes) if d > 1 else codes[0]
        ukeys, inverse = np.unique(keys, return_inverse=True)
        idx = np.unravel_index(ukeys, sizes) if d > 1 else (ukeys,)
    else:
        stacked = np.stack(codes, axis=1)
        ukeys, inverse = np.unique(stacked, axis=0, return_inverse=True)
        idx = tuple(ukeys[:, j] for j in range(d))
    inverse = inverse.reshape(-1)
    new_points = np.stack([reps[j][idx[j]] for j in range(d)], axis=1)
    new_masses = aggregate(inverse, masses, len(new_points))
    return new_points, new_masses


# ---------------------------------------------------------------------------
# sparse distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SparseDistribution:
    """Finitely supported (sub-)probability measure on R^d.

    Use :meth:`from_arrays` or :func:`from_atoms` to build one; the raw
    constructor expects already merged, sorted atoms.
    """

    points: np.ndarray
    masses: np.ndarray
    mass_defect: float | Fraction = 0.0

    def __post_init__(self):
        pts = self.points
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise InvalidDistribution("points must be a (K, d) array with d >= 1")
        if self.masses.shape != (pts.shape[0],):
            raise InvalidDistribution("one mass per point required")
        if self.masses.size and self.masses.min() < 0:
            raise InvalidDistribution("masses must be nonnegative")
        if self.mass_defect < 0:
            raise InvalidDistribution("mass_defect must be nonnegative")
        total = float(self.masses.sum()) + float(self.mass_defect)
        if abs(total - 1.0) > MASS_TOL:
            raise InvalidDistribution(f"total mass {total!r} + defect is not 1")

    @classmethod
    def from_arrays(cls, points, masses, mass_defect=0.0, clamp: bool = True) -> "SparseDistribution":
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.size == 0:
            points = points.reshape(0, max(points.shape[-1], 1))
        masses = masses if isinstance(masses, np.ndarray) else as_mass_array(masses)
        if points.shape[0] != masses.shape[0]:
            raise InvalidDistribution("one mass per point required")
        points, masses = group_atoms(points, masses)
        defect = mass_defect
        if is_exact(masses):
            keep = masses != 0
            if _is_exact_scalar(defect) or defect == 0:
                defect = Fraction(defect)
        else:
            if masses.size and masses.min() < -ZERO_CLAMP:
                raise InvalidDistribution("negative mass below clamp threshold")
            keep = masses >= ZERO_CLAMP if clamp else masses > 0
            dropped = float(masses[~keep & (masses > 0)].sum())
            defect = float(defect) + dropped
        return cls(points[keep], masses[keep], defect)

    # -- basic properties -------------------------------------------------
    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def exact(self) -> bool:
        return is_exact(self.masses)

    @property
    def total_mass(self):
        return self.masses.sum() if self.exact else float(self.masses.sum())

    @property
    def atoms(self) -> dict[tuple[float, ...], float | Fraction]:
        return {tuple(float(c) for c in p): m for p, m in zip(self.points, self.masses)}

    def mass_at(self, point) -> float | Fraction:
        p = np.atleast_1d(np.asarray(point, dtype=float))
        if p.shape != (self.dim,):
            raise DimensionMismatch(f"point has dim {p.size}, distribution has dim {self.dim}")
        hit = np.all(np.abs(self.points - p) <= MERGE_TOL * np.maximum(1.0, np.abs(p)), axis=1)
        if not hit.any():
            return Fraction(0) if self.exact else 0.0
        return self.masses[np.flatnonzero(hit)[0]]

    def to_float(self) -> "SparseDistribution":
        if not self.exact:
            return self
        return SparseDistribution(self.points, to_float_masses(self.masses), float(self.mass_defect))

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.points.min(axis=0), self.points.max(axis=0)

    def same_atoms(self, other: "SparseDistribution", tol: float = 0.0) -> bool:
        if self.dim != other.dim or len(self) != len(other):
            return False
        if not np.array_equal(self.points, other.points):
            return False
        if tol == 0.0 and self.exact and other.exact:
            return bool(np.all(self.masses == other.masses))
        a, b = coerce_pair(self.masses, other.masses)
        return bool(np.all(np.abs(a - b) <= tol))

    def __repr__(self) -> str:
        if len(self) <= 6:
            body = ", ".join(
                f"{_fmt_point(p)}: {m}" for p, m in zip(self.points, self.masses)
            )
        else:
            body = f"{len(self)} atoms"
        kind = "exact" if self.exact else "float"
        return f"SparseDistribution(dim={self.dim}, {kind}, {{{body}}}, defect={float(self.mass_defect):.3g})"


def _fmt_point(p) -> str:
    vals = [int(c) if float(c).is_integer() else float(c) for c in p]
    return str(vals[0]) if len(vals) == 1 else str(tuple(vals))


def _coerce_point(p, dim: int | None = None) -> np.ndarray:
    if isinstance(p, (int, float, Fraction, np.number, str)):
        p = [p]
    arr = np.array([float(_parse_number(c)) for c in p], dtype=float)
    if dim is not None and arr.shape != (dim,):
        raise DimensionMismatch(f"expected a {dim}-vector, got {len(arr)} coordinates")
    return arr


def from_atoms(atoms: Mapping | Iterable, dim: int | None = None) -> SparseDistribution:
    """Build from ``{point: mass}`` or an iterable of ``(point, mass)`` pairs.

    Scalar points are promoted to 1-vectors.  Masses given as ``int`` or
    ``Fraction`` (or strings like ``"1/4"``) stay exact.
    """
    items = list(atoms.items()) if isinstance(atoms, Mapping) else list(atoms)
    if not items:
        raise InvalidDistribution("a distribution needs at least one atom")
    pts = [_coerce_point(p) for p, _ in items]
    d = dim or len(pts[0])
    if any(len(p) != d for p in pts):
        raise DimensionMismatch("all points must have the same dimension")
    masses = as_mass_array([_parse_number(m) for _, m in items])
    return SparseDistribution.from_arrays(np.array(pts), masses)


def from_literal(obj) -> SparseDistribution:
    """Parse the config literal: list of ``{point, mass}`` records, or a grid form.

    The grid form is ``{step: [...], offset: [...], masses: nested list}``.
    """
    if isinstance(obj, Mapping) and "masses" in obj:
        masses = np.array(obj["masses"], dtype=object)
        d = masses.ndim
        step = _coerce_point(obj.get("step", [1] * d), d)
        offset = _coerce_point(obj.get("offset", [0] * d), d)
        flat = as_mass_array([_parse_number(v) for v in masses.reshape(-1)])
        grid = GridDistribution(step, offset, (0,) * d, flat.reshape(masses.shape))
        return grid.to_sparse()
    if isinstance(obj, Mapping) and "atoms" in obj:
        obj = obj["atoms"]
    try:
        return from_atoms([(r["point"], r["mass"]) for r in obj])
    except (KeyError, TypeError) as exc:
        raise InvalidDistribution(f"bad distribution literal: {exc}") from exc


def to_literal(F: SparseDistribution) -> list[dict]:
    out = []
    for p, m in zip(F.points, F.masses):
        mass = str(m) if isinstance(m, Fraction) else float(m)
        out.append({"point": [float(c) for c in p], "mass": mass})
    return out


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------

def point_mass(x) -> SparseDistribution:
    """Dirac law at ``x``; exact unit mass."""
    p = _coerce_point(x)
    return SparseDistribution(p.reshape(1, -1) + 0.0, np.array([Fraction(1)], dtype=object), Fraction(0))


def shift(F: SparseDistribution, v) -> SparseDistribution:
    v = _coerce_point(v, F.dim)
    return SparseDistribution.from_arrays(F.points + v, F.masses, F.mass_defect)


def reflect(F: SparseDistribution) -> SparseDistribution:
    return SparseDistribution.from_arrays(-F.points + 0.0, F.masses, F.mass_defect)


def mixture(components: Sequence[tuple]) -> SparseDistribution:
    """Weighted sum of distributions, e.g. ``(1-p)E + pV``."""
    if not components:
        raise InvalidDistribution("mixture needs at least one component")
    weights = [_parse_number(w) for w, _ in components]
    dists = [F for _, F in components]
    if any(w < 0 for w in weights):
        raise NegativeWeight("mixture weights must be nonnegative")
    wsum = sum(weights)
    exact_weights = all(_is_exact_scalar(w) for w in weights)
    if (exact_weights and wsum != 1) or abs(float(wsum) - 1.0) > MASS_TOL:
        raise WeightSumMismatch(f"weights sum to {float(wsum)!r}, not 1")
    d = dists[0].dim
    if any(F.dim != d for F in dists):
        raise DimensionMismatch("mixture components must share a dimension")
    exact = exact_weights and all(F.exact for F in dists)
    pts, ms, defect = [], [], 0
    for w, F in zip(weights, dists):
        if exact:
            ms.append(F.masses * Fraction(w))
            defect += Fraction(w) * Fraction(F.mass_defect)
        else:
            ms.append(to_float_masses(F.masses) * float(w))
            defect += float(w) * float(F.mass_defect)
        pts.append(F.points)
    masses = np.concatenate(ms) if exact else np.concatenate(ms).astype(float)
    return SparseDistribution.from_arrays(np.concatenate(pts), masses, defect)


def symmetrize(V: SparseDistribution) -> SparseDistribution:
    """(V + reflect(V)) / 2, whose characteristic function is Re V^."""
    half = Fraction(1, 2) if V.exact else 0.5
    return mixture([(half, V), (half, reflect(V))])


def tensor(F: SparseDistribution, G: SparseDistribution) -> SparseDistribution:
    """Product measure F (x) G on R^(dF + dG)."""
    i, j = np.meshgrid(np.arange(len(F)), np.arange(len(G)), indexing="ij")
    i, j = i.reshape(-1), j.reshape(-1)
    pts = np.concatenate([F.points[i], G.points[j]], axis=1)
    a, b = coerce_pair(F.masses, G.masses)
    masses = a[i] * b[j]
    dF, dG = F.mass_defect, G.mass_defect
    if not (F.exact and G.exact):
        dF, dG = float(dF), float(dG)
    return SparseDistribution.from_arrays(pts, masses, dF + dG - dF * dG)


def directions_array(directions, dim: int) -> np.ndarray:
    T = np.asarray([_coerce_point(t) for t in directions], dtype=float)
    if T.ndim != 2 or T.shape[0] < 1:
        raise DimensionMismatch("need at least one direction")
    if T.shape[1] != dim:
        raise DimensionMismatch(f"directions have dim {T.shape[1]}, distribution has dim {dim}")
    return T


def project(F: SparseDistribution, directions) -> SparseDistribution:
    """Image of F under x -> (<x,t_1>, ..., <x,t_m>)."""
    T = directions_array(directions, F.dim)
    images = F.points @ T.T + 0.0
    return SparseDistribution.from_arrays(images, F.masses, F.mass_defect, clamp=False)


def _signed_union(F: SparseDistribution, G: SparseDistribution):
    if F.dim != G.dim:
        raise DimensionMismatch(f"dims differ: {F.dim} vs {G.dim}")
    a, b = coerce_pair(F.masses, G.masses)
    pts = np.concatenate([F.points, G.points])
    return pts, np.concatenate([a, -b])


def total_variation(F: SparseDistribution, G: SparseDistribution):
    pts, signed = _signed_union(F, G)
    _, diff = group_atoms(pts, signed)
    return sum(abs(diff)) / 2 if is_exact(diff) else float(np.abs(diff).sum() / 2)


def median_interval(values: np.ndarray, masses: np.ndarray) -> tuple[float, float]:
    """[inf{m: P(X<=m) >= 1/2}, sup{m: P(X>=m) >= 1/2}] for a discrete law."""
    order = np.argsort(values, kind="stable")
    x = values[order]
    w = masses[order]
    half = Fraction(1, 2) if is_exact(w) else 0.5 - 1e-12
    cdf = np.cumsum(w)
    surv = np.cumsum(w[::-1])[::-1]
    lower = x[np.flatnonzero(cdf >= half)[0]]
    upper = x[np.flatnonzero(surv >= half)[-1]]
    return float(lower), float(upper)


def median_center(F: SparseDistribution) -> SparseDistribution:
    """Shift every marginal so that the midpoint of its median interval is 0."""
    shift_vec = np.empty(F.dim)
    for j in range(F.dim):
        lo, hi = median_interval(F.points[:, j], F.masses)
        shift_vec[j] = (lo + hi) / 2
    return SparseDistribution.from_arrays(F.points - shift_vec + 0.0, F.masses, F.mass_defect)


# ---------------------------------------------------------------------------
# lattices and grid distributions
# ---------------------------------------------------------------------------

def _to_fraction(x: float) -> Fraction:
    f = Fraction(float(x)).limit_denominator(LATTICE_DENOM)
    if abs(float(f) - x) > 1e-9 * max(1.0, abs(x)):
        raise IncompatibleLattice(f"coordinate difference {x!r} is not a bounded-denominator rational")
    return f


def _fraction_gcd(a: Fraction, b: Fraction) -> Fraction:
    return Fraction(math.gcd(a.numerator * b.denominator, b.numerator * a.denominator),
                    a.denominator * b.denominator)


def lattice_step(*value_arrays: np.ndarray, origin: bool = False) -> float | None:
    """Largest h such that every array lies in one coset of hZ (hZ itself if ``origin``).

    Returns ``None`` when every array is a single point (any step works).
    """
    g = None
    spread = 0.0
    for values in value_arrays:
        u, _ = snap_axis(np.asarray(values, dtype=float))
        diffs = np.diff(u)
        if origin:
            diffs = np.concatenate([diffs, u[:1]])
        diffs = np.abs(diffs[np.abs(diffs) > 0])
        if diffs.size == 0:
            continue
        spread = max(spread, float(diffs.max()), float(u[-1] - u[0]))
        h0 = diffs.min()
        ratio = diffs / h0
        if g is None and np.all(np.abs(ratio - np.rint(ratio)) <= 1e-9 * np.maximum(1.0, ratio)):
            cand = _to_fraction(h0)
        else:
            distinct, _ = snap_axis(diffs, tol=1e-10)
            cand = None
            for v in distinct:
                fv = _to_fraction(v)
                cand = fv if cand is None else _fraction_gcd(cand, fv)
        g = cand if g is None else _fraction_gcd(g, cand)
    if g is None:
        return None
    if float(g) <= 0:
        raise IncompatibleLattice("degenerate lattice step")
    # any float set has a tiny rational "step"; only coarse lattices are useful
    if spread / float(g) > LATTICE_MAX_CELLS:
        raise IncompatibleLattice(f"common step {float(g):.3g} is below 1/{LATTICE_MAX_CELLS:.0e} of the spread")
    return float(g)


def lattice_indices(values: np.ndarray, step: float, offset: float) -> np.ndarray:
    raw = (np.asarray(values, dtype=float) - offset) / step
    idx = np.rint(raw)
    if np.any(np.abs(raw - idx) > 1e-7):
        raise IncompatibleLattice(f"points do not lie on {offset} + {step}Z")
    return idx.astype(np.int64)


@dataclass(frozen=True, eq=False)
class GridDistribution:
    """Dense masses on the lattice box ``offset + step * (lo + index)``."""

    step: np.ndarray
    offset: np.ndarray
    lo: tuple[int, ...]
    masses: np.ndarray
    mass_defect: float | Fraction = 0.0

    def __post_init__(self):
        if self.masses.ndim != len(self.step) or len(self.lo) != len(self.step):
            raise InvalidDistribution("grid shape and step disagree")
        if np.any(np.asarray(self.step) <= 0):
            raise InvalidDistribution("steps must be positive")
        if self.masses.size and self.masses.min() < 0:
            raise InvalidDistribution("masses must be nonnegative")
        total = float(self.masses.sum()) + float(self.mass_defect)
        if abs(total - 1.0) > MASS_TOL:
            raise InvalidDistribution(f"total mass {total!r} + defect is not 1")

    @property
    def dim(self) -> int:
        return len(self.step)

    def to_sparse(self) -> SparseDistribution:
        if is_exact(self.masses):
            nz = np.nonzero(self.masses != 0)
        else:
            nz = np.nonzero(self.masses > 0)
        idx = np.stack(nz, axis=1) + np.asarray(self.lo)
        pts = self.offset + self.step * idx
        return SparseDistribution.from_arrays(pts, self.masses[nz], self.mass_defect)

    @classmethod
    def from_sparse(cls, F: SparseDistribution, step=None, offset=None) -> "GridDistribution":
        d = F.dim
        if step is None:
            step = [lattice_step(F.points[:, j]) or 1.0 for j in range(d)]
        step = np.asarray(step, dtype=float)
        if offset is None:
            offset = F.points.min(axis=0)
        offset = np.asarray(offset, dtype=float)
        idx = np.stack([lattice_indices(F.points[:, j], step[j], offset[j]) for j in range(d)], axis=1)
        lo = idx.min(axis=0)
        shape = tuple(idx.max(axis=0) - lo + 1)
        if F.exact:
            arr = np.empty(shape, dtype=object)
            arr[...] = Fraction(0)
        else:
            arr = np.zeros(shape)
        arr[tuple((idx - lo).T)] = F.masses
        return cls(step, offset, tuple(int(v) for v in lo), arr, F.mass_defect)
