"""Acceptance criteria, one function per criterion, each returning a Verdict.

``run_all`` checks that every bundled config and corpus asset is readable,
then prints one PASS/FAIL line per criterion on the given stream.  Timings go
to stderr so that stdout is identical across runs.
"""

from __future__ import annotations

import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from .charfn import certify_alpha
from .cli import cmd_run
from .config import load_config
from .convolve import convolve, power_sequence
from .cpois import CompoundPoissonSpec, accompanying, compound_poisson
from .dist import SparseDistribution, from_atoms, mixture, point_mass, tensor, total_variation
from .errors import ConfigError
from .experiments.coupling import (
    comonotone_coupling,
    independent_coupling,
    optimal_coupling,
    theorem7_cost,
)
from .experiments.fitting import rate_fit
from .experiments.report import Verdict
from .experiments.scenarios import run_scenario
from .metrics import (
    DirectionSearchConfig,
    Polyhedron,
    concentration_Q,
    kolmogorov,
    polyhedral_distance,
    polyhedron_measure,
    q_value,
)

CONFIG_DIR = Path(__file__).parent / "configs"
SEED = 20240607
SLOPE_TOL = 0.15
IDENTITY_TAIL_EPS = 1e-15
RATE_NS = [8, 16, 32, 64, 128, 256, 512]


def bundled_configs() -> list[Path]:
    return sorted(CONFIG_DIR.glob("*.toml"))


def random_lattice_law(rng: np.random.Generator, d: int, max_atoms: int = 50,
                       span: int = 6, step: float = 1.0) -> SparseDistribution:
    """Random law on step * {-span..span}^d with at most ``max_atoms`` atoms."""
    cells = (2 * span + 1) ** d
    k = int(rng.integers(1, min(max_atoms, cells) + 1))
    flat = rng.choice(cells, size=k, replace=False)
    idx = np.stack(np.unravel_index(flat, (2 * span + 1,) * d), axis=1) - span
    return SparseDistribution.from_arrays(step * idx.astype(float), rng.dirichlet(np.ones(k)))


def random_counting_law(rng: np.random.Generator, max_atoms: int = 8, top: int = 30) -> dict[int, float]:
    k = int(rng.integers(1, max_atoms + 1))
    support = rng.choice(top, size=k, replace=False)
    return {int(s): float(p) for s, p in zip(support, rng.dirichlet(np.ones(k)))}


def _with_runtime(name: str, ok: bool, value, criterion: str, elapsed: float, limit: float | None) -> Verdict:
    if limit is not None:
        ok = ok and elapsed < limit
        criterion = f"{criterion}; runtime < {limit:g} s"
    return Verdict(name, bool(ok), None if value is None else float(value), criterion)


# ---------------------------------------------------------------------------

def criterion_1(limit: float | None = 10.0) -> Verdict:
    """fft vs direct convolution on 50 seeded lattice laws."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for _ in range(50):
        d = int(rng.integers(1, 3))
        step = float(rng.choice([1.0, 0.5, 0.25]))
        F = random_lattice_law(rng, d, step=step)
        G = random_lattice_law(rng, d, step=step)
        worst = max(worst, total_variation(convolve(F, G, "direct"), convolve(F, G, "fft")))
    return _with_runtime("1 oracle equivalence: convolution", worst <= 1e-12, worst,
                         "max TV(direct, fft) <= 1e-12 over 50 laws", time.perf_counter() - t0, limit)


def criterion_2(limit: float | None = 30.0) -> Verdict:
    """Mixture vs spectral compound Poisson, plus e((1-p)E + pV) = e(pV)."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 2)
    paths = 0.0
    bases = [random_lattice_law(rng, 1 if i < 14 else 2, max_atoms=8, span=3) for i in range(20)]
    for H in bases:
        for alpha in (0.5, 5.0, 50.0):
            spec = CompoundPoissonSpec(alpha, H)
            paths = max(paths, total_variation(compound_poisson(spec, "mixture"),
                                               compound_poisson(spec, "spectral")))
    ident = 0.0
    for H in bases[:6]:
        for alpha in (0.5, 5.0, 50.0):
            for p in (0.1, 0.5):
                lazy = mixture([(1 - p, point_mass(np.zeros(H.dim))), (p, H)])
                # the identity is exact, so only Poisson truncation separates the two sides
                ident = max(ident, total_variation(
                    compound_poisson(CompoundPoissonSpec(alpha, lazy, IDENTITY_TAIL_EPS)),
                    compound_poisson(CompoundPoissonSpec(alpha * p, H, IDENTITY_TAIL_EPS))))
    ok = paths <= 1e-11 and ident <= 1e-12
    return _with_runtime("2 oracle equivalence: compound Poisson", ok, max(paths, ident),
                         f"paths TV {paths:.2e} <= 1e-11, identity TV {ident:.2e} <= 1e-12",
                         time.perf_counter() - t0, limit)


def criterion_3(limit: float | None = None) -> Verdict:
    """Exact hand values for F = (E_{-1} + E_1)/2."""
    h = Fraction(1, 2)
    F = from_atoms({-1: h, 1: h})
    F2, F3 = power_sequence(F, [2, 3])
    F22 = tensor(F2, F2)
    strip = Polyhedron.from_constraints([((1, 1), 0, 4)])
    got = {
        "kolmogorov(F^2, F^3)": (kolmogorov(F2, F3), Fraction(1, 4)),
        "rho_1(F^2, F^3)": (polyhedral_distance(F2, F3, [[1]]), Fraction(1, 2)),
        "Q(F^2, 2)": (concentration_Q(F2, 2), Fraction(3, 4)),
        "F^2 x F^2 {0 <= x1 + x2 <= 4}": (polyhedron_measure(F22, strip), Fraction(11, 16)),
    }
    bad = [k for k, (v, want) in got.items() if not (isinstance(v, Fraction) and v == want)]
    return Verdict("3 exact hand values", not bad, len(bad),
                   "1/4, 1/2, 3/4, 11/16 as exact Fractions" + (f"; mismatched: {bad}" if bad else ""))


def _scenario_from_config(name: str):
    cfg = load_config(CONFIG_DIR / name)
    return run_scenario(cfg.scenario, cfg)


def criterion_4(limit: float | None = 20.0) -> Verdict:
    t0 = time.perf_counter()
    rep = _scenario_from_config("parity.toml")
    v = rep.verdicts[0]
    return _with_runtime("4 parity lower bound", rep.passed and len(rep.records) == 199, v.value,
                         "rho(F^n, F^(n+1)) >= Q(F^n, 0)/2 exactly, n = 2..200",
                         time.perf_counter() - t0, limit)


def criterion_5(limit: float | None = 60.0) -> Verdict:
    t0 = time.perf_counter()
    rep = _scenario_from_config("median.toml")
    worst = max(v.value for v in rep.verdicts)
    return _with_runtime("5 explicit constant 5.85", rep.passed and len(rep.verdicts) == 3, worst,
                         "max sqrt(n) rho(F^n, F^(n+1)) <= 5.85 for three median-centred laws",
                         time.perf_counter() - t0, limit)


def rate_slopes(ns=RATE_NS) -> dict[str, tuple[float, float]]:
    """Fitted slope and its target for the four rate windows."""
    h = 0.5
    F = from_atoms({-1: h, 1: h})
    G = convolve(F, F)
    H = mixture([(h, point_mass(0.0)), (h, F)])
    out = {}
    PF = dict(zip(sorted(set(ns) | {n + 2 for n in ns}),
                  power_sequence(F, sorted(set(ns) | {n + 2 for n in ns}))))
    PG = dict(zip(ns, power_sequence(G, ns)))
    PH = dict(zip(sorted(set(ns) | {n + 1 for n in ns}),
                  power_sequence(H, sorted(set(ns) | {n + 1 for n in ns}))))
    series = {
        "a rho(F^n, e(nF))": ([kolmogorov(PF[n], accompanying(F, n)) for n in ns], -0.5),
        "b rho(G^n, e(nG))": ([kolmogorov(PG[n], accompanying(G, n)) for n in ns], -1.0),
        "c rho(F^n, F^(n+2))": ([kolmogorov(PF[n], PF[n + 2]) for n in ns], -1.0),
        "d rho(H^n, H^(n+1))": ([kolmogorov(PH[n], PH[n + 1]) for n in ns], -1.0),
    }
    for key, (ys, target) in series.items():
        out[key] = (rate_fit(list(zip(ns, ys)), -target).slope, target)
    out["certified alpha(G)"] = (certify_alpha(G).alpha_lower, 1.0)
    out["certified alpha(H)"] = (certify_alpha(H).alpha_lower, 1.0)
    return out


def criterion_6(limit: float | None = 300.0) -> Verdict:
    t0 = time.perf_counter()
    res = rate_slopes()
    slopes = {k: v for k, v in res.items() if not k.startswith("certified")}
    bad = [k for k, (s, t) in slopes.items() if abs(s - t) > SLOPE_TOL]
    # G and H have nonnegative c.f.; the certificate must place them in F^(alpha) with alpha near 1
    cert_ok = all(res[k][0] >= 0.99 for k in ("certified alpha(G)", "certified alpha(H)"))
    worst = max(abs(s - t) for s, t in slopes.values())
    desc = ", ".join(f"{k.split()[0]} {s:+.3f}" for k, (s, _) in slopes.items())
    return _with_runtime("6 rate windows", not bad and cert_ok, worst,
                         f"|slope - target| <= {SLOPE_TOL} ({desc}); alpha(G), alpha(H) >= 0.99",
                         time.perf_counter() - t0, limit)


def criterion_7(limit: float | None = 120.0) -> Verdict:
    t0 = time.perf_counter()
    rep = _scenario_from_config("t2.toml")
    v = next(v for v in rep.verdicts if v.name == "p_linearity")
    return _with_runtime("7 linearity in p", 0.85 <= v.value <= 1.15, v.value,
                         "slope of rho_m(G, D) against p in [0.85, 1.15]", time.perf_counter() - t0, limit)


def order_properties(seed: int = SEED + 8) -> dict[str, float]:
    """Worst violation of each order property (<= 0 means it holds)."""
    rng = np.random.default_rng(seed)
    tv_gap = mono_gap = 0.0
    for _ in range(20):
        d = int(rng.integers(1, 3))
        G = random_lattice_law(rng, d, max_atoms=20, span=4)
        H = random_lattice_law(rng, d, max_atoms=20, span=4)
        tv = total_variation(G, H)
        T1 = np.eye(d)[:1]
        T2 = np.vstack([T1, rng.normal(size=(1, d))]) if d == 2 else np.array([[1.0], [1.0]])
        dists = [kolmogorov(G, H), polyhedral_distance(G, H, T1), polyhedral_distance(G, H, T2)]
        tv_gap = max(tv_gap, max(float(x) for x in dists) - tv - 1e-12)
        mono_gap = max(mono_gap, float(dists[1] - dists[2]) - 1e-12)

    q_range = q_mono = 0.0
    qcfg = DirectionSearchConfig(samples=32, refine_steps=0, seed=seed % 2**32)
    for _ in range(10):
        H = random_lattice_law(rng, 2, max_atoms=30, span=5)
        values = []
        for half in (4.0, 2.0, 1.0, 0.5, 0.0):
            values.append(q_value(H, Polyhedron.box([-half, -half / 2], [half, half / 2]), qcfg))
        q_range = max(q_range, max(-min(values), max(values) - 1.0))
        q_mono = max(q_mono, max(b - a for a, b in zip(values, values[1:])) - 1e-12)

    opt_gap = como_gap = 0.0
    for _ in range(20):
        U, V = random_counting_law(rng), random_counting_law(rng)
        for form in ("with_sqrt", "without_sqrt"):
            cost = theorem7_cost(1, 1.0, 1.0, form)
            o = optimal_coupling(U, V, cost).expect(cost)
            c = comonotone_coupling(U, V).expect(cost)
            i = independent_coupling(U, V).expect(cost)
            opt_gap = max(opt_gap, o - c - 1e-12, o - i - 1e-12)
            como_gap = max(como_gap, c - i - 1e-12)
    return {"distance <= TV": tv_gap, "direction monotone": mono_gap, "q in [0,1]": q_range,
            "q shrink monotone": q_mono, "optimal <= comonotone, independent": opt_gap,
            "comonotone <= independent": como_gap}


def criterion_8(limit: float | None = None) -> Verdict:
    gaps = order_properties()
    bad = [k for k, g in gaps.items() if g > 0]
    desc = "; ".join(f"{k}: {'ok' if g <= 0 else f'violated by {g:.3g}'}" for k, g in gaps.items())
    return Verdict("8 order properties", not bad, max(gaps.values()), desc)


def criterion_9(limit: float | None = None) -> Verdict:
    diffs = []
    with tempfile.TemporaryDirectory() as tmp:
        for path in bundled_configs():
            outs = []
            for rep in ("a", "b"):
                out = Path(tmp) / rep / path.stem
                with open(Path(tmp) / "log.txt", "a") as sink:
                    code = cmd_run(path, out=out, stream=sink)
                if code == 1:
                    diffs.append(f"{path.name}: run error")
                    break
                outs.append(sorted((p.name, p.read_bytes()) for p in out.iterdir()))
            if len(outs) == 2 and outs[0] != outs[1]:
                diffs.append(path.name)
    n = len(bundled_configs())
    return Verdict("9 determinism", not diffs and n > 0, len(diffs),
                   f"byte-identical reports on {n} bundled configs" + (f"; differing: {diffs}" if diffs else ""))


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


def check_assets() -> list[str]:
    """Load every bundled config; returns the problems found."""
    problems = []
    configs = bundled_configs()
    if not configs:
        problems.append(f"no bundled configs under {CONFIG_DIR}")
    for path in configs:
        try:
            load_config(path)
        except ConfigError as exc:
            problems.append(str(exc))
    return problems


def run_all(stream=sys.stdout) -> int:
    problems = check_assets()
    if problems:
        for p in problems:
            print(f"polyconv: error: missing or invalid asset: {p}", file=sys.stderr)
        return 1
    ok = True
    for fn in CRITERIA:
        t0 = time.perf_counter()
        try:
            v = fn()
        except Exception as exc:  # an exception is a failed criterion, not a crash of the suite
            v = Verdict(fn.__name__, False, None, f"raised {type(exc).__name__}: {exc}")
        print(v.line(), file=stream, flush=True)
        print(f"  [{fn.__name__}: {time.perf_counter() - t0:.1f} s]", file=sys.stderr)
        ok = ok and v.passed
    return 0 if ok else 2
