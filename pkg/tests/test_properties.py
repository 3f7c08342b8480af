"""Property-based checks of the algebraic and metric invariants."""

from fractions import Fraction

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from polyconv.charfn import cf_eval, is_symmetric
from polyconv.convolve import convolve, power
from polyconv.cpois import CompoundPoissonSpec, compound_poisson
from polyconv.dist import SparseDistribution, from_atoms, point_mass, reflect, symmetrize, total_variation
from polyconv.experiments.fitting import rate_fit
from polyconv.metrics import concentration_Q, kolmogorov, polyhedral_distance

SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def lattice_laws(draw, dim=None, max_atoms=8, span=4):
    d = dim or draw(st.integers(1, 2))
    coords = st.tuples(*[st.integers(-span, span)] * d)
    pts = draw(st.lists(coords, min_size=1, max_size=max_atoms, unique=True))
    w = np.array(draw(st.lists(st.integers(1, 20), min_size=len(pts), max_size=len(pts))), dtype=float)
    return SparseDistribution.from_arrays(np.array(pts, dtype=float), w / w.sum())


@st.composite
def law_pairs(draw):
    d = draw(st.integers(1, 2))
    return draw(lattice_laws(dim=d)), draw(lattice_laws(dim=d))


@st.composite
def exact_laws(draw):
    pts = draw(st.lists(st.integers(-5, 5), min_size=1, max_size=6, unique=True))
    w = draw(st.lists(st.integers(1, 9), min_size=len(pts), max_size=len(pts)))
    return from_atoms({p: Fraction(x, sum(w)) for p, x in zip(pts, w)})


@SETTINGS
@given(law_pairs())
def test_convolution_commutes_and_keeps_mass(pair):
    A, B = pair
    AB, BA = convolve(A, B), convolve(B, A)
    assert total_variation(AB, BA) <= 1e-14
    assert abs(float(AB.total_mass) + float(AB.mass_defect) - 1) <= 1e-12
    assert total_variation(convolve(A, B, "fft"), convolve(A, B, "direct")) <= 1e-12


@SETTINGS
@given(law_pairs())
def test_cf_of_convolution_is_product(pair):
    A, B = pair
    t = np.linspace(-2, 2, 5)
    T = np.stack([t] * A.dim, axis=1)
    assert np.allclose(cf_eval(convolve(A, B), T), cf_eval(A, T) * cf_eval(B, T), atol=1e-13)


@SETTINGS
@given(lattice_laws())
def test_reflection_and_symmetrization(A):
    assert reflect(reflect(A)).same_atoms(A)
    S = symmetrize(A)
    assert is_symmetric(S)
    assert abs(cf_eval(S, np.zeros(A.dim)) - 1) <= 1e-14


@SETTINGS
@given(law_pairs())
def test_distances_bounded_by_tv(pair):
    A, B = pair
    tv = total_variation(A, B)
    T1 = np.eye(A.dim)[:1]
    T2 = np.eye(A.dim) if A.dim == 2 else np.array([[1.0], [2.0]])
    r1, r2 = polyhedral_distance(A, B, T1), polyhedral_distance(A, B, T2)
    assert 0 <= kolmogorov(A, B) <= tv + 1e-12
    assert r1 <= r2 + 1e-12 <= tv + 2e-12
    assert abs(kolmogorov(A, B) - kolmogorov(B, A)) <= 1e-15
    assert abs(r2 - polyhedral_distance(B, A, T2)) <= 1e-15


@SETTINGS
@given(lattice_laws(dim=1), lattice_laws(dim=1), lattice_laws(dim=1))
def test_kolmogorov_triangle(A, B, C):
    assert kolmogorov(A, C) <= kolmogorov(A, B) + kolmogorov(B, C) + 1e-12


@SETTINGS
@given(exact_laws(), exact_laws())
def test_exact_inputs_give_exact_distances(A, B):
    assert isinstance(kolmogorov(A, B), (Fraction, int))
    assert isinstance(polyhedral_distance(A, B, [[1]]), (Fraction, int))


@SETTINGS
@given(lattice_laws(dim=1), st.floats(0, 5), st.floats(0, 5))
def test_concentration_monotone(A, b1, b2):
    lo, hi = sorted((b1, b2))
    assert concentration_Q(A, lo) <= concentration_Q(A, hi) + 1e-15
    assert concentration_Q(A, 0) == float(A.masses.max())
    assert 0 < concentration_Q(A, hi) <= 1 + 1e-12


@SETTINGS
@given(lattice_laws(max_atoms=4, span=2), st.floats(0.1, 10))
def test_compound_poisson_cf_identity(H, alpha):
    D = compound_poisson(CompoundPoissonSpec(alpha, H))
    t = np.linspace(-3, 3, 7)
    T = np.stack([t] * H.dim, axis=1)
    want = np.exp(alpha * (cf_eval(H, T) - 1))
    assert np.max(np.abs(cf_eval(D, T) - want)) <= 1e-10


@SETTINGS
@given(lattice_laws(dim=1, max_atoms=4, span=2), st.integers(0, 12))
def test_power_is_repeated_convolution(A, n):
    acc = point_mass(0)
    for _ in range(n):
        acc = convolve(acc, A)
    assert total_variation(power(A, n), acc) <= 1e-12


@SETTINGS
@given(st.floats(0.1, 2.0), st.floats(0.01, 100))
def test_rate_fit_recovers_exponent(beta, c):
    fit = rate_fit([(n, c * n**-beta) for n in (8, 32, 128, 512)], beta)
    assert abs(fit.slope + beta) <= 1e-9
    assert abs(fit.constant - c) <= 1e-9 * c
