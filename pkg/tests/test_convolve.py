from fractions import Fraction

import numpy as np
import pytest

import oracles
from polyconv.convolve import ConvolutionBudget, convolve, fft_convolve_arrays, power, power_sequence
from polyconv.dist import SparseDistribution, from_atoms, point_mass, total_variation
from polyconv.errors import BudgetExceeded, DimensionMismatch

H = Fraction(1, 2)
Q = Fraction(1, 4)


def random_lattice(rng, d, k=50, span=6, step=1.0):
    cells = (2 * span + 1) ** d
    flat = rng.choice(cells, size=min(k, cells), replace=False)
    idx = np.stack(np.unravel_index(flat, (2 * span + 1,) * d), axis=1) - span
    return SparseDistribution.from_arrays(step * idx.astype(float), rng.dirichlet(np.ones(len(flat))))


@pytest.fixture
def F():
    return from_atoms({-1: H, 1: H})


def test_unit(F):
    assert convolve(F, point_mass(0)).same_atoms(F)


def test_square_exact(F):
    assert convolve(F, F).atoms == {(-2.0,): Q, (0.0,): H, (2.0,): Q}


def test_cube_exact(F):
    F3 = power(F, 3)
    assert F3.atoms == {(-3.0,): Fraction(1, 8), (-1.0,): Fraction(3, 8),
                        (1.0,): Fraction(3, 8), (3.0,): Fraction(1, 8)}


def test_power_zero(F):
    assert power(F, 0).atoms == {(0.0,): 1}


@pytest.mark.parametrize("seed", range(20))
def test_fft_matches_direct(seed):
    rng = np.random.default_rng(seed)
    d = 1 + seed % 2
    step = [1.0, 0.5, 0.25][seed % 3]
    A, B = random_lattice(rng, d, step=step), random_lattice(rng, d, step=step)
    assert total_variation(convolve(A, B, "direct"), convolve(A, B, "fft")) <= 1e-12


def test_direct_matches_oracle():
    rng = np.random.default_rng(5)
    A, B = random_lattice(rng, 2, k=12, span=3), random_lattice(rng, 2, k=9, span=3)
    want = oracles.conv(oracles.as_dict(A), oracles.as_dict(B))
    assert oracles.tv(oracles.as_dict(convolve(A, B)), want) <= 1e-14


def test_power_matches_repeated_convolution():
    rng = np.random.default_rng(2)
    G = random_lattice(rng, 1, k=5, span=3)
    acc = point_mass(0)
    for n in range(1, 65):
        acc = convolve(acc, G)
        if n in (1, 2, 7, 31, 64):
            assert total_variation(power(G, n), acc) <= 1e-12


def test_power_sequence(F):
    out = power_sequence(F, [1, 2, 3])
    for n, P in zip([1, 2, 3], out):
        assert P.atoms == power(F, n).atoms
    assert power_sequence(F, [0])[0].atoms == {(0.0,): 1}
    with pytest.raises(ValueError):
        power_sequence(F, [3, 1])


def test_power_sequence_random_orders():
    rng = np.random.default_rng(9)
    G = random_lattice(rng, 1, k=4, span=2)
    ns = [1, 3, 64, 77, 128]
    for n, P in zip(ns, power_sequence(G, ns)):
        assert total_variation(P, power(G, n)) <= 1e-12


def test_dimension_mismatch(F):
    with pytest.raises(DimensionMismatch):
        convolve(F, point_mass((0, 0)))


def test_fft_arrays_linear_not_circular():
    out = fft_convolve_arrays(np.array([1.0, 0, 0, 1]), np.array([1.0, 1]))
    assert np.allclose(out, [1, 1, 0, 1, 1])


def test_budget_absorbs_and_rejects():
    b = ConvolutionBudget()
    vals = b.absorb(np.array([0.5, -1e-15, 0.5]))
    assert vals.min() == 0 and b.clamp_loss > 0
    with pytest.raises(BudgetExceeded):
        ConvolutionBudget().absorb(np.array([1.0, -1e-6]))


def test_non_lattice_falls_back_to_direct():
    G = from_atoms({0: 0.5, float(np.sqrt(2)): 0.5})
    P = power(G, 3)
    assert len(P) == 4
    assert P.mass_at([3 * np.sqrt(2)]) == pytest.approx(0.125)
