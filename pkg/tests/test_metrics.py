import math
from fractions import Fraction

import numpy as np
import pytest

import oracles
from polyconv.convolve import power_sequence
from polyconv.dist import SparseDistribution, from_atoms, point_mass, tensor, total_variation
from polyconv.errors import DimensionMismatch, ModeUnsupported, NegativeLength
from polyconv.metrics import (
    DirectionSearchConfig,
    Polyhedron,
    concentration_Q,
    kolmogorov,
    polyhedral_distance,
    polyhedron_measure,
    projection_length,
    q_value,
    rho_m_lower_bound,
    search_q,
    sphere_directions,
)

H = Fraction(1, 2)
F = from_atoms({-1: H, 1: H})
F2, F3 = power_sequence(F, [2, 3])


def random_law(rng, d, k=12, span=3):
    cells = (2 * span + 1) ** d
    k = min(k, cells)
    flat = rng.choice(cells, size=k, replace=False)
    idx = np.stack(np.unravel_index(flat, (2 * span + 1,) * d), axis=1) - span
    return SparseDistribution.from_arrays(idx.astype(float), rng.dirichlet(np.ones(k)))


def test_kolmogorov_hand_values():
    assert kolmogorov(F, F) == 0
    assert kolmogorov(point_mass(0), point_mass(1)) == 1
    got = kolmogorov(F2, F3)
    assert isinstance(got, Fraction) and got == Fraction(1, 4)


@pytest.mark.parametrize("d", [1, 2])
def test_kolmogorov_matches_oracle(d):
    rng = np.random.default_rng(d)
    for _ in range(5):
        A, B = random_law(rng, d), random_law(rng, d)
        want = oracles.kolmogorov(oracles.as_dict(A), oracles.as_dict(B))
        assert kolmogorov(A, B) == pytest.approx(want, abs=1e-14)


def test_polyhedron_measure():
    assert polyhedron_measure(F, Polyhedron.box([0], [2])) == H
    strip = Polyhedron.from_constraints([((1, 1), 0, 4)])
    assert polyhedron_measure(tensor(F2, F2), strip) == Fraction(11, 16)
    assert polyhedron_measure(F2, Polyhedron.whole_space(1)) == 1
    with pytest.raises(DimensionMismatch):
        polyhedron_measure(F, Polyhedron.box([0, 0], [1, 1]))


def test_polyhedral_distance_hand_values():
    assert polyhedral_distance(F, F, [[1]]) == 0
    assert polyhedral_distance(F2, F3, [[1]]) == H
    assert polyhedral_distance(tensor(F2, F2), tensor(F3, F3), [[1, 0]]) == H


def test_polyhedral_distance_matches_oracles():
    rng = np.random.default_rng(11)
    for _ in range(5):
        A, B = random_law(rng, 2), random_law(rng, 2)
        t = rng.normal(size=2)
        assert polyhedral_distance(A, B, [t]) == pytest.approx(
            oracles.interval_distance(oracles.as_dict(A), oracles.as_dict(B), t), abs=1e-14)
        T = np.array([[1.0, 0.0], [1.0, 1.0]])
        assert polyhedral_distance(A, B, T) == pytest.approx(
            oracles.box_distance(oracles.as_dict(A), oracles.as_dict(B), T), abs=1e-14)


def test_polyhedral_distance_modes():
    rng = np.random.default_rng(3)
    A, B = random_law(rng, 2), random_law(rng, 2)
    T = np.eye(2)
    exact = polyhedral_distance(A, B, T)
    assert polyhedral_distance(A, B, T, mode="sampled", samples=512) <= exact + 1e-12
    with pytest.raises(ModeUnsupported):
        polyhedral_distance(A, B, [[1, 0], [0, 1], [1, 1]])
    sampled3 = polyhedral_distance(A, B, [[1, 0], [0, 1], [1, 1]], mode="sampled", samples=256)
    assert 0 <= sampled3 <= total_variation(A, B) + 1e-12
    assert exact <= rho_m_lower_bound(A, B, 2, tuples=8) <= total_variation(A, B) + 1e-12


def test_kolmogorov_below_orthant_boxes():
    rng = np.random.default_rng(4)
    for _ in range(5):
        A, B = random_law(rng, 2), random_law(rng, 2)
        assert kolmogorov(A, B) <= polyhedral_distance(A, B, np.eye(2)) + 1e-12


def test_concentration():
    assert concentration_Q(point_mass(0), 3.0) == 1
    assert concentration_Q(F, 0) == H
    assert concentration_Q(F2, 2) == Fraction(3, 4)
    with pytest.raises(NegativeLength):
        concentration_Q(F, -1)
    rng = np.random.default_rng(0)
    G = random_law(rng, 1, k=7)
    for b in (0, 0.5, 1, 2.5, 7):
        assert concentration_Q(G, b) == pytest.approx(oracles.concentration(oracles.as_dict(G), b))


def test_projection_length():
    X = Polyhedron.box([0, 0], [1, 1])
    assert projection_length(X, [1, 0]) == pytest.approx(1)
    assert projection_length(X, [1 / math.sqrt(2), 1 / math.sqrt(2)]) == pytest.approx(math.sqrt(2))
    half = Polyhedron.from_constraints([((1, 0), 0, math.inf)])
    assert projection_length(half, [1, 0]) == math.inf
    assert projection_length(half, [0, 1]) == math.inf
    with pytest.raises(ValueError):
        projection_length(X, [1, 1])


def test_polyhedron_literal_round_trip():
    X = Polyhedron.from_literal({"constraints": [{"t": [1, 1], "a": "-inf", "b": 2}, {"t": [1, -1], "a": -1, "b": 1}]})
    Y = Polyhedron.from_literal(X.to_literal())
    assert np.array_equal(X.directions, Y.directions)
    assert X.m == 2 and not X.bounded


def test_q_value():
    cfg = DirectionSearchConfig(samples=16, refine_steps=1)
    assert q_value(point_mass((0, 0)), Polyhedron.box([0, 0], [1, 1]), cfg) == 1
    assert q_value(F, Polyhedron.box([0], [0])) == H
    G = tensor(F, F)
    # a generic direction separates all four atoms of F x F
    assert q_value(G, Polyhedron.box([0, 0], [0, 0]), cfg) == pytest.approx(0.25)
    res = search_q(G, Polyhedron.box([-1, -1], [1, 1]), cfg)
    assert 0 < res.value <= 1 and res.evaluations >= 16


def test_q_value_unbounded_is_one():
    half = Polyhedron.from_constraints([((1, 0), 0, math.inf), ((0, 1), 0, math.inf)])
    res = search_q(tensor(F, F), half, DirectionSearchConfig(samples=8, refine_steps=0))
    assert res.value == 1 and res.unbounded


def test_q_shrinkage_monotone_on_fixed_directions():
    rng = np.random.default_rng(2)
    cfg = DirectionSearchConfig(samples=24, refine_steps=0, seed=5)
    G = random_law(rng, 2, k=20, span=4)
    vals = [q_value(G, Polyhedron.box([-h, -h], [h, h]), cfg) for h in (3, 2, 1, 0.5, 0)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_sphere_directions():
    D = sphere_directions(3, 50, seed=1)
    assert D.shape == (50, 3)
    assert np.allclose(np.linalg.norm(D, axis=1), 1)
    assert np.array_equal(D, sphere_directions(3, 50, seed=1))
    # Q is reflection invariant, so +1 alone covers {+1, -1}
    assert np.array_equal(sphere_directions(1, 4), [[1.0]])
