import math

import numpy as np
import pytest
from scipy import special, stats

import oracles
from charfn_helpers import max_cf_error
from polyconv.cpois import (
    CompoundPoissonSpec,
    RareEventSpec,
    accompanying,
    accompanying_product,
    compound_poisson,
    d0_law,
    poisson_law,
    rare_event_sum,
    truncation_level,
)
from polyconv.dist import SparseDistribution, from_atoms, mixture, point_mass, reflect, total_variation
from polyconv.errors import BoxOverflow

F = from_atoms({-1: 0.5, 1: 0.5})


def random_base(rng, d=1, k=6, span=3):
    cells = (2 * span + 1) ** d
    flat = rng.choice(cells, size=k, replace=False)
    idx = np.stack(np.unravel_index(flat, (2 * span + 1,) * d), axis=1) - span
    return SparseDistribution.from_arrays(idx.astype(float), rng.dirichlet(np.ones(k)))


def test_truncation_level():
    for alpha in (0.5, 5.0, 50.0):
        K = truncation_level(alpha, 1e-12)
        assert stats.poisson.sf(K, alpha) <= 1e-12
        assert stats.poisson.sf(K - 1, alpha) > 1e-12


def test_zero_intensity():
    assert compound_poisson(CompoundPoissonSpec(0.0, F)).atoms == {(0.0,): 1}


def test_mass_at_zero_matches_bessel_oracle():
    # e(F) at 0 is e^{-1} I_0(1); the oracle is the scaled Bessel function
    want = float(special.i0e(1.0))
    assert want == pytest.approx(oracles.modified_bessel_mass(1.0), abs=1e-15)
    for method in ("mixture", "spectral"):
        got = compound_poisson(CompoundPoissonSpec(1.0, F), method).mass_at([0])
        assert got == pytest.approx(want, abs=1e-12)
    assert accompanying(F, 1).mass_at([0]) == pytest.approx(0.4657596, abs=1e-7)


def test_matches_series_oracle():
    rng = np.random.default_rng(3)
    H = random_base(rng, k=4, span=2)
    got = compound_poisson(CompoundPoissonSpec(3.0, H))
    want = oracles.compound_poisson(3.0, oracles.as_dict(H), K=60)
    assert oracles.tv(oracles.as_dict(got), want) <= 1e-12


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("alpha", [0.5, 5.0, 50.0])
def test_mixture_vs_spectral(seed, alpha):
    rng = np.random.default_rng(seed)
    H = random_base(rng, d=1 + seed % 2)
    spec = CompoundPoissonSpec(alpha, H)
    a, b = compound_poisson(spec, "mixture"), compound_poisson(spec, "spectral")
    assert total_variation(a, b) <= 10 * spec.tail_eps
    # the defect holds the Poisson tail beyond K plus atoms dropped by the 1e-15 zero clamp
    K = spec.truncation
    box = np.prod(K * (np.ptp(np.r_[H.points, np.zeros((1, H.dim))], axis=0)) + 1)
    assert a.mass_defect <= stats.poisson.sf(K, alpha) + 1e-15 * box + 1e-14


def test_auto_agrees():
    spec = CompoundPoissonSpec(20.0, F)
    assert total_variation(compound_poisson(spec, "auto"), compound_poisson(spec, "spectral")) <= 1e-11


def test_accompanying_identity_and_cf():
    assert accompanying(point_mass(0), 7).atoms == {(0.0,): 1}
    G = from_atoms({-2: 0.3, 0: 0.2, 1: 0.5})
    D = accompanying(G, 6)
    assert max_cf_error(D, lambda t: np.exp(6 * (G.masses @ np.exp(1j * np.outer(G.points[:, 0], t)) - 1))) <= 1e-10


def test_lazy_identity():
    rng = np.random.default_rng(4)
    for _ in range(5):
        V = random_base(rng, k=3)
        p = float(rng.uniform(0.05, 0.95))
        lazy = mixture([(1 - p, point_mass(0)), (p, V)])
        a = compound_poisson(CompoundPoissonSpec(4.0, lazy, 1e-15))
        b = compound_poisson(CompoundPoissonSpec(4.0 * p, V, 1e-15))
        assert total_variation(a, b) <= 1e-12


def test_accompanying_product():
    assert accompanying_product(RareEventSpec([0.0, 0.0], [F, F])).atoms == {(0.0,): 1}
    D = accompanying_product(RareEventSpec([0.3], [point_mass(1)]))
    k = np.arange(0, 30)
    want = {(float(i),): float(stats.poisson.pmf(i, 0.3)) for i in k if stats.poisson.pmf(i, 0.3) > 1e-15}
    assert oracles.tv(oracles.as_dict(D), want) <= 1e-12


def test_d0_law():
    D0 = d0_law(RareEventSpec([0.5], [point_mass(1)]))
    assert D0.mass_at([0]) == pytest.approx(oracles.modified_bessel_mass(0.25), abs=1e-12)
    assert D0.mass_at([0]) == pytest.approx(0.79102, abs=1e-5)
    assert d0_law(RareEventSpec([0.0, 1.0], [F, point_mass(2)])).atoms == {(0.0,): 1}
    D = d0_law(RareEventSpec([0.2, 0.4], [point_mass(1), from_atoms({0: 0.5, 3: 0.5})]))
    assert reflect(D).same_atoms(D, tol=1e-15)


def test_rare_event_sum_is_binomial():
    G = rare_event_sum(RareEventSpec.homogeneous(20, 0.1, point_mass(1)))
    want = {(float(k),): float(stats.binom.pmf(k, 20, 0.1)) for k in range(21)}
    assert oracles.tv(oracles.as_dict(G), want) <= 1e-12


def test_rare_event_spec_validation():
    with pytest.raises(ValueError):
        RareEventSpec([1.5], [F])
    assert RareEventSpec.homogeneous(3, 0.2, F).p == pytest.approx(0.2)


def test_poisson_law():
    P = poisson_law(2.0)
    assert P.mass_at([3]) == pytest.approx(math.exp(-2) * 8 / 6, abs=1e-15)


def test_spectral_box_overflow():
    G = from_atoms({(1, 0): 1 / 3, (0, 1): 1 / 3, (-1, -1): 1 / 3})
    with pytest.raises(BoxOverflow):
        compound_poisson(CompoundPoissonSpec(5000.0, G), "spectral")
