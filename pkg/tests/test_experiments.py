import json
import math

import numpy as np
import pytest
from scipy import stats

import oracles
from polyconv.config import RunConfig
from polyconv.convolve import power
from polyconv.dist import from_atoms, total_variation
from polyconv.errors import InsufficientPoints, NonpositiveDistance, SupportTooLarge, UnknownScenario
from polyconv.experiments.coupling import (
    Coupling,
    best_coupling_rhs,
    comonotone_coupling,
    independent_coupling,
    optimal_coupling,
    random_sum_law,
    theorem7_cost,
    theorem7_rhs,
)
from polyconv.experiments.fitting import RateFit, rate_fit
from polyconv.experiments.report import ScenarioReport
from polyconv.experiments.scenarios import SCENARIOS, binomial_law, projection_alternative, run_scenario

F = from_atoms({-1: 0.5, 1: 0.5})
BERN = {0: 0.5, 1: 0.5}


# fitting -------------------------------------------------------------------

def test_exact_power_laws():
    fit = rate_fit([(10, 0.1), (100, 0.01), (1000, 0.001)], 1.0)
    assert fit.slope == pytest.approx(-1) and fit.constant == pytest.approx(1)
    fit = rate_fit([(n, 5 * n**-0.5) for n in (16, 64, 256)], 0.5)
    assert fit.slope == pytest.approx(-0.5) and fit.constant == pytest.approx(5)
    assert fit.r_squared == pytest.approx(1)


def test_noisy_power_law():
    rng = np.random.default_rng(7)
    ns = np.geomspace(8, 512, 7)
    fit = rate_fit([(n, 3 * n**-1 * (1 + rng.uniform(-0.05, 0.05))) for n in ns], 1.0)
    assert abs(fit.slope + 1) <= 0.1
    assert 0 <= fit.r_squared <= 1


def test_fit_errors_and_round_trip():
    with pytest.raises(InsufficientPoints):
        rate_fit([(1, 1), (2, 0.5)], 1)
    with pytest.raises(InsufficientPoints):
        rate_fit([(4, 1), (4, 0.5), (4, 0.2)], 1)
    with pytest.raises(NonpositiveDistance):
        rate_fit([(1, 1), (2, 0), (3, 0.1)], 1)
    fit = rate_fit([(8, 0.2), (16, 0.1), (32, 0.06)], 1)
    assert RateFit.from_dict(json.loads(json.dumps(fit.to_dict()))) == fit


# couplings -----------------------------------------------------------------

def test_forced_coupling():
    c = comonotone_coupling({2: 1.0}, {1: 0.5, 3: 0.5})
    assert c.joint == {(2, 1): 0.5, (2, 3): 0.5}
    o = optimal_coupling({2: 1.0}, {1: 0.5, 3: 0.5}, lambda k, l: abs(k - l))
    assert o.expect(lambda k, l: abs(k - l)) == pytest.approx(1)


def test_identical_marginals():
    U = {0: 0.2, 3: 0.5, 7: 0.3}
    assert comonotone_coupling(U, U).expect(lambda k, l: abs(k - l)) == 0
    assert optimal_coupling(U, U, lambda k, l: abs(k - l)).expect(lambda k, l: abs(k - l)) == pytest.approx(0)
    assert independent_coupling(BERN, BERN).expect(lambda k, l: abs(k - l)) == pytest.approx(0.5)
    assert comonotone_coupling(BERN, BERN).expect(lambda k, l: abs(k - l)) == 0


def test_theorem7_values():
    # diagonal plan on {0,1}: E min{1/sqrt(nu+1), 1} = (1 + 1/sqrt 2)/2
    want = 0.5 * (1 + 1 / math.sqrt(2))
    cost = theorem7_cost(1, 1.0, 1.0, "with_sqrt")
    assert optimal_coupling(BERN, BERN, cost).expect(cost) == pytest.approx(want, abs=1e-9)
    diag = comonotone_coupling(BERN, BERN)
    assert theorem7_rhs(diag, 1) == pytest.approx(0.85355, abs=1e-5)
    assert theorem7_rhs(diag, 1, plus_form="without_sqrt") == 0
    with pytest.raises(ValueError):
        theorem7_cost(1, 1, 1, "other")


def test_coupling_marginals_and_order():
    rng = np.random.default_rng(1)
    for _ in range(10):
        U = {int(k): float(p) for k, p in zip(rng.choice(20, 5, replace=False), rng.dirichlet(np.ones(5)))}
        V = {int(k): float(p) for k, p in zip(rng.choice(20, 4, replace=False), rng.dirichlet(np.ones(4)))}
        cost = theorem7_cost(1, 1.0, 1.0, "without_sqrt")
        plans = [optimal_coupling(U, V, cost), comonotone_coupling(U, V), independent_coupling(U, V)]
        for c in plans:
            mu, nu = c.marginals()
            assert all(abs(mu[k] - U[k]) <= 1e-12 for k in U)
            assert all(abs(nu[k] - V[k]) <= 1e-12 for k in V)
            assert 0 <= theorem7_rhs(c, 1) <= 1
        assert plans[0].expect(cost) <= min(p.expect(cost) for p in plans[1:]) + 1e-12


def test_comonotone_can_lose_to_independent():
    # the truncated cost is not submodular, so the quantile plan is not always the better one
    rng = np.random.default_rng(8)
    worse = 0
    for _ in range(50):
        U = {int(k): float(p) for k, p in zip(rng.choice(30, 4, replace=False), rng.dirichlet(np.ones(4)))}
        V = {int(k): float(p) for k, p in zip(rng.choice(30, 4, replace=False), rng.dirichlet(np.ones(4)))}
        cost = theorem7_cost(1, 1.0, 1.0, "with_sqrt")
        worse += comonotone_coupling(U, V).expect(cost) > independent_coupling(U, V).expect(cost) + 1e-12
    assert worse > 0


def test_best_coupling_rhs_falls_back():
    U, V = binomial_law(200), binomial_law(200, 1)
    val, kind = best_coupling_rhs(U, V, 1)
    assert kind in ("comonotone", "independent") and 0 < val <= 1
    with pytest.raises(SupportTooLarge):
        optimal_coupling(U, V, theorem7_cost(1, 1, 1, "with_sqrt"))
    assert best_coupling_rhs(BERN, BERN, 1)[1] == "optimal"


def test_coupling_validation():
    with pytest.raises(ValueError):
        Coupling({(0, 0): 0.5})


def test_random_sum_law():
    U = {0: 0.2, 2: 0.5, 5: 0.3}
    G = random_sum_law(U, F)
    want = {}
    for k, u in U.items():
        for x, m in oracles.power(oracles.as_dict(F), k).items():
            want[x] = want.get(x, 0) + u * m
    assert oracles.tv(oracles.as_dict(G), want) <= 1e-14
    assert total_variation(G, random_sum_law(U, F, "spectral")) <= 1e-12
    assert total_variation(random_sum_law({3: 1.0}, F), power(F, 3)) <= 1e-15


# reports -------------------------------------------------------------------

def test_report_round_trip():
    rep = ScenarioReport("X", "anchor", ["n", "lhs", "verdict"],
                         records=[{"n": 1, "lhs": 0.1, "verdict": True}, {"n": 2, "lhs": 1 / 3, "verdict": False}])
    rep.fits["a"] = rate_fit([(8, 0.2), (16, 0.1), (32, 0.05)], 1)
    rep.verdict("v", True, 0.5, "crit", 0.1)
    back = ScenarioReport.from_dict(json.loads(rep.to_json()))
    assert back.to_json() == rep.to_json()
    assert rep.to_csv().splitlines() == ["n,lhs,verdict", "1,0.1,pass", "2,0.3333333333333333,fail"]


# scenarios -----------------------------------------------------------------

def test_registry():
    assert {"T1", "T2", "T3", "T4", "T5", "T6", "T7", "PARITY", "MEDIAN", "E997a"} <= set(SCENARIOS)
    with pytest.raises(UnknownScenario):
        run_scenario("T99", RunConfig("T99"))


def test_parity_single_point():
    rep = run_scenario("PARITY", RunConfig("PARITY", sweep={"n_max": 2}))
    assert rep.records == [{"n": 2, "lhs": 0.25, "rhs": 0.25, "verdict": True}]
    assert rep.passed


def test_empty_sweep():
    with pytest.raises(InsufficientPoints):
        run_scenario("T3", RunConfig("T3", sweep={"n_list": []}))
    with pytest.raises(InsufficientPoints):
        run_scenario("PARITY", RunConfig("PARITY", sweep={"n_max": 1}))


def test_t3_even_gap_slope():
    rep = run_scenario("T3", RunConfig("T3"))
    assert -1.15 <= rep.fits["even_gap"].slope <= -0.85
    assert rep.passed


def test_t3_tight_tolerance_fails():
    rep = run_scenario("T3", RunConfig("T3", tolerances={"slope": 1e-4}))
    assert not rep.passed


def test_projection_alternative():
    assert projection_alternative(from_atoms({1: 1.0}), np.eye(1)) == "degenerate"
    assert projection_alternative(F, np.eye(1)) == "decay"


@pytest.mark.parametrize("sid", ["MEDIAN", "T4", "T6", "E997a"])
def test_scenarios_pass_by_default(sid):
    assert run_scenario(sid, RunConfig(sid)).passed


def test_threads_do_not_change_reports():
    a = run_scenario("T7", RunConfig("T7", sweep={"N_list": [8, 16, 32, 64]}, threads=1))
    b = run_scenario("T7", RunConfig("T7", sweep={"N_list": [8, 16, 32, 64]}, threads=4))
    assert a.to_json() == b.to_json()


def test_binomial_law():
    law = binomial_law(10, 2)
    assert min(law) == 2 and max(law) == 12
    assert law[7] == pytest.approx(stats.binom.pmf(5, 10, 0.5))
