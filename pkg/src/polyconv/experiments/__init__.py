"""Scenario harness: rate fits, couplings, reports and the scenario registry."""

from .coupling import (
    Coupling,
    best_coupling_rhs,
    comonotone_coupling,
    independent_coupling,
    optimal_coupling,
    random_sum_law,
    theorem7_rhs,
)
from .fitting import RateFit, rate_fit
from .report import ScenarioReport, Verdict
from .scenarios import SCENARIOS, run_scenario
