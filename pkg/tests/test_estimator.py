"""Maximum-likelihood estimation with restarted CMA-ES."""

from dataclasses import replace

import numpy as np
import pytest

from src.errors import InactiveEventError, InvalidStateError
from src.estimation.cmaes import CmaesConfig
from src.estimation.estimator import NegativeLogLikelihood, estimate, restart_seed
from src.likelihood.engine import LikelihoodConfig
from src.models.presets import get_preset
from src.simulation.engine import simulate
from src.simulation.replication import derive_seed
from src.simulation.state import EventLog, SimConfig

FAST = LikelihoodConfig(n_deg=2, min_substeps=1, max_step=1.0)


@pytest.fixture(scope="module")
def rate_log():
    model = get_preset("constant").build({"rate.a": 2.0, "rate.b": 0.5, "sigma": 0.01})
    return simulate(model, SimConfig(horizon=40.0, seed=6, scheme="thinning")).log


@pytest.fixture(scope="module")
def rate_fit(rate_log):
    return estimate(
        rate_log,
        get_preset("constant"),
        config=CmaesConfig(restarts=2, max_evals=1500, seed=3),
        likelihood_config=FAST,
        start={"rate.a": 1.0, "rate.b": 1.0},
    )


class TestConstantRates:
    def test_recovers_closed_form_mle(self, rate_log, rate_fit):
        counts = rate_log.counts()
        for name in ("a", "b"):
            assert rate_fit.theta[f"rate.{name}"] == pytest.approx(counts[name] / 40.0, rel=1e-3)

    def test_best_restart_is_reported(self, rate_fit):
        assert len(rate_fit.restarts) == 2
        assert rate_fit.log_likelihood == max(r.log_likelihood for r in rate_fit.restarts)
        assert rate_fit.evaluations == sum(r.evaluations for r in rate_fit.restarts)

    def test_to_dict(self, rate_fit):
        data = rate_fit.to_dict()
        assert data["preset"] == "constant"
        assert "wall_time" not in data
        assert "wall_time" in rate_fit.to_dict(include_timing=True)
        trajectory = data["restarts"][0]["trajectory"]
        assert all(b >= a for a, b in zip(trajectory, trajectory[1:]) if a is not None)

    def test_restart_table(self, rate_fit):
        rows = rate_fit.restart_table()
        assert [row["restart"] for row in rows] == [0, 1]
        assert {"seed", "log_likelihood", "rate.a", "rate.b", "sigma"} <= set(rows[0])

    def test_restart_seeds(self, rate_fit):
        assert rate_fit.restarts[0].seed == 3
        assert rate_fit.restarts[1].seed == restart_seed(3, 1)
        assert restart_seed(3, 1) != 3


class TestObjective:
    def test_faults_map_to_infinity(self, rate_log):
        objective = NegativeLogLikelihood(rate_log, "constant", config=FAST)
        assert objective(np.array([800.0, 0.0, np.log(0.01)])) == float("inf")

    def test_matches_likelihood(self, rate_log):
        objective = NegativeLogLikelihood(rate_log, "constant", config=FAST)
        counts = rate_log.counts()
        coords = np.log([2.0, 0.5, 0.01])
        expected = counts["a"] * np.log(2.0) + counts["b"] * np.log(0.5) - 40.0 * ((2.0 - 1.0) + (0.5 - 1.0))
        assert objective(coords) == pytest.approx(-expected, abs=1e-8)


class TestDataErrors:
    @staticmethod
    def with_unknown_event(log):
        records = list(log.records)
        records[0] = replace(records[0], z="zzz")
        return EventLog(log.header, records)

    def test_objective_raises_on_unknown_event(self, rate_log):
        objective = NegativeLogLikelihood(self.with_unknown_event(rate_log), "constant", config=FAST)
        with pytest.raises(InactiveEventError):
            objective(np.log([2.0, 0.5, 0.01]))

    def test_estimate_raises_on_unknown_event(self, rate_log):
        with pytest.raises(InactiveEventError):
            estimate(
                self.with_unknown_event(rate_log),
                get_preset("constant"),
                config=CmaesConfig(restarts=1, max_evals=50, seed=1),
                likelihood_config=FAST,
            )

    def test_event_beyond_horizon(self, rate_log):
        records = list(rate_log.records)
        records[-1] = replace(records[-1], t=rate_log.horizon + 1.0)
        with pytest.raises(InvalidStateError):
            estimate(EventLog(rate_log.header, records), get_preset("constant"), likelihood_config=FAST)

    def test_parameter_faults_still_score_infinity(self, rate_log):
        objective = NegativeLogLikelihood(rate_log, "constant", config=FAST)
        assert objective(np.array([np.nan, 0.0, 0.0])) == float("inf")


RECOVERY_SEED = 7
_fits = {}


def model1_fits(horizon, reps):
    """Model 1 fits on `reps` logs simulated at the default parameters, cached per horizon."""
    key = ("model1", horizon)
    cached = _fits.setdefault(key, [])
    preset = get_preset("model1")
    model = preset.build(preset.default_values())
    for i in range(len(cached), reps):
        seed = derive_seed(RECOVERY_SEED, int(horizon) * 100 + i)
        log = simulate(model, SimConfig(horizon=horizon, seed=seed, scheme="thinning")).log
        cached.append(estimate(log, preset, config=CmaesConfig(restarts=2, max_evals=4000, seed=seed)))
    return cached[:reps]


def mse(fits, name, truth):
    values = np.array([fit.theta[name] for fit in fits])
    return float(np.mean((values - truth) ** 2))


@pytest.mark.slow
class TestRecovery:
    def test_model1_smoke(self):
        truth = get_preset("model1").default_values()["limit.alpha2"]
        assert mse(model1_fits(200.0, 3), "limit.alpha2", truth) <= 5e-2

    def test_model1_limit_alpha2(self):
        truth = get_preset("model1").default_values()["limit.alpha2"]
        fits = model1_fits(1000.0, 5)
        assert np.mean([fit.theta["limit.alpha2"] for fit in fits]) == pytest.approx(-1.0, abs=0.15)
        assert mse(fits, "limit.alpha2", truth) <= 1e-2

    def test_mse_slope(self):
        truth = get_preset("model1").default_values()["cancel.alpha2"]
        short = mse(model1_fits(200.0, 5), "cancel.alpha2", truth)
        long = mse(model1_fits(1000.0, 5), "cancel.alpha2", truth)
        slope = (np.log(long) - np.log(short)) / (np.log(1000.0) - np.log(200.0))
        assert -1.6 <= slope <= -0.4

    def test_model2_rho(self):
        preset = get_preset("model2")
        model = preset.build(preset.default_values())
        estimates = []
        for i in range(3):
            seed = derive_seed(RECOVERY_SEED + 1, i)
            log = simulate(model, SimConfig(horizon=1000.0, seed=seed, scheme="thinning")).log
            fit = estimate(log, preset, config=CmaesConfig(restarts=2, max_evals=6000, seed=seed))
            estimates.append(fit.theta["rho"])
        assert np.mean(estimates) == pytest.approx(0.6, abs=0.35)
