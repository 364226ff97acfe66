"""Analysis benches: drift check, scaling, impact and liquidation."""

import json

import numpy as np
import pytest
import sympy as sp

from src.errors import InvalidStateError, NonCompliantModelError
from src.evaluation.evaluator import AnalysisBench
from src.evaluation.impact import market_impact
from src.evaluation.liquidation import LiquidationSchedule, liquidation_study
from src.evaluation.lyapunov import (
    diffusion_term,
    generator_drift,
    lyapunov_drift_check,
    lyapunov_u,
    lyapunov_u_prime,
    lyapunov_u_second,
    lyapunov_v,
)
from src.evaluation.scaling import ScalingReport, scaling_check, wilson_interval
from src.models.presets import get_preset
from src.simulation.state import SimConfig

THINNING = SimConfig(scheme="thinning")


class TestLyapunovFunction:
    def test_inner_piece_joins_abs_smoothly(self):
        y = sp.symbols("y")
        inner = sp.Rational(3, 8) + sp.Rational(3, 4) * y**2 - y**4 / 8
        for point, sign in ((1, 1), (-1, -1)):
            assert inner.subs(y, point) == 1
            assert sp.diff(inner, y).subs(y, point) == sign
            assert sp.diff(inner, y, 2).subs(y, point) == 0

    @pytest.mark.parametrize("value", [-2.5, -1.0, -0.4, 0.0, 0.7, 1.0, 3.0])
    def test_numeric_pieces_match_symbolic(self, value):
        y = sp.symbols("y", real=True)
        expr = sp.Piecewise((sp.Abs(y), sp.Abs(y) >= 1), (sp.Rational(3, 8) + 3 * y**2 / 4 - y**4 / 8, True))
        assert float(lyapunov_u(value)) == pytest.approx(float(expr.subs(y, value)))
        if abs(value) != 1.0:
            assert float(lyapunov_u_prime(value)) == pytest.approx(float(sp.diff(expr, y).subs(y, value)))
            assert float(lyapunov_u_second(value)) == pytest.approx(float(sp.diff(expr, y, 2).subs(y, value)))

    def test_diffusion_term_matches_finite_differences(self):
        cov = np.array([[0.04, 0.01], [0.01, 0.09]])
        y0 = np.array([0.3, -1.7])
        h = 1e-4
        hess = np.zeros((2, 2))
        for i in range(2):
            for j in range(2):
                ei, ej = np.eye(2)[i] * h, np.eye(2)[j] * h
                hess[i, j] = (
                    lyapunov_v(y0 + ei + ej) - lyapunov_v(y0 + ei - ej)
                    - lyapunov_v(y0 - ei + ej) + lyapunov_v(y0 - ei - ej)
                )[0] / (4 * h * h)
        expected = 0.5 * np.sum(cov * hess)
        assert diffusion_term(y0, cov)[0] == pytest.approx(expected, rel=1e-5)


class TestDriftCheck:
    def test_generator_by_hand(self, model2):
        x = ((0.5, -0.5), (1.0, 0.0))
        y = np.array([0.02, -0.03])
        expected = diffusion_term(y, model2.covariance)[0]
        v = lyapunov_v(y)[0]
        for channel in model2.intensity.channels:
            moved = y.copy()
            moved[channel.asset] -= channel.direction * model2.ticks[channel.asset]
            rate = model2.intensity.eval_intensity(channel.name, x, y)
            expected += rate * (lyapunov_v(moved)[0] - v)
        assert generator_drift(model2, y, x)[0] == pytest.approx(expected)

    def test_gaussian_signals_need_truncation(self, model2):
        with pytest.raises(NonCompliantModelError):
            lyapunov_drift_check(model2, np.linspace(-1, 1, 5))

    def test_queue_models_are_rejected(self, model1):
        with pytest.raises(NonCompliantModelError):
            lyapunov_drift_check(model1, np.linspace(-1, 1, 5), signal_values=[0.0])

    def test_imbalance_values_must_be_bounded(self):
        model = get_preset("imbalance").build({})
        with pytest.raises(NonCompliantModelError):
            lyapunov_drift_check(model, np.linspace(-1, 1, 5), signal_values=[-2.0, 2.0])

    def test_truncated_model2(self, model2):
        report = lyapunov_drift_check(model2, np.linspace(-30, 30, 61), signal_values=[-1.0, 0.0, 1.0])
        assert np.isfinite(report.k)
        assert report.signal_points == 3**4
        assert report.grid_points == 61**2
        assert report.worst_by_radius[-1] < 0
        assert report.y_star is not None
        assert report.to_dict()["drift_negative_outside_box"]


class TestScaling:
    def test_wilson_interval(self):
        assert wilson_interval(0, 0) == [0.0, 1.0]
        low, high = wilson_interval(5, 10)
        assert 0.0 < low < 0.5 < high < 1.0

    def test_non_increasing(self):
        report = ScalingReport(0.5, 1.0, [1, 4, 16], [0.4, 0.3, 0.32], [[0, 1]] * 3, [4, 3, 3], 10)
        assert not report.is_non_increasing()
        assert report.is_non_increasing(slack=0.05)

    def test_small_run(self, model2):
        report = scaling_check(model2, n_list=[1, 2], horizon=0.2, eps=0.5, reps=4, seed=3, config=THINNING)
        assert len(report.probabilities) == 2
        assert all(0.0 <= p <= 1.0 for p in report.probabilities)
        again = scaling_check(model2, n_list=[1, 2], horizon=0.2, eps=0.5, reps=4, seed=3, config=THINNING)
        assert again.exceedances == report.exceedances

    def test_scale_factor_must_be_positive(self, model2):
        with pytest.raises(ValueError):
            scaling_check(model2, n_list=[0], reps=1, config=THINNING)


@pytest.fixture(scope="module")
def impact_model():
    return get_preset("impact").build({})


class TestImpact:
    def test_no_order_baseline_starts_at_zero(self, impact_model):
        curve = market_impact(impact_model, size=0, grid=[0.0, 1.0], reps=2, burn_in=1.0, config=THINNING)
        assert curve.mean[0] == 0.0

    def test_buy_order_never_lowers_price_immediately(self, impact_model):
        curve = market_impact(impact_model, size=6, grid=[0.0, 0.5, 1.0], reps=3, seed=2, burn_in=1.0, config=THINNING)
        assert curve.mean[0] >= 0.0
        assert curve.reps == 3
        peak_time, _ = curve.peak()
        assert peak_time in (0.0, 0.5, 1.0)
        assert curve.value_at(0.25) == pytest.approx(0.5 * (curve.mean[0] + curve.mean[1]))
        with pytest.raises(ValueError):
            curve.value_at(2.0)

    def test_requires_order_book(self, model2):
        with pytest.raises(InvalidStateError):
            market_impact(model2, size=1, grid=[0.0], reps=1)

    @pytest.mark.parametrize("grid", [[], [1.0, 0.5], [-1.0, 0.0]])
    def test_bad_grid(self, impact_model, grid):
        with pytest.raises(ValueError):
            market_impact(impact_model, size=1, grid=grid, reps=1)


class TestLiquidation:
    def test_zero_schedule_costs_nothing(self):
        schedule = LiquidationSchedule(interval=1.0, n_orders=2, sizes=(0, 0))
        report = liquidation_study(rhos=[0.0], schedule=schedule, reps=2, seed=1, config=THINNING)
        np.testing.assert_array_equal(report.samples[0.0], [0.0, 0.0])

    def test_small_study(self):
        schedule = LiquidationSchedule(interval=1.0, n_orders=3, sizes=(2, 1))
        report = liquidation_study(rhos=[-0.5, 0.5], schedule=schedule, reps=4, seed=5, bins=5, config=THINNING)
        data = report.to_dict()
        assert [row["rho"] for row in data["by_rho"]] == [-0.5, 0.5]
        assert all(sum(row["histogram"]) == 4 for row in data["by_rho"])
        assert len(report.rows()) == 8
        assert schedule.totals == (6, 3)

    def test_invalid_schedule(self):
        with pytest.raises(ValueError):
            LiquidationSchedule(interval=0.0)


def bench_config(tmp_path):
    return {
        "preset": {"id": "impact", "options": {}, "theta": {}},
        "simulation": {"horizon": 1.0, "seed": 4, "scheme": "thinning"},
        "analysis": {
            "impact": {"size": 3, "grid_end": 1.0, "grid_points": 3, "burn_in": 1.0, "reps": 2},
            "liquidation": {"interval": 1.0, "n_orders": 2, "sizes": [1, 1], "rhos": [0.0], "reps": 2},
        },
        "outputs": {"dir": str(tmp_path)},
        "jobs": 1,
    }


class TestBench:
    def test_impact_report_is_saved(self, tmp_path):
        bench = AnalysisBench(bench_config(tmp_path))
        report = bench.run_impact()
        paths = bench.save(report, "impact_test")
        data = json.loads(paths["json"].read_text())
        assert data["command"] == "impact"
        assert data["config"]["preset"]["id"] == "impact"
        assert "rows" not in data
        assert paths["csv"].exists()
        assert "Mean impact" in paths["markdown"].read_text()

    def test_reports_are_reproducible(self, tmp_path):
        first = AnalysisBench(bench_config(tmp_path)).run_liquidation()
        second = AnalysisBench(bench_config(tmp_path)).run_liquidation()
        assert first == second


@pytest.mark.slow
class TestAcceptance:
    def test_impact_curve_rises_then_decays(self, impact_model):
        curve = market_impact(impact_model, size=100, reps=20000, seed=1, config=THINNING, jobs=4)
        peak_time, peak_value = curve.peak()
        assert peak_value > 0
        assert peak_time <= 10.0
        assert curve.value_at(240.0) < 0.5 * peak_value

    def test_liquidation_overpayment_and_variance(self):
        report = liquidation_study(rhos=[-0.8, 0.0, 0.8], reps=5000, seed=2, config=THINNING, jobs=4)
        assert report.variance_increasing()
        for rho in report.rhos:
            assert report.mean(rho) == pytest.approx(0.17, abs=0.05)

    def test_scaling_frequency_decreases(self, model1):
        kwargs = dict(n_list=[1, 4, 16], horizon=1.0, eps=0.5, reps=200, seed=5, config=THINNING)
        report = scaling_check(model1, **kwargs)
        control = scaling_check(model1.without_events(), **kwargs)
        assert report.is_non_increasing(slack=0.05)
        # frozen P: the rescaled gap has the same law for every n
        assert control.probabilities[-1] >= control.probabilities[0] - 0.05
        assert min(control.probabilities) >= 0.9
        assert report.probabilities[-1] < control.probabilities[-1]
