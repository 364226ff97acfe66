"""Intensity channels, preset layouts and parameter transforms."""

import numpy as np
import pytest

from src.errors import ParameterFaultError
from src.lob.types import LobState
from src.models.intensity import (
    ConstantChannel,
    IntensitySpec,
    PolynomialChannel,
    check_rates,
    taylor_sum_coeffs,
)
from src.models.presets import get_preset, list_presets
from src.models.theta import ParamSpec, ThetaSpec, volatility_factor


def book(bid, ask):
    return (LobState.from_sides([bid], [ask]),)


class TestModel1Channels:
    def test_alphabet(self, model1):
        assert sorted(model1.intensity.names) == sorted(
            f"{f}_{s}" for f in ("limit", "cancel", "market") for s in ("bid", "ask")
        )

    def test_log_intensity_formula(self, model1):
        theta = model1.theta
        x, y = book(3, 5), np.array([0.004])
        expected = (
            theta["limit.alpha0"]
            + theta["limit.alpha1"] * 0.004
            + theta["limit.alpha2"] * 3
            + theta["limit.alpha3"] * 5
        )
        assert model1.intensity.log_intensity("limit_bid", x, y) == pytest.approx(expected)

    @pytest.mark.parametrize("family", ["limit", "cancel", "market"])
    def test_mirror_symmetry(self, model1, family):
        bid_side = model1.intensity.eval_intensity(f"{family}_bid", book(2, 4), np.array([0.003]))
        ask_side = model1.intensity.eval_intensity(f"{family}_ask", book(4, 2), np.array([-0.003]))
        assert bid_side == pytest.approx(ask_side)

    def test_consume_inactive_on_empty_pile(self, model1):
        x = book(0, 2)
        assert model1.intensity.eval_intensity("cancel_bid", x, np.zeros(1)) == 0.0
        assert model1.intensity.eval_intensity("market_bid", x, np.zeros(1)) == 0.0
        assert model1.intensity.eval_intensity("limit_bid", x, np.zeros(1)) > 0.0


class TestModel2Channels:
    def test_up_jump_mirrors_down_jump(self, model2):
        x = ((0.3, -1.1), (0.7, 0.2))
        neg_x = tuple(tuple(-v for v in s) for s in x)
        y = np.array([0.002, -0.004])
        for i in (1, 2):
            down = model2.intensity.eval_intensity(f"{i}-", x, y)
            up = model2.intensity.eval_intensity(f"{i}+", neg_x, -y)
            assert down == pytest.approx(up)

    def test_only_own_asset_gap_enters(self, model2):
        x = ((0.0, 0.0), (0.0, 0.0))
        a = model2.intensity.eval_intensity("1-", x, np.array([0.01, 0.0]))
        b = model2.intensity.eval_intensity("1-", x, np.array([0.01, 5.0]))
        assert a == pytest.approx(b)

    def test_covariance(self, model2):
        cov = model2.covariance
        assert cov[0, 0] == pytest.approx(0.01**2)
        assert cov[1, 1] == pytest.approx(0.02**2)
        assert cov[0, 1] == pytest.approx(0.6 * 0.01 * 0.02)


class TestTaylorSum:
    def test_matches_rates_near_zero(self, model2):
        x = ((0.5, -0.2), (-1.0, 0.4))
        y = np.array([0.01, -0.02])
        poly = taylor_sum_coeffs(model2.intensity, x, n_deg=6)
        expected = model2.intensity.rates(x, y).sum() - len(model2.intensity)
        assert poly.evaluate(y[None, :])[0] == pytest.approx(expected, rel=1e-10)

    def test_constant_rates(self, constant_model):
        poly = constant_model.intensity.taylor_sum_coeffs((), n_deg=4)
        np.testing.assert_allclose(poly.coeffs, [1.5 - 1 + 0.5 - 1, 0, 0, 0, 0])

    def test_inactive_channels_are_skipped(self):
        spec = IntensitySpec([ConstantChannel("on", 2.0), ConstantChannel("off", 0.0)], dim=1)
        assert spec.taylor_sum_coeffs((), n_deg=2).coeffs[0] == pytest.approx(1.0)

    def test_quadratic_channel_uses_series(self):
        terms = (((0,), 0.3), ((1,), 0.5), ((2,), 0.0))
        spec = IntensitySpec([PolynomialChannel("p", terms, dim=1, degree=2)], dim=1, degree=2)
        coeffs = spec.taylor_sum_coeffs((), n_deg=4).coeffs
        expected = np.exp(0.3) * 0.5 ** np.arange(5) / np.array([1, 1, 2, 6, 24])
        expected[0] -= 1.0
        np.testing.assert_allclose(coeffs, expected)


class TestIntensitySpec:
    def test_duplicate_names(self):
        with pytest.raises(ValueError):
            IntensitySpec([ConstantChannel("a", 1.0), ConstantChannel("a", 2.0)], dim=1)

    def test_unknown_event(self, constant_model):
        with pytest.raises(ValueError):
            constant_model.intensity.position("c")

    def test_negative_rate_rejected(self):
        with pytest.raises(ValueError):
            ConstantChannel("a", -1.0)

    def test_check_rates(self):
        check_rates(np.array([1.0, 2.0]))
        with pytest.raises(ParameterFaultError):
            check_rates(np.array([1.0, 1e13]))
        with pytest.raises(ParameterFaultError):
            check_rates(np.array([np.inf]))

    def test_without_events(self, model2):
        frozen = model2.without_events()
        assert len(frozen.intensity) == 0
        assert frozen.dim == 2


class TestPresets:
    def test_registry(self):
        assert list_presets() == ["constant", "imbalance", "impact", "model1", "model2"]
        with pytest.raises(ValueError):
            get_preset("model3")

    def test_mapping_fills_defaults(self):
        model = get_preset("model1").build({"sigma": 0.02})
        assert model.theta["sigma"] == 0.02
        assert model.theta["limit.alpha1"] == 2.5

    def test_unknown_option(self):
        with pytest.raises(ValueError):
            get_preset("model2").build({}, {"tick": 0.01})

    def test_wrong_vector_length(self):
        with pytest.raises(ValueError):
            get_preset("model2").build(np.zeros(3))

    def test_impact_alphabet(self):
        model = get_preset("impact").build({})
        assert len(model.intensity) == 12
        assert "limit_a3" in model.intensity.names

    def test_two_asset_impact_layout(self):
        preset = get_preset("impact")
        options = {"n_assets": 2}
        assert preset.theta_spec(options).names == ["sigma1", "sigma2", "rho"]
        assert len(preset.build({}, options).intensity) == 24

    def test_initial_price_on_grid(self, model2):
        _, grid = model2.initial_state(np.random.default_rng(0))
        prices = model2.prices(grid)
        ticks = np.asarray(model2.ticks)
        assert np.all(np.abs(prices - np.array([100.0, 50.0])) <= ticks / 2 + 1e-12)
        offsets = prices / ticks - 0.5
        np.testing.assert_allclose(offsets, np.round(offsets), atol=1e-6)


class TestTheta:
    @pytest.mark.parametrize(
        "transform,value", [("identity", -3.2), ("log", 0.02), ("atanh", -0.6), ("neg_log", -0.05)]
    )
    def test_round_trip(self, transform, value):
        p = ParamSpec("x", transform)
        assert p.inverse(p.forward(value)) == pytest.approx(value)

    @pytest.mark.parametrize("transform,value", [("log", 0.0), ("atanh", 1.0), ("neg_log", 0.1)])
    def test_out_of_range(self, transform, value):
        with pytest.raises(ValueError):
            ParamSpec("x", transform).forward(value)

    def test_from_dict(self):
        spec = ThetaSpec([ParamSpec("a"), ParamSpec("b", "log")])
        np.testing.assert_allclose(spec.from_dict({"a": 1.0}, defaults={"b": 2.0}), [1.0, 2.0])
        with pytest.raises(ValueError):
            spec.from_dict({"a": 1.0})
        with pytest.raises(ValueError):
            spec.from_dict({"a": 1.0, "b": 2.0, "c": 3.0})

    def test_volatility_factor(self):
        sigma = volatility_factor([0.02, 0.01], -0.5)
        np.testing.assert_allclose(sigma @ sigma.T, [[4e-4, -1e-4], [-1e-4, 1e-4]])
