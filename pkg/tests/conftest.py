"""Shared fixtures, the slow marker and hypothesis profiles."""

import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from src.models.presets import get_preset
from src.simulation.engine import MarketSimulator
from src.simulation.state import SimConfig

settings.register_profile("default", max_examples=50, deadline=None)
settings.register_profile(
    "ci", max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale run, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def model1():
    preset = get_preset("model1")
    return preset.build(preset.default_theta())


@pytest.fixture
def model2():
    preset = get_preset("model2")
    return preset.build(preset.default_theta())


@pytest.fixture
def constant_model():
    return get_preset("constant").build({"rate.a": 1.5, "rate.b": 0.5, "sigma": 0.01})


@pytest.fixture
def model1_log(model1):
    """Short simulated Model 1 log."""
    return MarketSimulator(model1, SimConfig(horizon=5.0, seed=3, scheme="thinning")).run().log


@pytest.fixture
def model2_log(model2):
    return MarketSimulator(model2, SimConfig(horizon=5.0, seed=4, scheme="thinning")).run().log
