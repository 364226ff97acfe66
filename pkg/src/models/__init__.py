"""
Models Module
Intensity families, state dynamics and the named market-model presets.
"""

from src.models.dynamics import ConstantDynamics, QueueReactiveDynamics, SignalDynamics, Transition
from src.models.intensity import (
    INTENSITY_CEILING,
    ConstantChannel,
    IntensityChannel,
    IntensitySpec,
    PolynomialChannel,
    PriceJumpChannel,
    QueueChannel,
    check_rates,
    eval_intensity,
    taylor_sum_coeffs,
)
from src.models.presets import (
    PRESETS,
    MarketModel,
    ModelPreset,
    get_preset,
    impact_preset,
    list_presets,
    model1_preset,
    model2_preset,
)
from src.models.theta import (
    ParamSpec,
    ThetaSpec,
    from_unconstrained,
    to_unconstrained,
    volatility_factor,
)

__all__ = [
    "ConstantDynamics",
    "QueueReactiveDynamics",
    "SignalDynamics",
    "Transition",
    "INTENSITY_CEILING",
    "ConstantChannel",
    "IntensityChannel",
    "IntensitySpec",
    "PolynomialChannel",
    "PriceJumpChannel",
    "QueueChannel",
    "check_rates",
    "eval_intensity",
    "taylor_sum_coeffs",
    "PRESETS",
    "MarketModel",
    "ModelPreset",
    "get_preset",
    "impact_preset",
    "list_presets",
    "model1_preset",
    "model2_preset",
    "ParamSpec",
    "ThetaSpec",
    "from_unconstrained",
    "to_unconstrained",
    "volatility_factor",
]
