"""
Evaluation Module
Scaling, drift, impact and liquidation studies, and their reports.
"""

from src.evaluation.evaluator import AnalysisBench
from src.evaluation.impact import ImpactCurve, market_impact
from src.evaluation.liquidation import LiquidationReport, LiquidationSchedule, liquidation_study
from src.evaluation.lyapunov import (
    LyapunovReport,
    generator_drift,
    lyapunov_drift_check,
    lyapunov_u,
    lyapunov_v,
)
from src.evaluation.report_generator import BenchReportGenerator
from src.evaluation.scaling import ScalingReport, scaling_check, wilson_interval

__all__ = [
    "AnalysisBench",
    "ImpactCurve",
    "market_impact",
    "LiquidationReport",
    "LiquidationSchedule",
    "liquidation_study",
    "LyapunovReport",
    "generator_drift",
    "lyapunov_drift_check",
    "lyapunov_u",
    "lyapunov_v",
    "BenchReportGenerator",
    "ScalingReport",
    "scaling_check",
    "wilson_interval",
]
