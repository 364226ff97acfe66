"""
Analysis Bench
Runs the scaling, drift, impact and liquidation studies from a resolved run
configuration and saves their reports.

Example usage:
    config = load_config("configs/impact.yaml")
    bench = AnalysisBench(config.to_dict())
    report = bench.run_impact(seed=3)
    bench.save(report, "impact")
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from src.evaluation.impact import market_impact
from src.evaluation.liquidation import LiquidationSchedule, liquidation_study
from src.evaluation.lyapunov import lyapunov_drift_check
from src.evaluation.report_generator import BenchReportGenerator
from src.evaluation.scaling import scaling_check
from src.models.presets import MarketModel, get_preset
from src.simulation.state import SimConfig


class AnalysisBench:
    """
    Desk-scale reproductions of the model's qualitative claims.

    Args:
        config: Resolved configuration dictionary (RunConfig.to_dict())
    """

    def __init__(self, config: Dict[str, Any]):
        self.config = config
        self.logger = logging.getLogger("evaluation.bench")
        self.analysis = config.get("analysis", {})
        self.preset_config = config.get("preset", {})
        self.jobs = int(config.get("jobs", 1))
        self.output_dir = Path(config.get("outputs", {}).get("dir", "outputs"))
        sim = dict(config.get("simulation", {}))
        self.seed = int(sim.get("seed", 0))
        self.sim_config = SimConfig(**sim)
        self.logger.info(f"AnalysisBench initialized for preset {self.preset_config.get('id')}")

    def build_model(self) -> MarketModel:
        preset = get_preset(self.preset_config.get("id", "model1"))
        options = self.preset_config.get("options", {})
        return preset.build(self.preset_config.get("theta", {}), options)

    def run_scaling(self, seed: Optional[int] = None, reps: Optional[int] = None,
                    zero_intensity_control: bool = True) -> Dict[str, Any]:
        """Exceedance study, optionally next to the frozen-price control."""
        section = self.analysis.get("scaling", {})
        seed = self.seed if seed is None else seed
        reps = int(reps or section.get("reps", 200))
        model = self.build_model()
        kwargs = dict(
            n_list=section.get("n_list", [1, 4, 16]),
            horizon=float(section.get("horizon", 1.0)),
            eps=float(section.get("eps", 0.5)),
            reps=reps,
            seed=seed,
            config=self.sim_config,
            jobs=self.jobs,
        )
        report = {"command": "scaling-check", "model": scaling_check(model, **kwargs).to_dict()}
        if zero_intensity_control:
            report["control"] = scaling_check(model.without_events(), **kwargs).to_dict()
        return report

    def run_lyapunov(self) -> Dict[str, Any]:
        section = self.analysis.get("lyapunov", {})
        y_max = float(section.get("y_max", 30.0))
        grid = np.linspace(-y_max, y_max, int(section.get("y_points", 61)))
        report = lyapunov_drift_check(self.build_model(), grid, section.get("signal_values"))
        return {"command": "lyapunov-check", "drift": report.to_dict()}

    def run_impact(self, seed: Optional[int] = None, reps: Optional[int] = None) -> Dict[str, Any]:
        section = self.analysis.get("impact", {})
        grid = np.linspace(0.0, float(section.get("grid_end", 240.0)), int(section.get("grid_points", 49)))
        curve = market_impact(
            self.build_model(),
            size=int(section.get("size", 100)),
            grid=grid,
            reps=int(reps or section.get("reps", 20000)),
            seed=self.seed if seed is None else seed,
            burn_in=float(section.get("burn_in", 100.0)),
            double_burn_in=bool(section.get("double_burn_in", False)),
            config=self.sim_config,
            jobs=self.jobs,
        )
        peak_time, peak_value = curve.peak()
        self.logger.info(f"Impact peak {peak_value:.4g} at t={peak_time:.4g}s")
        return {"command": "impact", "curve": curve.to_dict(), "rows": curve.rows()}

    def run_liquidation(self, seed: Optional[int] = None, reps: Optional[int] = None) -> Dict[str, Any]:
        section = self.analysis.get("liquidation", {})
        schedule = LiquidationSchedule(
            interval=float(section.get("interval", 30.0)),
            n_orders=int(section.get("n_orders", 20)),
            sizes=tuple(int(s) for s in section.get("sizes", [25, 15])),
        )
        options = {}
        if self.preset_config.get("id") == "impact":
            options = dict(self.preset_config.get("options", {}))
            options.pop("n_assets", None)
        report = liquidation_study(
            rhos=section.get("rhos", [-0.8, 0.0, 0.8]),
            schedule=schedule,
            reps=int(reps or section.get("reps", 5000)),
            seed=self.seed if seed is None else seed,
            options=options,
            sigmas=section.get("sigmas", [0.02, 0.01]),
            config=self.sim_config,
            jobs=self.jobs,
            bins=int(section.get("bins", 50)),
        )
        for rho in report.rhos:
            self.logger.info(f"rho={rho}: mean cost {report.mean(rho):.4f}, variance {report.variance(rho):.4g}")
        return {"command": "liquidate", "liquidation": report.to_dict(), "rows": report.rows()}

    def save(self, report: Dict[str, Any], stem: str) -> Dict[str, Path]:
        """Write markdown, JSON and (when the report has rows) CSV next to each other."""
        generator = BenchReportGenerator(report, self.config)
        return generator.save_all(self.output_dir, stem)
