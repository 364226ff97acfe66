"""
Command Line Interface
Subcommands for simulation, estimation and the analysis benches.

Every command resolves the YAML configuration, applies the command-line
overrides, writes its artifacts under the output directory and prints a short
summary. Failures are logged and mapped to exit codes: 2 for invalid input,
3 for numerical faults.

Example usage:
    python main.py simulate --config configs/model1.yaml --seed 7 --horizon 500
    python main.py estimate --config configs/model1.yaml --log outputs/simulate_model1_seed7.jsonl
    python main.py impact --config configs/impact.yaml --reps 2000 --jobs 4
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.config import RunConfig, load_config
from src.errors import EXIT_OK, EXIT_VALIDATION, exit_code_for
from src.estimation.estimator import estimate
from src.evaluation.evaluator import AnalysisBench
from src.evaluation.report_generator import BenchReportGenerator
from src.guardrails.log_guardrail import EventLogGuardrail, RealLogGuardrail
from src.likelihood.engine import log_likelihood
from src.models.presets import get_preset
from src.simulation.engine import MarketSimulator
from src.simulation.state import EventLog
from src.tools.artifacts import artifact_name, write_json_artifact
from src.tools.event_log_io import read_event_log, write_event_log
from src.tools.real_data import export_real_log, ingest_real_log

COMMANDS = (
    "simulate",
    "estimate",
    "likelihood",
    "impact",
    "liquidate",
    "scaling-check",
    "lyapunov-check",
    "validate-log",
)
LOG_COMMANDS = ("estimate", "likelihood", "validate-log")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="config.yaml", help="Path to configuration file")
    common.add_argument("--seed", type=int, help="Master seed (overrides simulation.seed and estimator.seed)")
    common.add_argument("--out", help="Output directory (overrides outputs.dir)")
    common.add_argument("--reps", type=int, help="Monte-Carlo replicates for the analysis benches")
    common.add_argument("--horizon", type=float, help="Simulation horizon in seconds")
    common.add_argument("--jobs", type=int, help="Worker processes")

    parser = argparse.ArgumentParser(
        description="Order book models driven by a hidden efficient price"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        p = sub.add_parser(command, parents=[common])
        if command in LOG_COMMANDS:
            p.add_argument("--log", required=True, help="Event log (JSON Lines)")
            p.add_argument("--real", action="store_true", help="Read --log as a real-data log")
        if command == "simulate":
            p.add_argument("--export-real", action="store_true",
                           help="Also write the log in the real-data layout (signal presets)")
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    if args.seed is not None:
        overrides["simulation"] = {"seed": args.seed}
        overrides["estimator"] = {"seed": args.seed}
    if args.horizon is not None:
        if args.command == "scaling-check":
            overrides["analysis"] = {"scaling": {"horizon": args.horizon}}
        else:
            overrides.setdefault("simulation", {})["horizon"] = args.horizon
    if args.out is not None:
        overrides["outputs"] = {"dir": args.out}
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    return overrides


def setup_logging(config: RunConfig) -> None:
    """Setup logging configuration."""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if config.logging.file:
        Path(config.logging.file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(config.logging.file))
    logging.basicConfig(
        level=getattr(logging, config.logging.level),
        format=config.logging.format,
        handlers=handlers,
        force=True,
    )


class CLI:
    """
    Runs one subcommand against a resolved configuration.

    Args:
        config: Validated run configuration (CLI overrides already applied)
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self.config_dict = config.to_dict()
        self.logger = logging.getLogger("cli")
        self.output_dir = Path(config.outputs.dir)
        self.preset = get_preset(config.preset.id)

    def run(self, args: argparse.Namespace) -> int:
        handler = getattr(self, "cmd_" + args.command.replace("-", "_"))
        self.logger.info(f"Running {args.command} for preset {self.preset.preset_id}")
        return handler(args)

    # ---- helpers ----

    def _seed(self) -> int:
        return self.config.simulation.seed

    def _stem(self, command: str, seed: Optional[int] = None) -> str:
        return artifact_name(command, self.preset.preset_id, self._seed() if seed is None else seed, "")

    def _options(self, log: Optional[EventLog] = None) -> Dict[str, Any]:
        if self.config.preset.options or log is None:
            return dict(self.config.preset.options)
        return dict(log.header.options or {})

    def _read_log(self, args: argparse.Namespace) -> EventLog:
        if args.real:
            return ingest_real_log(args.log, self.config_dict["units"], self.preset.preset_id)
        return read_event_log(args.log)

    def _print_summary(self, title: str, items: Dict[str, Any]) -> None:
        print("=" * 70)
        print(title)
        print("=" * 70)
        for key, value in items.items():
            print(f"  {key}: {value}")

    # ---- commands ----

    def cmd_simulate(self, args: argparse.Namespace) -> int:
        model = self.preset.build(self.config.preset.theta, self.config.preset.options)
        simulator = MarketSimulator(model, self.config.simulation.to_sim_config())
        result = simulator.run()
        log_path = write_event_log(result.log, self.output_dir / (self._stem("simulate") + ".jsonl"))
        summary = result.summary()
        summary["event_log"] = str(log_path)
        if args.export_real:
            real_path = self.output_dir / (self._stem("simulate") + "_real.jsonl")
            summary["real_log"] = str(export_real_log(result.log, real_path, self.config_dict["units"]))
        write_json_artifact(self.output_dir / artifact_name("simulate", self.preset.preset_id, self._seed()),
                            {"command": "simulate", "summary": summary}, self.config_dict)
        self._print_summary("SIMULATION", {
            "events": len(result.log),
            "horizon": result.log.horizon,
            "final prices": summary["final_prices"],
            "max |S - P| (ticks)": summary["max_gap_ticks"],
            "event log": log_path,
        })
        return EXIT_OK

    def cmd_estimate(self, args: argparse.Namespace) -> int:
        log = self._read_log(args)
        fit = estimate(
            log,
            self.preset,
            config=self.config.estimator.to_cmaes_config(),
            likelihood_config=self.config.likelihood.to_likelihood_config(),
            options=self._options(log),
            start=self.config.estimator.start,
            jobs=self.config.jobs,
        )
        report = {"command": "estimate", "fit": fit.to_dict(), "rows": fit.restart_table()}
        seed = self.config.estimator.seed
        paths = BenchReportGenerator(report, self.config_dict).save_all(self.output_dir, self._stem("estimate", seed))
        items = {name: f"{value:.6g}" for name, value in fit.theta.items()}
        items["log-likelihood"] = f"{fit.log_likelihood:.6f}"
        items["evaluations"] = fit.evaluations
        items["report"] = paths["json"]
        self._print_summary("ESTIMATE", items)
        return EXIT_OK

    def cmd_likelihood(self, args: argparse.Namespace) -> int:
        log = self._read_log(args)
        theta: Dict[str, float] = dict(self.config.preset.theta)
        if not theta and log.header.theta and log.header.preset_id == self.preset.preset_id:
            theta = dict(log.header.theta)
        model = self.preset.build(theta, self._options(log))
        result = log_likelihood(log, model, self.config.likelihood.to_likelihood_config())
        payload = {"command": "likelihood", "log": str(args.log), "theta": dict(model.theta), "result": result.to_dict()}
        path = write_json_artifact(
            self.output_dir / artifact_name("likelihood", self.preset.preset_id, self._seed()), payload, self.config_dict
        )
        self._print_summary("LIKELIHOOD", {
            "log-likelihood": f"{result.value:.10g}",
            "intervals": result.intervals,
            "substeps": result.substeps,
            "report": path,
        })
        return EXIT_OK

    def _bench(self) -> AnalysisBench:
        return AnalysisBench(self.config_dict)

    def cmd_impact(self, args: argparse.Namespace) -> int:
        bench = self._bench()
        report = bench.run_impact(reps=args.reps)
        paths = bench.save(report, self._stem("impact"))
        curve = report["curve"]
        self._print_summary("MEAN IMPACT", {
            "peak": f"{curve['peak_value']:.5f} at t = {curve['peak_time']:.1f}s",
            "final": f"{curve['mean'][-1]:.5f}",
            "paths": curve["reps"],
            "report": paths["json"],
        })
        return EXIT_OK

    def cmd_liquidate(self, args: argparse.Namespace) -> int:
        bench = self._bench()
        report = bench.run_liquidation(reps=args.reps)
        paths = bench.save(report, self._stem("liquidate"))
        items = {
            f"rho={row['rho']:+.2f}": f"mean {row['mean']:.4f}, variance {row['variance']:.4g}"
            for row in report["liquidation"]["by_rho"]
        }
        items["variance increasing in rho"] = report["liquidation"]["variance_increasing"]
        items["report"] = paths["json"]
        self._print_summary("LIQUIDATION COST", items)
        return EXIT_OK

    def cmd_scaling_check(self, args: argparse.Namespace) -> int:
        bench = self._bench()
        report = bench.run_scaling(reps=args.reps)
        paths = bench.save(report, self._stem("scaling-check"))
        model = report["model"]
        items = {f"n={n}": f"{p:.3f}" for n, p in zip(model["n_list"], model["probabilities"])}
        items["non-increasing"] = model["non_increasing"]
        items["report"] = paths["json"]
        self._print_summary("SCALING CHECK", items)
        return EXIT_OK

    def cmd_lyapunov_check(self, args: argparse.Namespace) -> int:
        bench = self._bench()
        report = bench.run_lyapunov()
        paths = bench.save(report, self._stem("lyapunov-check"))
        drift = report["drift"]
        self._print_summary("LYAPUNOV DRIFT", {
            "K": f"{drift['K']:.6g}",
            "y*": drift.get("y_star"),
            "report": paths["json"],
        })
        return EXIT_OK

    def cmd_validate_log(self, args: argparse.Namespace) -> int:
        path = Path(args.log)
        if not path.exists():
            self.logger.error(f"Log not found: {path}")
            return EXIT_VALIDATION
        with open(path, "r") as f:
            lines = f.read().splitlines()
        guardrail = RealLogGuardrail() if args.real else EventLogGuardrail()
        report = guardrail.validate_lines(lines)
        if not report["valid"]:
            for violation in report["violations"]:
                print(f"{path}:{violation['line']}: {violation['message']}")
            return EXIT_VALIDATION
        self._print_summary("LOG VALID", {"file": path, "records": report["records"]})
        return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, overrides_from_args(args))
    except Exception as e:
        logging.basicConfig(level=logging.INFO)
        logging.getLogger("cli").error(f"Configuration error: {e}")
        return exit_code_for(e)
    setup_logging(config)
    logger = logging.getLogger("cli")
    try:
        return CLI(config).run(args)
    except Exception as e:
        logger.error(f"{args.command} failed: {e}")
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
