"""
Bench Report Generator
Markdown, JSON and CSV renderings of analysis and estimation reports.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional

from src.tools.artifacts import write_csv, write_json_artifact


class BenchReportGenerator:
    """
    Formats one report produced by AnalysisBench or the estimator.

    Args:
        report_data: Report dictionary; `command` selects the layout
        config: Resolved configuration embedded in the JSON artifact
    """

    def __init__(self, report_data: Dict[str, Any], config: Optional[Dict[str, Any]] = None):
        self.report_data = report_data
        self.config = config

    def generate_markdown_report(self) -> str:
        lines = []
        command = self.report_data.get("command", "report")
        preset = (self.config or {}).get("preset", {}).get("id", "n/a")
        lines.append(f"# {command.replace('-', ' ').title()} Report")
        lines.append("")
        lines.append(f"**Preset:** {preset}")
        lines.append("")

        if "model" in self.report_data:
            lines.extend(self._scaling_section("Model", self.report_data["model"]))
            if "control" in self.report_data:
                lines.extend(self._scaling_section("Zero-intensity control", self.report_data["control"]))
        if "drift" in self.report_data:
            lines.extend(self._drift_section(self.report_data["drift"]))
        if "curve" in self.report_data:
            lines.extend(self._impact_section(self.report_data["curve"]))
        if "liquidation" in self.report_data:
            lines.extend(self._liquidation_section(self.report_data["liquidation"]))
        if "fit" in self.report_data:
            lines.extend(self._fit_section(self.report_data["fit"]))
        return "\n".join(lines) + "\n"

    def _scaling_section(self, title: str, data: Dict[str, Any]) -> List[str]:
        lines = [f"## {title}", ""]
        lines.append(f"eps = {data['eps']} ticks, T = {data['horizon']}, {data['reps']} paths per n")
        lines.append("")
        lines.append("| n | P(exceed) | 95% CI |")
        lines.append("|---|-----------|--------|")
        for n, p, ci in zip(data["n_list"], data["probabilities"], data["intervals"]):
            lines.append(f"| {n} | {p:.3f} | [{ci[0]:.3f}, {ci[1]:.3f}] |")
        lines.append("")
        lines.append(f"Non-increasing in n: **{data['non_increasing']}**")
        lines.append("")
        return lines

    def _drift_section(self, data: Dict[str, Any]) -> List[str]:
        lines = ["## Drift", ""]
        lines.append(f"- **K = max(LV + V):** {data['K']:.6g}")
        y_star = data.get("y_star")
        lines.append(f"- **LV + V <= 0 for |y| >= :** {y_star if y_star is not None else 'not reached on the grid'}")
        lines.append(f"- **Grid:** {data['grid_points']} points x {data['signal_points']} signal states")
        lines.append("")
        return lines

    def _impact_section(self, data: Dict[str, Any]) -> List[str]:
        lines = ["## Mean impact", ""]
        lines.append(f"Order size {data['size']}, {data['reps']} paths, burn-in {data['burn_in']}s")
        lines.append("")
        lines.append(f"**Peak:** {data['peak_value']:.5f} at t = {data['peak_time']:.1f}s")
        lines.append("")
        lines.append("| t (s) | mean | 95% CI |")
        lines.append("|-------|------|--------|")
        step = max(1, len(data["times"]) // 12)
        for i in range(0, len(data["times"]), step):
            lines.append(
                f"| {data['times'][i]:.1f} | {data['mean'][i]:.5f} | "
                f"[{data['ci_low'][i]:.5f}, {data['ci_high'][i]:.5f}] |"
            )
        lines.append("")
        return lines

    def _liquidation_section(self, data: Dict[str, Any]) -> List[str]:
        lines = ["## Cost per share", ""]
        schedule = data["schedule"]
        lines.append(
            f"{schedule['n_orders']} orders of {schedule['sizes']} every {schedule['interval']}s, "
            f"{data['reps']} paths per correlation"
        )
        lines.append("")
        lines.append("| rho | mean | variance | 95% CI |")
        lines.append("|-----|------|----------|--------|")
        for row in data["by_rho"]:
            lines.append(
                f"| {row['rho']:+.2f} | {row['mean']:.4f} | {row['variance']:.4g} | "
                f"[{row['ci'][0]:.4f}, {row['ci'][1]:.4f}] |"
            )
        lines.append("")
        lines.append(f"Variance increasing in rho: **{data['variance_increasing']}**")
        lines.append("")
        return lines

    def _fit_section(self, data: Dict[str, Any]) -> List[str]:
        lines = ["## Estimate", ""]
        lines.append(f"**Best log-likelihood:** {data['log_likelihood']:.6f} ({data['evaluations']} evaluations)")
        lines.append("")
        lines.append("| parameter | value |")
        lines.append("|-----------|-------|")
        for name, value in data["theta"].items():
            lines.append(f"| {name} | {value:.6g} |")
        lines.append("")
        lines.append("### Restarts")
        lines.append("")
        for i, restart in enumerate(data["restarts"], 1):
            flag = " (budget exhausted)" if restart["budget_exhausted"] else ""
            lines.append(f"{i}. seed {restart['seed']}: {restart['log_likelihood']:.6f}{flag}")
        lines.append("")
        return lines

    def save_report(self, output_path: str, format: str = "markdown") -> Path:
        path = Path(output_path)
        if format == "markdown":
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w") as f:
                f.write(self.generate_markdown_report())
            return path
        if format == "json":
            payload = {k: v for k, v in self.report_data.items() if k != "rows"}
            return write_json_artifact(path, payload, self.config)
        raise ValueError(f"Unknown report format: {format}")

    def save_all(self, output_dir: Path, stem: str) -> Dict[str, Path]:
        """JSON artifact, markdown report and, when the report carries rows, a CSV table."""
        output_dir = Path(output_dir)
        paths = {
            "json": self.save_report(str(output_dir / f"{stem}.json"), "json"),
            "markdown": self.save_report(str(output_dir / f"{stem}_report.md"), "markdown"),
        }
        rows = self.report_data.get("rows")
        if rows:
            paths["csv"] = write_csv(rows, output_dir / f"{stem}.csv")
        return paths
