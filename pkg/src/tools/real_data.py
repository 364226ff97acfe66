"""
Real-Data Logs
Conversion between real-data logs and internal event logs.

A real-data log is JSON Lines. The header gives the number of assets, ticks,
initial prices and signals and the horizon in file units; each record is one
price move of one asset ("-" or "+") or a signal-only update ("state"),
carrying that asset's signal after the event and, optionally, its price.

Ingestion maps moves of asset i onto the signal-driven alphabet "i-" / "i+"
and signal updates onto state-only jumps, then multiplies times by
`time_scale` and prices by `price_scale`.

Example usage:
    log = ingest_real_log("data/sample_real_log.jsonl", {"price_scale": 100.0})
    export_real_log(result.log, "outputs/model2_real.jsonl")
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from src.errors import LogValidationError
from src.guardrails.log_guardrail import REAL_STATE, RealLogGuardrail
from src.simulation.state import EventLog, EventLogHeader, EventRecord
from src.tools.event_log_io import format_time

logger = logging.getLogger("tools.real_data")

PathLike = Union[str, Path]


def _scales(units: Optional[Mapping[str, Any]]) -> tuple:
    units = dict(units or {})
    time_scale = float(units.get("time_scale", 1.0))
    price_scale = float(units.get("price_scale", 1.0))
    if time_scale <= 0 or price_scale <= 0:
        raise ValueError(f"Unit scales must be positive, got {time_scale}, {price_scale}")
    return time_scale, price_scale


def _signal_of(row: Dict[str, Any]) -> List[float]:
    if row.get("signal") is not None:
        return [float(v) for v in row["signal"]]
    return [float(row["imbalance"])]


def parse_real_log(
    lines: List[str], units: Optional[Mapping[str, Any]] = None, preset_id: Optional[str] = None
) -> EventLog:
    """
    Convert real-data lines into an internal event log.

    Args:
        lines: File content, header first
        units: Mapping with `time_scale` and `price_scale` (file -> internal)
        preset_id: Preset the log is meant for; defaults to the header's, then "imbalance"

    Returns:
        EventLog over the signal-driven alphabet

    Raises:
        LogValidationError: malformed line, or a move that is not one tick
    """
    report = RealLogGuardrail().validate_lines(lines)
    if not report["valid"]:
        first = report["violations"][0]
        raise LogValidationError(first["message"], first["line"])

    time_scale, price_scale = _scales(units)
    numbered = [(n, json.loads(line)) for n, line in enumerate(lines, 1) if line.strip()]
    _, head = numbered[0]

    ticks = [float(t) * price_scale for t in head["ticks"]]
    prices = [float(p) * price_scale for p in head["p0"]]
    signal = [[float(v) for v in s] for s in head["x0"]]
    preset_id = preset_id or head.get("preset", "imbalance")

    header = EventLogHeader(
        preset_id=preset_id,
        horizon=float(head["horizon"]) * time_scale,
        ticks=tuple(ticks),
        p0=tuple(prices),
        x0={"signal": [list(s) for s in signal]},
        options={"ticks": list(ticks), "initial_prices": list(prices)},
        source="real",
    )

    records = []
    for number, row in numbered[1:]:
        i = row["asset"] - 1
        direction = row["direction"]
        if direction == REAL_STATE:
            z = None
        else:
            z = f"{i + 1}{direction}"
            expected = prices[i] + (ticks[i] if direction == "+" else -ticks[i])
            if row.get("price") is not None:
                observed = float(row["price"]) * price_scale
                if abs(observed - expected) > 1e-6 * ticks[i]:
                    raise LogValidationError(
                        f"asset {i + 1} moved from {prices[i]} to {observed}, not one tick", number
                    )
                expected = observed
            prices[i] = expected
        signal[i] = _signal_of(row)
        records.append(
            EventRecord(
                float(row["t"]) * time_scale,
                z,
                {"signal": [list(s) for s in signal]},
                tuple(prices),
            )
        )

    logger.info(f"Ingested {len(records)} records over {header.horizon} ({len(ticks)} assets)")
    return EventLog(header, records)


def ingest_real_log(
    path: PathLike, units: Optional[Mapping[str, Any]] = None, preset_id: Optional[str] = None
) -> EventLog:
    path = Path(path)
    if not path.exists():
        raise LogValidationError(f"Real-data log not found: {path}")
    with open(path, "r") as f:
        return parse_real_log(f.read().splitlines(), units, preset_id)


def real_log_lines(log: EventLog, units: Optional[Mapping[str, Any]] = None) -> List[str]:
    """
    Serialize a signal-driven event log in the real-data layout.

    Raises:
        LogValidationError: the log's states carry no signal
    """
    if "signal" not in log.header.x0:
        raise LogValidationError(f"Preset {log.header.preset_id} has no signal to export")
    time_scale, price_scale = _scales(units)
    header = {
        "type": "header",
        "preset": log.header.preset_id,
        "source": log.header.source,
        "assets": len(log.header.ticks),
        "ticks": [t / price_scale for t in log.header.ticks],
        "p0": [p / price_scale for p in log.header.p0],
        "x0": log.header.x0["signal"],
        "horizon": log.header.horizon / time_scale,
        "signal": "imbalance" if log.header.preset_id == "imbalance" else "normal",
    }
    lines = [json.dumps(header, sort_keys=True)]

    previous = log.header.x0["signal"]
    for record in log.records:
        current = record.x["signal"]
        if record.z is None:
            changed = [i for i, (a, b) in enumerate(zip(previous, current)) if a != b]
            asset = changed[0] if changed else 0
            direction = REAL_STATE
        else:
            asset = int(record.z[:-1]) - 1
            direction = record.z[-1]
        row = {
            "t": format_time(record.t / time_scale),
            "asset": asset + 1,
            "direction": direction,
            "signal": list(current[asset]),
            "price": record.p[asset] / price_scale,
        }
        lines.append(json.dumps(row, sort_keys=True))
        previous = current
    return lines


def export_real_log(log: EventLog, path: PathLike, units: Optional[Mapping[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for line in real_log_lines(log, units):
            f.write(line + "\n")
    logger.info(f"Exported {len(log)} records to {path}")
    return path
