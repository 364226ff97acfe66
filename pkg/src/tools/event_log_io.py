"""
Event Log I/O
JSON Lines persistence of event logs.

Line 1 is the header ({"type": "header", ...}); every following line is one
jump with fields t, z, x, p and, for queue-reactive logs, the regeneration
detail needed for exact replay. Times are written as decimal strings (repr of
the float), which round-trip exactly on every platform.

Example usage:
    write_event_log(result.log, "outputs/simulate_model1_seed7.jsonl")
    log = read_event_log("outputs/simulate_model1_seed7.jsonl")
"""

import json
import logging
from pathlib import Path
from typing import Iterable, List, Union

from src.errors import LogValidationError
from src.guardrails.log_guardrail import EventLogGuardrail
from src.simulation.state import EventLog, EventLogHeader, EventRecord
from src.tools.artifacts import to_jsonable

logger = logging.getLogger("tools.event_log_io")

PathLike = Union[str, Path]


def format_time(t: float) -> str:
    return repr(float(t))


def event_log_lines(log: EventLog) -> List[str]:
    """Serialized lines, header first."""
    lines = [json.dumps(to_jsonable(log.header.to_json()), sort_keys=True)]
    for record in log.records:
        data = record.to_json()
        data["t"] = format_time(record.t)
        lines.append(json.dumps(to_jsonable(data), sort_keys=True))
    return lines


def write_event_log(log: EventLog, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for line in event_log_lines(log):
            f.write(line + "\n")
    logger.info(f"Wrote {len(log)} records to {path}")
    return path


def parse_event_log(lines: Iterable[str]) -> EventLog:
    """
    Parse and validate serialized lines.

    Raises:
        LogValidationError: first violation found, with its line number
    """
    lines = list(lines)
    report = EventLogGuardrail().validate_lines(lines)
    if not report["valid"]:
        first = report["violations"][0]
        raise LogValidationError(first["message"], first["line"])
    rows = [json.loads(line) for line in lines if line.strip()]
    header = EventLogHeader.from_json(rows[0])
    records = [EventRecord.from_json(row) for row in rows[1:]]
    return EventLog(header, records)


def read_event_log(path: PathLike) -> EventLog:
    path = Path(path)
    if not path.exists():
        raise LogValidationError(f"Event log not found: {path}")
    with open(path, "r") as f:
        log = parse_event_log(f.read().splitlines())
    logger.info(f"Read {len(log)} records from {path}")
    return log
