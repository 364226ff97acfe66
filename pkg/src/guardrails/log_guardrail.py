"""
Log Guardrails
Line-level validation of serialized event logs and real-data logs.

Both guardrails return a dictionary with 'valid' and 'violations'; each
violation names the 1-based line it was found on so that malformed files can be
fixed by hand.

Example usage:
    report = EventLogGuardrail().validate_lines(open(path).read().splitlines())
    if not report["valid"]:
        print(report["violations"][0])
"""

import json
import logging
import math
from typing import Any, Dict, List, Optional, Sequence

DIRECTIONS = ("-", "+")
REAL_STATE = "state"
GRID_TOLERANCE = 1e-6


def _parse_time(value: Any) -> Optional[float]:
    try:
        t = float(value)
    except (TypeError, ValueError):
        return None
    return t if math.isfinite(t) else None


def _on_grid(price: float, tick: float) -> bool:
    offset = price / tick - 0.5
    return abs(offset - round(offset)) <= GRID_TOLERANCE


class _LineGuardrail:
    """Shared line walking: JSON decoding, header handling and time ordering."""

    header_keys: Sequence[str] = ()
    record_keys: Sequence[str] = ()
    logger_name = "guardrails.log"

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = config or {}
        self.logger = logging.getLogger(self.logger_name)
        self.max_violations = int(self.config.get("max_violations", 50))

    def validate_lines(self, lines: Sequence[str]) -> Dict[str, Any]:
        """
        Validate serialized lines, header first.

        Args:
            lines: File content split into lines (blank lines are ignored)

        Returns:
            Validation result with 'valid', 'violations' and 'records'
        """
        violations: List[Dict[str, Any]] = []
        header = None
        previous_t = 0.0
        n_records = 0

        for number, line in enumerate(lines, 1):
            if len(violations) >= self.max_violations:
                break
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as e:
                violations.append(self._violation(number, f"invalid JSON: {e.msg}"))
                continue
            if not isinstance(row, dict):
                violations.append(self._violation(number, "line is not a JSON object"))
                continue

            if header is None:
                if row.get("type") != "header":
                    violations.append(self._violation(number, "first line must be the header"))
                    break
                missing = [k for k in self.header_keys if k not in row]
                if missing:
                    violations.append(self._violation(number, f"header missing {missing}"))
                    break
                problem = self._check_header(row)
                if problem:
                    violations.append(self._violation(number, problem))
                    break
                header = row
                continue

            n_records += 1
            missing = [k for k in self.record_keys if k not in row]
            if missing:
                violations.append(self._violation(number, f"record missing {missing}"))
                continue
            t = _parse_time(row["t"])
            if t is None:
                violations.append(self._violation(number, f"invalid time {row['t']!r}"))
                continue
            if t <= previous_t:
                violations.append(self._violation(number, f"time {t} is not after {previous_t}"))
            elif t > float(header["horizon"]):
                violations.append(self._violation(number, f"time {t} beyond horizon {header['horizon']}"))
            previous_t = max(previous_t, t)
            problem = self._check_record(row, header)
            if problem:
                violations.append(self._violation(number, problem))

        if header is None and not violations:
            violations.append(self._violation(1, "empty log: header line missing"))

        if violations:
            self.logger.warning(f"Log validation failed: {len(violations)} violation(s)")

        return {
            "valid": len(violations) == 0,
            "violations": violations,
            "records": n_records,
        }

    def _violation(self, line: int, message: str) -> Dict[str, Any]:
        return {"line": line, "message": message}

    def _check_header(self, header: Dict[str, Any]) -> Optional[str]:
        return None

    def _check_record(self, row: Dict[str, Any], header: Dict[str, Any]) -> Optional[str]:
        return None


class EventLogGuardrail(_LineGuardrail):
    """Checks internal event logs: field presence, time order and price grid."""

    header_keys = ("preset", "horizon", "ticks", "p0", "x0")
    record_keys = ("t", "z", "x", "p")
    logger_name = "guardrails.event_log"

    def _check_header(self, header: Dict[str, Any]) -> Optional[str]:
        ticks, p0 = header["ticks"], header["p0"]
        if not isinstance(ticks, list) or not ticks or any(float(t) <= 0 for t in ticks):
            return f"ticks must be a non-empty list of positive numbers, got {ticks!r}"
        if not isinstance(p0, list) or len(p0) != len(ticks):
            return f"p0 must list one price per asset, got {p0!r}"
        for p, tick in zip(p0, ticks):
            if not _on_grid(float(p), float(tick)):
                return f"initial price {p} is not on the grid of tick {tick}"
        if _parse_time(header["horizon"]) is None or float(header["horizon"]) <= 0:
            return f"horizon must be positive, got {header['horizon']!r}"
        return None

    def _check_record(self, row: Dict[str, Any], header: Dict[str, Any]) -> Optional[str]:
        if not isinstance(row["z"], str) or not row["z"]:
            return f"event id must be a non-empty string, got {row['z']!r}"
        if not isinstance(row["x"], dict):
            return "state snapshot x must be an object"
        p = row["p"]
        if not isinstance(p, list) or len(p) != len(header["ticks"]):
            return f"p must list {len(header['ticks'])} prices"
        for price, tick in zip(p, header["ticks"]):
            if not _on_grid(float(price), float(tick)):
                return f"price {price} is not on the grid of tick {tick}"
        return None


class RealLogGuardrail(_LineGuardrail):
    """
    Checks real-data logs: one record per price move or signal update.

    Header: type, assets, ticks, p0, x0, horizon and optionally `signal`
    ("imbalance" restricts every value to [-1, 1]). Records: t, asset
    (1-based), direction ("-", "+" or "state"), signal values and optionally
    the asset price after the event.
    """

    header_keys = ("assets", "ticks", "p0", "x0", "horizon")
    record_keys = ("t", "asset", "direction")
    logger_name = "guardrails.real_log"

    def _check_header(self, header: Dict[str, Any]) -> Optional[str]:
        n = header["assets"]
        if not isinstance(n, int) or n < 1:
            return f"assets must be a positive integer, got {n!r}"
        for key in ("ticks", "p0", "x0"):
            if not isinstance(header[key], list) or len(header[key]) != n:
                return f"{key} must have one entry per asset"
        if _parse_time(header["horizon"]) is None or float(header["horizon"]) <= 0:
            return f"horizon must be positive, got {header['horizon']!r}"
        for signal in header["x0"]:
            problem = self._check_signal(signal, header)
            if problem:
                return f"x0: {problem}"
        return None

    def _check_signal(self, values: Any, header: Dict[str, Any]) -> Optional[str]:
        if not isinstance(values, list) or not values:
            return f"signal must be a non-empty list, got {values!r}"
        for v in values:
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                return f"signal value {v!r} is not a finite number"
            if header.get("signal", "imbalance") == "imbalance" and abs(v) > 1.0:
                return f"imbalance {v} outside [-1, 1]"
        return None

    def _check_record(self, row: Dict[str, Any], header: Dict[str, Any]) -> Optional[str]:
        asset = row["asset"]
        if not isinstance(asset, int) or not 1 <= asset <= header["assets"]:
            return f"asset must be in 1..{header['assets']}, got {asset!r}"
        if row["direction"] not in DIRECTIONS + (REAL_STATE,):
            return f"direction must be '-', '+' or 'state', got {row['direction']!r}"
        values = row.get("signal")
        if values is None and "imbalance" in row:
            values = [row["imbalance"]]
        if values is None:
            return "record carries neither signal nor imbalance"
        problem = self._check_signal(values, header)
        if problem:
            return problem
        if len(values) != len(header["x0"][asset - 1]):
            return f"signal has {len(values)} values, expected {len(header['x0'][asset - 1])}"
        if row.get("price") is not None:
            tick = float(header["ticks"][asset - 1])
            if not _on_grid(float(row["price"]), tick):
                return f"price {row['price']} is not on the grid of tick {tick}"
        return None
