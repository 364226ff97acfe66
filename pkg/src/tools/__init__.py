"""
Tools Module
Event-log persistence, real-data conversion and result artifacts.
"""

from .artifacts import artifact_name, write_csv, write_json_artifact
from .event_log_io import parse_event_log, read_event_log, write_event_log
from .real_data import export_real_log, ingest_real_log, parse_real_log

__all__ = [
    "artifact_name",
    "write_csv",
    "write_json_artifact",
    "parse_event_log",
    "read_event_log",
    "write_event_log",
    "export_real_log",
    "ingest_real_log",
    "parse_real_log",
]
