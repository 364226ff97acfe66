"""
Result Artifacts
Deterministic JSON and CSV output with provenance.

Every JSON artifact embeds the format version, the code version and the full
resolved configuration, and is written with sorted keys so that re-running the
same configuration reproduces the file byte for byte.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import numpy as np
import pandas as pd

from src import __version__
from src.simulation.state import FORMAT_VERSION

logger = logging.getLogger("tools.artifacts")


def artifact_name(command: str, preset_id: str, seed: Optional[int], suffix: str = ".json") -> str:
    """`<command>_<preset>_seed<seed><suffix>`, with no timestamp."""
    seed_part = "none" if seed is None else str(seed)
    return f"{command.replace('-', '_')}_{preset_id}_seed{seed_part}{suffix}"


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy values and tuples into plain JSON types."""
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        obj = float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None if np.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def with_provenance(payload: Mapping[str, Any], config: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    data = dict(payload)
    data["format_version"] = FORMAT_VERSION
    data["code_version"] = __version__
    data["config"] = dict(config) if config is not None else None
    return data


def dumps(payload: Mapping[str, Any]) -> str:
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + "\n"


def write_json_artifact(path: Path, payload: Mapping[str, Any], config: Optional[Mapping[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(dumps(with_provenance(payload, config)))
    logger.info(f"Wrote {path}")
    return path


def write_csv(rows: List[Mapping[str, Any]], path: Path) -> Path:
    """Summary table; columns follow the first row's key order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(rows))
    frame.to_csv(path, index=False, float_format="%.10g")
    logger.info(f"Wrote {path} ({len(frame)} rows)")
    return path
