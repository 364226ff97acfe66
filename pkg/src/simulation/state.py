"""
Simulation State
Run configuration, the mutable market state and the recorded event log.

An EventLog is the observed data of one path: a header describing how it was
produced, then one record per jump with the model state and reference prices
right after the jump. State-only jumps (signal redraws) carry z = None.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

FORMAT_VERSION = "1.0"
SCHEMES = ("frozen", "thinning")
STATE_EVENT = "state"


@dataclass
class SimConfig:
    """
    Simulation settings.

    Args:
        horizon: Simulated time T in seconds
        seed: Master seed
        scheme: "frozen" (frozen intensities over substeps of `step`) or "thinning"
        step: Substep of the frozen scheme
        window: Majorant window h of the thinning scheme
        safety: Majorant safety factor kappa (> 1)
        max_events: Explosion guard
        sample_interval: Spacing of the recorded (t, S, P) sample path; None picks T/1000
        chunk: Substeps of Brownian increments drawn at once by the frozen scheme
    """

    horizon: float = 1.0
    seed: int = 0
    scheme: str = "frozen"
    step: float = 1e-3
    window: float = 0.05
    safety: float = 1.5
    max_events: int = 10_000_000
    sample_interval: Optional[float] = None
    chunk: int = 4096

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"Unknown simulation scheme {self.scheme!r}; expected {SCHEMES}")
        if not self.horizon >= 0:
            raise ValueError(f"Horizon must be >= 0, got {self.horizon}")
        if not self.step > 0:
            raise ValueError(f"Step must be > 0, got {self.step}")
        if not self.window > 0:
            raise ValueError(f"Thinning window must be > 0, got {self.window}")
        if not self.safety > 1:
            raise ValueError(f"Safety factor must be > 1, got {self.safety}")
        if self.max_events < 1 or self.chunk < 1:
            raise ValueError("max_events and chunk must be positive")
        if self.sample_interval is not None and not self.sample_interval > 0:
            raise ValueError(f"Sample interval must be > 0, got {self.sample_interval}")

    @property
    def resolved_sample_interval(self) -> float:
        if self.sample_interval is not None:
            return float(self.sample_interval)
        return max(self.horizon / 1000.0, self.step)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "horizon": self.horizon,
            "seed": self.seed,
            "scheme": self.scheme,
            "step": self.step,
            "window": self.window,
            "safety": self.safety,
            "max_events": self.max_events,
            "sample_interval": self.sample_interval,
        }


@dataclass
class MarketState:
    """(t, S, P, X, N) of one path; P is held as grid indices."""

    t: float
    s: np.ndarray
    grid: Tuple[int, ...]
    x: Any
    counts: Counter = field(default_factory=Counter)

    def copy(self) -> "MarketState":
        return MarketState(self.t, np.array(self.s, dtype=float), tuple(self.grid), self.x, Counter(self.counts))

    @property
    def n_events(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class EventRecord:
    """One jump: time, event id (None for state-only jumps), X and P after it."""

    t: float
    z: Optional[str]
    x: Dict[str, Any]
    p: Tuple[float, ...]
    detail: Optional[Dict[str, Any]] = None

    @property
    def event_id(self) -> str:
        return STATE_EVENT if self.z is None else self.z

    def to_json(self) -> Dict[str, Any]:
        data = {"t": self.t, "z": self.event_id, "x": self.x, "p": list(self.p)}
        if self.detail is not None:
            data["detail"] = self.detail
        return data

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "EventRecord":
        z = data["z"]
        return cls(
            float(data["t"]),
            None if z == STATE_EVENT else str(z),
            data["x"],
            tuple(float(v) for v in data["p"]),
            data.get("detail"),
        )


@dataclass
class EventLogHeader:
    preset_id: str
    horizon: float
    ticks: Tuple[float, ...]
    p0: Tuple[float, ...]
    x0: Dict[str, Any]
    theta: Optional[Dict[str, float]] = None
    options: Optional[Dict[str, Any]] = None
    seed: Optional[int] = None
    scheme: Optional[str] = None
    source: str = "simulated"
    format_version: str = FORMAT_VERSION

    def to_json(self) -> Dict[str, Any]:
        return {
            "type": "header",
            "format_version": self.format_version,
            "preset": self.preset_id,
            "horizon": self.horizon,
            "ticks": list(self.ticks),
            "p0": list(self.p0),
            "x0": self.x0,
            "theta": self.theta,
            "options": self.options,
            "seed": self.seed,
            "scheme": self.scheme,
            "source": self.source,
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "EventLogHeader":
        return cls(
            preset_id=data["preset"],
            horizon=float(data["horizon"]),
            ticks=tuple(float(v) for v in data["ticks"]),
            p0=tuple(float(v) for v in data["p0"]),
            x0=data["x0"],
            theta=data.get("theta"),
            options=data.get("options"),
            seed=data.get("seed"),
            scheme=data.get("scheme"),
            source=data.get("source", "simulated"),
            format_version=str(data.get("format_version", FORMAT_VERSION)),
        )


@dataclass
class EventLog:
    header: EventLogHeader
    records: List[EventRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def horizon(self) -> float:
        return self.header.horizon

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records], dtype=float)

    def counts(self) -> Dict[str, int]:
        """Number of recorded events per event id (state-only jumps excluded)."""
        return dict(Counter(r.z for r in self.records if r.z is not None))

    def prices(self) -> np.ndarray:
        """Reference prices before the first jump and after every jump, shape (M+1, d)."""
        rows = [self.header.p0] + [r.p for r in self.records]
        return np.asarray(rows, dtype=float)

    def shifted(self, offset: Sequence[float]) -> "EventLog":
        """Same log with every price moved by `offset` (per asset)."""
        offset = tuple(float(o) for o in offset)

        def move(p):
            return tuple(v + o for v, o in zip(p, offset))

        header = EventLogHeader(**{**self.header.__dict__, "p0": move(self.header.p0)})
        records = [EventRecord(r.t, r.z, r.x, move(r.p), r.detail) for r in self.records]
        return EventLog(header, records)


@dataclass
class SamplePath:
    """(t, S, P) on a regular time grid."""

    times: np.ndarray
    s: np.ndarray
    p: np.ndarray

    def gap(self) -> np.ndarray:
        return self.s - self.p


@dataclass
class SimulationResult:
    log: EventLog
    path: SamplePath
    final_state: MarketState
    max_gap_ticks: np.ndarray

    @property
    def n_events(self) -> int:
        return self.final_state.n_events

    def summary(self) -> Dict[str, Any]:
        return {
            "preset": self.log.header.preset_id,
            "seed": self.log.header.seed,
            "horizon": self.log.horizon,
            "n_records": len(self.log),
            "counts": dict(sorted(self.final_state.counts.items())),
            "final_prices": list(self.log.records[-1].p if self.log.records else self.log.header.p0),
            "max_gap_ticks": [float(v) for v in self.max_gap_ticks],
        }
