"""
Simulation Module
Seeded simulation of market paths and their event logs.
"""

from src.simulation.engine import MarketSimulator, simulate
from src.simulation.replication import derive_seed, run_replicates
from src.simulation.state import (
    FORMAT_VERSION,
    STATE_EVENT,
    EventLog,
    EventLogHeader,
    EventRecord,
    MarketState,
    SamplePath,
    SimConfig,
    SimulationResult,
)

__all__ = [
    "MarketSimulator",
    "simulate",
    "derive_seed",
    "run_replicates",
    "FORMAT_VERSION",
    "STATE_EVENT",
    "EventLog",
    "EventLogHeader",
    "EventRecord",
    "MarketState",
    "SamplePath",
    "SimConfig",
    "SimulationResult",
]
