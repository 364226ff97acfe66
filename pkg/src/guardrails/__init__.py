"""
Guardrails Module
Validation of event logs and real-data logs before they reach the engines.
"""

from .log_guardrail import EventLogGuardrail, RealLogGuardrail

__all__ = [
    "EventLogGuardrail",
    "RealLogGuardrail",
]
