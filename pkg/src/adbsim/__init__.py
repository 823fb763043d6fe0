"""Throughput analysis of alternate distributed beamforming (ADB) in
buffer-aided half-duplex multi-relay networks, with CRS, SFD-MMRS and DF
baselines."""

from .analytic import AdbAnalyticConfig, AdbAnalyticResult, adb_closed_form
from .channel import ChannelParams, RngStream, SlotRealization, sample_slot
from .errors import ConfigError, DomainError
from .power import PowerBudget, PowerSolution, maximize, pr_from_ps
from .protocols import ProtocolKind, SimConfig, ThroughputEstimate, simulate

__all__ = [
    "AdbAnalyticConfig", "AdbAnalyticResult", "adb_closed_form",
    "ChannelParams", "RngStream", "SlotRealization", "sample_slot",
    "ConfigError", "DomainError",
    "PowerBudget", "PowerSolution", "maximize", "pr_from_ps",
    "ProtocolKind", "SimConfig", "ThroughputEstimate", "simulate",
]
