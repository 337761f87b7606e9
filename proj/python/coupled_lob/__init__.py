"""Coupled limit order book simulator with Fourier correlation and SMD calibration."""

from ._core import (
    ConfigError,
    DomainError,
    SimulationError,
    base_dt,
    calibrate,
    epps_curve,
    facts,
    impact,
    ingest,
    jump_length,
    memory_kernel,
    moments,
    nmta,
    normalize_config,
    nufft,
    sibuya,
    simulate,
    simulate_returns,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "SimulationError",
    "base_dt",
    "calibrate",
    "epps_curve",
    "facts",
    "impact",
    "ingest",
    "jump_length",
    "memory_kernel",
    "moments",
    "nmta",
    "normalize_config",
    "nufft",
    "sibuya",
    "simulate",
    "simulate_returns",
]
