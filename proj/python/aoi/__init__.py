"""Python bindings for the incident remediation simulator."""

from ._aoi import (
    ConfigError,
    ccr,
    compress,
    default_config,
    ips,
    load_scenarios,
    make_windows,
    run_suite,
    validate_script,
)

__all__ = [
    "ConfigError",
    "ccr",
    "compress",
    "default_config",
    "ips",
    "load_scenarios",
    "make_windows",
    "run_suite",
    "validate_script",
]
