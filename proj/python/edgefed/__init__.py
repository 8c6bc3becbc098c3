"""Deterministic simulator for ledger-driven edge (MEC) federation."""

import json as _json

from ._edgefed import (
    ConfigInvalid,
    Contract,
    MetricsError,
    MismatchedScenarios,
    address,
    aggregate,
    compare,
    decompose,
    finality_delay,
    generate_topology,
)
from ._edgefed import run_scenario as _run_scenario


def run_scenario(config):
    """Run a scenario given as a dict or a JSON string."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _run_scenario(config)


__all__ = [
    "ConfigInvalid",
    "Contract",
    "MetricsError",
    "MismatchedScenarios",
    "address",
    "aggregate",
    "compare",
    "decompose",
    "finality_delay",
    "generate_topology",
    "run_scenario",
]
