"""Scenario files, orchestration, run directories and the command line."""

from .config import PRESETS, Scenario, emit_config, load_preset, parse_config
from .probe import FringeProbeResult, fringe_amplitude, fringe_decay_probe
from .runner import RunResult, read_manifest, run_scenario
from .snapshots import emit_snapshot, read_snapshot

__all__ = [
    "FringeProbeResult", "PRESETS", "RunResult", "Scenario", "emit_config", "emit_snapshot",
    "fringe_amplitude", "fringe_decay_probe", "load_preset", "parse_config", "read_manifest",
    "read_snapshot", "run_scenario",
]
