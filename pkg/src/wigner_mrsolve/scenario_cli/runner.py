"""Scenario orchestration and the on-disk run directory."""

import hashlib
import io
import json
import logging
import math
import os
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, NonConvergenceError, WignerError
from ..phase_space import cat_state, diagnose, gaussian_coherent_state
from ..phase_space.diagnostics import default_depth, write_records_csv
from ..phase_space.multiscale import decompose_multiscale
from ..solver import (
    EvolutionSchedule, build_operator, evolve, stability_estimate, steady_state, threshold_compress,
)
from ..wavelet_core import basis_entropy, best_basis, dwt_2d, standard_basis_leaves
from ..wavelet_core.packets import shannon_entropy
from . import figures
from .config import emit_config
from .snapshots import atomic_write, emit_snapshot, read_snapshot

log = logging.getLogger(__name__)

MANIFEST = "MANIFEST"
CONFIG_ECHO = "config.txt"
DIAGNOSTICS = "diagnostics.csv"
SUMMARY = "summary.json"
COMPRESSION_EPS = 1e-6


@dataclass
class RunResult:
    exit_code: int
    out_dir: str
    summary: dict
    error: str = None
    files: list = field(default_factory=list)


def initial_field(scenario):
    s = scenario.initial_state
    if s.kind == "coherent":
        return gaussian_coherent_state(scenario.grid, s.q0, s.p0, s.sigma, scenario.params)
    if s.kind == "cat":
        return cat_state(scenario.grid, s.q0, s.sigma, scenario.params)
    W = read_snapshot(s.path)
    if W.grid != scenario.grid:
        raise ConfigError([f"{s.path}: snapshot grid {W.grid} differs from the scenario grid {scenario.grid}"])
    return W.normalized()


def basis_statistics(W, order, depth):
    """Sparsity, compression and best-basis entropy of a field."""
    pyr = dwt_2d(W.values, order, depth)
    packed = pyr.to_array()
    comp = threshold_compress(pyr, COMPRESSION_EPS)
    tree, _ = best_basis(W.values, order, depth)
    std = basis_entropy(W.values, order, standard_basis_leaves(depth), depth)
    return {
        "wavelet_order": order,
        "depth": depth,
        "coefficients": int(packed.size),
        "kept_fraction": comp.kept_fraction,
        "compression_eps": COMPRESSION_EPS,
        "compression_error": comp.error,
        "standard_entropy": float(std),
        "best_basis_entropy": float(tree.entropy_total),
        "best_basis_leaves": len(tree.leaves),
        "coefficient_entropy": shannon_entropy(packed),
    }


def _series_scales(records, order):
    """Energy split of the purity series into a slow part and detail bands."""
    if len(records) < 8:
        return None
    y = np.array([r.purity for r in records])
    y = y - y.mean()
    if not np.any(y):
        return {"slow_fraction": 1.0, "band_fraction": {}}
    dec = decompose_multiscale(y, min(order, 4), 1)
    total = dec.total_energy or 1.0
    return {"slow_fraction": dec.slow_energy / total,
            "band_fraction": {str(k): v / total for k, v in dec.band_energy.items()}}


def _record_dict(rec):
    d = {k: (float(getattr(rec, k)) if k != "regime" else str(rec.regime)) for k in rec.header()}
    if math.isnan(d["change_rate"]):
        d["change_rate"] = None
    return d


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class _RunDir:
    def __init__(self, root):
        self.root = root
        self.files = []

    def path(self, *parts):
        return os.path.join(self.root, *parts)

    def write(self, rel, data):
        atomic_write(self.path(rel), data)
        self.files.append(rel)

    def add(self, rel):
        self.files.append(rel)

    def manifest(self, complete, exit_code, error=None):
        lines = [f"complete={'true' if complete else 'false'}", f"exit_code={exit_code}"]
        if error:
            lines.append("error=" + " ".join(str(error).split()))
        for rel in dict.fromkeys(self.files):
            full = self.path(rel)
            if os.path.exists(full):
                lines.append(f"file={rel} sha256={_sha256(full)}")
        atomic_write(self.path(MANIFEST), "\n".join(lines) + "\n")


def read_manifest(run_dir):
    out = {"files": {}}
    with open(os.path.join(run_dir, MANIFEST), encoding="utf-8") as fh:
        for line in fh:
            key, _, value = line.rstrip("\n").partition("=")
            if key == "file":
                rel, _, digest = value.partition(" sha256=")
                out["files"][rel] = digest
            else:
                out[key] = value
    out["complete"] = out.get("complete") == "true"
    out["exit_code"] = int(out.get("exit_code", -1))
    return out


def _write_snapshots(rd, snaps, formats, hbar):
    names = []
    for i, W in enumerate(snaps):
        for fmt in formats:
            rel = os.path.join("snapshots", f"snap_{i:05d}.{fmt}")
            emit_snapshot(W, rd.path(rel), fmt, hbar)
            rd.add(rel)
            names.append(rel)
    return names


def _write_records(rd, records):
    buf = io.StringIO()
    write_records_csv(records, buf)
    rd.write(DIAGNOSTICS, buf.getvalue())


def run_scenario(scenario, out_dir):
    """Run ``scenario`` into ``out_dir``; never raises for module errors.

    Every outcome leaves MANIFEST, the config echo, diagnostics and a summary
    behind. ``complete=true`` in MANIFEST exactly when the exit code is 0.
    """
    started = time.perf_counter()
    rd = _RunDir(out_dir)
    timings = {}
    records = []
    summary = {"name": scenario.name, "mode": scenario.mode, "scheme": scenario.scheme,
               "seed": scenario.seed, "level": scenario.grid.level, "status": "running"}
    exit_code, error = 0, None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            os.makedirs(out_dir, exist_ok=True)
            rd.write(CONFIG_ECHO, emit_config(scenario))
            if scenario.mode == "steady_state":
                _run_steady(scenario, rd, summary, timings, records)
            else:
                _run_evolve(scenario, rd, summary, timings, records)
            summary["status"] = "ok"
        except WignerError as exc:
            exit_code, error = exc.exit_code, exc
        except OSError as exc:
            exit_code, error = 10, exc
    summary["warnings"] = list(dict.fromkeys(str(w.message) for w in caught))
    for msg in summary["warnings"]:
        log.warning("%s", msg)
    if error is not None:
        summary["status"] = "failed"
        summary["error"] = {"type": type(error).__name__, "message": str(error),
                            "time": getattr(error, "time", None)}
        log.error("%s: %s", type(error).__name__, error)
    summary["timings"] = dict(timings, total=time.perf_counter() - started)
    summary["exit_code"] = exit_code
    try:
        if DIAGNOSTICS not in rd.files:
            _write_records(rd, records)
        rd.write(SUMMARY, json.dumps(_clean(summary), indent=2, sort_keys=True, allow_nan=False) + "\n")
        rd.manifest(exit_code == 0, exit_code, error)
    except OSError as exc:
        if exit_code == 0:
            exit_code, error = 10, exc
        summary["exit_code"] = exit_code
    return RunResult(exit_code, out_dir, summary, None if error is None else str(error), rd.files)


def _clean(value):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as null."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return str(value)


def _final_summary(summary, records):
    if records:
        summary["final"] = _record_dict(records[-1])
        summary["initial"] = _record_dict(records[0])
        summary["regime"] = str(records[-1].regime)
        summary["initial_regime"] = str(records[0].regime)
        summary["regime_history"] = _transitions(records)


def _transitions(records):
    out, last = [], None
    for r in records:
        if str(r.regime) != last:
            last = str(r.regime)
            out.append({"time": r.time, "regime": last})
    return out


def _run_evolve(scenario, rd, summary, timings, records):
    s = scenario
    depth = s.wavelet_depth or default_depth(s.grid.level)
    t = time.perf_counter()
    W0 = initial_field(s)
    op = build_operator(s.hamiltonian, s.params, s.terms, s.grid, s.scheme, s.wavelet_order, depth)
    timings["assembly"] = time.perf_counter() - t
    t = time.perf_counter()
    traj = evolve(W0, s.hamiltonian, s.params, s.terms, s.schedule, s.wavelet_order, depth,
                  s.scheme, s.thresholds, operator=op, on_record=records.append, seed=s.seed)
    timings["evolve"] = time.perf_counter() - t
    summary.update({
        "dt": traj.dt, "steps": traj.steps,
        "stability": {"dt_max": traj.stability.dt_max, "spectral_radius": traj.stability.spectral_radius,
                      "converged": traj.stability.converged},
        "conservation": {"max_step_drift": traj.max_step_drift, "max_norm_drift": traj.max_norm_drift,
                         "renormalization_total": traj.renormalization_total},
        "purity_drift": abs(records[-1].purity - records[0].purity),
    })
    _final_summary(summary, records)
    t = time.perf_counter()
    summary["basis"] = basis_statistics(traj.final, s.wavelet_order, depth)
    summary["time_scales"] = _series_scales(records, s.wavelet_order)
    _write_records(rd, records)
    summary["snapshots"] = _write_snapshots(rd, traj.snapshots, s.outputs.snapshot_formats, s.params.hbar)
    if s.outputs.figures:
        figures.field_figure(traj.snapshots[0], traj.final, rd.path("figures", "field.png"), s.name)
        figures.diagnostics_figure(records, rd.path("figures", "diagnostics.png"), s.name)
        figures.marginals_figure(traj.final, rd.path("figures", "marginals.png"), s.name)
        rd.add(os.path.join("figures", "field.png"))
        rd.add(os.path.join("figures", "diagnostics.png"))
        rd.add(os.path.join("figures", "marginals.png"))
    timings["output"] = time.perf_counter() - t


def _run_steady(scenario, rd, summary, timings, records):
    s = scenario
    depth = s.wavelet_depth or default_depth(s.grid.level)
    t = time.perf_counter()
    op = build_operator(s.hamiltonian, s.params, s.terms, s.grid, "galerkin", s.wavelet_order, depth)
    timings["assembly"] = time.perf_counter() - t
    t = time.perf_counter()
    result = steady_state(op, s.steady.tolerance, s.steady.max_iterations)
    timings["solve"] = time.perf_counter() - t
    summary["steady_state"] = {"residual": result.residual, "iterations": result.iterations,
                               "converged": result.converged, "method": result.method}
    summary["residual"] = result.residual
    W = result.field
    summary["basis"] = basis_statistics(W, s.wavelet_order, depth)
    for fmt in s.outputs.snapshot_formats:
        rel = f"steady_state.{fmt}"
        emit_snapshot(W, rd.path(rel), fmt, s.params.hbar)
        rd.add(rel)
    if not result.converged:
        raise NonConvergenceError(
            f"steady state residual {result.residual:.2e} above tolerance {s.steady.tolerance:.0e} "
            f"after {result.iterations} iterations")
    if s.steady.verify_steps > 0:
        # cross-check: the solution must stay put under the explicit dynamics
        t = time.perf_counter()
        stab = stability_estimate(op, seed=s.seed)
        steps = s.steady.verify_steps
        sched = EvolutionSchedule(steps * stab.dt_max, None, s.steady.verify_record_every,
                                  steps, True, 0.0)
        traj = evolve(W, s.hamiltonian, s.params, s.terms, sched, s.wavelet_order, depth, "galerkin",
                      s.thresholds, operator=op, on_record=records.append, stability=stab)
        change = float(np.linalg.norm(traj.final.values - W.values) / np.linalg.norm(W.values))
        timings["verify"] = time.perf_counter() - t
        summary.update({
            "dt": traj.dt, "steps": traj.steps,
            "stability": {"dt_max": stab.dt_max, "spectral_radius": stab.spectral_radius,
                          "converged": stab.converged},
            "conservation": {"max_step_drift": traj.max_step_drift,
                             "max_norm_drift": traj.max_norm_drift,
                             "renormalization_total": traj.renormalization_total},
            "verification_change": change,
        })
    else:
        records.append(diagnose(W, s.hamiltonian, s.params, s.wavelet_order, depth))
    _final_summary(summary, records)
    t = time.perf_counter()
    _write_records(rd, records)
    if s.outputs.figures:
        figures.field_figure(W, W, rd.path("figures", "field.png"), s.name)
        figures.marginals_figure(W, rd.path("figures", "marginals.png"), s.name)
        rd.add(os.path.join("figures", "field.png"))
        rd.add(os.path.join("figures", "marginals.png"))
        if len(records) > 1:
            figures.diagnostics_figure(records, rd.path("figures", "diagnostics.png"), s.name)
            rd.add(os.path.join("figures", "diagnostics.png"))
    timings["output"] = time.perf_counter() - t
