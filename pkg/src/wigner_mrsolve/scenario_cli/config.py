"""Flat dotted ``key = value`` scenario files, validation and shipped presets.

Grammar: one ``key = value`` per line; ``#`` starts a comment; blank lines
are ignored. Values are JSON literals (numbers, ``true``/``false``, lists) or
bare words. A later assignment to the same key replaces an earlier one.
"""

import difflib
import json
import math
import os
from dataclasses import dataclass, field, fields, replace

from ..errors import ConfigError
from ..moyal_operator import RhsTerms
from ..phase_space.classify import ClassifierThresholds
from ..phase_space.model import MAX_DEGREE, PhaseSpaceGrid, PhysicalParams, PolynomialHamiltonian
from ..solver import EvolutionSchedule
from ..wavelet_core.filters import MAX_ORDER

MODES = ("evolve", "steady_state")
STATE_KINDS = ("coherent", "cat", "from_file")
SNAPSHOT_FORMATS = ("csv", "pgm")
SCHEMES = ("galerkin", "oracle")


@dataclass(frozen=True)
class InitialState:
    kind: str = "coherent"
    q0: float = 2.0
    p0: float = 0.0
    sigma: float = 1.0
    path: str = None


@dataclass(frozen=True)
class SteadyOptions:
    tolerance: float = 1e-8
    max_iterations: int = 20
    verify_steps: int = 100
    verify_record_every: int = 10


@dataclass(frozen=True)
class OutputOptions:
    snapshot_formats: tuple = ("csv", "pgm")
    figures: bool = True


@dataclass(frozen=True)
class Scenario:
    name: str
    grid: PhaseSpaceGrid
    params: PhysicalParams
    hamiltonian: PolynomialHamiltonian
    initial_state: InitialState
    terms: RhsTerms
    schedule: EvolutionSchedule
    mode: str = "evolve"
    wavelet_order: int = 6
    wavelet_depth: int = None
    scheme: str = "galerkin"
    seed: int = 0
    thresholds: ClassifierThresholds = field(default_factory=ClassifierThresholds)
    steady: SteadyOptions = field(default_factory=SteadyOptions)
    outputs: OutputOptions = field(default_factory=OutputOptions)
    description: str = ""

    def with_mode(self, mode):
        return replace(self, mode=mode)


# key -> (kind, default); kinds drive parsing and emission
_SCHEMA = {
    "name": ("str", "scenario"),
    "description": ("str", ""),
    "mode": ("choice:" + ",".join(MODES), "evolve"),
    "seed": ("int", 0),
    "solver.scheme": ("choice:" + ",".join(SCHEMES), "galerkin"),
    "grid.q_min": ("float", -10.0),
    "grid.q_max": ("float", 10.0),
    "grid.p_min": ("float", -10.0),
    "grid.p_max": ("float", 10.0),
    "grid.level": ("int", 7),
    "params.hbar": ("float", 1.0),
    "params.mass": ("float", 1.0),
    "params.gamma": ("float", 0.0),
    "params.diffusion": ("float", 0.0),
    "hamiltonian.potential": ("floatlist", [0.0]),
    "hamiltonian.kinetic": ("bool", True),
    "hamiltonian.mixed_terms": ("triples", []),
    "hamiltonian.time_table": ("table", None),
    "initial.kind": ("choice:" + ",".join(STATE_KINDS), "coherent"),
    "initial.q0": ("float", 2.0),
    "initial.p0": ("float", 0.0),
    "initial.sigma": ("float", 1.0),
    "initial.path": ("str?", None),
    "terms.liouville": ("bool", True),
    "terms.quantum": ("bool", True),
    "terms.friction": ("bool", True),
    "terms.diffusion": ("bool", True),
    "schedule.dt": ("float?auto", None),
    "schedule.t_final": ("float", 1.0),
    "schedule.record_every": ("int", 1),
    "schedule.snapshot_every": ("int", 10),
    "schedule.renormalize": ("bool", True),
    "schedule.threshold_eps": ("float", 0.0),
    "wavelet.order": ("int", 6),
    "wavelet.depth": ("int?auto", None),
    "steady.tolerance": ("float", 1e-8),
    "steady.max_iterations": ("int", 20),
    "steady.verify_steps": ("int", 100),
    "steady.verify_record_every": ("int", 10),
    "classifier.negativity": ("float", 0.02),
    "classifier.sparsity_localized": ("float", 0.10),
    "classifier.sparsity_chaotic": ("float", 0.30),
    "classifier.entropy_chaotic": ("float", 5.0),
    "classifier.stationarity": ("float", 1e-4),
    "classifier.window": ("int", 10),
    "output.snapshot_formats": ("formats", ["csv", "pgm"]),
    "output.figures": ("bool", True),
}

VALID_KEYS = tuple(_SCHEMA)


def _literal(text):
    text = text.strip()
    try:
        return json.loads(text)
    except ValueError:
        return text


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _coerce(key, kind, raw):
    """Value of ``raw`` for ``kind`` or raise ValueError with a readable message."""
    v = _literal(raw) if isinstance(raw, str) else raw
    if kind == "str":
        return str(v) if not isinstance(v, str) else v
    if kind == "str?":
        return None if v in (None, "", "none", "null") else str(v)
    if kind.startswith("choice:"):
        options = kind.split(":", 1)[1].split(",")
        if v not in options:
            raise ValueError(f"{key} must be one of {options}, got {v!r}")
        return v
    if kind in ("float?auto", "int?auto") and v in ("auto", None, "null"):
        return None
    if kind in ("float", "float?auto"):
        if not _is_number(v) or not math.isfinite(float(v)):
            raise ValueError(f"{key} expects a finite number, got {raw!r}")
        return float(v)
    if kind in ("int", "int?auto"):
        if not _is_number(v) or float(v) != int(v):
            raise ValueError(f"{key} expects an integer, got {raw!r}")
        return int(v)
    if kind == "bool":
        if isinstance(v, bool):
            return v
        if isinstance(v, str) and v.lower() in ("yes", "no", "on", "off"):
            return v.lower() in ("yes", "on")
        raise ValueError(f"{key} expects true or false, got {raw!r}")
    if kind == "floatlist":
        if not isinstance(v, list) or not v or not all(_is_number(x) for x in v):
            raise ValueError(f"{key} expects a non-empty list of numbers, got {raw!r}")
        return [float(x) for x in v]
    if kind == "triples":
        ok = isinstance(v, list) and all(
            isinstance(t, list) and len(t) == 3 and _is_number(t[0])
            and all(_is_number(x) and float(x) == int(x) for x in t[1:]) for t in v)
        if not ok:
            raise ValueError(f"{key} expects a list of [coefficient, q_power, p_power] triples, got {raw!r}")
        return [[float(t[0]), int(t[1]), int(t[2])] for t in v]
    if kind == "table":
        if v in (None, "none", "null"):
            return None
        ok = isinstance(v, list) and v and all(
            isinstance(r, list) and len(r) == 2 and _is_number(r[0])
            and (_is_number(r[1]) or (isinstance(r[1], list) and all(_is_number(x) for x in r[1])))
            for r in v)
        if not ok:
            raise ValueError(f"{key} expects rows [t, factor] or [t, [factors...]], got {raw!r}")
        return [[float(r[0]), r[1]] for r in v]
    if kind == "formats":
        items = v if isinstance(v, list) else [v]
        bad = [x for x in items if x not in SNAPSHOT_FORMATS]
        if bad:
            raise ValueError(f"{key} entries must be among {list(SNAPSHOT_FORMATS)}, got {bad}")
        return list(dict.fromkeys(items))
    raise AssertionError(kind)


def parse_assignments(text, source="<config>"):
    """Raw ``{key: text}`` pairs plus line-level errors."""
    values, errors = {}, []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip() if not line.lstrip().startswith("#") else ""
        if not stripped:
            continue
        if "=" not in stripped:
            errors.append(f"{source}:{lineno}: expected 'key = value', got {stripped!r}")
            continue
        key, raw = (s.strip() for s in stripped.split("=", 1))
        if key not in _SCHEMA:
            near = difflib.get_close_matches(key, VALID_KEYS, n=1, cutoff=0.5)
            hint = f"; did you mean '{near[0]}'?" if near else ""
            errors.append(f"{source}:{lineno}: unknown key '{key}'{hint}")
            continue
        values[key] = raw
    return values, errors


def _build(values, errors, base_dir):
    """Typed scenario from coerced values; appends every violation to ``errors``."""
    v = {}
    for key, (kind, default) in _SCHEMA.items():
        if key in values:
            try:
                v[key] = _coerce(key, kind, values[key])
            except ValueError as exc:
                errors.append(str(exc))
                v[key] = default
        else:
            v[key] = default

    def check(cond, msg):
        if not cond:
            errors.append(msg)

    check(v["params.hbar"] > 0, "hbar must be > 0")
    check(v["params.mass"] > 0, "mass must be > 0")
    check(v["params.gamma"] >= 0, "gamma must be ≥ 0")
    check(v["params.diffusion"] >= 0, "diffusion must be ≥ 0")
    check(v["grid.q_max"] > v["grid.q_min"], "grid.q_max must exceed grid.q_min")
    check(v["grid.p_max"] > v["grid.p_min"], "grid.p_max must exceed grid.p_min")
    check(4 <= v["grid.level"] <= 10, f"grid.level must lie in [4, 10], got {v['grid.level']}")
    check(1 <= v["wavelet.order"] <= MAX_ORDER,
          f"wavelet.order must lie in [1, {MAX_ORDER}], got {v['wavelet.order']}")
    if v["wavelet.depth"] is not None:
        check(1 <= v["wavelet.depth"] <= v["grid.level"],
              f"wavelet.depth must lie in [1, grid.level={v['grid.level']}], got {v['wavelet.depth']}")
    check(v["initial.sigma"] > 0, "initial.sigma must be > 0")
    check(v["schedule.t_final"] >= 0, "schedule.t_final must be ≥ 0")
    if v["schedule.dt"] is not None:
        check(v["schedule.dt"] > 0, "schedule.dt must be > 0")
    check(v["schedule.record_every"] >= 1, "schedule.record_every must be ≥ 1")
    check(v["schedule.snapshot_every"] >= 1, "schedule.snapshot_every must be ≥ 1")
    check(v["schedule.threshold_eps"] >= 0, "schedule.threshold_eps must be ≥ 0")
    check(v["steady.tolerance"] > 0, "steady.tolerance must be > 0")
    check(v["steady.max_iterations"] >= 1, "steady.max_iterations must be ≥ 1")
    check(v["steady.verify_steps"] >= 0, "steady.verify_steps must be ≥ 0")
    check(v["steady.verify_record_every"] >= 1, "steady.verify_record_every must be ≥ 1")
    check(v["classifier.window"] >= 1, "classifier.window must be ≥ 1")
    for k in ("negativity", "sparsity_localized", "sparsity_chaotic", "entropy_chaotic", "stationarity"):
        check(v["classifier." + k] >= 0, f"classifier.{k} must be ≥ 0")
    flags = [v["terms." + t] for t in ("liouville", "quantum", "friction", "diffusion")]
    check(any(flags), "at least one of terms.liouville/quantum/friction/diffusion must be true")
    if v["mode"] == "steady_state":
        check(v["params.gamma"] > 0 and v["params.diffusion"] > 0,
              "mode=steady_state requires gamma > 0 and diffusion > 0 "
              "(steady_state precondition: with gamma = 0 or D = 0 every function of H is stationary)")
        check(v["terms.friction"] and v["terms.diffusion"],
              "mode=steady_state requires terms.friction and terms.diffusion")
        check(v["solver.scheme"] == "galerkin",
              "mode=steady_state requires solver.scheme=galerkin (the solve factorizes the assembled matrix)")
    if v["initial.kind"] == "from_file":
        path = v["initial.path"]
        if not path:
            errors.append("initial.kind=from_file requires initial.path")
        else:
            full = path if os.path.isabs(path) or base_dir is None else os.path.join(base_dir, path)
            if not os.path.isfile(full):
                errors.append(f"initial.path '{path}' does not exist")
            else:
                v["initial.path"] = full

    def attempt(build, label):
        try:
            return build()
        except (ValueError, TypeError) as exc:
            errors.append(f"{label}: {exc}")
            return None

    grid = attempt(lambda: PhaseSpaceGrid(v["grid.q_min"], v["grid.q_max"], v["grid.p_min"],
                                          v["grid.p_max"], v["grid.level"]), "grid")
    params = attempt(lambda: PhysicalParams(v["params.hbar"], v["params.mass"],
                                            v["params.gamma"], v["params.diffusion"]), "params")
    ham = attempt(lambda: PolynomialHamiltonian(
        potential=tuple(v["hamiltonian.potential"]),
        mixed_terms=tuple(tuple(t) for t in v["hamiltonian.mixed_terms"]),
        time_table=None if v["hamiltonian.time_table"] is None else tuple(
            (r[0], r[1]) for r in v["hamiltonian.time_table"]),
        kinetic=v["hamiltonian.kinetic"]), "hamiltonian")
    if ham is not None:
        needed = max(ham.potential_degree, 3)
        if v["terms.quantum"] and ham.potential_degree >= 3 and v["solver.scheme"] == "galerkin":
            top_odd = needed if needed % 2 else needed - 1
            check(top_odd < v["wavelet.order"],
                  f"potential degree {ham.potential_degree} needs d_p^{top_odd}, beyond Daubechies-"
                  f"{v['wavelet.order']}; raise wavelet.order above {top_odd} or use solver.scheme=oracle")
        check(ham.degree <= MAX_DEGREE, f"Hamiltonian degree must be ≤ {MAX_DEGREE}")
    terms = attempt(lambda: RhsTerms(*flags), "terms") if any(flags) else None
    schedule = attempt(lambda: EvolutionSchedule(
        v["schedule.t_final"], v["schedule.dt"], v["schedule.record_every"],
        v["schedule.snapshot_every"], v["schedule.renormalize"], v["schedule.threshold_eps"]),
        "schedule")
    if errors:
        return None
    return Scenario(
        name=v["name"], grid=grid, params=params, hamiltonian=ham,
        initial_state=InitialState(v["initial.kind"], v["initial.q0"], v["initial.p0"],
                                   v["initial.sigma"], v["initial.path"]),
        terms=terms, schedule=schedule, mode=v["mode"],
        wavelet_order=v["wavelet.order"], wavelet_depth=v["wavelet.depth"],
        scheme=v["solver.scheme"], seed=v["seed"],
        thresholds=ClassifierThresholds(
            v["classifier.negativity"], v["classifier.sparsity_localized"],
            v["classifier.sparsity_chaotic"], v["classifier.entropy_chaotic"],
            v["classifier.stationarity"], v["classifier.window"]),
        steady=SteadyOptions(v["steady.tolerance"], v["steady.max_iterations"],
                             v["steady.verify_steps"], v["steady.verify_record_every"]),
        outputs=OutputOptions(tuple(v["output.snapshot_formats"]), v["output.figures"]),
        description=v["description"],
    )


def parse_config(text, overrides=(), base_dir=None, source="<config>"):
    """Validated Scenario; raises ConfigError listing every problem found."""
    values, errors = parse_assignments(text, source)
    for item in overrides:
        if "=" not in item:
            errors.append(f"override {item!r} is not of the form key=value")
            continue
        more, errs = parse_assignments(item, "--override")
        values.update(more)
        errors.extend(errs)
    scenario = _build(values, errors, base_dir)
    if errors:
        raise ConfigError(errors)
    return scenario


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return json.dumps(_plain(value))
    if value is None:
        return "auto"
    return str(value)


def _plain(value):
    if isinstance(value, (list, tuple)):
        return [_plain(x) for x in value]
    return value


def scenario_values(s):
    """Every schema key with its value in ``s``."""
    h = s.hamiltonian
    table = None if h.time_table is None else [[t, list(f)] for t, f in h.time_table]
    th = s.thresholds
    return {
        "name": s.name,
        "description": s.description,
        "mode": s.mode,
        "seed": s.seed,
        "solver.scheme": s.scheme,
        "grid.q_min": s.grid.q_min, "grid.q_max": s.grid.q_max,
        "grid.p_min": s.grid.p_min, "grid.p_max": s.grid.p_max, "grid.level": s.grid.level,
        "params.hbar": s.params.hbar, "params.mass": s.params.mass,
        "params.gamma": s.params.gamma, "params.diffusion": s.params.diffusion,
        "hamiltonian.potential": list(h.potential),
        "hamiltonian.kinetic": h.kinetic,
        "hamiltonian.mixed_terms": [list(m) for m in h.mixed_terms],
        "hamiltonian.time_table": table,
        "initial.kind": s.initial_state.kind, "initial.q0": s.initial_state.q0,
        "initial.p0": s.initial_state.p0, "initial.sigma": s.initial_state.sigma,
        "initial.path": s.initial_state.path,
        "terms.liouville": s.terms.include_liouville, "terms.quantum": s.terms.include_quantum,
        "terms.friction": s.terms.include_friction, "terms.diffusion": s.terms.include_diffusion,
        "schedule.dt": s.schedule.dt, "schedule.t_final": s.schedule.t_final,
        "schedule.record_every": s.schedule.record_every,
        "schedule.snapshot_every": s.schedule.snapshot_every,
        "schedule.renormalize": s.schedule.renormalize,
        "schedule.threshold_eps": s.schedule.threshold_eps,
        "wavelet.order": s.wavelet_order, "wavelet.depth": s.wavelet_depth,
        "steady.tolerance": s.steady.tolerance, "steady.max_iterations": s.steady.max_iterations,
        "steady.verify_steps": s.steady.verify_steps,
        "steady.verify_record_every": s.steady.verify_record_every,
        "classifier.negativity": th.negativity,
        "classifier.sparsity_localized": th.sparsity_localized,
        "classifier.sparsity_chaotic": th.sparsity_chaotic,
        "classifier.entropy_chaotic": th.entropy_chaotic,
        "classifier.stationarity": th.stationarity, "classifier.window": th.window,
        "output.snapshot_formats": list(s.outputs.snapshot_formats),
        "output.figures": s.outputs.figures,
    }


def emit_config(scenario):
    """Complete config text; ``parse_config(emit_config(s)) == s``."""
    lines = ["# wigner-mrsolve scenario"]
    section = None
    for key, value in scenario_values(scenario).items():
        head = key.split(".", 1)[0] if "." in key else None
        if head != section:
            lines.append("")
            section = head
        if key == "initial.path" and value is None:
            lines.append("initial.path = none")
            continue
        if key == "hamiltonian.time_table" and value is None:
            lines.append("hamiltonian.time_table = none")
            continue
        if key in ("name", "description"):
            lines.append(f"{key} = {json.dumps(value)}")
            continue
        lines.append(f"{key} = {_fmt(value)}")
    return "\n".join(lines) + "\n"


PRESETS = {
    "harmonic-coherent": (
        "Coherent state rotating in a harmonic well without environment (localized mode).",
        """
name = "harmonic-coherent"
mode = evolve
hamiltonian.potential = [0, 0, 0.5]
params.gamma = 0
params.diffusion = 0
initial.kind = coherent
initial.q0 = 2
initial.p0 = 0
initial.sigma = 1
schedule.t_final = 6.283185307179586
schedule.record_every = 20
schedule.snapshot_every = 100
""",
    ),
    "cat-decoherence": (
        "Cat state in a harmonic well with friction and diffusion (entangled-like, then decohered).",
        """
name = "cat-decoherence"
mode = evolve
hamiltonian.potential = [0, 0, 0.5]
params.gamma = 0.05
params.diffusion = 0.1
initial.kind = cat
initial.q0 = 3
initial.sigma = 1
schedule.t_final = 30
schedule.record_every = 25
schedule.snapshot_every = 250
""",
    ),
    "doublewell-waveleton": (
        "Stationary state of a damped quartic double well (waveleton).",
        """
name = "doublewell-waveleton"
mode = steady_state
hamiltonian.potential = [0, 0, -0.5, 0, 0.25]
params.hbar = 0.25
params.gamma = 0.1
params.diffusion = 0.05
initial.kind = coherent
initial.q0 = 1
initial.sigma = 0.5
schedule.t_final = 0
steady.verify_steps = 100
steady.verify_record_every = 10
""",
    ),
    "cat-diffusion": (
        "Cat state under pure momentum diffusion; input for the fringe-decay probe.",
        """
name = "cat-diffusion"
mode = evolve
hamiltonian.potential = [0]
hamiltonian.kinetic = false
params.gamma = 0
params.diffusion = 0.1
initial.kind = cat
initial.q0 = 3
initial.sigma = 1
schedule.t_final = 1
schedule.record_every = 2
schedule.snapshot_every = 2
""",
    ),
}


def preset_text(name):
    if name not in PRESETS:
        near = difflib.get_close_matches(name, list(PRESETS), n=1)
        hint = f"; did you mean '{near[0]}'?" if near else ""
        raise ConfigError([f"unknown preset '{name}'{hint}; available: {', '.join(PRESETS)}"])
    description, body = PRESETS[name]
    return f"description = {json.dumps(description)}\n" + body


def load_preset(name, overrides=()):
    return parse_config(preset_text(name), overrides, source=f"preset:{name}")


def scenario_fields():
    return [f.name for f in fields(Scenario)]
