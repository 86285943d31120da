"""``wigner-mrsolve`` command line."""

import argparse
import glob
import json
import logging
import os
import sys

from .. import __version__
from ..errors import ConfigError, WignerError
from .config import PRESETS, emit_config, parse_config, preset_text
from .probe import fringe_decay_probe
from .runner import CONFIG_ECHO, run_scenario
from .snapshots import atomic_write, read_snapshot

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 10


def _add_run_options(p):
    p.add_argument("config", nargs="?", help="scenario file (key = value lines)")
    p.add_argument("--out", help="run directory (default: runs/<name>)")
    p.add_argument("--preset", help="start from a shipped preset; the config file and overrides apply on top")
    p.add_argument("--override", nargs="+", action="extend", default=[], metavar="KEY=VALUE",
                   help="replace single keys, e.g. params.gamma=0.1")
    p.add_argument("--derivative-scheme", choices=("galerkin", "oracle"),
                   help="wavelet Galerkin operator or the finite-difference reference")
    p.add_argument("--seed", type=int, help="seed of the power-iteration start vector")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wigner-mrsolve",
        description="Wavelet Galerkin solver for Wigner-function dynamics with decoherence.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario in the mode its config selects")
    _add_run_options(run)
    steady = sub.add_parser("steady", help="solve for the stationary state (mode=steady_state)")
    _add_run_options(steady)

    probe = sub.add_parser("probe", help="post-process a run directory")
    probe_sub = probe.add_subparsers(dest="probe", required=True)
    fringe = probe_sub.add_parser("fringe", help="decay rate of cat-state fringes at q = 0")
    fringe.add_argument("rundir")
    fringe.add_argument("--q0", type=float, help="cat separation (default: initial.q0 of the run)")

    presets = sub.add_parser("presets", help="shipped scenarios")
    presets_sub = presets.add_subparsers(dest="presets", required=True)
    presets_sub.add_parser("list", help="names and descriptions")
    show = presets_sub.add_parser("show", help="print a preset as a complete config file")
    show.add_argument("name")
    return parser


def _read_text(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_scenario(args, force_mode=None):
    """Scenario from preset, config file and overrides, in that order of precedence (last wins)."""
    if not args.preset and not args.config:
        raise ConfigError(["give a config file or --preset NAME"])
    text, base_dir = "", None
    if args.preset:
        text += preset_text(args.preset)
    if args.config:
        text += "\n" + _read_text(args.config)
        base_dir = os.path.dirname(os.path.abspath(args.config))
    overrides = list(args.override)
    if force_mode:
        overrides.append(f"mode={force_mode}")
    if args.derivative_scheme:
        overrides.append(f"solver.scheme={args.derivative_scheme}")
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    return parse_config(text, overrides, base_dir, source=args.config or f"preset:{args.preset}")


def _cmd_run(args, force_mode=None):
    scenario = load_scenario(args, force_mode)
    out = args.out or os.path.join("runs", scenario.name)
    result = run_scenario(scenario, out)
    s = result.summary
    line = [f"run directory: {out}", f"exit: {result.exit_code}"]
    if "regime" in s:
        line.append(f"regime: {s['regime']}")
    if "residual" in s:
        line.append(f"residual: {s['residual']:.3e}")
    print("  ".join(line))
    if result.error:
        print(f"error: {result.error}", file=sys.stderr)
    return result.exit_code


def _cmd_probe(args):
    rundir = args.rundir
    scenario = parse_config(_read_text(os.path.join(rundir, CONFIG_ECHO)), source=CONFIG_ECHO)
    paths = sorted(glob.glob(os.path.join(rundir, "snapshots", "snap_*.csv")))
    if not paths:
        paths = sorted(glob.glob(os.path.join(rundir, "snapshots", "snap_*.pgm")))
    snaps = [read_snapshot(p) for p in paths]
    q0 = args.q0 if args.q0 is not None else scenario.initial_state.q0
    result = fringe_decay_probe(snaps, q0, scenario.params)
    payload = dict(result.as_dict(), q0=q0, diffusion=scenario.params.diffusion,
                   hbar=scenario.params.hbar, snapshots=len(snaps))
    text = json.dumps(payload, indent=2)
    atomic_write(os.path.join(rundir, "probe_fringe.json"), text + "\n")
    print(text)
    return EXIT_OK


def _cmd_presets(args):
    if args.presets == "list":
        width = max(map(len, PRESETS))
        for name, (desc, _) in PRESETS.items():
            print(f"{name:<{width}}  {desc}")
        return EXIT_OK
    print(emit_config(parse_config(preset_text(args.name))), end="")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "steady":
            return _cmd_run(args, "steady_state")
        if args.command == "probe":
            return _cmd_probe(args)
        return _cmd_presets(args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except WignerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
