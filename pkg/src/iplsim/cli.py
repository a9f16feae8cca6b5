"""Command-line front end.

Subcommands: run (explicit lattice), sweep (delocalized fraction vs focusing),
preset (named reproduction), oracle-check (solver cross-validation),
list-presets. Exit codes: 0 success, 2 usage, 3 solver failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from dataclasses import dataclass
from typing import Any

import numpy as np

from ._version import __version__
from .analysis import AnalysisThresholds
from .eigensolver import SolverError
from .experiments import (PRESETS, RunConfig, execute, oracle_check,
                          preset_config, run_sweep)
from .hamiltonian import CellParams
from .profiles import QUARTER_TURN, ProfileSpec

_ANGLE_CHARS = re.compile(r"^[0-9epi+\-*/(). ]+$")


class UsageError(ValueError):
    """Bad flags or flag combinations; maps to exit code 2."""


def parse_angle(text: str) -> float:
    """Angles as decimals or pi expressions: '0.785', 'pi/4', '3*pi/8', '3pi/8'."""
    t = text.strip().replace(" ", "")
    if not t or not _ANGLE_CHARS.match(t):
        raise UsageError(f"cannot parse angle {text!r}")
    t = re.sub(r"(\d)pi", r"\1*pi", t)
    try:
        value = eval(t, {"__builtins__": {}}, {"pi": math.pi})
        return float(value)
    except Exception:
        raise UsageError(f"cannot parse angle {text!r}") from None


@dataclass(frozen=True)
class CliCommand:
    subcommand: str
    flags: dict[str, Any]


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on its own errors, which matches the usage exit code;
    # raise instead so parse_args stays a pure function for tests
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="iplsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"iplsim {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_lattice_flags(p, for_sweep=False):
        p.add_argument("--d1", type=float, default=1.0)
        p.add_argument("--d2", type=float, default=2.0)
        p.add_argument("--eps", type=float, default=0.2)
        size = p.add_mutually_exclusive_group()
        size.add_argument("--sites", type=int, help="total sites (even, >= 4)")
        size.add_argument("--cells", type=int, help="cell count (= sites / 2)")
        if not for_sweep:
            p.add_argument("--profile", default="linear",
                           choices=("linear", "revolutions", "random-phase", "random-onsite"))
            p.add_argument("--revolutions", type=int)
            p.add_argument("--seed", type=int)
        p.add_argument("--phi-start", type=parse_angle)
        p.add_argument("--phi-end", type=parse_angle)
        p.add_argument("--center", type=parse_angle)
        if not for_sweep:
            p.add_argument("--lf", type=float)

    def add_threshold_flags(p):
        p.add_argument("--tau", type=float, default=3e-5)
        p.add_argument("--delta-rel", type=float, default=0.05)
        p.add_argument("--gamma", type=float, default=20.0)
        p.add_argument("--nb", type=int, default=2)

    def add_output_flags(p, pgm=True):
        p.add_argument("--out", required=True, metavar="DIR")
        choices = ("csv", "pgm", "json") if pgm else ("csv",)
        p.add_argument("--emit", action="append", choices=choices,
                       help="artifact kinds; repeatable; default: all")
        if pgm:
            p.add_argument("--map", default="band:0", dest="map_selection",
                           help="PGM rows: full | band:I | lowest:K")

    p_run = sub.add_parser("run", help="diagonalize one explicit lattice")
    add_lattice_flags(p_run)
    add_threshold_flags(p_run)
    add_output_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="delocalized fraction across a focusing grid")
    add_lattice_flags(p_sweep, for_sweep=True)
    add_threshold_flags(p_sweep)
    p_sweep.add_argument("--lf-min", type=float, default=0.5)
    p_sweep.add_argument("--lf-max", type=float, default=100.0)
    p_sweep.add_argument("--points", type=int, default=25)
    add_output_flags(p_sweep, pgm=False)

    p_preset = sub.add_parser("preset", help="run a named bundled design")
    p_preset.add_argument("name")
    p_preset.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                          dest="overrides", help="override one parameter; repeatable")
    add_output_flags(p_preset)
    p_preset.set_defaults(map_selection=None)

    p_oracle = sub.add_parser("oracle-check", help="cross-validate the two eigensolver routes")
    p_oracle.add_argument("--instances", type=int, default=50)
    p_oracle.add_argument("--max-sites", type=int, default=64)
    p_oracle.add_argument("--seed", type=int, default=0xA5EED)

    sub.add_parser("list-presets", help="show the bundled designs")
    return parser


def parse_args(argv) -> CliCommand:
    """Validate flags fully (combinations included) before any computation."""
    ns = _build_parser().parse_args(argv)
    flags = vars(ns)
    sub = flags.pop("subcommand")
    if sub == "run":
        _validate_run(flags)
    elif sub == "sweep":
        _validate_sweep(flags)
    elif sub == "preset":
        flags["overrides"] = _parse_overrides(flags.get("overrides") or [])
    return CliCommand(subcommand=sub, flags=flags)


def _sites_to_cells(flags) -> int:
    sites, cells = flags.get("sites"), flags.get("cells")
    if sites is None and cells is None:
        raise UsageError("one of --sites or --cells is required")
    if sites is not None:
        if sites % 2:
            raise UsageError("sites must be even (two sites per cell)")
        if sites < 4:
            raise UsageError("sites must be at least 4")
        return sites // 2
    if cells < 2:
        raise UsageError("cells must be at least 2")
    return cells


def _validate_run(flags) -> None:
    cells = _sites_to_cells(flags)
    kind = flags["profile"].replace("-", "_")
    phi_start, phi_end = flags.get("phi_start"), flags.get("phi_end")
    center, lf = flags.get("center"), flags.get("lf")

    if kind == "linear":
        if (phi_start is not None or phi_end is not None) and lf is not None:
            raise UsageError("--phi-start/--phi-end conflict with --lf; pick one way "
                             "to place the grid")
        if (phi_start is None) != (phi_end is None):
            raise UsageError("--phi-start and --phi-end must be given together")
        if phi_start is not None:
            if center is not None:
                raise UsageError("--center conflicts with explicit --phi-start/--phi-end")
            spec = ProfileSpec("linear", cells, phi_start=phi_start, phi_end=phi_end)
        else:
            center = QUARTER_TURN if center is None else center
            lf = 1.0 if lf is None else lf
            if lf <= 0:
                raise UsageError("--lf must be positive")
            width = QUARTER_TURN / lf
            spec = ProfileSpec("linear", cells, phi_start=center - width / 2,
                               phi_end=center + width / 2, lf=lf)
    elif kind == "revolutions":
        if phi_start is None or phi_end is None:
            raise UsageError("revolutions profile needs --phi-start and --phi-end")
        if lf is not None or center is not None:
            raise UsageError("--lf/--center apply to linear profiles only")
        spec = ProfileSpec("revolutions", cells, phi_start=phi_start, phi_end=phi_end,
                           revolutions=flags.get("revolutions") or 1)
    elif kind == "random_phase":
        if phi_start is None or phi_end is None:
            raise UsageError("random-phase profile needs --phi-start and --phi-end")
        if flags.get("seed") is None:
            raise UsageError("random-phase profile needs --seed")
        spec = ProfileSpec("random_phase", cells, phi_start=phi_start, phi_end=phi_end,
                           seed=flags["seed"])
    else:
        if phi_start is not None or phi_end is not None or center is not None or lf is not None:
            raise UsageError("random-onsite carries no phases; drop the angle flags")
        if flags.get("seed") is None:
            raise UsageError("random-onsite profile needs --seed")
        spec = ProfileSpec("random_onsite", cells, seed=flags["seed"])

    try:
        flags["config"] = RunConfig(
            params=CellParams(flags["d1"], flags["d2"], flags["eps"]),
            profile=spec,
            thresholds=AnalysisThresholds(n_b=flags["nb"], tau=flags["tau"],
                                          gamma=flags["gamma"], delta_rel=flags["delta_rel"]),
            map_selection=flags["map_selection"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _validate_sweep(flags) -> None:
    cells = _sites_to_cells(flags) if (flags.get("sites") or flags.get("cells")) else 501
    if flags.get("phi_start") is not None or flags.get("phi_end") is not None:
        raise UsageError("the sweep varies the grid width itself; only --center is tunable")
    center = flags.get("center")
    center = QUARTER_TURN if center is None else center
    if flags["points"] < 2 or flags["lf_min"] <= 0 or flags["lf_max"] <= flags["lf_min"]:
        raise UsageError("need points >= 2 and 0 < lf-min < lf-max")
    width = QUARTER_TURN / flags["lf_min"]
    spec = ProfileSpec("linear", cells, phi_start=center - width / 2,
                       phi_end=center + width / 2, lf=flags["lf_min"])
    flags["config"] = RunConfig(
        params=CellParams(flags["d1"], flags["d2"], flags["eps"]),
        profile=spec,
        thresholds=AnalysisThresholds(n_b=flags["nb"], tau=flags["tau"],
                                      gamma=flags["gamma"], delta_rel=flags["delta_rel"]),
        label="sweep")
    flags["lf_values"] = [float(x) for x in
                          np.logspace(math.log10(flags["lf_min"]),
                                      math.log10(flags["lf_max"]), flags["points"])]


def _parse_overrides(pairs: list[str]) -> dict[str, Any]:
    overrides: dict[str, Any] = {}
    for pair in pairs:
        key, sep, raw = pair.partition("=")
        if not sep or not key:
            raise UsageError(f"--set expects KEY=VALUE, got {pair!r}")
        key = key.replace("-", "_")
        if key in ("phi_start", "phi_end"):
            overrides[key] = parse_angle(raw)
        elif key == "map_selection":
            overrides[key] = raw
        else:
            try:
                overrides[key] = int(raw)
            except ValueError:
                try:
                    overrides[key] = float(raw)
                except ValueError:
                    raise UsageError(f"cannot parse value in {pair!r}") from None
    return overrides


def _emit(flags) -> tuple[str, ...]:
    return tuple(flags["emit"]) if flags.get("emit") else ("csv", "pgm", "json")


def _dispatch(cmd: CliCommand) -> int:
    flags = cmd.flags
    if cmd.subcommand == "run":
        manifest = execute(flags["config"], flags["out"], emit=_emit(flags))
        print(f"wrote {', '.join(sorted(manifest.checksums))} and manifest.json "
              f"to {flags['out']}")
    elif cmd.subcommand == "sweep":
        manifest = run_sweep(flags["config"], flags["lf_values"], flags["out"])
        print(f"wrote sweep.csv ({len(flags['lf_values'])} points) and manifest.json "
              f"to {flags['out']}")
    elif cmd.subcommand == "preset":
        overrides = dict(flags["overrides"])
        if flags.get("map_selection"):
            overrides["map_selection"] = flags["map_selection"]
        try:
            config = preset_config(flags["name"], overrides)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
        preset = PRESETS[flags["name"]]
        if preset.sweep_lf_values is not None:
            run_sweep(config, preset.sweep_lf_values, flags["out"])
            print(f"wrote sweep.csv ({len(preset.sweep_lf_values)} points) "
                  f"and manifest.json to {flags['out']}")
        else:
            manifest = execute(config, flags["out"], emit=_emit(flags))
            print(f"preset {flags['name']}: wrote {', '.join(sorted(manifest.checksums))} "
                  f"and manifest.json to {flags['out']}")
    elif cmd.subcommand == "oracle-check":
        result = oracle_check(instances=flags["instances"],
                              max_sites=flags["max_sites"], seed=flags["seed"])
        print(f"oracle-check: {result.instances} instances agree; "
              f"max |dλ| = {result.max_eigenvalue_dev:.3e}, "
              f"max residual = {result.max_residual:.3e}, "
              f"max ortho = {result.max_ortho:.3e}")
    else:
        width = max(len(n) for n in PRESETS)
        for name, preset in PRESETS.items():
            sites = 2 * preset.config.profile.cells
            tag = " (sweep)" if preset.sweep_lf_values is not None else ""
            print(f"{name:<{width}}  {sites:>5} sites  eps={preset.config.params.eps}"
                  f"  {preset.note}{tag}")
    return 0


def main(argv=None) -> int:
    try:
        cmd = parse_args(sys.argv[1:] if argv is None else argv)
        return _dispatch(cmd)
    except UsageError as exc:
        print(f"iplsim: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"iplsim: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"iplsim: solver failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"iplsim: I/O failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
