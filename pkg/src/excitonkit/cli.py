"""Command-line front end.

Subcommands
-----------
simulate      integrate a preset or config-defined network, write populations.csv
correlations  monogamy-component series per measure and nodal site
route         dominance segmentation of the bipartition collection
classify      group sites by correlation-sharing features over several runs
presets       list the built-in networks

Exit codes: 0 success, 2 configuration error, 3 numerical abort.  All file
output is deterministic: fixed iteration orders and 12-significant-digit
floats, so identical configs give byte-identical files.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analytics, evolution
from .analytics import MEASURES
from .evolution import IntegrationAbort
from .network import (ConfigError, NetworkSpec, PRESETS, get_preset,
                      network_from_config)
from .states import StateError, mixed_state


@dataclass
class ExperimentConfig:
    """Resolved experiment parameters (defaults + config file + flags)."""

    network: NetworkSpec
    initial: tuple  # ((weight, basis index), ...)
    t_end: float = 10.0
    dt: float = 0.001
    sample_every: float = 0.01
    measures: tuple = ()
    nodal: tuple = ()  # empty means all sites
    dwell: float = analytics.DWELL_DEFAULT
    floor: float = analytics.FLOOR_DEFAULT
    out: Path = field(default_factory=lambda: Path("."))
    threads: int | None = None

    def __post_init__(self):
        if not self.t_end >= self.sample_every >= self.dt:
            raise ConfigError(
                f"need t_end >= sample_every >= dt, got {self.t_end}, "
                f"{self.sample_every}, {self.dt}")
        for m in self.measures:
            if m not in MEASURES:
                raise ConfigError(f"unknown measure '{m}' (known: {MEASURES})")
        n = self.network.n_sites
        for s in self.nodal:
            if not 1 <= s <= n:
                raise ConfigError(f"nodal site {s} out of range 1..{n}")
        for w, idx in self.initial:
            if not 0 <= idx <= n:
                raise ConfigError(
                    f"initial basis index {idx} out of range 0..{n}")

    @property
    def nodal_sites(self) -> tuple:
        return self.nodal or tuple(range(1, self.network.n_sites + 1))

    def initial_state(self) -> np.ndarray:
        try:
            return mixed_state(self.initial, self.network.dim)
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"invalid initial state: {exc}")


def parse_initial(text: str) -> tuple:
    """Parse an initial-state spec into ((weight, index), ...).

    Accepts a bare basis index ("1"), an equal mixture ("1+6"), or weighted
    terms ("0.5*1+0.5*6").  Index 0 is the ground state.
    """
    terms = [t.strip() for t in str(text).split("+")]
    if not all(terms):
        raise ConfigError(f"malformed initial state '{text}'")
    components = []
    for term in terms:
        if "*" in term:
            w_str, _, i_str = term.partition("*")
            try:
                w = float(w_str)
                idx = int(i_str)
            except ValueError:
                raise ConfigError(f"malformed initial-state term '{term}'")
        else:
            try:
                idx = int(term)
            except ValueError:
                raise ConfigError(f"malformed initial-state term '{term}'")
            w = 1.0 / len(terms)
        if w <= 0:
            raise ConfigError(f"initial-state weight must be positive: '{term}'")
        components.append((w, idx))
    return tuple(components)


def _parse_float(sec, key, unit=""):
    raw = sec[key].strip()
    if unit:
        if not raw.endswith(unit):
            raise ConfigError(f"[experiment] {key}: missing '{unit}' suffix")
        raw = raw[: -len(unit)].strip()
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[experiment] {key}: '{raw}' is not a number")


def load_config(path) -> dict:
    """Read the INI experiment file into a flat dict of overrides."""
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}")
    except configparser.Error as exc:
        raise ConfigError(f"config parse error in {path}: {exc}")
    overrides: dict = {}
    if cp.has_section("network"):
        overrides["network"] = network_from_config(cp)
    if cp.has_section("experiment"):
        sec = cp["experiment"]
        known = {"preset", "initial", "t_end_ps", "dt_ps", "sample_every_ps",
                 "measures", "nodal", "dwell_ps", "floor", "out", "threads"}
        for key in sec:
            if key not in known:
                raise ConfigError(f"[experiment] unknown key '{key}'")
        if "preset" in sec:
            if "network" in overrides:
                raise ConfigError("config gives both a preset and a [network] section")
            overrides["network"] = get_preset(sec["preset"].strip())
        if "initial" in sec:
            overrides["initial"] = parse_initial(sec["initial"])
        for key, name in (("t_end_ps", "t_end"), ("dt_ps", "dt"),
                          ("sample_every_ps", "sample_every"),
                          ("dwell_ps", "dwell")):
            if key in sec:
                overrides[name] = _parse_float(sec, key)
        if "floor" in sec:
            overrides["floor"] = _parse_float(sec, "floor")
        if "measures" in sec:
            overrides["measures"] = tuple(sec["measures"].split())
        if "nodal" in sec:
            raw = sec["nodal"].strip()
            if raw != "all":
                try:
                    overrides["nodal"] = tuple(int(v) for v in raw.split())
                except ValueError:
                    raise ConfigError(f"[experiment] nodal: '{raw}' is not a site list")
        if "out" in sec:
            overrides["out"] = Path(sec["out"].strip())
        if "threads" in sec:
            try:
                overrides["threads"] = int(sec["threads"])
            except ValueError:
                raise ConfigError("[experiment] threads: not an integer")
    if not overrides:
        raise ConfigError(f"{path} has no [network] or [experiment] section")
    return overrides


def resolve_config(args, default_t_end=10.0, default_sample=0.01) -> ExperimentConfig:
    """Combine defaults, optional config file, and CLI flags (flags win)."""
    overrides: dict = {}
    if getattr(args, "config", None):
        overrides = load_config(args.config)
    if getattr(args, "preset", None):
        if "network" in overrides:
            raise ConfigError("--preset conflicts with the config's network")
        overrides["network"] = get_preset(args.preset)
    if "network" not in overrides:
        raise ConfigError("no network given: use --preset or a config file")
    flag_map = (("initial", "initial"), ("t_end", "t_end"), ("dt", "dt"),
                ("sample_every", "sample_every"), ("measure", "measures"),
                ("nodal", "nodal"), ("dwell", "dwell"), ("floor", "floor"),
                ("out", "out"), ("threads", "threads"))
    for flag, name in flag_map:
        value = getattr(args, flag, None)
        if value is None:
            continue
        if flag == "initial":
            value = parse_initial(value)
        elif flag == "measure":
            value = tuple(value)
        elif flag == "nodal":
            if value.strip() == "all":
                value = ()
            else:
                try:
                    value = tuple(int(v) for v in value.replace(",", " ").split())
                except ValueError:
                    raise ConfigError(f"--nodal: '{value}' is not a site list")
        elif flag == "out":
            value = Path(value)
        overrides[name] = value
    overrides.setdefault("initial", ((1.0, 1),))
    overrides.setdefault("t_end", default_t_end)
    overrides.setdefault("sample_every", default_sample)
    return ExperimentConfig(**overrides)


def _run_trajectory(cfg: ExperimentConfig) -> evolution.Trajectory:
    return evolution.propagate(cfg.network, cfg.initial_state(),
                               t_end=cfg.t_end, dt=cfg.dt,
                               sample_every=cfg.sample_every)


def _ensure_outdir(cfg: ExperimentConfig) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    return cfg.out


def cmd_simulate(args) -> int:
    cfg = resolve_config(args)
    traj = _run_trajectory(cfg)
    out = _ensure_outdir(cfg)
    evolution.write_populations_csv(traj, out / "populations.csv")
    print(f"wrote {out / 'populations.csv'} "
          f"({len(traj.t)} samples, psink(end)={traj.sink[-1]:.6g})")
    return 0


def cmd_correlations(args) -> int:
    cfg = resolve_config(args)
    if not cfg.measures:
        raise ConfigError("correlations needs at least one --measure")
    traj = _run_trajectory(cfg)
    out = _ensure_outdir(cfg)
    for measure in cfg.measures:
        cs = analytics.series(traj, measure, sites=cfg.nodal_sites,
                              threads=cfg.threads)
        for site in cs.sites:
            path = out / f"series_{measure}_site{site}.csv"
            analytics.write_series_csv(cs, site, path)
            print(f"wrote {path}")
    return 0


def cmd_route(args) -> int:
    cfg = resolve_config(args)
    measures = cfg.measures or ("discord",)
    if len(measures) != 1:
        raise ConfigError("route uses exactly one measure")
    measure = measures[0]
    traj = _run_trajectory(cfg)
    out = _ensure_outdir(cfg)
    t, values = analytics.collection_series(traj, measure, threads=cfg.threads)
    report = analytics.detect_route(t, values, measure=measure,
                                    dwell=cfg.dwell, floor=cfg.floor)
    json_path = out / f"route_{measure}.json"
    csv_path = out / f"dominance_{measure}.csv"
    json_path.write_text(report.to_json())
    analytics.write_dominance_csv(t, values, report, csv_path)
    print(f"wrote {json_path}")
    print(f"wrote {csv_path}")
    print("route: " + (" -> ".join(str(s) for s in report.route) or "(none)"))
    return 0


def cmd_classify(args) -> int:
    initial_flags = args.initial  # repeatable flag: handled here, not in resolve
    args.initial = None
    cfg = resolve_config(args, default_t_end=2.0, default_sample=0.05)
    if initial_flags:
        initials = [parse_initial(v) for v in initial_flags]
    elif cfg.network.label == "fmo":
        initials = [((1.0, 1),), ((1.0, 6),), ((0.5, 1), (0.5, 6))]
    else:
        initials = [cfg.initial]
    out = _ensure_outdir(cfg)
    bundles = []
    for components in initials:
        run_cfg = ExperimentConfig(
            network=cfg.network, initial=components, t_end=cfg.t_end,
            dt=cfg.dt, sample_every=cfg.sample_every, measures=cfg.measures,
            nodal=(), dwell=cfg.dwell, floor=cfg.floor, out=cfg.out,
            threads=cfg.threads)
        traj = _run_trajectory(run_cfg)
        bundles.append(analytics.RunBundle(
            t=traj.t, populations=traj.populations,
            negativity=analytics.series(traj, "negativity", threads=cfg.threads),
            discord=analytics.series(traj, "discord", threads=cfg.threads)))
    try:
        report = analytics.classify_sites(bundles)
    except analytics.DegenerateGroupingError as exc:
        raise ConfigError(f"grouping failed: {exc}")
    path = out / "groups.json"
    path.write_text(report.to_json())
    print(f"wrote {path}")
    for group in report.groups:
        print("group: " + " ".join(str(s) for s in group))
    return 0


def cmd_presets(args) -> int:
    for name in sorted(PRESETS):
        spec = PRESETS[name]()
        print(f"{name}: {spec.n_sites} sites, sink on site "
              f"{spec.preferred_site} at {spec.sink_rate:.6g} cm-1")
    return 0


def _add_common(p: argparse.ArgumentParser, with_measures: bool) -> None:
    p.add_argument("--preset", help="built-in network name (see 'presets')")
    p.add_argument("--config", help="INI experiment/network file")
    p.add_argument("--t-end", dest="t_end", type=float, help="horizon, ps")
    p.add_argument("--dt", type=float, help="integrator step, ps")
    p.add_argument("--sample-every", dest="sample_every", type=float,
                   help="sampling interval, ps")
    p.add_argument("--out", help="output directory (default .)")
    p.add_argument("--threads", type=int,
                   help="worker count (default: EXCITONKIT_THREADS or 1)")
    if with_measures:
        p.add_argument("--measure", action="append", choices=MEASURES,
                       help="correlation measure (repeatable)")
        p.add_argument("--nodal", help="nodal sites, e.g. '1 2 3' or 'all'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="excitonkit",
        description="Lindblad exciton transport with quantum-correlation analytics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate and write populations.csv")
    _add_common(p, with_measures=False)
    p.add_argument("--initial", help="initial state, e.g. '1' or '0.5*1+0.5*6'")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("correlations", help="monogamy-component series CSVs")
    _add_common(p, with_measures=True)
    p.add_argument("--initial", help="initial state")
    p.set_defaults(func=cmd_correlations)

    p = sub.add_parser("route", help="dominance route report")
    _add_common(p, with_measures=True)
    p.add_argument("--initial", help="initial state")
    p.add_argument("--dwell", type=float,
                   help=f"minimum dominance dwell, ps (default {analytics.DWELL_DEFAULT})")
    p.add_argument("--floor", type=float,
                   help=f"dominance floor (default {analytics.FLOOR_DEFAULT})")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("classify", help="group sites by correlation features")
    _add_common(p, with_measures=False)
    p.add_argument("--initial", action="append",
                   help="initial state per run (repeatable; default: site 1, "
                        "site 6, and their even mixture for the fmo preset)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("presets", help="list built-in networks")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except IntegrationAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 3
    except StateError as exc:
        print(f"numerical abort: {exc}; reduce dt", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
