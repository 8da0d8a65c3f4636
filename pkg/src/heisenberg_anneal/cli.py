"""Command-line entry point.

    heisenberg-anneal anneal   CONFIG.json [--out-dir DIR]
    heisenberg-anneal spectrum --preset frustrated3
    heisenberg-anneal ground   --preset alternating9
    heisenberg-anneal presets

Exit codes: 0 success, 1 configuration error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import analysis
from .errors import CapabilityError, ConfigError, ContractError, NormDriftError
from .experiments import (
    PRESETS,
    AnnealConfig,
    dominant_to_dict,
    frustration_to_dict,
    preset,
    run_config,
)
from .operators import Bond, CouplingGraph, FieldParams, build_total_spin_squared
from .propagator import IntegratorConfig
from .schedule import AnnealSchedule
from .spectrum import (
    DEFAULT_DEGENERACY_TOL,
    DEFAULT_SPECTRUM_POINTS,
    default_s_grid,
    eigen_decompose,
    ground_space,
    level_gaps,
    spectrum_series,
)

COMMANDS = ("anneal", "spectrum", "ground", "presets")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

PHYSICS_KEYS = ("n_spins", "couplings", "b0", "b_prime", "tau")
RUN_KEYS = ("dt", "samples", "track", "degeneracy_tol", "spectrum_points", "out_dir", "norm_tol")
CSV_FMT = "%.12g"


@dataclass(frozen=True)
class RunConfig:
    n_spins: int
    couplings: tuple[tuple[int, int, float], ...]
    b0: float = 1.0
    b_prime: float = 20.0
    tau: float = 500.0
    dt: float = 1e-3
    samples: int = 501
    track: tuple[int, ...] | str | None = None
    preset: str | None = None
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL
    spectrum_points: int = DEFAULT_SPECTRUM_POINTS
    out_dir: str = "."
    norm_tol: float = 1e-6

    def anneal_config(self) -> AnnealConfig:
        return AnnealConfig(
            CouplingGraph.from_triples(self.n_spins, self.couplings),
            FieldParams(self.b0, self.b_prime),
            AnnealSchedule(self.tau),
            IntegratorConfig(dt=self.dt, norm_tol=self.norm_tol, n_samples=self.samples, track=self.track),
        )

    def cycle(self) -> tuple[Bond, ...] | None:
        """The preset's ring, or the couplings in file order if they form a closed cycle."""
        if self.preset is not None:
            return PRESETS[self.preset].cycle
        bonds = tuple(Bond(int(k), int(m), float(J)) for k, m, J in self.couplings)
        try:
            analysis.frustration_parity(bonds)
        except ConfigError:
            return None
        return bonds


def _line_of(text: str | None, key: str) -> str:
    if text is None:
        return ""
    for lineno, line in enumerate(text.splitlines(), 1):
        if f'"{key}"' in line:
            return f" (line {lineno})"
    return ""


def _number(raw: dict, key: str, default, text, kind=float, positive=False, nonneg=False):
    if key not in raw:
        return default
    v = raw[key]
    where = _line_of(text, key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"field '{key}'{where}: expected a number, got {v!r}")
    if kind is int:
        if int(v) != v:
            raise ConfigError(f"field '{key}'{where}: expected an integer, got {v!r}")
        v = int(v)
    if not math.isfinite(v):
        raise ConfigError(f"field '{key}'{where}: must be finite")
    if positive and v <= 0:
        raise ConfigError(f"field '{key}'{where}: must be > 0, got {v!r}")
    if nonneg and v < 0:
        raise ConfigError(f"field '{key}'{where}: must be >= 0, got {v!r}")
    return kind(v)


def config_from_dict(raw: dict[str, Any], text: str | None = None) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(raw) - set(PHYSICS_KEYS) - set(RUN_KEYS) - {"preset"})
    if unknown:
        raise ConfigError(f"unknown field '{unknown[0]}'{_line_of(text, unknown[0])}")

    run: dict[str, Any] = {
        "dt": _number(raw, "dt", 1e-3, text, positive=True),
        "samples": _number(raw, "samples", 501, text, kind=int),
        "degeneracy_tol": _number(raw, "degeneracy_tol", DEFAULT_DEGENERACY_TOL, text, positive=True),
        "spectrum_points": _number(raw, "spectrum_points", DEFAULT_SPECTRUM_POINTS, text, kind=int, positive=True),
        "norm_tol": _number(raw, "norm_tol", 1e-6, text, positive=True),
    }
    if run["samples"] < 2:
        raise ConfigError(f"field 'samples'{_line_of(text, 'samples')}: must be >= 2")
    out_dir = raw.get("out_dir", ".")
    if not isinstance(out_dir, str) or not out_dir:
        raise ConfigError(f"field 'out_dir'{_line_of(text, 'out_dir')}: expected a path string")
    run["out_dir"] = out_dir
    track = raw.get("track")
    if track is not None and track != "all":
        if not isinstance(track, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in track):
            raise ConfigError(f"field 'track'{_line_of(text, 'track')}: expected \"all\" or a list of integers")
        track = tuple(track)
    run["track"] = track

    if raw.get("preset") is not None:
        name = raw["preset"]
        clash = [k for k in PHYSICS_KEYS if k in raw]
        if clash:
            raise ConfigError(
                f"field '{clash[0]}'{_line_of(text, clash[0])}: cannot be combined with 'preset'"
            )
        if name not in PRESETS:
            raise ConfigError(
                f"field 'preset'{_line_of(text, 'preset')}: unknown preset {name!r}; "
                f"valid presets: {', '.join(PRESETS)}"
            )
        c = PRESETS[name].config
        cfg = RunConfig(
            n_spins=c.n_spins,
            couplings=tuple((b.k, b.m, b.J) for b in c.graph.bonds),
            b0=c.fields.b0,
            b_prime=c.fields.b_prime,
            tau=c.schedule.tau,
            preset=name,
            **run,
        )
    else:
        if "n_spins" not in raw:
            raise ConfigError("field 'n_spins' is required when no preset is given")
        n = _number(raw, "n_spins", None, text, kind=int, positive=True)
        couplings = raw.get("couplings", [])
        where = _line_of(text, "couplings")
        if not isinstance(couplings, list):
            raise ConfigError(f"field 'couplings'{where}: expected a list of [k, m, J]")
        triples = []
        for entry in couplings:
            if (
                not isinstance(entry, list)
                or len(entry) != 3
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
                or int(entry[0]) != entry[0]
                or int(entry[1]) != entry[1]
            ):
                raise ConfigError(f"field 'couplings'{where}: bad entry {entry!r}, expected [k, m, J]")
            triples.append((int(entry[0]), int(entry[1]), float(entry[2])))
        cfg = RunConfig(
            n_spins=n,
            couplings=tuple(triples),
            b0=_number(raw, "b0", 1.0, text, nonneg=True),
            b_prime=_number(raw, "b_prime", 20.0, text, nonneg=True),
            tau=_number(raw, "tau", 500.0, text, positive=True),
            **run,
        )
    try:
        cfg.anneal_config()
    except ConfigError as exc:
        msg = str(exc)
        key = "couplings" if "bond" in msg else "n_spins" if "n_spins" in msg else None
        where = f"field '{key}'{_line_of(text, key)}: " if key else ""
        raise ConfigError(f"{where}{msg}") from None
    return cfg


def parse_config(source: str | Path) -> RunConfig:
    """Load a RunConfig from a JSON file path or inline JSON text."""
    if isinstance(source, Path) or not str(source).lstrip().startswith("{"):
        text = Path(source).read_text()
    else:
        text = str(source)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return config_from_dict(raw, text)


def _write_csv(path: Path, header: Sequence[str], rows: np.ndarray) -> None:
    np.savetxt(path, rows, fmt=CSV_FMT, delimiter=",", header=",".join(header), comments="")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def write_trajectory_csv(path: Path, traj) -> None:
    header = ["t", *(f"p_{i}" for i in traj.tracked), "norm"]
    rows = np.column_stack([traj.times, traj.probabilities, traj.norms])
    _write_csv(path, header, rows)


def run_anneal(cfg: RunConfig, out: Path, verbose: bool = False) -> dict:
    on_sample = None
    if verbose:
        def on_sample(t, norm):
            print(f"t={t:.6g} norm={norm:.15f}", file=sys.stderr)
    p = PRESETS.get(cfg.preset) if cfg.preset else None
    report = run_config(
        cfg.anneal_config(),
        name=cfg.preset,
        cycle=cfg.cycle(),
        expected=p.expected if p else None,
        degeneracy_tol=cfg.degeneracy_tol,
        on_sample=on_sample,
    )
    write_trajectory_csv(out / "trajectory.csv", report.trajectory)
    payload = report.to_dict()
    _write_json(out / "report.json", payload)
    return payload


def run_spectrum(cfg: RunConfig, out: Path) -> np.ndarray:
    ah = cfg.anneal_config().hamiltonian()
    series = spectrum_series(ah, default_s_grid(cfg.spectrum_points))
    header = ["s", *(f"E_{i}" for i in range(1, ah.dimension + 1))]
    rows = np.column_stack([series.s_grid, series.levels])
    _write_csv(out / "spectrum.csv", header, rows)
    return rows


def run_ground(cfg: RunConfig, out: Path) -> dict:
    ac = cfg.anneal_config()
    h = ac.hamiltonian().h_final
    eig = eigen_decompose(h)
    gs = ground_space(eig, cfg.degeneracy_tol)
    vec = analysis.fix_global_phase(gs.basis[:, 0])
    s2, sz = analysis.total_spin_expectations(vec, build_total_spin_squared(ac.n_spins), ac.n_spins)
    payload = {
        "preset": cfg.preset,
        "n_spins": ac.n_spins,
        "couplings": [[b.k, b.m, b.J] for b in ac.graph.bonds],
        "b0": ac.fields.b0,
        "ground_energy": gs.energy,
        "degeneracy": gs.degeneracy,
        "degeneracy_tol": gs.degeneracy_tol,
        **level_gaps(eig.eigenvalues),
        "energies": [float(e) for e in eig.eigenvalues],
        "dominant_states": [
            dominant_to_dict(d, ac.n_spins) for d in analysis.dominant_states(vec, 0.02)
        ],
        "s2": s2,
        "sz": sz,
        "frustration": frustration_to_dict(analysis.frustration_parity(c) if (c := cfg.cycle()) else None),
    }
    _write_json(out / "ground.json", payload)
    return payload


def list_presets() -> str:
    return "\n".join(f"{name:<14}{p.description}" for name, p in PRESETS.items())


def dispatch(command: str, cfg: RunConfig | None, verbose: bool = False) -> int:
    """Run one subcommand; returns the process exit code."""
    try:
        if command == "presets":
            print(list_presets())
            return EXIT_OK
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
        if cfg is None:
            raise ConfigError(f"'{command}' needs a config file or --preset")
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if command == "anneal":
            run_anneal(cfg, out, verbose)
        elif command == "spectrum":
            run_spectrum(cfg, out)
        else:
            run_ground(cfg, out)
        return EXIT_OK
    except NormDriftError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ContractError, CapabilityError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="heisenberg-anneal",
        description="Quantum annealing of spin-1/2 Heisenberg chains from a staggered transverse field.",
    )
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("config", nargs="?", help="JSON run configuration (path or inline JSON)")
    ap.add_argument("--preset", help="use a named preset instead of a config file")
    ap.add_argument("--out-dir", help="directory for output files (overrides out_dir)")
    ap.add_argument("-v", "--verbose", action="store_true", help="print one line per trajectory sample")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = None
    if args.command != "presets":
        try:
            if args.config and args.preset:
                raise ConfigError("give either a config file or --preset, not both")
            if args.config:
                cfg = parse_config(args.config)
            elif args.preset:
                cfg = config_from_dict({"preset": args.preset})
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except OSError as exc:
            print(f"I/O error: {exc}", file=sys.stderr)
            return EXIT_IO
        if cfg is not None and args.out_dir:
            cfg = replace(cfg, out_dir=args.out_dir)
    return dispatch(args.command, cfg, verbose=args.verbose)


if __name__ == "__main__":
    sys.exit(main())
