"""Command-line interface: one subcommand per pipeline, CSV outputs.

Every subcommand reads a configuration (``--preset`` or ``--config``,
optionally patched with ``--set key.path=value``), runs the corresponding
library pipeline and writes deterministic CSV files named
``<task>_<preset>_<confighash>.csv`` into the output directory. Each file
embeds the tool version and the configuration hash as comment lines, and
a one-line summary is printed to stdout.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 fit failure,
5 partial success (some inputs processed, some failed), 1 unexpected error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, apply_overrides, load_preset, parse_config
from .control_map import rabi_map, write_rabi_map_csv
from .epr_sim import derivative_spectrum, powder_spectrum, write_spectrum_csv
from .errors import ConfigError, DataError, FitError, SpinQuditError
from .observables import BaselineTable, add_lattice_baseline, chi_t_curve, heat_capacity
from .pulse_fit import (
    DecayTrace,
    fit_decay,
    nutation_fft,
    read_trace_csv,
    write_fit_report_csv,
)
from .spin_core import build_hamiltonian, eigensolve, system_gs, system_spins
from .universality import allowed_edges, graph_closure, write_reachability_csv

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_FIT = 4
EXIT_PARTIAL = 5

SUBCOMMANDS = (
    "spectrum", "heatcap", "chi", "levels",
    "rabi-map", "universality", "fit-decay", "nutation",
)


def ingest_trace_dir(path) -> tuple[list[DecayTrace], list[tuple[str, str]]]:
    """Parse every ``*.csv`` trace in a directory, collecting failures.

    Returns the valid traces sorted by field and a list of
    (filename, message) pairs for files that failed to parse. An empty or
    missing directory is an error.
    """
    directory = Path(path)
    if not directory.is_dir():
        raise DataError(f"{path}: not a directory")
    files = sorted(directory.glob("*.csv"))
    if not files:
        raise DataError(f"{path}: no trace CSV files found")
    traces = []
    failures = []
    for f in files:
        try:
            traces.append(read_trace_csv(f))
        except DataError as exc:
            failures.append((f.name, str(exc)))
    traces.sort(key=lambda tr: tr.field_mt)
    return traces, failures


def _out_path(cfg: RunConfig, task: str, label: str, out_dir) -> Path:
    directory = Path(out_dir) if out_dir else Path(cfg.data["output"]["dir"])
    directory.mkdir(parents=True, exist_ok=True)
    return directory / f"{task}_{label}_{cfg.config_hash()[:8]}.csv"


def _stamp(cfg: RunConfig) -> list[str]:
    return [f"tool_version={__version__}", f"config_sha256={cfg.config_hash()}"]


def run_subcommand(name: str, cfg: RunConfig, data_paths=(), out_dir=None,
                   threads: int = 1, label: str = "custom"):
    """Run one pipeline; returns (exit_code, written paths, summary line)."""
    if name == "levels":
        es = eigensolve(build_hamiltonian(cfg.system_params(), cfg.field()))
        path = _out_path(cfg, "levels", label, out_dir)
        with open(path, "w", newline="") as fh:
            for line in _stamp(cfg):
                fh.write(f"# {line}\n")
            fh.write("n,energy_GHz\n")
            for i, e in enumerate(es.energies, start=1):
                fh.write(f"{i},{e:.12g}\n")
        summary = (f"levels={es.dimension} e_min_GHz={es.energies[0]:.6g} "
                   f"e_max_GHz={es.energies[-1]:.6g}")
        return EXIT_OK, [path], summary

    if name == "spectrum":
        spec = cfg.spectrometer()
        spectrum = powder_spectrum(cfg.system_params(), cfg.ensemble(), spec,
                                   threads=threads)
        if cfg.data["spectrum"]["kind"] == "first_derivative":
            spectrum = derivative_spectrum(spectrum)
        path = _out_path(cfg, "spectrum", label, out_dir)
        write_spectrum_csv(spectrum, path, comments=_stamp(cfg))
        summary = (f"spectrum kind={spectrum.kind} points={spectrum.field_grid.size} "
                   f"max_amplitude={np.max(np.abs(spectrum.amplitude)):.6g}")
        return EXIT_OK, [path], summary

    if name == "heatcap":
        grid = cfg.thermal_grid()
        c = heat_capacity(cfg.system_params(), cfg.ensemble(), grid)
        baseline_path = cfg.data["heatcap"]["baseline_csv"]
        if baseline_path is not None:
            if not Path(baseline_path).is_file():
                raise DataError(f"{baseline_path}: baseline file not found")
            baseline = BaselineTable.from_csv(baseline_path)
            c = add_lattice_baseline(grid.temperatures, c, baseline)
        path = _out_path(cfg, "heatcap", label, out_dir)
        with open(path, "w", newline="") as fh:
            for line in _stamp(cfg):
                fh.write(f"# {line}\n")
            fh.write("T_K,c_over_R\n")
            for t, v in zip(grid.temperatures, c):
                fh.write(f"{t:.12g},{v:.12g}\n")
        ipk = int(np.argmax(c))
        summary = f"heatcap peak_T_K={grid.temperatures[ipk]:.6g} peak_c_over_R={c[ipk]:.6g}"
        return EXIT_OK, [path], summary

    if name == "chi":
        grid = cfg.thermal_grid()
        probe = cfg.data["chi"]["probe_field_T"]
        chit = chi_t_curve(cfg.system_params(), cfg.ensemble(), grid, probe_field=probe)
        path = _out_path(cfg, "chi", label, out_dir)
        with open(path, "w", newline="") as fh:
            for line in _stamp(cfg):
                fh.write(f"# {line}\n")
            fh.write(f"# probe_field_T={probe:.12g}\n")
            fh.write("T_K,chiT_emu_K_per_mol\n")
            for t, v in zip(grid.temperatures, chit):
                fh.write(f"{t:.12g},{v:.12g}\n")
        summary = (f"chi chiT_low={chit[0]:.6g} chiT_high={chit[-1]:.6g} "
                   f"probe_T={probe:g}")
        return EXIT_OK, [path], summary

    if name == "rabi-map":
        params = cfg.system_params()
        es = eigensolve(build_hamiltonian(params, cfg.field()))
        rmap = rabi_map(es, cfg.drive_direction(), system_gs(params),
                        spins=system_spins(params),
                        half_factor=cfg.data["drive"]["half_factor"])
        path = _out_path(cfg, "rabi-map", label, out_dir)
        write_rabi_map_csv(rmap, path, comments=_stamp(cfg))
        iu = np.triu_indices(rmap.d, 1)
        summary = (f"rabi-map d={rmap.d} "
                   f"pairs_above_10MHz_per_mT={int(np.sum(rmap.rate[iu] > 10.0))}")
        return EXIT_OK, [path], summary

    if name == "universality":
        params = cfg.system_params()
        es = eigensolve(build_hamiltonian(params, cfg.field()))
        rmap = rabi_map(es, cfg.drive_direction(), system_gs(params),
                        spins=system_spins(params),
                        half_factor=cfg.data["drive"]["half_factor"])
        blk = cfg.data["universality"]
        edges = allowed_edges(rmap, blk["threshold_MHz_per_mT"],
                              resolvability_mhz=blk["resolvability_MHz"])
        result = graph_closure(edges)
        path = _out_path(cfg, "universality", label, out_dir)
        write_reachability_csv(result, path, comments=_stamp(cfg))
        summary = (f"universal={'true' if result.universal else 'false'} "
                   f"components={len(result.components)}")
        return EXIT_OK, [path], summary

    if name == "fit-decay":
        if not data_paths:
            raise DataError("fit-decay requires a trace directory argument")
        traces, file_failures = ingest_trace_dir(data_paths[0])
        max_evals = cfg.data["fit"]["max_evals"]

        def fit_one(trace):
            try:
                return fit_decay(trace, max_nfev=max_evals), None
            except FitError as exc:
                return exc.best, str(exc)

        if threads > 1 and len(traces) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(fit_one, traces))
        else:
            results = [fit_one(tr) for tr in traces]

        rows = []
        fit_failures = []
        for trace, (fit, err) in zip(traces, results):
            if err is None:
                rows.append((trace.field_mt, fit))
            else:
                fit_failures.append((trace.field_mt, err))
        path = _out_path(cfg, "fit-decay", label, out_dir)
        write_fit_report_csv(rows, path, comments=_stamp(cfg) + [
            f"input_files={len(traces) + len(file_failures)}",
            f"file_failures={len(file_failures)}",
            f"fit_failures={len(fit_failures)}",
        ])
        for fname, msg in file_failures:
            print(f"failed file: {fname}: {msg}", file=sys.stderr)
        for field_mt, msg in fit_failures:
            print(f"failed fit at {field_mt:g} mT: {msg}", file=sys.stderr)
        summary = f"fits={len(rows)} failures={len(file_failures) + len(fit_failures)}"
        if not rows:
            return EXIT_FIT, [path], summary
        if file_failures or fit_failures:
            return EXIT_PARTIAL, [path], summary
        return EXIT_OK, [path], summary

    if name == "nutation":
        if not data_paths:
            raise DataError("nutation requires a trace CSV argument")
        trace_path = Path(data_paths[0])
        if not trace_path.is_file():
            raise DataError(f"{trace_path}: trace file not found")
        trace = read_trace_csv(trace_path)
        blk = cfg.data["nutation"]
        result = nutation_fft(
            trace, window=blk["window"], zero_pad_factor=blk["zero_pad_factor"],
            noise_floor_multiple=blk["noise_floor_multiple"], nitrogen=blk["nitrogen"],
        )
        path = _out_path(cfg, "nutation", label, out_dir)
        with open(path, "w", newline="") as fh:
            for line in _stamp(cfg):
                fh.write(f"# {line}\n")
            fh.write(f"# resolution_MHz={result.resolution:.12g}\n")
            fh.write(f"# field_mT={trace.field_mt:.12g}\n")
            fh.write("freq_MHz,magnitude,labels\n")
            for (f, mag), labels in zip(result.peaks, result.labels):
                fh.write(f"{f:.12g},{mag:.12g},{'+'.join(labels)}\n")
        summary = f"nutation peaks={len(result.peaks)} resolution_MHz={result.resolution:.6g}"
        return EXIT_OK, [path], summary

    raise ConfigError(f"unknown subcommand {name!r}")


def _build_config(args) -> tuple[RunConfig, str]:
    if args.config and args.preset:
        raise ConfigError("--config and --preset are mutually exclusive")
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        label = "custom"
    elif args.preset:
        text = load_preset(args.preset)
        label = args.preset
    else:
        raise ConfigError("one of --config or --preset is required")
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"ensemble.seed={args.seed}")
    if overrides:
        text = apply_overrides(text, overrides)
    return parse_config(text), label


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinqudit",
        description="Simulation and analysis toolkit for molecular spin qudits.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("data", nargs="*", help="input data paths (fit-decay: trace directory; nutation: trace CSV)")
        p.add_argument("--config", help="path to a configuration JSON file")
        p.add_argument("--preset", help="bundled preset name (lagd, gdlu, gd2)")
        p.add_argument("--set", action="append", metavar="KEY.PATH=VALUE",
                       help="override a configuration entry (repeatable)")
        p.add_argument("--out", help="output directory (default from config)")
        p.add_argument("--seed", type=int, help="override ensemble.seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for data-parallel loops (default 1)")
    return parser


def main(argv=None) -> int:
    args = _make_parser().parse_args(argv)
    try:
        cfg, label = _build_config(args)
        code, paths, summary = run_subcommand(
            args.command, cfg, data_paths=args.data, out_dir=args.out,
            threads=max(1, args.threads), label=label,
        )
        print(summary)
        for p in paths:
            print(f"wrote {p}")
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FitError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except SpinQuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
