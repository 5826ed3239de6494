"""Command-line front end: simulate -> unmix -> evaluate -> compare -> plot.

Every command is deterministic given its flags (byte-identical outputs),
reads an optional flat TOML config file whose keys mirror the command's
flags (flags override the file; unknown keys are rejected), and uses the
exit codes 0 success, 2 usage/config error, 3 IO error, 4 numeric
failure (a robust solve whose line searches stalled before convergence).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import io as hio
from . import metrics, simulate, solvers
from .errors import InvalidValue, ParseError, UnmixError, UnmixIOError
from .model import ObservationMatrix, flatten_cube, unflatten

_SENTINEL = None

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


# ------------------------------------------------------------- utilities

def _load_config(path, known: dict) -> dict:
    """Read a flat TOML file; reject keys that are not flags of the command."""
    try:
        with open(path, "rb") as fh:
            values = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise InvalidValue(f"{path}: invalid TOML: {exc}") from exc
    unknown = set(values) - set(known)
    if unknown:
        raise InvalidValue(f"{path}: unknown config keys {sorted(unknown)}")
    return values


def _merge(args, defaults: dict) -> dict:
    """Layer values: CLI flag beats config file beats built-in default."""
    file_values = {}
    if args.config is not None:
        file_values = _load_config(args.config, defaults)
    merged = {}
    for key, default in defaults.items():
        cli = getattr(args, key)
        if cli is not None:
            merged[key] = cli
        elif key in file_values:
            merged[key] = file_values[key]
        else:
            merged[key] = default
    return merged


def _parse_map(text: str) -> dict[int, str]:
    mapping = {}
    for part in text.split(","):
        label, sep, name = part.partition("=")
        if not sep or not name:
            raise InvalidValue(f"bad --map entry {part!r}, expected <label>=<name>")
        try:
            key = int(label)
        except ValueError as exc:
            raise InvalidValue(f"bad --map label {label!r}") from exc
        mapping[key] = name
    return mapping


def _parse_seeds(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",")]
    except ValueError as exc:
        raise InvalidValue(f"bad --seeds list {text!r}") from exc


def _read_observations(path) -> ObservationMatrix:
    path = Path(path)
    if path.suffix == ".csv":
        return ObservationMatrix(hio.read_matrix_csv(path))
    return flatten_cube(hio.read_cube(path))


def _write_json(document: dict, path) -> None:
    Path(path).write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")


def _find_matrix(directory, names) -> np.ndarray:
    directory = Path(directory)
    for name in names:
        candidate = directory / name
        if candidate.exists():
            return hio.read_matrix_csv(candidate)
    raise InvalidValue(f"none of {names} found in {directory}")


def _solver_config(opts: dict, algorithm: str) -> solvers.SolverConfig:
    return solvers.SolverConfig(
        algorithm=algorithm,
        n_endmembers=opts["endmembers"],
        max_iter=opts["max_iter"],
        rel_tol=opts["rel_tol"],
        seed=opts["seed"],
        init=opts["init"],
        asc=opts["asc"],
        asc_delta=opts["asc_delta"],
    )


# ------------------------------------------------------------- simulate

_SIMULATE_DEFAULTS = {
    "factor": 1,
    "filter": "blockmean",
    "sigma": 1.0,
    "snr_db": None,
    "outlier_frac": 0.0,
    "outlier_mag": 1.5,
    "seed": 0,
}


def cmd_simulate(args) -> int:
    opts = _merge(args, _SIMULATE_DEFAULTS)
    gt = hio.read_groundtruth(args.gt)
    library = hio.read_library(args.library)
    mapping = _parse_map(args.map)
    spec = simulate.SceneSpec(
        gt=gt,
        class_to_signature=mapping,
        downsample_factor=int(opts["factor"]),
        filter=opts["filter"],
        filter_sigma=float(opts["sigma"]),
        snr_db=None if opts["snr_db"] is None else float(opts["snr_db"]),
        outlier_fraction=float(opts["outlier_frac"]),
        outlier_magnitude=float(opts["outlier_mag"]),
        seed=int(opts["seed"]),
    )
    dataset = simulate.generate(spec, library)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    low_rows = gt.rows // spec.downsample_factor
    low_cols = gt.cols // spec.downsample_factor
    cube = unflatten(dataset.x, low_rows, low_cols, library.wavelengths)
    hio.write_cube(cube, out / "X.hdr")
    hio.write_matrix_csv(dataset.a_true, out / "A_true.csv")
    hio.write_matrix_csv(dataset.e_true, out / "E_true.csv")
    _write_json(
        {
            "gt": str(args.gt),
            "library": str(args.library),
            "map": {str(k): v for k, v in sorted(mapping.items())},
            "factor": spec.downsample_factor,
            "filter": spec.filter,
            "sigma": spec.filter_sigma,
            "snr_db": spec.snr_db,
            "outlier_frac": spec.outlier_fraction,
            "outlier_mag": spec.outlier_magnitude,
            "seed": spec.seed,
            "pixels": dataset.dims.n_pixels,
            "bands": dataset.dims.n_bands,
            "endmembers": dataset.dims.n_endmembers,
        },
        out / "provenance.json",
    )
    return EXIT_OK


# ---------------------------------------------------------------- unmix

_UNMIX_DEFAULTS = {
    "max_iter": 500,
    "rel_tol": 1e-6,
    "seed": 0,
    "init": "random",
    "asc": "none",
    "asc_delta": 10.0,
}


def cmd_unmix(args) -> int:
    opts = _merge(args, _UNMIX_DEFAULTS)
    opts["endmembers"] = args.endmembers
    observations = _read_observations(args.input)
    config = _solver_config(opts, args.algo)
    result = solvers.solve(observations, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    hio.write_matrix_csv(result.abundances, out / "A_est.csv")
    hio.write_matrix_csv(result.endmembers, out / "E_est.csv")
    trace_lines = ["iteration,cost"] + [
        f"{i},{c:.17g}" for i, c in enumerate(result.cost_trace)
    ]
    (out / "trace.csv").write_text("\n".join(trace_lines) + "\n", encoding="utf-8")
    _write_json(
        {
            "algorithm": config.algorithm,
            "input": str(args.input),
            "iterations": result.iterations,
            "termination": result.termination,
            "seed": config.seed,
            "config": {
                "endmembers": config.n_endmembers,
                "max_iter": config.max_iter,
                "rel_tol": config.rel_tol,
                "init": config.init,
                "asc": config.asc,
                "asc_delta": config.asc_delta,
            },
        },
        out / "run.json",
    )
    if result.termination == "stalled_line_search":
        print("unmix: line search stalled before convergence", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


# ------------------------------------------------------------- evaluate

def cmd_evaluate(args) -> int:
    e_true = _find_matrix(args.truth, ("E_true.csv", "E_est.csv"))
    a_true = _find_matrix(args.truth, ("A_true.csv", "A_est.csv"))
    e_est = _find_matrix(args.est, ("E_est.csv", "E_true.csv"))
    a_est = _find_matrix(args.est, ("A_est.csv", "A_true.csv"))
    report = metrics.evaluate(e_true, a_true, e_est, a_est)
    metadata = {}
    run_file = Path(args.est) / "run.json"
    if run_file.exists():
        run = hio.read_report(run_file)
        metadata = {
            "algorithm": run.get("algorithm"),
            "iterations": run.get("iterations"),
            "termination": run.get("termination"),
            "seed": run.get("seed"),
            "config": run.get("config"),
        }
    hio.write_report(report, metadata, args.out)
    return EXIT_OK


# -------------------------------------------------------------- compare

def cmd_compare(args) -> int:
    opts = _merge(args, _UNMIX_DEFAULTS)
    opts["endmembers"] = args.endmembers
    observations = _read_observations(args.input)
    e_true = _find_matrix(args.truth, ("E_true.csv", "E_est.csv"))
    a_true = _find_matrix(args.truth, ("A_true.csv", "A_est.csv"))
    seeds = _parse_seeds(args.seeds)
    if not seeds:
        raise InvalidValue("--seeds must list at least one seed")

    rows = []
    for algorithm in ("nmf", "rnmf"):
        for seed in sorted(seeds):
            cell = dict(opts)
            cell["seed"] = seed
            config = _solver_config(cell, algorithm)
            result = solvers.solve(observations, config)
            report = metrics.evaluate(e_true, a_true, result.endmembers,
                                      result.abundances)
            rows.append(
                {
                    "algorithm": algorithm,
                    "seed": seed,
                    "rms_sad_deg": math.degrees(report.rms_sad),
                    "rms_aad_deg": math.degrees(report.rms_aad),
                    "iterations": result.iterations,
                    "termination": result.termination,
                }
            )
    medians = []
    for algorithm in ("nmf", "rnmf"):
        cells = [r for r in rows if r["algorithm"] == algorithm]
        medians.append(
            {
                "algorithm": algorithm,
                "rms_sad_deg": float(np.median([r["rms_sad_deg"] for r in cells])),
                "rms_aad_deg": float(np.median([r["rms_aad_deg"] for r in cells])),
            }
        )
    _write_json(
        {
            "input": str(args.input),
            "endmembers": args.endmembers,
            "seeds": sorted(seeds),
            "solver": {
                "max_iter": opts["max_iter"],
                "rel_tol": opts["rel_tol"],
                "init": opts["init"],
                "asc": opts["asc"],
                "asc_delta": opts["asc_delta"],
            },
            "rows": rows,
            "medians": medians,
        },
        args.out,
    )
    return EXIT_OK


# ----------------------------------------------------------------- plot

def _svg_cost_chart(trace: np.ndarray) -> str:
    width, height, margin = 640, 400, 50
    inner_w, inner_h = width - 2 * margin, height - 2 * margin
    n = trace.size
    lo, hi = float(trace.min()), float(trace.max())
    span = hi - lo if hi > lo else 1.0

    def x_at(i):
        return margin + (inner_w * i / (n - 1) if n > 1 else inner_w / 2)

    def y_at(v):
        return margin + inner_h * (1.0 - (v - lo) / span)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>',
        f'<text x="{width // 2}" y="{height - 12}" text-anchor="middle" '
        f'font-size="14">iteration</text>',
        f'<text x="14" y="{height // 2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 14 {height // 2})">cost</text>',
        f'<text x="{margin}" y="{height - margin + 18}" font-size="12">0</text>',
        f'<text x="{width - margin}" y="{height - margin + 18}" font-size="12" '
        f'text-anchor="end">{n - 1}</text>',
        f'<text x="{margin - 6}" y="{y_at(lo):.2f}" font-size="12" '
        f'text-anchor="end">{lo:.6g}</text>',
        f'<text x="{margin - 6}" y="{y_at(hi):.2f}" font-size="12" '
        f'text-anchor="end">{hi:.6g}</text>',
    ]
    if n == 1:
        parts.append(
            f'<circle cx="{x_at(0):.2f}" cy="{y_at(trace[0]):.2f}" r="4" fill="steelblue"/>'
        )
    else:
        points = " ".join(f"{x_at(i):.2f},{y_at(v):.2f}" for i, v in enumerate(trace))
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="steelblue" stroke-width="1.5"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _write_pgm(values: np.ndarray, path) -> None:
    rows, cols = values.shape
    levels = np.rint(255.0 * np.clip(values, 0.0, 1.0)).astype(np.uint8)
    header = f"P5\n{cols} {rows}\n255\n".encode("ascii")
    Path(path).write_bytes(header + levels.tobytes())


def _read_trace(path) -> np.ndarray:
    """Cost column of a trace.csv, tolerating the iteration,cost header."""
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8") from exc
    lines = [line for line in text.splitlines() if line]
    if lines and lines[0].startswith("iteration"):
        lines = lines[1:]
    if not lines:
        raise ParseError(f"{path}: no trace rows")
    costs = []
    for line in lines:
        cells = line.split(",")
        try:
            costs.append(float(cells[-1]))
        except ValueError as exc:
            raise ParseError(f"{path}: non-numeric cost {cells[-1]!r}") from exc
    return np.array(costs)


def cmd_plot(args) -> int:
    if (args.trace is None) == (args.abundance is None):
        raise InvalidValue("plot needs exactly one of --trace or --abundance")
    if args.trace is not None:
        trace = _read_trace(args.trace)
        Path(args.out).write_text(_svg_cost_chart(trace), encoding="utf-8")
        return EXIT_OK
    if args.rows is None or args.cols is None:
        raise InvalidValue("--abundance needs --rows and --cols")
    matrix = hio.read_matrix_csv(args.abundance)
    if matrix.shape[0] != args.rows * args.cols:
        raise InvalidValue(
            f"{matrix.shape[0]} abundance rows cannot fill {args.rows}x{args.cols}"
        )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(matrix.shape[1]):
        plane = matrix[:, k].reshape(args.rows, args.cols)
        _write_pgm(plane, out / f"abundance_{k}.pgm")
    return EXIT_OK


# ----------------------------------------------------------------- main

def _add_config_flag(parser):
    parser.add_argument("--config", default=None, metavar="FILE",
                        help="flat TOML file of defaults for this command; "
                             "flags override it (default: none)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsunmix",
        description="Spectral unmixing toolkit: scene simulation, baseline and "
                    "robust NMF, SAD/AAD evaluation, comparison tables, plots.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a mixed-pixel dataset from a label map")
    p.add_argument("--gt", required=True, help="ground-truth label CSV")
    p.add_argument("--library", required=True, help="spectral library CSV")
    p.add_argument("--map", required=True,
                   help="label-to-signature assignment, e.g. 1=grass,2=asphalt")
    p.add_argument("--factor", type=int, default=None,
                   help="downsampling factor d (default: 1)")
    p.add_argument("--filter", choices=simulate.FILTERS, default=None,
                   help="spatial filter before downsampling (default: blockmean)")
    p.add_argument("--sigma", type=float, default=None,
                   help="gaussian filter sigma in pixels (default: 1.0)")
    p.add_argument("--snr-db", dest="snr_db", type=float, default=None,
                   help="measurement noise SNR in dB (default: no noise)")
    p.add_argument("--outlier-frac", dest="outlier_frac", type=float, default=None,
                   help="fraction of pixels replaced by outliers (default: 0.0)")
    p.add_argument("--outlier-mag", dest="outlier_mag", type=float, default=None,
                   help="outlier amplitude as a multiple of the scene maximum "
                        "(default: 1.5)")
    p.add_argument("--seed", type=int, default=None, help="noise seed (default: 0)")
    p.add_argument("--out", required=True, help="output directory")
    _add_config_flag(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("unmix", help="factor an observation cube or matrix")
    p.add_argument("--input", required=True, help="cube (.hdr/.raw) or matrix CSV")
    p.add_argument("--algo", required=True, choices=solvers.ALGORITHMS,
                   help="factorization algorithm")
    p.add_argument("-P", dest="endmembers", type=int, required=True,
                   help="number of endmembers")
    p.add_argument("--max-iter", dest="max_iter", type=int, default=None,
                   help="iteration cap (default: 500)")
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=None,
                   help="relative cost-change stopping threshold (default: 1e-06)")
    p.add_argument("--seed", type=int, default=None,
                   help="initialization seed (default: 0)")
    p.add_argument("--init", choices=solvers.INIT_STRATEGIES, default=None,
                   help="initialization strategy (default: random)")
    p.add_argument("--asc", choices=solvers.ASC_MODES, default=None,
                   help="abundance sum-to-one handling (default: none)")
    p.add_argument("--asc-delta", dest="asc_delta", type=float, default=None,
                   help="augmentation weight when --asc augment (default: 10.0)")
    p.add_argument("--out", required=True, help="output directory")
    _add_config_flag(p)
    p.set_defaults(func=cmd_unmix)

    p = sub.add_parser("evaluate", help="score an estimate against ground truth")
    p.add_argument("--est", required=True, help="directory with A_est.csv/E_est.csv")
    p.add_argument("--truth", required=True, help="directory with A_true.csv/E_true.csv")
    p.add_argument("--out", required=True, help="report JSON path")
    _add_config_flag(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="run both algorithms over several seeds")
    p.add_argument("--input", required=True, help="cube (.hdr/.raw) or matrix CSV")
    p.add_argument("--truth", required=True, help="directory with A_true.csv/E_true.csv")
    p.add_argument("-P", dest="endmembers", type=int, required=True,
                   help="number of endmembers")
    p.add_argument("--seeds", required=True, help="comma-separated seed list")
    p.add_argument("--max-iter", dest="max_iter", type=int, default=None,
                   help="iteration cap per run (default: 500)")
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=None,
                   help="relative cost-change stopping threshold (default: 1e-06)")
    p.add_argument("--init", choices=solvers.INIT_STRATEGIES, default=None,
                   help="initialization strategy (default: random)")
    p.add_argument("--asc", choices=solvers.ASC_MODES, default=None,
                   help="abundance sum-to-one handling (default: none)")
    p.add_argument("--asc-delta", dest="asc_delta", type=float, default=None,
                   help="augmentation weight when --asc augment (default: 10.0)")
    p.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
    p.add_argument("--out", required=True, help="table JSON path")
    _add_config_flag(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("plot", help="render a cost trace SVG or abundance map PGMs")
    p.add_argument("--trace", default=None, help="trace.csv from unmix")
    p.add_argument("--abundance", default=None, help="abundance matrix CSV")
    p.add_argument("--rows", type=int, default=None, help="scene rows for abundance maps")
    p.add_argument("--cols", type=int, default=None, help="scene cols for abundance maps")
    p.add_argument("--out", required=True, help="SVG path or PGM output directory")
    _add_config_flag(p)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UnmixIOError, OSError) as exc:
        print(f"hsunmix {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except UnmixError as exc:
        print(f"hsunmix {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
