"""File formats: spectral library CSV, hdr/raw reflectance cubes,
ground-truth CSV, plain matrix CSV, and metric report JSON.

Cubes use a two-file layout: <name>.hdr is a UTF-8 "key: value" text
header and <name>.raw holds band-sequential little-endian float32
samples (all of band 0, then band 1, ..., each band row-major).  Disk
samples are 32-bit; everything in memory is 64-bit.

Readers raise only toolkit error types on malformed content, whatever
the bytes are.
"""

from __future__ import annotations

import importlib.resources
import json
import math
from pathlib import Path

import numpy as np

from .errors import (
    HeaderMismatch,
    NegativeLabel,
    NegativeReflectance,
    NonMonotoneWavelengths,
    ParseError,
)
from .metrics import MetricReport
from .model import HyperspectralCube
from .simulate import GroundTruthMap, SpectralLibrary

_FLOAT_FMT = "%.17g"
_HDR_CONSTANTS = {
    "sample_format": "float32",
    "byte_order": "little_endian",
    "interleave": "bsq",
}


def _read_text(path) -> str:
    raw = Path(path).read_bytes()
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8") from exc


def _float(cell: str, path, what: str) -> float:
    try:
        return float(cell)
    except ValueError as exc:
        raise ParseError(f"{path}: non-numeric {what} {cell!r}") from exc


def _int(cell: str, path, what: str) -> int:
    try:
        return int(cell)
    except ValueError as exc:
        raise ParseError(f"{path}: non-integer {what} {cell!r}") from exc


def _rows(text: str, path) -> list[list[str]]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError(f"{path}: empty file")
    return [line.split(",") for line in lines]


# ---------------------------------------------------------------- library

def bundled_library_path() -> Path:
    """Path of the small reference library that ships with the package."""
    return Path(importlib.resources.files("hsunmix") / "data" / "mini_library.csv")


def read_library(path) -> SpectralLibrary:
    """Parse a `wavelength_nm,<name>,...` CSV into a spectral library.

    Wavelengths must be strictly increasing; reflectance below -0.01 is
    rejected and small negatives in [-0.01, 0) are clamped to zero.
    """
    rows = _rows(_read_text(path), path)
    header = rows[0]
    if header[0] != "wavelength_nm" or len(header) < 2:
        raise ParseError(f"{path}: header must be 'wavelength_nm,<name>,...'")
    names = header[1:]
    if len(set(names)) != len(names):
        raise ParseError(f"{path}: duplicate signature names")
    if len(rows) < 2:
        raise ParseError(f"{path}: no wavelength rows")
    wavelengths = []
    columns = [[] for _ in names]
    for row in rows[1:]:
        if len(row) != len(header):
            raise ParseError(f"{path}: row has {len(row)} fields, expected {len(header)}")
        wl = _float(row[0], path, "wavelength")
        if not math.isfinite(wl):
            raise ParseError(f"{path}: non-finite wavelength {row[0]!r}")
        if wavelengths and wl <= wavelengths[-1]:
            raise NonMonotoneWavelengths(
                f"{path}: wavelength {wl} after {wavelengths[-1]}"
            )
        wavelengths.append(wl)
        for column, cell in zip(columns, row[1:]):
            value = _float(cell, path, "reflectance")
            if not math.isfinite(value):
                raise ParseError(f"{path}: non-finite reflectance {cell!r}")
            if value < -0.01:
                raise NegativeReflectance(f"{path}: reflectance {cell} below -0.01")
            column.append(max(value, 0.0))
    return SpectralLibrary(
        wavelengths=np.array(wavelengths),
        signatures={n: np.array(c) for n, c in zip(names, columns)},
    )


def write_library(library: SpectralLibrary, path) -> None:
    lines = ["wavelength_nm," + ",".join(library.names)]
    table = np.column_stack([library.wavelengths]
                            + [library.signatures[n] for n in library.names])
    for row in table:
        lines.append(",".join(_FLOAT_FMT % v for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ------------------------------------------------------------------- cube

def _cube_base(path) -> Path:
    path = Path(path)
    if path.suffix in (".hdr", ".raw"):
        return path.with_suffix("")
    return path


def read_cube(path) -> HyperspectralCube:
    """Read a <base>.hdr/<base>.raw pair (path may carry either suffix)."""
    base = _cube_base(path)
    header: dict[str, str] = {}
    for line in _read_text(base.with_suffix(".hdr")).splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ParseError(f"{base}.hdr: missing ':' in line {line!r}")
        header[key.strip()] = value.strip()
    expected = {"rows", "cols", "bands", "wavelengths", *_HDR_CONSTANTS}
    if set(header) != expected:
        raise ParseError(
            f"{base}.hdr: keys {sorted(header)} != expected {sorted(expected)}"
        )
    for key, required in _HDR_CONSTANTS.items():
        if header[key] != required:
            raise ParseError(f"{base}.hdr: {key} must be {required!r}")
    rows = _int(header["rows"], base, "rows")
    cols = _int(header["cols"], base, "cols")
    bands = _int(header["bands"], base, "bands")
    if min(rows, cols, bands) < 1:
        raise ParseError(f"{base}.hdr: dimensions must be positive")
    wavelengths = [
        _float(w, base, "wavelength") for w in header["wavelengths"].split(",")
    ]
    payload = base.with_suffix(".raw").read_bytes()
    if len(payload) != rows * cols * bands * 4:
        raise HeaderMismatch(
            f"{base}.raw: {len(payload)} bytes for {rows}x{cols}x{bands} float32"
        )
    samples = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    values = samples.reshape(bands, rows, cols).transpose(1, 2, 0)
    return HyperspectralCube(values, np.array(wavelengths))


def write_cube(cube: HyperspectralCube, path) -> None:
    base = _cube_base(path)
    lines = [
        f"rows: {cube.rows}",
        f"cols: {cube.cols}",
        f"bands: {cube.bands}",
        "wavelengths: " + ",".join(_FLOAT_FMT % w for w in cube.wavelengths),
    ] + [f"{k}: {v}" for k, v in _HDR_CONSTANTS.items()]
    base.with_suffix(".hdr").write_text("\n".join(lines) + "\n", encoding="utf-8")
    payload = cube.values.transpose(2, 0, 1).astype("<f4").tobytes()
    base.with_suffix(".raw").write_bytes(payload)


# ------------------------------------------------------------ groundtruth

def read_groundtruth(path) -> GroundTruthMap:
    rows = _rows(_read_text(path), path)
    width = len(rows[0])
    labels = []
    for row in rows:
        if len(row) != width:
            raise ParseError(f"{path}: ragged row (got {len(row)}, expected {width})")
        parsed = [_int(cell, path, "label") for cell in row]
        if min(parsed) < 0:
            raise NegativeLabel(f"{path}: negative label {min(parsed)}")
        labels.append(parsed)
    return GroundTruthMap(np.array(labels, dtype=np.int64))


def write_groundtruth(gt: GroundTruthMap, path) -> None:
    lines = [",".join(str(int(v)) for v in row) for row in gt.labels]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ----------------------------------------------------------------- matrix

def read_matrix_csv(path) -> np.ndarray:
    rows = _rows(_read_text(path), path)
    width = len(rows[0])
    values = []
    for row in rows:
        if len(row) != width:
            raise ParseError(f"{path}: ragged row (got {len(row)}, expected {width})")
        values.append([_float(cell, path, "matrix entry") for cell in row])
    return np.array(values, dtype=np.float64)


def write_matrix_csv(matrix, path) -> None:
    matrix = np.asarray(getattr(matrix, "data", matrix), dtype=np.float64)
    if matrix.ndim != 2:
        raise ParseError("matrix CSV writer expects a 2-D matrix")
    lines = [",".join(_FLOAT_FMT % v for v in row) for row in matrix]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ----------------------------------------------------------------- report

def write_report(report: MetricReport, metadata: dict, path) -> None:
    """Serialize a metric report (degrees) plus run metadata as JSON.

    metadata supplies algorithm / iterations / termination / seed /
    config; missing entries are emitted as null.
    """
    document = {
        "algorithm": metadata.get("algorithm"),
        "rms_sad_deg": math.degrees(report.rms_sad),
        "rms_aad_deg": math.degrees(report.rms_aad),
        "per_endmember_sad_deg": [math.degrees(a) for a in report.per_endmember_sad],
        "matching": list(report.matching),
        "iterations": metadata.get("iterations"),
        "termination": metadata.get("termination"),
        "seed": metadata.get("seed"),
        "config": metadata.get("config"),
    }
    Path(path).write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")


def read_report(path) -> dict:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON") from exc
