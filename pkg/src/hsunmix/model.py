"""Linear mixture model domain types and cube/matrix reshaping.

The model is X = A E + N: an M x L observation matrix X of mixed-pixel
spectra, an M x P abundance matrix A (nonnegative, optionally sum-to-one
per pixel), and a P x L endmember matrix E of pure-material signatures.
Scenes are rows x cols x bands cubes that flatten to X in row-major pixel
order (pixel (r, c) -> row r*cols + c).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidValue


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _check_nonneg_finite(a: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(a)):
        raise InvalidValue(f"{what} contains non-finite entries")
    if a.size and a.min() < 0.0:
        raise InvalidValue(f"{what} contains negative entries")


def as_array(x) -> np.ndarray:
    """Accept a domain wrapper or a plain array-like; return the ndarray."""
    return np.asarray(getattr(x, "data", x), dtype=np.float64)


@dataclass(frozen=True)
class HyperspectralCube:
    """rows x cols x bands reflectance raster with a nanometer wavelength axis.

    values is nonnegative and finite; wavelengths is strictly increasing
    with one entry per band.  Immutable after construction.
    """

    values: np.ndarray
    wavelengths: np.ndarray

    def __post_init__(self):
        values = _freeze(self.values)
        wavelengths = _freeze(self.wavelengths)
        if values.ndim != 3:
            raise DimensionMismatch(f"cube values must be 3-D, got {values.ndim}-D")
        if wavelengths.ndim != 1 or wavelengths.shape[0] != values.shape[2]:
            raise DimensionMismatch(
                f"wavelength axis has {wavelengths.size} entries for {values.shape[2]} bands"
            )
        _check_nonneg_finite(values, "cube values")
        if not np.all(np.isfinite(wavelengths)):
            raise InvalidValue("wavelengths contain non-finite entries")
        if wavelengths.size > 1 and np.any(np.diff(wavelengths) <= 0.0):
            raise InvalidValue("wavelengths must be strictly increasing")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "wavelengths", wavelengths)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def bands(self) -> int:
        return self.values.shape[2]


@dataclass(frozen=True)
class ObservationMatrix:
    """M x L matrix of observed mixed-pixel spectra, one pixel per row."""

    data: np.ndarray

    def __post_init__(self):
        data = _freeze(self.data)
        if data.ndim != 2:
            raise DimensionMismatch(f"observation matrix must be 2-D, got {data.ndim}-D")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise DimensionMismatch("observation matrix needs at least one pixel and one band")
        _check_nonneg_finite(data, "observation matrix")
        object.__setattr__(self, "data", data)

    @property
    def n_pixels(self) -> int:
        return self.data.shape[0]

    @property
    def n_bands(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class EndmemberMatrix:
    """P x L matrix of pure-material signatures, one endmember per row.

    All-zero rows are rejected: a zero signature has no spectral angle.
    """

    data: np.ndarray
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        data = _freeze(self.data)
        if data.ndim != 2:
            raise DimensionMismatch(f"endmember matrix must be 2-D, got {data.ndim}-D")
        _check_nonneg_finite(data, "endmember matrix")
        if np.any(data.sum(axis=1) == 0.0):
            raise InvalidValue("endmember matrix has an all-zero signature row")
        names = self.names
        if names is not None:
            names = tuple(str(n) for n in names)
            if len(names) != data.shape[0]:
                raise DimensionMismatch(
                    f"{len(names)} names for {data.shape[0]} endmembers"
                )
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "names", names)

    @property
    def n_endmembers(self) -> int:
        return self.data.shape[0]

    @property
    def n_bands(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class AbundanceMatrix:
    """M x P matrix of per-pixel abundance fractions (nonnegative).

    Sum-to-one is a property of the producing solver configuration, not of
    the type; see SolverConfig.asc.
    """

    data: np.ndarray

    def __post_init__(self):
        data = _freeze(self.data)
        if data.ndim != 2:
            raise DimensionMismatch(f"abundance matrix must be 2-D, got {data.ndim}-D")
        _check_nonneg_finite(data, "abundance matrix")
        object.__setattr__(self, "data", data)

    @property
    def n_pixels(self) -> int:
        return self.data.shape[0]

    @property
    def n_endmembers(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class ModelDims:
    """Problem dimensions: M pixels, L bands, P endmembers."""

    n_pixels: int
    n_bands: int
    n_endmembers: int

    def __post_init__(self):
        if self.n_pixels < 1 or self.n_bands < 1:
            raise DimensionMismatch("need at least one pixel and one band")
        if not 1 <= self.n_endmembers <= min(self.n_pixels, self.n_bands):
            raise DimensionMismatch(
                f"endmember count {self.n_endmembers} outside "
                f"[1, min({self.n_pixels}, {self.n_bands})]"
            )


def flatten_cube(cube: HyperspectralCube) -> ObservationMatrix:
    """Linearize a cube to an M x L observation matrix, M = rows*cols.

    Row m = r*cols + c holds the spectrum of pixel (r, c); exact inverse of
    unflatten.
    """
    rows, cols, bands = cube.values.shape
    return ObservationMatrix(cube.values.reshape(rows * cols, bands))


def unflatten(x, rows: int, cols: int, wavelengths) -> HyperspectralCube:
    """Reshape an observation matrix back into a rows x cols cube."""
    data = as_array(x)
    wavelengths = np.asarray(wavelengths, dtype=np.float64)
    if data.ndim != 2:
        raise DimensionMismatch("expected a 2-D observation matrix")
    if data.shape[0] != rows * cols:
        raise DimensionMismatch(
            f"{data.shape[0]} pixels cannot fill a {rows}x{cols} raster"
        )
    if wavelengths.size != data.shape[1]:
        raise DimensionMismatch(
            f"{wavelengths.size} wavelengths for {data.shape[1]} bands"
        )
    return HyperspectralCube(data.reshape(rows, cols, data.shape[1]), wavelengths)


def reconstruct(abundances, endmembers) -> ObservationMatrix:
    """Forward mixing model without noise: X = A E."""
    a = as_array(abundances)
    e = as_array(endmembers)
    if a.ndim != 2 or e.ndim != 2:
        raise DimensionMismatch("reconstruct expects 2-D factors")
    if a.shape[1] != e.shape[0]:
        raise DimensionMismatch(
            f"abundances have {a.shape[1]} endmembers, signatures have {e.shape[0]}"
        )
    return ObservationMatrix(a @ e)
