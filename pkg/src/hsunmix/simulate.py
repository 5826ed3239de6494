"""Synthetic mixed-pixel scene generation with exact ground truth.

A labeled class map is turned into a pure-pixel cube by substituting each
pixel's spectrum with its class signature; the cube is then spatially
filtered and downsampled by a factor d so every low-resolution pixel
becomes a mixture of the classes inside its d x d source block; finally
Gaussian measurement noise and (optionally) whole-pixel outliers are
injected.  With the block-mean filter and no noise the flattened result
satisfies X = A_true E_true exactly, because the block mean of pure
signatures is the abundance-weighted signature mean.

Ground-truth abundances count labeled source pixels per block, so label 0
(background) is excluded from the denominator; blocks that are entirely
background are rejected, and scenes that mix background into a block
trade away the exact X = A_true E_true identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyBlock,
    IndivisibleDims,
    InvalidValue,
    UnknownSignature,
    UnmappedLabel,
)
from .model import (
    AbundanceMatrix,
    EndmemberMatrix,
    HyperspectralCube,
    ModelDims,
    ObservationMatrix,
    flatten_cube,
)

FILTERS = ("blockmean", "gaussian")


@dataclass(frozen=True)
class GroundTruthMap:
    """rows x cols integer class labels; 0 means unlabeled background."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.array(self.labels)
        if labels.ndim != 2:
            raise DimensionMismatch(f"label map must be 2-D, got {labels.ndim}-D")
        if not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == np.floor(labels)):
                raise InvalidValue("labels must be integers")
            labels = labels.astype(np.int64)
        else:
            labels = labels.astype(np.int64)
        if labels.size and labels.min() < 0:
            raise InvalidValue("labels must be nonnegative")
        if not np.any(labels > 0):
            raise InvalidValue("label map needs at least one labeled pixel")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def rows(self) -> int:
        return self.labels.shape[0]

    @property
    def cols(self) -> int:
        return self.labels.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max())


@dataclass(frozen=True)
class SpectralLibrary:
    """Named reference signatures on a common wavelength grid."""

    wavelengths: np.ndarray
    signatures: dict[str, np.ndarray]

    def __post_init__(self):
        wavelengths = np.array(self.wavelengths, dtype=np.float64)
        if wavelengths.ndim != 1 or wavelengths.size < 1:
            raise DimensionMismatch("wavelengths must be a non-empty 1-D axis")
        if not np.all(np.isfinite(wavelengths)):
            raise InvalidValue("wavelengths contain non-finite entries")
        if wavelengths.size > 1 and np.any(np.diff(wavelengths) <= 0.0):
            raise InvalidValue("wavelengths must be strictly increasing")
        signatures = {}
        for name, values in self.signatures.items():
            values = np.array(values, dtype=np.float64)
            if values.shape != wavelengths.shape:
                raise DimensionMismatch(
                    f"signature {name!r} has {values.size} samples for "
                    f"{wavelengths.size} wavelengths"
                )
            if not np.all(np.isfinite(values)):
                raise InvalidValue(f"signature {name!r} has non-finite samples")
            if values.min() < 0.0 or values.max() > 1.5:
                raise InvalidValue(
                    f"signature {name!r} outside the [0, 1.5] reflectance range"
                )
            values.setflags(write=False)
            signatures[str(name)] = values
        wavelengths.setflags(write=False)
        object.__setattr__(self, "wavelengths", wavelengths)
        object.__setattr__(self, "signatures", signatures)

    @property
    def n_bands(self) -> int:
        return self.wavelengths.size

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.signatures)


@dataclass(frozen=True)
class SceneSpec:
    """Full recipe for one simulated dataset."""

    gt: GroundTruthMap
    class_to_signature: dict[int, str]
    downsample_factor: int = 1
    filter: str = "blockmean"
    filter_sigma: float = 1.0
    snr_db: float | None = None
    outlier_fraction: float = 0.0
    outlier_magnitude: float = 1.5
    seed: int = 0

    def __post_init__(self):
        d = self.downsample_factor
        if d < 1:
            raise InvalidValue("downsample factor must be a positive integer")
        if self.gt.rows % d or self.gt.cols % d:
            raise IndivisibleDims(
                f"{self.gt.rows}x{self.gt.cols} map not divisible by {d}"
            )
        if self.filter not in FILTERS:
            raise InvalidValue(f"filter must be one of {FILTERS}")
        if self.filter == "gaussian" and self.filter_sigma <= 0.0:
            raise InvalidValue("gaussian filter needs a positive sigma")
        if not 0.0 <= self.outlier_fraction < 1.0:
            raise InvalidValue("outlier fraction must lie in [0, 1)")
        if self.outlier_magnitude <= 0.0:
            raise InvalidValue("outlier magnitude must be positive")
        mapping = {int(k): str(v) for k, v in self.class_to_signature.items()}
        for label in range(1, self.gt.n_classes + 1):
            if label not in mapping:
                raise UnmappedLabel(f"label {label} has no signature assigned")
        object.__setattr__(self, "class_to_signature", mapping)


@dataclass(frozen=True)
class SimulatedDataset:
    """Mixed-pixel observations with their exact ground truth."""

    x: ObservationMatrix
    a_true: AbundanceMatrix
    e_true: EndmemberMatrix
    dims: ModelDims
    provenance: SceneSpec


def substitute_spectra(gt: GroundTruthMap, library: SpectralLibrary,
                       class_to_signature: dict[int, str]) -> HyperspectralCube:
    """Replace every labeled pixel with its class signature.

    Background (label 0) pixels carry the zero spectrum.
    """
    n_bands = library.n_bands
    lut = np.zeros((gt.n_classes + 1, n_bands))
    present = np.unique(gt.labels)
    for label in present:
        if label == 0:
            continue
        name = class_to_signature.get(int(label))
        if name is None:
            raise UnmappedLabel(f"label {int(label)} has no signature assigned")
        if name not in library.signatures:
            raise UnknownSignature(f"signature {name!r} not in library")
        lut[label] = library.signatures[name]
    return HyperspectralCube(lut[gt.labels], library.wavelengths)


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = math.ceil(3.0 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (offsets / sigma) ** 2)
    return kernel / kernel.sum()


def _convolve_axis(values: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    """Separable correlation with edge-inclusive reflective padding."""
    radius = kernel.size // 2
    pad = [(0, 0)] * values.ndim
    pad[axis] = (radius, radius)
    padded = np.pad(values, pad, mode="symmetric")
    out = np.zeros_like(values)
    index = [slice(None)] * values.ndim
    for k, weight in enumerate(kernel):
        index[axis] = slice(k, k + values.shape[axis])
        out += weight * padded[tuple(index)]
    return out


def spatial_degrade(cube: HyperspectralCube, filter: str, d: int,
                    sigma: float = 1.0) -> HyperspectralCube:
    """Filter and downsample to (rows/d) x (cols/d) mixed pixels.

    "blockmean" averages each d x d block per band.  "gaussian" first
    convolves each band with a normalized truncated kernel (radius
    ceil(3*sigma), reflective boundary), then takes block means.
    """
    rows, cols, _ = cube.values.shape
    if d < 1 or rows % d or cols % d:
        raise IndivisibleDims(f"{rows}x{cols} raster not divisible by {d}")
    if filter not in FILTERS:
        raise InvalidValue(f"filter must be one of {FILTERS}")
    values = cube.values
    if filter == "gaussian":
        if sigma <= 0.0:
            raise InvalidValue("gaussian filter needs a positive sigma")
        kernel = _gaussian_kernel(sigma)
        values = _convolve_axis(values, kernel, axis=0)
        values = _convolve_axis(values, kernel, axis=1)
    blocks = values.reshape(rows // d, d, cols // d, d, cube.bands)
    return HyperspectralCube(blocks.mean(axis=(1, 3)), cube.wavelengths)


def true_abundances(gt: GroundTruthMap, d: int, n_classes: int) -> AbundanceMatrix:
    """Per-block class fractions under block-mean downsampling.

    Entry (m, k) is the share of labeled pixels in low-resolution pixel
    m's d x d block that carry label k+1; background pixels do not count
    toward the denominator.
    """
    rows, cols = gt.rows, gt.cols
    if d < 1 or rows % d or cols % d:
        raise IndivisibleDims(f"{rows}x{cols} map not divisible by {d}")
    if n_classes < int(gt.labels.max()):
        raise InvalidValue(
            f"map contains label {int(gt.labels.max())} > class count {n_classes}"
        )
    out_rows, out_cols = rows // d, cols // d
    fractions = np.zeros((out_rows * out_cols, n_classes))
    blocks = gt.labels.reshape(out_rows, d, out_cols, d).transpose(0, 2, 1, 3)
    for br in range(out_rows):
        for bc in range(out_cols):
            counts = np.bincount(blocks[br, bc].ravel(), minlength=n_classes + 1)
            labeled = counts[1:].sum()
            if labeled == 0:
                raise EmptyBlock(f"block ({br}, {bc}) contains only background")
            fractions[br * out_cols + bc] = counts[1:] / labeled
    return AbundanceMatrix(fractions)


def add_noise(cube: HyperspectralCube, snr_db: float | None,
              outlier_fraction: float, outlier_magnitude: float,
              seed: int) -> HyperspectralCube:
    """Inject Gaussian noise at the given SNR, then replace a random pixel
    subset's spectra with uniform outliers, clamping the result at zero.

    The noise draw is independent of the outlier settings, so runs that
    differ only in outlier_fraction share the same noise realization.
    With snr_db=None and outlier_fraction=0 the input is returned as is.
    """
    if snr_db is None and outlier_fraction == 0.0:
        return cube
    rng = np.random.default_rng(seed)
    values = np.array(cube.values)
    if snr_db is not None:
        signal_power = float(np.mean(np.square(values)))
        sigma = math.sqrt(signal_power / 10.0 ** (snr_db / 10.0))
        values += rng.normal(0.0, sigma, size=values.shape)
    if outlier_fraction > 0.0:
        rows, cols, n_bands = values.shape
        n_pixels = rows * cols
        n_outliers = int(outlier_fraction * n_pixels)
        if n_outliers > 0:
            picks = rng.choice(n_pixels, size=n_outliers, replace=False)
            spectra = rng.uniform(
                0.0, outlier_magnitude * float(cube.values.max()),
                size=(n_outliers, n_bands),
            )
            flat = values.reshape(n_pixels, n_bands)
            flat[picks] = spectra
    return HyperspectralCube(np.maximum(values, 0.0), cube.wavelengths)


def generate(spec: SceneSpec, library: SpectralLibrary) -> SimulatedDataset:
    """Run the whole pipeline: substitute, degrade, add noise, flatten."""
    pure = substitute_spectra(spec.gt, library, spec.class_to_signature)
    low = spatial_degrade(pure, spec.filter, spec.downsample_factor, spec.filter_sigma)
    noisy = add_noise(low, spec.snr_db, spec.outlier_fraction,
                      spec.outlier_magnitude, spec.seed)
    x = flatten_cube(noisy)
    n_classes = spec.gt.n_classes
    a_true = true_abundances(spec.gt, spec.downsample_factor, n_classes)
    names = [spec.class_to_signature[k] for k in range(1, n_classes + 1)]
    for name in names:
        if name not in library.signatures:
            raise UnknownSignature(f"signature {name!r} not in library")
    e_true = EndmemberMatrix(
        np.stack([library.signatures[n] for n in names]), names=tuple(names)
    )
    dims = ModelDims(x.n_pixels, x.n_bands, n_classes)
    return SimulatedDataset(x=x, a_true=a_true, e_true=e_true, dims=dims,
                            provenance=replace(spec))
