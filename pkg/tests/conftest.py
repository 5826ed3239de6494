import numpy as np
import pytest

from hsunmix import GroundTruthMap, SceneSpec, io, simulate


@pytest.fixture(scope="session")
def library():
    return io.read_library(io.bundled_library_path())


def strip_map(widths, rows=12):
    """Vertical strips of the given widths, labeled 1..len(widths)."""
    cols = sum(widths)
    labels = np.zeros((rows, cols), dtype=np.int64)
    start = 0
    for k, width in enumerate(widths, start=1):
        labels[:, start:start + width] = k
        start += width
    return labels


def cycling_strip_map(width, n_classes, rows, cols):
    """Vertical strips of one width cycling through 1..n_classes."""
    labels = np.zeros((rows, cols), dtype=np.int64)
    for c in range(cols):
        labels[:, c] = (c // width) % n_classes + 1
    return labels


def recovery_scene(library):
    """Noiseless 12x12 three-class scene used by the exact-recovery checks."""
    gt = GroundTruthMap(strip_map([5, 4, 3]))
    spec = SceneSpec(
        gt=gt,
        class_to_signature={1: "conifer", 2: "hematite", 3: "snow"},
        downsample_factor=2,
        seed=0,
    )
    return simulate.generate(spec, library)


def ordering_scene_spec():
    """30x30 scene with noise and outliers for the NMF-vs-RNMF comparison."""
    gt = GroundTruthMap(cycling_strip_map(5, 3, 30, 30))
    return SceneSpec(
        gt=gt,
        class_to_signature={1: "vegetation", 2: "dry_soil", 3: "water"},
        downsample_factor=2,
        snr_db=30.0,
        outlier_fraction=0.02,
        outlier_magnitude=1.5,
        seed=0,
    )
