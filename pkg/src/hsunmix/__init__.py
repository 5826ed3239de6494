"""Spectral unmixing toolkit: baseline and robust NMF, synthetic mixed-pixel
scene generation, and SAD/AAD evaluation."""

from .costs import euclidean_cost, hypersurface, robust_cost, robust_grad_h, robust_grad_w
from .errors import UnmixError
from .metrics import MetricReport, aad, evaluate, match_endmembers, rms_aad, rms_sad, sad
from .model import (
    AbundanceMatrix,
    EndmemberMatrix,
    HyperspectralCube,
    ModelDims,
    ObservationMatrix,
    flatten_cube,
    reconstruct,
    unflatten,
)
from .simulate import (
    GroundTruthMap,
    SceneSpec,
    SimulatedDataset,
    SpectralLibrary,
    add_noise,
    generate,
    spatial_degrade,
    substitute_spectra,
    true_abundances,
)
from .solvers import (
    ArmijoParams,
    ArmijoRecord,
    FactorizationResult,
    SolverConfig,
    apply_asc,
    armijo_step_size,
    augment_for_asc,
    init_factors,
    multiplicative_step,
    robust_step,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "AbundanceMatrix",
    "ArmijoParams",
    "ArmijoRecord",
    "EndmemberMatrix",
    "FactorizationResult",
    "GroundTruthMap",
    "HyperspectralCube",
    "MetricReport",
    "ModelDims",
    "ObservationMatrix",
    "SceneSpec",
    "SimulatedDataset",
    "SolverConfig",
    "SpectralLibrary",
    "UnmixError",
    "aad",
    "add_noise",
    "apply_asc",
    "armijo_step_size",
    "augment_for_asc",
    "euclidean_cost",
    "evaluate",
    "flatten_cube",
    "generate",
    "hypersurface",
    "init_factors",
    "match_endmembers",
    "multiplicative_step",
    "reconstruct",
    "rms_aad",
    "rms_sad",
    "robust_cost",
    "robust_grad_h",
    "robust_grad_w",
    "robust_step",
    "sad",
    "solve",
    "spatial_degrade",
    "substitute_spectra",
    "true_abundances",
    "unflatten",
]
