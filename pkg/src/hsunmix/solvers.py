"""Factor initialization and the two unmixing optimizers.

"nmf" minimizes the squared-residual cost with the classic multiplicative
updates (H first, then W).  "rnmf" minimizes the hypersurface cost with
additive updates along the scaled residual gradients, taking one shared
backtracking (Armijo) step per factor block per iteration and projecting
candidates onto the nonnegative orthant before they are evaluated, so the
cost trace is non-increasing and factors never go negative.

Sum-to-one handling is configurable: "rownorm" renormalizes each abundance
row after every iteration, "augment" appends a constant column of
asc_delta to the data and to the endmember factor, which pushes abundance
row sums toward one through the fit itself.  Row normalization rescales
each pixel independently, so with asc="rownorm" the recorded cost trace
is not guaranteed monotone; the other modes are.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .costs import euclidean_cost, robust_cost, robust_grad_h, robust_grad_w
from .errors import (
    DegenerateData,
    DimensionMismatch,
    InvalidRank,
    InvalidValue,
    NotDescentDirection,
    ZeroRow,
)
from .model import AbundanceMatrix, EndmemberMatrix, ObservationMatrix, as_array

_FACTOR_FLOOR = 1e-12

ALGORITHMS = ("nmf", "rnmf")
INIT_STRATEGIES = ("random", "data")
ASC_MODES = ("none", "rownorm", "augment")
TERMINATIONS = ("converged", "max_iter", "stalled_line_search")


@dataclass(frozen=True)
class ArmijoParams:
    """Backtracking line-search constants (textbook defaults)."""

    initial_step: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    max_backtracks: int = 30

    def __post_init__(self):
        if self.initial_step <= 0.0:
            raise InvalidValue("initial_step must be positive")
        if not 0.0 < self.shrink < 1.0:
            raise InvalidValue("shrink must lie in (0, 1)")
        if not 0.0 < self.sufficient_decrease < 1.0:
            raise InvalidValue("sufficient_decrease must lie in (0, 1)")
        if self.max_backtracks < 1:
            raise InvalidValue("max_backtracks must be positive")


@dataclass(frozen=True)
class SolverConfig:
    """Everything a solve run depends on; identical configs give identical results."""

    algorithm: str
    n_endmembers: int
    max_iter: int = 500
    rel_tol: float = 1e-6
    seed: int = 0
    init: str = "random"
    asc: str = "none"
    asc_delta: float = 10.0
    armijo: ArmijoParams = field(default_factory=ArmijoParams)
    epsilon: float = 1e-12

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidValue(f"algorithm must be one of {ALGORITHMS}")
        if self.n_endmembers < 1:
            raise InvalidRank("endmember count must be at least 1")
        if self.max_iter < 1:
            raise InvalidValue("max_iter must be at least 1")
        if self.rel_tol <= 0.0:
            raise InvalidValue("rel_tol must be positive")
        if self.init not in INIT_STRATEGIES:
            raise InvalidValue(f"init must be one of {INIT_STRATEGIES}")
        if self.asc not in ASC_MODES:
            raise InvalidValue(f"asc must be one of {ASC_MODES}")
        if self.asc == "augment" and self.asc_delta <= 0.0:
            raise InvalidValue("asc_delta must be positive")
        if self.epsilon <= 0.0:
            raise InvalidValue("epsilon must be positive")


@dataclass(frozen=True)
class ArmijoRecord:
    """One line-search attempt, logged for post-hoc auditing."""

    iteration: int
    factor: str
    slope: float
    step: float
    accepted: bool
    cost_before: float
    cost_after: float


@dataclass(frozen=True)
class FactorizationResult:
    """Converged factors plus the per-iteration objective trace."""

    abundances: AbundanceMatrix
    endmembers: EndmemberMatrix
    cost_trace: tuple[float, ...]
    iterations: int
    termination: str
    armijo_log: tuple[ArmijoRecord, ...] = ()


def init_factors(v, n_endmembers: int, strategy: str, seed: int):
    """Seeded strictly-positive starting factors W (M x P) and H (P x L).

    "random" draws both factors i.i.d. uniform on (0, 1] and rescales them
    so mean(WH) equals mean(V).  "data" sets the rows of H to distinct
    rows of V (plus a tiny offset so no entry is zero) and rescales a
    uniform W the same way.
    """
    x = as_array(v)
    if x.ndim != 2:
        raise DimensionMismatch("expected a 2-D observation matrix")
    m, n_bands = x.shape
    if not 1 <= n_endmembers <= min(m, n_bands):
        raise InvalidRank(
            f"endmember count {n_endmembers} outside [1, min({m}, {n_bands})]"
        )
    if strategy not in INIT_STRATEGIES:
        raise InvalidValue(f"init strategy must be one of {INIT_STRATEGIES}")
    v_mean = float(x.mean())
    if v_mean <= 0.0:
        raise DegenerateData("observation matrix is all zeros")

    rng = np.random.default_rng(seed)
    w = 1.0 - rng.random((m, n_endmembers))
    if strategy == "random":
        h = 1.0 - rng.random((n_endmembers, n_bands))
        scale = v_mean / float((w @ h).mean())
        return w * np.sqrt(scale), h * np.sqrt(scale)
    picks = rng.choice(m, size=n_endmembers, replace=False)
    h = x[picks] + _FACTOR_FLOOR
    w = w * (v_mean / float((w @ h).mean()))
    return w, h


def multiplicative_step(v, w, h, epsilon: float = 1e-12, *, frozen_col: int | None = None):
    """One pair of multiplicative updates on the squared-residual cost.

    Updates H then W; denominators carry +epsilon and factors are floored
    at 1e-12 so entries stay strictly positive.  frozen_col pins one
    column of H (used by the sum-to-one augmentation).
    """
    v = as_array(v)
    w = as_array(w)
    h = as_array(h)
    if w.shape[0] != v.shape[0] or h.shape[1] != v.shape[1] or w.shape[1] != h.shape[0]:
        raise DimensionMismatch(
            f"factors {w.shape} x {h.shape} do not conform to data {v.shape}"
        )
    h_new = h * (w.T @ v) / (w.T @ w @ h + epsilon)
    h_new = np.maximum(h_new, _FACTOR_FLOOR)
    if frozen_col is not None:
        h_new[:, frozen_col] = h[:, frozen_col]
    w_new = w * (v @ h_new.T) / (w @ h_new @ h_new.T + epsilon)
    w_new = np.maximum(w_new, _FACTOR_FLOOR)
    return w_new, h_new


def _armijo_search(objective, slope: float, params: ArmijoParams):
    """Backtrack from initial_step; return (step, accepted, f0, f_step)."""
    if slope >= 0.0:
        raise NotDescentDirection(f"line search needs a negative slope, got {slope}")
    f0 = objective(0.0)
    step = params.initial_step
    for _ in range(params.max_backtracks + 1):
        f_step = objective(step)
        if f_step <= f0 + params.sufficient_decrease * step * slope:
            return step, True, f0, f_step
        step *= params.shrink
    return 0.0, False, f0, f0


def armijo_step_size(objective, slope: float, params: ArmijoParams | None = None):
    """Largest step initial_step * shrink^k meeting the sufficient-decrease test.

    objective maps a scalar step to a cost; slope is the directional
    derivative at step 0 and must be negative.  Returns (step, accepted);
    (0.0, False) when every candidate fails.
    """
    step, accepted, _, _ = _armijo_search(objective, slope, params or ArmijoParams())
    return step, accepted


def _normalize_rows_safe(w):
    """Rows scaled to unit sum; all-zero rows pass through unchanged.

    Projected robust steps can zero a pixel's whole abundance row for one
    iteration; its residual gradient revives it, so normalization must not
    choke mid-run.
    """
    sums = w.sum(axis=1)
    return np.divide(w, sums[:, None], out=np.array(w, dtype=np.float64),
                     where=sums[:, None] != 0.0)


def apply_asc(w, mode: str):
    """Sum-to-one post-processing of an abundance matrix.

    "rownorm" divides each row by its sum (ZeroRow on an all-zero row);
    "none" returns the input unchanged.
    """
    if mode == "none":
        return as_array(w)
    if mode == "rownorm":
        w = as_array(w)
        if np.any(w.sum(axis=1) == 0.0):
            raise ZeroRow("cannot normalize an all-zero abundance row")
        return w / w.sum(axis=1)[:, None]
    raise InvalidValue(f"apply_asc mode must be 'none' or 'rownorm', got {mode!r}")


def augment_for_asc(v, h, delta: float):
    """Append a constant column delta to V and to H.

    Fitting the extra column pulls each abundance row sum toward one,
    since row m must reproduce V'[m, -1] = delta as sum_k W[m, k] * delta.
    """
    if delta <= 0.0:
        raise InvalidValue("augmentation delta must be positive")
    v = as_array(v)
    h = as_array(h)
    v_aug = np.concatenate([v, np.full((v.shape[0], 1), float(delta))], axis=1)
    h_aug = np.concatenate([h, np.full((h.shape[0], 1), float(delta))], axis=1)
    return v_aug, h_aug


def _phase(v, w_or_h, grad, rebuild, cost0, params, log, iteration, factor):
    """One projected line-search update of a single factor block.

    grad is the scaled residual gradient for the block; rebuild(candidate)
    evaluates the robust cost with the candidate in place.  Returns the
    (possibly unchanged) block, the accepted flag, and the cost after the
    phase.
    """
    slope = -float(np.sum(grad * grad))
    if slope >= 0.0:
        if log is not None:
            log.append(ArmijoRecord(iteration, factor, 0.0, 0.0, False, cost0, cost0))
        return w_or_h, False, cost0

    def candidate(step):
        return np.maximum(w_or_h - step * grad, 0.0)

    step, accepted, f0, f_step = _armijo_search(
        lambda s: rebuild(candidate(s)), slope, params
    )
    if log is not None:
        log.append(ArmijoRecord(iteration, factor, slope, step, accepted, f0, f_step))
    if not accepted:
        return w_or_h, False, cost0
    return candidate(step), True, f_step


def robust_step(v, w, h, params: ArmijoParams | None = None, *,
                frozen_col: int | None = None,
                log: list | None = None, iteration: int = 0):
    """One additive update of W then H on the hypersurface cost.

    Each block moves against its scaled residual gradient by one shared
    Armijo step, with candidates projected to >= 0 before the
    sufficient-decrease test, so the accepted cost never increases.  A
    zero gradient skips the block.  Returns (W, H, accepted_W, accepted_H).
    """
    params = params or ArmijoParams()
    v = as_array(v)
    w = as_array(w)
    h = as_array(h)
    if w.shape[0] != v.shape[0] or h.shape[1] != v.shape[1] or w.shape[1] != h.shape[0]:
        raise DimensionMismatch(
            f"factors {w.shape} x {h.shape} do not conform to data {v.shape}"
        )
    cost0 = robust_cost(v, w, h)

    grad = robust_grad_w(v, w, h)
    w, accepted_w, cost0 = _phase(
        v, w, grad, lambda block: robust_cost(v, block, h),
        cost0, params, log, iteration, "W",
    )

    grad = robust_grad_h(v, w, h)
    if frozen_col is not None:
        grad[:, frozen_col] = 0.0
    h, accepted_h, _ = _phase(
        v, h, grad, lambda block: robust_cost(v, w, block),
        cost0, params, log, iteration, "H",
    )
    return w, h, accepted_w, accepted_h


def solve(v, config: SolverConfig, on_iteration=None) -> FactorizationResult:
    """Run the configured algorithm to convergence.

    Stops when the relative cost change drops below rel_tol, when max_iter
    is reached, or (rnmf) when both line searches fail against a genuine
    descent direction in one iteration.  cost_trace starts with the cost
    of the initial factors; with asc="augment" it is the objective of the
    augmented problem.  on_iteration(i, W, H), if given, observes every
    iterate (a test hook; treat the arrays as read-only).
    """
    x = ObservationMatrix(as_array(v)).data
    n_bands = x.shape[1]
    nmf = config.algorithm == "nmf"
    cost_fn = euclidean_cost if nmf else robust_cost
    rownorm = config.asc == "rownorm"
    augment = config.asc == "augment"

    x_work = x
    frozen_col = None
    if augment:
        x_work = np.concatenate(
            [x, np.full((x.shape[0], 1), float(config.asc_delta))], axis=1
        )
        frozen_col = n_bands
    w, h = init_factors(x_work, config.n_endmembers, config.init, config.seed)
    if augment:
        h[:, frozen_col] = config.asc_delta
    if rownorm:
        w = _normalize_rows_safe(w)

    trace = [cost_fn(x_work, w, h)]
    log: list[ArmijoRecord] = []
    termination = "max_iter"
    iterations = 0
    if on_iteration is not None:
        on_iteration(0, w, h)
    for it in range(1, config.max_iter + 1):
        stalled = False
        if nmf:
            w, h = multiplicative_step(x_work, w, h, config.epsilon, frozen_col=frozen_col)
        else:
            w, h, accepted_w, accepted_h = robust_step(
                x_work, w, h, config.armijo,
                frozen_col=frozen_col, log=log, iteration=it,
            )
            stalled = (not accepted_w and not accepted_h
                       and any(r.slope < 0.0 for r in log[-2:]))
        if rownorm:
            w = _normalize_rows_safe(w)
        trace.append(cost_fn(x_work, w, h))
        iterations = it
        if on_iteration is not None:
            on_iteration(it, w, h)
        if stalled:
            termination = "stalled_line_search"
            break
        if abs(trace[-1] - trace[-2]) <= config.rel_tol * max(trace[-2], 1e-30):
            termination = "converged"
            break

    if augment:
        h = h[:, :n_bands]
    return FactorizationResult(
        abundances=AbundanceMatrix(w),
        endmembers=EndmemberMatrix(h),
        cost_trace=tuple(trace),
        iterations=iterations,
        termination=termination,
        armijo_log=tuple(log),
    )
