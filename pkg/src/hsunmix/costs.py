"""Cost functions and gradients for the two factorization objectives.

The baseline objective is the squared Frobenius residual ||V - WH||^2.
The robust objective wraps the residual norm in the hypersurface function
phi(t) = sqrt(1 + t^2) - 1, which grows quadratically near zero and
linearly in the tails:

    robust_cost(V, W, H) = (1/2) * (sqrt(1 + ||V - WH||_F^2) - 1)

The gradient helpers return the update-rule quotients

    grad_W = (W H H^T - V H^T) / sqrt(1 + ||V - WH||_F^2)
    grad_H = (W^T W H - W^T V) / sqrt(1 + ||V - WH||_F^2)

which are exactly twice the analytic gradient of robust_cost; the factor 2
is absorbed by the line search.  The denominator uses the squared norm so
the quotient stays proportional to the true gradient.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionMismatch
from .model import as_array


def hypersurface(t: float) -> float:
    """phi(t) = sqrt(1 + t^2) - 1; even, nonnegative, <= min(t^2/2, |t|)."""
    return math.hypot(1.0, t) - 1.0


def _conform(v, w, h):
    v = as_array(v)
    w = as_array(w)
    h = as_array(h)
    if v.ndim != 2 or w.ndim != 2 or h.ndim != 2:
        raise DimensionMismatch("cost functions expect 2-D matrices")
    if w.shape[0] != v.shape[0] or h.shape[1] != v.shape[1] or w.shape[1] != h.shape[0]:
        raise DimensionMismatch(
            f"factors {w.shape} x {h.shape} do not conform to data {v.shape}"
        )
    return v, w, h


def euclidean_cost(v, w, h) -> float:
    """Squared Frobenius norm of the residual V - WH."""
    v, w, h = _conform(v, w, h)
    r = v - w @ h
    return float(np.sum(r * r))


def robust_cost(v, w, h) -> float:
    """Hypersurface cost (1/2)(sqrt(1 + ||V - WH||_F^2) - 1)."""
    v, w, h = _conform(v, w, h)
    r = v - w @ h
    return 0.5 * hypersurface(math.sqrt(float(np.sum(r * r))))


def robust_grad_w(v, w, h) -> np.ndarray:
    """Scaled residual gradient for the abundance factor (M x P)."""
    v, w, h = _conform(v, w, h)
    r = w @ h - v
    scale = math.sqrt(1.0 + float(np.sum(r * r)))
    return (r @ h.T) / scale


def robust_grad_h(v, w, h) -> np.ndarray:
    """Scaled residual gradient for the endmember factor (P x L)."""
    v, w, h = _conform(v, w, h)
    r = w @ h - v
    scale = math.sqrt(1.0 + float(np.sum(r * r)))
    return (w.T @ r) / scale
