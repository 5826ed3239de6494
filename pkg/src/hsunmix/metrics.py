"""Angle-based evaluation of unmixing results.

SAD is the angle between a true and an estimated signature; AAD is the
same angle between per-pixel abundance vectors.  Both are invariant to
positive scaling of either argument.  Factorization output order is
arbitrary, so endmembers are aligned to the truth first by the
permutation that minimizes total SAD (exhaustive search; the scenes here
have few endmembers), and the same permutation reorders abundance
columns so SAD and AAD score one consistent labeling.  Overall figures
are root-mean-square aggregates of the per-endmember / per-pixel angles.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidRank, RankMismatch, ZeroVector
from .model import as_array

_MAX_EXACT_MATCH = 10


@dataclass(frozen=True)
class MetricReport:
    """Per-endmember SAD, per-pixel AAD, their RMS values (radians), and
    the matching applied (estimated index -> true index)."""

    per_endmember_sad: tuple[float, ...]
    per_pixel_aad: tuple[float, ...]
    rms_sad: float
    rms_aad: float
    matching: tuple[int, ...]


def _angle(a, b, kind: str) -> float:
    """Angle between two vectors, radians.

    Evaluates arccos of the normalized dot product through the atan2 of
    the difference and sum of the unit vectors, which stays accurate for
    (anti)parallel inputs where a clamped arccos loses half the digits
    and an unclamped one returns NaN.
    """
    a = as_array(a).ravel()
    b = as_array(b).ravel()
    if a.size != b.size:
        raise DimensionMismatch(f"{kind}: vectors of length {a.size} vs {b.size}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector(f"{kind} is undefined for a zero vector")
    ua = a / na
    ub = b / nb
    return 2.0 * math.atan2(float(np.linalg.norm(ua - ub)),
                            float(np.linalg.norm(ua + ub)))


def sad(signature, estimate) -> float:
    """Spectral angle distance between two signatures, radians."""
    return _angle(signature, estimate, "spectral angle")


def aad(abundance, estimate) -> float:
    """Abundance angle distance between two per-pixel fraction vectors, radians."""
    return _angle(abundance, estimate, "abundance angle")


def match_endmembers(e_true, e_est) -> tuple[int, ...]:
    """Alignment perm minimizing sum_i sad(true[i], est[perm[i]]).

    Exhaustive over all P! permutations; P is capped at 10.
    """
    t = as_array(e_true)
    e = as_array(e_est)
    if t.ndim != 2 or e.ndim != 2:
        raise DimensionMismatch("expected 2-D endmember matrices")
    if t.shape[0] != e.shape[0]:
        raise RankMismatch(f"{t.shape[0]} true vs {e.shape[0]} estimated endmembers")
    if t.shape[1] != e.shape[1]:
        raise DimensionMismatch(f"band counts differ: {t.shape[1]} vs {e.shape[1]}")
    p = t.shape[0]
    if p > _MAX_EXACT_MATCH:
        raise InvalidRank(f"exhaustive matcher supports at most {_MAX_EXACT_MATCH} endmembers")
    pair_sad = np.array([[sad(t[i], e[j]) for j in range(p)] for i in range(p)])
    best, best_total = None, math.inf
    for perm in itertools.permutations(range(p)):
        total = sum(pair_sad[i, perm[i]] for i in range(p))
        if total < best_total:
            best, best_total = perm, total
    return best


def rms_sad(e_true, e_est, perm) -> float:
    """RMS of the P aligned spectral angles, radians."""
    t = as_array(e_true)
    e = as_array(e_est)
    angles = [sad(t[i], e[perm[i]]) for i in range(t.shape[0])]
    return math.sqrt(float(np.mean(np.square(angles))))


def rms_aad(a_true, a_est, perm) -> float:
    """RMS of the M per-pixel abundance angles after column alignment, radians."""
    t = as_array(a_true)
    e = as_array(a_est)[:, list(perm)]
    if t.shape != e.shape:
        raise DimensionMismatch(f"abundance shapes differ: {t.shape} vs {e.shape}")
    angles = [aad(t[m], e[m]) for m in range(t.shape[0])]
    return math.sqrt(float(np.mean(np.square(angles))))


def evaluate(e_true, a_true, e_est, a_est) -> MetricReport:
    """Match estimated endmembers to the truth and score SAD/AAD."""
    perm = match_endmembers(e_true, e_est)
    t_e = as_array(e_true)
    s_e = as_array(e_est)
    per_sad = tuple(sad(t_e[i], s_e[perm[i]]) for i in range(t_e.shape[0]))
    t_a = as_array(a_true)
    s_a = as_array(a_est)[:, list(perm)]
    if t_a.shape != s_a.shape:
        raise DimensionMismatch(f"abundance shapes differ: {t_a.shape} vs {s_a.shape}")
    per_aad = tuple(aad(t_a[m], s_a[m]) for m in range(t_a.shape[0]))
    inverse = tuple(int(j) for j in np.argsort(perm))
    return MetricReport(
        per_endmember_sad=per_sad,
        per_pixel_aad=per_aad,
        rms_sad=math.sqrt(float(np.mean(np.square(per_sad)))),
        rms_aad=math.sqrt(float(np.mean(np.square(per_aad)))),
        matching=inverse,
    )
