import itertools
import math

import numpy as np
import pytest

from hsunmix import aad, evaluate, match_endmembers, rms_aad, rms_sad, sad
from hsunmix.errors import DimensionMismatch, InvalidRank, RankMismatch, ZeroVector


def test_sad_trivials():
    assert sad([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0
    assert abs(sad([1.0, 0.0], [0.0, 1.0]) - math.pi / 2.0) < 1e-12
    assert abs(sad([1.0, 1.0], [1.0, 0.0]) - math.pi / 4.0) < 1e-12
    assert sad([1.0, 2.0], [3.0, 6.0]) < 1e-12  # scale invariance


def test_aad_trivials():
    assert aad([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert abs(aad([1.0, 0.0], [0.0, 1.0]) - math.pi / 2.0) < 1e-12
    assert aad([0.5, 0.5], [1.0, 1.0]) < 1e-12


def test_angle_scale_invariance_and_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(25):
        a = rng.random(6) + 0.01
        b = rng.random(6) + 0.01
        c = float(rng.uniform(0.01, 100.0))
        assert abs(sad(a, c * b) - sad(a, b)) < 1e-12
        assert abs(sad(c * a, b) - sad(a, b)) < 1e-12
        assert abs(sad(a, b) - sad(b, a)) < 1e-12
        assert 0.0 <= sad(a, b) <= math.pi / 2.0 + 1e-12


def test_identical_vectors_never_nan():
    # without clamping, cosines like 1 + 1e-16 turn into NaN
    rng = np.random.default_rng(1)
    for _ in range(200):
        v = rng.random(8) + 0.001
        angle = sad(v, v)
        assert not math.isnan(angle)
        assert angle == 0.0


def test_zero_vector_rejected():
    with pytest.raises(ZeroVector):
        sad([0.0, 0.0], [1.0, 2.0])
    with pytest.raises(ZeroVector):
        aad([1.0, 2.0], [0.0, 0.0])
    with pytest.raises(DimensionMismatch):
        sad([1.0, 2.0], [1.0, 2.0, 3.0])


def test_match_endmembers_identity_and_swap():
    rng = np.random.default_rng(2)
    e = rng.random((3, 6)) + 0.05
    assert match_endmembers(e, e) == (0, 1, 2)
    swapped = e[[1, 0, 2]]
    assert match_endmembers(e, swapped) == (1, 0, 2)


def test_match_endmembers_agrees_with_bruteforce_oracle():
    rng = np.random.default_rng(3)
    e_true = rng.random((4, 7)) + 0.05
    e_est = rng.random((4, 7)) + 0.05
    best, best_total = None, math.inf
    for perm in itertools.permutations(range(4)):
        total = 0.0
        for i in range(4):
            a = e_true[i] / np.linalg.norm(e_true[i])
            b = e_est[perm[i]] / np.linalg.norm(e_est[perm[i]])
            total += math.acos(min(1.0, max(-1.0, float(a @ b))))
        if total < best_total:
            best, best_total = perm, total
    assert match_endmembers(e_true, e_est) == best


def test_match_endmembers_is_bijection_no_worse_than_identity():
    rng = np.random.default_rng(4)
    for seed in range(5):
        e_true = rng.random((5, 8)) + 0.05
        e_est = rng.random((5, 8)) + 0.05
        perm = match_endmembers(e_true, e_est)
        assert sorted(perm) == list(range(5))
        matched = sum(sad(e_true[i], e_est[perm[i]]) for i in range(5))
        identity = sum(sad(e_true[i], e_est[i]) for i in range(5))
        assert matched <= identity + 1e-12


def test_match_endmembers_errors():
    with pytest.raises(RankMismatch):
        match_endmembers(np.ones((3, 4)), np.ones((2, 4)))
    with pytest.raises(DimensionMismatch):
        match_endmembers(np.ones((2, 4)), np.ones((2, 5)))
    with pytest.raises(InvalidRank):
        match_endmembers(np.ones((11, 4)), np.ones((11, 4)))


def test_rms_sad_closed_forms():
    e_true = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert rms_sad(e_true, 3.0 * e_true, (0, 1)) < 1e-12  # scaled perfect recovery
    e_est = np.array([[1.0, 0.0], [1.0, 0.0]])  # SADs 0 and pi/2
    expected = math.pi / (2.0 * math.sqrt(2.0))
    assert abs(rms_sad(e_true, e_est, (0, 1)) - expected) < 1e-12


def test_rms_aad_trivials():
    a = np.array([[0.2, 0.8], [0.6, 0.4]])
    assert rms_aad(a, a, (0, 1)) == 0.0
    single = np.array([[0.3, 0.7]])
    other = np.array([[0.5, 0.5]])
    assert abs(rms_aad(single, other, (0, 1)) - aad(single[0], other[0])) < 1e-15


def test_rms_matches_two_pass_oracle():
    rng = np.random.default_rng(5)
    e_true = rng.random((3, 6)) + 0.05
    e_est = rng.random((3, 6)) + 0.05
    a_true = rng.random((7, 3)) + 0.05
    a_est = rng.random((7, 3)) + 0.05
    perm = match_endmembers(e_true, e_est)
    sads = [sad(e_true[i], e_est[perm[i]]) for i in range(3)]
    assert abs(rms_sad(e_true, e_est, perm) - math.sqrt(sum(s * s for s in sads) / 3.0)) < 1e-12
    aligned = a_est[:, list(perm)]
    aads = [aad(a_true[m], aligned[m]) for m in range(7)]
    assert abs(rms_aad(a_true, a_est, perm) - math.sqrt(sum(x * x for x in aads) / 7.0)) < 1e-12


def test_rms_aad_zero_row_rejected():
    a_true = np.array([[0.0, 0.0], [0.5, 0.5]])
    a_est = np.array([[0.5, 0.5], [0.5, 0.5]])
    with pytest.raises(ZeroVector):
        rms_aad(a_true, a_est, (0, 1))


def test_evaluate_reports_consistent_labeling():
    rng = np.random.default_rng(6)
    e_true = rng.random((3, 8)) + 0.05
    a_true = rng.random((10, 3)) + 0.01
    shuffle = [2, 0, 1]  # estimated index j holds true endmember shuffle[j]
    e_est = e_true[shuffle]
    a_est = a_true[:, shuffle]
    report = evaluate(e_true, a_true, e_est, a_est)
    assert report.rms_sad < 1e-12 and report.rms_aad < 1e-12
    assert len(report.per_endmember_sad) == 3
    assert len(report.per_pixel_aad) == 10
    # matching maps estimated index -> true index
    assert report.matching == tuple(shuffle)
    # rms fields are the RMS of their lists
    assert abs(report.rms_sad
               - math.sqrt(np.mean(np.square(report.per_endmember_sad)))) < 1e-15
