import itertools
import math

import numpy as np
import pytest

import helpers
from shadowmeas import (
    BatchShadowSet,
    DenseShadow,
    NotEnoughBatches,
    NotEnoughSamples,
    Subsystem,
    jackknife_moments,
    sem,
)
from shadowmeas._ustat import leave_one_out, u_statistic


def _trace_one_hermitian(d, rng):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = (z + z.conj().T) / 2
    return h + (1 - np.trace(h).real) * np.eye(d) / d


def _batch_set(mats):
    sites = Subsystem.full(int(np.log2(mats[0].shape[0])))
    return BatchShadowSet(
        tuple(DenseShadow(m, sites) for m in mats), tuple(range(len(mats)))
    )


def _naive_loo(mats, k):
    """From-scratch leave-one-out recomputation (oracle)."""
    out = []
    for i in range(len(mats)):
        rest = [m for j, m in enumerate(mats) if j != i]
        total = 0.0
        for tup in itertools.permutations(range(len(rest)), k):
            prod = rest[tup[0]]
            for j in tup[1:]:
                prod = prod @ rest[j]
            total += np.trace(prod).real
        out.append(total * math.factorial(len(rest) - k) / math.factorial(len(rest)))
    return np.array(out)


def test_sem_examples():
    assert sem([1, 1, 1, 1]) == 0.0
    assert sem([0, 2]) == pytest.approx(1.0)
    draws = np.random.default_rng(0).standard_normal(10_000)
    assert abs(sem(draws) - 0.01) < 0.002
    with pytest.raises(NotEnoughSamples):
        sem([1.0])


def test_jackknife_degenerate_identical_batches():
    rng = np.random.default_rng(1)
    m = _trace_one_hermitian(4, rng)
    batch = _batch_set([m.copy() for _ in range(5)])
    with pytest.warns(UserWarning):
        (res,) = jackknife_moments(batch, [2])
    exact = np.trace(m @ m).real
    assert res.raw_estimate == pytest.approx(exact, abs=1e-12)
    assert res.point_estimate == pytest.approx(exact, abs=1e-12)
    assert res.variance == pytest.approx(0.0, abs=1e-20)
    assert np.allclose(res.leave_one_out, exact)


def test_cached_leave_one_out_equals_naive_recompute():
    rng = np.random.default_rng(2)
    for n_b in range(3, 9):
        mats = [_trace_one_hermitian(4, rng) for _ in range(n_b)]
        for k in (2, 3, 4):
            if n_b - 1 < k:
                continue
            theta, loo = leave_one_out(mats, k)
            assert theta == pytest.approx(helpers.brute_force_moment(mats, k), abs=1e-12)
            naive = _naive_loo(mats, k)
            assert np.abs(loo - naive).max() < 1e-12, (n_b, k)


def test_jackknife_identity_between_point_and_loo():
    rng = np.random.default_rng(3)
    batch = _batch_set([_trace_one_hermitian(4, rng) for _ in range(6)])
    with pytest.warns(UserWarning):
        results = jackknife_moments(batch, [2, 3])
    for res in results:
        n_b = res.leave_one_out.size
        reconstructed = n_b * res.raw_estimate - (n_b - 1) * res.leave_one_out.mean()
        assert res.point_estimate == pytest.approx(reconstructed, abs=1e-12)


def test_permutation_invariance():
    rng = np.random.default_rng(4)
    mats = [_trace_one_hermitian(4, rng) for _ in range(6)]
    perm = rng.permutation(6)
    a = u_statistic(mats, 3)
    b = u_statistic([mats[i] for i in perm], 3)
    assert a == pytest.approx(b, abs=1e-12)
    theta_a, loo_a = leave_one_out(mats, 2)
    theta_b, loo_b = leave_one_out([mats[i] for i in perm], 2)
    assert theta_a == pytest.approx(theta_b, abs=1e-12)
    assert np.abs(np.sort(loo_a) - np.sort(loo_b)).max() < 1e-12


def test_covariance_diagonal_matches_variances():
    rng = np.random.default_rng(5)
    batch = _batch_set([_trace_one_hermitian(8, rng) for _ in range(10)])
    results, cov = jackknife_moments(batch, [2, 3, 4], compute_cov=True)
    assert cov.shape == (3, 3)
    for i, res in enumerate(results):
        assert cov[i, i] == res.variance  # bitwise: same dot product
    assert np.array_equal(cov, cov.T)


def test_jackknife_batch_requirements():
    rng = np.random.default_rng(6)
    batch = _batch_set([_trace_one_hermitian(2, rng) for _ in range(3)])
    with pytest.raises(NotEnoughBatches):
        jackknife_moments(batch, [3])  # leave-one-out keeps only 2 < k
    with pytest.warns(UserWarning, match="recommended"):
        jackknife_moments(batch, [2])


def test_no_warning_at_ten_batches():
    rng = np.random.default_rng(7)
    batch = _batch_set([_trace_one_hermitian(2, rng) for _ in range(10)])
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        jackknife_moments(batch, [2])
