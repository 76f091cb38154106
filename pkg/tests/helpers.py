"""Independent oracles shared by the test modules.

Everything here is deliberately written the simple, slow way (dense linear
algebra, explicit enumeration) so it cannot share bugs with the library code
paths it checks.
"""
import itertools
import math

import numpy as np

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_chain(mats):
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def pauli_dense(letters):
    return kron_chain([PAULI[ch] for ch in letters])


def random_pure(n, rng):
    z = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return z / np.linalg.norm(z)


def random_density(n, rng):
    d = 2**n
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = z @ z.conj().T
    return rho / np.trace(rho).real


def partial_trace(rho, keep_sites, n):
    """Reduce a 2^n x 2^n matrix to the given 1-based sites."""
    keep = [s - 1 for s in keep_sites]
    drop = [i for i in range(n) if i not in keep]
    t = rho.reshape((2,) * (2 * n))
    for off, ax in enumerate(sorted(drop, reverse=True)):
        t = np.trace(t, axis1=ax, axis2=ax + n - off)
    d = 2 ** len(keep)
    return t.reshape(d, d)


def trace_distance(a, b):
    return 0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum()


def brute_force_moment(mats, k):
    """Eq.-style U-statistic by explicit ordered-tuple enumeration."""
    b = len(mats)
    total = 0.0
    for tup in itertools.permutations(range(b), k):
        prod = mats[tup[0]]
        for j in tup[1:]:
            prod = prod @ mats[j]
        total += np.trace(prod).real
    return total * math.factorial(b - k) / math.factorial(b)


def merged_chisquare_pvalue(counts, expected, min_expected=5.0):
    """Chi-square GOF p-value after merging low-expectation bins."""
    from scipy import stats

    order = np.argsort(expected)
    counts = np.asarray(counts, dtype=float)[order]
    expected = np.asarray(expected, dtype=float)[order]
    merged_c, merged_e = [], []
    acc_c = acc_e = 0.0
    for c, e in zip(counts, expected):
        acc_c += c
        acc_e += e
        if acc_e >= min_expected:
            merged_c.append(acc_c)
            merged_e.append(acc_e)
            acc_c = acc_e = 0.0
    if acc_e > 0:
        if merged_e:
            merged_c[-1] += acc_c
            merged_e[-1] += acc_e
        else:
            merged_c.append(acc_c)
            merged_e.append(acc_e)
    merged_c = np.asarray(merged_c)
    merged_e = np.asarray(merged_e) * merged_c.sum() / np.sum(merged_e)
    return stats.chisquare(merged_c, merged_e).pvalue


class RunningMoments:
    """Chunked accumulation of elementwise mean and variance."""

    def __init__(self, shape):
        self.count = 0
        self.total = np.zeros(shape, dtype=complex)
        self.sq_re = np.zeros(shape)
        self.sq_im = np.zeros(shape)

    def add(self, block):
        self.count += block.shape[0]
        self.total += block.sum(axis=0)
        self.sq_re += (block.real**2).sum(axis=0)
        self.sq_im += (block.imag**2).sum(axis=0)

    def mean(self):
        return self.total / self.count

    def standard_error(self):
        m = self.mean()
        var_re = self.sq_re / self.count - m.real**2
        var_im = self.sq_im / self.count - m.imag**2
        scale = self.count - 1
        return (
            np.sqrt(np.clip(var_re, 0, None) * self.count / scale / self.count),
            np.sqrt(np.clip(var_im, 0, None) * self.count / scale / self.count),
        )


def max_z_score(mean, se_re, se_im, target, floor=1e-12):
    z_re = np.abs(mean.real - target.real) / np.maximum(se_re, floor)
    z_im = np.abs(mean.imag - target.imag) / np.maximum(se_im, floor)
    return max(z_re.max(), z_im.max())
