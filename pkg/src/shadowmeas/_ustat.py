"""Ordered-tuple trace sums over batch matrices, with leave-one-out exclusions.

The k-th moment U-statistic needs the sum of tr(M_{j1} ... M_{jk}) over all
ordered tuples of k distinct indices. For k = 2 and k = 3 this is aggregated
from pairwise/triple trace tables in closed form; k >= 4 enumerates tuples
depth-first, reusing prefix products. Exclusion sums (the contribution of all
tuples containing a given index) are accumulated in the same pass, which is
what makes the jackknife cost about one full evaluation.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import NotEnoughBatches, TooLarge

MAX_BATCHES_ENUMERATED = 16


def _pair_table(stack: np.ndarray) -> np.ndarray:
    return np.einsum("aij,bji->ab", stack, stack).real


def _sums_k2(stack):
    t2 = _pair_table(stack)
    diag = np.diagonal(t2)
    total = float(t2.sum() - diag.sum())
    excl = 2.0 * (t2.sum(axis=1) - diag)
    return total, excl


def _sums_k3(stack):
    b = stack.shape[0]
    t3 = np.empty((b, b, b))
    for a in range(b):
        pair_products = stack[a] @ stack  # cached products rho_a rho_b
        t3[a] = np.einsum("bij,cji->bc", pair_products, stack).real
    idx = np.arange(b)
    distinct = (
        (idx[:, None, None] != idx[None, :, None])
        & (idx[None, :, None] != idx[None, None, :])
        & (idx[:, None, None] != idx[None, None, :])
    )
    t3 = np.where(distinct, t3, 0.0)
    total = float(t3.sum())
    excl = t3.sum(axis=(1, 2)) + t3.sum(axis=(0, 2)) + t3.sum(axis=(0, 1))
    return total, excl


def _sums_enumerated(mats, k):
    b = len(mats)
    if b > MAX_BATCHES_ENUMERATED:
        raise TooLarge(
            f"tuple enumeration for k >= 4 is limited to {MAX_BATCHES_ENUMERATED} batches"
        )
    total = 0.0
    excl = np.zeros(b)
    chain: list = []

    def descend(prod, used):
        nonlocal total
        depth = len(chain)
        for j in range(b):
            if used >> j & 1:
                continue
            nxt = mats[j] if prod is None else prod @ mats[j]
            chain.append(j)
            if depth + 1 == k:
                t = np.trace(nxt).real
                total += t
                for i in chain:
                    excl[i] += t
            else:
                descend(nxt, used | (1 << j))
            chain.pop()

    descend(None, 0)
    return total, excl


def ordered_tuple_sums(mats, k: int):
    """Total and per-index exclusion sums over ordered distinct k-tuples."""
    if k < 2:
        raise ValueError("moments are defined for k >= 2")
    b = len(mats)
    if b < k:
        raise NotEnoughBatches(f"k = {k} needs at least {k} batches, got {b}")
    stack = np.stack([np.asarray(m, dtype=complex) for m in mats])
    if k == 2:
        return _sums_k2(stack)
    if k == 3:
        return _sums_k3(stack)
    return _sums_enumerated(list(stack), k)


def u_statistic(mats, k: int) -> float:
    """Unbiased k-th moment estimate: normalized ordered-tuple trace sum."""
    total, _ = ordered_tuple_sums(mats, k)
    return total / math.perm(len(mats), k)


def leave_one_out(mats, k: int):
    """Full estimate and all leave-one-out estimates from one aggregation pass."""
    b = len(mats)
    if b - 1 < k:
        raise NotEnoughBatches(
            f"leave-one-out for k = {k} needs at least {k + 1} batches, got {b}"
        )
    total, excl = ordered_tuple_sums(mats, k)
    theta = total / math.perm(b, k)
    loo = (total - excl) / math.perm(b - 1, k)
    return theta, loo
