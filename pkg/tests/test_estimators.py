import numpy as np
import pytest

import helpers
from shadowmeas import (
    BatchShadowSet,
    ComputationalBasisSetting,
    DenseShadow,
    DensityMatrixDense,
    MeasurementData,
    MeasurementGroup,
    NotEnoughBatches,
    NotEnoughShots,
    PauliObservable,
    PureStateDense,
    SettingsMismatch,
    SizeMismatch,
    Subsystem,
    UnsupportedSetting,
    cross_platform_fidelity,
    dense_shadows,
    expect_shadow,
    factorized_shadows,
    ghz_state,
    local_unitary_setting,
    overlap_direct,
    pauli_expectation,
    purity_direct,
    reduce_group_to_subsystem,
    sample_measurements,
    sample_settings,
    self_xeb,
    shallow_setting,
    simulate_group,
    trace_moments,
    xeb,
)


def _batch_set_from_matrices(mats):
    sites = Subsystem.full(int(np.log2(mats[0].shape[0])))
    batches = tuple(DenseShadow(m, sites) for m in mats)
    return BatchShadowSet(batches, tuple(range(len(batches))))


def _random_trace_one_hermitian(d, rng):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = (z + z.conj().T) / 2
    return h + (1 - np.trace(h).real) * np.eye(d) / d


# ---------------------------------------------------------------------------
# expectation values


def test_expect_identity_is_one_with_zero_sem():
    group = simulate_group(ghz_state(3), sample_settings(3, 5, "haar", 0), 4, seed=1)
    est = expect_shadow(PauliObservable.from_string("III"), factorized_shadows(group), True)
    assert est.value == pytest.approx(1.0)
    assert est.sem == pytest.approx(0.0)
    assert est.n_samples == 20


def test_expect_ghz_zz():
    group = simulate_group(ghz_state(2), sample_settings(2, 5000, "haar", 2), 10, seed=3)
    est = expect_shadow(PauliObservable.from_string("ZZ"), factorized_shadows(group), True)
    assert abs(est.value - 1.0) < 2 * est.sem + 1e-12


def test_expect_factorized_and_dense_routes_agree():
    rng = np.random.default_rng(4)
    group = simulate_group(
        PureStateDense(helpers.random_pure(5, rng)),
        sample_settings(5, 20, "haar", 5),
        8,
        seed=6,
    )
    reduced = reduce_group_to_subsystem(group, [1, 4])
    obs = PauliObservable.from_string("ZX")
    fact = expect_shadow(obs, factorized_shadows(reduced))
    dense = expect_shadow(obs, dense_shadows(reduced))
    assert fact.value == pytest.approx(dense.value, abs=1e-10)


def test_expect_linearity():
    group = simulate_group(ghz_state(2), sample_settings(2, 30, "haar", 7), 5, seed=8)
    shadows = factorized_shadows(group)
    o1 = PauliObservable.from_string("ZZ")
    o2 = PauliObservable.from_string("XX")
    combined = PauliObservable(((0.7, "ZZ"), (-1.3, "XX")))
    lhs = expect_shadow(combined, shadows).value
    rhs = 0.7 * expect_shadow(o1, shadows).value - 1.3 * expect_shadow(o2, shadows).value
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_expect_size_mismatch():
    group = simulate_group(ghz_state(2), sample_settings(2, 2, "haar", 9), 2, seed=10)
    with pytest.raises(SizeMismatch):
        expect_shadow(PauliObservable.from_string("ZZZ"), factorized_shadows(group))


# ---------------------------------------------------------------------------
# trace moments


def test_trace_moments_matches_brute_force_small():
    rng = np.random.default_rng(11)
    mats = [_random_trace_one_hermitian(4, rng) for _ in range(3)]
    batch = _batch_set_from_matrices(mats)
    (est,) = trace_moments(batch, [2])
    assert est.value == pytest.approx(helpers.brute_force_moment(mats, 2), abs=1e-12)
    # explicit 3-batch k=2 formula: six ordered pairs over 6
    manual = sum(
        np.trace(mats[a] @ mats[b]).real for a in range(3) for b in range(3) if a != b
    ) / 6
    assert est.value == pytest.approx(manual, abs=1e-12)


def test_trace_moments_brute_force_grid():
    rng = np.random.default_rng(12)
    for n_b in range(3, 7):
        mats = [_random_trace_one_hermitian(4, rng) for _ in range(n_b)]
        batch = _batch_set_from_matrices(mats)
        ks = [k for k in (2, 3, 4) if k <= n_b]
        for k, est in zip(ks, trace_moments(batch, ks)):
            assert est.value == pytest.approx(
                helpers.brute_force_moment(mats, k), abs=1e-12
            ), (n_b, k)


def test_trace_moments_pure_state_purity_near_one():
    group = simulate_group(ghz_state(3), sample_settings(3, 200, "haar", 13), 100, seed=14)
    batch = dense_shadows(group, n_batches=10)
    (est,) = trace_moments(batch, [2])
    assert abs(est.value - 1.0) < 0.15


def test_trace_moments_requires_enough_batches():
    rng = np.random.default_rng(15)
    batch = _batch_set_from_matrices([_random_trace_one_hermitian(2, rng) for _ in range(3)])
    with pytest.raises(NotEnoughBatches):
        trace_moments(batch, [4])


# ---------------------------------------------------------------------------
# direct purity / overlap / fidelity


def test_purity_direct_pure_product_state():
    rng = np.random.default_rng(16)
    amps = helpers.random_pure(1, rng)
    full = np.kron(np.kron(amps, amps), amps)  # product state on 3 qubits
    group = simulate_group(
        PureStateDense(full), sample_settings(3, 300, "haar", 17), 50, seed=18
    )
    est = purity_direct(group, compute_sem=True)
    assert abs(est.value - 1.0) < 2 * est.sem + 0.05


def test_purity_direct_maximally_mixed_qubit():
    state = DensityMatrixDense(np.eye(2) / 2)
    group = simulate_group(state, sample_settings(1, 1000, "haar", 19), 100, seed=20)
    est = purity_direct(group, compute_sem=True)
    assert abs(est.value - 0.5) < 2 * est.sem + 1e-3


def test_purity_direct_ghz_subsystem():
    group = simulate_group(ghz_state(5), sample_settings(5, 300, "haar", 21), 100, seed=22)
    reduced = reduce_group_to_subsystem(group, [1, 2, 3])
    est = purity_direct(reduced, compute_sem=True)
    assert abs(est.value - 0.5) < 2 * est.sem + 1e-3


def test_purity_direct_agrees_with_moment_route():
    group = simulate_group(ghz_state(3), sample_settings(3, 400, "haar", 23), 100, seed=24)
    direct = purity_direct(group, compute_sem=True)
    batch = dense_shadows(group, n_batches=10)
    from shadowmeas import jackknife_moments

    (jk,) = jackknife_moments(batch, [2])
    combined = np.hypot(2 * direct.sem, 2 * jk.std)
    assert abs(direct.value - jk.point_estimate) < combined + 1e-3


def test_purity_direct_input_checks():
    data = MeasurementData(ComputationalBasisSetting(2), np.zeros((1, 2), dtype=np.uint8))
    with pytest.raises(NotEnoughShots):
        purity_direct(MeasurementGroup((data,)))
    shallow = shallow_setting(2, 1, np.random.default_rng(25))
    data = MeasurementData(shallow, np.zeros((3, 2), dtype=np.uint8))
    with pytest.raises(UnsupportedSetting):
        purity_direct(MeasurementGroup((data,)))


def test_overlap_same_pure_state_is_purity():
    rng = np.random.default_rng(26)
    psi = PureStateDense(helpers.random_pure(2, rng))
    settings = sample_settings(2, 400, "haar", 27)
    g1 = simulate_group(psi, settings, 50, seed=28)
    g2 = simulate_group(psi, settings, 50, seed=29)
    est = overlap_direct(g1, g2, compute_sem=True)
    assert abs(est.value - 1.0) < 2 * est.sem + 0.05


def test_overlap_orthogonal_states():
    settings = sample_settings(1, 500, "haar", 30)
    zero = PureStateDense(np.array([1.0, 0.0]))
    one = PureStateDense(np.array([0.0, 1.0]))
    g1 = simulate_group(zero, settings, 30, seed=31)
    g2 = simulate_group(one, settings, 30, seed=32)
    est = overlap_direct(g1, g2, compute_sem=True)
    assert abs(est.value) < 2 * est.sem + 1e-3


def test_overlap_matches_dense_oracle():
    rng = np.random.default_rng(33)
    a = helpers.random_pure(3, rng)
    b = helpers.random_pure(3, rng)
    exact = abs(np.vdot(a, b)) ** 2
    settings = sample_settings(3, 600, "haar", 34)
    g1 = simulate_group(PureStateDense(a), settings, 50, seed=35)
    g2 = simulate_group(PureStateDense(b), settings, 50, seed=36)
    est = overlap_direct(g1, g2, compute_sem=True)
    assert abs(est.value - exact) < 2 * est.sem + 0.02


def test_overlap_requires_common_settings():
    psi = PureStateDense(np.array([1.0, 0.0]))
    g1 = simulate_group(psi, sample_settings(1, 5, "haar", 37), 4, seed=38)
    g2 = simulate_group(psi, sample_settings(1, 5, "haar", 38), 4, seed=39)
    with pytest.raises(SettingsMismatch):
        overlap_direct(g1, g2)


def test_fidelity_identical_and_orthogonal():
    settings = sample_settings(2, 400, "haar", 40)
    rng = np.random.default_rng(41)
    psi = PureStateDense(helpers.random_pure(2, rng))
    g1 = simulate_group(psi, settings, 40, seed=42)
    g2 = simulate_group(psi, settings, 40, seed=43)
    est = cross_platform_fidelity(g1, g2, compute_sem=True)
    assert abs(est.value - 1.0) < 2 * est.sem + 0.1
    one = PureStateDense(np.kron(np.array([0, 1.0]), np.array([0, 1.0])))
    zero = PureStateDense(np.kron(np.array([1.0, 0]), np.array([1.0, 0])))
    g3 = simulate_group(zero, settings, 40, seed=44)
    g4 = simulate_group(one, settings, 40, seed=45)
    est = cross_platform_fidelity(g3, g4, compute_sem=True)
    assert abs(est.value) < 2 * est.sem + 1e-3


def test_fidelity_mixed_states_matches_oracle():
    rng = np.random.default_rng(46)
    rho1 = helpers.random_density(2, rng)
    rho2 = helpers.random_density(2, rng)
    exact = np.trace(rho1 @ rho2).real / max(
        np.trace(rho1 @ rho1).real, np.trace(rho2 @ rho2).real
    )
    settings = sample_settings(2, 800, "haar", 47)
    g1 = simulate_group(DensityMatrixDense(rho1), settings, 60, seed=48)
    g2 = simulate_group(DensityMatrixDense(rho2), settings, 60, seed=49)
    est = cross_platform_fidelity(g1, g2, compute_sem=True)
    assert abs(est.value - exact) < 2 * est.sem + 0.03


# ---------------------------------------------------------------------------
# XEB


def test_xeb_uniform_state_is_exactly_zero():
    n = 8
    uniform = PureStateDense(np.full(2**n, 1 / 16))
    rng = np.random.default_rng(50)
    bits = rng.integers(0, 2, size=(1000, n), dtype=np.uint8)
    data = MeasurementData(ComputationalBasisSetting(n), bits)
    assert xeb(uniform, data) == 0.0


def test_xeb_requires_computational_basis():
    psi = PureStateDense(np.array([1.0, 0]))
    setting = local_unitary_setting(1, np.random.default_rng(51))
    data = MeasurementData(setting, np.zeros((3, 1), dtype=np.uint8))
    with pytest.raises(UnsupportedSetting):
        xeb(psi, data)


def test_xeb_accepts_identity_local_setting():
    psi = PureStateDense(np.array([1.0, 0]))
    from shadowmeas import LocalUnitarySetting

    setting = LocalUnitarySetting(np.eye(2, dtype=complex)[None])
    data = MeasurementData(setting, np.zeros((3, 1), dtype=np.uint8))
    assert xeb(psi, data) == pytest.approx(1.0)


def test_xeb_against_maximally_mixed_data():
    rng = np.random.default_rng(52)
    psi = PureStateDense(helpers.random_pure(8, rng))
    bits = rng.integers(0, 2, size=(100_000, 8), dtype=np.uint8)
    data = MeasurementData(ComputationalBasisSetting(8), bits)
    assert abs(xeb(psi, data)) < 0.05


def test_xeb_mps_and_dense_paths_agree():
    rng = np.random.default_rng(53)
    from shadowmeas import random_mps

    mps = random_mps(6, 3, rng)
    dense = PureStateDense(mps.to_dense())
    bits = rng.integers(0, 2, size=(500, 6), dtype=np.uint8)
    data = MeasurementData(ComputationalBasisSetting(6), bits)
    assert xeb(mps, data) == pytest.approx(xeb(dense, data), abs=1e-10)


def test_self_xeb_closed_forms():
    n = 4
    zero = PureStateDense(np.eye(2**n)[:, 0].astype(complex))
    assert self_xeb(zero) == pytest.approx(2.0**n - 1.0)
    uniform = PureStateDense(np.full(2**n, 0.25))
    assert self_xeb(uniform) == pytest.approx(0.0, abs=1e-12)


def test_self_xeb_matches_direct_summation():
    rng = np.random.default_rng(54)
    amps = helpers.random_pure(8, rng)
    p = np.abs(amps) ** 2
    expected = 2.0**8 * (p @ p) - 1.0
    assert self_xeb(PureStateDense(amps)) == pytest.approx(expected, abs=1e-12)


def test_self_xeb_mps_transfer_matches_dense():
    rng = np.random.default_rng(55)
    from shadowmeas import random_mps

    mps = random_mps(7, 4, rng)
    dense = PureStateDense(mps.to_dense())
    assert self_xeb(mps) == pytest.approx(self_xeb(dense), abs=1e-10)


def test_xeb_self_consistency_on_own_samples():
    rng = np.random.default_rng(56)
    psi = PureStateDense(helpers.random_pure(8, rng))
    data = sample_measurements(psi, ComputationalBasisSetting(8), 100_000, rng=57)
    ratio = xeb(psi, data) / self_xeb(psi)
    assert 0.95 < ratio < 1.05
