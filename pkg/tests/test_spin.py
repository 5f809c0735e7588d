import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import X, Y, Z, reference_hamiltonian, site, taylor_expm

from qreservoir import spin
from qreservoir.spin import (
    SpinConfig,
    SpinHamiltonian,
    SpinReservoir,
    build_propagator,
    build_spin_hamiltonian,
    encode_input,
    evolve_multiplexed,
    hamiltonian_matrix,
    inject_input,
    measure_observables,
    random_density_matrix,
    trace_out_first,
)


def test_config_validation():
    with pytest.raises(ValueError):
        SpinConfig(n_spins=1)
    with pytest.raises(ValueError):
        SpinConfig(n_spins=13)
    with pytest.raises(ValueError):
        SpinConfig(dt=0)
    with pytest.raises(ValueError):
        SpinConfig(multiplex_v=0)
    with pytest.raises(ValueError):
        SpinConfig(coupling_low=1, coupling_high=0)


def test_hamiltonian_degenerate_range_gives_zero_couplings():
    H = build_spin_hamiltonian(SpinConfig(n_spins=4, coupling_low=0, coupling_high=0))
    assert np.all(H.couplings == 0)
    # only independent precession remains: diagonal Hamiltonian
    Hm = hamiltonian_matrix(H)
    assert np.all(Hm == np.diag(np.diag(Hm)))


def test_hamiltonian_deterministic_and_symmetric():
    cfg = SpinConfig(n_spins=6, seed=11)
    a, b = build_spin_hamiltonian(cfg), build_spin_hamiltonian(cfg)
    assert np.array_equal(a.couplings, b.couplings)
    assert np.array_equal(a.couplings, a.couplings.T)
    assert np.all(np.diag(a.couplings) == 0)
    iu = np.triu_indices(6, 1)
    assert np.all((a.couplings[iu] >= -0.5) & (a.couplings[iu] <= 0.5))


def test_coupling_sample_mean_within_three_sigma():
    J = build_spin_hamiltonian(SpinConfig(n_spins=10, seed=3)).couplings
    vals = J[np.triu_indices(10, 1)]
    assert vals.size == 45
    assert abs(vals.mean()) < 3 * (1 / math.sqrt(12)) / math.sqrt(45)


def test_hamiltonian_matrix_matches_kron_construction():
    H = build_spin_hamiltonian(SpinConfig(n_spins=4, seed=5, field_h=1.7))
    assert np.allclose(hamiltonian_matrix(H), reference_hamiltonian(H.couplings, H.field), atol=1e-14)


def test_propagator_zero_hamiltonian_is_identity():
    H = SpinHamiltonian(np.zeros((3, 3)), 0.0)
    assert np.allclose(build_propagator(H, 1.0), np.eye(8), atol=1e-14)


def test_propagator_single_spin_analytic():
    U = build_propagator(SpinHamiltonian(np.zeros((1, 1)), 10.0), 10.0)
    assert np.allclose(U, np.diag([np.exp(-100j), np.exp(100j)]), atol=1e-12)


def test_propagator_matches_taylor_series_small_dt():
    H = build_spin_hamiltonian(SpinConfig(n_spins=2, seed=7))
    dt = 0.01
    series = taylor_expm(-1j * reference_hamiltonian(H.couplings, H.field) * dt)
    assert np.abs(build_propagator(H, dt) - series).max() < 1e-8


def test_propagator_unitary():
    U = SpinReservoir(SpinConfig(n_spins=6, seed=2)).propagator()
    assert np.abs(U.conj().T @ U - np.eye(64)).max() <= 1e-10


@pytest.mark.parametrize("scheme", ["pure", "mixed"])
def test_encode_endpoints(scheme):
    assert np.allclose(encode_input(0.0, scheme), np.diag([1, 0]))
    assert np.allclose(encode_input(1.0, scheme), np.diag([0, 1]))


def test_encode_half():
    assert np.allclose(encode_input(0.5, "mixed"), np.eye(2) / 2)
    assert np.allclose(encode_input(0.5, "pure"), np.full((2, 2), 0.5))


@pytest.mark.parametrize("s", [-0.1, 1.1])
def test_encode_domain(s):
    with pytest.raises(ValueError):
        encode_input(s)


def test_inject_product_state():
    rng = np.random.default_rng(0)
    sigma, tau = random_density_matrix(1, rng), random_density_matrix(2, rng)
    q = encode_input(0.3, "pure")
    assert np.allclose(inject_input(np.kron(sigma, tau), q), np.kron(q, tau), atol=1e-14)


def test_inject_idempotent():
    rng = np.random.default_rng(1)
    rho = random_density_matrix(3, rng)
    q = encode_input(0.7, "mixed")
    once = inject_input(rho, q)
    assert np.allclose(inject_input(once, q), once, atol=1e-14)


def test_inject_bell_state():
    bell = np.zeros(4, dtype=complex)
    bell[[0, 3]] = 1 / math.sqrt(2)
    out = inject_input(np.outer(bell, bell.conj()), np.diag([1.0, 0.0]))
    assert np.allclose(out, np.kron(np.diag([1.0, 0.0]), np.eye(2) / 2))


def test_inject_dimension_mismatch():
    with pytest.raises(ValueError):
        inject_input(np.eye(4) / 4, np.eye(3) / 3)


def test_evolve_multiplexed_cases():
    rng = np.random.default_rng(4)
    rho = random_density_matrix(2, rng)
    U = SpinReservoir(SpinConfig(n_spins=2, seed=1, dt=0.7)).propagator()
    (one,) = evolve_multiplexed(rho, U, 1)
    assert np.allclose(one, U @ rho @ U.conj().T)
    assert all(np.allclose(s, rho) for s in evolve_multiplexed(rho, np.eye(4), 3))
    snaps = evolve_multiplexed(rho, U, 3)
    assert all(abs(np.trace(s) - 1) < 1e-12 for s in snaps)
    assert all(np.abs(snaps[i] - snaps[j]).max() > 1e-6 for i in range(3) for j in range(i + 1, 3))


def test_observable_counts_for_ten_spins():
    assert [spin.observable_count(10, s) for s in ("Z", "XYZ", "XYZ_ZZ")] == [10, 30, 75]
    res = SpinReservoir(SpinConfig(n_spins=10, observable_set="XYZ_ZZ"))
    assert res.n_features == 75


def test_observables_ground_and_mixed():
    n = 4
    rho = np.zeros((16, 16), dtype=complex)
    rho[0, 0] = 1
    v = measure_observables(rho, "XYZ_ZZ")
    assert np.allclose(v[:n], 1) and np.allclose(v[n : 3 * n], 0) and np.allclose(v[3 * n :], 1)
    assert np.allclose(measure_observables(np.eye(16) / 16, "XYZ_ZZ"), 0)


def test_observables_match_trace_formula():
    n = 3
    rho = random_density_matrix(n, np.random.default_rng(9))
    got = measure_observables(rho, "XYZ_ZZ")
    want = [np.trace(site(P, i, n) @ rho).real for P in (Z, X, Y) for i in range(n)]
    want += [np.trace(site(Z, i, n) @ site(Z, j, n) @ rho).real for i in range(n) for j in range(i + 1, n)]
    assert np.allclose(got, want, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 5])
@pytest.mark.parametrize("encoding", ["pure", "mixed"])
@pytest.mark.parametrize("v", [1, 3])
def test_fast_path_matches_dense_route(n, encoding, v):
    cfg = SpinConfig(n_spins=n, encoding=encoding, multiplex_v=v, seed=n + v, dt=2.3)
    res = SpinReservoir(cfg)
    U = build_propagator(res.hamiltonian, cfg.dt / v)
    rng = np.random.default_rng(0)
    rho = random_density_matrix(n, rng)
    state = res.state_from_density(rho)
    for s in rng.uniform(0, 1, 6):
        state = res.step(state, s)
        snaps = evolve_multiplexed(inject_input(rho, encode_input(s, encoding)), U, v)
        rho = snaps[-1]
        for fast, dense in zip(state, snaps):
            assert np.abs(res.to_computational(fast) - dense).max() < 1e-12
        dense_features = np.concatenate([measure_observables(d, "XYZ_ZZ") for d in snaps])
        assert np.allclose(res.features(state), dense_features, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**16), s=st.floats(0, 1), encoding=st.sampled_from(["pure", "mixed"]))
def test_injection_locality(seed, s, encoding):
    rho = random_density_matrix(3, np.random.default_rng(seed))
    after = inject_input(rho, encode_input(s, encoding))
    assert np.abs(trace_out_first(after) - trace_out_first(rho)).max() <= 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**16), inputs=st.lists(st.floats(0, 1), min_size=1, max_size=8))
def test_observables_bounded_and_state_valid(seed, inputs):
    res = SpinReservoir(SpinConfig(n_spins=3, seed=seed, encoding="pure"))
    state = res.initial_state()
    for s in inputs:
        state = res.step(state, s)
        assert np.all(np.abs(res.features(state)) <= 1 + 1e-12)
    spin.check_density_matrix(res.density_matrix(state))


def test_long_run_physical_invariants():
    res = SpinReservoir(SpinConfig(n_spins=5, seed=8, encoding="pure"))
    state = res.initial_state()
    for s in np.random.default_rng(2).uniform(0, 1, 1000):
        state = res.step(state, s)
    rho = res.density_matrix(state)
    assert abs(np.trace(rho) - 1) <= 1e-10
    assert np.abs(rho - rho.conj().T).max() <= 1e-10
    assert np.linalg.eigvalsh(rho).min() >= -1e-9
