import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import rk4_covariance, rk4_flow

from qreservoir import gaussian
from qreservoir.gaussian import (
    GaussianConfig,
    GaussianReservoir,
    SymplecticPropagator,
    build_oscillator_network,
    network_propagator,
    qelm_features,
    run_qelm_instance,
    select_dt,
    squeezed_covariances,
    squeezed_vacuum,
    symplectic_form,
    uncertainty_margin,
    vacuum,
)


def test_config_validation():
    with pytest.raises(ValueError):
        GaussianConfig(n_osc=1)
    with pytest.raises(ValueError):
        GaussianConfig(omega0=0)
    with pytest.raises(ValueError):
        GaussianConfig(coupling_low=0.3, coupling_high=0.2)


def test_uncoupled_network_rotates_each_mode():
    cfg = GaussianConfig(coupling_low=0, coupling_high=0, dt=3.0)
    S = build_oscillator_network(cfg).s_matrix
    a = cfg.omega0 * cfg.dt
    n = cfg.n_osc
    for i in range(n):
        block = S[np.ix_([i, n + i], [i, n + i])]
        assert np.allclose(block, [[np.cos(a), np.sin(a)], [-np.sin(a), np.cos(a)]], atol=1e-14)


def test_zero_time_is_identity():
    S = build_oscillator_network(GaussianConfig(dt=0.0, seed=4)).s_matrix
    assert np.allclose(S, np.eye(8), atol=1e-15)


def test_propagator_matches_ode_oracle():
    g = np.array([[0, 0.1], [0.1, 0]])
    T = 2.0
    S = network_propagator(g, 0.25, T)
    assert np.abs(S - rk4_flow(g, 0.25, T)).max() < 1e-6


@pytest.mark.parametrize("seed", range(10))
def test_symplectic_and_unit_determinant(seed):
    S = build_oscillator_network(GaussianConfig(dt=7.3, seed=seed)).s_matrix
    Om = symplectic_form(4)
    assert np.abs(S @ Om @ S.T - Om).max() <= 1e-10
    assert abs(np.linalg.det(S) - 1) <= 1e-8


def test_squeezed_vacuum_cases():
    for phi in (0.0, 0.3, 1.1):
        assert np.allclose(squeezed_vacuum(0.0, phi).cov, np.eye(2) / 2)
    assert np.allclose(squeezed_vacuum(1.0, 0.0).cov, np.diag([np.exp(-2) / 2, np.exp(2) / 2]))
    with pytest.raises(ValueError):
        squeezed_vacuum(-0.1)


@settings(max_examples=50, deadline=None)
@given(r=st.floats(0, 2), phi=st.floats(0, np.pi))
def test_squeezed_vacuum_is_pure_and_physical(r, phi):
    st_ = squeezed_vacuum(r, phi)
    assert abs(np.linalg.det(st_.cov) - 0.25) < 1e-12
    st_.check()
    assert np.allclose(squeezed_covariances(np.array([r]), np.array([phi]))[0], st_.cov, atol=1e-15)


def test_qelm_feature_count_and_vacuum_input():
    net = build_oscillator_network(GaussianConfig(seed=1))
    f = run_qelm_instance(net, vacuum(1))
    assert f.shape == (6,)
    V = net.s_matrix @ (np.eye(8) / 2) @ net.s_matrix.T
    assert np.allclose(f, np.diag(V)[[1, 2, 3, 5, 6, 7]])
    free = build_oscillator_network(GaussianConfig(seed=1, coupling_low=0, coupling_high=0))
    assert np.allclose(run_qelm_instance(free, vacuum(1)), 0.5)


def test_qelm_features_match_covariance_ode():
    g = np.array([[0, 0.1], [0.1, 0]])
    T = 2.0
    net = SymplecticPropagator(network_propagator(g, 0.25, T), gaussian.hamiltonian_matrix(g, 0.25), T)
    V0 = np.eye(4) / 2
    V0[np.ix_([0, 2], [0, 2])] = squeezed_vacuum(2.0, 0.0).cov
    V = rk4_covariance(g, 0.25, V0, T)
    assert np.abs(run_qelm_instance(net, squeezed_vacuum(2.0, 0.0)) - V[[1, 3], [1, 3]]).max() < 1e-6


def test_batched_features_match_single_instance():
    net = build_oscillator_network(GaussianConfig(seed=3, dt=5.0))
    r = np.array([0.0, 0.5, 2.0])
    phi = np.array([0.0, 0.2, 0.7])
    batch = qelm_features(net, squeezed_covariances(r, phi))
    single = np.array([run_qelm_instance(net, squeezed_vacuum(a, b)) for a, b in zip(r, phi)])
    assert np.allclose(batch, single, atol=1e-13)


def test_vacuum_features_independent_of_phase():
    net = build_oscillator_network(GaussianConfig(seed=2, dt=4.0))
    ref = run_qelm_instance(net, squeezed_vacuum(0.0, 0.0))
    for phi in np.linspace(0, np.pi, 7):
        assert np.abs(run_qelm_instance(net, squeezed_vacuum(0.0, phi)) - ref).max() <= 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), r=st.floats(0, 2), phi=st.floats(0, np.pi / 4), dt=st.floats(0, 50))
def test_evolution_preserves_uncertainty_and_purity(seed, r, phi, dt):
    net = build_oscillator_network(GaussianConfig(seed=seed, dt=dt))
    state = gaussian.inject_mode(vacuum(4), squeezed_vacuum(r, phi), 0)
    out = gaussian.evolve(state, net.s_matrix)
    assert uncertainty_margin(out.cov) >= -1e-9
    assert abs(np.linalg.det(out.cov) / 0.5**8 - 1) <= 1e-8
    assert np.all(gaussian.output_diagonal(out.cov, 0) > 0)


def test_select_dt_single_and_degenerate_candidates():
    builder = lambda dt: build_oscillator_network(GaussianConfig(seed=5, dt=dt))  # noqa: E731
    assert select_dt(builder, [7.0]) == 7.0
    assert select_dt(builder, [0.0, 5.0]) == 5.0
    with pytest.raises(ValueError):
        select_dt(builder, [])


def test_select_dt_regression_value():
    # pinned from a seeded run; all candidates classify perfectly, so the
    # validation MSE of the raw regression decides
    builder = lambda dt: build_oscillator_network(GaussianConfig(seed=0, dt=dt))  # noqa: E731
    first = select_dt(builder, [1, 5, 10, 20], seed=0)
    assert first == select_dt(builder, [1, 5, 10, 20], seed=0)
    assert first == SELECT_DT_PINNED


SELECT_DT_PINNED = 10.0


def test_reservoir_modes():
    res = GaussianReservoir(GaussianConfig(seed=0), reset=True)
    a = res.step(res.initial_state(), 0.4)
    b = res.step(res.step(res.initial_state(), 0.9), 0.4)
    # with reset, the driver restarts from vacuum; here we just check determinism
    assert np.allclose(a.cov, res.step(res.initial_state(), 0.4).cov)
    assert res.distance(a, a) == 0.0
    assert res.distance(a, b) > 0.0
    assert res.features(a).shape == (6,)
