"""Harmonic-oscillator network in the covariance-matrix formalism.

Quadratures are ordered ``(x_1..x_N, p_1..p_N)`` and normalized to the bare
oscillator frequency, ``x = (a + a†)/√2``, so the vacuum covariance is
``I/2`` and an uncoupled oscillator rotates rigidly in phase space.  In
these units the network Hamiltonian

    H = sum_i (P_i^2 + w0^2 X_i^2)/2 + sum_{i<j} g_ij (X_i - X_j)^2 / 2

(written for canonical ``X = x/√w0``, ``P = √w0 p``) becomes
``H = xi^T M xi / 2`` with ``M = diag(w0 I + L/w0, w0 I)`` and ``L`` the
graph Laplacian of the couplings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class GaussianConfig:
    n_osc: int = 4
    omega0: float = 0.25
    coupling_low: float = 0.0
    coupling_high: float = 0.2
    dt: float = 10.0
    input_osc: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.n_osc < 2:
            raise ValueError("n_osc must be >= 2")
        if self.omega0 <= 0:
            raise ValueError("omega0 must be positive")
        if not 0 <= self.coupling_low <= self.coupling_high:
            raise ValueError("need 0 <= coupling_low <= coupling_high")
        if self.dt < 0:
            raise ValueError("dt must be non-negative")
        if not 0 <= self.input_osc < self.n_osc:
            raise ValueError("input_osc out of range")


@dataclass(frozen=True)
class CovarianceState:
    mean: np.ndarray
    cov: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.cov.shape[0] // 2

    def check(self, tol: float = 1e-12, eig_tol: float = 1e-9) -> None:
        if np.max(np.abs(self.cov - self.cov.T)) > tol:
            raise ValueError("covariance matrix is not symmetric")
        if uncertainty_margin(self.cov) < -eig_tol:
            raise ValueError("covariance matrix violates the uncertainty relation")


@dataclass(frozen=True)
class SymplecticPropagator:
    s_matrix: np.ndarray
    hamiltonian: np.ndarray
    dt: float
    input_osc: int = 0

    @property
    def n_modes(self) -> int:
        return self.s_matrix.shape[0] // 2


def symplectic_form(n: int) -> np.ndarray:
    z, e = np.zeros((n, n)), np.eye(n)
    return np.block([[z, e], [-e, z]])


def uncertainty_margin(cov: np.ndarray) -> float:
    """Smallest eigenvalue of ``V + (i/2) Omega``; non-negative for physical states."""
    n = cov.shape[0] // 2
    return float(np.linalg.eigvalsh(cov + 0.5j * symplectic_form(n)).min())


def coupling_matrix(config: GaussianConfig) -> np.ndarray:
    n = config.n_osc
    rng = np.random.default_rng(config.seed)
    iu = np.triu_indices(n, k=1)
    g = np.zeros((n, n))
    g[iu] = rng.uniform(config.coupling_low, config.coupling_high, size=len(iu[0]))
    return g + g.T


def hamiltonian_matrix(g: np.ndarray, omega0: float) -> np.ndarray:
    n = g.shape[0]
    lap = np.diag(g.sum(axis=1)) - g
    z = np.zeros((n, n))
    return np.block([[omega0 * np.eye(n) + lap / omega0, z], [z, omega0 * np.eye(n)]])


def network_propagator(g: np.ndarray, omega0: float, dt: float) -> np.ndarray:
    """``exp(Omega M dt)`` via the normal modes of the position block."""
    n = g.shape[0]
    M = hamiltonian_matrix(g, omega0)
    K = M[:n, :n]
    freq2, W = np.linalg.eigh(omega0 * K)
    if freq2.min() <= 0:
        raise ValueError("network Hamiltonian is not positive definite")
    w = np.sqrt(freq2)
    c, s = np.cos(w * dt), np.sin(w * dt)
    xx = (W * c) @ W.T
    xp = (W * (omega0 * s / w)) @ W.T
    px = (W * (-w * s / omega0)) @ W.T
    return np.block([[xx, xp], [px, xx]])


def build_oscillator_network(config: GaussianConfig) -> SymplecticPropagator:
    g = coupling_matrix(config)
    M = hamiltonian_matrix(g, config.omega0)
    if np.linalg.eigvalsh(M).min() <= 0:
        raise ValueError("network Hamiltonian is not positive definite")
    S = network_propagator(g, config.omega0, config.dt)
    return SymplecticPropagator(s_matrix=S, hamiltonian=M, dt=config.dt, input_osc=config.input_osc)


def rotation(phi):
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


def squeezed_vacuum(r: float, phi: float = 0.0) -> CovarianceState:
    """Single-mode squeezed vacuum; ``phi`` rotates the noise ellipse by ``phi``."""
    if r < 0:
        raise ValueError("squeezing magnitude must be non-negative")
    R = rotation(phi)
    cov = 0.5 * R @ np.diag([np.exp(-2 * r), np.exp(2 * r)]) @ R.T
    return CovarianceState(mean=np.zeros(2), cov=cov)


def squeezed_covariances(r: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Vectorized ``squeezed_vacuum(...).cov`` for arrays of (r, phi); shape (n, 2, 2)."""
    r, phi = np.broadcast_arrays(np.asarray(r, float), np.asarray(phi, float))
    a, b = 0.5 * np.exp(-2 * r), 0.5 * np.exp(2 * r)
    c, s = np.cos(phi), np.sin(phi)
    out = np.empty(r.shape + (2, 2))
    out[..., 0, 0] = a * c * c + b * s * s
    out[..., 1, 1] = a * s * s + b * c * c
    out[..., 0, 1] = out[..., 1, 0] = (a - b) * c * s
    return out


def vacuum(n: int) -> CovarianceState:
    return CovarianceState(mean=np.zeros(2 * n), cov=0.5 * np.eye(2 * n))


def inject_mode(state: CovarianceState, mode_state: CovarianceState, mode: int) -> CovarianceState:
    """Replace one mode by an uncorrelated single-mode state."""
    if mode_state.cov.shape != (2, 2):
        raise ValueError("mode_state must be single-mode")
    n = state.n_modes
    if not 0 <= mode < n:
        raise ValueError("mode index out of range")
    idx = [mode, n + mode]
    cov = state.cov.copy()
    cov[idx, :] = 0.0
    cov[:, idx] = 0.0
    cov[np.ix_(idx, idx)] = mode_state.cov
    mean = state.mean.copy()
    mean[idx] = mode_state.mean
    return CovarianceState(mean=mean, cov=cov)


def evolve(state: CovarianceState, S: np.ndarray) -> CovarianceState:
    return CovarianceState(mean=S @ state.mean, cov=S @ state.cov @ S.T)


def output_diagonal(cov: np.ndarray, input_osc: int) -> np.ndarray:
    """Diagonal covariance entries of all modes except ``input_osc``: x variances, then p variances."""
    n = cov.shape[-1] // 2
    keep = [j for j in range(n) if j != input_osc]
    d = np.diagonal(cov, axis1=-2, axis2=-1)
    return np.concatenate([d[..., keep], d[..., [n + j for j in keep]]], axis=-1)


def run_qelm_instance(network: SymplecticPropagator, input_state: CovarianceState) -> np.ndarray:
    """Ground state, inject ``input_state``, evolve, return the 2(N-1) output variances."""
    n = network.n_modes
    state = inject_mode(vacuum(n), input_state, network.input_osc)
    return output_diagonal(evolve(state, network.s_matrix).cov, network.input_osc)


def qelm_features(network: SymplecticPropagator, input_covs: np.ndarray) -> np.ndarray:
    """Batched ``run_qelm_instance`` for an array of single-mode covariances (n, 2, 2)."""
    n = network.n_modes
    k = network.input_osc
    S = network.s_matrix
    keep = [j for j in range(n) if j != k] + [n + j for j in range(n) if j != k]
    # output variance = sum_ab S[f,a] S[f,b] V[a,b]; ground state rows contribute 1/2 S S^T
    Sk = S[keep][:, [k, n + k]]
    base = 0.5 * (S[keep] ** 2).sum(axis=1) - 0.5 * (Sk**2).sum(axis=1)
    return base + np.einsum("fa,nab,fb->nf", Sk, np.asarray(input_covs), Sk)


def select_dt(
    network_builder: Callable[[float], SymplecticPropagator],
    candidates: Sequence[float],
    n_classes: int = 3,
    random_phase: bool = False,
    n_train: int = 200,
    n_val: int = 100,
    seed: int = 0,
) -> float:
    """Pick the evolution time giving the best held-out classification.

    Each candidate network classifies the same seeded squeezed-vacuum
    dataset.  Highest validation accuracy wins; ties go to the lower
    validation MSE of the raw regression output, then to the earlier
    candidate.
    """
    from .readout import classify, mse, predict, train_classifier
    from .tasks import SqueezeClassify, squeeze_dataset

    if len(candidates) == 0:
        raise ValueError("no candidate evolution times")
    spec = SqueezeClassify(n_classes=n_classes, random_phase=random_phase, n_train=n_train, n_test=n_val)
    data = squeeze_dataset(spec, seed=seed)
    best, best_key = None, None
    for dt in candidates:
        net = network_builder(dt)
        Xtr = qelm_features(net, squeezed_covariances(data.train_r, data.train_phi))
        Xva = qelm_features(net, squeezed_covariances(data.test_r, data.test_phi))
        model = train_classifier(Xtr, data.train_r, data.class_values)
        acc = float(np.mean(classify(model, Xva) == data.test_r))
        err = mse(predict(Xva, model.regressor), data.test_r)
        key = (-acc, err)
        if best_key is None or key < best_key:
            best, best_key = dt, key
    return float(best)


class GaussianReservoir:
    """Oscillator network driven by squeezed-vacuum inputs with ``r = r_scale * s``.

    With ``reset=True`` every input starts from the vacuum (extreme learning
    machine); otherwise the network keeps its state between inputs.
    """

    def __init__(self, config: GaussianConfig, reset: bool = True, r_scale: float = 2.0):
        self.config = config
        self.network = build_oscillator_network(config)
        self.resets = reset
        self.r_scale = r_scale
        self.n_features = 2 * (config.n_osc - 1)

    def initial_state(self) -> CovarianceState:
        return vacuum(self.config.n_osc)

    def step(self, state: CovarianceState, s: float) -> CovarianceState:
        injected = inject_mode(state, squeezed_vacuum(self.r_scale * s), self.config.input_osc)
        return evolve(injected, self.network.s_matrix)

    def features(self, state: CovarianceState) -> np.ndarray:
        return output_diagonal(state.cov, self.config.input_osc)

    def distance(self, a: CovarianceState, b: CovarianceState) -> float:
        return float(np.linalg.norm(a.cov - b.cov))
