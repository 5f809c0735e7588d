"""Transverse-field Ising spin-network reservoir.

The model Hamiltonian is

    H = sum_{i<j} J_ij X_i X_j + h sum_i Z_i

with couplings drawn uniformly at random.  Inputs are written into qubit 0
(the most significant bit of the computational index) by replacing its
state, and the network then evolves unitarily for ``dt``.

Two routes are provided.  The module-level functions (``inject_input``,
``evolve_multiplexed``, ``measure_observables``) act on dense density
matrices in the computational basis and are written for clarity.
``SpinReservoir`` runs the same map in a parity-sorted basis: the
Hamiltonian commutes with the parity operator prod_i Z_i, so the propagator
splits into two blocks, and the injected state only needs the reduced state
of the remaining qubits.  Both routes are tested against each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import linalg

MAX_SPINS = 12

Encoding = Literal["pure", "mixed"]
ObservableSet = Literal["Z", "XYZ", "XYZ_ZZ"]
OBSERVABLE_SETS = ("Z", "XYZ", "XYZ_ZZ")


@dataclass(frozen=True)
class SpinConfig:
    n_spins: int = 10
    field_h: float = 10.0
    coupling_low: float = -0.5
    coupling_high: float = 0.5
    dt: float = 10.0
    multiplex_v: int = 1
    encoding: Encoding = "pure"
    observable_set: ObservableSet = "XYZ_ZZ"
    seed: int = 0

    def __post_init__(self):
        if not 2 <= self.n_spins <= MAX_SPINS:
            raise ValueError(f"n_spins must be in [2, {MAX_SPINS}], got {self.n_spins}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.multiplex_v < 1:
            raise ValueError("multiplex_v must be >= 1")
        if not self.coupling_low <= self.coupling_high:
            raise ValueError("coupling_low must not exceed coupling_high")
        if self.encoding not in ("pure", "mixed"):
            raise ValueError(f"unknown encoding {self.encoding!r}")
        if self.observable_set not in OBSERVABLE_SETS:
            raise ValueError(f"unknown observable set {self.observable_set!r}")


@dataclass(frozen=True)
class SpinHamiltonian:
    couplings: np.ndarray
    field: float

    @property
    def n_spins(self) -> int:
        return self.couplings.shape[0]


def build_spin_hamiltonian(config: SpinConfig) -> SpinHamiltonian:
    """Draw a symmetric coupling matrix for ``config`` (deterministic per seed)."""
    n = config.n_spins
    rng = np.random.default_rng(config.seed)
    iu = np.triu_indices(n, k=1)
    J = np.zeros((n, n))
    J[iu] = rng.uniform(config.coupling_low, config.coupling_high, size=len(iu[0]))
    J = J + J.T
    return SpinHamiltonian(couplings=J, field=float(config.field_h))


def _bits(n: int) -> np.ndarray:
    """bits[m, i] is the value of qubit i in basis state m (qubit 0 most significant)."""
    m = np.arange(2**n)
    return (m[:, None] >> (n - 1 - np.arange(n))) & 1


def hamiltonian_matrix(H: SpinHamiltonian) -> np.ndarray:
    """Dense real matrix of the Ising Hamiltonian in the computational basis."""
    n = H.n_spins
    d = 2**n
    zsign = 1 - 2 * _bits(n)
    out = np.diag(H.field * zsign.sum(axis=1).astype(float))
    m = np.arange(d)
    for i in range(n):
        for j in range(i + 1, n):
            if H.couplings[i, j] != 0.0:
                mask = (1 << (n - 1 - i)) | (1 << (n - 1 - j))
                out[m, m ^ mask] += H.couplings[i, j]
    return out


def build_propagator(H: SpinHamiltonian, dt_sub: float) -> np.ndarray:
    """Return ``exp(-i H dt_sub)`` from a Hermitian eigendecomposition."""
    if dt_sub <= 0:
        raise ValueError("dt_sub must be positive")
    try:
        w, v = linalg.eigh(hamiltonian_matrix(H))
    except linalg.LinAlgError as exc:
        raise ArithmeticError("eigendecomposition of the spin Hamiltonian failed") from exc
    return (v * np.exp(-1j * w * dt_sub)) @ v.T


def encode_input(s: float, scheme: Encoding = "pure") -> np.ndarray:
    """Single-qubit density matrix carrying the input value ``s`` in [0, 1]."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"input {s} outside [0, 1]")
    if scheme == "pure":
        psi = np.array([np.sqrt(1.0 - s), np.sqrt(s)], dtype=complex)
        return np.outer(psi, psi.conj())
    if scheme == "mixed":
        return np.diag([1.0 - s, s]).astype(complex)
    raise ValueError(f"unknown encoding {scheme!r}")


def _ensemble(s: float, scheme: Encoding) -> list[tuple[float, complex, complex]]:
    """Decompose the encoded qubit state into weighted pure states (weight, <0|phi>, <1|phi>)."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"input {s} outside [0, 1]")
    if scheme == "pure":
        return [(1.0, np.sqrt(1.0 - s), np.sqrt(s))]
    if scheme == "mixed":
        return [t for t in ((1.0 - s, 1.0, 0.0), (s, 0.0, 1.0)) if t[0] > 0.0]
    raise ValueError(f"unknown encoding {scheme!r}")


def _n_qubits(rho: np.ndarray) -> int:
    d = rho.shape[0]
    n = int(round(np.log2(d)))
    if rho.shape != (d, d) or 2**n != d or n < 1:
        raise ValueError(f"not a multi-qubit density matrix: shape {rho.shape}")
    return n


def trace_out_first(rho: np.ndarray) -> np.ndarray:
    """Partial trace over qubit 0."""
    n = _n_qubits(rho)
    half = 2 ** (n - 1)
    r = rho.reshape(2, half, 2, half)
    return r[0, :, 0, :] + r[1, :, 1, :]


def inject_input(rho: np.ndarray, qubit_state: np.ndarray) -> np.ndarray:
    """Replace qubit 0 of ``rho`` by ``qubit_state``."""
    if qubit_state.shape != (2, 2):
        raise ValueError("qubit_state must be 2x2")
    if _n_qubits(rho) < 2:
        raise ValueError("need at least two qubits")
    return np.kron(qubit_state, trace_out_first(rho))


def evolve_multiplexed(rho: np.ndarray, U: np.ndarray, v: int) -> list[np.ndarray]:
    """Snapshots ``U^j rho U^j†`` for j = 1..v."""
    if v < 1:
        raise ValueError("v must be >= 1")
    if U.shape != rho.shape:
        raise ValueError("propagator and state dimensions differ")
    out = []
    for _ in range(v):
        rho = U @ rho @ U.conj().T
        out.append(rho)
    return out


class _Observables:
    """Index tables for Pauli expectations in an arbitrary basis ordering.

    ``perm[p]`` is the computational index of position ``p``.
    """

    def __init__(self, n: int, perm: np.ndarray | None = None):
        d = 2**n
        perm = np.arange(d) if perm is None else perm
        inv = np.empty(d, dtype=np.intp)
        inv[perm] = np.arange(d)
        bits = _bits(n)[perm]
        self.n = n
        self.zsign = (1 - 2 * bits).astype(float)
        masks = 1 << (n - 1 - np.arange(n))
        # flip[i, p]: position of the basis state with qubit i flipped
        self.flip = inv[perm[None, :] ^ masks[:, None]]
        self.ysign = -1j * self.zsign.T
        self.pairs = np.triu_indices(n, k=1)
        self.zz = self.zsign[:, self.pairs[0]] * self.zsign[:, self.pairs[1]]
        self.cols = np.arange(d)[None, :]

    def count(self, which: ObservableSet) -> int:
        n = self.n
        return {"Z": n, "XYZ": 3 * n, "XYZ_ZZ": 3 * n + n * (n - 1) // 2}[which]

    def measure(self, rho: np.ndarray, which: ObservableSet) -> np.ndarray:
        # ordering: Z_0..Z_{n-1}, X_0.., Y_0.., then Z_iZ_j for i<j
        p = rho.diagonal().real
        z = p @ self.zsign
        if which == "Z":
            return z
        off = rho[self.flip, self.cols]
        x = off.sum(axis=1).real
        y = (self.ysign * off).sum(axis=1).real
        if which == "XYZ":
            return np.concatenate([z, x, y])
        return np.concatenate([z, x, y, p @ self.zz])


_OBS_CACHE: dict[int, _Observables] = {}


def observable_count(n_spins: int, which: ObservableSet) -> int:
    return {"Z": n_spins, "XYZ": 3 * n_spins, "XYZ_ZZ": 3 * n_spins + n_spins * (n_spins - 1) // 2}[which]


def measure_observables(rho: np.ndarray, which: ObservableSet = "Z") -> np.ndarray:
    """Pauli expectations of a computational-basis density matrix.

    Order is ``<Z_i>`` for all i, then ``<X_i>``, ``<Y_i>``, then
    ``<Z_i Z_j>`` for i < j, so smaller sets are prefixes of larger ones.
    """
    if which not in OBSERVABLE_SETS:
        raise ValueError(f"unknown observable set {which!r}")
    n = _n_qubits(rho)
    if n not in _OBS_CACHE:
        _OBS_CACHE[n] = _Observables(n)
    return _OBS_CACHE[n].measure(rho, which)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(linalg.eigvalsh(a - b)).sum())


def check_density_matrix(rho: np.ndarray, tol: float = 1e-10, eig_tol: float = 1e-9) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit-trace and positive."""
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError("density matrix trace differs from 1")
    if linalg.eigvalsh(rho).min() < -eig_tol:
        raise ValueError("density matrix has negative eigenvalues")


def random_density_matrix(n_spins: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from a Ginibre ensemble (pure when ``rank == 1``)."""
    d = 2**n_spins
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@dataclass
class SpinReservoir:
    """Spin-network reservoir on the parity-sector fast path.

    States are tuples of snapshot density matrices in the parity-sorted
    basis (``perm`` maps positions to computational indices); the last
    snapshot is the state carried to the next injection.
    """

    config: SpinConfig
    hamiltonian: SpinHamiltonian = field(init=False)
    resets = False

    def __post_init__(self):
        cfg = self.config
        n = cfg.n_spins
        self.hamiltonian = build_spin_hamiltonian(cfg)
        half, q = 2 ** (n - 1), 2 ** (n - 2)
        rest = np.arange(half)
        rest_parity = _bits(n - 1).sum(axis=1) % 2 if n > 1 else np.zeros(1, int)
        r0, r1 = rest[rest_parity == 0], rest[rest_parity == 1]
        even = np.concatenate([r0, half + r1])
        odd = np.concatenate([r1, half + r0])
        self.perm = np.concatenate([even, odd])
        self.rest_order = np.concatenate([r0, r1])
        self._half, self._q = half, q

        Hm = hamiltonian_matrix(self.hamiltonian)
        dt_sub = cfg.dt / cfg.multiplex_v
        self._U = []
        for idx in (even, odd):
            w, v = linalg.eigh(Hm[np.ix_(idx, idx)])
            self._U.append((v * np.exp(-1j * w * dt_sub)) @ v.T)
        self._obs = _Observables(n, self.perm)
        self.n_observables = self._obs.count(cfg.observable_set)
        self.n_features = self.n_observables * cfg.multiplex_v

    # -- conversions ------------------------------------------------------
    def to_computational(self, rho_p: np.ndarray) -> np.ndarray:
        d = rho_p.shape[0]
        out = np.empty_like(rho_p)
        inv = np.empty(d, dtype=np.intp)
        inv[self.perm] = np.arange(d)
        out[:] = rho_p[np.ix_(inv, inv)]
        return out

    def from_computational(self, rho: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(rho[np.ix_(self.perm, self.perm)])

    def propagator(self) -> np.ndarray:
        """Dense propagator for one sub-step in the computational basis."""
        d = 2 * self._half
        Up = np.zeros((d, d), dtype=complex)
        Up[: self._half, : self._half] = self._U[0]
        Up[self._half :, self._half :] = self._U[1]
        return self.to_computational(Up)

    def state_from_density(self, rho: np.ndarray) -> tuple[np.ndarray, ...]:
        return (self.from_computational(np.asarray(rho, dtype=complex)),)

    def density_matrix(self, state: tuple[np.ndarray, ...]) -> np.ndarray:
        return self.to_computational(state[-1])

    # -- reservoir contract ----------------------------------------------
    def initial_state(self) -> tuple[np.ndarray, ...]:
        d = 2 * self._half
        rho = np.zeros((d, d), dtype=complex)
        pos = int(np.flatnonzero(self.perm == 0)[0])
        rho[pos, pos] = 1.0
        return (rho,)

    def _reduced(self, rho: np.ndarray) -> list[list[np.ndarray]]:
        """Reduced state of qubits 1..N-1 as 2x2 parity blocks (rest order r0, r1)."""
        q = self._q
        e0, e1, o0, o1 = (slice(k * q, (k + 1) * q) for k in range(4))
        return [
            [rho[e0, e0] + rho[o1, o1], rho[e0, o0] + rho[o1, e1]],
            [rho[o0, e0] + rho[e1, o1], rho[o0, o0] + rho[e1, e1]],
        ]

    def _inject_evolve(self, rho: np.ndarray, s: float) -> np.ndarray:
        q = self._q
        Ue, Uo = self._U
        sigma = self._reduced(rho)
        nz = [[bool(sigma[a][b].any()) for b in range(2)] for a in range(2)]
        d = 2 * self._half
        out = np.zeros((d, d), dtype=complex)
        for weight, alpha, beta in _ensemble(s, self.config.encoding):
            # A[X][a]: maps rest block a into output sector X (None if zero)
            A = [
                [alpha * Ue[:, :q] if alpha else None, beta * Ue[:, q:] if beta else None],
                [beta * Uo[:, q:] if beta else None, alpha * Uo[:, :q] if alpha else None],
            ]
            T = [[None, None], [None, None]]
            for X in range(2):
                for b in range(2):
                    acc = None
                    for a in range(2):
                        if A[X][a] is None or not nz[a][b]:
                            continue
                        term = A[X][a] @ sigma[a][b]
                        acc = term if acc is None else acc + term
                    T[X][b] = acc
            h = self._half
            for X in range(2):
                for Y in range(2):
                    acc = None
                    for b in range(2):
                        if T[X][b] is None or A[Y][b] is None:
                            continue
                        term = T[X][b] @ A[Y][b].conj().T
                        acc = term if acc is None else acc + term
                    if acc is not None:
                        out[X * h : (X + 1) * h, Y * h : (Y + 1) * h] += weight * acc
        return out

    def _evolve(self, rho: np.ndarray) -> np.ndarray:
        h = self._half
        out = np.zeros_like(rho)
        for X in range(2):
            for Y in range(2):
                block = rho[X * h : (X + 1) * h, Y * h : (Y + 1) * h]
                if block.any():
                    out[X * h : (X + 1) * h, Y * h : (Y + 1) * h] = (
                        self._U[X] @ block @ self._U[Y].conj().T
                    )
        return out

    def step(self, state: tuple[np.ndarray, ...], s: float) -> tuple[np.ndarray, ...]:
        rho = self._inject_evolve(state[-1], s)
        snaps = [rho]
        for _ in range(self.config.multiplex_v - 1):
            rho = self._evolve(rho)
            snaps.append(rho)
        return tuple(snaps)

    def features(self, state: tuple[np.ndarray, ...]) -> np.ndarray:
        which = self.config.observable_set
        return np.concatenate([self._obs.measure(r, which) for r in state])

    def distance(self, a: tuple[np.ndarray, ...], b: tuple[np.ndarray, ...]) -> float:
        return trace_distance(a[-1], b[-1])
