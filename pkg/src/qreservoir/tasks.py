"""Benchmark inputs and targets: timer, squeezing classification, STM, parity, IPC."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator, Literal, Union

import numpy as np

from .core import Reservoir, run_sequence
from .readout import capacities


@dataclass(frozen=True)
class Timer:
    c: int = 500
    tau: int = 5
    length: int = 800

    def __post_init__(self):
        if min(self.c, self.tau) < 0 or self.c + self.tau >= self.length:
            raise ValueError("timer requires 0 <= c, tau and c + tau < length")


@dataclass(frozen=True)
class SqueezeClassify:
    n_classes: int = 3
    random_phase: bool = False
    n_train: int = 500
    n_test: int = 200

    def __post_init__(self):
        if self.n_classes < 2:
            raise ValueError("need at least two classes")
        if self.n_train < 1 or self.n_test < 1:
            raise ValueError("dataset sizes must be positive")


@dataclass(frozen=True)
class STM:
    tau: int = 1


@dataclass(frozen=True)
class Parity:
    tau: int = 1


@dataclass(frozen=True)
class IPC:
    d_max: int = 3
    delay_max: int = 20
    length: int = 5000

    def __post_init__(self):
        if self.d_max < 1 or self.delay_max < 1:
            raise ValueError("d_max and delay_max must be >= 1")


TaskSpec = Union[Timer, SqueezeClassify, STM, Parity, IPC]


def timer_sequence(c: int, tau: int, length: int) -> tuple[np.ndarray, np.ndarray]:
    """Step input switching on at ``k = c`` and a unit target spike at ``k = c + tau``."""
    Timer(c, tau, length)
    k = np.arange(length)
    s = (k >= c).astype(float)
    y = (k == c + tau).astype(float)
    return s, y


@dataclass(frozen=True)
class SqueezeDataset:
    class_values: np.ndarray
    train_r: np.ndarray
    train_phi: np.ndarray
    test_r: np.ndarray
    test_phi: np.ndarray

    def records(self, split: Literal["train", "test"] = "train") -> list[tuple[float, float, float]]:
        """(r, phi, class_label) triples; the label is the squeezing magnitude itself."""
        r, phi = (self.train_r, self.train_phi) if split == "train" else (self.test_r, self.test_phi)
        return [(float(a), float(b), float(a)) for a, b in zip(r, phi)]


def class_values(n_classes: int, r_max: float = 2.0) -> np.ndarray:
    return np.linspace(0.0, r_max, n_classes)


def squeeze_dataset(
    spec: SqueezeClassify,
    r_max: float = 2.0,
    phi_max: float = np.pi / 4,
    seed: int | np.random.Generator = 0,
) -> SqueezeDataset:
    """Random squeezed-vacuum inputs whose class is the squeezing magnitude."""
    rng = np.random.default_rng(seed)
    cv = class_values(spec.n_classes, r_max)

    def draw(n):
        r = cv[rng.integers(0, spec.n_classes, n)]
        phi = rng.uniform(0.0, phi_max, n) if spec.random_phase else np.zeros(n)
        return r, phi

    tr, tp = draw(spec.n_train)
    te, tq = draw(spec.n_test)
    return SqueezeDataset(cv, tr, tp, te, tq)


def benchmark_target(inputs, kind: Literal["STM", "Parity"], tau: int) -> np.ndarray:
    """Targets for ``k = tau .. len(inputs) - 1``.

    STM recalls ``s[k - tau]``; Parity is the sum of ``s[k - tau .. k]`` mod 2.
    """
    s = np.asarray(inputs, float)
    if not 0 <= tau < s.size:
        raise ValueError("need 0 <= tau < len(inputs)")
    if kind == "STM":
        return s[: s.size - tau].copy()
    if kind == "Parity":
        if not np.all((s == 0) | (s == 1)):
            raise ValueError("parity needs binary inputs")
        window = sum(s[tau - j : s.size - j] for j in range(tau + 1))
        return np.mod(window, 2)
    raise ValueError(f"unknown benchmark {kind!r}")


def legendre(d: int, s):
    """Degree-``d`` Legendre polynomial by the three-term recurrence."""
    s = np.asarray(s, float)
    if d < 0:
        raise ValueError("degree must be non-negative")
    if np.any(np.abs(s) > 1 + 1e-12):
        raise ValueError("Legendre argument outside [-1, 1]")
    p_prev, p = np.ones_like(s), s.copy()
    if d == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    for n in range(1, d):
        p_prev, p = p, ((2 * n + 1) * s * p - n * p_prev) / (n + 1)
    return p if p.ndim else float(p)


# (delay, degree) pairs with distinct delays, sorted by delay
DegreeAssignment = tuple[tuple[int, int], ...]


def _compositions(d: int, k: int) -> Iterator[tuple[int, ...]]:
    """Ordered ways to write ``d`` as ``k`` positive integers."""
    for cuts in combinations(range(1, d), k - 1):
        edges = (0,) + cuts + (d,)
        yield tuple(b - a for a, b in zip(edges, edges[1:]))


def degree_assignments(d: int, delay_max: int) -> list[DegreeAssignment]:
    """All assignments of total degree ``d`` over delays ``0 .. delay_max - 1``, by max delay."""
    out = []
    for k in range(1, min(d, delay_max) + 1):
        for delays in combinations(range(delay_max), k):
            for degs in _compositions(d, k):
                out.append(tuple(zip(delays, degs)))
    out.sort(key=lambda a: (a[-1][0], a))
    return out


def ipc_target(inputs_raw, assignment: DegreeAssignment, start: int | None = None) -> np.ndarray:
    """Product of Legendre polynomials of delayed inputs, for ``k = start .. L - 1``."""
    s = np.asarray(inputs_raw, float)
    if not assignment:
        raise ValueError("empty assignment")
    delays = [i for i, _ in assignment]
    if len(set(delays)) != len(delays) or min(delays) < 0:
        raise ValueError("delays must be distinct and non-negative")
    max_delay = max(delays)
    start = max_delay if start is None else start
    if start < max_delay or max_delay >= s.size or start > s.size:
        raise ValueError("assignment delays exceed the input history")
    y = np.ones(s.size - start)
    for i, di in assignment:
        y *= legendre(di, s[start - i : s.size - i])
    return y


@dataclass
class IPCResult:
    per_degree: dict[int, float]
    total: float
    retained: list[tuple[DegreeAssignment, float]] = field(default_factory=list)
    n_targets: int = 0
    n_features: int = 0


def total_ipc(
    reservoir: Reservoir,
    length: int = 5000,
    d_max: int = 3,
    delay_max: int = 20,
    seed: int = 0,
    washout: int = 500,
    n_surrogates: int = 20,
    n_sigma: float = 4.0,
) -> IPCResult:
    """Estimate information processing capacity per degree and in total.

    Raw inputs are uniform on [-1, 1] and enter the reservoir as
    ``(s + 1) / 2``.  A target's capacity is kept only if it exceeds the
    mean plus ``n_sigma`` standard deviations of its capacities against
    ``n_surrogates`` cyclically shifted copies of itself, and also every
    surrogate capacity of its degree class; the per-target rule alone lets
    a few dozen chance correlations through when there are thousands of
    targets.
    """
    if d_max < 1 or delay_max < 1:
        raise ValueError("d_max and delay_max must be >= 1")
    if washout < delay_max - 1:
        raise ValueError("washout must cover the longest delay")
    rows = length - washout
    if rows < 10 * reservoir.n_features:
        raise ValueError("sequence too short for the number of features")
    rng = np.random.default_rng(seed)
    s_raw = rng.uniform(-1.0, 1.0, length)
    X = run_sequence(reservoir, (s_raw + 1.0) / 2.0, washout)
    shifts = rng.integers(delay_max, rows - delay_max, size=n_surrogates)

    per_degree = {}
    retained = []
    n_targets = 0
    for d in range(1, d_max + 1):
        assignments = degree_assignments(d, delay_max)
        n_targets += len(assignments)
        Y = np.column_stack([ipc_target(s_raw, a, start=washout) for a in assignments])
        cap = capacities(X, Y)
        sur = np.stack([capacities(X, np.roll(Y, int(k), axis=0)) for k in shifts])
        # per-target test plus a family-wise guard over the whole degree class
        threshold = np.maximum(sur.mean(axis=0) + n_sigma * sur.std(axis=0), sur.max())
        keep = cap > threshold
        per_degree[d] = float(cap[keep].sum())
        retained.extend((a, float(c)) for a, c, k in zip(assignments, cap, keep) if k)
    return IPCResult(
        per_degree=per_degree,
        total=float(sum(per_degree.values())),
        retained=retained,
        n_targets=n_targets,
        n_features=reservoir.n_features,
    )
