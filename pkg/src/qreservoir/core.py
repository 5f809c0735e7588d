"""Reservoir contract and the generic drivers that run inputs through a substrate.

A reservoir is anything with ``initial_state``, ``step`` and ``features``.
Substrates that reset between inputs (extreme learning machine mode) set
``resets = True`` so that every ``step`` starts from ``initial_state()``.
"""

from __future__ import annotations

from typing import Any, Callable, Protocol, Sequence, runtime_checkable

import numpy as np


class NumericalInstabilityError(ArithmeticError):
    """Raised when a substrate produces a non-finite observable."""

    def __init__(self, step: int, message: str = "non-finite feature value"):
        super().__init__(f"{message} at step {step}")
        self.step = step


@runtime_checkable
class Reservoir(Protocol):
    n_features: int
    resets: bool

    def initial_state(self) -> Any: ...

    def step(self, state: Any, s: float) -> Any: ...

    def features(self, state: Any) -> np.ndarray: ...


class IdentityReservoir:
    """Memoryless reservoir whose single feature is the current input."""

    n_features = 1
    resets = False

    def initial_state(self) -> float:
        return 0.0

    def step(self, state: float, s: float) -> float:
        return float(s)

    def features(self, state: float) -> np.ndarray:
        return np.array([state])

    def distance(self, a: float, b: float) -> float:
        return abs(a - b)


def as_inputs(values: Sequence[float], low: float = 0.0, high: float = 1.0) -> np.ndarray:
    """Validate an input sequence and return it as a float array."""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size and (np.any(arr < low) or np.any(arr > high) or not np.all(np.isfinite(arr))):
        raise ValueError(f"inputs must lie in [{low}, {high}]")
    return arr


def run_sequence(
    reservoir: Reservoir,
    inputs: Sequence[float],
    washout: int = 0,
    state: Any = None,
    return_state: bool = False,
):
    """Fold ``reservoir.step`` over ``inputs`` and collect post-washout features.

    Parameters
    ----------
    reservoir : Reservoir
        Substrate implementing the reservoir contract.
    inputs : sequence of float
        Input values, each in [0, 1].
    washout : int
        Number of leading steps whose features are discarded.
    state : optional
        Starting state; defaults to ``reservoir.initial_state()``.
    return_state : bool
        Also return the state reached after the last input.

    Returns
    -------
    numpy.ndarray
        Feature matrix of shape ``(len(inputs) - washout, n_features)``,
        optionally paired with the final state.
    """
    s = as_inputs(inputs)
    if washout < 0 or (s.size and washout >= s.size) or (not s.size and washout):
        raise ValueError("washout must satisfy 0 <= washout < len(inputs)")
    if state is None:
        state = reservoir.initial_state()
    rows = np.empty((max(s.size - washout, 0), reservoir.n_features))
    for k, value in enumerate(s):
        if reservoir.resets:
            state = reservoir.initial_state()
        state = reservoir.step(state, value)
        if k >= washout:
            row = reservoir.features(state)
            if not np.all(np.isfinite(row)):
                raise NumericalInstabilityError(k)
            rows[k - washout] = row
    if return_state:
        return rows, state
    return rows


def convergence_test(
    reservoir: Reservoir,
    inputs: Sequence[float],
    state_a: Any,
    state_b: Any,
    distance: Callable[[Any, Any], float] | None = None,
) -> np.ndarray:
    """Drive two initial states with the same inputs and record their distance.

    Entry 0 is the distance between the initial states; entry ``k`` is the
    distance after ``k`` injections.  The metric defaults to the
    reservoir's own ``distance`` method.
    """
    metric = distance or reservoir.distance
    s = as_inputs(inputs)
    out = np.empty(s.size + 1)
    out[0] = metric(state_a, state_b)
    for k, value in enumerate(s):
        if reservoir.resets:
            state_a = reservoir.initial_state()
            state_b = reservoir.initial_state()
        state_a = reservoir.step(state_a, value)
        state_b = reservoir.step(state_b, value)
        out[k + 1] = metric(state_a, state_b)
    return out
