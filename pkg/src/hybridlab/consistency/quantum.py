"""Decomposition dependence of mean-field mixture dynamics.

A density matrix fixes every quantum expectation, so if mixture dynamics
depended only on the density matrix, evolving the branches of any pure-state
decomposition and averaging would give decomposition-independent statistics.
Under the mean-field coupling each branch drags its own classical point, so
different decompositions of the same density matrix generally produce
different averaged trajectories.  This module evolves several decompositions
side by side and reports the largest disagreement across any pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from hybridlab.errors import ValidationError
from hybridlab.hilbert import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DensityMatrix,
    MixtureDecomposition,
    Operator,
    identity,
    mixture_to_density,
    sigma_dot,
    spin_states,
)
from hybridlab.meanfield import HybridHamiltonian, MeanFieldState, meanfield_step
from hybridlab.phase_grid import ClassicalPoint

REBUILD_TOL = 1e-10

_SPIN_OPS = (PAULI_X, PAULI_Y, PAULI_Z)
_SPIN_NAMES = ("sigma_x", "sigma_y", "sigma_z")


def decomposition_along_axis(axis, weights=(0.5, 0.5)) -> MixtureDecomposition:
    """Mixture of the spin up/down eigenstates along one axis."""
    up, down = spin_states(axis)
    w_up, w_down = float(weights[0]), float(weights[1])
    return MixtureDecomposition(((w_up, up), (w_down, down)))


def decoupled_hamiltonian(spring: float = 1.0, field=(0.0, 0.0, 1.0)) -> HybridHamiltonian:
    """Oscillator times identity plus a fixed spin term: no hybrid coupling."""
    field_op = sigma_dot(field)

    def evaluate(x, k):
        classical = 0.5 * float(k @ k) + 0.5 * spring * float(x @ x)
        return Operator(classical * np.eye(2) + field_op.entries)

    def grad_x(x, k):
        return [Operator(spring * xi * np.eye(2)) for xi in x]

    def grad_k(x, k):
        return [Operator(ki * np.eye(2)) for ki in k]

    return HybridHamiltonian(evaluate=evaluate, grad_x=grad_x, grad_k=grad_k)


@dataclass(frozen=True)
class ConsistencyRun:
    """Averaged trajectories per decomposition and their largest pairwise gap.

    ``averages`` has shape (n_decompositions, n_samples, n_columns), columns
    named in ``columns``: the three spin expectations followed by the
    branch-averaged classical position and momentum components.
    """

    times: np.ndarray
    columns: tuple
    averages: np.ndarray
    metric: float

    def pairwise_gap(self, i: int, j: int) -> float:
        return float(np.max(np.abs(self.averages[i] - self.averages[j])))

    def as_dict(self) -> dict:
        return {
            "times": self.times.tolist(),
            "columns": list(self.columns),
            "averages": self.averages.tolist(),
            "metric": self.metric,
        }


def _coerce_decomposition(entry) -> MixtureDecomposition:
    if isinstance(entry, MixtureDecomposition):
        return entry
    return MixtureDecomposition(tuple(entry))


def _check_rebuild(rho: DensityMatrix, decomposition: MixtureDecomposition, index: int) -> None:
    rebuilt = mixture_to_density(decomposition)
    gap = float(np.max(np.abs(rebuilt.entries - rho.entries)))
    if gap > REBUILD_TOL:
        raise ValidationError(
            f"decomposition {index} rebuilds the density matrix only to {gap:.3e}"
        )


def _averaged_row(states: Sequence[MeanFieldState], weights: np.ndarray) -> np.ndarray:
    spin = [
        sum(w * s.quantum.expectation(op) for w, s in zip(weights, states))
        for op in _SPIN_OPS
    ]
    position = sum(w * s.classical.x for w, s in zip(weights, states))
    momentum = sum(w * s.classical.k for w, s in zip(weights, states))
    return np.concatenate([spin, position, momentum])


def quantum_consistency_test(
    rho: DensityMatrix,
    decompositions: Sequence,
    hamiltonian: HybridHamiltonian,
    x0,
    k0,
    duration: float,
    dt: float = 1e-3,
    hbar: float = 1.0,
) -> ConsistencyRun:
    """Evolve each decomposition branch-by-branch and compare the averages.

    Every decomposition must rebuild ``rho`` to within 1e-10 entrywise; all
    branches start from the same classical point (x0, k0).  The metric is the
    largest absolute difference of any averaged column between any two
    decompositions at any recorded time.
    """
    if duration <= 0.0:
        raise ValidationError("duration must be positive")
    if dt <= 0.0 or dt > duration:
        raise ValidationError("dt must be positive and at most the duration")
    decs = [_coerce_decomposition(d) for d in decompositions]
    if len(decs) < 2:
        raise ValidationError("need at least two decompositions to compare")
    for index, dec in enumerate(decs):
        if dec.dim != rho.dim:
            raise ValidationError(f"decomposition {index} dimension differs from rho")
        _check_rebuild(rho, dec, index)
    point = ClassicalPoint(np.asarray(x0, dtype=float), np.asarray(k0, dtype=float))
    steps = int(round(duration / dt))
    x_names = tuple(f"x_{i}" for i in range(point.dof))
    k_names = tuple(f"k_{i}" for i in range(point.dof))
    columns = _SPIN_NAMES + x_names + k_names

    times = np.empty(steps + 1)
    averages = np.empty((len(decs), steps + 1, len(columns)))
    for d_index, dec in enumerate(decs):
        weights = np.array([w for w, _ in dec.components])
        states = [MeanFieldState(point, branch) for _, branch in dec.components]
        times[0] = 0.0
        averages[d_index, 0] = _averaged_row(states, weights)
        for step in range(1, steps + 1):
            states = [meanfield_step(s, hamiltonian, dt, hbar) for s in states]
            times[step] = states[0].time
            averages[d_index, step] = _averaged_row(states, weights)

    metric = 0.0
    for i in range(len(decs)):
        for j in range(i + 1, len(decs)):
            metric = max(metric, float(np.max(np.abs(averages[i] - averages[j]))))
    return ConsistencyRun(
        times=times,
        columns=columns,
        averages=averages,
        metric=metric,
    )
