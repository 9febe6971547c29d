"""RK4 time stepping for the (L, S) ensemble field equations.

Per axis i with mass mu_i the equations read

    dL/dt = - sum_i ( (d_i L)(d_i S) + d_i^2 S ) / mu_i
    dS/dt = - sum_i (d_i S)^2 / (2 mu_i) - V
            + sum_{quantum i} (hbar^2 / (8 m)) ( (d_i L)^2 + 2 d_i^2 L )

The second line's hbar^2 part is the quantum-potential term expressed in L.
Mass is conserved by the continuity structure only up to stencil truncation,
so the integrator records the drift instead of renormalizing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from hybridlab.errors import NumericalError, ValidationError
from hybridlab.ensemble.hamiltonians import (
    FunctionalHamiltonian,
    axis_masses,
    energy,
    quantum_axes,
)
from hybridlab.ensemble.state import DEFAULT_FLOOR, EnsembleState
from hybridlab.phase_grid import _CENTERED, diff_matrix

__all__ = ["EvolutionDiagnostics", "cfl_limit", "evolve", "field_rates"]

DEFAULT_CFL_FACTOR = 0.2


@dataclass
class EvolutionDiagnostics:
    """Per-record trace of conserved-quantity drift during a run."""

    times: list = field(default_factory=list)
    mass_drift: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    floored_fraction: list = field(default_factory=list)

    def record(self, state: EnsembleState, h: FunctionalHamiltonian,
               initial_mass: float) -> None:
        self.times.append(state.time)
        self.mass_drift.append(abs(state.mass - initial_mass))
        self.energy.append(energy(state, h))
        self.floored_fraction.append(state.floored_fraction())

    @property
    def max_mass_drift(self) -> float:
        return max(self.mass_drift) if self.mass_drift else 0.0

    @property
    def max_energy_drift(self) -> float:
        if not self.energy:
            return 0.0
        return max(abs(e - self.energy[0]) for e in self.energy)


def cfl_limit(state: EnsembleState, h: FunctionalHamiltonian,
              factor: float = DEFAULT_CFL_FACTOR) -> float:
    """Largest stable step for the dispersive hbar^2 term (inf if hbar = 0)."""
    qaxes = quantum_axes(h, len(state.grids))
    if h.hbar == 0.0 or not qaxes:
        return float("inf")
    dx = min(state.grids[a].spacing for a in qaxes)
    return factor * dx**2 * min(h.mass_classical, h.mass_quantum) / h.hbar


def _pair_d1_d2(pair: np.ndarray, axis: int, spacing: float):
    """First and second derivative of a (2, ...) field stack along one axis.

    Periodic 4th-order centered stencils applied by wrap-padding; equivalent
    to multiplying with diff_matrix but without the dense matmul.
    """
    moved = np.moveaxis(pair, axis, -1)
    n = moved.shape[-1]
    ext = np.concatenate([moved[..., -2:], moved, moved[..., :2]], axis=-1)
    w = [ext[..., j:j + n] for j in range(5)]
    c1 = _CENTERED[1][1]
    c2 = _CENTERED[2][1]
    d1 = (c1[0] * w[0] + c1[1] * w[1] + c1[3] * w[3] + c1[4] * w[4]) / spacing
    d2 = (c2[0] * w[0] + c2[1] * w[1] + c2[2] * w[2] + c2[3] * w[3]
          + c2[4] * w[4]) / spacing**2
    return np.moveaxis(d1, -1, axis), np.moveaxis(d2, -1, axis)


def _apply(matrix: np.ndarray, values: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(values, axis, 0)
    return np.moveaxis(np.tensordot(matrix, moved, axes=([1], [0])), 0, axis)


def field_rates(log_density: np.ndarray, action: np.ndarray, grids,
                h: FunctionalHamiltonian, potential_values=None):
    """Right-hand sides (dL/dt, dS/dt) of the ensemble equations."""
    n_axes = len(grids)
    masses = axis_masses(h, n_axes)
    qaxes = set(quantum_axes(h, n_axes))
    dl = np.zeros_like(log_density)
    ds = np.zeros_like(action)
    pair = np.stack([log_density, action])
    for axis in range(n_axes):
        grid = grids[axis]
        if grid.periodic:
            d1, d2 = _pair_d1_d2(pair, axis + 1, grid.spacing)
            l_1, s_1 = d1[0], d1[1]
            l_2, s_2 = d2[0], d2[1]
        else:
            m1 = diff_matrix(grid, 1)
            m2 = diff_matrix(grid, 2)
            l_1 = _apply(m1, log_density, axis)
            s_1 = _apply(m1, action, axis)
            l_2 = _apply(m2, log_density, axis)
            s_2 = _apply(m2, action, axis)
        dl -= (l_1 * s_1 + s_2) / masses[axis]
        ds -= s_1**2 / (2.0 * masses[axis])
        if axis in qaxes and h.hbar > 0.0:
            ds += (h.hbar**2 / (8.0 * h.mass_quantum)) * (l_1**2 + 2.0 * l_2)
    if potential_values is not None:
        ds = ds - potential_values
    return dl, ds


def evolve(state: EnsembleState, h: FunctionalHamiltonian, dt: float, steps: int,
           cfl_factor: float = DEFAULT_CFL_FACTOR,
           record_every: int = 0):
    """Advance ``steps`` RK4 steps; returns (final state, diagnostics).

    ``record_every = 0`` records only the initial and final states.
    """
    if steps < 0:
        raise ValidationError("steps must be non-negative")
    if dt == 0.0:
        raise ValidationError("dt must be nonzero")
    limit = cfl_limit(state, h, cfl_factor)
    if abs(dt) > limit:
        raise ValidationError(
            f"dt={abs(dt):.3e} exceeds the dispersive stability bound {limit:.3e}; "
            "refine dt or coarsen the grid")
    if state.floor == 0.0 and quantum_axes(h, len(state.grids)) and h.hbar > 0.0:
        if np.min(state.log_density) < np.log(DEFAULT_FLOOR):
            raise ValidationError(
                "density reaches below the default floor but the state was built "
                "without regularization; construct it via EnsembleState.from_fields")

    potential = None if h.potential is None else h.potential.values
    if h.potential is not None and h.potential.grids != state.grids:
        raise ValidationError("potential grid does not match state grid")

    log_density = state.log_density.copy()
    action = state.action.copy()
    diagnostics = EvolutionDiagnostics()
    initial_mass = state.mass
    diagnostics.record(state, h, initial_mass)

    current_time = state.time
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, steps + 1):
            log_density, action = _rk4_fields(log_density, action, state.grids,
                                              h, potential, dt)
            current_time = state.time + step * dt
            if not (np.all(np.isfinite(log_density))
                    and np.all(np.isfinite(action))):
                raise NumericalError(
                    f"ensemble fields became non-finite at t={current_time:.6g}")
            if record_every and step % record_every == 0 and step != steps:
                snapshot = EnsembleState(state.grids, log_density, action,
                                         floor=state.floor, time=current_time)
                diagnostics.record(snapshot, h, initial_mass)

    final = EnsembleState(state.grids, log_density, action,
                          floor=state.floor, time=current_time)
    diagnostics.record(final, h, initial_mass)
    return final, diagnostics


def _rk4_fields(log_density, action, grids, h, potential, dt):
    l1, s1 = field_rates(log_density, action, grids, h, potential)
    l2, s2 = field_rates(log_density + 0.5 * dt * l1, action + 0.5 * dt * s1,
                         grids, h, potential)
    l3, s3 = field_rates(log_density + 0.5 * dt * l2, action + 0.5 * dt * s2,
                         grids, h, potential)
    l4, s4 = field_rates(log_density + dt * l3, action + dt * s3,
                         grids, h, potential)
    sixth = dt / 6.0
    return (log_density + sixth * (l1 + 2 * l2 + 2 * l3 + l4),
            action + sixth * (s1 + 2 * s2 + 2 * s3 + s4))
