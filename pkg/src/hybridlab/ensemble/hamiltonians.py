"""Hamiltonian functionals that generate the ensemble field equations.

Four kinds share one energy form

    H[P, S] = integral P * ( sum_axes (d_i S)^2 / (2 mass_i) + V )
            + sum_{quantum axes} (hbar^2 / (8 m)) integral P (d_i L)^2

differing only in which axes carry the hbar^2 term:

    classical : every axis has mass M, no hbar^2 term
    quantum   : every axis has mass m, hbar^2 term on every axis
    hybrid    : axis 0 is classical (M), axis 1 is quantum (m)
    free_spin : classical kinetic term per spin component (see ensemble.spin)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hybridlab.errors import ValidationError
from hybridlab.ensemble.state import EnsembleState
from hybridlab.phase_grid import GridField, diff_matrix

KINDS = ("classical", "quantum", "hybrid", "free_spin")

__all__ = ["FunctionalHamiltonian", "KINDS", "axis_masses", "quantum_axes", "energy"]


@dataclass(frozen=True)
class FunctionalHamiltonian:
    """Masses, Planck constant, and potential for one ensemble Hamiltonian."""

    kind: str
    mass_classical: float = 1.0
    mass_quantum: float = 1.0
    hbar: float = 1.0
    potential: GridField | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not (self.mass_classical > 0.0 and self.mass_quantum > 0.0):
            raise ValidationError("masses must be positive")
        if self.hbar < 0.0:
            raise ValidationError("hbar must be non-negative")


def axis_masses(h: FunctionalHamiltonian, n_axes: int) -> list:
    """Mass per grid axis for the given Hamiltonian kind."""
    if h.kind == "classical":
        return [h.mass_classical] * n_axes
    if h.kind == "quantum":
        return [h.mass_quantum] * n_axes
    if h.kind == "hybrid":
        if n_axes != 2:
            raise ValidationError("hybrid kind requires exactly the (x, q) axis pair")
        return [h.mass_classical, h.mass_quantum]
    raise ValidationError(f"kind {h.kind!r} has no per-axis field form")


def quantum_axes(h: FunctionalHamiltonian, n_axes: int) -> list:
    """Indices of the axes that carry the hbar^2 term."""
    if h.kind == "classical":
        return []
    if h.kind == "quantum":
        return list(range(n_axes))
    if h.kind == "hybrid":
        return [1]
    raise ValidationError(f"kind {h.kind!r} has no per-axis field form")


def _axis_derivative(values: np.ndarray, grids, axis: int, order: int = 1) -> np.ndarray:
    matrix = diff_matrix(grids[axis], order)
    moved = np.moveaxis(values, axis, 0)
    return np.moveaxis(np.tensordot(matrix, moved, axes=([1], [0])), 0, axis)


def energy(state: EnsembleState, h: FunctionalHamiltonian) -> float:
    """Value of the Hamiltonian functional by midpoint quadrature."""
    n_axes = len(state.grids)
    masses = axis_masses(h, n_axes)
    qaxes = set(quantum_axes(h, n_axes))
    density = np.exp(state.log_density)
    integrand = np.zeros_like(density)
    for axis in range(n_axes):
        s_i = _axis_derivative(state.action, state.grids, axis)
        integrand += s_i**2 / (2.0 * masses[axis])
        if axis in qaxes and h.hbar > 0.0:
            l_i = _axis_derivative(state.log_density, state.grids, axis)
            integrand += (h.hbar**2 / (8.0 * h.mass_quantum)) * l_i**2
    if h.potential is not None:
        if h.potential.grids != state.grids:
            raise ValidationError("potential grid does not match state grid")
        integrand = integrand + h.potential.values
    return float(np.sum(density * integrand)) * state.cell_volume
