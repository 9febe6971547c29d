"""Two-component spin-1/2 ensembles on a 3-D periodic grid.

The pair of (P, S) fields indexed by a = +1/2, -1/2 carries both orbital
angular momentum (through the phase gradients) and spin (through the
component populations and their relative phase). Under the free flow each
component streams independently with the classical rates; what is and is not
conserved by that flow is the point of the observables here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from hybridlab.errors import ValidationError
from hybridlab.ensemble.evolve import field_rates
from hybridlab.ensemble.hamiltonians import FunctionalHamiltonian
from hybridlab.ensemble.state import DEFAULT_FLOOR
from hybridlab.phase_grid import Grid1D

__all__ = [
    "SpinEnsemble",
    "SpinObservables",
    "spin_observables",
    "free_flow_step",
    "classical_kinetic_functional",
    "quantum_kinetic_energy",
    "log_gradient_energy",
    "axis_functional",
    "axis_functional_spread",
    "fibonacci_axes",
    "separable_spin_fixture",
    "entangled_spin_fixture",
    "random_smooth_spin_fixture",
]


@dataclass(frozen=True)
class SpinEnsemble:
    """Fields (L = log P, S) for the two spin components on shared grids.

    Normalization is joint: the component masses sum to one, and the split
    between them is part of the state.
    """

    grids: tuple
    log_density: np.ndarray      # shape (2, nx, ny, nz); index 0 is a = +1/2
    action: np.ndarray

    def __post_init__(self):
        grids = tuple(self.grids)
        object.__setattr__(self, "grids", grids)
        shape = (2,) + tuple(g.n for g in grids)
        if self.log_density.shape != shape or self.action.shape != shape:
            raise ValidationError(f"spin fields must have shape {shape}")
        if not all(g.periodic for g in grids):
            raise ValidationError("spin grids must be periodic")

    @classmethod
    def from_components(cls, grids, densities: Sequence[np.ndarray],
                        actions: Sequence[np.ndarray],
                        floor: float = DEFAULT_FLOOR,
                        normalize: bool = True) -> "SpinEnsemble":
        grids = tuple(grids)
        density = np.stack([np.asarray(d, dtype=float) for d in densities])
        action = np.stack([np.asarray(s, dtype=float) for s in actions])
        if np.any(density < 0.0):
            raise ValidationError("densities must be non-negative")
        cell = float(np.prod([g.spacing for g in grids]))
        if normalize:
            density = density / (density.sum() * cell)
        return cls(grids, np.log(density + floor), action)

    @property
    def cell_volume(self) -> float:
        return float(np.prod([g.spacing for g in self.grids]))

    @property
    def density(self) -> np.ndarray:
        return np.exp(self.log_density)

    @property
    def mass(self) -> float:
        return float(self.density.sum() * self.cell_volume)


@dataclass(frozen=True)
class SpinObservables:
    """Angular-momentum vectors and their rates under the free flow.

    ``total_rate`` is the flow derivative of J = L + S componentwise, i.e.
    the dynamical bracket of each J component with the free Hamiltonian.
    """

    orbital: np.ndarray
    spin: np.ndarray
    total: np.ndarray
    orbital_rate: np.ndarray
    spin_rate: np.ndarray
    total_rate: np.ndarray


def _wavenumbers(grids, axis: int, ndim: int) -> np.ndarray:
    grid = grids[axis]
    k = 2.0 * np.pi * np.fft.fftfreq(grid.n, grid.spacing)
    shape = [1] * ndim
    shape[axis] = grid.n
    return k.reshape(shape)


def _spectral_gradient(field: np.ndarray, grids) -> list:
    """Per-axis derivatives via FFT; exact for band-limited periodic data."""
    spectrum = np.fft.fftn(field)
    out = []
    for axis in range(len(grids)):
        deriv = np.fft.ifftn(spectrum * 1j * _wavenumbers(grids, axis, field.ndim))
        out.append(deriv if np.iscomplexobj(field) else deriv.real)
    return out


def _component_positions(grids) -> list:
    shape = [g.n for g in grids]
    out = []
    for axis, grid in enumerate(grids):
        view = [1] * len(grids)
        view[axis] = grid.n
        out.append(np.broadcast_to(grid.points.reshape(view), shape))
    return out


def orbital_vector(state: SpinEnsemble) -> np.ndarray:
    """Integral of P (x cross grad S) summed over components."""
    positions = _component_positions(state.grids)
    total = np.zeros(3)
    for a in range(2):
        density = np.exp(state.log_density[a])
        grad = _spectral_gradient(state.action[a], state.grids)
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            total[i] += np.sum(density * (positions[j] * grad[k]
                                          - positions[k] * grad[j]))
    return total * state.cell_volume


def spin_vector(state: SpinEnsemble, hbar: float) -> np.ndarray:
    """Pauli expectation triple from populations and relative phase."""
    p_up, p_down = np.exp(state.log_density)
    coherence = np.sqrt(p_up * p_down)
    phase = (state.action[1] - state.action[0]) / hbar
    cell = state.cell_volume
    return np.array([
        hbar * float(np.sum(coherence * np.cos(phase))) * cell,
        hbar * float(np.sum(coherence * np.sin(phase))) * cell,
        0.5 * hbar * float(np.sum(p_up - p_down)) * cell,
    ])


def free_flow_step(state: SpinEnsemble, mass: float, dt: float) -> SpinEnsemble:
    """One RK4 step of independent classical streaming per component."""
    h = FunctionalHamiltonian(kind="classical", mass_classical=mass)
    new_l = np.empty_like(state.log_density)
    new_s = np.empty_like(state.action)
    for a in range(2):
        l, s = state.log_density[a], state.action[a]
        k1 = field_rates(l, s, state.grids, h)
        k2 = field_rates(l + 0.5 * dt * k1[0], s + 0.5 * dt * k1[1],
                         state.grids, h)
        k3 = field_rates(l + 0.5 * dt * k2[0], s + 0.5 * dt * k2[1],
                         state.grids, h)
        k4 = field_rates(l + dt * k3[0], s + dt * k3[1], state.grids, h)
        new_l[a] = l + (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        new_s[a] = s + (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return SpinEnsemble(state.grids, new_l, new_s)


def spin_observables(state: SpinEnsemble, mass: float, hbar: float = 1.0,
                     rate_dt: float = 1e-3) -> SpinObservables:
    """Angular momenta with flow rates by central differencing.

    The state is advanced one step forward and one backward under the free
    flow; the symmetric difference of each observable gives its bracket with
    the Hamiltonian to O(rate_dt^2).
    """
    if abs(state.mass - 1.0) > 1e-6:
        raise ValidationError("spin state must carry unit total mass")
    forward = free_flow_step(state, mass, rate_dt)
    backward = free_flow_step(state, mass, -rate_dt)

    orbital = orbital_vector(state)
    spin = spin_vector(state, hbar)
    orbital_rate = (orbital_vector(forward) - orbital_vector(backward)) \
        / (2.0 * rate_dt)
    spin_rate = (spin_vector(forward, hbar) - spin_vector(backward, hbar)) \
        / (2.0 * rate_dt)
    return SpinObservables(orbital=orbital, spin=spin, total=orbital + spin,
                           orbital_rate=orbital_rate, spin_rate=spin_rate,
                           total_rate=orbital_rate + spin_rate)


def _wavefunctions(state: SpinEnsemble, hbar: float) -> np.ndarray:
    return np.sqrt(np.exp(state.log_density)) \
        * np.exp(1j * state.action / hbar)


def classical_kinetic_functional(state: SpinEnsemble, mass: float) -> float:
    """Kinetic functional of the streaming picture, sum of P |grad S|^2 / 2M."""
    total = 0.0
    for a in range(2):
        density = np.exp(state.log_density[a])
        grad = _spectral_gradient(state.action[a], state.grids)
        total += float(np.sum(density * sum(g**2 for g in grad)))
    return total * state.cell_volume / (2.0 * mass)


def log_gradient_energy(state: SpinEnsemble, mass: float, hbar: float) -> float:
    """The hbar^2 piece: (hbar^2 / 8M) sum of P |grad log P|^2."""
    total = 0.0
    for a in range(2):
        density = np.exp(state.log_density[a])
        grad = _spectral_gradient(state.log_density[a], state.grids)
        total += float(np.sum(density * sum(g**2 for g in grad)))
    return total * state.cell_volume * hbar**2 / (8.0 * mass)


def quantum_kinetic_energy(state: SpinEnsemble, mass: float, hbar: float) -> float:
    """Full kinetic quadrature (hbar^2 / 2M) sum of |grad psi_a|^2."""
    total = 0.0
    for a in range(2):
        psi = _wavefunctions(state, hbar)[a]
        grad = _spectral_gradient(psi, state.grids)
        total += float(np.sum(sum(np.abs(g)**2 for g in grad)))
    return total * state.cell_volume * hbar**2 / (2.0 * mass)


def fibonacci_axes(count: int = 10) -> np.ndarray:
    """Deterministic spread of unit vectors; the first is the z axis."""
    index = np.arange(count)
    z = 1.0 - 2.0 * index / max(count - 1, 1)
    radius = np.sqrt(np.clip(1.0 - z**2, 0.0, 1.0))
    angle = index * np.pi * (3.0 - np.sqrt(5.0))
    return np.column_stack([radius * np.cos(angle),
                            radius * np.sin(angle), z])


def axis_functional(state: SpinEnsemble, direction: np.ndarray,
                    mass: float, hbar: float) -> float:
    """Classical kinetic functional with quantization axis along direction.

    The components are recombined by the SU(2) basis change onto the new
    axis and the functional is evaluated from the current density, so the
    value is well defined even where a recombined component nearly vanishes.
    """
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    theta = np.arccos(np.clip(direction[2], -1.0, 1.0))
    phi = np.arctan2(direction[1], direction[0])
    u = np.array([
        [np.cos(theta / 2), np.sin(theta / 2) * np.exp(-1j * phi)],
        [-np.sin(theta / 2) * np.exp(1j * phi), np.cos(theta / 2)],
    ])
    psi = _wavefunctions(state, hbar)
    total = 0.0
    for a in range(2):
        rotated = u[a, 0] * psi[0] + u[a, 1] * psi[1]
        density = np.abs(rotated) ** 2
        grad = _spectral_gradient(rotated, state.grids)
        current_sq = sum(hbar**2 * np.imag(np.conj(rotated) * g) ** 2
                         for g in grad)
        keep = density > 1e-14 * density.max()
        total += float(np.sum(current_sq[keep] / density[keep]))
    return total * state.cell_volume / (2.0 * mass)


def axis_functional_spread(state: SpinEnsemble, mass: float, hbar: float,
                           count: int = 10) -> np.ndarray:
    """Functional values over a deterministic fan of quantization axes."""
    return np.array([axis_functional(state, axis, mass, hbar)
                     for axis in fibonacci_axes(count)])


def _product_gaussian(grids, centers, sigma: float) -> np.ndarray:
    from hybridlab.ensemble.experiments import periodized_gaussian
    out = np.ones([g.n for g in grids])
    for axis, (grid, center) in enumerate(zip(grids, centers)):
        view = [1] * len(grids)
        view[axis] = grid.n
        out = out * periodized_gaussian(grid, center, sigma).reshape(view)
    return out


def _default_grids(n: int):
    return tuple(Grid1D(n, -10.0, 10.0, periodic=True) for _ in range(3))


def separable_spin_fixture(n: int = 32):
    """Common spatial profile, fixed population split, constant phase offsets.

    Deliberately off-center and phase-shifted so that no grid parity hides a
    genuine rate; what keeps dJ/dt at zero must be the product structure.
    """
    grids = _default_grids(n)
    profile = _product_gaussian(grids, (0.8, -0.5, 0.3), 2.0)
    x, y, z = _component_positions(grids)
    span = grids[0].length
    wave = 0.4 * (np.sin(2 * np.pi * x / span + 0.7)
                  + np.sin(2 * np.pi * y / span - 0.4)
                  + np.sin(2 * np.pi * z / span + 1.1))
    return SpinEnsemble.from_components(
        grids, (0.7 * profile, 0.3 * profile), (wave + 0.3, wave - 0.2))


def entangled_spin_fixture(n: int = 32, offset: float = 1.5,
                           amplitude: float = 0.4):
    """Components with displaced densities and differently directed phases.

    Off-axis centers and phase shifts break all grid parities, as in the
    separable fixture.
    """
    grids = _default_grids(n)
    up = _product_gaussian(grids, (0.6, -0.4, offset), 2.0)
    down = _product_gaussian(grids, (-0.5, 0.7, -offset), 2.0)
    x, y, _ = _component_positions(grids)
    span = grids[0].length
    s_up = amplitude * np.sin(2 * np.pi * x / span + 0.5)
    s_down = amplitude * np.sin(2 * np.pi * y / span - 0.8)
    return SpinEnsemble.from_components(grids, (0.5 * up, 0.5 * down),
                                        (s_up, s_down))


def random_smooth_spin_fixture(n: int = 32, seed: int = 0, modes: int = 2,
                               amplitude: float = 0.5):
    """Band-limited random (P, S) pairs for quadrature identities."""
    grids = _default_grids(n)
    rng = np.random.default_rng(seed)
    x, y, z = _component_positions(grids)
    span = grids[0].length

    def field():
        out = np.zeros([g.n for g in grids])
        for kx in range(-modes, modes + 1):
            for ky in range(-modes, modes + 1):
                for kz in range(-modes, modes + 1):
                    c, s = rng.normal(size=2) / (1.0 + kx**2 + ky**2 + kz**2)
                    arg = 2 * np.pi * (kx * x + ky * y + kz * z) / span
                    out += c * np.cos(arg) + s * np.sin(arg)
        return amplitude * out

    densities = (np.exp(field()), np.exp(field()))
    actions = (field(), field())
    return SpinEnsemble.from_components(grids, densities, actions)
