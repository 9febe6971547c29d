"""Spin-1/2 ensembles: angular-momentum bookkeeping under free streaming."""

import numpy as np
import pytest

from hybridlab.errors import ValidationError
from hybridlab.ensemble import (
    SpinEnsemble,
    axis_functional_spread,
    classical_kinetic_functional,
    entangled_spin_fixture,
    fibonacci_axes,
    log_gradient_energy,
    quantum_kinetic_energy,
    random_smooth_spin_fixture,
    separable_spin_fixture,
    spin_observables,
)
from hybridlab.phase_grid import Grid1D


def test_component_shapes_checked():
    grids = tuple(Grid1D(8, -1.0, 1.0, periodic=True) for _ in range(3))
    with pytest.raises(ValidationError):
        SpinEnsemble(grids, np.zeros((2, 8, 8)), np.zeros((2, 8, 8)))


def test_open_grids_rejected():
    grids = tuple(Grid1D(8, -1.0, 1.0, periodic=False) for _ in range(3))
    with pytest.raises(ValidationError):
        SpinEnsemble(grids, np.zeros((2, 8, 8, 8)), np.zeros((2, 8, 8, 8)))


def test_unnormalized_state_rejected_by_observables():
    state = separable_spin_fixture(16)
    doubled = SpinEnsemble(state.grids, state.log_density + np.log(2.0),
                           state.action)
    with pytest.raises(ValidationError):
        spin_observables(doubled, mass=1.0)


def test_separable_fixture_conserves_total_angular_momentum():
    obs = spin_observables(separable_spin_fixture(), mass=1.0)
    assert np.linalg.norm(obs.total_rate) < 1e-5


def test_entangled_fixture_conserves_orbital_but_not_spin():
    obs = spin_observables(entangled_spin_fixture(), mass=1.0)
    assert np.linalg.norm(obs.orbital_rate) < 1e-5
    assert np.linalg.norm(obs.spin_rate) > 10.0 * 1e-5


def test_total_rate_is_componentwise_sum():
    obs = spin_observables(entangled_spin_fixture(16), mass=1.0)
    assert np.allclose(obs.total_rate, obs.orbital_rate + obs.spin_rate)
    assert np.allclose(obs.total, obs.orbital + obs.spin)


def test_kinetic_split_identity_on_random_states():
    # full quadrature = streaming part + hbar^2 log-gradient part
    for seed in (0, 1, 2):
        state = random_smooth_spin_fixture(seed=seed)
        lhs = quantum_kinetic_energy(state, mass=1.0, hbar=1.0)
        rhs = classical_kinetic_functional(state, mass=1.0) \
            + log_gradient_energy(state, mass=1.0, hbar=1.0)
        assert abs(lhs - rhs) / lhs < 1e-8


def test_axis_fan_is_deterministic_and_starts_at_z():
    axes = fibonacci_axes(10)
    assert axes.shape == (10, 3)
    assert np.allclose(axes[0], [0.0, 0.0, 1.0])
    assert np.allclose(np.linalg.norm(axes, axis=1), 1.0)


def test_functional_depends_on_axis_only_when_entangled():
    entangled = entangled_spin_fixture()
    values = axis_functional_spread(entangled, mass=1.0, hbar=1.0)
    assert values.shape == (10,)
    direct = classical_kinetic_functional(entangled, mass=1.0)
    assert values[0] == pytest.approx(direct, rel=1e-6)
    assert values.max() - values.min() > 1e-3

    separable = separable_spin_fixture()
    values = axis_functional_spread(separable, mass=1.0, hbar=1.0)
    assert values.max() - values.min() < 1e-9
