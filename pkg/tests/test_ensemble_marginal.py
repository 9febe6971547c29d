"""Position-momentum marginal: deposition, overflow, and moment dynamics."""

import numpy as np
import pytest

from hybridlab.errors import ValidationError
from hybridlab.ensemble import (
    EnsembleState,
    KBinning,
    classical_kinetic_energy,
    cfl_limit,
    entangled_hybrid_fixture,
    evolve,
    k_binning_from_state,
    marginal_rho,
    separable_hybrid_fixture,
)
from hybridlab.phase_grid import Grid1D


def test_binning_validation():
    with pytest.raises(ValidationError):
        KBinning(0.0, 1.0, 1)
    with pytest.raises(ValidationError):
        KBinning(1.0, 1.0, 8)


def test_marginal_needs_two_axes():
    grid = Grid1D(32, -1.0, 1.0)
    state = EnsembleState.from_fields((grid,), np.ones(32), np.zeros(32))
    with pytest.raises(ValidationError):
        k_binning_from_state(state)


def test_total_mass_within_tolerance():
    state, _ = separable_hybrid_fixture(48)
    rho = marginal_rho(state, k_binning_from_state(state))
    assert abs(rho.total - 1.0) < 1e-6
    assert np.all(rho.weights >= 0.0)
    assert rho.overflow == 0.0


def test_separable_state_is_a_band_on_the_momentum_curve():
    state, _ = separable_hybrid_fixture(48)
    binning = k_binning_from_state(state)
    rho = marginal_rho(state, binning)
    # row-by-row: everything within one bin of that row's momentum value
    from hybridlab.phase_grid import diff_matrix
    momentum = (diff_matrix(state.grids[0], 1) @ state.action)[:, 0]
    row_mass = state.density.sum(axis=1) * state.cell_volume
    for i, k_i in enumerate(momentum):
        near = np.abs(rho.k_centers - k_i) <= binning.spacing
        assert rho.weights[i, near].sum() == pytest.approx(row_mass[i],
                                                           rel=1e-9)


def test_uniform_momentum_concentrates_at_k0():
    k0 = 0.7
    grids = (Grid1D(48, -2.0, 2.0, periodic=False),
             Grid1D(40, -1.0, 1.0, periodic=False))
    x = grids[0].points[:, np.newaxis] + np.zeros(grids[1].n)
    state = EnsembleState.from_fields(grids, np.exp(-x**2), k0 * x)
    rho = marginal_rho(state, k_binning_from_state(state))
    near = np.abs(rho.k_centers - k0) <= (rho.k_centers[1] - rho.k_centers[0])
    assert rho.weights[:, near].sum() == pytest.approx(1.0, abs=1e-9)


def test_out_of_range_momentum_lands_in_overflow():
    grids = (Grid1D(32, -2.0, 2.0, periodic=False),
             Grid1D(32, -1.0, 1.0, periodic=False))
    x = grids[0].points[:, np.newaxis] + np.zeros(grids[1].n)
    state = EnsembleState.from_fields(grids, np.exp(-x**2), 0.7 * x)
    rho = marginal_rho(state, KBinning(-0.05, 0.05, 8))
    assert rho.overflow == pytest.approx(1.0, abs=1e-9)
    assert abs(rho.total - 1.0) < 1e-6


def test_second_moment_matches_field_kinetic_energy():
    state, h = entangled_hybrid_fixture(64)
    rho = marginal_rho(state, k_binning_from_state(state, bins=256))
    moment_energy = rho.second_k_moment() / (2.0 * h.mass_classical)
    field_energy = classical_kinetic_energy(state, h)
    # cloud-in-cell smears each deposit by at most one bin width
    assert moment_energy == pytest.approx(field_energy, rel=2e-3)


def test_entangled_second_moment_moves_in_time():
    state, h = entangled_hybrid_fixture(64)
    binning = k_binning_from_state(state)
    initial = marginal_rho(state, binning).second_k_moment()
    dt = 0.9 * cfl_limit(state, h)
    later, _ = evolve(state, h, dt, int(np.ceil(0.5 / dt)))
    final = marginal_rho(later, binning).second_k_moment()
    assert abs(final - initial) / initial > 1e-3
    assert abs(marginal_rho(later, binning).total - 1.0) < 1e-6
