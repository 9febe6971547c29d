"""Reference experiments against their oracles: dispersion, transport,
separability, and the entanglement-mediated energy leak."""

import numpy as np
import pytest

from hybridlab.errors import ValidationError
from hybridlab.ensemble import (
    FunctionalHamiltonian,
    cfl_limit,
    classical_advection_report,
    coherent_well_fixture,
    entangled_hybrid_fixture,
    ghost_coupling_experiment,
    madelung_roundtrip,
    separability_defect,
    separable_hybrid_fixture,
    windowed_wave_fixture,
)


@pytest.fixture(scope="module")
def well_report():
    state, h, half_period = coherent_well_fixture(256)
    return madelung_roundtrip(state, h, half_period)


@pytest.fixture(scope="module")
def wave_reports():
    out = {}
    for n in (256, 512):
        state, h, duration = windowed_wave_fixture(n)
        out[n] = madelung_roundtrip(state, h, duration)
    return out


def test_coherent_well_matches_schrodinger_oracle(well_report):
    assert well_report.l2_density < 1e-4
    assert well_report.l2_velocity < 1e-4


def test_coherent_well_regression_margin(well_report):
    # measured 1.1e-6 / 2.2e-5; alert well before the contract bar
    assert well_report.l2_density < 1e-5
    assert well_report.l2_velocity < 1e-4 / 2


def test_coherent_well_conservation(well_report):
    assert well_report.mass_drift < 1e-6
    assert well_report.energy_drift < 1e-5
    assert well_report.floored_fraction == 0.0


def test_free_dispersion_matches_oracle(wave_reports):
    assert wave_reports[256].l2_density < 1e-4
    assert wave_reports[256].l2_velocity < 1e-4


def test_refinement_halving_cuts_error_at_least_4x(wave_reports):
    assert wave_reports[256].l2_density >= 4.0 * wave_reports[512].l2_density
    assert wave_reports[256].l2_velocity >= 4.0 * wave_reports[512].l2_velocity


def test_roundtrip_requires_quantum_kind():
    state, h = separable_hybrid_fixture(16)
    with pytest.raises(ValidationError):
        madelung_roundtrip(state, h, 0.1)


def test_classical_advection_matches_characteristics():
    report = classical_advection_report(256)
    assert report.l2_density < 1e-3
    assert report.mass_drift < 1e-6


def test_separability_preserved_under_free_hybrid_flow():
    state, h = separable_hybrid_fixture(64)
    dt = 0.9 * cfl_limit(state, h)
    defect = separability_defect(state, h, dt, int(np.ceil(1.0 / dt)))
    assert defect < 1e-6


def test_ghost_coupling_entangled_hybrid_drifts_but_control_flat():
    state, h = entangled_hybrid_fixture(64)
    report = ghost_coupling_experiment(state, h, 1.0)
    assert report.relative_drift("control") < 1e-5
    assert report.relative_drift("hybrid") > 1e-3


def test_ghost_coupling_separable_data_both_flat():
    state, h = separable_hybrid_fixture(96)
    report = ghost_coupling_experiment(state, h, 1.0)
    assert report.relative_drift("control") < 1e-6
    assert report.relative_drift("hybrid") < 1e-6


def test_ghost_coupling_needs_hybrid_kind():
    state, h, _ = coherent_well_fixture(32)
    with pytest.raises(ValidationError):
        ghost_coupling_experiment(state, h, 0.1)
