"""Grid ensembles evolved through coupled log-density / action fields."""

from hybridlab.ensemble.state import DEFAULT_FLOOR, EnsembleState
from hybridlab.ensemble.hamiltonians import (
    KINDS,
    FunctionalHamiltonian,
    axis_masses,
    energy,
    quantum_axes,
)
from hybridlab.ensemble.evolve import (
    EvolutionDiagnostics,
    cfl_limit,
    evolve,
    field_rates,
)
from hybridlab.ensemble.oracle import (
    propagate_wavefunction,
    velocity_field,
    wavefunction_from_state,
)
from hybridlab.ensemble.experiments import (
    AdvectionReport,
    GhostCouplingReport,
    MadelungReport,
    advection_fixture,
    classical_advection_report,
    classical_kinetic_energy,
    coherent_well_fixture,
    entangled_hybrid_fixture,
    ghost_coupling_experiment,
    madelung_roundtrip,
    periodic_harmonic_well,
    periodized_gaussian,
    separability_defect,
    separable_hybrid_fixture,
    windowed_wave_fixture,
)
from hybridlab.ensemble.marginal import (
    KBinning,
    MarginalRho,
    k_binning_from_state,
    marginal_rho,
)
from hybridlab.ensemble.spin import (
    SpinEnsemble,
    SpinObservables,
    axis_functional,
    axis_functional_spread,
    classical_kinetic_functional,
    entangled_spin_fixture,
    fibonacci_axes,
    free_flow_step,
    log_gradient_energy,
    quantum_kinetic_energy,
    random_smooth_spin_fixture,
    separable_spin_fixture,
    spin_observables,
)

__all__ = [
    "DEFAULT_FLOOR",
    "EnsembleState",
    "KINDS",
    "FunctionalHamiltonian",
    "axis_masses",
    "energy",
    "quantum_axes",
    "EvolutionDiagnostics",
    "cfl_limit",
    "evolve",
    "field_rates",
    "propagate_wavefunction",
    "velocity_field",
    "wavefunction_from_state",
    "AdvectionReport",
    "GhostCouplingReport",
    "MadelungReport",
    "advection_fixture",
    "classical_advection_report",
    "classical_kinetic_energy",
    "coherent_well_fixture",
    "entangled_hybrid_fixture",
    "ghost_coupling_experiment",
    "madelung_roundtrip",
    "periodic_harmonic_well",
    "periodized_gaussian",
    "separability_defect",
    "separable_hybrid_fixture",
    "windowed_wave_fixture",
    "KBinning",
    "MarginalRho",
    "k_binning_from_state",
    "marginal_rho",
    "SpinEnsemble",
    "SpinObservables",
    "axis_functional",
    "axis_functional_spread",
    "classical_kinetic_functional",
    "entangled_spin_fixture",
    "fibonacci_axes",
    "free_flow_step",
    "log_gradient_energy",
    "quantum_kinetic_energy",
    "random_smooth_spin_fixture",
    "separable_spin_fixture",
    "spin_observables",
]
