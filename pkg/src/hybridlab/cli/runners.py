"""Scenario implementations behind the command line runner.

Each runner turns validated parameters plus a seed into a ScenarioResult:
a JSON-ready report, one delimited table, and a figure callback.  Runners
only orchestrate library calls; all physics lives in the library modules.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hybridlab.cli import plots
from hybridlab.consistency import (
    AnsatzComponent,
    decomposition_along_axis,
    quantum_consistency_test,
    t4_breakdown,
    taylor_expand,
)
from hybridlab.consistency.quantum import decoupled_hamiltonian
from hybridlab.ensemble import (
    EnsembleState,
    FunctionalHamiltonian,
    axis_functional,
    cfl_limit,
    classical_advection_report,
    classical_kinetic_energy,
    coherent_well_fixture,
    entangled_hybrid_fixture,
    entangled_spin_fixture,
    evolve,
    fibonacci_axes,
    ghost_coupling_experiment,
    k_binning_from_state,
    madelung_roundtrip,
    marginal_rho,
    separability_defect,
    separable_hybrid_fixture,
    separable_spin_fixture,
    spin_observables,
    windowed_wave_fixture,
)
from hybridlab.errors import ValidationError
from hybridlab.expressions import parse_expression
from hybridlab.hilbert import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DensityMatrix,
    Operator,
    PureState,
    identity,
    spin_states,
    trace_distance,
)
from hybridlab.hybrid_brackets import (
    HybridObservable,
    aleksandrov_bracket,
    measure_defects,
    nogo_identity_defect,
)
from hybridlab.meanfield import (
    DensityMeanFieldState,
    HybridHamiltonian,
    MeanFieldState,
    density_meanfield_step,
    meanfield_step,
    mixture_divergence,
    spin_counterexample,
    spin_coupling_hamiltonian,
)
from hybridlab.phase_grid import ClassicalPoint, Grid1D, poisson_bracket, GridField


@dataclass(frozen=True)
class ScenarioResult:
    """Everything a scenario produces before it is written to disk."""

    report: dict
    csv_header: tuple
    csv_rows: tuple
    plot: callable


@dataclass(frozen=True)
class Scenario:
    """Registry entry: name, owning module, summary line, defaults, runner."""

    name: str
    module: str
    summary: str
    defaults: dict
    runner: callable


def _unit(vector) -> np.ndarray:
    v = np.asarray(vector, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValidationError("axis must be a nonzero vector")
    return v / norm


def _random_hermitian(rng, dim: int) -> Operator:
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return Operator(0.5 * (raw + raw.conj().T))


# ---------------------------------------------------------------- brackets


def _run_nogo_identity(params: dict, seed: int) -> ScenarioResult:
    rng = np.random.default_rng(seed)
    samples = int(params["samples"])
    max_dim = int(params["max_dim"])
    h1 = float(params["hbar_first"])
    h2 = float(params["hbar_second"])
    if samples < 1 or max_dim < 2:
        raise ValidationError("samples must be >= 1 and max_dim >= 2")

    pauli = nogo_identity_defect(PAULI_X, PAULI_Y, PAULI_X, PAULI_Y, h1, h2)
    rows = []
    equal_worst = 0.0
    distinct_values = []
    for index in range(samples):
        dim = int(rng.integers(2, max_dim + 1))
        quad = [_random_hermitian(rng, dim) for _ in range(4)]
        equal = nogo_identity_defect(*quad, h1, h1)
        distinct = nogo_identity_defect(*quad, h1, h2)
        equal_worst = max(equal_worst, equal)
        distinct_values.append(distinct)
        rows.append((index, dim, equal, distinct))

    report = {
        "pauli_quadruple_defect": pauli,
        "equal_scale_worst_defect": equal_worst,
        "distinct_scale_min_defect": min(distinct_values),
        "distinct_scale_max_defect": max(distinct_values),
        "samples": samples,
    }

    def plot(fig):
        plots.indexed_points(
            fig,
            [
                ("equal scales", [max(r[2], 1e-17) for r in rows]),
                ("distinct scales", [r[3] for r in rows]),
            ],
            "Two-sector composition mismatch over random Hermitian quadruples",
            "spectral-norm defect",
            logy=True,
        )

    return ScenarioResult(
        report=report,
        csv_header=("sample", "dim", "equal_scale_defect", "distinct_scale_defect"),
        csv_rows=tuple(rows),
        plot=plot,
    )


def _phase_grids(n: int):
    return (Grid1D(n, -1.0, 1.0, periodic=False),
            Grid1D(n, -1.0, 1.0, periodic=False))


def _run_bracket_defects(params: dict, seed: int) -> ScenarioResult:
    n = int(params["grid_points"])
    hbar = float(params["hbar"])
    grids = _phase_grids(n)

    # triple with pre-derived nonzero product-rule and cyclic defects
    a = HybridObservable.from_scalar(grids, lambda x, k: x**2, PAULI_X)
    b = HybridObservable.from_scalar(grids, lambda x, k: k, PAULI_Y)
    c = HybridObservable.from_scalar(grids, lambda x, k: k, PAULI_X)
    counterexample = measure_defects(a, b, c, hbar)

    # classical reduction: identity-valued observables against the scalar bracket
    f = HybridObservable.from_scalar(grids, lambda x, k: x**2, identity(2))
    g = HybridObservable.from_scalar(grids, lambda x, k: x * k, identity(2))
    hybrid_fg = aleksandrov_bracket(f, g, hbar)
    mesh = np.meshgrid(*[gr.points for gr in grids], indexing="ij")
    scalar_f = GridField(grids, mesh[0] ** 2)
    scalar_g = GridField(grids, mesh[0] * mesh[1])
    scalar_bracket = poisson_bracket(scalar_f, scalar_g)
    classical_gap = float(
        np.max(np.abs(hybrid_fg.values[..., 0, 0] - scalar_bracket.values))
    )

    # quantum reduction: constant operators against the scaled commutator
    op_a, op_b = PAULI_X, PAULI_Y
    const_bracket = aleksandrov_bracket(
        HybridObservable.constant(grids, op_a),
        HybridObservable.constant(grids, op_b),
        hbar,
    )
    commutator_scaled = (op_a.entries @ op_b.entries - op_b.entries @ op_a.entries) / (1j * hbar)
    quantum_gap = float(np.max(np.abs(const_bracket.values - commutator_scaled)))

    report = {
        "antisymmetry_defect": counterexample.antisymmetry_defect,
        "leibniz_defect": counterexample.leibniz_defect,
        "jacobi_defect": counterexample.jacobi_defect,
        "classical_reduction_gap": classical_gap,
        "quantum_reduction_gap": quantum_gap,
    }
    rows = tuple((name, value) for name, value in report.items())

    def plot(fig):
        plots.metric_bars(
            fig,
            [r[0] for r in rows],
            [r[1] for r in rows],
            "Bracket defects: product rule and cyclic identity fail, reductions hold",
        )

    return ScenarioResult(
        report=report,
        csv_header=("defect", "value"),
        csv_rows=rows,
        plot=plot,
    )


# --------------------------------------------------------------- meanfield


def _run_spin_meanfield(params: dict, seed: int) -> ScenarioResult:
    rng = np.random.default_rng(seed)
    count = int(params["axes"])
    coupling = float(params["coupling"])
    x0 = np.asarray(params["x0"], dtype=float)
    k0 = np.asarray(params["k0"], dtype=float)
    if count < 3:
        raise ValidationError("need at least the three coordinate axes")

    axes = [np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]),
            np.array([0.0, 0.0, 1.0])]
    while len(axes) < count:
        axes.append(_unit(rng.normal(size=3)))

    rows = []
    gaps = []
    mixture_rates = []
    for axis in axes:
        (rate_up, rate_down), mixture = spin_counterexample(axis, coupling, x0, k0)
        predicted = -coupling * float(axis @ x0) * float(axis @ k0)
        rows.append((axis[0], axis[1], axis[2], rate_up, rate_down,
                     mixture, predicted))
        gaps.append(abs(mixture - predicted))
        mixture_rates.append(mixture)

    report = {
        "axes": count,
        "max_formula_gap": max(gaps),
        "mixture_rate_spread": max(mixture_rates) - min(mixture_rates),
        "first_axis_mixture_rate": mixture_rates[0],
    }

    def plot(fig):
        plots.indexed_points(
            fig,
            [("mixture rate", mixture_rates),
             ("predicted", [r[6] for r in rows])],
            "Mixture rate depends on the branch axis of an axis-free density matrix",
            "d<k.sigma>/dt",
        )

    return ScenarioResult(
        report=report,
        csv_header=("axis_x", "axis_y", "axis_z", "rate_up", "rate_down",
                    "mixture_rate", "predicted"),
        csv_rows=tuple(rows),
        plot=plot,
    )


def _run_density_nonlinearity(params: dict, seed: int) -> ScenarioResult:
    coupling = float(params["coupling"])
    duration = float(params["duration"])
    dt = float(params["dt"])
    axis = _unit(params["axis"])
    x0 = np.asarray(params["x0"], dtype=float)
    k0 = np.asarray(params["k0"], dtype=float)
    steps = int(round(duration / dt))
    if steps < 1:
        raise ValidationError("duration must cover at least one step")

    divergence, series = mixture_divergence(axis, coupling, x0, k0, dt, steps)

    # control: a pure state evolved as a density matrix tracks the state run
    hamiltonian = spin_coupling_hamiltonian(coupling)
    up, _ = spin_states(axis)
    point = ClassicalPoint(x0, k0)
    density_state = DensityMeanFieldState(point, DensityMatrix(up.projector()))
    pure_state = MeanFieldState(point, up)
    control_gap = 0.0
    for _ in range(steps):
        density_state = density_meanfield_step(density_state, hamiltonian, dt)
        pure_state = meanfield_step(pure_state, hamiltonian, dt)
        classical_gap = float(
            np.sqrt(np.sum((density_state.classical.x - pure_state.classical.x) ** 2)
                    + np.sum((density_state.classical.k - pure_state.classical.k) ** 2)))
        quantum_gap = trace_distance(
            density_state.quantum, DensityMatrix(pure_state.quantum.projector()))
        control_gap = max(control_gap, classical_gap + quantum_gap)

    report = {
        "divergence": divergence,
        "pure_control_gap": control_gap,
        "duration": duration,
    }

    def plot(fig):
        plots.series_lines(
            fig,
            [t for t, _ in series],
            [("density run vs branch average", [d for _, d in series])],
            "Density-level evolution leaves the branch-averaged trajectory",
            "time",
            "distance",
        )

    return ScenarioResult(
        report=report,
        csv_header=("time", "distance"),
        csv_rows=tuple(series),
        plot=plot,
    )


def _coupled_oscillator() -> HybridHamiltonian:
    """Harmonic classical sector with linear position coupling to sigma_x."""

    def evaluate(x, k):
        return Operator(0.5 * (x[0] ** 2 + k[0] ** 2) * np.eye(2)
                        + 0.3 * x[0] * PAULI_X.entries + 0.5 * PAULI_Z.entries)

    def grad_x(x, k):
        return [Operator(x[0] * np.eye(2) + 0.3 * PAULI_X.entries)]

    def grad_k(x, k):
        return [Operator(k[0] * np.eye(2))]

    return HybridHamiltonian(evaluate=evaluate, grad_x=grad_x, grad_k=grad_k)


def _run_meanfield_conservation(params: dict, seed: int) -> ScenarioResult:
    steps = int(params["steps"])
    dt = float(params["dt"])
    record_every = int(params["record_every"])
    if steps < 1 or record_every < 1:
        raise ValidationError("steps and record_every must be positive")

    h = _coupled_oscillator()
    state = MeanFieldState(
        ClassicalPoint(np.array([1.0]), np.array([0.0])),
        PureState.normalized([1.0, 1.0]),
    )
    energy0 = state.quantum.expectation(h.evaluate(state.classical.x, state.classical.k))
    rows = [(0.0, energy0, 0.0)]
    worst_energy = 0.0
    worst_norm = 0.0
    for step in range(1, steps + 1):
        state = meanfield_step(state, h, dt)
        energy = state.quantum.expectation(h.evaluate(state.classical.x, state.classical.k))
        worst_energy = max(worst_energy, abs(energy - energy0))
        worst_norm = max(worst_norm, state.norm_drift)
        if step % record_every == 0:
            rows.append((state.time, energy, state.norm_drift))

    report = {
        "steps": steps,
        "dt": dt,
        "max_energy_drift": worst_energy,
        "max_norm_drift_per_step": worst_norm,
    }

    def plot(fig):
        plots.series_lines(
            fig,
            [r[0] for r in rows],
            [("|<H> - <H>_0|", [max(abs(r[1] - energy0), 1e-18) for r in rows])],
            "Mean-field energy drift over a long RK4 run",
            "time",
            "absolute drift",
            logy=True,
        )

    return ScenarioResult(
        report=report,
        csv_header=("time", "energy", "norm_drift"),
        csv_rows=tuple(rows),
        plot=plot,
    )


# ---------------------------------------------------------------- ensemble


def _metric_result(report_dict: dict, title: str) -> ScenarioResult:
    rows = tuple((name, value) for name, value in report_dict.items())

    def plot(fig):
        plots.metric_bars(fig, [r[0] for r in rows],
                          [float(r[1]) for r in rows], title)

    return ScenarioResult(
        report=report_dict,
        csv_header=("metric", "value"),
        csv_rows=rows,
        plot=plot,
    )


def _run_madelung_roundtrip(params: dict, seed: int) -> ScenarioResult:
    n = int(params["grid_points"])
    state, h, duration = coherent_well_fixture(n)
    report = madelung_roundtrip(state, h, duration)
    return _metric_result(
        report.as_dict(),
        "Coupled density/phase grid run vs split-step reference (well crossing)",
    )


def _run_free_dispersion(params: dict, seed: int) -> ScenarioResult:
    n = int(params["grid_points"])
    state, h, duration = windowed_wave_fixture(n)
    report = madelung_roundtrip(state, h, duration)
    return _metric_result(
        report.as_dict(),
        "Dispersing wave packet: grid run vs split-step reference",
    )


def _run_classical_advection(params: dict, seed: int) -> ScenarioResult:
    n = int(params["grid_points"])
    duration = float(params["duration"])
    dt = float(params["dt"])
    report = classical_advection_report(n=n, duration=duration, dt=dt)
    return _metric_result(
        report.as_dict(),
        "Classical density transport vs characteristics",
    )


def _run_separability(params: dict, seed: int) -> ScenarioResult:
    n = int(params["grid_points"])
    duration = float(params["duration"])
    checks = int(params["checks"])
    state, h = separable_hybrid_fixture(n)
    dt = 0.9 * cfl_limit(state, h)
    steps = int(np.ceil(duration / dt))
    defect = separability_defect(state, h, dt, steps, checks=checks)
    return _metric_result(
        {"separability_defect": defect, "duration": duration, "grid_points": n},
        "Product form preserved by uncoupled hybrid evolution",
    )


def _run_ghost_coupling(params: dict, seed: int) -> ScenarioResult:
    n = int(params["grid_points"])
    n_separable = int(params["separable_grid_points"])
    duration = float(params["duration"])
    entangled_state, entangled_h = entangled_hybrid_fixture(n)
    entangled = ghost_coupling_experiment(entangled_state, entangled_h, duration)
    separable_state, separable_h = separable_hybrid_fixture(n_separable)
    separable = ghost_coupling_experiment(separable_state, separable_h, duration)

    report = {
        "entangled_hybrid_drift": entangled.relative_drift("hybrid"),
        "entangled_control_drift": entangled.relative_drift("control"),
        "separable_hybrid_drift": separable.relative_drift("hybrid"),
        "separable_control_drift": separable.relative_drift("control"),
        "duration": duration,
    }
    rows = tuple(
        (t, eh, ec)
        for t, eh, ec in zip(entangled.times, entangled.kinetic_hybrid,
                             entangled.kinetic_control)
    )

    def plot(fig):
        plots.series_lines(
            fig,
            [r[0] for r in rows],
            [("entangled, quantum pressure on", [r[1] for r in rows]),
             ("entangled, pressure off", [r[2] for r in rows])],
            "Classical kinetic energy with the interaction switched off",
            "time",
            "kinetic energy",
        )

    return ScenarioResult(
        report=report,
        csv_header=("time", "kinetic_hybrid", "kinetic_control"),
        csv_rows=rows,
        plot=plot,
    )


def _run_marginal_moments(params: dict, seed: int) -> ScenarioResult:
    n = int(params["grid_points"])
    bins = int(params["bins"])
    duration = float(params["duration"])
    state, h = entangled_hybrid_fixture(n)
    binning = k_binning_from_state(state, bins=bins)
    initial = marginal_rho(state, binning)
    dt = 0.9 * cfl_limit(state, h)
    steps = int(np.ceil(duration / dt))
    final_state, _ = evolve(state, h, dt, steps)
    final = marginal_rho(final_state, binning)

    initial_profile = initial.weights.sum(axis=0)
    final_profile = final.weights.sum(axis=0)
    rows = tuple(
        (center, wi, wf)
        for center, wi, wf in zip(binning.centers, initial_profile, final_profile)
    )
    report = {
        "total_initial": initial.total,
        "total_final": final.total,
        "overflow_final": final.overflow,
        "second_moment_initial": initial.second_k_moment(),
        "second_moment_final": final.second_k_moment(),
        "kinetic_initial": classical_kinetic_energy(state, h),
        "kinetic_final": classical_kinetic_energy(final_state, h),
    }

    def plot(fig):
        plots.series_lines(
            fig,
            [r[0] for r in rows],
            [("initial", initial_profile), ("final", final_profile)],
            "Classical momentum marginal before and after hybrid evolution",
            "momentum bin center",
            "mass per bin",
        )

    return ScenarioResult(
        report=report,
        csv_header=("k_center", "mass_initial", "mass_final"),
        csv_rows=rows,
        plot=plot,
    )


def _run_spin_angular_momentum(params: dict, seed: int) -> ScenarioResult:
    n = int(params["grid_points"])
    rate_dt = float(params["rate_dt"])
    separable = spin_observables(separable_spin_fixture(n), mass=1.0,
                                 rate_dt=rate_dt)
    entangled = spin_observables(entangled_spin_fixture(n), mass=1.0,
                                 rate_dt=rate_dt)

    rows = []
    for label, obs in (("separable", separable), ("entangled", entangled)):
        for i, comp in enumerate("xyz"):
            rows.append((label, comp, obs.orbital[i], obs.spin[i],
                         obs.total[i], obs.orbital_rate[i], obs.spin_rate[i],
                         obs.total_rate[i]))

    report = {
        "separable_total_rate": float(np.max(np.abs(separable.total_rate))),
        "entangled_orbital_rate": float(np.max(np.abs(entangled.orbital_rate))),
        "entangled_spin_rate": float(np.max(np.abs(entangled.spin_rate))),
    }

    def plot(fig):
        plots.metric_bars(
            fig,
            ["separable |dJ/dt|", "entangled |dL/dt|", "entangled |dS/dt|"],
            [report["separable_total_rate"], report["entangled_orbital_rate"],
             report["entangled_spin_rate"]],
            "Orbital momentum conserved, spin not, under the free spin flow",
        )

    return ScenarioResult(
        report=report,
        csv_header=("fixture", "component", "orbital", "spin", "total",
                    "orbital_rate", "spin_rate", "total_rate"),
        csv_rows=tuple(rows),
        plot=plot,
    )


def _run_axis_spread(params: dict, seed: int) -> ScenarioResult:
    n = int(params["grid_points"])
    count = int(params["axes"])
    state = entangled_spin_fixture(n)
    axes = fibonacci_axes(count)
    values = np.array([axis_functional(state, axis, 1.0, 1.0) for axis in axes])
    rows = tuple(
        (axis[0], axis[1], axis[2], value) for axis, value in zip(axes, values)
    )
    report = {
        "axes": count,
        "spread": float(values.max() - values.min()),
        "first_axis_value": float(values[0]),
    }

    def plot(fig):
        plots.indexed_points(
            fig,
            [("functional value", values)],
            "Spin kinetic functional depends on the quantization axis",
            "functional value",
        )

    return ScenarioResult(
        report=report,
        csv_header=("axis_x", "axis_y", "axis_z", "functional"),
        csv_rows=rows,
        plot=plot,
    )


# ------------------------------------------------------------- consistency


def _run_taylor_coefficients(params: dict, seed: int) -> ScenarioResult:
    rng = np.random.default_rng(seed)
    order = int(params["order"])
    count = int(params["points"])
    profile = str(params["profile"])
    kappa = float(params["kappa"])
    coupling = float(params["coupling"])
    mass_c = float(params["mass_classical"])
    mass_q = float(params["mass_quantum"])
    hbar = float(params["hbar"])

    points = rng.uniform(-2.0, 2.0, size=(count, 2))
    component = AnsatzComponent(
        log_profile=profile, kappa=kappa, coupling=coupling,
        mass_classical=mass_c, mass_quantum=mass_q, hbar=hbar,
    )
    table = taylor_expand(component, order, points)

    profile_expr = parse_expression(profile)
    slope = profile_expr.diff("x")
    x = points[:, 0]
    q = points[:, 1]
    slope_values = np.broadcast_to(
        np.asarray(slope.evaluate({"x": x}), dtype=float), x.shape
    )
    predicted = {
        "log_order2": (coupling / mass_c) * slope_values * q
        + (coupling * kappa / mass_q) * x,
        "action_order1": hbar**2 * kappa**2 / (8.0 * mass_q) - coupling * x * q,
        "action_order3": (hbar**2 * kappa * coupling / (4.0 * mass_q * mass_c))
        * slope_values
        - (coupling**2 / mass_c) * q**2
        - (coupling**2 / mass_q) * x**2,
    }
    gaps = {
        "log_order2_gap": float(np.max(np.abs(table.log_derivative(2) - predicted["log_order2"]))),
        "action_order1_gap": float(np.max(np.abs(table.action_derivative(1) - predicted["action_order1"]))),
        "action_order3_gap": float(np.max(np.abs(table.action_derivative(3) - predicted["action_order3"]))),
    }
    parity = max(
        float(np.max(np.abs(table.log_derivative(k)))) for k in (1, 3)
    )
    parity = max(parity, *(
        float(np.max(np.abs(table.action_derivative(k)))) for k in (0, 2, 4)
    ))

    rows = []
    for i in range(count):
        for k in range(order + 1):
            rows.append((x[i], q[i], k,
                         table.log_derivative(k)[i],
                         table.action_derivative(k)[i]))

    report = {"parity_max": parity, **gaps, "points": count, "order": order}

    def plot(fig):
        named = [
            (f"order {k}", [abs(table.log_derivative(k)[i]) + 1e-17 for i in range(count)])
            for k in range(0, order + 1, 2)
        ]
        plots.indexed_points(
            fig, named,
            "Log-density jet magnitudes across sample points",
            "|coefficient|",
            logy=True,
        )

    return ScenarioResult(
        report=report,
        csv_header=("x", "q", "order", "log_derivative", "action_derivative"),
        csv_rows=tuple(rows),
        plot=plot,
    )


def _run_t4_breakdown(params: dict, seed: int) -> ScenarioResult:
    rng = np.random.default_rng(seed)
    epsilon = float(params["epsilon"])
    kappa = float(params["kappa"])
    coupling = float(params["coupling"])
    mass_c = float(params["mass_classical"])
    mass_q = float(params["mass_quantum"])
    count = int(params["points"])
    if count < 1:
        raise ValidationError("need at least one sample point")

    points = [(np.pi / 4.0, 0.0)]
    while len(points) < count:
        points.append((float(rng.uniform(-np.pi, np.pi)), float(rng.uniform(-1.0, 1.0))))

    up = f"log(1 + {epsilon!r} * sin(x))"
    down = f"log(1 - {epsilon!r} * sin(x))"
    report_obj = t4_breakdown(
        [(1.0, "0")],
        [(0.5, up), (0.5, down)],
        kappa=kappa, coupling=coupling,
        mass_classical=mass_c, mass_quantum=mass_q,
        points=points,
    )

    # independent prediction: per-branch log-derivative sums via symbolic
    # differentiation, scaled by the jet prefactor
    xs = np.array([p[0] for p in points])
    qs = np.array([p[1] for p in points])
    prediction = np.zeros(len(points))
    for weight, branch in ((0.5, up), (0.5, down)):
        expr = parse_expression(branch)
        d1 = expr.diff("x")
        d2 = d1.diff("x")
        d3 = d2.diff("x")
        density = np.exp(np.asarray(parse_expression(branch).evaluate({"x": xs})))
        prediction += weight * density * (
            np.asarray(d1.evaluate({"x": xs})) * np.asarray(d2.evaluate({"x": xs}))
            + np.asarray(d3.evaluate({"x": xs}))
        )
    prediction *= -(kappa * coupling / (4.0 * mass_q * mass_c**2)) * np.exp(kappa * qs)

    payload = report_obj.as_dict()
    payload["predicted_hbar2_difference"] = prediction.tolist()
    payload["max_prediction_gap"] = float(
        np.max(np.abs(report_obj.hbar2_difference - prediction))
    )

    rows = tuple(
        (xs[i], qs[i],
         report_obj.hbar0_first[i], report_obj.hbar0_second[i],
         report_obj.hbar2_first[i], report_obj.hbar2_second[i],
         report_obj.hbar2_difference[i], prediction[i])
        for i in range(len(points))
    )

    def plot(fig):
        order = np.argsort(xs)
        plots.series_lines(
            fig,
            xs[order],
            [("single profile", report_obj.hbar2_first[order]),
             ("split profile", report_obj.hbar2_second[order]),
             ("difference", report_obj.hbar2_difference[order])],
            "Quantum part of the fourth density derivative splits equal densities",
            "x",
            "coefficient of hbar^2",
        )

    return ScenarioResult(
        report=payload,
        csv_header=("x", "q", "hbar0_first", "hbar0_second", "hbar2_first",
                    "hbar2_second", "hbar2_difference", "predicted_difference"),
        csv_rows=rows,
        plot=plot,
    )


def _run_quantum_consistency(params: dict, seed: int) -> ScenarioResult:
    duration = float(params["duration"])
    dt = float(params["dt"])
    coupling = float(params["coupling"])
    rho = DensityMatrix(0.5 * np.eye(2))
    decompositions = [
        decomposition_along_axis((1.0, 0.0, 0.0)),
        decomposition_along_axis((0.0, 0.0, 1.0)),
    ]
    x0 = (1.0, 0.0, 0.0)
    k0 = (1.0, 0.0, 0.0)

    coupled = quantum_consistency_test(
        rho, decompositions, spin_coupling_hamiltonian(coupling),
        x0, k0, duration, dt=dt,
    )
    decoupled = quantum_consistency_test(
        rho, decompositions, decoupled_hamiltonian(), x0, k0, duration, dt=dt,
    )
    identical = quantum_consistency_test(
        rho, [decompositions[0], decompositions[0]],
        spin_coupling_hamiltonian(coupling), x0, k0, duration, dt=dt,
    )

    report = {
        "metric_coupled": coupled.metric,
        "metric_decoupled": decoupled.metric,
        "metric_identical": identical.metric,
        "duration": duration,
    }

    header = ["time"]
    for d_index in range(2):
        header.extend(f"dec{d_index}_{name}" for name in coupled.columns)
    rows = []
    for t_index, time in enumerate(coupled.times):
        row = [time]
        for d_index in range(2):
            row.extend(coupled.averages[d_index, t_index])
        rows.append(tuple(row))

    def plot(fig):
        series = []
        for d_index, label in ((0, "x-axis branches"), (1, "z-axis branches")):
            column = list(coupled.columns).index("k_0")
            series.append((label, coupled.averages[d_index, :, column]))
        plots.series_lines(
            fig,
            coupled.times,
            series,
            "Averaged momentum under two decompositions of the same density matrix",
            "time",
            "k_0 average",
        )

    return ScenarioResult(
        report=report,
        csv_header=tuple(header),
        csv_rows=tuple(rows),
        plot=plot,
    )


SCENARIO_SPECS = (
    Scenario(
        name="nogo-identity",
        module="hybrid_brackets",
        summary="Two Planck scales break bracket composition on random Hermitian quadruples",
        defaults={"samples": 100, "max_dim": 4, "hbar_first": 1.0, "hbar_second": 2.0},
        runner=_run_nogo_identity,
    ),
    Scenario(
        name="bracket-defects",
        module="hybrid_brackets",
        summary="Hybrid bracket keeps antisymmetry but fails product rule and cyclic identity",
        defaults={"grid_points": 16, "hbar": 1.0},
        runner=_run_bracket_defects,
    ),
    Scenario(
        name="spin-meanfield",
        module="meanfield",
        summary="Mixture observable rate depends on the branch axis chosen for an unpolarized spin",
        defaults={"axes": 10, "coupling": 1.0, "x0": [1.0, 0.0, 0.0], "k0": [1.0, 0.0, 0.0]},
        runner=_run_spin_meanfield,
    ),
    Scenario(
        name="density-nonlinearity",
        module="meanfield",
        summary="Density-matrix evolution drifts from the branch-averaged pure runs",
        defaults={"coupling": 1.0, "duration": 1.0, "dt": 0.001,
                  "axis": [1.0, 0.0, 0.0], "x0": [1.0, 0.0, 0.0], "k0": [1.0, 0.0, 0.0]},
        runner=_run_density_nonlinearity,
    ),
    Scenario(
        name="meanfield-conservation",
        module="meanfield",
        summary="Energy and state norm stay put over a long coupled RK4 run",
        defaults={"steps": 10000, "dt": 0.001, "record_every": 100},
        runner=_run_meanfield_conservation,
    ),
    Scenario(
        name="madelung-roundtrip",
        module="ensemble",
        summary="Grid density/phase run matches a split-step reference across a potential well",
        defaults={"grid_points": 256},
        runner=_run_madelung_roundtrip,
    ),
    Scenario(
        name="free-dispersion",
        module="ensemble",
        summary="Dispersing wave packet against the split-step reference",
        defaults={"grid_points": 256},
        runner=_run_free_dispersion,
    ),
    Scenario(
        name="classical-advection",
        module="ensemble",
        summary="Zero-hbar transport agrees with characteristic curves",
        defaults={"grid_points": 256, "duration": 1.0, "dt": 0.005},
        runner=_run_classical_advection,
    ),
    Scenario(
        name="separability",
        module="ensemble",
        summary="Uncoupled hybrid flow keeps product states product",
        defaults={"grid_points": 64, "duration": 1.0, "checks": 8},
        runner=_run_separability,
    ),
    Scenario(
        name="ghost-coupling",
        module="ensemble",
        summary="Entangled ensembles trade classical kinetic energy with no interaction term",
        defaults={"grid_points": 64, "separable_grid_points": 96, "duration": 1.0},
        runner=_run_ghost_coupling,
    ),
    Scenario(
        name="marginal-moments",
        module="ensemble",
        summary="Momentum marginal bookkeeping: unit mass and kinetic moments",
        defaults={"grid_points": 64, "bins": 64, "duration": 0.5},
        runner=_run_marginal_moments,
    ),
    Scenario(
        name="spin-angular-momentum",
        module="ensemble",
        summary="Free spin flow conserves orbital angular momentum but not spin",
        defaults={"grid_points": 32, "rate_dt": 0.001},
        runner=_run_spin_angular_momentum,
    ),
    Scenario(
        name="axis-spread",
        module="ensemble",
        summary="Spin kinetic functional varies with the quantization axis",
        defaults={"grid_points": 32, "axes": 10},
        runner=_run_axis_spread,
    ),
    Scenario(
        name="taylor-coefficients",
        module="consistency",
        summary="Symbolic short-time jets match the closed-form low-order coefficients",
        defaults={"order": 4, "points": 20, "profile": "x^2", "kappa": 1.0,
                  "coupling": 1.0, "mass_classical": 1.0, "mass_quantum": 1.0,
                  "hbar": 1.0},
        runner=_run_taylor_coefficients,
    ),
    Scenario(
        name="t4-breakdown",
        module="consistency",
        summary="Fourth time derivative of the density distinguishes equal-density mixtures",
        defaults={"epsilon": 0.5, "kappa": 1.0, "coupling": 1.0,
                  "mass_classical": 1.0, "mass_quantum": 1.0, "points": 5},
        runner=_run_t4_breakdown,
    ),
    Scenario(
        name="quantum-consistency",
        module="consistency",
        summary="Mean-field averages depend on the decomposition of the density matrix",
        defaults={"duration": 0.2, "dt": 0.001, "coupling": 1.0},
        runner=_run_quantum_consistency,
    ),
)
