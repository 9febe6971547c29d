"""Mean-field hybrid dynamics: classical point coupled to a quantum state.

The classical coordinates follow Hamilton's equations driven by quantum
expectations of the operator-valued Hamiltonian's partials, while the state
vector follows the Schrodinger equation with the Hamiltonian frozen at the
instantaneous classical point:

    dx_i/dt = <dH/dk_i>,   dk_i/dt = -<dH/dx_i>,   dpsi/dt = -(i/hbar) H psi

A single fixed-step RK4 integrator advances the joint (x, k, psi) system;
the squared norm of psi is a conserved quantity of the exact flow, so the
integrator only renormalizes when accumulated rounding pushes it past the
state-validation tolerance, and it records that drift.  A density-matrix
variant evolves rho by the commutator equation with classical forces from
tr(rho dH); comparing it against branch-averaged pure-state runs exposes the
nonlinearity of the mean-field coupling in the density argument.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from hybridlab.errors import NumericalError
from hybridlab.hilbert import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DensityMatrix,
    Operator,
    PureState,
    spin_states,
    trace_distance,
)
from hybridlab.phase_grid import ClassicalPoint

__all__ = [
    "HybridHamiltonian",
    "MeanFieldState",
    "DensityMeanFieldState",
    "meanfield_step",
    "density_meanfield_step",
    "expectation_rate",
    "spin_counterexample",
    "spin_coupling_hamiltonian",
    "spin_along_momentum",
    "run_meanfield",
    "write_trajectory_csv",
    "mixture_divergence",
]

NORM_DRIFT_TOL = 1e-12

_PAULI_TRIPLE = (PAULI_X.entries, PAULI_Y.entries, PAULI_Z.entries)


@dataclass(frozen=True)
class HybridHamiltonian:
    """Operator-valued Hamiltonian H(x, k) with analytic classical partials.

    evaluate(x, k) -> Operator; grad_x(x, k) and grad_k(x, k) -> sequence of
    Operators, one per classical degree of freedom.  All returned operators
    must be Hermitian.
    """

    evaluate: callable
    grad_x: callable
    grad_k: callable


@dataclass(frozen=True)
class MeanFieldState:
    """Joint state of one classical point and one pure quantum state."""

    classical: ClassicalPoint
    quantum: PureState
    time: float = 0.0
    norm_drift: float = 0.0


@dataclass(frozen=True)
class DensityMeanFieldState:
    """Joint state with the quantum sector held as a density matrix."""

    classical: ClassicalPoint
    quantum: DensityMatrix
    time: float = 0.0
    trace_drift: float = 0.0


def _entry_stack(ops) -> np.ndarray:
    return np.stack([op.entries for op in ops])


def _evaluate_hamiltonian(h: HybridHamiltonian, x, k):
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(k))):
        raise NumericalError("classical coordinates overflowed during integration")
    try:
        ham = h.evaluate(x, k).entries
        gx = _entry_stack(h.grad_x(x, k))
        gk = _entry_stack(h.grad_k(x, k))
    except ValueError as exc:
        raise NumericalError(f"hamiltonian evaluation overflowed: {exc}") from exc
    return ham, gx, gk


def _pure_rates(x, k, psi, h: HybridHamiltonian, hbar):
    ham, gx, gk = _evaluate_hamiltonian(h, x, k)
    # Rayleigh quotients keep the classical forces independent of the small
    # norm inflation RK4 stages introduce off the unit sphere
    norm_sq = float(np.vdot(psi, psi).real)
    dx = np.einsum("i,aij,j->a", psi.conj(), gk, psi).real / norm_sq
    dk = -np.einsum("i,aij,j->a", psi.conj(), gx, psi).real / norm_sq
    dpsi = ham @ psi / (1j * hbar)
    return dx, dk, dpsi


def _density_rates(x, k, rho, h: HybridHamiltonian, hbar):
    ham, gx, gk = _evaluate_hamiltonian(h, x, k)
    trace = float(np.trace(rho).real)
    dx = np.einsum("aij,ji->a", gk, rho).real / trace
    dk = -np.einsum("aij,ji->a", gx, rho).real / trace
    drho = (ham @ rho - rho @ ham) / (1j * hbar)
    return dx, dk, drho


def _rk4_triple(x, k, q, rates, dt):
    dx1, dk1, dq1 = rates(x, k, q)
    dx2, dk2, dq2 = rates(x + 0.5 * dt * dx1, k + 0.5 * dt * dk1, q + 0.5 * dt * dq1)
    dx3, dk3, dq3 = rates(x + 0.5 * dt * dx2, k + 0.5 * dt * dk2, q + 0.5 * dt * dq2)
    dx4, dk4, dq4 = rates(x + dt * dx3, k + dt * dk3, q + dt * dq3)
    sixth = dt / 6.0
    return (x + sixth * (dx1 + 2 * dx2 + 2 * dx3 + dx4),
            k + sixth * (dk1 + 2 * dk2 + 2 * dk3 + dk4),
            q + sixth * (dq1 + 2 * dq2 + 2 * dq3 + dq4))


def meanfield_step(state: MeanFieldState, hamiltonian: HybridHamiltonian,
                   dt: float, hbar: float = 1.0) -> MeanFieldState:
    """One RK4 step of the coupled classical-quantum system."""
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    x, k = state.classical.x, state.classical.k
    psi = state.quantum.amplitudes

    def rates(xs, ks, ps):
        return _pure_rates(xs, ks, ps, hamiltonian, hbar)

    with np.errstate(over="ignore", invalid="ignore"):
        x, k, psi = _rk4_triple(x, k, psi, rates, dt)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(k))
            and np.all(np.isfinite(psi.real)) and np.all(np.isfinite(psi.imag))):
        raise NumericalError(f"mean-field step produced non-finite values at t={state.time + dt}")
    drift = abs(float(np.vdot(psi, psi).real) - 1.0)
    if not np.isfinite(drift):
        raise NumericalError(f"state norm overflowed at t={state.time + dt}")
    if drift > NORM_DRIFT_TOL:
        psi = psi / np.sqrt(np.vdot(psi, psi).real)
    return MeanFieldState(classical=ClassicalPoint(x, k),
                          quantum=PureState(psi),
                          time=state.time + dt,
                          norm_drift=drift)


def density_meanfield_step(state: DensityMeanFieldState,
                           hamiltonian: HybridHamiltonian,
                           dt: float, hbar: float = 1.0) -> DensityMeanFieldState:
    """One RK4 step with the quantum sector as a density matrix."""
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    x, k = state.classical.x, state.classical.k
    rho = state.quantum.entries

    def rates(xs, ks, rs):
        return _density_rates(xs, ks, rs, hamiltonian, hbar)

    with np.errstate(over="ignore", invalid="ignore"):
        x, k, rho = _rk4_triple(x, k, rho, rates, dt)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(k))
            and np.all(np.isfinite(rho.real)) and np.all(np.isfinite(rho.imag))):
        raise NumericalError(f"density step produced non-finite values at t={state.time + dt}")
    rho = (rho + rho.conj().T) / 2.0  # project out rounding skew
    trace = float(np.trace(rho).real)
    drift = abs(trace - 1.0)
    if drift > NORM_DRIFT_TOL:
        rho = rho / trace
    return DensityMeanFieldState(classical=ClassicalPoint(x, k),
                                 quantum=DensityMatrix(rho),
                                 time=state.time + dt,
                                 trace_drift=drift)


def _require_analytic(observable) -> None:
    for attr in ("evaluate", "grad_x", "grad_k"):
        if not callable(getattr(observable, attr, None)):
            raise TypeError(f"observable must supply an analytic '{attr}' callable")


def expectation_rate(observable, state: MeanFieldState,
                     hamiltonian: HybridHamiltonian, hbar: float = 1.0) -> float:
    """Instantaneous d<A>/dt along the mean-field flow.

    Commutator term plus the classical bracket of the per-state expectation
    fields, both evaluated at the current (x, k, psi).
    """
    _require_analytic(observable)
    x, k = state.classical.x, state.classical.k
    psi = state.quantum.amplitudes

    def expect(entries):
        return float(np.vdot(psi, entries @ psi).real)

    a = observable.evaluate(x, k).entries
    ham = hamiltonian.evaluate(x, k).entries
    comm = np.vdot(psi, (a @ ham - ham @ a) @ psi) / (1j * hbar)
    rate = float(comm.real)
    a_x = observable.grad_x(x, k)
    a_k = observable.grad_k(x, k)
    h_x = hamiltonian.grad_x(x, k)
    h_k = hamiltonian.grad_k(x, k)
    for i in range(state.classical.dof):
        rate += (expect(a_x[i].entries) * expect(h_k[i].entries)
                 - expect(a_k[i].entries) * expect(h_x[i].entries))
    return rate


def spin_coupling_hamiltonian(coupling: float) -> HybridHamiltonian:
    """H(x, k) = (coupling/2) |x|^2 (k . sigma) on 3 classical dof."""

    def evaluate(x, k):
        xx = float(x @ x)
        entries = sum(k[i] * _PAULI_TRIPLE[i] for i in range(3))
        return Operator(0.5 * coupling * xx * entries)

    def grad_x(x, k):
        spin = sum(k[i] * _PAULI_TRIPLE[i] for i in range(3))
        return [Operator(coupling * x[i] * spin) for i in range(3)]

    def grad_k(x, k):
        xx = float(x @ x)
        return [Operator(0.5 * coupling * xx * _PAULI_TRIPLE[i]) for i in range(3)]

    return HybridHamiltonian(evaluate=evaluate, grad_x=grad_x, grad_k=grad_k)


def spin_along_momentum() -> HybridHamiltonian:
    """Observable k . sigma with its analytic classical partials."""

    def evaluate(x, k):
        return Operator(sum(k[i] * _PAULI_TRIPLE[i] for i in range(3)))

    def grad_x(x, k):
        zero = np.zeros((2, 2))
        return [Operator(zero) for _ in range(3)]

    def grad_k(x, k):
        return [Operator(_PAULI_TRIPLE[i]) for i in range(3)]

    return HybridHamiltonian(evaluate=evaluate, grad_x=grad_x, grad_k=grad_k)


def spin_counterexample(axis, coupling: float, x0, k0,
                        hbar: float = 1.0):
    """Observable-rate asymmetry across the two spin branches.

    Prepares the spin-up and spin-down states along ``axis``, places both at
    the same classical point, and evaluates d<k.sigma>/dt for each branch.
    Returns (branch_rates, mixture_rate) where mixture_rate is the equal-
    weight average.  The mixture rate depends on the branch axis even though
    the 50/50 mixture is the same density matrix for every axis; that
    dependence is the statistical-consistency violation this probe measures.
    """
    axis = np.asarray(axis, dtype=float)
    if abs(float(axis @ axis) - 1.0) > 1e-10:
        raise ValueError("axis must be a unit 3-vector")
    hamiltonian = spin_coupling_hamiltonian(coupling)
    observable = spin_along_momentum()
    point = ClassicalPoint(np.asarray(x0, dtype=float), np.asarray(k0, dtype=float))
    if point.dof != 3:
        raise ValueError("x0 and k0 must be 3-vectors")
    up, down = spin_states(axis)
    rates = tuple(
        expectation_rate(observable, MeanFieldState(point, branch), hamiltonian, hbar)
        for branch in (up, down))
    mixture_rate = 0.5 * (rates[0] + rates[1])
    return rates, mixture_rate


def run_meanfield(state: MeanFieldState, hamiltonian: HybridHamiltonian,
                  dt: float, steps: int, hbar: float = 1.0,
                  observables: dict | None = None, record_every: int = 1):
    """Advance ``steps`` RK4 steps, recording the trajectory.

    Returns a list of record dicts: time, x, k, psi, and the expectation of
    each registered analytic observable.
    """
    observables = observables or {}
    for obs in observables.values():
        _require_analytic(obs)

    def record(s):
        row = {"time": s.time, "x": s.classical.x.copy(), "k": s.classical.k.copy(),
               "psi": s.quantum.amplitudes.copy()}
        for name, obs in observables.items():
            op = obs.evaluate(s.classical.x, s.classical.k)
            row[name] = s.quantum.expectation(op)
        return row

    records = [record(state)]
    for step in range(1, steps + 1):
        state = meanfield_step(state, hamiltonian, dt, hbar)
        if step % record_every == 0:
            records.append(record(state))
    return records


_FMT = "%.17g"


def write_trajectory_csv(records, path) -> None:
    """CSV with columns time, x_i, k_i, Re/Im amplitudes, then observables."""
    if not records:
        raise ValueError("no records to write")
    first = records[0]
    dof = first["x"].size
    dim = first["psi"].size
    extra = [name for name in first if name not in ("time", "x", "k", "psi")]
    header = (["time"]
              + [f"x{i}" for i in range(dof)]
              + [f"k{i}" for i in range(dof)]
              + [f"re_psi{i}" for i in range(dim)]
              + [f"im_psi{i}" for i in range(dim)]
              + extra)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in records:
            cells = [_FMT % row["time"]]
            cells += [_FMT % v for v in row["x"]]
            cells += [_FMT % v for v in row["k"]]
            cells += [_FMT % v for v in row["psi"].real]
            cells += [_FMT % v for v in row["psi"].imag]
            cells += [_FMT % row[name] for name in extra]
            writer.writerow(cells)


def mixture_divergence(axis, coupling: float, x0, k0, dt: float, steps: int,
                       hbar: float = 1.0):
    """Density-level run vs branch-averaged pure runs for the spin coupling.

    Starts the density run from the 50/50 mixture of the two spin branches
    along ``axis`` (the maximally mixed state) and the two pure runs from the
    branches themselves.  Returns (divergence, series) where series is a list
    of (time, distance) with distance = |classical mean mismatch| + trace
    distance of the quantum sectors, and divergence is its maximum.  A zero
    result would mean the density equations reproduce mixture statistics;
    a visibly nonzero result is the nonlinearity witness.
    """
    hamiltonian = spin_coupling_hamiltonian(coupling)
    axis = np.asarray(axis, dtype=float)
    up, down = spin_states(axis)
    point = ClassicalPoint(np.asarray(x0, dtype=float), np.asarray(k0, dtype=float))
    mixed = DensityMatrix((np.outer(up.amplitudes, up.amplitudes.conj())
                           + np.outer(down.amplitudes, down.amplitudes.conj())) / 2.0)
    density_state = DensityMeanFieldState(point, mixed)
    branch_states = [MeanFieldState(point, up), MeanFieldState(point, down)]

    series = []
    for step in range(steps + 1):
        if step > 0:
            density_state = density_meanfield_step(density_state, hamiltonian, dt, hbar)
            branch_states = [meanfield_step(s, hamiltonian, dt, hbar)
                             for s in branch_states]
        mean_x = 0.5 * (branch_states[0].classical.x + branch_states[1].classical.x)
        mean_k = 0.5 * (branch_states[0].classical.k + branch_states[1].classical.k)
        avg_rho = DensityMatrix(
            0.5 * (np.outer(branch_states[0].quantum.amplitudes,
                            branch_states[0].quantum.amplitudes.conj())
                   + np.outer(branch_states[1].quantum.amplitudes,
                              branch_states[1].quantum.amplitudes.conj())))
        classical_gap = float(np.sqrt(
            np.sum((density_state.classical.x - mean_x) ** 2)
            + np.sum((density_state.classical.k - mean_k) ** 2)))
        quantum_gap = trace_distance(density_state.quantum, avg_rho)
        series.append((step * dt, classical_gap + quantum_gap))
    divergence = max(d for _, d in series)
    return divergence, series
