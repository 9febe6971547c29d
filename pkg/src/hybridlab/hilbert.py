"""Finite-dimensional quantum states, operators, and exact propagation.

Everything here is dense numpy on small Hilbert spaces (dim <= 8): operators
with validated hermiticity, pure states, density matrices, convex mixtures,
and a Schrodinger step built from the exact eigendecomposition exponential.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "HERMITIAN_ATOL",
    "Operator",
    "PureState",
    "DensityMatrix",
    "MixtureDecomposition",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "identity",
    "sigma_dot",
    "spin_states",
    "commutator",
    "anticommutator",
    "mixture_to_density",
    "eigendecompose_density",
    "unitary_for",
    "schrodinger_step",
    "trace_distance",
]

HERMITIAN_ATOL = 1e-12
MAX_DIM = 8


def _as_complex(array) -> np.ndarray:
    out = np.array(array, dtype=np.complex128, order="C")
    if not (np.all(np.isfinite(out.real)) and np.all(np.isfinite(out.imag))):
        raise ValueError("entries must be finite")
    return out


@dataclass(frozen=True)
class Operator:
    """A square matrix acting on the quantum sector.

    Parameters
    ----------
    entries : array_like
        Square complex matrix, dimension between 1 and 8.
    hermitian : bool
        Whether the matrix is required (and checked) to be Hermitian.
        Products and commutators of Hermitian operators are generally not
        Hermitian, so derived operators carry ``hermitian=False``.
    """

    entries: np.ndarray
    hermitian: bool = True

    def __post_init__(self):
        entries = _as_complex(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"operator must be square, got shape {entries.shape}")
        if not 1 <= entries.shape[0] <= MAX_DIM:
            raise ValueError(f"operator dimension must be in [1, {MAX_DIM}]")
        if self.hermitian:
            defect = np.max(np.abs(entries - entries.conj().T))
            if defect > HERMITIAN_ATOL:
                raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.entries.conj().T, hermitian=self.hermitian)

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.entries + other.entries,
                        hermitian=self.hermitian and other.hermitian)

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self.entries - other.entries,
                        hermitian=self.hermitian and other.hermitian)

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(self.entries @ other.entries, hermitian=False)

    def __mul__(self, scalar) -> "Operator":
        scalar = complex(scalar)
        stays_hermitian = self.hermitian and scalar.imag == 0.0
        return Operator(self.entries * scalar, hermitian=stays_hermitian)

    __rmul__ = __mul__

    def norm(self) -> float:
        """Spectral norm (largest singular value)."""
        return float(np.linalg.norm(self.entries, 2))


@dataclass(frozen=True)
class PureState:
    """Normalized state vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _as_complex(self.amplitudes)
        if amps.ndim != 1:
            raise ValueError("state must be a vector")
        if not 1 <= amps.size <= MAX_DIM:
            raise ValueError(f"state dimension must be in [1, {MAX_DIM}]")
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > 1e-12:
            raise ValueError(f"state is not normalized (|psi|^2 = {norm_sq!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes) -> "PureState":
        amps = _as_complex(amplitudes)
        norm = np.sqrt(np.vdot(amps, amps).real)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(amps / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def expectation(self, op: Operator) -> float:
        """<psi|A|psi> for Hermitian A (returns the real part)."""
        value = np.vdot(self.amplitudes, op.entries @ self.amplitudes)
        return float(value.real)

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix."""

    entries: np.ndarray

    def __post_init__(self):
        entries = _as_complex(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("density matrix must be square")
        if not 1 <= entries.shape[0] <= MAX_DIM:
            raise ValueError(f"density matrix dimension must be in [1, {MAX_DIM}]")
        if np.max(np.abs(entries - entries.conj().T)) > HERMITIAN_ATOL:
            raise ValueError("density matrix is not Hermitian")
        trace = complex(np.trace(entries))
        if abs(trace - 1.0) > 1e-12:
            raise ValueError(f"density matrix trace is {trace!r}, expected 1")
        eigenvalues = np.linalg.eigvalsh(entries)
        if eigenvalues.min() < -1e-10:
            raise ValueError(f"density matrix has negative eigenvalue {eigenvalues.min():.3e}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def expectation(self, op: Operator) -> float:
        return float(np.trace(self.entries @ op.entries).real)


@dataclass(frozen=True)
class MixtureDecomposition:
    """Convex mixture of pure states: tuples (weight, state)."""

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), s) for w, s in self.components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        dims = {s.dim for _, s in comps}
        if len(dims) != 1:
            raise ValueError("mixture components must share a dimension")
        weights = np.array([w for w, _ in comps])
        if weights.min() < 0.0:
            raise ValueError("mixture weights must be non-negative")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {weights.sum()!r}, expected 1")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return self.components[0][1].dim


# Pauli matrices as module constants, following the usual convention.
PAULI_X = Operator(np.array([[0.0, 1.0], [1.0, 0.0]]))
PAULI_Y = Operator(np.array([[0.0, -1.0j], [1.0j, 0.0]]))
PAULI_Z = Operator(np.array([[1.0, 0.0], [0.0, -1.0]]))


def identity(dim: int) -> Operator:
    return Operator(np.eye(dim))


def sigma_dot(direction) -> Operator:
    """n . sigma for a 3-vector n (not necessarily unit length)."""
    n = np.asarray(direction, dtype=float)
    if n.shape != (3,):
        raise ValueError("direction must be a 3-vector")
    entries = (n[0] * PAULI_X.entries + n[1] * PAULI_Y.entries
               + n[2] * PAULI_Z.entries)
    return Operator(entries)


def spin_states(axis) -> tuple[PureState, PureState]:
    """Eigenstates (up, down) of n.sigma along the given unit axis."""
    n = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0.0:
        raise ValueError("axis must be a nonzero 3-vector")
    eigenvalues, vectors = np.linalg.eigh(sigma_dot(n / norm).entries)
    # eigh sorts ascending: column 0 is spin-down, column 1 spin-up
    return PureState.normalized(vectors[:, 1]), PureState.normalized(vectors[:, 0])


def commutator(a: Operator, b: Operator) -> Operator:
    """[A, B] = AB - BA.  Anti-Hermitian for Hermitian inputs."""
    if a.dim != b.dim:
        raise ValueError("operator dimensions differ")
    return Operator(a.entries @ b.entries - b.entries @ a.entries, hermitian=False)


def anticommutator(a: Operator, b: Operator) -> Operator:
    if a.dim != b.dim:
        raise ValueError("operator dimensions differ")
    return Operator(a.entries @ b.entries + b.entries @ a.entries,
                    hermitian=a.hermitian and b.hermitian)


def mixture_to_density(mixture: MixtureDecomposition) -> DensityMatrix:
    """Sum of weight * |psi><psi| over the mixture components."""
    dim = mixture.dim
    rho = np.zeros((dim, dim), dtype=np.complex128)
    for weight, state in mixture.components:
        rho += weight * state.projector()
    return DensityMatrix(rho)


def eigendecompose_density(rho: DensityMatrix,
                           weight_cutoff: float = 1e-13) -> MixtureDecomposition:
    """Spectral decomposition of a density matrix as an orthonormal mixture.

    Eigenvalues below ``weight_cutoff`` are dropped and the remaining weights
    rescaled so they sum to one; the rebuilt matrix stays within 1e-10 of the
    input.
    """
    eigenvalues, vectors = np.linalg.eigh(rho.entries)
    kept = [(float(w), PureState.normalized(vectors[:, i]))
            for i, w in enumerate(eigenvalues) if w > weight_cutoff]
    if not kept:
        raise ValueError("density matrix has no eigenvalue above the cutoff")
    total = sum(w for w, _ in kept)
    rescaled = tuple((w / total, s) for w, s in kept)
    return MixtureDecomposition(rescaled)


def unitary_for(hamiltonian: Operator, dt: float, hbar: float) -> np.ndarray:
    """exp(-i H dt / hbar) through the eigendecomposition (exact for dim <= 8)."""
    if not hamiltonian.hermitian:
        raise ValueError("Hamiltonian must be Hermitian")
    if hbar <= 0.0:
        raise ValueError("hbar must be positive")
    eigenvalues, vectors = np.linalg.eigh(hamiltonian.entries)
    phases = np.exp(-1j * eigenvalues * dt / hbar)
    return (vectors * phases) @ vectors.conj().T


def schrodinger_step(state: PureState, hamiltonian: Operator, dt: float,
                     hbar: float = 1.0) -> PureState:
    """Propagate |psi> by the exact exponential of a constant Hamiltonian."""
    if state.dim != hamiltonian.dim:
        raise ValueError("state and Hamiltonian dimensions differ")
    return PureState(unitary_for(hamiltonian, dt, hbar) @ state.amplitudes)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """(1/2) tr |a - b|."""
    if a.dim != b.dim:
        raise ValueError("density matrix dimensions differ")
    eigenvalues = np.linalg.eigvalsh(a.entries - b.entries)
    return 0.5 * float(np.abs(eigenvalues).sum())
