"""Operator-valued phase-space observables and the hybrid bracket.

The hybrid bracket combines the quantum commutator with a symmetrized
classical bracket:

    (A, B) = (AB - BA)/(i*hbar) + (Ax Bk - Ak Bx)/2 - (Bx Ak - Bk Ax)/2

where subscripts denote partial derivatives along position/momentum axes and
all products are pointwise matrix products.  The operation is antisymmetric
by construction but it is neither a derivation nor a Lie bracket; this module
provides meters that quantify exactly how badly the product rule and the
cyclic-triple identity fail, plus the two-sector composition defect that
rules out mixing two different Planck constants.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from hybridlab.hilbert import HERMITIAN_ATOL, MAX_DIM, Operator, commutator
from hybridlab.phase_grid import Grid1D, GridField, diff_matrix

__all__ = [
    "HybridObservable",
    "BracketDefectReport",
    "aleksandrov_bracket",
    "measure_defects",
    "nogo_identity_defect",
    "operator_norm_field",
    "max_operator_norm",
    "write_defect_report",
]


def _check_hbar(hbar: float) -> float:
    hbar = float(hbar)
    if not hbar > 0.0:
        raise ValueError("hbar must be a positive real number")
    return hbar


@dataclass(frozen=True)
class HybridObservable:
    """An operator field A(x, k) on a tensor-product phase-space grid.

    ``values`` has shape ``grid_shape + (d, d)``.  The first half of the
    grid axes are positions, the second half the conjugate momenta.
    Hermitian observables are validated pointwise; intermediate products
    carry ``hermitian=False``.
    """

    grids: tuple
    values: np.ndarray
    hermitian: bool = True

    def __post_init__(self):
        grids = tuple(self.grids)
        if len(grids) == 0 or len(grids) % 2 != 0:
            raise ValueError("phase-space domain needs an even, positive number of axes")
        values = np.array(self.values, dtype=np.complex128, order="C")
        expected = tuple(g.n for g in grids)
        if values.ndim != len(grids) + 2 or values.shape[:len(grids)] != expected:
            raise ValueError(f"values shape {values.shape} does not match grids {expected}")
        d = values.shape[-1]
        if values.shape[-2] != d:
            raise ValueError("operator blocks must be square")
        if d > MAX_DIM:
            raise ValueError(f"operator dimension {d} exceeds maximum {MAX_DIM}")
        if not (np.all(np.isfinite(values.real)) and np.all(np.isfinite(values.imag))):
            raise ValueError("observable values must be finite")
        if self.hermitian:
            swapped = np.conj(np.swapaxes(values, -1, -2))
            if not np.allclose(values, swapped, atol=HERMITIAN_ATOL, rtol=0.0):
                raise ValueError("observable marked hermitian has non-hermitian values")
        values.setflags(write=False)
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[-1]

    @property
    def dof(self) -> int:
        return len(self.grids) // 2

    @classmethod
    def from_scalar(cls, grids, scalar_fn, op: Operator) -> "HybridObservable":
        """Build f(x, k) * Op from a scalar function and a fixed operator."""
        grids = tuple(grids)
        mesh = np.meshgrid(*[g.points for g in grids], indexing="ij")
        field = np.asarray(scalar_fn(*mesh), dtype=float)
        field = np.broadcast_to(field, tuple(g.n for g in grids))
        values = field[..., np.newaxis, np.newaxis] * op.entries
        return cls(grids, values, hermitian=op.hermitian)

    @classmethod
    def constant(cls, grids, op: Operator) -> "HybridObservable":
        """An observable with the same operator at every phase point."""
        return cls.from_scalar(grids, lambda *mesh: np.ones_like(mesh[0]), op)

    def matmul(self, other: "HybridObservable") -> "HybridObservable":
        """Pointwise operator product (not symmetrized)."""
        _check_compatible(self, other)
        return HybridObservable(self.grids, self.values @ other.values, hermitian=False)

    def __add__(self, other: "HybridObservable") -> "HybridObservable":
        _check_compatible(self, other)
        return HybridObservable(self.grids, self.values + other.values,
                                hermitian=self.hermitian and other.hermitian)

    def __sub__(self, other: "HybridObservable") -> "HybridObservable":
        _check_compatible(self, other)
        return HybridObservable(self.grids, self.values - other.values,
                                hermitian=self.hermitian and other.hermitian)

    def __neg__(self) -> "HybridObservable":
        return HybridObservable(self.grids, -self.values, hermitian=self.hermitian)


def _check_compatible(a: HybridObservable, b: HybridObservable) -> None:
    if a.grids != b.grids:
        raise ValueError("observables live on different grids")
    if a.dim != b.dim:
        raise ValueError(f"operator dimensions differ: {a.dim} vs {b.dim}")


def _apply_along_axis(matrix: np.ndarray, values: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(values, axis, 0)
    return np.moveaxis(np.tensordot(matrix, moved, axes=([1], [0])), 0, axis)


def _partial(obs: HybridObservable, axis: int) -> np.ndarray:
    matrix = diff_matrix(obs.grids[axis], 1)
    return _apply_along_axis(matrix, obs.values, axis)


def _poisson_product(a_x, a_k, b_x, b_k) -> np.ndarray:
    """sum_i Ax_i Bk_i - Ak_i Bx_i with pointwise matrix products."""
    total = a_x[0] @ b_k[0] - a_k[0] @ b_x[0]
    for i in range(1, len(a_x)):
        total = total + (a_x[i] @ b_k[i] - a_k[i] @ b_x[i])
    return total


def aleksandrov_bracket(a: HybridObservable, b: HybridObservable,
                        hbar: float) -> HybridObservable:
    """Hybrid bracket (A, B); antisymmetric, Hermitian for Hermitian inputs."""
    _check_compatible(a, b)
    hbar = _check_hbar(hbar)
    dof = a.dof
    a_x = [_partial(a, i) for i in range(dof)]
    a_k = [_partial(a, dof + i) for i in range(dof)]
    b_x = [_partial(b, i) for i in range(dof)]
    b_k = [_partial(b, dof + i) for i in range(dof)]
    comm = (a.values @ b.values - b.values @ a.values) / (1j * hbar)
    pois = 0.5 * (_poisson_product(a_x, a_k, b_x, b_k)
                  - _poisson_product(b_x, b_k, a_x, a_k))
    return HybridObservable(a.grids, comm + pois,
                            hermitian=a.hermitian and b.hermitian)


def operator_norm_field(obs: HybridObservable) -> GridField:
    """Spectral norm of the operator at each phase point."""
    norms = np.linalg.norm(obs.values, ord=2, axis=(-2, -1))
    return GridField(obs.grids, norms)


def max_operator_norm(obs: HybridObservable) -> float:
    return float(np.max(np.linalg.norm(obs.values, ord=2, axis=(-2, -1))))


@dataclass(frozen=True)
class BracketDefectReport:
    """How far the hybrid bracket is from a Lie derivation.

    Each entry is the maximum over grid points of the operator spectral norm
    of the corresponding defect field.
    """

    antisymmetry_defect: float
    leibniz_defect: float
    jacobi_defect: float

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not (np.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} must be finite and non-negative")


def measure_defects(a: HybridObservable, b: HybridObservable,
                    c: HybridObservable, hbar: float) -> BracketDefectReport:
    """Antisymmetry, product-rule, and cyclic-triple defects of the bracket.

    The product-rule meter uses the plain pointwise product BC.  Observables
    whose operator parts act on different tensor factors commute, so the
    ordering convention is immaterial exactly where the meter is used to
    probe cross-sector arguments; for same-sector inputs the meter reports
    the defect of the stated, unsymmetrized convention.
    """
    hbar = _check_hbar(hbar)
    ab = aleksandrov_bracket(a, b, hbar)
    ba = aleksandrov_bracket(b, a, hbar)
    antisymmetry = max_operator_norm(ab + ba)

    bc = b.matmul(c)
    leibniz_field = (aleksandrov_bracket(a, bc, hbar)
                     - ab.matmul(c)
                     - b.matmul(aleksandrov_bracket(a, c, hbar)))
    leibniz = max_operator_norm(leibniz_field)

    jacobi_field = (aleksandrov_bracket(a, aleksandrov_bracket(b, c, hbar), hbar)
                    + aleksandrov_bracket(b, aleksandrov_bracket(c, a, hbar), hbar)
                    + aleksandrov_bracket(c, ab, hbar))
    jacobi = max_operator_norm(jacobi_field)

    return BracketDefectReport(antisymmetry_defect=antisymmetry,
                               leibniz_defect=leibniz,
                               jacobi_defect=jacobi)


def nogo_identity_defect(a1: Operator, b1: Operator, a2: Operator, b2: Operator,
                         hbar1: float, hbar2: float) -> float:
    """Norm of the two-sector composition mismatch.

    Measures || [A1,B1]/(i*hbar1) (x) [A2,B2]  -  [A1,B1] (x) [A2,B2]/(i*hbar2) ||.
    Nonzero whenever the two sectors carry different Planck constants and
    neither commutator vanishes; this is the obstruction to assigning the
    sectors independent bracket scales.
    """
    hbar1 = _check_hbar(hbar1)
    hbar2 = _check_hbar(hbar2)
    for op in (a1, b1, a2, b2):
        if not op.hermitian:
            raise ValueError("no-go inputs must be Hermitian operators")
    c1 = commutator(a1, b1).entries
    c2 = commutator(a2, b2).entries
    mismatch = np.kron(c1 / (1j * hbar1), c2) - np.kron(c1, c2 / (1j * hbar2))
    return float(np.linalg.norm(mismatch, ord=2))


def write_defect_report(report: BracketDefectReport, path) -> None:
    """Serialize a defect report to JSON with stable key order."""
    with open(path, "w") as handle:
        json.dump(asdict(report), handle, indent=2, sort_keys=True)
        handle.write("\n")
