"""Uniform grids, high-order finite differences, and classical dynamics.

Derivatives use 4th-order-accurate stencils: centered in the interior (and
everywhere on periodic grids, via wrap-around), one-sided near the edges of
non-periodic grids.  Interior stencils are exact for polynomials up to
degree 4.  A Poisson bracket and an RK4 characteristics integrator complete
the classical toolbox.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "Grid1D",
    "GridField",
    "ClassicalPoint",
    "AnalyticHamiltonian",
    "diff_matrix",
    "derivative",
    "poisson_bracket",
    "evolve_characteristics",
    "write_csv",
    "read_csv",
]

MIN_POINTS = 8

# Centered stencil coefficients (offsets symmetric around 0), 4th-order
# accurate; divided by dx**order on use.
_CENTERED = {
    1: (2, np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0),
    2: (2, np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0),
    3: (3, np.array([1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0]) / 8.0),
    4: (3, np.array([-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0]) / 6.0),
}


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1-D grid.

    Periodic grids exclude ``x_max`` (the wrap point); non-periodic grids
    include both endpoints.
    """

    n: int
    x_min: float
    x_max: float
    periodic: bool = True

    def __post_init__(self):
        if self.n < MIN_POINTS:
            raise ValueError(f"grid needs at least {MIN_POINTS} points, got {self.n}")
        if not self.x_max > self.x_min:
            raise ValueError("grid requires x_max > x_min")

    @property
    def spacing(self) -> float:
        span = self.x_max - self.x_min
        return span / self.n if self.periodic else span / (self.n - 1)

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.spacing * np.arange(self.n)

    @property
    def length(self) -> float:
        """Integration length (period for periodic grids, span otherwise)."""
        return self.x_max - self.x_min


@dataclass(frozen=True)
class GridField:
    """Real or complex scalar field sampled on a tensor product of grids."""

    grids: tuple
    values: np.ndarray

    def __post_init__(self):
        grids = tuple(self.grids)
        values = np.asarray(self.values)
        expected = tuple(g.n for g in grids)
        if values.shape != expected:
            raise ValueError(f"values shape {values.shape} does not match grids {expected}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grids, fn) -> "GridField":
        """Sample ``fn`` on the meshgrid of ``grids`` (indexing='ij')."""
        grids = tuple(grids)
        mesh = np.meshgrid(*[g.points for g in grids], indexing="ij")
        return cls(grids, np.asarray(fn(*mesh), dtype=float))

    @property
    def cell_volume(self) -> float:
        vol = 1.0
        for g in self.grids:
            vol *= g.spacing
        return vol

    def integral(self) -> float:
        """Midpoint quadrature over the whole domain."""
        return float(np.sum(self.values).real * self.cell_volume)


@dataclass(frozen=True)
class ClassicalPoint:
    """A single phase-space point (x, k), each a d-vector."""

    x: np.ndarray
    k: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        k = np.atleast_1d(np.asarray(self.k, dtype=float))
        if x.shape != k.shape or x.ndim != 1:
            raise ValueError("x and k must be 1-D vectors of the same length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(k))):
            raise ValueError("phase-space coordinates must be finite")
        x.setflags(write=False)
        k.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "k", k)

    @property
    def dof(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class AnalyticHamiltonian:
    """Classical Hamiltonian with analytic gradients.

    value(x, k) -> float; grad_x(x, k), grad_k(x, k) -> d-vectors.
    """

    value: callable
    grad_x: callable
    grad_k: callable


def _one_sided_weights(offsets: np.ndarray, order: int) -> np.ndarray:
    """Finite-difference weights for arbitrary integer offsets.

    Solves the moment conditions sum_j w_j offset_j^p / p! = delta(p, order),
    which makes the stencil exact for polynomials up to degree len(offsets)-1.
    """
    m = offsets.size
    powers = np.arange(m)
    vandermonde = (offsets[np.newaxis, :] ** powers[:, np.newaxis]
                   / np.array([math.factorial(p) for p in powers])[:, np.newaxis])
    rhs = np.zeros(m)
    rhs[order] = 1.0
    return np.linalg.solve(vandermonde, rhs)


@lru_cache(maxsize=None)
def _diff_matrix_cached(n: int, spacing: float, periodic: bool, order: int) -> np.ndarray:
    half, coeffs = _CENTERED[order]
    width = coeffs.size
    matrix = np.zeros((n, n))
    if periodic:
        for j, c in zip(range(-half, half + 1), coeffs):
            if c != 0.0:
                idx = (np.arange(n) + j) % n
                matrix[np.arange(n), idx] += c
    else:
        if n < order + 4:
            raise ValueError(f"non-periodic grid too small for order-{order} derivative")
        for i in range(n):
            if half <= i < n - half:
                for j, c in zip(range(-half, half + 1), coeffs):
                    matrix[i, i + j] = c
            else:
                # one-sided: shift a window of order+4 points inside the grid
                m = order + 4
                start = min(max(i - m // 2, 0), n - m)
                offsets = np.arange(start, start + m) - i
                matrix[i, start:start + m] = _one_sided_weights(offsets.astype(float), order)
    matrix /= spacing ** order
    matrix.setflags(write=False)
    return matrix


def diff_matrix(grid: Grid1D, order: int) -> np.ndarray:
    """Dense differentiation matrix for the given derivative order (1..4)."""
    if order not in _CENTERED:
        raise ValueError(f"derivative order must be in 1..4, got {order}")
    return _diff_matrix_cached(grid.n, grid.spacing, grid.periodic, order)


def _apply_matrix(values: np.ndarray, matrix: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(values, axis, 0)
    return np.moveaxis(np.tensordot(matrix, moved, axes=([1], [0])), 0, axis)


def derivative(field: GridField, axis: int = 0, order: int = 1) -> GridField:
    """Partial derivative of a field along one grid axis."""
    if not 0 <= axis < len(field.grids):
        raise ValueError(f"axis {axis} out of range for {len(field.grids)} grids")
    matrix = diff_matrix(field.grids[axis], order)
    return GridField(field.grids, _apply_matrix(field.values, matrix, axis))


def poisson_bracket(a: GridField, b: GridField) -> GridField:
    """{a, b} on a phase-space tensor grid.

    The first half of the axes are positions, the second half the conjugate
    momenta.  Antisymmetry is exact by construction: swapping the arguments
    negates every term bitwise.
    """
    if a.grids != b.grids:
        raise ValueError("fields must share a common grid")
    if len(a.grids) % 2 != 0:
        raise ValueError("phase-space field needs an even number of axes")
    dof = len(a.grids) // 2
    result = np.zeros(a.values.shape, dtype=np.result_type(a.values, b.values, float))
    for i in range(dof):
        da_dx = derivative(a, axis=i).values
        db_dk = derivative(b, axis=dof + i).values
        da_dk = derivative(a, axis=dof + i).values
        db_dx = derivative(b, axis=i).values
        result = result + (da_dx * db_dk - da_dk * db_dx)
    return GridField(a.grids, result)


def evolve_characteristics(ensemble, hamiltonian: AnalyticHamiltonian,
                           dt: float, steps: int):
    """RK4 Hamiltonian flow for weighted phase-space points.

    Parameters
    ----------
    ensemble : list of (ClassicalPoint, weight)
    hamiltonian : AnalyticHamiltonian
    dt, steps : fixed step size and step count (dt may be negative).

    Returns the evolved ensemble in the same order with unchanged weights.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    out = []
    for point, weight in ensemble:
        x, k = point.x.copy(), point.k.copy()
        for _ in range(steps):
            x, k = _rk4_point(x, k, hamiltonian, dt)
        out.append((ClassicalPoint(x, k), weight))
    return out


def _rk4_point(x, k, h: AnalyticHamiltonian, dt):
    def rates(xs, ks):
        return np.asarray(h.grad_k(xs, ks), dtype=float), -np.asarray(h.grad_x(xs, ks), dtype=float)

    dx1, dk1 = rates(x, k)
    dx2, dk2 = rates(x + 0.5 * dt * dx1, k + 0.5 * dt * dk1)
    dx3, dk3 = rates(x + 0.5 * dt * dx2, k + 0.5 * dt * dk2)
    dx4, dk4 = rates(x + dt * dx3, k + dt * dk3)
    x_new = x + (dt / 6.0) * (dx1 + 2.0 * dx2 + 2.0 * dx3 + dx4)
    k_new = k + (dt / 6.0) * (dk1 + 2.0 * dk2 + 2.0 * dk3 + dk4)
    return x_new, k_new


_FLOAT_FMT = "%.17g"


def write_csv(field: GridField, path) -> None:
    """Write a field as CSV: one row per grid point, coordinates then value."""
    mesh = np.meshgrid(*[g.points for g in field.grids], indexing="ij")
    columns = [m.ravel() for m in mesh]
    values = field.values.ravel()
    is_complex = np.iscomplexobj(values)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        header = [f"coord{i}" for i in range(len(columns))]
        header += ["re_value", "im_value"] if is_complex else ["value"]
        writer.writerow(header)
        for row_idx in range(values.size):
            row = [_FLOAT_FMT % c[row_idx] for c in columns]
            if is_complex:
                row += [_FLOAT_FMT % values[row_idx].real, _FLOAT_FMT % values[row_idx].imag]
            else:
                row.append(_FLOAT_FMT % values[row_idx])
            writer.writerow(row)


def read_csv(path, grids) -> GridField:
    """Read a field written by :func:`write_csv` back onto known grids."""
    grids = tuple(grids)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    n_coords = len(grids)
    shape = tuple(g.n for g in grids)
    if data.shape[1] == n_coords + 2:
        values = (data[:, n_coords] + 1j * data[:, n_coords + 1]).reshape(shape)
    else:
        values = data[:, n_coords].reshape(shape)
    return GridField(grids, values)
