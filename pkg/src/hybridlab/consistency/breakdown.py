"""Fourth-order short-time comparison of equal-density mixtures.

Two mixtures that share the same total density agree on every quantity built
from that density and its first moments, and a battery of such grid-level
checks is run first to certify the inputs.  The fourth time derivative of
the density under the coupled transport equations is then computed per
mixture from the Taylor jets.  Its coefficient of hbar^2 contains
per-component log-derivative combinations that do not reduce to the total
density, so the two mixtures disagree there while their hbar^0 coefficients
still match.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from hybridlab.errors import ValidationError
from hybridlab.consistency.mixtures import (
    ClassicalMixture,
    _as_expr,
    evaluate_on,
    invariant,
)
from hybridlab.consistency.taylor import MAX_H2_DEGREE, AnsatzComponent, taylor_expand
from hybridlab.phase_grid import Grid1D, GridField

PRECHECK_TOL = 1e-10
# 64 periodic points keep the fourth-derivative roundoff amplification
# (~eps / dx^4) well under the pre-check tolerance
PRECHECK_POINTS = 64


@dataclass(frozen=True)
class BreakdownReport:
    """Per-point hbar^0 and hbar^2 coefficients of the fourth density derivative."""

    points: np.ndarray
    invariant_checks: tuple
    hbar0_first: np.ndarray
    hbar0_second: np.ndarray
    hbar2_first: np.ndarray
    hbar2_second: np.ndarray

    @property
    def hbar0_difference(self) -> np.ndarray:
        return self.hbar0_second - self.hbar0_first

    @property
    def hbar2_difference(self) -> np.ndarray:
        return self.hbar2_second - self.hbar2_first

    def as_dict(self) -> dict:
        return {
            "invariant_checks": [dict(entry) for entry in self.invariant_checks],
            "hbar0_part": {
                "first": self.hbar0_first.tolist(),
                "second": self.hbar0_second.tolist(),
                "difference": self.hbar0_difference.tolist(),
            },
            "hbar2_part": {
                "first": self.hbar2_first.tolist(),
                "second": self.hbar2_second.tolist(),
                "difference": self.hbar2_difference.tolist(),
            },
            "points": self.points.tolist(),
        }


def _materialize(branches, grid: Grid1D) -> ClassicalMixture:
    zero = GridField((grid,), np.zeros(grid.n))
    components = []
    for weight, profile in branches:
        density = np.exp(evaluate_on(_as_expr(profile), grid.points))
        components.append((float(weight), GridField((grid,), density), zero))
    return ClassicalMixture(tuple(components))


def _run_prechecks(first: ClassicalMixture, second: ClassicalMixture) -> tuple:
    checks = []
    worst = 0.0
    for space_order in range(5):
        for momentum_power in range(4):
            a = invariant(first, space_order, momentum_power).values
            b = invariant(second, space_order, momentum_power).values
            gap = float(np.max(np.abs(a - b)))
            worst = max(worst, gap)
            checks.append(
                {
                    "space_order": space_order,
                    "momentum_power": momentum_power,
                    "max_abs_difference": gap,
                    "passed": gap <= PRECHECK_TOL,
                }
            )
    if worst > PRECHECK_TOL:
        raise ValidationError(
            f"mixtures do not share a total density: invariant gap {worst:.3e}"
        )
    return tuple(checks)


def _poly_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Multiply two polynomials in hbar^2 given as (degree+1, n_points) arrays."""
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[0]):
            out[i + j] += a[i] * b[j]
    return out


def _fourth_density_parts(
    branches,
    kappa: float,
    coupling: float,
    mass_classical: float,
    mass_quantum: float,
    points: np.ndarray,
) -> np.ndarray:
    """hbar^2-polynomial coefficients of d^4 P / dt^4 at t=0, mixture-averaged.

    With the odd jets vanishing at t=0 the chain rule collapses to
    P0 * (L4 + 3 * L2^2) per component.
    """
    total = None
    for weight, profile in branches:
        component = AnsatzComponent(
            log_profile=_as_expr(profile),
            kappa=kappa,
            coupling=coupling,
            mass_classical=mass_classical,
            mass_quantum=mass_quantum,
        )
        table = taylor_expand(component, 4, points)
        base = np.exp(table.log_derivative(0, hbar=0.0))
        l2 = table.log_parts[2]
        l4 = table.log_parts[4]
        combined = 3.0 * _poly_multiply(l2, l2)
        combined[: l4.shape[0]] += l4
        part = float(weight) * base[None, :] * combined
        total = part if total is None else total + part
    return total


def t4_breakdown(
    first_branches: Sequence,
    second_branches: Sequence,
    kappa: float = 1.0,
    coupling: float = 1.0,
    mass_classical: float = 1.0,
    mass_quantum: float = 1.0,
    points=((np.pi / 4.0, 0.0),),
    precheck_grid: Grid1D | None = None,
) -> BreakdownReport:
    """Compare the fourth density derivative of two equal-density mixtures.

    Each mixture is a sequence of (weight, log-profile) branches, the
    log-profile an expression in x.  The joint initial data per branch is
    log P = profile(x) + kappa * q with zero action and potential
    coupling * x * q.  Raises if the mixtures fail the grid-level
    equal-density pre-check.
    """
    if precheck_grid is None:
        precheck_grid = Grid1D(PRECHECK_POINTS, -np.pi, np.pi, periodic=True)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValidationError("points must be an (n, 2) array of (x, q) samples")
    first = list(first_branches)
    second = list(second_branches)
    if not first or not second:
        raise ValidationError("both mixtures need at least one branch")
    checks = _run_prechecks(
        _materialize(first, precheck_grid), _materialize(second, precheck_grid)
    )
    parts_first = _fourth_density_parts(
        first, kappa, coupling, mass_classical, mass_quantum, pts
    )
    parts_second = _fourth_density_parts(
        second, kappa, coupling, mass_classical, mass_quantum, pts
    )
    for parts in (parts_first, parts_second):
        # this ansatz family produces no terms beyond hbar^2; anything else
        # means the jet algebra went wrong
        scale = max(1.0, float(np.max(np.abs(parts[:2]))))
        if float(np.max(np.abs(parts[2:]))) > 1e-10 * scale:
            raise RuntimeError("unexpected high powers of hbar in the fourth derivative")
    return BreakdownReport(
        points=pts,
        invariant_checks=checks,
        hbar0_first=parts_first[0],
        hbar0_second=parts_second[0],
        hbar2_first=parts_first[1],
        hbar2_second=parts_second[1],
    )
