"""Classical statistical mixtures and their derivative invariants.

A mixture is a weighted list of phase-space densities of the product form
P(x) * delta(k - dS/dx), stored as (weight, density, action) triples on a
shared one-dimensional grid.  Two mixtures with the same total density can
still differ in quantities built from per-component log-derivatives; the
helpers here construct such pairs and evaluate both the combinations that
depend only on the total density and the ones that do not.

Comparisons are pointwise throughout, so component densities are accepted
as given and never rescaled; ``component_masses`` reports the quadrature
masses for callers that do want normalized inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from hybridlab.errors import ValidationError
from hybridlab.expressions import Expr, parse_expression
from hybridlab.phase_grid import Grid1D, GridField, diff_matrix

WEIGHT_TOL = 1e-10

ExprLike = Union[Expr, str]


def _as_expr(source: ExprLike) -> Expr:
    if isinstance(source, Expr):
        return source
    return parse_expression(source)


def evaluate_on(expr: ExprLike, x: np.ndarray) -> np.ndarray:
    """Evaluate a one-variable expression on an array of sample points."""
    result = _as_expr(expr).evaluate({"x": x})
    return np.broadcast_to(np.asarray(result, dtype=float), np.shape(x)).copy()


@dataclass(frozen=True)
class ClassicalMixture:
    """Weighted components (weight, density field, action field) on one grid."""

    components: tuple

    def __post_init__(self):
        comps = tuple(tuple(c) for c in self.components)
        if not comps:
            raise ValidationError("mixture needs at least one component")
        grid = None
        for entry in comps:
            if len(entry) != 3:
                raise ValidationError("each component must be (weight, density, action)")
            weight, density, action = entry
            if not isinstance(density, GridField) or not isinstance(action, GridField):
                raise ValidationError("density and action must be GridField instances")
            if len(density.grids) != 1 or len(action.grids) != 1:
                raise ValidationError("mixture components must live on a 1-D grid")
            if density.grids != action.grids:
                raise ValidationError("density and action must share a grid")
            if grid is None:
                grid = density.grids[0]
            elif density.grids[0] != grid:
                raise ValidationError("all components must share one grid")
            if weight < 0:
                raise ValidationError("component weights must be non-negative")
            if np.any(density.values < 0):
                raise ValidationError("component densities must be non-negative")
        total = sum(float(entry[0]) for entry in comps)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValidationError(f"component weights must sum to 1, got {total!r}")
        object.__setattr__(self, "components", comps)

    @property
    def grid(self) -> Grid1D:
        return self.components[0][1].grids[0]

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _, _ in self.components])

    def component_masses(self) -> np.ndarray:
        """Quadrature mass of each component density (not enforced to be 1)."""
        return np.array([density.integral() for _, density, _ in self.components])

    def total_density(self) -> GridField:
        total = sum(w * density.values for w, density, _ in self.components)
        return GridField((self.grid,), total)


def _validate_orders(space_order: int, momentum_power: int) -> None:
    if not isinstance(space_order, int) or not isinstance(momentum_power, int):
        raise ValidationError("derivative order and momentum power must be integers")
    if not 0 <= space_order <= 4:
        raise ValidationError(f"space derivative order must be in 0..4, got {space_order}")
    if not 0 <= momentum_power <= 3:
        raise ValidationError(f"momentum power must be in 0..3, got {momentum_power}")


def invariant(mixture: ClassicalMixture, space_order: int, momentum_power: int) -> GridField:
    """Mixture average of the n1-th space derivative of P * (dS/dx)^n2.

    For mixtures sharing one total density these averages coincide whenever
    they are expressible through that density and its momentum moments, which
    is what makes them useful as pre-checks before probing quantities that
    are not.
    """
    _validate_orders(space_order, momentum_power)
    grid = mixture.grid
    try:
        d1 = diff_matrix(grid, 1) if momentum_power > 0 else None
        dn = diff_matrix(grid, space_order) if space_order > 0 else None
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    total = np.zeros(grid.n)
    for weight, density, action in mixture.components:
        term = density.values.copy()
        if momentum_power > 0:
            term = term * (d1 @ action.values) ** momentum_power
        if space_order > 0:
            term = dn @ term
        total += weight * term
    return GridField((grid,), total)


def noninvariant_sum(mixture: ClassicalMixture) -> GridField:
    """Mixture average of P * (l' l'' + l''') with l the per-component log-density.

    Unlike the moment combinations in :func:`invariant`, this expression
    cannot be rewritten in terms of the total density alone, so two mixtures
    with equal totals generally give different values.
    """
    grid = mixture.grid
    try:
        d1 = diff_matrix(grid, 1)
        d2 = diff_matrix(grid, 2)
        d3 = diff_matrix(grid, 3)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    total = np.zeros(grid.n)
    for weight, density, _ in mixture.components:
        if np.any(density.values <= 0):
            raise ValidationError("log-derivative sums need strictly positive densities")
        log_density = np.log(density.values)
        l1 = d1 @ log_density
        l2 = d2 @ log_density
        l3 = d3 @ log_density
        total += weight * density.values * (l1 * l2 + l3)
    return GridField((grid,), total)


def equal_rho_mixtures(
    base: ExprLike,
    modulation: ExprLike,
    epsilon: float,
    grid: Grid1D | None = None,
) -> tuple[ClassicalMixture, ClassicalMixture]:
    """Two mixtures with identical total density but different components.

    Mixture A is the single density exp(base(x)).  Mixture B splits it into
    two equal-weight branches exp(base) * (1 +- epsilon * modulation), which
    sum back to the same total.  All actions are zero.  The split degenerates
    when |epsilon * modulation| reaches 1 anywhere on the grid (a branch
    density would touch zero and its log-derivatives blow up), so that is
    rejected.
    """
    if grid is None:
        grid = Grid1D(256, -np.pi, np.pi, periodic=True)
    base_expr = _as_expr(base)
    mod_expr = _as_expr(modulation)
    x = grid.points
    base_values = evaluate_on(base_expr, x)
    mod_values = evaluate_on(mod_expr, x)
    swing = epsilon * mod_values
    if np.max(np.abs(swing)) >= 1.0 - 1e-12:
        raise ValidationError("epsilon * modulation must stay strictly inside (-1, 1)")
    zero = GridField((grid,), np.zeros(grid.n))
    plain = np.exp(base_values)
    mix_a = ClassicalMixture(((1.0, GridField((grid,), plain), zero),))
    mix_b = ClassicalMixture(
        (
            (0.5, GridField((grid,), plain * (1.0 + swing)), zero),
            (0.5, GridField((grid,), plain * (1.0 - swing)), zero),
        )
    )
    return mix_a, mix_b
