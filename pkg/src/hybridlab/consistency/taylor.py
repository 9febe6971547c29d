"""Short-time Taylor jets for a coupled log-density / action ansatz.

The initial data is L(0) = l(x) + kappa * q with zero action, evolving under
the coupled transport equations with potential v * x * q; the q axis is the
one that carries the quantum pressure term.  Writing L and S as series
sum_k L_k t^k / k!, the evolution equations turn into an algebraic recursion
for the jets: each product of series contributes through binomial-weighted
convolutions of lower-order jets.  Everything is done on symbolic expression
trees over the variables x, q and h2 (the squared quantum scale), so the
split into powers of hbar^2 is exact rather than fitted.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from hybridlab.errors import ValidationError
from hybridlab.expressions import Expr, Num, Var, ZERO, parse_expression

MAX_ORDER = 4
# hard cap on the hbar^2 degree of any jet up to MAX_ORDER; each application
# of the action recursion raises the degree by at most one
MAX_H2_DEGREE = 4

_X = Var("x")
_Q = Var("q")
_H2 = Var("h2")


def _as_expr(source) -> Expr:
    if isinstance(source, Expr):
        return source
    return parse_expression(source)


@dataclass(frozen=True)
class AnsatzComponent:
    """One mixture branch: log-profile l(x), slope kappa, and the couplings."""

    log_profile: Expr
    kappa: float = 1.0
    coupling: float = 1.0
    mass_classical: float = 1.0
    mass_quantum: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        profile = _as_expr(self.log_profile)
        extra = profile.variables() - {"x"}
        if extra:
            raise ValidationError(f"log profile may only depend on x, found {sorted(extra)}")
        if self.mass_classical <= 0 or self.mass_quantum <= 0:
            raise ValidationError("masses must be positive")
        if self.hbar < 0:
            raise ValidationError("hbar must be non-negative")
        object.__setattr__(self, "log_profile", profile)


@dataclass(frozen=True)
class TaylorTable:
    """Jets evaluated at sample points, split by powers of hbar^2.

    ``log_parts`` and ``action_parts`` have shape (order+1, MAX_H2_DEGREE+1,
    n_points); entry [k, p, i] is the hbar^(2p) coefficient of the k-th time
    derivative at t=0, so the series reads sum_k value[k] * t^k / k!.
    """

    points: np.ndarray
    log_parts: np.ndarray
    action_parts: np.ndarray
    hbar: float

    @property
    def order(self) -> int:
        return self.log_parts.shape[0] - 1

    def _combine(self, parts: np.ndarray, order: int, hbar: float | None) -> np.ndarray:
        if not 0 <= order <= self.order:
            raise ValidationError(f"order must be in 0..{self.order}, got {order}")
        scale = self.hbar if hbar is None else hbar
        powers = scale ** (2 * np.arange(parts.shape[1]))
        return np.tensordot(powers, parts[order], axes=(0, 0))

    def _part(self, parts: np.ndarray, order: int, hbar_power: int) -> np.ndarray:
        if not 0 <= order <= self.order:
            raise ValidationError(f"order must be in 0..{self.order}, got {order}")
        if hbar_power % 2 != 0 or hbar_power < 0:
            raise ValidationError("hbar power must be a non-negative even integer")
        index = hbar_power // 2
        if index >= parts.shape[1]:
            return np.zeros(parts.shape[2])
        return parts[order, index].copy()

    def log_derivative(self, order: int, hbar: float | None = None) -> np.ndarray:
        """k-th time derivative of the log-density at each sample point."""
        return self._combine(self.log_parts, order, hbar)

    def action_derivative(self, order: int, hbar: float | None = None) -> np.ndarray:
        """k-th time derivative of the action at each sample point."""
        return self._combine(self.action_parts, order, hbar)

    def log_part(self, order: int, hbar_power: int) -> np.ndarray:
        """Coefficient of hbar**hbar_power in the k-th log-density derivative."""
        return self._part(self.log_parts, order, hbar_power)

    def action_part(self, order: int, hbar_power: int) -> np.ndarray:
        return self._part(self.action_parts, order, hbar_power)


def _jet_recursion(component: AnsatzComponent, order: int) -> tuple[list[Expr], list[Expr]]:
    inv_mc = Num(1.0 / component.mass_classical)
    inv_mq = Num(1.0 / component.mass_quantum)
    half_mc = Num(0.5 / component.mass_classical)
    half_mq = Num(0.5 / component.mass_quantum)
    pressure_scale = _H2 * Num(1.0 / (8.0 * component.mass_quantum))
    potential = Num(component.coupling) * _X * _Q

    log_jets = [component.log_profile + Num(component.kappa) * _Q]
    action_jets: list[Expr] = [ZERO]
    for k in range(order):
        transport_x = ZERO
        transport_q = ZERO
        kinetic_x = ZERO
        kinetic_q = ZERO
        pressure_sq = ZERO
        for j in range(k + 1):
            weight = Num(float(comb(k, j)))
            transport_x = transport_x + weight * log_jets[j].diff("x") * action_jets[k - j].diff("x")
            transport_q = transport_q + weight * log_jets[j].diff("q") * action_jets[k - j].diff("q")
            kinetic_x = kinetic_x + weight * action_jets[j].diff("x") * action_jets[k - j].diff("x")
            kinetic_q = kinetic_q + weight * action_jets[j].diff("q") * action_jets[k - j].diff("q")
            pressure_sq = pressure_sq + weight * log_jets[j].diff("q") * log_jets[k - j].diff("q")
        next_log = (
            -inv_mc * (transport_x + action_jets[k].diff("x").diff("x"))
            - inv_mq * (transport_q + action_jets[k].diff("q").diff("q"))
        )
        next_action = (
            -half_mc * kinetic_x
            - half_mq * kinetic_q
            + pressure_scale * (pressure_sq + Num(2.0) * log_jets[k].diff("q").diff("q"))
        )
        if k == 0:
            next_action = next_action - potential
        log_jets.append(next_log)
        action_jets.append(next_action)
    return log_jets, action_jets


def _h2_parts(expr: Expr, x: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Exact coefficients of h2^p, p = 0..MAX_H2_DEGREE, at the sample points."""
    parts = np.zeros((MAX_H2_DEGREE + 1, x.size))
    current = expr
    for power in range(MAX_H2_DEGREE + 1):
        value = current.evaluate({"x": x, "q": q, "h2": 0.0})
        parts[power] = np.broadcast_to(
            np.asarray(value, dtype=float) / factorial(power), x.shape
        )
        current = current.diff("h2")
    return parts


def taylor_expand(component: AnsatzComponent, order: int, points) -> TaylorTable:
    """Time-Taylor jets of (log-density, action) at the given (x, q) points."""
    if not isinstance(order, int) or order < 0:
        raise ValidationError("order must be a non-negative integer")
    if order > MAX_ORDER:
        raise ValidationError(f"order must be at most {MAX_ORDER}, got {order}")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValidationError("points must be an (n, 2) array of (x, q) samples")
    log_jets, action_jets = _jet_recursion(component, order)
    x = pts[:, 0].copy()
    q = pts[:, 1].copy()
    log_parts = np.stack([_h2_parts(jet, x, q) for jet in log_jets])
    action_parts = np.stack([_h2_parts(jet, x, q) for jet in action_jets])
    return TaylorTable(
        points=pts,
        log_parts=log_parts,
        action_parts=action_parts,
        hbar=component.hbar,
    )
