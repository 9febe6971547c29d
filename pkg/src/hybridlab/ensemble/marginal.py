"""Position-momentum marginal extracted from a two-axis ensemble.

Each configuration cell carries momentum dS/dx along the classical axis, so
the joint density over (x, k) is a histogram: deposit the cell's mass at its
momentum value, splitting linearly between the two nearest momentum bins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hybridlab.errors import ValidationError
from hybridlab.ensemble.state import EnsembleState
from hybridlab.phase_grid import diff_matrix

__all__ = ["KBinning", "MarginalRho", "k_binning_from_state", "marginal_rho"]


@dataclass(frozen=True)
class KBinning:
    """Uniform momentum bins (centers of a closed-interval partition)."""

    k_min: float
    k_max: float
    bins: int

    def __post_init__(self):
        if self.bins < 2:
            raise ValidationError("need at least two momentum bins")
        if not self.k_max > self.k_min:
            raise ValidationError("momentum range must have positive width")

    @property
    def spacing(self) -> float:
        return (self.k_max - self.k_min) / (self.bins - 1)

    @property
    def centers(self) -> np.ndarray:
        return self.k_min + self.spacing * np.arange(self.bins)


@dataclass(frozen=True)
class MarginalRho:
    """Histogram over (x, k) plus the mass that fell outside the k range."""

    x_points: np.ndarray
    k_centers: np.ndarray
    weights: np.ndarray          # shape (len(x_points), len(k_centers))
    overflow: float

    @property
    def total(self) -> float:
        return float(self.weights.sum() + self.overflow)

    def second_k_moment(self) -> float:
        """Sum of k^2-weighted mass over the binned part."""
        return float(np.sum(self.weights * self.k_centers[np.newaxis, :] ** 2))


def _classical_momentum(state: EnsembleState) -> np.ndarray:
    if len(state.grids) != 2:
        raise ValidationError("marginal needs a two-axis (x, q) state")
    d1 = diff_matrix(state.grids[0], 1)
    return np.tensordot(d1, state.action, axes=([1], [0]))


def k_binning_from_state(state: EnsembleState, bins: int = 64,
                         padding: float = 1.5) -> KBinning:
    """Bins spanning the momentum range of the state, padded about center.

    Build this once from the initial state and reuse it for later snapshots
    so the binning stays comparable across a run.
    """
    momentum = _classical_momentum(state)
    lo, hi = float(momentum.min()), float(momentum.max())
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo) * padding
    scale = max(1.0, 0.5 * abs(center))
    if half < 1e-8 * scale:
        half = scale                         # uniform momentum: pick a scale
    return KBinning(center - half, center + half, bins)


def marginal_rho(state: EnsembleState, binning: KBinning) -> MarginalRho:
    """Deposit each cell's mass at (x, dS/dx) with linear splitting in k."""
    momentum = _classical_momentum(state)
    cell_mass = state.density * state.cell_volume

    position = (momentum - binning.k_min) / binning.spacing
    lower = np.floor(position).astype(int)
    fraction = position - lower

    nx, nbins = state.grids[0].n, binning.bins
    weights = np.zeros((nx, nbins))
    overflow = 0.0
    rows = np.broadcast_to(np.arange(nx)[:, np.newaxis], momentum.shape)
    for offset, share in ((0, 1.0 - fraction), (1, fraction)):
        idx = lower + offset
        ok = (idx >= 0) & (idx < nbins)
        np.add.at(weights, (rows[ok], idx[ok]), (cell_mass * share)[ok])
        overflow += float(np.sum((cell_mass * share)[~ok]))
    return MarginalRho(x_points=state.grids[0].points,
                       k_centers=binning.centers,
                       weights=weights, overflow=overflow)
