"""Statistical-ensemble field state: a probability density and an action.

The density is stored in log form, L = log P.  Evolving (L, S) instead of
(P, S) keeps P positive by construction and turns the quantum-potential term
into low-order polynomial expressions in derivatives of L.  Construction
from raw (P, S) data applies a small additive floor, P -> P + floor, before
taking the log; the floor makes L flat (not divergent) in empty regions, so
periodic seams see a smooth field even when P itself decays through machine
zero.  The floored fraction is recorded, never hidden.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hybridlab.phase_grid import GridField

DEFAULT_FLOOR = 1e-12

__all__ = ["EnsembleState", "DEFAULT_FLOOR"]


@dataclass(frozen=True)
class EnsembleState:
    """Fields L = log(density) and S (action) on a shared grid.

    ``floor`` records the additive regularization applied when the state was
    built from raw density data (0.0 when the caller supplied L directly).
    """

    grids: tuple
    log_density: np.ndarray
    action: np.ndarray
    floor: float = 0.0
    time: float = 0.0

    def __post_init__(self):
        grids = tuple(self.grids)
        shape = tuple(g.n for g in grids)
        log_density = np.asarray(self.log_density, dtype=float)
        action = np.asarray(self.action, dtype=float)
        if log_density.shape != shape or action.shape != shape:
            raise ValueError(f"field shapes {log_density.shape}, {action.shape} "
                             f"do not match grids {shape}")
        if not (np.all(np.isfinite(log_density)) and np.all(np.isfinite(action))):
            raise ValueError("ensemble fields must be finite")
        log_density = log_density.copy()
        action = action.copy()
        log_density.setflags(write=False)
        action.setflags(write=False)
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "log_density", log_density)
        object.__setattr__(self, "action", action)

    @classmethod
    def from_fields(cls, grids, density, action, floor: float = DEFAULT_FLOOR,
                    normalize: bool = True) -> "EnsembleState":
        """Build from raw (P, S) arrays; P is normalized then floored."""
        grids = tuple(grids)
        density = np.asarray(density, dtype=float)
        action = np.asarray(action, dtype=float)
        if np.any(density < 0.0):
            raise ValueError("density must be non-negative")
        if not floor > 0.0:
            raise ValueError("floor must be positive")
        cell = 1.0
        for g in grids:
            cell *= g.spacing
        if normalize:
            mass = float(np.sum(density)) * cell
            if not mass > 0.0:
                raise ValueError("density has no mass")
            density = density / mass
        return cls(grids, np.log(density + floor), action, floor=floor)

    @classmethod
    def from_functions(cls, grids, density_fn, action_fn,
                       floor: float = DEFAULT_FLOOR) -> "EnsembleState":
        grids = tuple(grids)
        mesh = np.meshgrid(*[g.points for g in grids], indexing="ij")
        return cls.from_fields(grids, density_fn(*mesh), action_fn(*mesh), floor=floor)

    @property
    def density(self) -> np.ndarray:
        return np.exp(self.log_density)

    @property
    def cell_volume(self) -> float:
        vol = 1.0
        for g in self.grids:
            vol *= g.spacing
        return vol

    @property
    def mass(self) -> float:
        return float(np.sum(np.exp(self.log_density))) * self.cell_volume

    def floored_fraction(self, factor: float = 10.0) -> float:
        """Fraction of cells whose density sits within ``factor`` of the floor."""
        if self.floor == 0.0:
            return 0.0
        return float(np.mean(np.exp(self.log_density) < factor * self.floor))

    def density_field(self) -> GridField:
        return GridField(self.grids, np.exp(self.log_density))

    def action_field(self) -> GridField:
        return GridField(self.grids, self.action)
