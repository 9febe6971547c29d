"""hybridlab: numerical experiments for coupled quantum-classical dynamics.

The package provides four layers:

* finite-dimensional Hilbert-space tools and phase-space grids
  (:mod:`hybridlab.hilbert`, :mod:`hybridlab.phase_grid`),
* hybrid bracket algebra and its structural defect meters
  (:mod:`hybridlab.hybrid_brackets`),
* dynamics backends: mean-field trajectories (:mod:`hybridlab.meanfield`)
  and grid ensembles (:mod:`hybridlab.ensemble`),
* statistical consistency probes (:mod:`hybridlab.consistency`)
  and a scenario-driven CLI (:mod:`hybridlab.cli`).
"""

from hybridlab.errors import NumericalError, ValidationError

__version__ = "0.1.0"

__all__ = ["NumericalError", "ValidationError", "__version__"]
