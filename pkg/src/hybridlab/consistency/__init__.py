"""Statistical-consistency experiments for classical and quantum mixtures."""

from hybridlab.consistency.mixtures import (
    ClassicalMixture,
    equal_rho_mixtures,
    invariant,
    noninvariant_sum,
)
from hybridlab.consistency.taylor import (
    AnsatzComponent,
    TaylorTable,
    taylor_expand,
)
from hybridlab.consistency.breakdown import (
    BreakdownReport,
    t4_breakdown,
)
from hybridlab.consistency.quantum import (
    MixtureDecomposition,
    decomposition_along_axis,
    quantum_consistency_test,
)

__all__ = [
    "ClassicalMixture",
    "equal_rho_mixtures",
    "invariant",
    "noninvariant_sum",
    "AnsatzComponent",
    "TaylorTable",
    "taylor_expand",
    "BreakdownReport",
    "t4_breakdown",
    "MixtureDecomposition",
    "decomposition_along_axis",
    "quantum_consistency_test",
]
