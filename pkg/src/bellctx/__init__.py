"""Exact tools relating Bell correlations and prepare-and-measure contextuality scenarios."""

from .core import (
    BellCorrelation,
    BellScenario,
    CtxBehaviour,
    CtxScenario,
    PreparationEquivalence,
    check_no_signalling,
    equivalence_residual,
    marginals,
    validate_behaviour,
    validate_correlation,
)
from .mapping import (
    bell_to_ctx,
    ctx_to_bell,
    embed_bell,
    embed_repeated_preparations,
    interior_blend,
    reduce_tau,
    single_equivalence_normal_form,
)
from .classicality import check_local, check_noncontextual, nc_polytope, verify_certificate

__version__ = "0.1.0"
