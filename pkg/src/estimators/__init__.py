"""Parameter containers and fitting procedures."""

from .em import (
    EmConfig,
    EmDiagnostics,
    EmEngine,
    EmInit,
    fit_em,
    params_from_vectors,
)
from .fitting import fit_ccd, fit_ml_rooted, fit_sa, fit_srf, params_from_counts
from .params import AnyParams, CCDParams, Group, SBNParams, SRFParams

__all__ = [
    "AnyParams",
    "CCDParams",
    "EmConfig",
    "EmDiagnostics",
    "EmEngine",
    "EmInit",
    "Group",
    "SBNParams",
    "SRFParams",
    "fit_ccd",
    "fit_em",
    "fit_ml_rooted",
    "fit_sa",
    "fit_srf",
    "params_from_counts",
    "params_from_vectors",
]
