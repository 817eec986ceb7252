"""Decompositions and frequency tables consumed by the estimators."""

from .collect import (
    SbnLookup,
    accumulate_rootings,
    collect_em_counts,
    collect_rooted_counts,
    collect_sa_counts,
    unrooted_sample,
)
from .decomposition import (
    RootedDecomposition,
    RootingStructure,
    build_rooting_structure,
    clade_decomposition,
    decompose_rooted,
    rooting_structure,
)
from .index import RootingIndex, compile_index
from .tables import CountsTable

__all__ = [
    "CountsTable",
    "RootedDecomposition",
    "RootingIndex",
    "RootingStructure",
    "SbnLookup",
    "accumulate_rootings",
    "build_rooting_structure",
    "clade_decomposition",
    "collect_em_counts",
    "collect_rooted_counts",
    "collect_sa_counts",
    "compile_index",
    "decompose_rooted",
    "rooting_structure",
    "unrooted_sample",
]
