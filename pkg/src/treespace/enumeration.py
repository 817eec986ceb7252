"""Exhaustive enumeration of small tree spaces.

Unrooted trees are generated by sequential leaf insertion: starting from the
unique tree on taxa 0, 1 and 2, taxon ``k`` is attached to every edge (in
canonical edge order) of every tree on the first ``k`` taxa. The order is
deterministic, so list positions are stable tree indices.
"""

from typing import Iterator

from src.config import get_settings
from src.core import TaxonSet
from src.errors import EnumerationCapError, UsageError
from src.logging_config import get_logger

from .topology import (
    RootedTopology,
    UnrootedTopology,
    insert_leaf,
    root_at_edge,
    three_taxon_splits,
)

logger = get_logger(__name__)


def double_factorial(n: int) -> int:
    """n!! for n >= -1 (with (-1)!! = 1)."""
    result = 1
    while n > 1:
        result *= n
        n -= 2
    return result


def count_unrooted(n_taxa: int) -> int:
    """Number of unrooted bifurcating trees on ``n_taxa`` labeled leaves."""
    if n_taxa < 3:
        raise UsageError("Unrooted trees need at least 3 taxa")
    return double_factorial(2 * n_taxa - 5)


def count_rooted(n_taxa: int) -> int:
    """Number of rooted bifurcating trees on ``n_taxa`` labeled leaves."""
    if n_taxa < 2:
        raise UsageError("Rooted trees need at least 2 taxa")
    return double_factorial(2 * n_taxa - 3)


def check_enumeration_cap(n_taxa: int, cap: int | None = None) -> None:
    """Refuse enumeration above the configured cap.

    Raises:
        EnumerationCapError: If ``n_taxa`` exceeds ``cap`` (default SBN_ENUM_CAP).
    """
    limit = cap if cap is not None else get_settings().enum_cap
    if n_taxa > limit:
        raise EnumerationCapError(n_taxa, limit)


def _split_sets(taxa: TaxonSet) -> Iterator[tuple[int, ...]]:
    def grow(splits: tuple[int, ...], k: int) -> Iterator[tuple[int, ...]]:
        if k == taxa.size:
            yield splits
            return
        leaf = taxa.bit(k)
        for edge_split in splits:
            yield from grow(insert_leaf(splits, edge_split, leaf), k + 1)

    yield from grow(three_taxon_splits(taxa), 3)


def enumerate_unrooted(taxa: TaxonSet, cap: int | None = None) -> Iterator[UnrootedTopology]:
    """Stream every unrooted topology on ``taxa``, (2N-5)!! in total.

    The cap is checked when the function is called, not on first iteration.

    Raises:
        UsageError: If there are fewer than 3 taxa.
        EnumerationCapError: If the taxon count exceeds the cap.
    """
    if taxa.size < 3:
        raise UsageError("Unrooted trees need at least 3 taxa")
    check_enumeration_cap(taxa.size, cap)
    logger.debug(
        "Enumerating unrooted trees",
        extra={"n_taxa": taxa.size, "expected": count_unrooted(taxa.size)},
    )
    return (UnrootedTopology(taxa, splits) for splits in _split_sets(taxa))


def enumerate_rooted(taxa: TaxonSet, cap: int | None = None) -> Iterator[RootedTopology]:
    """Stream every rooted topology on ``taxa``, (2N-3)!! in total.

    Each unrooted tree is rooted at each of its edges in edge order.
    """
    unrooted = enumerate_unrooted(taxa, cap)
    return (root_at_edge(tree, e) for tree in unrooted for e in range(tree.n_edges))
