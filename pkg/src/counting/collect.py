"""Folds from tree samples to CountsTables.

Three variants feed the estimators:
- exact counts of rooted trees (maximum likelihood)
- simple-average counts, spreading each unrooted tree uniformly over its rootings
- expected counts, spreading each unrooted tree by the rooting posterior of a model

The unrooted variants share one O(N) accumulator per tree (see
:meth:`RootingStructure.expected_mass`).
"""

from typing import Any, Iterable, Protocol

from src.core import PcspKey, Subsplit, TaxonSet
from src.errors import TaxonMismatchError, UsageError
from src.logging_config import get_logger
from src.treespace import (
    RootedTopology,
    WeightedTree,
    as_unrooted,
    as_weighted,
    merge_duplicates,
    sample_taxa,
)

from .decomposition import RootingStructure, decompose_rooted, rooting_structure
from .tables import CountsTable

logger = get_logger(__name__)


class SbnLookup(Protocol):
    """Anything that can price root splits and PCSPs."""

    taxa: TaxonSet

    def root_prob(self, split: Subsplit) -> float: ...

    def cond_prob(self, key: PcspKey) -> float: ...


def unrooted_sample(trees: Iterable[Any]) -> list[WeightedTree]:
    """Unroot every record and merge identical topologies."""
    records = as_weighted(trees)
    return merge_duplicates(WeightedTree(as_unrooted(t), w) for t, w in records)


def collect_rooted_counts(trees: Iterable[Any]) -> CountsTable:
    """Tally root splits and PCSPs of a rooted sample.

    Raises:
        EmptySampleError: If the sample is empty.
        TaxonMismatchError: If the sample mixes taxon sets.
        UsageError: If a record is not rooted.
    """
    sample = merge_duplicates(trees)
    taxa = sample_taxa(sample)
    table = CountsTable(taxa)
    for tree, weight in sample:
        if not isinstance(tree, RootedTopology):
            raise UsageError("Rooted counting needs rooted trees")
        decomposition = decompose_rooted(tree)
        table.add_root(decomposition.root_split, weight)
        for key in decomposition.pcsps:
            table.add_pcsp(key, weight)
        table.total_trees += weight
    logger.debug("Collected rooted counts", extra=table.to_dict())
    return table


def accumulate_rootings(
    table: CountsTable,
    structure: RootingStructure,
    q: list[float],
    weight: float,
) -> None:
    """Add one unrooted tree spread over its rootings by ``q``, in O(N)."""
    mass = structure.expected_mass(q)
    for e, split in enumerate(structure.root_splits):
        share = weight * q[e]
        if share:
            table.add_root(split, share)
            for key in structure.root_pcsps[e]:
                table.add_pcsp(key, share)
    for d, entries in enumerate(structure.pairs):
        share = weight * mass[d ^ 1]
        if entries and share:
            for _, key in entries:
                table.add_pcsp(key, share)


def collect_sa_counts(trees: Iterable[Any]) -> CountsTable:
    """Tally an unrooted sample with uniform weight 1/(2N-3) per rooting.

    Rooted records are unrooted first.
    """
    sample = unrooted_sample(trees)
    taxa = sample_taxa(sample)
    table = CountsTable(taxa)
    for tree, weight in sample:
        structure = rooting_structure(tree)
        n_edges = structure.n_edges
        accumulate_rootings(table, structure, [1.0 / n_edges] * n_edges, weight)
        table.total_trees += weight
    logger.debug("Collected simple-average counts", extra=table.to_dict())
    return table


def collect_em_counts(trees: Iterable[Any], params: SbnLookup) -> CountsTable:
    """Expected counts under the rooting posterior of ``params``.

    Each tree is spread over its edges in proportion to the rooting joints.
    Trees whose joints are all zero contribute nothing; their weight is
    recorded in ``skipped_trees``.

    Raises:
        TaxonMismatchError: If ``params`` is over another taxon set.
    """
    sample = unrooted_sample(trees)
    taxa = sample_taxa(sample)
    if params.taxa != taxa:
        raise TaxonMismatchError("Parameters and trees use different taxon sets")
    table = CountsTable(taxa)
    for tree, weight in sample:
        structure = rooting_structure(tree)
        joints = structure.joints(params.root_prob, params.cond_prob)
        total = sum(joints)
        table.total_trees += weight
        if total <= 0.0:
            table.skipped_trees += weight
            continue
        accumulate_rootings(table, structure, [j / total for j in joints], weight)
    if table.skipped_trees:
        logger.warning(
            "Trees with zero probability left out of expected counts",
            extra={"skipped_weight": table.skipped_trees},
        )
    return table
