"""Closed-form estimators: SBN-ML, SBN-SA, CCD and SRF."""

from typing import Any, Iterable

from src.core import Clade, Subsplit
from src.counting import (
    CountsTable,
    clade_decomposition,
    collect_sa_counts,
    unrooted_sample,
)
from src.errors import EmptySampleError, UsageError
from src.logging_config import get_logger
from src.treespace import root_at_edge, sample_taxa, tree_id

from .params import CCDParams, Group, SBNParams, SRFParams

logger = get_logger(__name__)


def params_from_counts(
    counts: CountsTable,
    prior: CountsTable | None = None,
    alpha: float = 0.0,
) -> SBNParams:
    """Normalize (optionally regularized) counts into SBN parameters.

    Root splits are normalized over their total, PCSPs within their
    (parent, focal) context. With a prior, every count becomes
    ``m + alpha * m_prior`` before normalizing. Zero entries are dropped.

    Raises:
        EmptySampleError: If there is no root-split weight at all.
        UsageError: If ``alpha`` is negative.
    """
    if alpha < 0.0:
        raise UsageError(f"alpha must be nonnegative, got {alpha}")
    root = dict(counts.root_counts)
    pcsp = dict(counts.pcsp_counts)
    if prior is not None and alpha > 0.0:
        for split, weight in prior.root_counts.items():
            root[split] = root.get(split, 0.0) + alpha * weight
        for key, weight in prior.pcsp_counts.items():
            pcsp[key] = pcsp.get(key, 0.0) + alpha * weight

    total = sum(root.values())
    if total <= 0.0:
        raise EmptySampleError("No root-split weight to estimate from")
    root_dist = {split: w / total for split, w in root.items() if w > 0.0}

    grouped: dict[Group, dict[Subsplit, float]] = {}
    for key, weight in pcsp.items():
        if weight > 0.0:
            grouped.setdefault(key.group, {})[key.child] = weight
    cond_dist = {}
    for group, children in grouped.items():
        group_total = sum(children.values())
        cond_dist[group] = {child: w / group_total for child, w in children.items()}
    return SBNParams(counts.taxa, root_dist, cond_dist)


def fit_ml_rooted(counts: CountsTable) -> SBNParams:
    """Maximum-likelihood SBN parameters from rooted counts.

    Raises:
        EmptySampleError: If the counts are empty.
    """
    if counts.total_trees <= 0.0:
        raise EmptySampleError("Cannot fit on an empty sample")
    params = params_from_counts(counts)
    logger.info("Fitted rooted SBN", extra=params.to_dict())
    return params


def fit_sa(trees: Iterable[Any]) -> SBNParams:
    """Maximizer of the simple-average lower bound (uniform rootings)."""
    params = params_from_counts(collect_sa_counts(trees))
    logger.info("Fitted simple-average SBN", extra=params.to_dict())
    return params


def fit_ccd(trees: Iterable[Any]) -> CCDParams:
    """Conditional clade distribution fitted on an unrooted sample.

    Every tree is rooted on the pendant edge of taxon 0 before its clade
    splits are tallied.
    """
    sample = unrooted_sample(trees)
    taxa = sample_taxa(sample)
    tallies: dict[Clade, dict[Subsplit, float]] = {}
    for tree, weight in sample:
        rooted = root_at_edge(tree, tree.graph.top)
        for clade, split in clade_decomposition(rooted):
            splits = tallies.setdefault(clade, {})
            splits[split] = splits.get(split, 0.0) + weight
    clade_dist = {}
    for clade, splits in tallies.items():
        total = sum(splits.values())
        clade_dist[clade] = {split: w / total for split, w in splits.items()}
    params = CCDParams(taxa, clade_dist)
    logger.info("Fitted CCD", extra=params.to_dict())
    return params


def fit_srf(trees: Iterable[Any]) -> SRFParams:
    """Relative frequencies of the observed unrooted topologies."""
    sample = unrooted_sample(trees)
    taxa = sample_taxa(sample)
    total = sum(weight for _, weight in sample)
    probs = {tree_id(tree): weight / total for tree, weight in sample}
    params = SRFParams(taxa, probs)
    logger.info("Fitted SRF", extra=params.to_dict())
    return params
