"""Tree probabilities under fitted models.

SBN probabilities of unrooted trees are sums over the rooting joints, one per
edge. ``JointMode.TWO_PASS`` computes all joints from two sweeps over the
directed edges; ``JointMode.NAIVE`` roots the tree on each edge and evaluates
every rooted tree from scratch, which serves as a reference.
"""

import math
from enum import Enum
from typing import Any, Iterable

from src.counting import (
    CountsTable,
    clade_decomposition,
    collect_sa_counts,
    decompose_rooted,
    rooting_structure,
    unrooted_sample,
)
from src.errors import TaxonMismatchError, UsageError
from src.estimators import CCDParams, SBNParams, SRFParams
from src.treespace import (
    RootedTopology,
    UnrootedTopology,
    as_unrooted,
    root_at_edge,
    tree_id,
)


class JointMode(str, Enum):
    """How rooting joints are computed."""

    NAIVE = "naive"
    TWO_PASS = "two_pass"


def _check_taxa(params: Any, tree: Any) -> None:
    if params.taxa != tree.taxa:
        raise TaxonMismatchError("Tree and parameters use different taxon sets")


def sbn_prob_rooted(params: SBNParams, tree: RootedTopology) -> float:
    """Root-split probability times every PCSP conditional; missing keys give 0."""
    _check_taxa(params, tree)
    decomposition = decompose_rooted(tree)
    prob = params.root_prob(decomposition.root_split)
    for key in decomposition.pcsps:
        if prob == 0.0:
            break
        prob *= params.cond_prob(key)
    return prob


def rooting_joints(
    params: SBNParams,
    tree: UnrootedTopology | RootedTopology,
    mode: JointMode = JointMode.TWO_PASS,
) -> list[float]:
    """Probability of ``tree`` rooted on each of its edges, in edge order."""
    _check_taxa(params, tree)
    unrooted = as_unrooted(tree)
    if mode == JointMode.NAIVE:
        return [
            sbn_prob_rooted(params, root_at_edge(unrooted, e))
            for e in range(unrooted.n_edges)
        ]
    return rooting_structure(unrooted).joints(params.root_prob, params.cond_prob)


def sbn_prob_unrooted(
    params: SBNParams,
    tree: UnrootedTopology | RootedTopology,
    mode: JointMode = JointMode.TWO_PASS,
) -> float:
    """Unrooted SBN probability: the sum of the rooting joints."""
    return sum(rooting_joints(params, tree, mode))


def ccd_prob(params: CCDParams, tree: UnrootedTopology | RootedTopology) -> float:
    """CCD probability of the tree rooted on the pendant edge of taxon 0."""
    _check_taxa(params, tree)
    unrooted = as_unrooted(tree)
    rooted = root_at_edge(unrooted, unrooted.graph.top)
    prob = 1.0
    for clade, split in clade_decomposition(rooted):
        prob *= params.split_prob(clade, split)
        if prob == 0.0:
            break
    return prob


def srf_prob(params: SRFParams, tree: UnrootedTopology | RootedTopology) -> float:
    """Relative frequency of the tree in the fitted sample."""
    _check_taxa(params, tree)
    return params.prob_of_id(tree_id(as_unrooted(tree)))


def _regularization(params: SBNParams, prior: CountsTable) -> float:
    total = 0.0
    for split, weight in prior.root_counts.items():
        if weight > 0.0:
            prob = params.root_prob(split)
            if prob <= 0.0:
                return -math.inf
            total += weight * math.log(prob)
    for key, weight in prior.pcsp_counts.items():
        if weight > 0.0:
            prob = params.cond_prob(key)
            if prob <= 0.0:
                return -math.inf
            total += weight * math.log(prob)
    return total


def log_likelihood(
    params: SBNParams,
    trees: Iterable[Any],
    alpha: float = 0.0,
    equivalent_counts: CountsTable | None = None,
) -> float:
    """Weighted log-likelihood of an unrooted sample, optionally regularized.

    With ``alpha > 0`` the Dirichlet term ``alpha * sum(m * log p)`` over the
    equivalent counts is added; they default to the sample's simple-average
    counts. Any tree with probability zero makes the value ``-inf``.
    """
    if alpha < 0.0:
        raise UsageError(f"alpha must be nonnegative, got {alpha}")
    sample = unrooted_sample(trees)
    value = 0.0
    for tree, weight in sample:
        prob = sbn_prob_unrooted(params, tree)
        if prob <= 0.0:
            value = -math.inf
            break
        value += weight * math.log(prob)
    if alpha > 0.0:
        prior = equivalent_counts if equivalent_counts is not None else collect_sa_counts(sample)
        value += alpha * _regularization(params, prior)
    return value


def sa_lower_bound(params: SBNParams, trees: Iterable[Any]) -> float:
    """Simple-average lower bound of the log-likelihood.

    Per tree this is the mean log joint over the 2N-3 rootings plus
    ``log(2N-3)``; by Jensen's inequality it never exceeds the log-likelihood.
    """
    value = 0.0
    for tree, weight in unrooted_sample(trees):
        joints = rooting_joints(params, tree)
        if min(joints) <= 0.0:
            return -math.inf
        n_edges = len(joints)
        value += weight * (
            math.fsum(math.log(j) for j in joints) / n_edges + math.log(n_edges)
        )
    return value
