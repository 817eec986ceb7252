"""Vectorized rootings of a fixed set of unrooted trees.

A RootingIndex numbers every root split and PCSP that occurs in any rooting
of any tree in the set and lays out the directed-edge structure of each tree
as integer arrays: the root-split id and the two root PCSP ids per edge, and
per directed edge the two continuations with the PCSP formed at its head.
With parameters laid out as vectors over those ids, the two passes of
:meth:`RootingStructure.joints` and :meth:`RootingStructure.expected_mass`
run for all trees at once, one array step per directed edge, so a whole
E-step costs O(KN). EM iterations and evaluation over enumerated spaces run
on this representation.
"""

from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.special import logsumexp, softmax

from src.core import Clade, PcspKey, Subsplit
from src.errors import EmptySampleError, TaxonMismatchError, UsageError
from src.logging_config import get_logger
from src.treespace import UnrootedTopology

from .collect import SbnLookup
from .decomposition import rooting_structure
from .tables import CountsTable

logger = get_logger(__name__)


class RootingIndex:
    """Root-split and PCSP ids for the directed edges of a list of trees.

    Directed edge ``2e`` of a tree points away from taxon 0 and ``2e + 1``
    towards it, as in :class:`RootingStructure`. Column ``2E`` of every
    per-directed-edge array is a sentinel that stands for "nothing beyond".

    Args:
        trees: Unrooted trees on one taxon set.
        extra_roots: Root splits to number even if no rooting uses them.
        extra_pcsps: PCSPs to number even if no rooting uses them.

    Attributes:
        root_idx: ``(trees, edges)`` root-split ids.
        root_pcsp_idx: ``(trees, edges, 2)`` ids of the PCSPs directly below
            the root, padded with ``pad``.
        out_idx: ``(trees, directed edges, 2)`` continuations beyond the head
            of each directed edge, the sentinel at leaves.
        pair_idx: ``(trees, directed edges, 2)`` PCSP formed at the head for
            each continuation, ``pad`` when the continuation has fewer than
            three taxa.
        order: Directed edges of each tree by increasing clade size.
        down_order: Edges of each tree by increasing size of the clade below.
        pcsp_group: Group id of each PCSP, one group per (parent, focal).
    """

    def __init__(
        self,
        trees: Sequence[UnrootedTopology],
        extra_roots: Iterable[Subsplit] = (),
        extra_pcsps: Iterable[PcspKey] = (),
    ):
        if not trees:
            raise EmptySampleError("Cannot index an empty tree list")
        self.taxa = trees[0].taxa
        self.trees = tuple(trees)
        self.root_ids: dict[Subsplit, int] = {}
        self.pcsp_ids: dict[PcspKey, int] = {}

        n_trees = len(trees)
        n_edges = trees[0].n_edges
        n_directed = 2 * n_edges
        self.root_idx = np.empty((n_trees, n_edges), dtype=np.intp)
        self.out_idx = np.full((n_trees, n_directed, 2), n_directed, dtype=np.intp)
        self.order = np.empty((n_trees, n_directed), dtype=np.intp)
        self.down_order = np.empty((n_trees, n_edges), dtype=np.intp)
        # PCSP ids wait for the pad value until every key is numbered; -1 marks a pad slot
        root_pcsps = np.full((n_trees, n_edges, 2), -1, dtype=np.intp)
        pairs = np.full((n_trees, n_directed, 2), -1, dtype=np.intp)

        def pcsp_id(key: PcspKey) -> int:
            return self.pcsp_ids.setdefault(key, len(self.pcsp_ids))

        for u, tree in enumerate(trees):
            if tree.taxa != self.taxa:
                raise TaxonMismatchError("Indexed trees must share one taxon set")
            structure = rooting_structure(tree)
            for e, split in enumerate(structure.root_splits):
                self.root_idx[u, e] = self.root_ids.setdefault(split, len(self.root_ids))
                for s, key in enumerate(structure.root_pcsps[e]):
                    root_pcsps[u, e, s] = pcsp_id(key)
            for d, outs in enumerate(structure.outs):
                keys = dict(structure.pairs[d])
                for j, nxt in enumerate(outs):
                    self.out_idx[u, d, j] = nxt
                    if nxt in keys:
                        pairs[u, d, j] = pcsp_id(keys[nxt])
            sizes = [bits.bit_count() for bits in structure.clades]
            self.order[u] = np.argsort(sizes, kind="stable")
            self.down_order[u] = structure.down_order
        for split in extra_roots:
            self.root_ids.setdefault(split, len(self.root_ids))
        for key in extra_pcsps:
            pcsp_id(key)

        self.root_keys = list(self.root_ids)
        self.pcsp_keys = list(self.pcsp_ids)
        self.pad = len(self.pcsp_keys)
        self.root_pcsp_idx = np.where(root_pcsps < 0, self.pad, root_pcsps)
        self.pair_idx = np.where(pairs < 0, self.pad, pairs)
        self._flip = np.arange(n_directed) ^ 1

        group_ids: dict[tuple[Subsplit, Clade], int] = {}
        self.pcsp_group = np.array(
            [group_ids.setdefault(k.group, len(group_ids)) for k in self.pcsp_keys],
            dtype=np.intp,
        )
        self.n_groups = len(group_ids)
        logger.debug(
            "Built rooting index",
            extra={
                "trees": n_trees,
                "root_splits": len(self.root_keys),
                "pcsps": len(self.pcsp_keys),
            },
        )

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def n_edges(self) -> int:
        return self.root_idx.shape[1]

    def lookup(self, params: SbnLookup) -> tuple[np.ndarray, np.ndarray]:
        """Lay out the probabilities of ``params`` over the index ids."""
        if params.taxa != self.taxa:
            raise TaxonMismatchError("Parameters and indexed trees use different taxon sets")
        root_p = np.array([params.root_prob(k) for k in self.root_keys], dtype=float)
        pcsp_p = np.array([params.cond_prob(k) for k in self.pcsp_keys], dtype=float)
        return root_p, pcsp_p

    def count_vectors(self, table: CountsTable) -> tuple[np.ndarray, np.ndarray]:
        """Lay out a CountsTable over the index ids.

        Raises:
            UsageError: If the table holds keys the index does not number.
        """
        root_c = np.zeros(len(self.root_keys))
        pcsp_c = np.zeros(len(self.pcsp_keys))
        try:
            for split, weight in table.root_counts.items():
                root_c[self.root_ids[split]] += weight
            for key, weight in table.pcsp_counts.items():
                pcsp_c[self.pcsp_ids[key]] += weight
        except KeyError:
            raise UsageError("Counts contain keys outside the rooting index") from None
        return root_c, pcsp_c

    def below_log_products(self, log_pcsp: np.ndarray) -> np.ndarray:
        """Log product of all conditionals beyond each directed edge.

        ``log_pcsp`` carries one trailing zero for the pad id. Returns a
        ``(trees, directed edges + 1)`` array whose sentinel column is zero.
        """
        rows = np.arange(self.n_trees)
        below = np.zeros((self.n_trees, self.order.shape[1] + 1))
        for d in self.order.T:
            beyond = below[rows[:, None], self.out_idx[rows, d]]
            below[rows, d] = (log_pcsp[self.pair_idx[rows, d]] + beyond).sum(axis=1)
        return below

    def log_joints(self, root_p: np.ndarray, pcsp_p: np.ndarray) -> np.ndarray:
        """Log probability of every (tree, rooting edge) pair, by two passes."""
        with np.errstate(divide="ignore"):
            log_root = np.log(root_p)
            log_pcsp = np.append(np.log(pcsp_p), 0.0)
        below = self.below_log_products(log_pcsp)
        n_directed = 2 * self.n_edges
        return (
            log_root[self.root_idx]
            + log_pcsp[self.root_pcsp_idx].sum(axis=2)
            + below[:, 0:n_directed:2]
            + below[:, 1:n_directed:2]
        )

    @staticmethod
    def tree_log_probs(log_joints: np.ndarray) -> np.ndarray:
        """Log unrooted probability per tree (-inf for unsupported trees)."""
        with np.errstate(divide="ignore"):
            return logsumexp(log_joints, axis=1)

    @staticmethod
    def posterior(log_joints: np.ndarray, tree_log_probs: np.ndarray) -> np.ndarray:
        """Rooting posterior per tree; rows of unsupported trees are zero."""
        q = np.zeros_like(log_joints)
        supported = np.isfinite(tree_log_probs)
        if supported.any():
            q[supported] = softmax(log_joints[supported], axis=1)
        return q

    def head_mass(self, rooting_weights: np.ndarray) -> np.ndarray:
        """Rooting weight on the head side of each directed edge, edge included.

        Downward edges fill from the leaves up; each upward edge is the
        complement of its downward twin plus the edge itself.
        """
        rows = np.arange(self.n_trees)
        n_directed = 2 * self.n_edges
        mass = np.zeros((self.n_trees, n_directed + 1))
        for e in self.down_order.T:
            beyond = mass[rows[:, None], self.out_idx[rows, 2 * e]]
            mass[rows, 2 * e] = rooting_weights[rows, e] + beyond.sum(axis=1)
        total = rooting_weights.sum(axis=1, keepdims=True)
        mass[:, 1:n_directed:2] = total - mass[:, 0:n_directed:2] + rooting_weights
        return mass[:, :n_directed]

    def accumulate(self, rooting_weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Expected root-split and PCSP counts for per-rooting weights.

        A PCSP formed at the head of directed edge ``d`` occurs in exactly
        the rootings on the tail side of ``d``.
        """
        flat = rooting_weights.ravel()
        root_c = np.bincount(self.root_idx.ravel(), weights=flat, minlength=len(self.root_keys))
        tail_mass = self.head_mass(rooting_weights)[:, self._flip]
        size = self.pad + 1
        pcsp_c = np.bincount(
            self.root_pcsp_idx.ravel(), weights=np.repeat(flat, 2), minlength=size
        ) + np.bincount(
            self.pair_idx.ravel(), weights=np.repeat(tail_mass.ravel(), 2), minlength=size
        )
        return root_c, pcsp_c[: self.pad]

    def normalize(
        self, root_c: np.ndarray, pcsp_c: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Closed-form update: root counts over their sum, PCSPs within groups."""
        total = root_c.sum()
        if total <= 0.0:
            raise EmptySampleError("No root-split weight to normalize")
        group_totals = np.bincount(self.pcsp_group, weights=pcsp_c, minlength=self.n_groups)
        denom = group_totals[self.pcsp_group]
        pcsp_p = np.divide(pcsp_c, denom, out=np.zeros_like(pcsp_c), where=denom > 0)
        return root_c / total, pcsp_p

    def tree_probs(self, root_p: np.ndarray, pcsp_p: np.ndarray) -> np.ndarray:
        """Unrooted probability per tree as a plain sum of its joints."""
        return np.exp(self.log_joints(root_p, pcsp_p)).sum(axis=1)


@lru_cache(maxsize=8)
def compile_index(trees: tuple[UnrootedTopology, ...]) -> RootingIndex:
    """Cached RootingIndex for a fixed tree tuple (e.g. an enumerated space)."""
    return RootingIndex(trees)
