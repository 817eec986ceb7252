"""Tests for rooted and unrooted topologies.

Tests cover:
- Canonical forms (isomorphic inputs compare equal)
- Split-set validation of unrooted trees
- Rooting on an edge and unrooting again
- Weighted samples and duplicate merging
"""

import numpy as np
import pytest

from src.core import TaxonSet
from src.errors import EmptySampleError, TaxonMismatchError, UsageError, ValidationError
from src.treespace import (
    RootedTopology,
    UnrootedTopology,
    WeightedTree,
    as_unrooted,
    as_weighted,
    merge_duplicates,
    random_unrooted,
    root_at_edge,
    sample_taxa,
    unroot,
)


@pytest.fixture
def taxa5():
    return TaxonSet(("A", "B", "C", "D", "E"))


@pytest.fixture
def tree5(taxa5):
    """((A,B),(C,(D,E))) as an unrooted tree."""
    return as_unrooted(RootedTopology.from_nested(taxa5, ((0, 1), (2, (3, 4)))))


class TestRootedTopology:
    """Tests for RootedTopology."""

    def test_isomorphic_inputs_are_equal(self, taxa5):
        a = RootedTopology.from_nested(taxa5, ((0, 1), (2, (3, 4))))
        b = RootedTopology.from_nested(taxa5, (((4, 3), 2), (1, 0)))
        assert a == b
        assert hash(a) == hash(b)

    def test_canonical_form_puts_greater_clade_first(self, taxa5):
        tree = RootedTopology.from_nested(taxa5, ((2, (4, 3)), (1, 0)))
        assert tree.root == ((0, 1), (2, (3, 4)))

    def test_root_split(self, taxa5):
        tree = RootedTopology.from_nested(taxa5, ((0, 1), (2, (3, 4))))
        assert taxa5.format_subsplit(tree.root_split) == "A,B|C,D,E"

    def test_clades_in_preorder(self, taxa5):
        tree = RootedTopology.from_nested(taxa5, ((0, 1), (2, (3, 4))))
        clades = [taxa5.format_clade(c) for c in tree.clades()]
        assert clades[0] == "A,B,C,D,E"
        assert clades[1] == "A,B"
        assert len(clades) == 9

    @pytest.mark.parametrize(
        "nested",
        [
            ((0, 1), (2, 3)),
            ((0, 1), (2, (3, 3))),
            ((0, 1, 2), (3, 4)),
            ((0, 1), (2, (3, 5))),
        ],
    )
    def test_invalid_nesting_rejected(self, taxa5, nested):
        with pytest.raises(ValidationError):
            RootedTopology.from_nested(taxa5, nested)


class TestUnrootedTopology:
    """Tests for UnrootedTopology."""

    def test_edge_count(self, tree5):
        assert tree5.n_edges == 7
        assert len(set(tree5.splits)) == 7

    def test_splits_never_contain_taxon_zero(self, tree5, taxa5):
        assert all(not s & taxa5.bit(0) for s in tree5.splits)
        assert list(tree5.splits) == sorted(tree5.splits, reverse=True)

    def test_rootings_of_same_tree_unroot_equal(self, taxa5):
        a = RootedTopology.from_nested(taxa5, ((0, 1), (2, (3, 4))))
        b = RootedTopology.from_nested(taxa5, (0, (1, (2, (3, 4)))))
        assert as_unrooted(a) == as_unrooted(b)

    def test_from_splits_accepts_either_side(self, tree5, taxa5):
        full = taxa5.full.bits
        flipped = [full ^ s if i % 2 else s for i, s in enumerate(tree5.splits)]
        assert UnrootedTopology.from_splits(taxa5, flipped) == tree5

    def test_from_splits_rejects_incompatible(self, taxa5):
        b = taxa5.bit
        splits = [
            b(1) | b(2) | b(3) | b(4),
            b(1) | b(2),
            b(2) | b(3),
            b(1), b(2), b(3), b(4),
        ]
        with pytest.raises(ValidationError, match="compatible"):
            UnrootedTopology.from_splits(taxa5, splits)

    def test_from_splits_rejects_wrong_count(self, taxa5):
        with pytest.raises(ValidationError, match="Expected 7"):
            UnrootedTopology.from_splits(taxa5, [taxa5.bit(1)])

    def test_bipartition_covers_all_taxa(self, tree5, taxa5):
        for e in range(tree5.n_edges):
            assert tree5.bipartition(e).clade == taxa5.full

    def test_graph_top_is_pendant_edge_of_taxon_zero(self, tree5, taxa5):
        graph = tree5.graph
        assert tree5.splits[graph.top] == taxa5.full.bits ^ taxa5.bit(0)
        assert graph.parent[graph.top] == -1
        assert sum(1 for p in graph.parent if p == -1) == 1


class TestRooting:
    """Tests for root_at_edge and unroot."""

    def test_root_then_unroot_is_identity(self, tree5):
        for e in range(tree5.n_edges):
            rooted = root_at_edge(tree5, e)
            assert unroot(rooted) == (tree5, e)

    def test_distinct_edges_give_distinct_rooted_trees(self, tree5):
        rooted = {root_at_edge(tree5, e) for e in range(tree5.n_edges)}
        assert len(rooted) == tree5.n_edges

    def test_root_split_matches_bipartition(self, tree5):
        for e in range(tree5.n_edges):
            assert root_at_edge(tree5, e).root_split == tree5.bipartition(e)

    def test_out_of_range_edge(self, tree5):
        with pytest.raises(UsageError, match="out of range"):
            root_at_edge(tree5, 7)

    def test_random_trees_round_trip(self):
        taxa = TaxonSet(tuple(f"t{i}" for i in range(12)))
        rng = np.random.default_rng(3)
        for _ in range(20):
            tree = random_unrooted(taxa, rng)
            assert UnrootedTopology.from_splits(taxa, tree.splits) == tree
            e = int(rng.integers(tree.n_edges))
            assert unroot(root_at_edge(tree, e)) == (tree, e)


class TestWeightedSamples:
    """Tests for weighted sample helpers."""

    def test_bare_trees_get_unit_weight(self, tree5):
        assert as_weighted([tree5]) == [WeightedTree(tree5, 1.0)]

    def test_non_positive_weight_rejected(self, tree5):
        with pytest.raises(ValidationError, match="positive"):
            as_weighted([WeightedTree(tree5, 0.0)])

    def test_merge_duplicates_sums_weights(self, tree5, taxa5):
        other = as_unrooted(RootedTopology.from_nested(taxa5, ((0, 2), (1, (3, 4)))))
        merged = merge_duplicates([tree5, WeightedTree(other, 2.0), WeightedTree(tree5, 3.0)])
        assert merged == [WeightedTree(tree5, 4.0), WeightedTree(other, 2.0)]

    def test_sample_taxa_rejects_empty(self):
        with pytest.raises(EmptySampleError):
            sample_taxa([])

    def test_sample_taxa_rejects_mixed_sets(self, tree5):
        other_taxa = TaxonSet(("A", "B", "C", "D", "F"))
        other = as_unrooted(RootedTopology.from_nested(other_taxa, ((0, 1), (2, (3, 4)))))
        with pytest.raises(TaxonMismatchError):
            sample_taxa([WeightedTree(tree5, 1.0), WeightedTree(other, 1.0)])
