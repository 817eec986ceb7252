"""Tests for decompositions, rooting structures and count tables.

Tests cover:
- Root split and PCSPs of the eight-taxon example tree
- Rooting structures agree with decomposing each rooting from scratch
- Simple-average and expected counts
- CountsTable merging and scaling
"""

import math

import numpy as np
import pytest

from src.core import PcspKey, TaxonSet, make_subsplit
from src.counting import (
    CountsTable,
    build_rooting_structure,
    clade_decomposition,
    collect_em_counts,
    collect_rooted_counts,
    collect_sa_counts,
    decompose_rooted,
    rooting_structure,
)
from src.errors import EmptySampleError, TaxonMismatchError, UsageError
from src.estimators import SBNParams
from src.treespace import (
    WeightedTree,
    as_unrooted,
    parse_newick,
    random_unrooted,
    root_at_edge,
)

EXAMPLE_NEWICK = "(((O1,O2),(O3,(O4,O5))),((O6,O7),O8));"


@pytest.fixture
def taxa():
    return TaxonSet(tuple(f"O{i}" for i in range(1, 9)))


@pytest.fixture
def example_tree(taxa):
    return parse_newick(EXAMPLE_NEWICK, taxa)


@pytest.fixture
def clades(taxa):
    """Named clades of the example tree."""
    c = lambda *names: taxa.clade(names)  # noqa: E731
    return {
        "C2": c("O1", "O2", "O3", "O4", "O5"),
        "C3": c("O6", "O7", "O8"),
        "C4": c("O1", "O2"),
        "C5": c("O3", "O4", "O5"),
        "C6": c("O4", "O5"),
        "C7": c("O6", "O7"),
        "O3": c("O3"),
        "O8": c("O8"),
    }


class TestRootedDecomposition:
    """Tests for decompose_rooted and clade_decomposition."""

    def test_example_tree(self, example_tree, clades):
        root = make_subsplit(clades["C2"], clades["C3"])
        c2_split = make_subsplit(clades["C4"], clades["C5"])
        c5_split = make_subsplit(clades["O3"], clades["C6"])
        c3_split = make_subsplit(clades["C7"], clades["O8"])

        decomposition = decompose_rooted(example_tree)

        assert decomposition.root_split == root
        assert set(decomposition.pcsps) == {
            PcspKey(root, clades["C2"], c2_split),
            PcspKey(c2_split, clades["C5"], c5_split),
            PcspKey(root, clades["C3"], c3_split),
        }

    def test_clade_decomposition_root_first(self, example_tree, taxa, clades):
        pairs = clade_decomposition(example_tree)
        assert pairs[0][0] == taxa.full
        assert {clade for clade, _ in pairs} == {
            taxa.full, clades["C2"], clades["C3"], clades["C5"]
        }

    def test_three_taxa_have_no_pcsps(self):
        taxa = TaxonSet(("A", "B", "C"))
        decomposition = decompose_rooted(parse_newick("((A,B),C);", taxa))
        assert decomposition.pcsps == ()

    def test_two_taxa_rejected(self):
        taxa = TaxonSet(("A", "B"))
        with pytest.raises(UsageError):
            decompose_rooted(parse_newick("(A,B);", taxa))


class TestRootingStructure:
    """Tests for the directed-edge structure of unrooted trees."""

    def test_rooted_pcsps_match_decomposition(self, example_tree):
        tree = as_unrooted(example_tree)
        structure = build_rooting_structure(tree)
        for e in range(tree.n_edges):
            expected = decompose_rooted(root_at_edge(tree, e))
            assert structure.root_splits[e] == expected.root_split
            assert sorted(structure.rooted_pcsps(e)) == sorted(expected.pcsps)

    def test_random_trees_match_decomposition(self):
        taxa = TaxonSet(tuple(f"t{i}" for i in range(10)))
        rng = np.random.default_rng(11)
        for _ in range(10):
            tree = random_unrooted(taxa, rng)
            structure = build_rooting_structure(tree)
            for e in range(tree.n_edges):
                expected = decompose_rooted(root_at_edge(tree, e))
                assert sorted(structure.rooted_pcsps(e)) == sorted(expected.pcsps)

    def test_cached_structure_is_reused(self, example_tree):
        tree = as_unrooted(example_tree)
        assert rooting_structure(tree) is rooting_structure(tree)

    def test_expected_mass_counts_rootings_per_pcsp(self, example_tree):
        """mass[d ^ 1] equals the number of rootings containing each pair PCSP."""
        tree = as_unrooted(example_tree)
        structure = build_rooting_structure(tree)
        mass = structure.expected_mass([1.0] * tree.n_edges)
        occurrences: dict[PcspKey, int] = {}
        for e in range(tree.n_edges):
            for key in structure.rooted_pcsps(e):
                occurrences[key] = occurrences.get(key, 0) + 1
        for d, entries in enumerate(structure.pairs):
            for _, key in entries:
                rooted_here = sum(1 for e in range(tree.n_edges) if key in structure.root_pcsps[e])
                assert occurrences[key] == mass[d ^ 1] + rooted_here


class TestCountsTable:
    """Tests for CountsTable arithmetic."""

    def test_merge_adds_weights(self, taxa, clades):
        split = make_subsplit(clades["C2"], clades["C3"])
        a = CountsTable(taxa, total_trees=1.0)
        a.add_root(split, 1.0)
        b = CountsTable(taxa, total_trees=2.0)
        b.add_root(split, 2.0)

        merged = a + b

        assert merged.root_counts[split] == 3.0
        assert merged.total_trees == 3.0
        assert a.root_counts[split] == 1.0

    def test_merge_rejects_other_taxa(self, taxa):
        other = TaxonSet(("A", "B", "C"))
        with pytest.raises(TaxonMismatchError):
            CountsTable(taxa).merge(CountsTable(other))

    def test_scaled(self, taxa, clades):
        split = make_subsplit(clades["C2"], clades["C3"])
        table = CountsTable(taxa, {split: 2.0}, total_trees=2.0)
        assert table.scaled(0.5).root_counts[split] == 1.0

    def test_group_totals(self, example_tree):
        table = collect_rooted_counts([example_tree, example_tree])
        totals = table.group_totals()
        assert len(totals) == 3
        assert all(v == 2.0 for v in totals.values())


class TestCollect:
    """Tests for the collect_* folds."""

    def test_rooted_counts_of_example_tree(self, example_tree):
        table = collect_rooted_counts([example_tree])
        assert table.root_counts == {example_tree.root_split: 1.0}
        assert all(v == 1.0 for v in table.pcsp_counts.values())
        assert len(table.pcsp_counts) == 3

    def test_rooted_counts_reject_unrooted(self, example_tree):
        with pytest.raises(UsageError, match="rooted"):
            collect_rooted_counts([as_unrooted(example_tree)])

    def test_rooted_counts_reject_empty(self):
        with pytest.raises(EmptySampleError):
            collect_rooted_counts([])

    def test_sa_counts_spread_uniformly(self, example_tree):
        tree = as_unrooted(example_tree)
        table = collect_sa_counts([WeightedTree(tree, 13.0)])
        assert math.isclose(table.total_root_weight, 13.0)
        assert len(table.root_counts) == tree.n_edges
        for weight in table.root_counts.values():
            assert math.isclose(weight, 1.0)

    def test_sa_counts_equal_average_of_rooted_counts(self, example_tree):
        tree = as_unrooted(example_tree)
        rooted = [root_at_edge(tree, e) for e in range(tree.n_edges)]
        expected = collect_rooted_counts(rooted).scaled(1.0 / tree.n_edges)
        table = collect_sa_counts([tree])
        assert table.root_counts.keys() == expected.root_counts.keys()
        assert table.pcsp_counts.keys() == expected.pcsp_counts.keys()
        for key, weight in expected.pcsp_counts.items():
            assert math.isclose(table.pcsp_counts[key], weight)

    def test_em_counts_with_point_mass_rooting(self, example_tree):
        """Parameters fitted to one rooted tree put all expected mass on that rooting."""
        rooted_counts = collect_rooted_counts([example_tree])
        params = SBNParams(
            example_tree.taxa,
            {example_tree.root_split: 1.0},
            {key.group: {key.child: 1.0} for key in rooted_counts.pcsp_counts},
        )
        table = collect_em_counts([as_unrooted(example_tree)], params)
        assert table.root_counts == {example_tree.root_split: 1.0}
        for key, weight in table.pcsp_counts.items():
            assert math.isclose(weight, rooted_counts.pcsp_counts.get(key, 0.0), abs_tol=1e-12)

    def test_em_counts_skip_unsupported_trees(self, example_tree, taxa):
        params = SBNParams(taxa, {example_tree.root_split: 1.0}, {})
        other = as_unrooted(parse_newick("(((O1,O8),(O3,(O4,O5))),((O6,O7),O2));", taxa))
        table = collect_em_counts([other], params)
        assert table.skipped_trees == 1.0
        assert table.root_counts == {}
