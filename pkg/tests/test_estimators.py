"""Tests for closed-form estimators and parameter containers.

Tests cover:
- ML, SA, CCD and SRF fits on small hand-checked samples
- Single-tree exactness of every estimator
- Consistency checks on parameter containers
"""

import math

import pytest

from src.core import TaxonSet, make_subsplit
from src.counting import CountsTable, collect_rooted_counts, collect_sa_counts
from src.errors import EmptySampleError, IncompatibleSubsplitError, NormalizationError, UsageError
from src.estimators import (
    SBNParams,
    fit_ccd,
    fit_ml_rooted,
    fit_sa,
    fit_srf,
    params_from_counts,
)
from src.evaluation import ccd_prob, sbn_prob_rooted, sbn_prob_unrooted, srf_prob
from src.treespace import WeightedTree, as_unrooted, parse_newick, tree_id

EXAMPLE_NEWICK = "(((O1,O2),(O3,(O4,O5))),((O6,O7),O8));"


@pytest.fixture
def taxa():
    return TaxonSet(tuple(f"O{i}" for i in range(1, 9)))


@pytest.fixture
def example_tree(taxa):
    return parse_newick(EXAMPLE_NEWICK, taxa)


@pytest.fixture
def abcd():
    return TaxonSet(("A", "B", "C", "D"))


class TestMaximumLikelihood:
    """Tests for the rooted ML estimator."""

    def test_conditional_is_relative_frequency(self, taxa):
        """(C4,C5) seen under C2 in two of three trees gives 2/3."""
        trees = [
            parse_newick(EXAMPLE_NEWICK, taxa),
            parse_newick(EXAMPLE_NEWICK, taxa),
            parse_newick("(((O1,(O2,O3)),(O4,O5)),((O6,O7),O8));", taxa),
        ]
        params = fit_ml_rooted(collect_rooted_counts(trees))
        c2 = taxa.clade(["O1", "O2", "O3", "O4", "O5"])
        c3 = taxa.clade(["O6", "O7", "O8"])
        root = make_subsplit(c2, c3)
        child = make_subsplit(taxa.clade(["O1", "O2"]), taxa.clade(["O3", "O4", "O5"]))
        assert params.root_prob(root) == 1.0
        assert math.isclose(params.cond_dist[(root, c2)][child], 2 / 3)

    def test_single_tree_gets_probability_one(self, example_tree):
        params = fit_ml_rooted(collect_rooted_counts([example_tree]))
        assert sbn_prob_rooted(params, example_tree) == 1.0
        assert params.check_consistency() == []

    def test_empty_counts_rejected(self, taxa):
        with pytest.raises(EmptySampleError):
            fit_ml_rooted(CountsTable(taxa))


class TestSimpleAverage:
    """Tests for the simple-average estimator."""

    def test_four_taxon_single_tree_has_five_root_splits(self, abcd):
        params = fit_sa([parse_newick("((A,B),(C,D));", abcd)])
        assert len(params.root_dist) == 5
        for prob in params.root_dist.values():
            assert math.isclose(prob, 0.2)

    def test_single_tree_exactness(self, example_tree):
        params = fit_sa([as_unrooted(example_tree)])
        assert math.isclose(sbn_prob_unrooted(params, example_tree), 1.0, abs_tol=1e-12)

    def test_rooted_input_is_unrooted(self, example_tree):
        assert fit_sa([example_tree]) == fit_sa([as_unrooted(example_tree)])

    def test_weights_act_like_repetition(self, abcd):
        t1 = parse_newick("((A,B),(C,D));", abcd)
        t2 = parse_newick("((A,C),(B,D));", abcd)
        weighted = fit_sa([WeightedTree(t1, 3.0), t2])
        repeated = fit_sa([t1, t1, t1, t2])
        for split, prob in repeated.root_dist.items():
            assert math.isclose(weighted.root_prob(split), prob)


class TestParamsFromCounts:
    """Tests for the shared closed-form update."""

    def test_regularization_blends_prior(self, abcd):
        t1 = parse_newick("((A,B),(C,D));", abcd)
        t2 = parse_newick("((A,C),(B,D));", abcd)
        counts = collect_rooted_counts([t1])
        prior = collect_rooted_counts([t2])
        params = params_from_counts(counts, prior, alpha=1.0)
        assert math.isclose(params.root_prob(t1.root_split), 0.5)
        assert math.isclose(params.root_prob(t2.root_split), 0.5)

    def test_negative_alpha_rejected(self, abcd):
        counts = collect_rooted_counts([parse_newick("((A,B),(C,D));", abcd)])
        with pytest.raises(UsageError):
            params_from_counts(counts, alpha=-1.0)


class TestCcd:
    """Tests for the conditional clade distribution."""

    def test_single_tree_exactness(self, example_tree):
        params = fit_ccd([example_tree])
        assert math.isclose(ccd_prob(params, example_tree), 1.0, abs_tol=1e-12)

    def test_clade_frequencies(self, abcd):
        t1 = parse_newick("(A,B,(C,D));", abcd)
        t2 = parse_newick("(A,C,(B,D));", abcd)
        params = fit_ccd([t1, t1, t1, t2])
        assert math.isclose(ccd_prob(params, t1), 0.75)
        assert math.isclose(ccd_prob(params, t2), 0.25)
        assert params.check_consistency() == []


class TestSrf:
    """Tests for sample relative frequencies."""

    def test_frequencies(self, abcd):
        t1 = parse_newick("(A,B,(C,D));", abcd)
        t2 = parse_newick("(A,C,(B,D));", abcd)
        params = fit_srf([t1, WeightedTree(t2, 3.0)])
        assert params.probs == {tree_id(t1): 0.25, tree_id(t2): 0.75}
        assert srf_prob(params, t2) == 0.75

    def test_unseen_tree_has_zero_probability(self, abcd):
        params = fit_srf([parse_newick("(A,B,(C,D));", abcd)])
        assert srf_prob(params, parse_newick("(A,D,(B,C));", abcd)) == 0.0


class TestSbnParams:
    """Tests for SBNParams consistency checks."""

    def test_non_normalized_root_reported(self, abcd):
        split = make_subsplit(abcd.clade(["A", "B"]), abcd.clade(["C", "D"]))
        params = SBNParams(abcd, {split: 0.5})
        assert params.check_consistency() == ["root distribution sums to 0.5"]
        with pytest.raises(NormalizationError):
            params.validate()

    def test_incompatible_child_reported(self, taxa, example_tree):
        params = fit_sa([example_tree])
        (parent, focal), children = next(iter(params.cond_dist.items()))
        wrong = make_subsplit(taxa.clade(["O1"]), taxa.clade(["O2"]))
        params.cond_dist[(parent, focal)] = {wrong: 1.0}
        with pytest.raises(IncompatibleSubsplitError):
            params.validate()

    def test_support_size(self, abcd):
        params = fit_sa([parse_newick("((A,B),(C,D));", abcd)])
        assert params.support_size() == {"root_splits": 5, "pcsps": 4}

    def test_sa_counts_total_weight(self, example_tree):
        assert math.isclose(collect_sa_counts([example_tree, example_tree]).total_root_weight, 2.0)
