"""Tests for exhaustive normalization audits.

Tests cover:
- Every estimator sums to one over the unrooted space on randomly weighted samples
- An eight-taxon spot check per estimator
- SBN parameters sum to one over the rooted space
- Cap and model-type checks
"""

import math
from functools import partial

import numpy as np
import pytest

from src.core import TaxonSet
from src.counting import collect_rooted_counts
from src.errors import EnumerationCapError, UsageError
from src.estimators import EmConfig, fit_ccd, fit_em, fit_ml_rooted, fit_sa, fit_srf
from src.evaluation import RootingSpace, normalization_audit
from src.treespace import WeightedTree, enumerate_rooted, random_unrooted, root_at_edge

SAMPLES_PER_SIZE = 20


def make_taxa(n):
    return TaxonSet(tuple(f"t{i}" for i in range(1, n + 1)))


def random_sample(n_taxa, size, seed):
    taxa = make_taxa(n_taxa)
    rng = np.random.default_rng(seed)
    return [random_unrooted(taxa, rng) for _ in range(size)]


def weighted_sample(n_taxa, seed):
    """Between 5 and 30 random trees with integer weights from 1 to 10."""
    rng = np.random.default_rng(seed)
    trees = random_sample(n_taxa, int(rng.integers(5, 31)), seed)
    return [WeightedTree(tree, float(rng.integers(1, 11))) for tree in trees]


def fit_em_with(sample, alpha):
    params, _ = fit_em(sample, EmConfig(alpha=alpha, max_iters=50))
    return params


def fit_ml(sample):
    """Root every tree on a random edge and count the rooted sample exactly."""
    rng = np.random.default_rng(len(sample))
    rooted = [
        WeightedTree(root_at_edge(tree, int(rng.integers(tree.n_edges))), weight)
        for tree, weight in sample
    ]
    return fit_ml_rooted(collect_rooted_counts(rooted))


ESTIMATORS = {
    "sa": fit_sa,
    "em": partial(fit_em_with, alpha=0.0),
    "em-regularized": partial(fit_em_with, alpha=0.1),
    "ml": fit_ml,
    "ccd": fit_ccd,
    "srf": fit_srf,
}


class TestNormalization:
    """Fitted models are proper distributions over tree space."""

    @pytest.mark.parametrize("name", sorted(ESTIMATORS))
    @pytest.mark.parametrize("n_taxa", [5, 6, 7])
    def test_unrooted_total_is_one(self, name, n_taxa):
        for seed in range(SAMPLES_PER_SIZE):
            sample = weighted_sample(n_taxa, 100 * n_taxa + seed)
            total = normalization_audit(ESTIMATORS[name](sample))
            assert math.isclose(total, 1.0, abs_tol=1e-9), (seed, total)

    @pytest.mark.parametrize("name", sorted(ESTIMATORS))
    def test_eight_taxa_spot_check(self, name):
        params = ESTIMATORS[name](weighted_sample(8, 800))
        assert math.isclose(normalization_audit(params), 1.0, abs_tol=1e-9)

    @pytest.mark.parametrize("n_taxa", [4, 5, 6])
    def test_rooted_total_is_one(self, n_taxa):
        params = fit_sa(random_sample(n_taxa, 8, 30 + n_taxa))
        total = normalization_audit(params, RootingSpace.ROOTED)
        assert math.isclose(total, 1.0, abs_tol=1e-9)

    def test_rooted_total_of_regularized_em(self):
        params = fit_em_with(weighted_sample(6, 61), alpha=0.1)
        assert math.isclose(normalization_audit(params, RootingSpace.ROOTED), 1.0, abs_tol=1e-9)

    def test_uniform_rooted_ml_covers_rooted_space(self):
        taxa = make_taxa(5)
        params = fit_ml_rooted(collect_rooted_counts(list(enumerate_rooted(taxa))))
        assert math.isclose(normalization_audit(params, RootingSpace.ROOTED), 1.0, abs_tol=1e-9)


class TestAuditErrors:
    """Tests for refused audits."""

    def test_cap_is_enforced(self):
        params = fit_sa(random_sample(11, 2, 1))
        with pytest.raises(EnumerationCapError):
            normalization_audit(params, cap=10)

    def test_rooted_space_needs_sbn(self):
        params = fit_ccd(random_sample(5, 4, 2))
        with pytest.raises(UsageError, match="rooted"):
            normalization_audit(params, RootingSpace.ROOTED)
