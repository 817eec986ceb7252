"""Tests for the vectorized RootingIndex.

Tests cover:
- Joints agree with the per-tree two-pass computation
- Accumulated counts agree with the dictionary accumulator
- Head-side rooting mass per directed edge
- Group-wise normalization
"""

import math

import numpy as np
import pytest

from src.core import TaxonSet
from src.counting import (
    RootingIndex,
    collect_em_counts,
    collect_sa_counts,
    compile_index,
    rooting_structure,
)
from src.errors import EmptySampleError, UsageError
from src.estimators import fit_sa
from src.evaluation import sbn_prob_unrooted
from src.treespace import WeightedTree, enumerate_unrooted, random_unrooted


@pytest.fixture
def taxa():
    return TaxonSet(tuple(f"t{i}" for i in range(1, 8)))


@pytest.fixture
def sample(taxa):
    rng = np.random.default_rng(5)
    return [random_unrooted(taxa, rng) for _ in range(15)]


class TestRootingIndex:
    """Tests for RootingIndex."""

    def test_shapes(self, sample):
        index = RootingIndex(sample)
        assert index.root_idx.shape == (len(sample), 11)
        assert index.root_pcsp_idx.shape == (len(sample), 11, 2)
        assert index.out_idx.shape == (len(sample), 22, 2)
        assert index.pair_idx.shape == (len(sample), 22, 2)
        assert index.pcsp_group.shape == (len(index.pcsp_keys),)

    def test_joints_match_two_pass(self, sample):
        params = fit_sa(sample)
        index = RootingIndex(sample)
        joints = np.exp(index.log_joints(*index.lookup(params)))
        for u, tree in enumerate(sample):
            expected = rooting_structure(tree).joints(params.root_prob, params.cond_prob)
            np.testing.assert_allclose(joints[u], expected, rtol=1e-12, atol=0.0)

    def test_head_mass_matches_per_tree_accumulator(self, sample):
        index = RootingIndex(sample)
        rng = np.random.default_rng(9)
        q = rng.dirichlet(np.ones(index.n_edges), size=index.n_trees)
        mass = index.head_mass(q)
        for u, tree in enumerate(sample):
            expected = rooting_structure(tree).expected_mass(list(q[u]))
            np.testing.assert_allclose(mass[u], expected, rtol=1e-12, atol=1e-15)

    def test_tree_log_probs_match_unrooted_probability(self, sample):
        params = fit_sa(sample[:3])
        index = RootingIndex(sample, params.root_dist, [k for k, _ in params.pcsp_items()])
        log_joints = index.log_joints(*index.lookup(params))
        tree_ll = index.tree_log_probs(log_joints)
        q = index.posterior(log_joints, tree_ll)
        assert np.isfinite(tree_ll[:3]).all()
        for u, tree in enumerate(sample):
            expected = sbn_prob_unrooted(params, tree)
            assert math.isclose(math.exp(tree_ll[u]), expected, rel_tol=1e-10)
            if expected == 0.0:
                assert not q[u].any()

    def test_accumulate_matches_em_counts(self, sample):
        params = fit_sa(sample)
        index = RootingIndex(sample)
        log_joints = index.log_joints(*index.lookup(params))
        q = index.posterior(log_joints, index.tree_log_probs(log_joints))
        root_c, pcsp_c = index.accumulate(q)

        expected_root, expected_pcsp = index.count_vectors(collect_em_counts(sample, params))

        np.testing.assert_allclose(root_c, expected_root, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(pcsp_c, expected_pcsp, rtol=1e-10, atol=1e-12)

    def test_uniform_rooting_weights_give_sa_counts(self, sample):
        index = RootingIndex(sample)
        q = np.full(index.root_idx.shape, 1.0 / index.n_edges)
        root_c, pcsp_c = index.accumulate(q)
        expected_root, expected_pcsp = index.count_vectors(collect_sa_counts(sample))
        np.testing.assert_allclose(root_c, expected_root, rtol=1e-10)
        np.testing.assert_allclose(pcsp_c, expected_pcsp, rtol=1e-10, atol=1e-12)

    def test_normalize_sums_to_one_per_group(self, sample):
        index = RootingIndex(sample)
        root_c, pcsp_c = index.count_vectors(collect_sa_counts(sample))
        root_p, pcsp_p = index.normalize(root_c, pcsp_c)
        assert math.isclose(root_p.sum(), 1.0)
        group_sums = np.bincount(index.pcsp_group, weights=pcsp_p, minlength=index.n_groups)
        np.testing.assert_allclose(group_sums, 1.0)

    def test_tree_probs_over_full_space_sum_to_one(self):
        taxa = TaxonSet(tuple(f"t{i}" for i in range(1, 7)))
        space = tuple(enumerate_unrooted(taxa))
        rng = np.random.default_rng(2)
        params = fit_sa([WeightedTree(space[i], float(rng.integers(1, 5))) for i in rng.choice(len(space), 20)])
        index = compile_index(space)
        assert math.isclose(index.tree_probs(*index.lookup(params)).sum(), 1.0, abs_tol=1e-9)

    def test_count_vectors_reject_unknown_keys(self, sample, taxa):
        index = RootingIndex(sample[:1])
        with pytest.raises(UsageError, match="outside"):
            index.count_vectors(collect_sa_counts(sample[1:]))

    def test_empty_tree_list(self):
        with pytest.raises(EmptySampleError):
            RootingIndex([])
