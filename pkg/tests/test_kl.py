"""Tests for KL divergences between targets and fitted models.

Tests cover:
- Hand-checked divergences in both directions
- Infinite terms and the epsilon floor
- Support resolution for listed and enumerated models
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError as PydanticValidationError

from src.config import KlDirection, KlSupport
from src.core import TaxonSet
from src.errors import SupportResolutionError, TaxonMismatchError
from src.estimators import fit_sa, fit_srf
from src.evaluation import (
    DiscreteDistribution,
    KlOptions,
    SbnEvaluator,
    kl_divergence,
    make_evaluator,
    resolve_support,
)
from src.treespace import as_unrooted, enumerate_unrooted, parse_newick, random_unrooted


@pytest.fixture
def abcd():
    return TaxonSet(("A", "B", "C", "D"))


@pytest.fixture
def trees(abcd):
    return [parse_newick("(A,B,(C,D));", abcd), parse_newick("(A,C,(B,D));", abcd)]


@pytest.fixture
def target(trees):
    return DiscreteDistribution.from_pairs([(trees[0], 0.5), (trees[1], 0.5)])


@pytest.fixture
def estimate(trees):
    return DiscreteDistribution.from_pairs([(trees[0], 0.75), (trees[1], 0.25)])


def options(**kwargs):
    kwargs.setdefault("direction", KlDirection.ESTIMATE_TO_TARGET)
    kwargs.setdefault("support", KlSupport.UNION)
    kwargs.setdefault("epsilon_floor", 0.0)
    return KlOptions(**kwargs)


class TestKlValues:
    """Hand-checked divergence values."""

    def test_estimate_to_target(self, target, estimate):
        value = kl_divergence(target, estimate, options())
        expected = 0.75 * math.log(1.5) + 0.25 * math.log(0.5)
        assert math.isclose(value, expected, rel_tol=1e-12)
        assert round(value, 4) == 0.1308

    def test_target_to_estimate(self, target, estimate):
        value = kl_divergence(target, estimate, options(direction=KlDirection.TARGET_TO_ESTIMATE))
        assert math.isclose(value, 0.5 * math.log(4 / 3), rel_tol=1e-12)

    def test_identical_distributions(self, target):
        assert kl_divergence(target, target, options()) == 0.0

    def test_sbn_fit_matches_its_own_distribution(self, abcd):
        space = list(enumerate_unrooted(abcd))
        params = fit_sa([space[0], space[0], space[1]])
        probs = SbnEvaluator(params).probs(space)
        exact = DiscreteDistribution.from_pairs(zip(space, probs), tolerance=1e-9, renormalize=True)
        assert math.isclose(kl_divergence(exact, params, options()), 0.0, abs_tol=1e-12)

    def test_defaults_come_from_settings(self, target, estimate):
        assert kl_divergence(target, estimate) == kl_divergence(target, estimate, options())


class TestInfiniteTerms:
    """Zero denominators with and without the floor."""

    @pytest.fixture
    def point_target(self, trees):
        return DiscreteDistribution.from_pairs([(trees[0], 1.0)])

    def test_missing_target_mass_is_infinite(self, point_target, estimate):
        assert kl_divergence(point_target, estimate, options()) == math.inf

    def test_floor_renormalizes_denominator(self, point_target, estimate):
        floor = 1e-4
        value = kl_divergence(point_target, estimate, options(epsilon_floor=floor))
        total = 1.0 + floor
        expected = 0.75 * math.log(0.75 / (1.0 / total)) + 0.25 * math.log(0.25 / (floor / total))
        assert math.isclose(value, expected, rel_tol=1e-12)

    def test_target_support_skips_extra_estimate_mass(self, point_target, estimate):
        value = kl_divergence(point_target, estimate, options(support=KlSupport.TARGET))
        assert math.isclose(value, 0.75 * math.log(0.75))

    def test_floor_must_stay_small(self):
        with pytest.raises(PydanticValidationError):
            KlOptions(epsilon_floor=0.01)


class TestSupport:
    """Tests for resolve_support."""

    def test_union_keeps_order_without_duplicates(self, abcd, trees, target):
        third = parse_newick("(A,D,(B,C));", abcd)
        srf = make_evaluator(fit_srf([trees[1], third]))
        support = resolve_support(target, srf, KlSupport.UNION)
        assert support == [*target.trees, as_unrooted(third)]

    def test_sbn_support_is_enumerated(self, abcd, trees):
        params = fit_sa([trees[0]])
        support = resolve_support(SbnEvaluator(params), SbnEvaluator(params), KlSupport.ESTIMATE)
        assert support == [as_unrooted(trees[0])]

    def test_enumeration_above_cap_fails(self):
        taxa = TaxonSet(tuple(f"t{i}" for i in range(1, 12)))
        rng = np.random.default_rng(3)
        params = fit_sa([random_unrooted(taxa, rng)])
        target = DiscreteDistribution.from_pairs([(random_unrooted(taxa, rng), 1.0)])
        with pytest.raises(SupportResolutionError):
            kl_divergence(target, params, options(support=KlSupport.ESTIMATE), cap=10)

    def test_target_support_needs_no_enumeration(self):
        taxa = TaxonSet(tuple(f"t{i}" for i in range(1, 12)))
        rng = np.random.default_rng(4)
        tree = random_unrooted(taxa, rng)
        target = DiscreteDistribution.from_pairs([(tree, 1.0)])
        value = kl_divergence(
            target,
            fit_sa([tree]),
            options(direction=KlDirection.TARGET_TO_ESTIMATE, support=KlSupport.TARGET),
            cap=10,
        )
        assert math.isclose(value, 0.0, abs_tol=1e-12)

    def test_taxon_mismatch(self, target):
        other = TaxonSet(("A", "B", "C", "E"))
        foreign = DiscreteDistribution.from_pairs([(parse_newick("(A,B,(C,E));", other), 1.0)])
        with pytest.raises(TaxonMismatchError):
            kl_divergence(target, foreign, options())
