"""Explicit distributions over unrooted trees and the evaluator interface."""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterable, Protocol, Sequence

import numpy as np

from src.core import TaxonSet
from src.counting import compile_index
from src.errors import NormalizationError, UsageError, ValidationError
from src.estimators import CCDParams, SBNParams, SRFParams
from src.treespace import UnrootedTopology, as_unrooted, parse_newick

from .probability import ccd_prob, sbn_prob_unrooted, srf_prob

# Tolerance on the total mass of an explicit distribution
DISTRIBUTION_TOLERANCE = 1e-9
# Tree lists at least this long are evaluated through a RootingIndex
BULK_THRESHOLD = 256


class Evaluator(Protocol):
    """Read-only probability model over the unrooted trees of one taxon set."""

    taxa: TaxonSet

    def prob(self, tree: Any) -> float: ...

    def probs(self, trees: Sequence[Any]) -> np.ndarray: ...

    def support(self) -> list[UnrootedTopology] | None:
        """Trees with positive probability, or None when they cannot be listed."""
        ...


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """A probability vector over an explicit list of unrooted trees.

    Raises:
        ValidationError: On length mismatch, duplicate trees or negative mass.
        NormalizationError: If the mass is not 1 within ``DISTRIBUTION_TOLERANCE``.
    """

    taxa: TaxonSet
    trees: tuple[UnrootedTopology, ...]
    weights: np.ndarray

    def __post_init__(self) -> None:
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", weights)
        if weights.shape != (len(self.trees),):
            raise ValidationError("One probability per tree is required")
        if (weights < 0).any() or not np.isfinite(weights).all():
            raise ValidationError("Probabilities must be finite and nonnegative")
        if len(self.lookup) != len(self.trees):
            raise ValidationError("A distribution lists each tree once")
        total = math.fsum(weights)
        if abs(total - 1.0) > DISTRIBUTION_TOLERANCE:
            raise NormalizationError(
                f"Distribution sums to {total!r}, expected 1", observed_sum=total
            )

    @classmethod
    def from_pairs(
        cls,
        pairs: Iterable[tuple[Any, float]],
        tolerance: float = DISTRIBUTION_TOLERANCE,
        renormalize: bool = False,
    ) -> "DiscreteDistribution":
        """Build from (tree, probability) pairs; rooted trees are unrooted.

        Args:
            pairs: Trees with their probabilities.
            tolerance: Accepted deviation of the total from 1.
            renormalize: Rescale to sum exactly to 1 after the tolerance check.
        """
        items = [(as_unrooted(tree), float(p)) for tree, p in pairs]
        if not items:
            raise ValidationError("A distribution needs at least one tree")
        taxa = items[0][0].taxa
        weights = np.array([p for _, p in items])
        total = math.fsum(weights)
        if abs(total - 1.0) > tolerance:
            raise NormalizationError(
                f"Probabilities sum to {total!r}, expected 1 within {tolerance}",
                observed_sum=total,
            )
        if renormalize:
            weights = weights / total
        return cls(taxa, tuple(t for t, _ in items), weights)

    @cached_property
    def lookup(self) -> dict[UnrootedTopology, float]:
        return {tree: float(p) for tree, p in zip(self.trees, self.weights)}

    def __len__(self) -> int:
        return len(self.trees)

    def prob(self, tree: Any) -> float:
        return self.lookup.get(as_unrooted(tree), 0.0)

    def probs(self, trees: Sequence[Any]) -> np.ndarray:
        return np.array([self.prob(t) for t in trees], dtype=float)

    def support(self) -> list[UnrootedTopology]:
        return [t for t, p in zip(self.trees, self.weights) if p > 0.0]


@dataclass(frozen=True)
class SbnEvaluator:
    params: SBNParams

    @property
    def taxa(self) -> TaxonSet:
        return self.params.taxa

    def prob(self, tree: Any) -> float:
        return sbn_prob_unrooted(self.params, tree)

    def probs(self, trees: Sequence[Any]) -> np.ndarray:
        if len(trees) >= BULK_THRESHOLD and all(isinstance(t, UnrootedTopology) for t in trees):
            index = compile_index(tuple(trees))
            return index.tree_probs(*index.lookup(self.params))
        return np.array([self.prob(t) for t in trees], dtype=float)

    def support(self) -> None:
        return None


@dataclass(frozen=True)
class CcdEvaluator:
    params: CCDParams

    @property
    def taxa(self) -> TaxonSet:
        return self.params.taxa

    def prob(self, tree: Any) -> float:
        return ccd_prob(self.params, tree)

    def probs(self, trees: Sequence[Any]) -> np.ndarray:
        return np.array([self.prob(t) for t in trees], dtype=float)

    def support(self) -> None:
        return None


@dataclass(frozen=True)
class SrfEvaluator:
    params: SRFParams

    @property
    def taxa(self) -> TaxonSet:
        return self.params.taxa

    def prob(self, tree: Any) -> float:
        return srf_prob(self.params, tree)

    def probs(self, trees: Sequence[Any]) -> np.ndarray:
        return np.array([self.prob(t) for t in trees], dtype=float)

    def support(self) -> list[UnrootedTopology]:
        taxa = self.params.taxa
        return [
            as_unrooted(parse_newick(tid, taxa))
            for tid, p in self.params.probs.items()
            if p > 0.0
        ]


def make_evaluator(model: Any) -> Evaluator:
    """Wrap parameters (or pass through a distribution) as an Evaluator.

    Raises:
        UsageError: For unsupported model types.
    """
    if isinstance(model, SBNParams):
        return SbnEvaluator(model)
    if isinstance(model, CCDParams):
        return CcdEvaluator(model)
    if isinstance(model, SRFParams):
        return SrfEvaluator(model)
    if isinstance(model, (DiscreteDistribution, SbnEvaluator, CcdEvaluator, SrfEvaluator)):
        return model
    raise UsageError(f"Cannot evaluate objects of type {type(model).__name__}")
