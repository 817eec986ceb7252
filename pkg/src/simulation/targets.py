"""Seeded Dirichlet targets over enumerated tree spaces and sampling from them."""

from typing import Sequence

import numpy as np
from scipy.special import softmax

from src.errors import UsageError
from src.evaluation import DiscreteDistribution
from src.treespace import UnrootedTopology, WeightedTree

# Smallest component kept in a target so that every tree has positive mass
_TINY = np.finfo(float).tiny


def seed_stream(seed: int, *spawn_key: int) -> np.random.Generator:
    """Independent PCG64 generator for one (cell, replicate) coordinate.

    The stream depends only on ``seed`` and ``spawn_key``, so results do not
    change with the order in which cells are run.
    """
    sequence = np.random.SeedSequence(seed, spawn_key=tuple(spawn_key))
    return np.random.Generator(np.random.PCG64(sequence))


def log_gamma_variates(shape: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Logs of independent Gamma(shape, 1) draws.

    numpy draws Gamma variates with the Marsaglia-Tsang method. Shapes below 1
    use Gamma(b) = Gamma(b + 1) * U^(1/b), taken in log space because
    ``U^(1/b)`` underflows for small ``b``.
    """
    if shape <= 0.0:
        raise UsageError(f"Gamma shape must be positive, got {shape}")
    if shape >= 1.0:
        return np.log(rng.standard_gamma(shape, size))
    boosted = np.log(rng.standard_gamma(shape + 1.0, size))
    uniforms = 1.0 - rng.random(size)
    return boosted + np.log(uniforms) / shape


def dirichlet_weights(m: int, beta: float, rng: np.random.Generator) -> np.ndarray:
    """A strictly positive draw from the symmetric Dirichlet(beta) on ``m`` points.

    Raises:
        UsageError: If ``m < 2`` or ``beta <= 0``.
    """
    if m < 2:
        raise UsageError(f"A Dirichlet target needs at least 2 points, got {m}")
    if beta <= 0.0:
        raise UsageError(f"beta must be positive, got {beta}")
    weights = softmax(log_gamma_variates(beta, m, rng))
    weights = np.maximum(weights, _TINY)
    return weights / weights.sum()


def dirichlet_target(
    space: Sequence[UnrootedTopology], beta: float, rng: np.random.Generator
) -> DiscreteDistribution:
    """Dirichlet(beta) target over ``space``, indexed in the given order."""
    if not space:
        raise UsageError("The tree space is empty")
    weights = dirichlet_weights(len(space), beta, rng)
    return DiscreteDistribution(space[0].taxa, tuple(space), weights)


def sample_trees(
    target: DiscreteDistribution, sample_size: int, rng: np.random.Generator
) -> list[WeightedTree]:
    """Multinomial sample of ``sample_size`` trees, as weighted unique trees."""
    if sample_size < 1:
        raise UsageError(f"Sample size must be positive, got {sample_size}")
    counts = rng.multinomial(sample_size, target.weights)
    return [
        WeightedTree(tree, float(count))
        for tree, count in zip(target.trees, counts)
        if count > 0
    ]
