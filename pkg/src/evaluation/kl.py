"""KL divergence between a target distribution and a fitted model.

The divergence is summed over a support chosen by ``KlOptions.support``:
- target: the trees listed by the target
- estimate: the trees with positive estimated probability
- union: both

Supports that a model cannot list (SBN and CCD) are found by enumerating the
whole tree space, which is only allowed up to the enumeration cap.
"""

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import rel_entr

from src.config import KlDirection, KlSupport, get_settings
from src.errors import EnumerationCapError, SupportResolutionError, TaxonMismatchError
from src.logging_config import get_logger
from src.treespace import UnrootedTopology, count_unrooted, enumerate_unrooted

from .distribution import Evaluator, make_evaluator

logger = get_logger(__name__)


class KlOptions(BaseModel):
    """How a KL divergence is taken; defaults come from Settings."""

    model_config = ConfigDict(frozen=True)

    direction: KlDirection = Field(default_factory=lambda: get_settings().kl_direction)
    epsilon_floor: float = Field(
        default_factory=lambda: get_settings().kl_epsilon_floor, ge=0.0, lt=1e-3
    )
    support: KlSupport = Field(default_factory=lambda: get_settings().kl_support)


def _listed_support(model: Evaluator, cap: int | None) -> list[UnrootedTopology]:
    listed = model.support()
    if listed is not None:
        return listed
    try:
        space = list(enumerate_unrooted(model.taxa, cap))
    except EnumerationCapError as e:
        raise SupportResolutionError(
            f"Cannot list the support of this model on {model.taxa.size} taxa: {e}"
        ) from e
    probs = model.probs(space)
    return [tree for tree, p in zip(space, probs) if p > 0.0]


def resolve_support(
    target: Evaluator,
    estimate: Evaluator,
    support: KlSupport,
    cap: int | None = None,
) -> list[UnrootedTopology]:
    """List the trees a divergence is summed over, without duplicates.

    Raises:
        SupportResolutionError: If a needed support cannot be listed.
    """
    if support == KlSupport.TARGET:
        return _listed_support(target, cap)
    if support == KlSupport.ESTIMATE:
        return _listed_support(estimate, cap)
    first = _listed_support(target, cap)
    if len(first) == count_unrooted(target.taxa.size):
        return first
    seen = set(first)
    merged = list(first)
    for tree in _listed_support(estimate, cap):
        if tree not in seen:
            seen.add(tree)
            merged.append(tree)
    return merged


def kl_divergence(
    target: Any,
    estimate: Any,
    opts: KlOptions | None = None,
    cap: int | None = None,
) -> float:
    """KL divergence in nats between a target and an estimate.

    With direction ``estimate_to_target`` this is sum q log(q / p) with q the
    estimate and p the target; ``target_to_estimate`` swaps the roles. Terms
    whose denominator is zero are infinite unless ``epsilon_floor`` is set, in
    which case the denominator is floored and renormalized over the support.

    Args:
        target: A DiscreteDistribution or any model accepted by make_evaluator.
        estimate: Fitted parameters or an Evaluator.
        opts: Direction, support and floor; defaults from Settings.
        cap: Enumeration cap used when a support must be enumerated.
    """
    opts = opts or KlOptions()
    target_ev = make_evaluator(target)
    estimate_ev = make_evaluator(estimate)
    if target_ev.taxa != estimate_ev.taxa:
        raise TaxonMismatchError("Target and estimate use different taxon sets")

    support = resolve_support(target_ev, estimate_ev, opts.support, cap)
    if not support:
        return 0.0
    p_target = target_ev.probs(support)
    p_estimate = estimate_ev.probs(support)
    if opts.direction == KlDirection.ESTIMATE_TO_TARGET:
        numerator, denominator = p_estimate, p_target
    else:
        numerator, denominator = p_target, p_estimate
    if opts.epsilon_floor > 0.0:
        denominator = np.maximum(denominator, opts.epsilon_floor)
        denominator = denominator / denominator.sum()
    value = float(rel_entr(numerator, denominator).sum())
    logger.debug(
        "KL divergence",
        extra={
            "direction": opts.direction.value,
            "support": opts.support.value,
            "support_size": len(support),
            "kl": value,
        },
    )
    return value
