"""Exhaustive normalization checks over enumerated tree spaces."""

import math
from enum import Enum
from typing import Any

import numpy as np

from src.counting import compile_index
from src.errors import UsageError
from src.estimators import SBNParams
from src.logging_config import get_logger
from src.treespace import enumerate_unrooted

from .distribution import make_evaluator

logger = get_logger(__name__)


class RootingSpace(str, Enum):
    ROOTED = "rooted"
    UNROOTED = "unrooted"


def normalization_audit(
    params: Any,
    space: RootingSpace = RootingSpace.UNROOTED,
    cap: int | None = None,
) -> float:
    """Total probability the model assigns to every tree on its taxa.

    Any consistent model gives 1 up to rounding. For SBN parameters the rooted
    total sums every rooting joint of every unrooted tree, i.e. each rooted
    tree exactly once.

    Raises:
        EnumerationCapError: If the taxon count exceeds the cap.
        UsageError: If the rooted space is requested for a non-SBN model.
    """
    trees = tuple(enumerate_unrooted(params.taxa, cap))
    if isinstance(params, SBNParams):
        index = compile_index(trees)
        joints = np.exp(index.log_joints(*index.lookup(params)))
        if space == RootingSpace.ROOTED:
            total = math.fsum(joints.ravel())
        else:
            total = math.fsum(joints.sum(axis=1))
    else:
        if space == RootingSpace.ROOTED:
            raise UsageError("Only SBN parameters define rooted tree probabilities")
        total = math.fsum(make_evaluator(params).probs(trees))
    logger.info(
        "Normalization audit",
        extra={"space": space.value, "n_taxa": params.taxa.size, "total": total},
    )
    return total
