"""Probability evaluation, KL divergences and normalization audits."""

from .audit import RootingSpace, normalization_audit
from .distribution import (
    CcdEvaluator,
    DiscreteDistribution,
    Evaluator,
    SbnEvaluator,
    SrfEvaluator,
    make_evaluator,
)
from .kl import KlOptions, kl_divergence, resolve_support
from .probability import (
    JointMode,
    ccd_prob,
    log_likelihood,
    rooting_joints,
    sa_lower_bound,
    sbn_prob_rooted,
    sbn_prob_unrooted,
    srf_prob,
)

__all__ = [
    "CcdEvaluator",
    "DiscreteDistribution",
    "Evaluator",
    "JointMode",
    "KlOptions",
    "RootingSpace",
    "SbnEvaluator",
    "SrfEvaluator",
    "ccd_prob",
    "kl_divergence",
    "log_likelihood",
    "make_evaluator",
    "normalization_audit",
    "resolve_support",
    "rooting_joints",
    "sa_lower_bound",
    "sbn_prob_rooted",
    "sbn_prob_unrooted",
    "srf_prob",
]
