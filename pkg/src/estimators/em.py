"""Expectation maximization for SBNs on unrooted samples.

The root position of each unrooted tree is the missing data. The E-step
computes the rooting posterior of every tree under the current parameters
and turns it into expected root-split and PCSP counts; the M-step is the
closed-form update, regularized by ``alpha`` times the equivalent counts
(the simple-average counts of the sample unless configured otherwise).

By default iterations run on a :class:`RootingIndex` of the unique sample
trees, where the two-pass joints and the expected-count accumulator are array
steps over all trees at once. ``EmEngine.TABLES`` computes the same E-step
tree by tree with :func:`collect_em_counts`, each tree an independent
CountsTable.
"""

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Iterable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, InstanceOf, model_validator
from scipy.special import xlogy

from src.config import get_settings
from src.counting import (
    CountsTable,
    RootingIndex,
    collect_sa_counts,
    collect_em_counts,
    compile_index,
    unrooted_sample,
)
from src.errors import EmMonotonicityError, TaxonMismatchError
from src.logging_config import get_logger
from src.treespace import sample_taxa

from .params import Group, SBNParams

logger = get_logger(__name__)

# Allowed decrease of the objective per unit of sample weight
MONOTONICITY_SLACK = 1e-8
# Equivalent-count scale used for simulated data (alpha = 50 / K)
SIMULATION_ALPHA_NUMERATOR = 50.0
REAL_DATA_ALPHA = 0.0001


class EmInit(str, Enum):
    """Starting point of the EM iterations."""

    SA = "sa"
    UNIFORM = "uniform"
    EXPLICIT = "explicit"


class EmEngine(str, Enum):
    """How the E-step computes expected counts."""

    INDEX = "index"
    TABLES = "tables"


class EmConfig(BaseModel):
    """EM settings; defaults for the stopping rule come from Settings."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    alpha: float = Field(default=0.0, ge=0.0)
    max_iters: int = Field(default_factory=lambda: get_settings().em_max_iters, gt=0)
    rel_tol: float = Field(default_factory=lambda: get_settings().em_rel_tol, gt=0.0)
    init: EmInit = EmInit.SA
    init_params: InstanceOf[SBNParams] | None = None
    equivalent_counts: InstanceOf[CountsTable] | None = None
    engine: EmEngine = EmEngine.INDEX

    @model_validator(mode="after")
    def _check_init(self) -> "EmConfig":
        if self.init == EmInit.EXPLICIT and self.init_params is None:
            raise ValueError("init=explicit requires init_params")
        return self

    @classmethod
    def simulation_preset(cls, sample_size: float, **overrides: Any) -> "EmConfig":
        """Settings for simulated data: alpha = 50 / K."""
        return cls(alpha=SIMULATION_ALPHA_NUMERATOR / sample_size, **overrides)

    @classmethod
    def real_data_preset(cls, **overrides: Any) -> "EmConfig":
        return cls(alpha=REAL_DATA_ALPHA, **overrides)


@dataclass
class EmDiagnostics:
    """Record of one EM run.

    Attributes:
        loglik_trace: Objective before the first M-step and after each one.
        iterations: Number of M-steps taken.
        zero_support_trees: Sample weight with zero probability at the end.
        converged: Whether the relative tolerance was reached.
    """

    loglik_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    zero_support_trees: float = 0.0
    converged: bool = False

    @property
    def final_loglik(self) -> float:
        return self.loglik_trace[-1] if self.loglik_trace else float("-inf")

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["final_loglik"] = self.final_loglik
        return data


def params_from_vectors(
    index: RootingIndex, root_p: np.ndarray, pcsp_p: np.ndarray
) -> SBNParams:
    """Convert index-aligned probability vectors to SBNParams, dropping zeros."""
    root_dist = {
        split: float(p) for split, p in zip(index.root_keys, root_p) if p > 0.0
    }
    cond_dist: dict[Group, dict] = {}
    for key, p in zip(index.pcsp_keys, pcsp_p):
        if p > 0.0:
            cond_dist.setdefault(key.group, {})[key.child] = float(p)
    return SBNParams(index.taxa, root_dist, cond_dist)


def _build_index(trees: tuple, prior: CountsTable) -> RootingIndex:
    index = compile_index(trees)
    if all(s in index.root_ids for s in prior.root_counts) and all(
        k in index.pcsp_ids for k in prior.pcsp_counts
    ):
        return index
    return RootingIndex(trees, prior.root_counts, prior.pcsp_counts)


def fit_em(
    trees: Iterable[Any], cfg: EmConfig | None = None
) -> tuple[SBNParams, EmDiagnostics]:
    """Fit SBN parameters to an unrooted sample by (regularized) EM.

    Args:
        trees: Unrooted (or rooted, then unrooted) topologies or WeightedTree records.
        cfg: EM settings; defaults to SA initialization and no regularization.

    Returns:
        Tuple of (fitted parameters, diagnostics).

    Raises:
        EmptySampleError: If the sample is empty.
        TaxonMismatchError: If the sample, initial parameters or equivalent
            counts disagree on the taxon set.
        EmMonotonicityError: If the objective decreases beyond rounding slack.
    """
    cfg = cfg or EmConfig()
    sample = unrooted_sample(trees)
    taxa = sample_taxa(sample)
    sa_counts = collect_sa_counts(sample)
    prior = cfg.equivalent_counts if cfg.equivalent_counts is not None else sa_counts
    if prior.taxa != taxa:
        raise TaxonMismatchError("Equivalent counts use a different taxon set")

    tree_tuple = tuple(tree for tree, _ in sample)
    index = _build_index(tree_tuple, prior)
    weights = np.array([weight for _, weight in sample], dtype=float)
    total_weight = float(weights.sum())
    alpha = cfg.alpha
    prior_root, prior_pcsp = index.count_vectors(prior)

    if cfg.init == EmInit.EXPLICIT:
        assert cfg.init_params is not None
        current = index.lookup(cfg.init_params)
    else:
        sa_root, sa_pcsp = index.count_vectors(sa_counts)
        if cfg.init == EmInit.UNIFORM:
            sa_root = (sa_root > 0).astype(float)
            sa_pcsp = (sa_pcsp > 0).astype(float)
        current = index.normalize(sa_root, sa_pcsp)

    def expected_counts(root_p, pcsp_p, log_joints, tree_ll):
        if cfg.engine == EmEngine.TABLES:
            table = collect_em_counts(sample, params_from_vectors(index, root_p, pcsp_p))
            return index.count_vectors(table)
        q = index.posterior(log_joints, tree_ll)
        return index.accumulate(q * weights[:, None])

    def e_step(root_p: np.ndarray, pcsp_p: np.ndarray):
        log_joints = index.log_joints(root_p, pcsp_p)
        tree_ll = index.tree_log_probs(log_joints)
        counts = expected_counts(root_p, pcsp_p, log_joints, tree_ll)
        objective = float(weights @ tree_ll)
        if alpha > 0.0:
            with np.errstate(divide="ignore"):
                objective += alpha * float(
                    xlogy(prior_root, root_p).sum() + xlogy(prior_pcsp, pcsp_p).sum()
                )
        zero_support = float(weights[~np.isfinite(tree_ll)].sum())
        return objective, counts, zero_support

    def m_step(counts: tuple[np.ndarray, np.ndarray]):
        root_c, pcsp_c = counts
        if alpha > 0.0:
            root_c = root_c + alpha * prior_root
            pcsp_c = pcsp_c + alpha * prior_pcsp
        return index.normalize(root_c, pcsp_c)

    loglik, counts, zero_support = e_step(*current)
    diagnostics = EmDiagnostics(loglik_trace=[loglik], zero_support_trees=zero_support)
    slack = MONOTONICITY_SLACK * total_weight

    while diagnostics.iterations < cfg.max_iters:
        if counts[0].sum() <= 0.0 and alpha == 0.0:
            logger.warning("No tree has positive probability; EM cannot proceed")
            break
        current = m_step(counts)
        diagnostics.iterations += 1
        new_loglik, counts, zero_support = e_step(*current)
        diagnostics.loglik_trace.append(new_loglik)
        diagnostics.zero_support_trees = zero_support
        logger.debug(
            "EM iteration",
            extra={"iteration": diagnostics.iterations, "loglik": new_loglik},
        )
        if not np.isfinite(new_loglik):
            if not np.isfinite(loglik):
                logger.warning(
                    "EM objective is -inf twice in a row; stopping",
                    extra={"iteration": diagnostics.iterations},
                )
                break
            raise EmMonotonicityError(diagnostics.iterations, loglik, new_loglik)
        if new_loglik < loglik - slack:
            raise EmMonotonicityError(diagnostics.iterations, loglik, new_loglik)
        change = abs(new_loglik - loglik) / total_weight if np.isfinite(loglik) else np.inf
        loglik = new_loglik
        if change < cfg.rel_tol:
            diagnostics.converged = True
            break

    if diagnostics.zero_support_trees:
        logger.warning(
            "Sample trees with zero probability under the EM estimate",
            extra={"zero_support_weight": diagnostics.zero_support_trees},
        )
    params = params_from_vectors(index, *current)
    logger.info(
        "EM finished",
        extra={
            "iterations": diagnostics.iterations,
            "converged": diagnostics.converged,
            "loglik": diagnostics.final_loglik,
            "alpha": alpha,
            **params.support_size(),
        },
    )
    return params, diagnostics
