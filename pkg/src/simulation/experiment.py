"""Simulated-scenario harness: targets, samples, fits and KL result tables.

For every (beta, K, replicate) cell a fresh Dirichlet target is drawn over the
enumerated unrooted space, a sample of K trees is drawn from it, every
configured method is fitted on the sample and scored by KL divergence against
the target. A cell's random stream depends only on the seed and the cell
coordinates.
"""

import csv
import math
import time
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.config import KlDirection, get_settings
from src.core import TaxonSet
from src.estimators import EmConfig, fit_ccd, fit_em, fit_sa, fit_srf
from src.evaluation import KlOptions, kl_divergence
from src.logging_config import get_logger
from src.treespace import WeightedTree, enumerate_unrooted

from .targets import dirichlet_target, sample_trees, seed_stream

logger = get_logger(__name__)

RESULT_COLUMNS = ("method", "beta", "K", "replicate", "kl", "fit_seconds")
SUMMARY_COLUMNS = ("method", "beta", "K", "n", "kl_mean", "kl_std", "fit_seconds_mean")


class Method(str, Enum):
    """Estimators compared by the harness."""

    SRF = "srf"
    CCD = "ccd"
    SBN_SA = "sbn-sa"
    SBN_EM = "sbn-em"
    SBN_EM_ALPHA = "sbn-em-alpha"


class ExperimentConfig(BaseModel):
    """Grid and settings of one simulation run.

    ``alpha_rule`` is either the string ``"50/K"`` or a fixed nonnegative
    value; it applies to the ``sbn-em-alpha`` method.
    """

    model_config = ConfigDict(frozen=True)

    n_taxa: int = Field(default=8, ge=4)
    betas: list[float] = Field(default_factory=lambda: [0.01, 0.05, 0.1, 0.2], min_length=1)
    sample_sizes: list[int] = Field(
        default_factory=lambda: [250, 1000, 4000, 16000], min_length=1
    )
    methods: list[Method] = Field(default_factory=lambda: list(Method), min_length=1)
    replicates: int = Field(default=10, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    alpha_rule: Literal["50/K"] | float = "50/K"
    kl: KlOptions = Field(
        default_factory=lambda: KlOptions(direction=KlDirection.ESTIMATE_TO_TARGET)
    )
    record_timings: bool = True

    @field_validator("betas")
    @classmethod
    def _positive_betas(cls, values: list[float]) -> list[float]:
        if any(b <= 0 for b in values):
            raise ValueError("beta values must be positive")
        return values

    @field_validator("sample_sizes")
    @classmethod
    def _positive_sizes(cls, values: list[int]) -> list[int]:
        if any(k < 1 for k in values):
            raise ValueError("sample sizes must be positive")
        return values

    @field_validator("alpha_rule")
    @classmethod
    def _nonnegative_alpha(cls, value: Any) -> Any:
        if isinstance(value, float) and value < 0:
            raise ValueError("a fixed alpha must be nonnegative")
        return value

    @model_validator(mode="after")
    def _within_cap(self) -> "ExperimentConfig":
        cap = get_settings().enum_cap
        if self.n_taxa > cap:
            raise ValueError(f"n_taxa={self.n_taxa} exceeds the enumeration cap {cap}")
        return self

    def alpha_for(self, sample_size: int) -> float:
        if self.alpha_rule == "50/K":
            return 50.0 / sample_size
        return float(self.alpha_rule)


@dataclass
class ResultRow:
    """One (method, cell, replicate) measurement."""

    method: str
    beta: float
    K: int
    replicate: int
    kl: float
    fit_seconds: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class ResultTable:
    rows: list[ResultRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def for_method(self, method: str | Method) -> list[ResultRow]:
        name = method.value if isinstance(method, Method) else method
        return [row for row in self.rows if row.method == name]


@dataclass
class SummaryRow:
    method: str
    beta: float
    K: int
    n: int
    kl_mean: float
    kl_std: float
    fit_seconds_mean: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def default_taxa(n_taxa: int) -> TaxonSet:
    """Taxon set ``t1, ..., tN`` used for simulated trees."""
    return TaxonSet(tuple(f"t{i}" for i in range(1, n_taxa + 1)))


def _fit(
    method: Method,
    sample: list[WeightedTree],
    cfg: ExperimentConfig,
    sample_size: int,
) -> Any:
    if method == Method.SRF:
        model: Any = fit_srf(sample)
    elif method == Method.CCD:
        model = fit_ccd(sample)
    elif method == Method.SBN_SA:
        model = fit_sa(sample)
    elif method == Method.SBN_EM:
        model, _ = fit_em(sample, EmConfig(alpha=0.0))
    else:
        model, _ = fit_em(sample, EmConfig(alpha=cfg.alpha_for(sample_size)))
    return model


def run_experiment(
    cfg: ExperimentConfig,
    on_row: Callable[[ResultRow], None] | None = None,
) -> ResultTable:
    """Run every (beta, K, replicate, method) cell of ``cfg``.

    A failing fit is logged and recorded with ``kl = nan``; the table is
    always complete.

    Args:
        cfg: The experiment grid.
        on_row: Called after each row is recorded (progress reporting).

    Returns:
        The ResultTable, rows ordered by beta, K, replicate, then method.
    """
    taxa = default_taxa(cfg.n_taxa)
    space = tuple(enumerate_unrooted(taxa))
    logger.info(
        "Starting simulation",
        extra={
            "n_taxa": cfg.n_taxa,
            "trees": len(space),
            "cells": len(cfg.betas) * len(cfg.sample_sizes) * cfg.replicates,
            "methods": [m.value for m in cfg.methods],
            "seed": cfg.seed,
        },
    )
    table = ResultTable()
    for b_idx, beta in enumerate(cfg.betas):
        for k_idx, sample_size in enumerate(cfg.sample_sizes):
            for rep in range(cfg.replicates):
                rng = seed_stream(cfg.seed, b_idx, k_idx, rep)
                target = dirichlet_target(space, beta, rng)
                sample = sample_trees(target, sample_size, rng)
                for method in cfg.methods:
                    elapsed = 0.0
                    try:
                        start = time.perf_counter()
                        model = _fit(method, sample, cfg, sample_size)
                        elapsed = time.perf_counter() - start
                        kl = kl_divergence(target, model, cfg.kl)
                    except Exception:
                        logger.exception(
                            "Cell failed",
                            extra={
                                "method": method.value,
                                "beta": beta,
                                "K": sample_size,
                                "replicate": rep,
                            },
                        )
                        kl = math.nan
                    if not cfg.record_timings:
                        elapsed = 0.0
                    row = ResultRow(method.value, beta, sample_size, rep, kl, elapsed)
                    table.rows.append(row)
                    if on_row is not None:
                        on_row(row)
    return table


def summarize(table: ResultTable) -> list[SummaryRow]:
    """Mean and standard deviation of KL per (method, beta, K) cell.

    Failed replicates (``kl = nan``) are left out of the statistics; ``n``
    counts the replicates that were used.
    """
    groups: dict[tuple[str, float, int], list[ResultRow]] = {}
    for row in table.rows:
        groups.setdefault((row.method, row.beta, row.K), []).append(row)
    summary = []
    for (method, beta, sample_size), rows in groups.items():
        kls = np.array([r.kl for r in rows if not math.isnan(r.kl)])
        seconds = np.array([r.fit_seconds for r in rows])
        n = len(kls)
        summary.append(
            SummaryRow(
                method=method,
                beta=beta,
                K=sample_size,
                n=n,
                kl_mean=float(kls.mean()) if n else math.nan,
                kl_std=float(kls.std(ddof=1)) if n > 1 else 0.0,
                fit_seconds_mean=float(seconds.mean()),
            )
        )
    return summary


def _format(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results_csv(table: ResultTable, path: Path) -> None:
    """Write ``method,beta,K,replicate,kl,fit_seconds`` rows."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for row in table.rows:
            writer.writerow([_format(getattr(row, c)) for c in RESULT_COLUMNS])


def write_summary_csv(summary: list[SummaryRow], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for row in summary:
            writer.writerow([_format(getattr(row, c)) for c in SUMMARY_COLUMNS])
