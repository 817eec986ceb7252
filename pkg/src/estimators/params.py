"""Parameter containers for the SBN, CCD and SRF estimators."""

import math
from dataclasses import dataclass, field
from typing import Any, Iterator

from src.core import Clade, PcspKey, Subsplit, TaxonSet
from src.errors import IncompatibleSubsplitError, NormalizationError
from src.treespace import TreeId

# Tolerance for distribution sums when parameters are checked
SUM_TOLERANCE = 1e-9

Group = tuple[Subsplit, Clade]


@dataclass
class SBNParams:
    """Root-split distribution plus one conditional distribution per context.

    A context is a (parent subsplit, focal clade) pair; its distribution is
    over the subsplits of the focal clade. Keys absent from either map have
    probability zero, which keeps incompatible assignments out entirely.
    """

    taxa: TaxonSet
    root_dist: dict[Subsplit, float] = field(default_factory=dict)
    cond_dist: dict[Group, dict[Subsplit, float]] = field(default_factory=dict)

    def root_prob(self, split: Subsplit) -> float:
        return self.root_dist.get(split, 0.0)

    def cond_prob(self, key: PcspKey) -> float:
        children = self.cond_dist.get(key.group)
        if children is None:
            return 0.0
        return children.get(key.child, 0.0)

    def pcsp_items(self) -> Iterator[tuple[PcspKey, float]]:
        """Every stored PCSP with its probability."""
        for (parent, focal), children in self.cond_dist.items():
            for child, prob in children.items():
                yield PcspKey(parent, focal, child), prob

    def support_size(self) -> dict[str, int]:
        return {
            "root_splits": len(self.root_dist),
            "pcsps": sum(len(children) for children in self.cond_dist.values()),
        }

    def check_consistency(self, tolerance: float = SUM_TOLERANCE) -> list[str]:
        """List every violated invariant; an empty list means consistent."""
        issues: list[str] = []
        full = self.taxa.full
        root_sum = math.fsum(self.root_dist.values())
        if abs(root_sum - 1.0) > tolerance:
            issues.append(f"root distribution sums to {root_sum!r}")
        for split, prob in self.root_dist.items():
            if split.clade != full:
                issues.append(f"root split {self.taxa.format_subsplit(split)} does not cover all taxa")
            if prob < 0.0:
                issues.append(f"negative root probability {prob!r}")
        for (parent, focal), children in self.cond_dist.items():
            label = f"{self.taxa.format_subsplit(parent)} / {self.taxa.format_clade(focal)}"
            if focal not in (parent.y, parent.z):
                issues.append(f"focal clade is not a part of its parent in {label}")
            for child, prob in children.items():
                if child.clade != focal:
                    issues.append(f"child {self.taxa.format_subsplit(child)} does not split {label}")
                if prob < 0.0:
                    issues.append(f"negative probability in {label}")
            total = math.fsum(children.values())
            if abs(total - 1.0) > tolerance:
                issues.append(f"conditional distribution {label} sums to {total!r}")
        return issues

    def validate(self, tolerance: float = SUM_TOLERANCE) -> None:
        """Raise on the first consistency problem.

        Raises:
            IncompatibleSubsplitError: If a stored child does not split its focal clade.
            NormalizationError: If a distribution does not sum to one.
        """
        issues = self.check_consistency(tolerance)
        if not issues:
            return
        incompatible = [i for i in issues if "does not" in i or "not a part" in i]
        if incompatible:
            raise IncompatibleSubsplitError(incompatible[0])
        raise NormalizationError(issues[0])

    def to_dict(self) -> dict[str, Any]:
        return {"n_taxa": self.taxa.size, **self.support_size()}


@dataclass
class CCDParams:
    """Conditional clade distribution: subsplit probabilities per clade."""

    taxa: TaxonSet
    clade_dist: dict[Clade, dict[Subsplit, float]] = field(default_factory=dict)

    def split_prob(self, clade: Clade, split: Subsplit) -> float:
        children = self.clade_dist.get(clade)
        if children is None:
            return 0.0
        return children.get(split, 0.0)

    def support_size(self) -> dict[str, int]:
        return {
            "clades": len(self.clade_dist),
            "clade_splits": sum(len(s) for s in self.clade_dist.values()),
        }

    def check_consistency(self, tolerance: float = SUM_TOLERANCE) -> list[str]:
        issues = []
        for clade, splits in self.clade_dist.items():
            label = self.taxa.format_clade(clade)
            for split in splits:
                if split.clade != clade:
                    issues.append(f"subsplit {self.taxa.format_subsplit(split)} does not split {label}")
            total = math.fsum(splits.values())
            if abs(total - 1.0) > tolerance:
                issues.append(f"clade {label} sums to {total!r}")
        return issues

    def validate(self, tolerance: float = SUM_TOLERANCE) -> None:
        issues = self.check_consistency(tolerance)
        if issues:
            if "does not" in issues[0]:
                raise IncompatibleSubsplitError(issues[0])
            raise NormalizationError(issues[0])

    def to_dict(self) -> dict[str, Any]:
        return {"n_taxa": self.taxa.size, **self.support_size()}


@dataclass
class SRFParams:
    """Sample relative frequencies keyed by canonical tree id."""

    taxa: TaxonSet
    probs: dict[TreeId, float] = field(default_factory=dict)

    def prob_of_id(self, tid: TreeId) -> float:
        return self.probs.get(tid, 0.0)

    def support_size(self) -> dict[str, int]:
        return {"trees": len(self.probs)}

    def check_consistency(self, tolerance: float = SUM_TOLERANCE) -> list[str]:
        total = math.fsum(self.probs.values())
        if abs(total - 1.0) > tolerance:
            return [f"tree frequencies sum to {total!r}"]
        return []

    def validate(self, tolerance: float = SUM_TOLERANCE) -> None:
        issues = self.check_consistency(tolerance)
        if issues:
            raise NormalizationError(issues[0], math.fsum(self.probs.values()))

    def to_dict(self) -> dict[str, Any]:
        return {"n_taxa": self.taxa.size, **self.support_size()}


AnyParams = SBNParams | CCDParams | SRFParams
