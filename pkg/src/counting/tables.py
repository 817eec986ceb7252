"""Frequency tables of root splits and PCSPs."""

from dataclasses import dataclass, field
from typing import Any

from src.core import Clade, PcspKey, Subsplit, TaxonSet
from src.errors import TaxonMismatchError


@dataclass
class CountsTable:
    """Real-weighted tallies of root splits and parent-child subsplit pairs.

    Tables from disjoint parts of a sample can be combined with ``+``; the
    merge is associative and commutative.

    Attributes:
        taxa: Taxon set of the counted trees.
        root_counts: Weight per root split.
        pcsp_counts: Weight per PCSP.
        total_trees: Total sample weight counted.
        skipped_trees: Sample weight left out because it had zero probability
            under the model used for expected counts.
    """

    taxa: TaxonSet
    root_counts: dict[Subsplit, float] = field(default_factory=dict)
    pcsp_counts: dict[PcspKey, float] = field(default_factory=dict)
    total_trees: float = 0.0
    skipped_trees: float = 0.0

    def add_root(self, split: Subsplit, weight: float) -> None:
        self.root_counts[split] = self.root_counts.get(split, 0.0) + weight

    def add_pcsp(self, key: PcspKey, weight: float) -> None:
        self.pcsp_counts[key] = self.pcsp_counts.get(key, 0.0) + weight

    @property
    def total_root_weight(self) -> float:
        return sum(self.root_counts.values())

    def group_totals(self) -> dict[tuple[Subsplit, Clade], float]:
        """Summed PCSP weight per (parent subsplit, focal clade) context."""
        totals: dict[tuple[Subsplit, Clade], float] = {}
        for key, weight in self.pcsp_counts.items():
            totals[key.group] = totals.get(key.group, 0.0) + weight
        return totals

    def merge(self, other: "CountsTable") -> "CountsTable":
        """Return a new table holding the sum of both tables.

        Raises:
            TaxonMismatchError: If the tables count different taxon sets.
        """
        if other.taxa != self.taxa:
            raise TaxonMismatchError("Cannot merge counts over different taxon sets")
        merged = CountsTable(
            self.taxa,
            dict(self.root_counts),
            dict(self.pcsp_counts),
            self.total_trees + other.total_trees,
            self.skipped_trees + other.skipped_trees,
        )
        for split, weight in other.root_counts.items():
            merged.add_root(split, weight)
        for key, weight in other.pcsp_counts.items():
            merged.add_pcsp(key, weight)
        return merged

    def __add__(self, other: "CountsTable") -> "CountsTable":
        return self.merge(other)

    def scaled(self, factor: float) -> "CountsTable":
        """Return a copy with every weight multiplied by ``factor``."""
        return CountsTable(
            self.taxa,
            {k: v * factor for k, v in self.root_counts.items()},
            {k: v * factor for k, v in self.pcsp_counts.items()},
            self.total_trees * factor,
            self.skipped_trees * factor,
        )

    def to_dict(self) -> dict[str, Any]:
        """Summary for logging and CLI output."""
        return {
            "total_trees": self.total_trees,
            "root_splits": len(self.root_counts),
            "pcsps": len(self.pcsp_counts),
            "root_weight": self.total_root_weight,
            "skipped_trees": self.skipped_trees,
        }
