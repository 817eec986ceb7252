"""Clades, subsplits and PCSP keys."""

from .clades import (
    Clade,
    Ordering,
    PcspKey,
    Subsplit,
    TaxonSet,
    clade_compare,
    make_pcsp,
    make_subsplit,
    subsplit_from_bits,
)

__all__ = [
    "Clade",
    "Ordering",
    "PcspKey",
    "Subsplit",
    "TaxonSet",
    "clade_compare",
    "make_pcsp",
    "make_subsplit",
    "subsplit_from_bits",
]
