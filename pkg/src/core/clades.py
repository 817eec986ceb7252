"""Taxon sets, clades, subsplits and parent-child subsplit pairs.

This is the symbol table the rest of the package is built on:
- TaxonSet: the ordered leaf labels of a run
- Clade: a set of taxa stored as an integer bit vector
- Subsplit: an ordered pair of disjoint clades (larger clade first)
- PcspKey: a (parent subsplit, focal clade, child subsplit) triple, the index of
  one shared conditional probability

Taxon ``i`` of a set of ``N`` taxa is bit ``N - 1 - i`` of the clade integer, so
comparing the integers is the same as comparing the bit vectors
lexicographically with taxon 0 most significant. Python integers are unbounded,
so there is no word-size limit on the number of taxa.
"""

from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple

from src.errors import (
    IncompatibleSubsplitError,
    InvalidSubsplitError,
    UsageError,
    ValidationError,
)

# Characters that would break the tab/comma/pipe separated file formats
FORBIDDEN_NAME_CHARS = frozenset(",|\t\r\n")


class Ordering(IntEnum):
    """Result of a three-way clade comparison."""

    LESS = -1
    EQUAL = 0
    GREATER = 1


class Clade(NamedTuple):
    """A set of taxa encoded as a bit vector.

    Attributes:
        bits: Integer whose bit ``width - 1 - i`` is set when taxon ``i`` is present.
        width: Number of taxa in the owning TaxonSet.
    """

    bits: int
    width: int

    @property
    def size(self) -> int:
        """Number of taxa in the clade."""
        return self.bits.bit_count()

    def indices(self) -> list[int]:
        """Taxon indices in the clade, in taxon-set order."""
        top = self.width - 1
        return [top - b for b in range(top, -1, -1) if self.bits >> b & 1]

    def __contains__(self, index: object) -> bool:
        if not isinstance(index, int) or not 0 <= index < self.width:
            return False
        return bool(self.bits >> (self.width - 1 - index) & 1)

    def union(self, other: "Clade") -> "Clade":
        _check_width(self, other)
        return Clade(self.bits | other.bits, self.width)

    def complement(self) -> "Clade":
        """The clade of all taxa not in this clade."""
        return Clade(((1 << self.width) - 1) ^ self.bits, self.width)

    def isdisjoint(self, other: "Clade") -> bool:
        _check_width(self, other)
        return not self.bits & other.bits

    def issubset(self, other: "Clade") -> bool:
        _check_width(self, other)
        return self.bits & other.bits == self.bits


class Subsplit(NamedTuple):
    """An ordered split (Y, Z) of the clade Y | Z with Y greater than Z."""

    y: Clade
    z: Clade

    @property
    def clade(self) -> Clade:
        """The clade this subsplit divides."""
        return Clade(self.y.bits | self.z.bits, self.y.width)

    def parts(self) -> tuple[Clade, Clade]:
        return (self.y, self.z)


class PcspKey(NamedTuple):
    """A parent-child subsplit pair.

    Attributes:
        parent: Subsplit of the parent node.
        focal: The part of ``parent`` that ``child`` splits.
        child: Subsplit of the child node.
    """

    parent: Subsplit
    focal: Clade
    child: Subsplit

    @property
    def group(self) -> tuple[Subsplit, Clade]:
        """The (parent, focal) context whose children share one distribution."""
        return (self.parent, self.focal)


@dataclass(frozen=True)
class TaxonSet:
    """An ordered collection of distinct taxon names.

    The order is fixed for the lifetime of a run because it defines the clade
    order (taxon 0 is the most significant bit).

    Example:
        >>> taxa = TaxonSet(("A", "B", "C", "D"))
        >>> taxa.format_clade(taxa.clade(["C", "A"]))
        'A,C'
    """

    names: tuple[str, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise ValidationError("A taxon set needs at least one name")
        for name in names:
            if not isinstance(name, str) or not name.strip():
                raise ValidationError(f"Invalid taxon name: {name!r}")
            if FORBIDDEN_NAME_CHARS.intersection(name):
                raise ValidationError(
                    f"Taxon name {name!r} contains one of ',', '|', tab or newline"
                )
        index = {name: i for i, name in enumerate(names)}
        if len(index) != len(names):
            duplicates = sorted({n for n in names if names.count(n) > 1})
            raise ValidationError(f"Duplicate taxon names: {', '.join(duplicates)}")
        object.__setattr__(self, "index", index)

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "TaxonSet":
        return cls(tuple(names))

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    @property
    def size(self) -> int:
        return len(self.names)

    @cached_property
    def full(self) -> Clade:
        """The clade containing every taxon."""
        return Clade((1 << self.size) - 1, self.size)

    def bit(self, i: int) -> int:
        """Bit mask of taxon ``i``."""
        return 1 << (self.size - 1 - i)

    def singleton(self, i: int) -> Clade:
        return Clade(self.bit(i), self.size)

    def clade(self, names: Iterable[str]) -> Clade:
        """Build a clade from taxon names.

        Raises:
            UsageError: If a name is not in the taxon set.
        """
        bits = 0
        for name in names:
            try:
                bits |= self.bit(self.index[name])
            except KeyError:
                raise UsageError(f"Unknown taxon '{name}'") from None
        return Clade(bits, self.size)

    def format_clade(self, clade: Clade) -> str:
        """Render a clade as comma-joined names in taxon-set order."""
        return ",".join(self.names[i] for i in clade.indices())

    def format_subsplit(self, subsplit: Subsplit) -> str:
        """Render a subsplit as ``Y|Z``."""
        return f"{self.format_clade(subsplit.y)}|{self.format_clade(subsplit.z)}"

    def format_pcsp(self, key: PcspKey) -> str:
        """Render a PCSP as ``parentY|parentZ→childY|childZ``."""
        return f"{self.format_subsplit(key.parent)}→{self.format_subsplit(key.child)}"

    def parse_clade(self, text: str) -> Clade:
        """Inverse of :meth:`format_clade`."""
        names = [part for part in text.split(",") if part]
        if not names:
            raise UsageError("Empty clade")
        return self.clade(names)

    def parse_subsplit(self, text: str) -> Subsplit:
        """Inverse of :meth:`format_subsplit`."""
        left, sep, right = text.partition("|")
        if not sep:
            raise UsageError(f"Subsplit '{text}' lacks a '|' separator")
        return make_subsplit(self.parse_clade(left), self.parse_clade(right))


def _check_width(a: Clade, b: Clade) -> None:
    if a.width != b.width:
        raise UsageError(f"Clade widths differ: {a.width} vs {b.width}")


def clade_compare(a: Clade, b: Clade) -> Ordering:
    """Compare clades lexicographically as bit vectors, taxon 0 first.

    Raises:
        UsageError: If the clades belong to taxon sets of different sizes.
    """
    _check_width(a, b)
    if a.bits > b.bits:
        return Ordering.GREATER
    if a.bits < b.bits:
        return Ordering.LESS
    return Ordering.EQUAL


def make_subsplit(a: Clade, b: Clade) -> Subsplit:
    """Order two disjoint nonempty clades into a subsplit.

    Raises:
        UsageError: On a width mismatch.
        InvalidSubsplitError: If either clade is empty or they overlap.
    """
    _check_width(a, b)
    if not a.bits or not b.bits:
        raise InvalidSubsplitError("Subsplit parts must be nonempty")
    if a.bits & b.bits:
        raise InvalidSubsplitError("Subsplit parts must be disjoint")
    if a.bits > b.bits:
        return Subsplit(a, b)
    return Subsplit(b, a)


def subsplit_from_bits(a: int, b: int, width: int) -> Subsplit:
    """Unchecked :func:`make_subsplit` for raw bit vectors known to be valid."""
    if a > b:
        return Subsplit(Clade(a, width), Clade(b, width))
    return Subsplit(Clade(b, width), Clade(a, width))


def make_pcsp(parent: Subsplit, child: Subsplit) -> PcspKey:
    """Attach a child subsplit to the part of ``parent`` it refines.

    Raises:
        IncompatibleSubsplitError: If the child's clade is neither parent part.
        UsageError: If the focal clade has fewer than three taxa, whose split
            is deterministic and never parameterized.
    """
    child_clade = child.clade
    if child_clade == parent.y:
        focal = parent.y
    elif child_clade == parent.z:
        focal = parent.z
    else:
        raise IncompatibleSubsplitError(
            "Child subsplit does not split either part of its parent"
        )
    if focal.size < 3:
        raise UsageError("Clades with fewer than three taxa split deterministically")
    return PcspKey(parent, focal, child)
