"""Rooted and unrooted bifurcating tree topologies.

Both topology types are immutable and canonical, so structural equality is
isomorphism as leaf-labeled trees:

- RootedTopology stores nested pairs of leaf indices with the greater child
  clade first at every internal node.
- UnrootedTopology stores its split set: for every edge, the side not containing
  taxon 0, as an integer clade, sorted in descending clade order. The position of
  a split in that tuple is the edge id, so equal trees share edge numbering.

Seen from leaf 0, every split is the clade below its edge, which gives each
unrooted tree a natural parent/child edge structure (see ``EdgeGraph``).
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterable, NamedTuple, Union

from src.core import Clade, Subsplit, TaxonSet, subsplit_from_bits
from src.errors import (
    EmptySampleError,
    TaxonMismatchError,
    UsageError,
    ValidationError,
)

RootedNode = Union[int, tuple["RootedNode", "RootedNode"]]


def leaf_index(bits: int, width: int) -> int:
    """Taxon index of a singleton clade."""
    return width - bits.bit_length()


def _canonical(node: Any, taxa: TaxonSet) -> tuple[RootedNode, int]:
    """Order every pair greater-clade-first and return (node, clade bits)."""
    if isinstance(node, int):
        return node, taxa.bit(node)
    left, lbits = _canonical(node[0], taxa)
    right, rbits = _canonical(node[1], taxa)
    if lbits > rbits:
        return (left, right), lbits | rbits
    return (right, left), lbits | rbits


@dataclass(frozen=True)
class RootedTopology:
    """A rooted binary tree whose leaves are labeled by taxon indices.

    Build instances with :meth:`from_nested`, which validates and
    canonicalizes the input; the plain constructor trusts its arguments.
    """

    taxa: TaxonSet
    root: RootedNode

    @classmethod
    def from_nested(cls, taxa: TaxonSet, nested: Any) -> "RootedTopology":
        """Validate a nested-pair tree and return it in canonical form.

        Args:
            taxa: The taxon set the leaf indices refer to.
            nested: An int (leaf) or a 2-sequence of nested nodes.

        Raises:
            ValidationError: If the tree is not binary or does not carry every
                taxon exactly once.
        """
        seen: list[int] = []

        def check(node: Any) -> Any:
            if isinstance(node, int):
                if not 0 <= node < taxa.size:
                    raise ValidationError(f"Leaf index {node} outside the taxon set")
                seen.append(node)
                return node
            if not isinstance(node, (tuple, list)) or len(node) != 2:
                raise ValidationError("Rooted topologies must be strictly bifurcating")
            return (check(node[0]), check(node[1]))

        checked = check(nested)
        if sorted(seen) != list(range(taxa.size)):
            raise ValidationError("Every taxon must appear exactly once as a leaf")
        if isinstance(checked, int) and taxa.size > 1:
            raise ValidationError("A single leaf is not a tree on several taxa")
        root, _ = _canonical(checked, taxa)
        return cls(taxa, root)

    @property
    def n_taxa(self) -> int:
        return self.taxa.size

    @cached_property
    def root_split(self) -> Subsplit:
        """Subsplit of the full taxon set at the root."""
        if isinstance(self.root, int):
            raise UsageError("A one-leaf tree has no root split")
        return subsplit_from_bits(
            clade_bits(self.root[0], self.taxa),
            clade_bits(self.root[1], self.taxa),
            self.taxa.size,
        )

    def clades(self) -> list[Clade]:
        """Clades of all nodes in preorder, root first."""
        width = self.taxa.size
        out: list[Clade] = []

        def visit(node: RootedNode) -> int:
            slot = len(out)
            out.append(Clade(0, width))
            if isinstance(node, int):
                bits = self.taxa.bit(node)
            else:
                bits = visit(node[0]) | visit(node[1])
            out[slot] = Clade(bits, width)
            return bits

        visit(self.root)
        return out


def clade_bits(node: RootedNode, taxa: TaxonSet) -> int:
    """Clade of a rooted node as raw bits."""
    if isinstance(node, int):
        return taxa.bit(node)
    return clade_bits(node[0], taxa) | clade_bits(node[1], taxa)


class EdgeGraph(NamedTuple):
    """Edge hierarchy of an unrooted tree viewed from leaf 0.

    Attributes:
        parent: For each edge, the edge directly above it, or -1 for the edge
            whose upper end is leaf 0.
        children: For each edge, the two edges below its lower end, or () when
            the lower end is a leaf.
        top: Id of the edge incident to leaf 0.
    """

    parent: tuple[int, ...]
    children: tuple[tuple[int, ...], ...]
    top: int

    def sibling(self, edge: int) -> int:
        a, b = self.children[self.parent[edge]]
        return b if a == edge else a


@dataclass(frozen=True)
class UnrootedTopology:
    """An unrooted binary tree identified by its split set.

    Build instances with :meth:`from_splits`, which validates; the plain
    constructor expects an already canonical split tuple.
    """

    taxa: TaxonSet
    splits: tuple[int, ...]

    @classmethod
    def from_splits(cls, taxa: TaxonSet, splits: Iterable[int]) -> "UnrootedTopology":
        """Validate and canonicalize a split set.

        Each split may be given from either side; it is stored as the side
        without taxon 0.

        Raises:
            ValidationError: If the splits do not form a binary tree on ``taxa``.
        """
        n = taxa.size
        if n < 3:
            raise ValidationError("Unrooted topologies need at least 3 taxa")
        full = (1 << n) - 1
        bit0 = taxa.bit(0)
        lowered = set()
        for split in splits:
            if split & bit0:
                split = full ^ split
            if not split or split & ~full:
                raise ValidationError("Split outside the taxon set or trivial")
            lowered.add(split)
        if len(lowered) != 2 * n - 3:
            raise ValidationError(
                f"Expected {2 * n - 3} distinct splits for {n} taxa, got {len(lowered)}"
            )
        for i in range(1, n):
            if taxa.bit(i) not in lowered:
                raise ValidationError(f"Missing pendant edge of taxon {taxa.names[i]}")
        if full ^ bit0 not in lowered:
            raise ValidationError(f"Missing pendant edge of taxon {taxa.names[0]}")
        ordered = sorted(lowered, reverse=True)
        for i, a in enumerate(ordered):
            for b in ordered[i + 1 :]:
                if a & b and a & b != b and a & b != a:
                    raise ValidationError("Splits are not pairwise compatible")
        topology = cls(taxa, tuple(ordered))
        # A compatible family of the right size is a binary tree exactly when
        # every internal node has two children.
        if any(len(c) not in (0, 2) for c in topology.graph.children):
            raise ValidationError("Splits do not describe a bifurcating tree")
        return topology

    @property
    def n_taxa(self) -> int:
        return self.taxa.size

    @property
    def n_edges(self) -> int:
        return len(self.splits)

    def edge_clade(self, edge: int) -> Clade:
        """Clade on the side of ``edge`` away from taxon 0."""
        return Clade(self.splits[edge], self.taxa.size)

    def bipartition(self, edge: int) -> Subsplit:
        """The root split obtained by rooting on ``edge``."""
        if not 0 <= edge < len(self.splits):
            raise UsageError(f"Edge {edge} out of range 0..{len(self.splits) - 1}")
        c = self.splits[edge]
        return subsplit_from_bits(c, self.taxa.full.bits ^ c, self.taxa.size)

    @cached_property
    def graph(self) -> EdgeGraph:
        """Parent/children edge structure with leaf 0 on top."""
        splits = self.splits
        order = sorted(range(len(splits)), key=lambda e: splits[e].bit_count())
        parent = [-1] * len(splits)
        children: list[list[int]] = [[] for _ in splits]
        for pos, e in enumerate(order):
            c = splits[e]
            for f in order[pos + 1 :]:
                s = splits[f]
                if s & c == c and s != c:
                    parent[e] = f
                    children[f].append(e)
                    break
        top = splits.index(self.taxa.full.bits ^ self.taxa.bit(0))
        return EdgeGraph(tuple(parent), tuple(tuple(c) for c in children), top)


class WeightedTree(NamedTuple):
    """One record of a tree sample."""

    tree: Any
    weight: float = 1.0


def as_weighted(items: Iterable[Any]) -> list[WeightedTree]:
    """Wrap bare topologies as unit-weight records.

    Raises:
        ValidationError: On a non-positive weight.
    """
    records = []
    for item in items:
        record = item if isinstance(item, WeightedTree) else WeightedTree(item, 1.0)
        if not record.weight > 0:
            raise ValidationError(f"Tree weights must be positive, got {record.weight}")
        records.append(record)
    return records


def merge_duplicates(items: Iterable[Any]) -> list[WeightedTree]:
    """Collapse identical topologies, summing their weights (first-seen order)."""
    totals: dict[Any, float] = {}
    for tree, weight in as_weighted(items):
        totals[tree] = totals.get(tree, 0.0) + weight
    return [WeightedTree(tree, weight) for tree, weight in totals.items()]


def sample_taxa(items: Iterable[WeightedTree]) -> TaxonSet:
    """The common taxon set of a sample.

    Raises:
        ValidationError: If the sample is empty or mixes taxon sets.
    """
    taxa: TaxonSet | None = None
    for tree, _ in items:
        if taxa is None:
            taxa = tree.taxa
        elif tree.taxa != taxa:
            raise TaxonMismatchError("Sample mixes trees on different taxon sets")
    if taxa is None:
        raise EmptySampleError("The tree sample is empty")
    return taxa


def root_at_edge(tree: UnrootedTopology, edge: int) -> RootedTopology:
    """Place the root on ``edge``.

    Raises:
        UsageError: If ``edge`` is not in 0..2N-4.
    """
    if not 0 <= edge < tree.n_edges:
        raise UsageError(f"Edge {edge} out of range 0..{tree.n_edges - 1}")
    graph = tree.graph
    splits = tree.splits
    width = tree.taxa.size

    def down(e: int) -> RootedNode:
        kids = graph.children[e]
        if not kids:
            return leaf_index(splits[e], width)
        return (down(kids[0]), down(kids[1]))

    def up(e: int) -> RootedNode:
        p = graph.parent[e]
        if p < 0:
            return 0
        return (down(graph.sibling(e)), up(p))

    root, _ = _canonical((down(edge), up(edge)), tree.taxa)
    return RootedTopology(tree.taxa, root)


def unroot(tree: RootedTopology) -> tuple[UnrootedTopology, int]:
    """Collapse the root of a rooted tree.

    Returns:
        The unrooted tree and the id of the edge that carried the root.

    Raises:
        UsageError: If the tree has fewer than 3 taxa.
    """
    taxa = tree.taxa
    if taxa.size < 3:
        raise UsageError("Unrooting needs at least 3 taxa")
    full = taxa.full.bits
    bit0 = taxa.bit(0)
    clades = tree.clades()
    lowered = {c.bits if not c.bits & bit0 else full ^ c.bits for c in clades[1:]}
    splits = tuple(sorted(lowered, reverse=True))
    root_clade = tree.root_split.y.bits
    if root_clade & bit0:
        root_clade = full ^ root_clade
    return UnrootedTopology(taxa, splits), splits.index(root_clade)


def as_unrooted(tree: RootedTopology | UnrootedTopology) -> UnrootedTopology:
    """Return ``tree`` unrooted; unrooted trees pass through."""
    if isinstance(tree, RootedTopology):
        return unroot(tree)[0]
    return tree


def insert_leaf(splits: Iterable[int], edge_split: int, leaf_bit: int) -> tuple[int, ...]:
    """Attach a new leaf to the edge with split ``edge_split``.

    Edges above the attachment point gain the new leaf; the attachment edge is
    subdivided and a pendant edge is added.
    """
    grown = [s | leaf_bit if s & edge_split == edge_split else s for s in splits]
    grown.append(edge_split)
    grown.append(leaf_bit)
    return tuple(sorted(grown, reverse=True))


def three_taxon_splits(taxa: TaxonSet) -> tuple[int, ...]:
    """Split set of the unique tree on taxa 0, 1 and 2."""
    b1, b2 = taxa.bit(1), taxa.bit(2)
    return (b1 | b2, b1, b2)


def random_unrooted(taxa: TaxonSet, rng: Any) -> UnrootedTopology:
    """Draw a uniformly random unrooted topology by sequential leaf insertion.

    Args:
        taxa: Taxon set with at least 3 taxa.
        rng: A ``numpy.random.Generator``.
    """
    if taxa.size < 3:
        raise UsageError("Unrooted topologies need at least 3 taxa")
    splits = three_taxon_splits(taxa)
    for k in range(3, taxa.size):
        edge = int(rng.integers(len(splits)))
        splits = insert_leaf(splits, splits[edge], taxa.bit(k))
    return UnrootedTopology(taxa, splits)
