"""Tree decompositions into root splits, PCSPs and clade splits.

A rooted tree is fully described by its root split and the parent-child
subsplit pairs of its internal nodes whose clade has at least three taxa.
Smaller clades split in exactly one way and are never recorded.

For unrooted trees, :class:`RootingStructure` precomputes everything needed to
decompose all 2N-3 rootings at once. Each edge ``e`` carries two directed
edges: ``2e`` points away from taxon 0 and ``2e + 1`` points towards it. The
clade of a directed edge is the set of taxa on the side of its head, and the
head subsplit is how the head node divides that clade between the two edges
continuing beyond it.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

from src.core import Clade, PcspKey, Subsplit, subsplit_from_bits
from src.errors import UsageError
from src.treespace import RootedNode, RootedTopology, UnrootedTopology

# Cache covers the full 8-taxon tree space (10395 trees)
_STRUCTURE_CACHE_SIZE = 16384


class RootedDecomposition(NamedTuple):
    """Root split plus the PCSPs of a rooted tree."""

    root_split: Subsplit
    pcsps: tuple[PcspKey, ...]


def decompose_rooted(tree: RootedTopology) -> RootedDecomposition:
    """Decompose a rooted tree into its root split and PCSPs.

    Raises:
        UsageError: If the tree has fewer than 3 taxa.
    """
    taxa = tree.taxa
    width = taxa.size
    if width < 3:
        raise UsageError("Decomposition needs at least 3 taxa")
    pcsps: list[PcspKey] = []

    def visit(node: RootedNode) -> tuple[int, Subsplit | None]:
        if isinstance(node, int):
            return taxa.bit(node), None
        left_bits, left_split = visit(node[0])
        right_bits, right_split = visit(node[1])
        split = subsplit_from_bits(left_bits, right_bits, width)
        for bits, child in ((left_bits, left_split), (right_bits, right_split)):
            if child is not None and bits.bit_count() >= 3:
                pcsps.append(PcspKey(split, Clade(bits, width), child))
        return left_bits | right_bits, split

    _, root_split = visit(tree.root)
    assert root_split is not None
    return RootedDecomposition(root_split, tuple(pcsps))


def clade_decomposition(tree: RootedTopology) -> list[tuple[Clade, Subsplit]]:
    """Every clade of three or more taxa with the subsplit dividing it, root first."""
    taxa = tree.taxa
    width = taxa.size
    out: list[tuple[Clade, Subsplit]] = []

    def visit(node: RootedNode) -> int:
        if isinstance(node, int):
            return taxa.bit(node)
        slot = len(out)
        out.append((Clade(0, width), Subsplit(Clade(0, width), Clade(0, width))))
        left, right = visit(node[0]), visit(node[1])
        bits = left | right
        out[slot] = (Clade(bits, width), subsplit_from_bits(left, right, width))
        return bits

    visit(tree.root)
    return [(clade, split) for clade, split in out if clade.size >= 3]


@dataclass(frozen=True)
class RootingStructure:
    """Directed-edge view of an unrooted tree, shared by every rooting.

    Attributes:
        tree: The unrooted topology.
        clades: Clade bits per directed edge.
        heads: Subsplit at the head of each directed edge (None at leaves).
        outs: The two directed edges continuing beyond the head of each
            directed edge (empty at leaves).
        pairs: For each directed edge ``d``, the ``(d2, key)`` pairs for the
            continuations ``d2`` whose clade has at least three taxa, with
            ``key`` the PCSP formed at the head of ``d``.
        root_splits: Root split obtained by rooting on each edge.
        root_pcsps: The PCSPs directly below the root, per rooted edge.
        down_order: Edge ids by increasing clade size below the edge.
    """

    tree: UnrootedTopology
    clades: tuple[int, ...]
    heads: tuple[Subsplit | None, ...]
    outs: tuple[tuple[int, ...], ...]
    pairs: tuple[tuple[tuple[int, PcspKey], ...], ...]
    root_splits: tuple[Subsplit, ...]
    root_pcsps: tuple[tuple[PcspKey, ...], ...]
    down_order: tuple[int, ...]

    @property
    def n_edges(self) -> int:
        return len(self.root_splits)

    def rooted_pcsps(self, edge: int) -> list[PcspKey]:
        """PCSPs of the tree rooted on ``edge``; same multiset as decompose_rooted."""
        keys = list(self.root_pcsps[edge])
        stack = [2 * edge, 2 * edge + 1]
        while stack:
            d = stack.pop()
            for nxt, key in self.pairs[d]:
                keys.append(key)
                stack.append(nxt)
        return keys

    def below_products(
        self, cond_prob: Callable[[PcspKey], float]
    ) -> list[float]:
        """Product of all conditionals beyond each directed edge.

        The first pass fills downward edges from the leaves up, the second
        fills upward edges from the top down, so each value is computed once.
        """
        below = [1.0] * (2 * self.n_edges)

        def fill(d: int) -> None:
            value = 1.0
            for nxt, key in self.pairs[d]:
                value *= cond_prob(key) * below[nxt]
                if value == 0.0:
                    break
            below[d] = value

        for e in self.down_order:
            fill(2 * e)
        for e in reversed(self.down_order):
            fill(2 * e + 1)
        return below

    def joints(
        self,
        root_prob: Callable[[Subsplit], float],
        cond_prob: Callable[[PcspKey], float],
    ) -> list[float]:
        """Probability of the tree rooted on each edge, from two passes."""
        below = self.below_products(cond_prob)
        out = []
        for e, split in enumerate(self.root_splits):
            value = root_prob(split)
            if value:
                for key in self.root_pcsps[e]:
                    value *= cond_prob(key)
                value *= below[2 * e] * below[2 * e + 1]
            out.append(value)
        return out

    def expected_mass(self, q: list[float]) -> list[float]:
        """Rooting mass on the head side of each directed edge, edge included.

        A PCSP formed at the head of ``d`` occurs in exactly the rootings on
        the tail side of ``d``, whose mass is ``mass[d ^ 1]``.
        """
        graph = self.tree.graph
        total = sum(q)
        mass = [0.0] * (2 * self.n_edges)
        for e in self.down_order:
            mass[2 * e] = q[e] + sum(mass[2 * c] for c in graph.children[e])
        for e in range(self.n_edges):
            mass[2 * e + 1] = total - mass[2 * e] + q[e]
        return mass


def build_rooting_structure(tree: UnrootedTopology) -> RootingStructure:
    """Precompute the directed-edge structure of ``tree``."""
    graph = tree.graph
    splits = tree.splits
    width = tree.taxa.size
    full = tree.taxa.full.bits
    n_edges = len(splits)

    clades = [0] * (2 * n_edges)
    outs: list[tuple[int, ...]] = [()] * (2 * n_edges)
    for e, split in enumerate(splits):
        clades[2 * e] = split
        clades[2 * e + 1] = full ^ split
        kids = graph.children[e]
        if kids:
            outs[2 * e] = (2 * kids[0], 2 * kids[1])
        parent = graph.parent[e]
        if parent >= 0:
            outs[2 * e + 1] = (2 * graph.sibling(e), 2 * parent + 1)

    heads: list[Subsplit | None] = [
        subsplit_from_bits(clades[o[0]], clades[o[1]], width) if o else None for o in outs
    ]
    pairs = []
    for d, head in enumerate(heads):
        entries = []
        if head is not None:
            for nxt in outs[d]:
                if clades[nxt].bit_count() >= 3:
                    entries.append(
                        (nxt, PcspKey(head, Clade(clades[nxt], width), heads[nxt]))
                    )
        pairs.append(tuple(entries))

    root_splits = []
    root_pcsps = []
    for e, split in enumerate(splits):
        root = subsplit_from_bits(split, full ^ split, width)
        root_splits.append(root)
        root_pcsps.append(
            tuple(
                PcspKey(root, Clade(clades[d], width), heads[d])
                for d in (2 * e, 2 * e + 1)
                if clades[d].bit_count() >= 3
            )
        )

    down_order = tuple(sorted(range(n_edges), key=lambda e: splits[e].bit_count()))
    return RootingStructure(
        tree=tree,
        clades=tuple(clades),
        heads=tuple(heads),
        outs=tuple(outs),
        pairs=tuple(pairs),
        root_splits=tuple(root_splits),
        root_pcsps=tuple(root_pcsps),
        down_order=down_order,
    )


@lru_cache(maxsize=_STRUCTURE_CACHE_SIZE)
def rooting_structure(tree: UnrootedTopology) -> RootingStructure:
    """Cached :func:`build_rooting_structure`."""
    return build_rooting_structure(tree)
