"""Tree topologies, Newick I/O and tree-space enumeration."""

from .enumeration import (
    check_enumeration_cap,
    count_rooted,
    count_unrooted,
    double_factorial,
    enumerate_rooted,
    enumerate_unrooted,
)
from .newick import TreeId, newick_leaf_names, parse_newick, tree_id, write_newick
from .topology import (
    EdgeGraph,
    RootedNode,
    RootedTopology,
    UnrootedTopology,
    WeightedTree,
    as_unrooted,
    as_weighted,
    clade_bits,
    insert_leaf,
    leaf_index,
    merge_duplicates,
    random_unrooted,
    root_at_edge,
    sample_taxa,
    three_taxon_splits,
    unroot,
)

__all__ = [
    "EdgeGraph",
    "RootedNode",
    "RootedTopology",
    "TreeId",
    "UnrootedTopology",
    "WeightedTree",
    "as_unrooted",
    "as_weighted",
    "check_enumeration_cap",
    "clade_bits",
    "count_rooted",
    "count_unrooted",
    "double_factorial",
    "enumerate_rooted",
    "enumerate_unrooted",
    "insert_leaf",
    "leaf_index",
    "merge_duplicates",
    "newick_leaf_names",
    "parse_newick",
    "random_unrooted",
    "root_at_edge",
    "sample_taxa",
    "three_taxon_splits",
    "tree_id",
    "unroot",
    "write_newick",
]
