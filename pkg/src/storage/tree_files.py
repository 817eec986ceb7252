"""Tree-sample and target files.

A tree file holds one record per line, either a bare Newick string or
``<weight><TAB><newick>`` with a positive integer repeat count; blank lines
and lines starting with ``#`` are skipped. A target file holds
``<prob><TAB><newick>`` records.
"""

import math
from pathlib import Path
from typing import Iterable, Iterator

from src.core import TaxonSet
from src.errors import (
    EmptySampleError,
    ModelFileError,
    NewickError,
    TaxonMismatchError,
    UnknownTaxonError,
    UsageError,
)
from src.evaluation import DiscreteDistribution
from src.logging_config import get_logger
from src.treespace import (
    RootedTopology,
    UnrootedTopology,
    WeightedTree,
    as_weighted,
    newick_leaf_names,
    parse_newick,
    write_newick,
)

logger = get_logger(__name__)

# Accepted deviation of a target file's total probability from 1
TARGET_TOLERANCE = 1e-6


def _records(path: Path) -> Iterator[tuple[int, str]]:
    """Yield (line number, stripped text) for every non-comment line."""
    try:
        with open(path, encoding="utf-8") as f:
            for lineno, raw in enumerate(f, start=1):
                line = raw.strip()
                if line and not line.startswith("#"):
                    yield lineno, line
    except OSError as e:
        raise ModelFileError(f"Cannot read file: {e.strerror}", path) from e
    except UnicodeDecodeError as e:
        raise ModelFileError("File is not valid UTF-8", path) from e


def _split_record(line: str) -> tuple[str | None, str, int]:
    """Split ``prefix<TAB>newick``; returns (prefix, newick, newick column offset)."""
    prefix, sep, rest = line.partition("\t")
    if not sep:
        return None, line, 0
    return prefix.strip(), rest.strip(), len(prefix) + 1


def _parse_tree(
    text: str,
    taxa: TaxonSet,
    path: Path,
    lineno: int,
    offset: int,
) -> RootedTopology | UnrootedTopology:
    try:
        return parse_newick(text, taxa)
    except UnknownTaxonError as e:
        raise UnknownTaxonError(e.name, lineno, e.column + offset) from e
    except NewickError as e:
        raise NewickError(f"{e.reason} in {path}", lineno, e.column + offset) from e
    except TaxonMismatchError as e:
        raise TaxonMismatchError(f"{e} at line {lineno} of {path}") from e


def _infer_taxa(text: str, path: Path, lineno: int, offset: int) -> TaxonSet:
    try:
        names = newick_leaf_names(text)
    except NewickError as e:
        raise NewickError(f"{e.reason} in {path}", lineno, e.column + offset) from e
    return TaxonSet.from_names(names)


def _parse_weight(text: str, path: Path, lineno: int) -> float:
    try:
        weight = float(text)
    except ValueError:
        raise ModelFileError(f"Invalid tree weight '{text}'", path, lineno) from None
    if not math.isfinite(weight) or weight <= 0.0 or not weight.is_integer():
        raise ModelFileError(
            f"Tree weight must be a positive integer count, got '{text}'", path, lineno
        )
    return weight


def read_tree_file(
    path: str | Path, taxa: TaxonSet | None = None
) -> tuple[TaxonSet, list[WeightedTree]]:
    """Read a weighted tree sample.

    Args:
        path: The tree file.
        taxa: Authoritative taxon order. When omitted the order in which
            leaves appear in the first record is used.

    Returns:
        The taxon set and the records in file order.

    Raises:
        EmptySampleError: If the file holds no records and ``taxa`` is None.
        NewickError: With the file line and column of a syntax error.
        ModelFileError: On unreadable files or invalid weights.
    """
    path = Path(path)
    trees: list[WeightedTree] = []
    for lineno, line in _records(path):
        prefix, text, offset = _split_record(line)
        weight = 1.0 if prefix is None else _parse_weight(prefix, path, lineno)
        if taxa is None:
            taxa = _infer_taxa(text, path, lineno, offset)
        trees.append(WeightedTree(_parse_tree(text, taxa, path, lineno, offset), weight))
    if taxa is None:
        raise EmptySampleError(f"No trees in {path}")
    logger.debug(
        "Read tree file",
        extra={"path": str(path), "records": len(trees), "n_taxa": taxa.size},
    )
    return taxa, trees


def _format_weight(weight: float) -> str:
    if not float(weight).is_integer():
        raise UsageError(f"Tree files hold integer weights, got {weight}")
    return str(int(weight))


def write_tree_file(path: str | Path, trees: Iterable[object]) -> int:
    """Write trees (bare topologies or WeightedTree records), one per line.

    Unit weights are written as bare Newick strings.

    Raises:
        UsageError: If a weight is not a whole number.

    Returns:
        Number of records written.
    """
    lines = []
    for tree, weight in as_weighted(trees):
        newick = write_newick(tree)
        lines.append(newick if weight == 1.0 else f"{_format_weight(weight)}\t{newick}")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.writelines(f"{line}\n" for line in lines)
    return len(lines)


def read_target_file(path: str | Path, taxa: TaxonSet | None = None) -> DiscreteDistribution:
    """Read a ``prob<TAB>newick`` target distribution.

    The probabilities must sum to 1 within ``TARGET_TOLERANCE``; they are
    renormalized to sum exactly to 1 afterwards.

    Raises:
        ModelFileError: On malformed records or unreadable files.
        NormalizationError: If the total is off by more than the tolerance.
        TaxonMismatchError: If ``taxa`` is given and a tree disagrees with it.
    """
    path = Path(path)
    pairs = []
    for lineno, line in _records(path):
        prefix, text, offset = _split_record(line)
        if prefix is None:
            raise ModelFileError("Expected '<prob><TAB><newick>'", path, lineno)
        try:
            prob = float(prefix)
        except ValueError:
            raise ModelFileError(f"Invalid probability '{prefix}'", path, lineno) from None
        if not math.isfinite(prob) or prob < 0.0:
            raise ModelFileError(f"Probability must be nonnegative, got '{prefix}'", path, lineno)
        if taxa is None:
            taxa = _infer_taxa(text, path, lineno, offset)
        pairs.append((_parse_tree(text, taxa, path, lineno, offset), prob))
    if not pairs:
        raise ModelFileError("Target file holds no trees", path)
    return DiscreteDistribution.from_pairs(pairs, tolerance=TARGET_TOLERANCE, renormalize=True)


def write_target_file(path: str | Path, target: DiscreteDistribution) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for tree, prob in zip(target.trees, target.weights):
            f.write(f"{float(prob)!r}\t{write_newick(tree)}\n")
