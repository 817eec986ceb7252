"""Versioned text files for fitted SBN, CCD and SRF parameters.

Every file starts with a header naming its kind and version, followed by a
``taxa`` line whose order is authoritative: clade bit meanings depend on it.
Probabilities are written with 17 significant digits so a stored model loads
back bit-exactly.
"""

import math
from pathlib import Path
from typing import Any, Callable, Iterator, TextIO

from src.core import TaxonSet
from src.errors import (
    InvalidSubsplitError,
    ModelFileError,
    NewickError,
    TaxonMismatchError,
    UsageError,
    ValidationError,
)
from src.estimators import AnyParams, CCDParams, SBNParams, SRFParams
from src.logging_config import get_logger
from src.treespace import TreeId, as_unrooted, parse_newick, tree_id

logger = get_logger(__name__)

SBN_HEADER = "sbn-params v1"
CCD_HEADER = "ccd-params v1"
SRF_HEADER = "srf-table v1"


def format_prob(prob: float) -> str:
    return format(prob, ".17g")


def _write_header(f: TextIO, header: str, taxa: TaxonSet) -> None:
    f.write(f"{header}\n")
    f.write(f"taxa\t{','.join(taxa.names)}\n")


def store_sbn(params: SBNParams, path: str | Path) -> None:
    """Write SBN parameters; records are sorted so output is deterministic."""
    taxa = params.taxa
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        _write_header(f, SBN_HEADER, taxa)
        for split, prob in sorted(params.root_dist.items(), reverse=True):
            f.write(f"root\t{taxa.format_subsplit(split)}\t{format_prob(prob)}\n")
        for key, prob in sorted(params.pcsp_items(), reverse=True):
            f.write(
                f"pcsp\t{taxa.format_subsplit(key.parent)}\t{taxa.format_clade(key.focal)}"
                f"\t{taxa.format_subsplit(key.child)}\t{format_prob(prob)}\n"
            )


def store_ccd(params: CCDParams, path: str | Path) -> None:
    taxa = params.taxa
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        _write_header(f, CCD_HEADER, taxa)
        for clade, splits in sorted(params.clade_dist.items(), reverse=True):
            for split, prob in sorted(splits.items(), reverse=True):
                f.write(
                    f"clade\t{taxa.format_clade(clade)}\t{taxa.format_subsplit(split)}"
                    f"\t{format_prob(prob)}\n"
                )


def store_srf(params: SRFParams, path: str | Path) -> None:
    """Write a frequency table, most frequent tree first."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        _write_header(f, SRF_HEADER, params.taxa)
        for tid, prob in sorted(params.probs.items(), key=lambda kv: (-kv[1], kv[0])):
            f.write(f"tree\t{format_prob(prob)}\t{tid}\n")


def store_model(params: AnyParams, path: str | Path) -> None:
    """Write any fitted model in its own file format.

    Raises:
        UsageError: For objects that are not fitted parameters.
    """
    if isinstance(params, SBNParams):
        store_sbn(params, path)
    elif isinstance(params, CCDParams):
        store_ccd(params, path)
    elif isinstance(params, SRFParams):
        store_srf(params, path)
    else:
        raise UsageError(f"Cannot store objects of type {type(params).__name__}")
    logger.info("Stored model", extra={"path": str(path), **params.to_dict()})


class _Reader:
    """Line cursor over a parameter file, tracking positions for errors."""

    def __init__(self, path: Path):
        self.path = path
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ModelFileError(f"Cannot read file: {e.strerror}", path) from e
        except UnicodeDecodeError as e:
            raise ModelFileError("File is not valid UTF-8", path) from e
        self.lines = text.split("\n")

    def error(self, message: str, lineno: int | None) -> ModelFileError:
        return ModelFileError(message, self.path, lineno)

    def header(self) -> str:
        if not self.lines or not self.lines[0].strip():
            raise self.error("Missing header line", 1)
        return self.lines[0].strip()

    def taxa(self) -> TaxonSet:
        if len(self.lines) < 2:
            raise self.error("Missing 'taxa' line", 2)
        tag, _, names = self.lines[1].rstrip("\r").partition("\t")
        if tag != "taxa" or not names:
            raise self.error("Expected 'taxa<TAB><names>'", 2)
        try:
            return TaxonSet.from_names(names.split(","))
        except ValidationError as e:
            raise self.error(str(e), 2) from e

    def records(self) -> Iterator[tuple[int, list[str]]]:
        for lineno, raw in enumerate(self.lines[2:], start=3):
            line = raw.rstrip("\r")
            if line.strip():
                yield lineno, line.split("\t")

    def prob(self, text: str, lineno: int) -> float:
        try:
            value = float(text)
        except ValueError:
            raise self.error(f"Invalid probability '{text}'", lineno) from None
        if not math.isfinite(value) or value < 0.0:
            raise self.error(f"Probability must be finite and nonnegative, got '{text}'", lineno)
        return value


def _parsing(reader: _Reader, lineno: int, build: Callable[[], Any]) -> Any:
    """Run ``build``, turning clade parsing failures into file errors."""
    try:
        return build()
    except (UsageError, InvalidSubsplitError) as e:
        raise reader.error(str(e), lineno) from e


def _load_sbn(reader: _Reader, taxa: TaxonSet) -> SBNParams:
    params = SBNParams(taxa)
    for lineno, fields in reader.records():
        kind = fields[0]
        if kind == "root" and len(fields) == 3:
            split = _parsing(reader, lineno, lambda: taxa.parse_subsplit(fields[1]))
            if split in params.root_dist:
                raise reader.error("Duplicate root record", lineno)
            params.root_dist[split] = reader.prob(fields[2], lineno)
        elif kind == "pcsp" and len(fields) == 5:
            parent, focal, child = _parsing(
                reader,
                lineno,
                lambda: (
                    taxa.parse_subsplit(fields[1]),
                    taxa.parse_clade(fields[2]),
                    taxa.parse_subsplit(fields[3]),
                ),
            )
            children = params.cond_dist.setdefault((parent, focal), {})
            if child in children:
                raise reader.error("Duplicate pcsp record", lineno)
            children[child] = reader.prob(fields[4], lineno)
        else:
            raise reader.error(f"Unexpected record '{kind}' with {len(fields)} fields", lineno)
    return params


def _load_ccd(reader: _Reader, taxa: TaxonSet) -> CCDParams:
    params = CCDParams(taxa)
    for lineno, fields in reader.records():
        if fields[0] != "clade" or len(fields) != 4:
            raise reader.error("Expected 'clade<TAB><clade><TAB><Y|Z><TAB><prob>'", lineno)
        clade, split = _parsing(
            reader,
            lineno,
            lambda: (taxa.parse_clade(fields[1]), taxa.parse_subsplit(fields[2])),
        )
        splits = params.clade_dist.setdefault(clade, {})
        if split in splits:
            raise reader.error("Duplicate clade record", lineno)
        splits[split] = reader.prob(fields[3], lineno)
    return params


def _load_srf(reader: _Reader, taxa: TaxonSet) -> SRFParams:
    params = SRFParams(taxa)
    for lineno, fields in reader.records():
        if fields[0] != "tree" or len(fields) != 3:
            raise reader.error("Expected 'tree<TAB><prob><TAB><newick>'", lineno)
        prob = reader.prob(fields[1], lineno)
        try:
            tid: TreeId = tree_id(as_unrooted(parse_newick(fields[2], taxa)))
        except (NewickError, TaxonMismatchError) as e:
            raise reader.error(str(e), lineno) from e
        if tid in params.probs:
            raise reader.error("Duplicate tree record", lineno)
        params.probs[tid] = prob
    return params


_LOADERS: dict[str, Callable[[_Reader, TaxonSet], AnyParams]] = {
    SBN_HEADER: _load_sbn,
    CCD_HEADER: _load_ccd,
    SRF_HEADER: _load_srf,
}


def load_model(path: str | Path) -> AnyParams:
    """Load SBN, CCD or SRF parameters, dispatching on the header line.

    Distributions are validated to sum to 1 within 1e-9 after loading.

    Raises:
        ModelFileError: On an unknown header or a malformed record.
        NormalizationError: If a stored distribution does not sum to 1.
        IncompatibleSubsplitError: If a stored child does not split its clade.
    """
    path = Path(path)
    reader = _Reader(path)
    header = reader.header()
    loader = _LOADERS.get(header)
    if loader is None:
        raise reader.error(f"Unknown model header '{header}'", 1)
    params = loader(reader, reader.taxa())
    params.validate()
    logger.debug("Loaded model", extra={"path": str(path), "header": header, **params.to_dict()})
    return params


def load_sbn(path: str | Path) -> SBNParams:
    """Load a file that must hold SBN parameters."""
    params = load_model(path)
    if not isinstance(params, SBNParams):
        raise ModelFileError(f"Expected an '{SBN_HEADER}' file", Path(path), 1)
    return params
