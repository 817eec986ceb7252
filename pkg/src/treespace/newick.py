"""Newick reading and writing for bifurcating topologies.

Parsing handles:
- branch lengths and internal node labels (parsed and discarded)
- bracketed comments such as ``[&R]`` or ``[&U]``
- single-quoted labels with ``''`` as an escaped quote

A binary root yields a RootedTopology, a trifurcating root an
UnrootedTopology. Every error reports the 1-based line and column.

Writing is canonical: children appear greater clade first, and unrooted trees
are written around the internal node next to taxon 0. The written string is
therefore also the tree's identity key (``tree_id``).
"""

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, NewType

from src.core import TaxonSet
from src.errors import NewickError, TaxonMismatchError, UnknownTaxonError

from .topology import RootedNode, RootedTopology, UnrootedTopology

TreeId = NewType("TreeId", str)

# Characters that end an unquoted label
_DELIMITERS = frozenset("()[]',:;")
# Characters that force quoting when writing a name
_QUOTE_TRIGGERS = frozenset("()[]',:; \t")


class _Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


@dataclass
class _Node:
    """Raw parse tree node before taxa are resolved."""

    line: int
    column: int
    name: str | None = None
    children: list["_Node"] = field(default_factory=list)


def _tokenize(text: str) -> Iterator[_Token]:
    line, column = 1, 1
    i, n = 0, len(text)

    def advance(count: int) -> None:
        nonlocal i, line, column
        for ch in text[i : i + count]:
            if ch == "\n":
                line, column = line + 1, 1
            else:
                column += 1
        i += count

    while i < n:
        ch = text[i]
        if ch.isspace():
            advance(1)
        elif ch == "[":
            start = (line, column)
            end = text.find("]", i)
            if end < 0:
                raise NewickError("Unterminated comment", *start)
            advance(end - i + 1)
        elif ch in "(),:;":
            yield _Token(ch, ch, line, column)
            advance(1)
        elif ch == "'":
            start_line, start_col = line, column
            j = i + 1
            chars = []
            while True:
                if j >= n:
                    raise NewickError("Unterminated quoted label", start_line, start_col)
                if text[j] == "'":
                    if j + 1 < n and text[j + 1] == "'":
                        chars.append("'")
                        j += 2
                        continue
                    break
                chars.append(text[j])
                j += 1
            advance(j - i + 1)
            yield _Token("label", "".join(chars), start_line, start_col)
        elif ch == "]":
            raise NewickError("Unexpected ']'", line, column)
        else:
            j = i
            while j < n and text[j] not in _DELIMITERS and not text[j].isspace():
                j += 1
            token = _Token("label", text[i:j], line, column)
            advance(j - i)
            yield token


class _Parser:
    """Recursive-descent parser over the token stream."""

    def __init__(self, text: str):
        self._tokens = list(_tokenize(text))
        self._pos = 0
        self._end = _end_position(text)

    def _peek(self) -> _Token | None:
        if self._pos < len(self._tokens):
            return self._tokens[self._pos]
        return None

    def _next(self, expected: str) -> _Token:
        token = self._peek()
        if token is None:
            raise NewickError(f"Unexpected end of input, expected {expected}", *self._end)
        self._pos += 1
        return token

    def _fail(self, token: _Token, expected: str) -> NewickError:
        return NewickError(f"Unexpected '{token.text}', expected {expected}", token.line, token.column)

    def parse(self) -> _Node:
        root = self._subtree()
        token = self._next("';'")
        if token.kind != ";":
            raise self._fail(token, "';'")
        extra = self._peek()
        if extra is not None:
            raise self._fail(extra, "end of input after ';'")
        return root

    def _subtree(self) -> _Node:
        token = self._next("a subtree")
        if token.kind == "(":
            node = _Node(token.line, token.column)
            node.children.append(self._subtree())
            while True:
                sep = self._next("',' or ')'")
                if sep.kind == ",":
                    node.children.append(self._subtree())
                elif sep.kind == ")":
                    break
                else:
                    raise self._fail(sep, "',' or ')'")
            # Internal labels are support values or names; both are dropped.
            following = self._peek()
            if following is not None and following.kind == "label":
                self._pos += 1
        elif token.kind == "label":
            node = _Node(token.line, token.column, name=token.text)
        else:
            raise self._fail(token, "'(' or a taxon name")
        self._branch_length()
        return node

    def _branch_length(self) -> None:
        token = self._peek()
        if token is None or token.kind != ":":
            return
        self._pos += 1
        value = self._next("a branch length")
        if value.kind != "label":
            raise self._fail(value, "a branch length")
        try:
            float(value.text)
        except ValueError:
            raise NewickError(
                f"Invalid branch length '{value.text}'", value.line, value.column
            ) from None


def _end_position(text: str) -> tuple[int, int]:
    lines = text.split("\n")
    return len(lines), len(lines[-1]) + 1


def _leaves(node: _Node) -> Iterator[_Node]:
    stack = [node]
    while stack:
        current = stack.pop()
        if current.children:
            stack.extend(reversed(current.children))
        else:
            yield current


def newick_leaf_names(text: str) -> list[str]:
    """Leaf labels of a Newick string in order of appearance."""
    root = _Parser(text).parse()
    return [leaf.name or "" for leaf in _leaves(root)]


def parse_newick(text: str, taxa: TaxonSet) -> RootedTopology | UnrootedTopology:
    """Parse a single Newick tree.

    Args:
        text: The Newick string, terminated by ';'.
        taxa: Taxon set the leaf names must cover exactly.

    Returns:
        A RootedTopology for a binary root, an UnrootedTopology for a
        trifurcating root.

    Raises:
        NewickError: On syntax errors, duplicate taxa or multifurcations.
        UnknownTaxonError: If a leaf is not in ``taxa``.
        TaxonMismatchError: If some taxa are missing from the tree.
    """
    root = _Parser(text).parse()
    seen: set[int] = set()

    def build(node: _Node, is_root: bool) -> RootedNode | list:
        if not node.children:
            name = node.name or ""
            if name not in taxa.index:
                raise UnknownTaxonError(name, node.line, node.column)
            index = taxa.index[name]
            if index in seen:
                raise NewickError(f"Duplicate taxon '{name}'", node.line, node.column)
            seen.add(index)
            return index
        arity = len(node.children)
        if not is_root and arity != 2:
            raise NewickError(
                f"Multifurcation below the root ({arity} children)", node.line, node.column
            )
        if is_root and arity not in (2, 3):
            raise NewickError(
                f"Root must have 2 or 3 children, found {arity}", node.line, node.column
            )
        return [build(child, False) for child in node.children]

    structure = build(root, True)
    if len(seen) != taxa.size:
        missing = [name for i, name in enumerate(taxa.names) if i not in seen]
        raise TaxonMismatchError(f"Tree lacks taxa: {', '.join(missing)}")
    if isinstance(structure, int):
        raise TaxonMismatchError("A single leaf is not a tree")
    if len(structure) == 2:
        return RootedTopology.from_nested(taxa, structure)
    return _unrooted_from_nested(taxa, structure)


def _unrooted_from_nested(taxa: TaxonSet, children: list) -> UnrootedTopology:
    full = taxa.full.bits
    bit0 = taxa.bit(0)
    splits: set[int] = set()

    def visit(node) -> int:
        if isinstance(node, int):
            bits = taxa.bit(node)
        else:
            bits = visit(node[0]) | visit(node[1])
        splits.add(bits if not bits & bit0 else full ^ bits)
        return bits

    for child in children:
        visit(child)
    return UnrootedTopology(taxa, tuple(sorted(splits, reverse=True)))


def _quote(name: str) -> str:
    if _QUOTE_TRIGGERS.intersection(name):
        return "'" + name.replace("'", "''") + "'"
    return name


def _write_rooted(node: RootedNode, names: tuple[str, ...]) -> str:
    if isinstance(node, int):
        return _quote(names[node])
    return f"({_write_rooted(node[0], names)},{_write_rooted(node[1], names)})"


def write_newick(tree: RootedTopology | UnrootedTopology) -> str:
    """Write a topology as canonical Newick without branch lengths."""
    names = tree.taxa.names
    if isinstance(tree, RootedTopology):
        return _write_rooted(tree.root, names) + ";"

    graph = tree.graph
    splits = tree.splits
    width = tree.taxa.size

    def below(edge: int) -> str:
        kids = graph.children[edge]
        if not kids:
            return _quote(names[width - splits[edge].bit_length()])
        first, second = sorted(kids, key=lambda e: splits[e], reverse=True)
        return f"({below(first)},{below(second)})"

    first, second = sorted(graph.children[graph.top], key=lambda e: splits[e], reverse=True)
    return f"({_quote(names[0])},{below(first)},{below(second)});"


def tree_id(tree: RootedTopology | UnrootedTopology) -> TreeId:
    """Canonical identity string of a topology (its canonical Newick)."""
    return TreeId(write_newick(tree))
