"""Attributed directed graph: loading, indexing and serialization.

Entities carry a type and a dense integer id.  Literal-valued edges are kept
as ``(owner, name, value)`` attribute records; attribute nodes are never
materialized.
"""
from __future__ import annotations

import logging
import re
import sys
import unicodedata
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import GraphLoadError

log = logging.getLogger(__name__)

TYPE_PREDICATE = "type"
WILDCARD = "_"

_IRI = r"<([^<>]*)>"
_LITERAL = r'"((?:[^"\\]|\\.)*)"(?:@[A-Za-z0-9-]+|\^\^<[^<>]*>)?'
_NT_LINE = re.compile(rf"^\s*{_IRI}\s+{_IRI}\s+(?:{_IRI}|{_LITERAL})\s*\.\s*$")
_ESCAPES = {"t": "\t", "n": "\n", "r": "\r", '"': '"', "\\": "\\", "b": "\b", "f": "\f"}


def normalize_literal(value: str) -> str:
    """NFC-normalize and trim a literal; all value comparisons use this form."""
    return unicodedata.normalize("NFC", value).strip()


def local_name(iri: str) -> str:
    for sep in ("#", "/"):
        if sep in iri:
            tail = iri.rsplit(sep, 1)[1]
            if tail:
                return tail
    return iri


def _unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        nxt = text[i + 1]
        if nxt in _ESCAPES:
            out.append(_ESCAPES[nxt])
            i += 2
        elif nxt == "u":
            out.append(chr(int(text[i + 2:i + 6], 16)))
            i += 6
        elif nxt == "U":
            out.append(chr(int(text[i + 2:i + 10], 16)))
            i += 10
        else:
            raise ValueError(f"bad escape \\{nxt}")
    return "".join(out)


def _escape(text: str) -> str:
    return (text.replace("\\", "\\\\").replace('"', '\\"')
            .replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t"))


@dataclass(frozen=True)
class AttributeRecord:
    owner: int
    name: str
    value: str


@dataclass(frozen=True)
class EdgeRecord:
    src: int
    label: str
    dst: int


class DataGraph:
    """Immutable attributed directed graph.

    Use :class:`GraphBuilder` or :func:`load_graph` to construct one.
    Node ids are dense and assigned in first-seen order.
    """

    def __init__(self, names, types, attrs, edges, warnings=()):
        self._names: list[str] = names
        self._ids: dict[str, int] = {n: i for i, n in enumerate(names)}
        self._types: list[str | None] = types
        # attribute name -> owner -> values (first-seen order, deduplicated)
        self._attrs: dict[str, dict[int, tuple[str, ...]]] = attrs
        # edge label -> src -> targets (sorted, deduplicated)
        self._out: dict[str, dict[int, tuple[int, ...]]] = edges
        self.warnings: tuple[str, ...] = tuple(warnings)

        index: dict[str, list[int]] = defaultdict(list)
        for v, t in enumerate(types):
            if t is not None:
                index[t].append(v)
        self._type_index = {t: tuple(vs) for t, vs in index.items()}

    # -- basic accessors -------------------------------------------------

    @property
    def num_nodes(self) -> int:
        return len(self._names)

    @property
    def num_edges(self) -> int:
        return sum(len(ts) for m in self._out.values() for ts in m.values())

    @property
    def types(self) -> list[str]:
        return sorted(self._type_index)

    def name(self, v: int) -> str:
        return self._names[v]

    def node(self, name: str) -> int:
        return self._ids[name]

    def has_node(self, name: str) -> bool:
        return name in self._ids

    def type_of(self, v: int) -> str | None:
        return self._types[v]

    def entities_of_type(self, t: str) -> tuple[int, ...]:
        return self._type_index.get(t, ())

    def attribute_names(self) -> list[str]:
        return sorted(self._attrs)

    def edge_labels(self) -> list[str]:
        return sorted(self._out)

    def attribute_values(self, v: int, a: str) -> tuple[str, ...]:
        m = self._attrs.get(a)
        if m is None:
            return ()
        return m.get(v, ())

    def attribute_map(self, a: str) -> dict[int, tuple[str, ...]]:
        """Owner -> values for one attribute name (read-only by convention)."""
        return self._attrs.get(a, {})

    def targets(self, v: int, label: str) -> tuple[int, ...]:
        if label == WILDCARD:
            found = set()
            for m in self._out.values():
                found.update(m.get(v, ()))
            return tuple(sorted(found))
        m = self._out.get(label)
        if m is None:
            return ()
        return m.get(v, ())

    def edge_map(self, label: str) -> dict[int, tuple[int, ...]]:
        return self._out.get(label, {})

    def neighbors(self, v: int, label: str, t: str) -> list[int]:
        types = self._types
        if t == WILDCARD:
            return [w for w in self.targets(v, label) if types[w] is not None]
        return [w for w in self.targets(v, label) if types[w] == t]

    def out(self, v: int, label: str) -> tuple[tuple[int, ...], tuple[str, ...]]:
        """Entity targets and literal targets of ``v`` along ``label``."""
        return self.targets(v, label), self.attribute_values(v, label)

    # -- record views ----------------------------------------------------

    def iter_edges(self) -> Iterator[EdgeRecord]:
        for label in sorted(self._out):
            m = self._out[label]
            for src in sorted(m):
                for dst in m[src]:
                    yield EdgeRecord(src, label, dst)

    def iter_attributes(self) -> Iterator[AttributeRecord]:
        for name in sorted(self._attrs):
            m = self._attrs[name]
            for owner in sorted(m):
                for value in m[owner]:
                    yield AttributeRecord(owner, name, value)

    def triples(self) -> set[tuple[str, str, str, str]]:
        """The graph as a set of ``(src, label, dst, kind)`` rows."""
        rows = set()
        for v, t in enumerate(self._types):
            if t is not None:
                rows.add((self._names[v], TYPE_PREDICATE, t, "type"))
        for e in self.iter_edges():
            rows.add((self._names[e.src], e.label, self._names[e.dst], "entity"))
        for a in self.iter_attributes():
            rows.add((self._names[a.owner], a.name, a.value, "literal"))
        return rows

    # -- serialization ---------------------------------------------------

    def _rows(self) -> Iterator[tuple[str, str, str, str]]:
        names = self._names
        for v, t in enumerate(self._types):
            if t is not None:
                yield names[v], TYPE_PREDICATE, t, "type"
        for a in self.iter_attributes():
            yield names[a.owner], a.name, a.value, "literal"
        for e in self.iter_edges():
            yield names[e.src], e.label, names[e.dst], "entity"

    def to_ntriples(self) -> str:
        lines = []
        for s, p, o, kind in self._rows():
            obj = f'"{_escape(o)}"' if kind == "literal" else f"<{o}>"
            lines.append(f"<{s}> <{p}> {obj} .")
        return "\n".join(lines) + ("\n" if lines else "")

    def to_tsv(self) -> str:
        lines = ["\t".join(row) for row in self._rows()]
        return "\n".join(lines) + ("\n" if lines else "")


class GraphBuilder:
    """Accumulates triples and produces an immutable :class:`DataGraph`."""

    def __init__(self):
        self._ids: dict[str, int] = {}
        self._names: list[str] = []
        self._types: list[str | None] = []
        self._attrs: dict[str, dict[int, list[str]]] = defaultdict(lambda: defaultdict(list))
        self._edges: dict[str, dict[int, set[int]]] = defaultdict(lambda: defaultdict(set))

    def _node(self, name: str) -> int:
        v = self._ids.get(name)
        if v is None:
            v = len(self._names)
            self._ids[name] = v
            self._names.append(name)
            self._types.append(None)
        return v

    def add_type(self, name: str, type_name: str) -> None:
        type_name = sys.intern(type_name)
        if not type_name:
            raise ValueError("empty type name")
        v = self._node(name)
        current = self._types[v]
        if current is not None and current != type_name:
            raise ValueError(f"entity {name!r} typed both {current!r} and {type_name!r}")
        self._types[v] = type_name

    def add_attribute(self, name: str, attr: str, value: str) -> None:
        v = self._node(name)
        values = self._attrs[sys.intern(attr)][v]
        value = normalize_literal(value)
        if value not in values:
            values.append(value)

    def add_edge(self, src: str, label: str, dst: str) -> None:
        s = self._node(src)
        d = self._node(dst)
        self._edges[sys.intern(label)][s].add(d)

    def build(self) -> DataGraph:
        warnings = [f"entity {self._names[v]!r} has no type"
                    for v, t in enumerate(self._types) if t is None]
        for w in warnings:
            log.warning(w)
        attrs = {a: {v: tuple(vals) for v, vals in m.items()} for a, m in self._attrs.items()}
        edges = {l: {v: tuple(sorted(ts)) for v, ts in m.items()} for l, m in self._edges.items()}
        return DataGraph(list(self._names), list(self._types), attrs, edges, warnings)


def parse_ntriples(lines: Iterable[str], builder: GraphBuilder | None = None) -> DataGraph:
    builder = builder or GraphBuilder()
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _NT_LINE.match(line)
        if m is None:
            raise GraphLoadError(f"line {lineno}: cannot parse triple: {line[:80]!r}", lineno)
        subj, pred, obj_iri, obj_lit = m.groups()
        pred = local_name(pred)
        try:
            if obj_iri is not None:
                if pred == TYPE_PREDICATE:
                    builder.add_type(subj, local_name(obj_iri))
                else:
                    builder.add_edge(subj, pred, obj_iri)
            else:
                builder.add_attribute(subj, pred, _unescape(obj_lit))
        except ValueError as exc:
            raise GraphLoadError(f"line {lineno}: {exc}", lineno) from exc
    return builder.build()


def parse_tsv(lines: Iterable[str], builder: GraphBuilder | None = None) -> DataGraph:
    builder = builder or GraphBuilder()
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise GraphLoadError(f"line {lineno}: expected 4 tab-separated columns, got {len(cols)}", lineno)
        src, label, dst, kind = cols
        try:
            if kind == "type":
                builder.add_type(src, dst)
            elif kind == "entity":
                builder.add_edge(src, label, dst)
            elif kind == "literal":
                builder.add_attribute(src, label, dst)
            else:
                raise ValueError(f"unknown kind {kind!r}")
        except ValueError as exc:
            raise GraphLoadError(f"line {lineno}: {exc}", lineno) from exc
    return builder.build()


FORMATS = ("ntriples-subset", "tsv")


def guess_format(path: str | Path) -> str:
    return "tsv" if str(path).endswith(".tsv") else "ntriples-subset"


def load_graph(path: str | Path, format: str | None = None) -> DataGraph:
    fmt = format or guess_format(path)
    if fmt not in FORMATS:
        raise ValueError(f"unknown graph format {fmt!r}")
    with open(path, encoding="utf-8") as fh:
        if fmt == "tsv":
            return parse_tsv(fh)
        return parse_ntriples(fh)


def graph_from_text(text: str, format: str = "ntriples-subset") -> DataGraph:
    lines = text.splitlines()
    return parse_tsv(lines) if format == "tsv" else parse_ntriples(lines)
