"""Type-level summary of a data graph, plus the per-attribute uniqueness index.

Both are built in a single linear pass over nodes, attribute records and
edges.  Supports are exact :class:`~fractions.Fraction` values.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import UnknownTypeError
from .graph import DataGraph


@dataclass
class SummaryNode:
    type: str
    count: int = 0
    attributes: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True, order=True)
class SummaryEdge:
    src: str
    label: str
    dst: str
    count: int = field(default=0, compare=False)


@dataclass
class SummaryGraph:
    nodes: dict[str, SummaryNode]
    edges: dict[tuple[str, str, str], SummaryEdge]

    def node(self, t: str) -> SummaryNode:
        node = self.nodes.get(t)
        if node is None or node.count == 0:
            raise UnknownTypeError(f"unknown type {t!r}")
        return node

    def out_edges(self, t: str) -> list[SummaryEdge]:
        return sorted(e for e in self.edges.values() if e.src == t)

    def to_json(self) -> dict:
        return {
            "types": [
                {"name": n.type, "count": n.count, "attributes": dict(sorted(n.attributes.items()))}
                for n in sorted(self.nodes.values(), key=lambda n: n.type)
            ],
            "edges": [
                {"src": e.src, "label": e.label, "dst": e.dst, "count": e.count}
                for e in sorted(self.edges.values())
            ],
        }


class UniquenessIndex:
    """``unique(v, A)`` flags keyed by (type, attribute).

    An entity is flagged for ``A`` when it carries exactly one value of ``A``
    and no other entity of its type carries that value.
    """

    def __init__(self, flags: dict[tuple[str, str], frozenset[int]]):
        self._flags = flags

    def unique(self, v: int, t: str, a: str) -> bool:
        return v in self._flags.get((t, a), ())

    def unique_set(self, t: str, a: str) -> frozenset[int]:
        return self._flags.get((t, a), frozenset())

    def keys(self):
        return self._flags.keys()


def build_summary(g: DataGraph, with_uniqueness: bool = True) -> tuple[SummaryGraph, UniquenessIndex | None]:
    nodes = {t: SummaryNode(t, len(g.entities_of_type(t))) for t in g.types}

    flags: dict[tuple[str, str], frozenset[int]] = {}
    for a in g.attribute_names():
        by_type: dict[str, list[tuple[int, tuple[str, ...]]]] = defaultdict(list)
        for v, values in g.attribute_map(a).items():
            t = g.type_of(v)
            if t is not None:
                by_type[t].append((v, values))
        for t, rows in by_type.items():
            nodes[t].attributes[a] = len(rows)
            if not with_uniqueness:
                continue
            # dict hashing compares full values, so collisions never merge
            seen = Counter(value for _, values in rows for value in values)
            flags[(t, a)] = frozenset(v for v, values in rows if len(values) == 1 and seen[values[0]] == 1)

    edges: dict[tuple[str, str, str], int] = Counter()
    for label in g.edge_labels():
        for src, dsts in g.edge_map(label).items():
            t1 = g.type_of(src)
            if t1 is None:
                continue
            for dst in dsts:
                t2 = g.type_of(dst)
                if t2 is not None:
                    edges[(t1, label, t2)] += 1
    summary = SummaryGraph(nodes, {k: SummaryEdge(*k, count=c) for k, c in edges.items()})

    return summary, (UniquenessIndex(flags) if with_uniqueness else None)


def attribute_support(s: SummaryGraph, t: str, a: str) -> Fraction:
    node = s.node(t)
    return Fraction(node.attributes.get(a, 0), node.count)


def variable_support(s: SummaryGraph, t: str, e: SummaryEdge | tuple[str, str]) -> Fraction:
    """``e`` may be a summary edge out of ``t`` or a ``(label, dst_type)`` pair."""
    node = s.node(t)
    if isinstance(e, SummaryEdge):
        if e.src != t:
            raise ValueError(f"edge {e} does not leave {t!r}")
        label, dst = e.label, e.dst
    else:
        label, dst = e
    edge = s.edges.get((t, label, dst))
    return Fraction(edge.count if edge else 0, node.count)


def check_threshold(delta: Fraction) -> Fraction:
    delta = Fraction(delta)
    if not 0 < delta <= 1:
        raise ValueError(f"support threshold must be in (0, 1], got {delta}")
    return delta


def candidate_sets(s: SummaryGraph, t: str, delta) -> tuple[list[str], list[tuple[str, str]]]:
    """Attributes and (label, type) neighbours of ``t`` whose support reaches ``delta``."""
    delta = check_threshold(delta)
    node = s.node(t)
    attrs = sorted(a for a, c in node.attributes.items() if Fraction(c, node.count) >= delta)
    variables = sorted((e.label, e.dst) for e in s.out_edges(t) if Fraction(e.count, node.count) >= delta)
    return attrs, variables
