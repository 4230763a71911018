"""Localized star-pattern matching, signature classes and support.

Two evaluation routes share the same semantics:

* :func:`match_candidate` + :func:`compute_classes` expand every match
  binding explicitly.  Used for validation, where violating pairs must be
  reported.
* :class:`MatchContext.evaluate` works on per-entity value sets and never
  materializes bindings.  Used by the miner; optionally skips signature work
  for entities flagged by the uniqueness index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping

from .errors import UnknownTypeError
from .graph import WILDCARD, DataGraph
from .lattice import CandidateKey, Variable
from .partition import IdentityPartition
from .summary import UniquenessIndex

Partitions = Mapping[str, IdentityPartition]


@dataclass(frozen=True)
class MatchBinding:
    center: int
    constant_bindings: tuple[tuple[str, str], ...]
    variable_bindings: tuple[tuple[Variable, int], ...]


@dataclass
class SignatureGroups:
    groups: dict[tuple, frozenset[int]]
    covered: frozenset[int]
    identified: frozenset[int]

    @property
    def classes(self) -> list[tuple[int, ...]]:
        """Distinct groups of center entities sharing a signature."""
        return sorted({tuple(sorted(m)) for m in self.groups.values()})


@dataclass
class SupportResult:
    covered_entities: int
    uniquely_identified: int
    support: Fraction
    identified: frozenset[int] = field(default_factory=frozenset, repr=False)
    classes: list[tuple[int, ...]] | None = field(default=None, repr=False)
    shortcut_hits: int = 0


def _block(parts: Partitions | None, t: str, v: int) -> int:
    part = parts.get(t) if parts else None
    return part.block(v) if part is not None else v


def match_candidate(g: DataGraph, p: CandidateKey, parts: Partitions | None = None) -> list[MatchBinding]:
    """Every binding of ``p``: one per combination of attribute values and neighbours."""
    matches = []
    for e in g.entities_of_type(p.center):
        options = []
        for a in p.constants:
            values = g.attribute_values(e, a)
            if not values:
                break
            options.append([(a, x) for x in values])
        else:
            for var in p.variables:
                ws = g.neighbors(e, var[0], var[1])
                if not ws:
                    break
                options.append([(var, w) for w in ws])
            else:
                nc = len(p.constants)
                for combo in product(*options):
                    matches.append(MatchBinding(e, tuple(combo[:nc]), tuple(combo[nc:])))
    return matches


def signature(m: MatchBinding, parts: Partitions | None = None) -> tuple:
    consts = tuple(value for _, value in m.constant_bindings)
    blocks = tuple(_block(parts, g_type, w) for (_, g_type), w in m.variable_bindings)
    return consts + blocks


def compute_classes(matches: Iterable[MatchBinding], p: CandidateKey | None = None,
                    parts: Partitions | None = None) -> SignatureGroups:
    groups: dict[tuple, set[int]] = {}
    covered = set()
    for m in matches:
        covered.add(m.center)
        groups.setdefault(signature(m, parts), set()).add(m.center)
    shared = set()
    for members in groups.values():
        if len(members) > 1:
            shared.update(members)
    return SignatureGroups({s: frozenset(c) for s, c in groups.items()},
                           frozenset(covered), frozenset(covered - shared))


def support_of(groups: SignatureGroups, n: int) -> Fraction:
    if n <= 0:
        raise UnknownTypeError("support is undefined for a type with no entities")
    return Fraction(len(groups.identified), n)


def unique_shortcut(u: UniquenessIndex, p: CandidateKey, e: int) -> bool:
    return any(u.unique(e, p.center, a) for a in p.constants)


def violating_pairs(groups: SignatureGroups, limit: int | None = None) -> list[tuple[int, int]]:
    """Pairs of distinct centers sharing a signature, sorted."""
    pairs = set()
    for members in groups.groups.values():
        ms = sorted(members)
        for i, a in enumerate(ms):
            for b in ms[i + 1:]:
                pairs.add((a, b))
    out = sorted(pairs)
    return out if limit is None else out[:limit]


class MatchContext:
    """Per-run evaluation state: the graph, fixed partitions and value caches.

    Partitions handed in must not change afterwards for the types already
    looked up; the miner registers a type's partition once its keys are final.
    """

    def __init__(self, g: DataGraph, parts: Partitions | None = None,
                 uniqueness: UniquenessIndex | None = None):
        self.g = g
        self.parts = parts if parts is not None else {}
        self.uniqueness = uniqueness
        self._var_cache: dict[tuple[str, Variable], dict[int, tuple[int, ...]]] = {}

    def variable_map(self, center: str, var: Variable) -> dict[int, tuple[int, ...]]:
        """Center entity -> sorted block ids of its ``var`` neighbours."""
        key = (center, var)
        cached = self._var_cache.get(key)
        if cached is not None:
            return cached
        g = self.g
        label, t = var
        part = self.parts.get(t)
        labels = g.edge_labels() if label == WILDCARD else [label]
        found: dict[int, set[int]] = {}
        for lab in labels:
            for src, dsts in g.edge_map(lab).items():
                if g.type_of(src) != center:
                    continue
                for w in dsts:
                    wt = g.type_of(w)
                    if wt is None or (t != WILDCARD and wt != t):
                        continue
                    found.setdefault(src, set()).add(part.block(w) if part is not None else w)
        result = {v: tuple(sorted(bs)) for v, bs in found.items()}
        self._var_cache[key] = result
        return result

    def constant_map(self, a: str) -> Mapping[int, tuple[str, ...]]:
        return self.g.attribute_map(a)

    def signature_groups(self, p: CandidateKey) -> dict[tuple, set[int]]:
        """Signature -> center entities, without the uniqueness shortcut."""
        comps = [self.constant_map(a) for a in p.constants]
        comps += [self.variable_map(p.center, v) for v in p.variables]
        groups: dict[tuple, set[int]] = {}
        for e in self.g.entities_of_type(p.center):
            vals = [m.get(e) for m in comps]
            if all(vals):
                for sig in product(*vals):
                    groups.setdefault(sig, set()).add(e)
        return groups

    def evaluate(self, p: CandidateKey, use_shortcut: bool = True,
                 entities: Iterable[int] | None = None) -> SupportResult:
        g = self.g
        all_entities = g.entities_of_type(p.center)
        n = len(all_entities)
        if n == 0:
            raise UnknownTypeError(f"unknown type {p.center!r}")
        comps = [g.attribute_map(a) for a in p.constants]
        comps += [self.variable_map(p.center, v) for v in p.variables]
        pool = all_entities if entities is None else list(entities)

        # Entities holding a globally unique value of one of the constants are
        # identified as soon as they are covered: no other entity can share any
        # of their signatures, so they are settled by set operations and never
        # enter the signature loop.
        direct: frozenset[int] | set[int] = frozenset()
        skip: frozenset[int] | set[int] = frozenset()
        if use_shortcut and self.uniqueness is not None:
            sets = [s for s in (self.uniqueness.unique_set(p.center, a) for a in p.constants) if s]
            if sets:
                skip = sets[0] if len(sets) == 1 else frozenset().union(*sets)
                if entities is not None:
                    skip = skip.intersection(pool)
                direct = set(skip)
                for m in sorted(comps, key=len):
                    direct.intersection_update(m.keys())
                pool = [e for e in pool if e not in skip]

        owner: dict[tuple, int] = {}
        shared: set[int] = set()
        covered: list[int] = []
        for e in pool:
            vals = []
            for m in comps:
                x = m.get(e)
                if not x:
                    break
                vals.append(x)
            else:
                covered.append(e)
                if all(len(x) == 1 for x in vals):
                    sigs = (tuple(x[0] for x in vals),)
                else:
                    sigs = product(*vals)
                for sig in sigs:
                    prev = owner.setdefault(sig, e)
                    if prev != e:
                        shared.add(prev)
                        shared.add(e)
        identified = frozenset(direct).union(e for e in covered if e not in shared)
        n_covered = len(covered) + len(direct)
        return SupportResult(n_covered, len(identified), Fraction(len(identified), n), identified,
                             shortcut_hits=len(direct))
