"""Candidate lattice of star-shaped key patterns for one center type.

Items are attribute names (constants) and ``(edge label, type)`` pairs
(variables).  Items are ordered constants first, then variables, each
lexicographically; candidates within a level follow the lexicographic order
of their item index tuples.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterator, Protocol

DEFAULT_CAP = 2 ** 20

Variable = tuple[str, str]


@dataclass(eq=False)
class CandidateKey:
    center: str
    constants: tuple[str, ...] = ()
    variables: tuple[Variable, ...] = ()
    prune: bool = False

    def __post_init__(self):
        self.constants = tuple(sorted(set(self.constants)))
        self.variables = tuple(sorted(set(tuple(v) for v in self.variables)))

    @property
    def level(self) -> int:
        return len(self.constants) + len(self.variables)

    @property
    def items(self) -> tuple:
        return self.constants + self.variables

    @property
    def variable_types(self) -> list[str]:
        return sorted({t for _, t in self.variables})

    def signature_key(self) -> tuple:
        return self.center, self.constants, self.variables

    def __eq__(self, other):
        if not isinstance(other, CandidateKey):
            return NotImplemented
        return self.signature_key() == other.signature_key()

    def __hash__(self):
        return hash(self.signature_key())

    def __repr__(self):
        parts = list(self.constants) + [f"{l}->{t}" for l, t in self.variables]
        flag = ", pruned" if self.prune else ""
        return f"CandidateKey({self.center}: {{{', '.join(parts)}}}{flag})"


def is_embedded(p: CandidateKey, q: CandidateKey) -> bool:
    """Whether pattern ``p`` embeds into ``q``; for stars this is item inclusion."""
    if p.center != q.center:
        return False
    return set(p.constants) <= set(q.constants) and set(p.variables) <= set(q.variables)


class SizeSource(Protocol):
    def min_size(self, t: str) -> int | None: ...


def pattern_size(p: CandidateKey, keys: SizeSource) -> int:
    """Edge count of ``p`` plus the smallest mined key size of each variable type."""
    size = p.level
    for _, t in p.variables:
        sub = keys.min_size(t)
        if sub is None:
            raise ValueError(f"no mined key for variable type {t!r}")
        size += sub
    return size


class Lattice:
    def __init__(self, center: str, attrs, variables, max_level: int | None = None,
                 cap: int = DEFAULT_CAP):
        self.center = center
        self.items: list = [*sorted(attrs), *sorted(tuple(v) for v in variables)]
        self.max_level = len(self.items) if max_level is None else min(max_level, len(self.items))
        self.cap = cap
        self._removed = 0            # bitmask of removed items
        self._pruned: list[int] = []  # masks whose strict supersets are pruned
        self._pruned_exact: set[int] = set()
        self._levels: dict[int, list[tuple[int, CandidateKey]]] = {}

    # -- construction helpers --------------------------------------------

    def _candidate(self, idx: tuple[int, ...]) -> CandidateKey:
        items = [self.items[i] for i in idx]
        return CandidateKey(self.center,
                            tuple(i for i in items if isinstance(i, str)),
                            tuple(i for i in items if not isinstance(i, str)))

    def mask_of(self, p: CandidateKey) -> int:
        index = {item: i for i, item in enumerate(self.items)}
        mask = 0
        for item in p.items:
            if item not in index:
                raise KeyError(f"{item!r} is not an item of this lattice")
            mask |= 1 << index[item]
        return mask

    def _is_pruned(self, mask: int) -> bool:
        if mask in self._pruned_exact:
            return True
        return any(m & mask == m and m != mask for m in self._pruned)

    def _level(self, level: int) -> Iterator[tuple[int, CandidateKey]]:
        cached = self._levels.get(level)
        if cached is not None:
            yield from cached
            return
        n = len(self.items)
        materialize = comb(n, level) <= self.cap
        built = []
        for idx in combinations(range(n), level):
            mask = 0
            for i in idx:
                mask |= 1 << i
            entry = (mask, self._candidate(idx))
            if materialize:
                built.append(entry)
            yield entry
        if materialize:
            self._levels[level] = built

    # -- queries ---------------------------------------------------------

    def level(self, level: int, include_pruned: bool = False) -> list[CandidateKey]:
        out = []
        for mask, cand in self._level(level):
            if mask & self._removed:
                continue
            cand.prune = self._is_pruned(mask)
            if include_pruned or not cand.prune:
                out.append(cand)
        return out

    @property
    def levels(self) -> list[list[CandidateKey]]:
        return [self.level(l, include_pruned=True) for l in range(1, self.max_level + 1)]

    def __len__(self) -> int:
        live = len(self.items) - bin(self._removed).count("1")
        return sum(comb(live, l) for l in range(1, self.max_level + 1))

    def __iter__(self) -> Iterator[CandidateKey]:
        return self.next_candidate()

    def next_candidate(self) -> Iterator[CandidateKey]:
        """Unpruned candidates level by level; reflects pruning done mid-iteration."""
        for level in range(1, self.max_level + 1):
            for mask, cand in self._level(level):
                if mask & self._removed:
                    continue
                if self._is_pruned(mask):
                    cand.prune = True
                    continue
                yield cand

    def parents(self, q: CandidateKey) -> list[CandidateKey]:
        if q.level <= 1:
            return []
        items = q.items
        return [self._candidate(tuple(sorted(self.items.index(x) for x in items if x != drop)))
                for drop in items]

    # -- mutation --------------------------------------------------------

    def prune_descendants(self, p: CandidateKey) -> None:
        mask = self.mask_of(p)
        if mask not in self._pruned:
            self._pruned.append(mask)
        for lvl in self._levels.values():
            for m, cand in lvl:
                if m & mask == mask and m != mask:
                    cand.prune = True

    def prune(self, p: CandidateKey, descendants: bool = True) -> None:
        mask = self.mask_of(p)
        p.prune = True
        self._pruned_exact.add(mask)
        if descendants:
            self.prune_descendants(p)

    def remove_type(self, t: str) -> list[Variable]:
        """Drop every variable item of type ``t``; returns the removed items."""
        removed = []
        for i, item in enumerate(self.items):
            if not isinstance(item, str) and item[1] == t and not self._removed >> i & 1:
                self._removed |= 1 << i
                removed.append(item)
        return removed

    def truncate(self, max_level: int) -> None:
        self.max_level = min(self.max_level, max(max_level, 0))


def create_lattice(attrs, variables, center: str, max_level: int | None = None,
                   cap: int = DEFAULT_CAP) -> Lattice:
    return Lattice(center, attrs, variables, max_level=max_level, cap=cap)
