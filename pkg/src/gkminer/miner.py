"""Recursive, level-wise key discovery over per-type candidate lattices."""
from __future__ import annotations

import logging
import threading
import time
from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import networkx as nx

from .errors import InvariantError, UnknownTypeError
from .graph import DataGraph
from .lattice import DEFAULT_CAP, CandidateKey, Lattice, is_embedded, pattern_size
from .matcher import MatchContext
from .partition import IdentityPartition
from .summary import SummaryGraph, UniquenessIndex, build_summary, candidate_sets, check_threshold

log = logging.getLogger(__name__)

OK = "ok"
WOULD_CYCLE = "would-cycle"


class DependencyGraph:
    """Directed "key of X needs key of Y" graph, kept acyclic."""

    def __init__(self):
        self._g = nx.DiGraph()

    def add_dependency(self, src: str, dst: str) -> str:
        if src == dst or (dst in self._g and src in self._g and nx.has_path(self._g, dst, src)):
            return WOULD_CYCLE
        self._g.add_edge(src, dst)
        return OK

    @property
    def nodes(self) -> set[str]:
        return set(self._g.nodes)

    @property
    def edges(self) -> list[tuple[str, str]]:
        return sorted(self._g.edges)

    def is_acyclic(self) -> bool:
        return nx.is_directed_acyclic_graph(self._g)

    def __contains__(self, edge) -> bool:
        return self._g.has_edge(*edge)


def add_dependency(d: DependencyGraph, src: str, dst: str) -> str:
    return d.add_dependency(src, dst)


class Status(Enum):
    UNMINED = "unmined"
    IN_PROGRESS = "in-progress"
    DONE = "done"


@dataclass
class MinedKey:
    id: str
    candidate: CandidateKey
    support: Fraction
    size: int
    recursive_refs: dict[str, tuple[str, ...]] = field(default_factory=dict)

    @property
    def type(self) -> str:
        return self.candidate.center


@dataclass
class MiningStats:
    candidates_evaluated: int = 0
    kbound_pruned: int = 0
    eq2_rejected: int = 0
    no_key_pruned: int = 0
    recursive_calls: int = 0
    shortcut_hits: int = 0


class KeyStore:
    def __init__(self):
        self.keys: dict[str, list[MinedKey]] = {}
        self.partitions: Mapping[str, IdentityPartition] = {}
        self.status: dict[str, Status] = {}
        self.dependencies = DependencyGraph()
        self.cycle_breaks: list[tuple[str, str]] = []
        self.lattices: dict[str, Lattice] = {}

    def status_of(self, t: str) -> Status:
        return self.status.get(t, Status.UNMINED)

    def keys_of(self, t: str) -> list[MinedKey]:
        return self.keys.get(t, [])

    def min_size(self, t: str) -> int | None:
        ks = self.keys.get(t)
        return min(k.size for k in ks) if ks else None

    def partition(self, t: str) -> IdentityPartition:
        return self.partitions.get(t) or IdentityPartition.singleton(t)

    def mined_types(self) -> list[str]:
        return sorted(t for t, s in self.status.items() if s is Status.DONE)

    def all_keys(self) -> list[MinedKey]:
        return [k for t in self.mined_types() for k in self.keys.get(t, [])]

    def check_invariants(self, k: int | None = None) -> None:
        if not self.dependencies.is_acyclic():
            raise InvariantError(f"dependency graph has a cycle: {self.dependencies.edges}")
        for t, ks in self.keys.items():
            for a in ks:
                if k is not None and a.size > k:
                    raise InvariantError(f"key {a.id} has size {a.size} > k={k}")
                for b in ks:
                    if a is not b and is_embedded(a.candidate, b.candidate):
                        raise InvariantError(f"key {a.id} is embedded in {b.id}")


def build_identity_partition(g: DataGraph, t: str, mined_keys: list[MinedKey],
                             ctx: MatchContext | None = None) -> IdentityPartition:
    """Merge entities of ``t`` that share a full signature under any mined key."""
    for key in mined_keys:
        if key.candidate.center != t:
            raise ValueError(f"key {key.id} is not a key of {t!r}")
    ctx = ctx or MatchContext(g)
    part = IdentityPartition.singleton(t)
    self_ref = any(t in key.candidate.variable_types for key in mined_keys)
    while True:
        groups = []
        for key in mined_keys:
            groups.extend(m for m in ctx.signature_groups(key.candidate).values() if len(m) > 1)
        nxt = IdentityPartition.from_groups(t, groups)
        if not self_ref or nxt == part:
            return nxt
        part = nxt


class PartitionTable(Mapping):
    """Identity partitions per type, built on first lookup.

    Only types that appear as a variable of another type's candidate are
    ever looked up during mining, so most partitions are never built.
    """

    def __init__(self, build):
        self._build = build
        self._pending: dict[str, list[MinedKey]] = {}
        self._built: dict[str, IdentityPartition] = {}
        self._lock = threading.Lock()

    def register(self, t: str, keys: list[MinedKey]) -> None:
        self._pending[t] = keys

    def __getitem__(self, t: str) -> IdentityPartition:
        part = self._built.get(t)
        if part is None:
            if t not in self._pending:
                raise KeyError(t)
            with self._lock:
                part = self._built.get(t)
                if part is None:
                    part = self._built[t] = self._build(t, self._pending[t])
        return part

    def __iter__(self):
        return iter(sorted(self._pending))

    def __len__(self) -> int:
        return len(self._pending)


class Miner:
    """One mining run: owns the summary, key store and dependency graph."""

    def __init__(self, g: DataGraph, k: int, delta, *, optimize: bool = True, threads: int = 1,
                 max_level: int | None = None, lattice_cap: int = DEFAULT_CAP,
                 overrides: dict[str, tuple[int | None, Fraction | None]] | None = None):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if threads < 1:
            raise ValueError(f"threads must be >= 1, got {threads}")
        self.g = g
        self.k = k
        self.delta = check_threshold(delta)
        self.optimize = optimize
        self.threads = threads
        self.max_level = max_level
        self.lattice_cap = lattice_cap
        self.overrides = {t: (ok, None if od is None else check_threshold(od))
                          for t, (ok, od) in (overrides or {}).items()}
        self.stats = MiningStats()
        self.timings: dict[str, float] = {}
        self.store = KeyStore()
        self.store.partitions = PartitionTable(lambda t, keys: build_identity_partition(g, t, keys, self.ctx))

        t0 = time.perf_counter()
        self.summary: SummaryGraph
        self.uniqueness: UniquenessIndex | None
        self.summary, self.uniqueness = build_summary(g, with_uniqueness=optimize)
        self.timings["summary"] = time.perf_counter() - t0
        self.ctx = MatchContext(g, self.store.partitions, self.uniqueness)

    def _params(self, t: str) -> tuple[int, Fraction]:
        k, delta = self.overrides.get(t, (None, None))
        return (k or self.k), (delta or self.delta)

    def mine(self, u_o: str) -> KeyStore:
        if u_o not in self.summary.nodes:
            if not self.summary.nodes:
                return self.store
            raise UnknownTypeError(f"unknown type {u_o!r}")
        if self.store.status_of(u_o) is Status.UNMINED:
            self.discover(u_o, 0)
        return self.store

    def discover(self, t: str, size: int) -> list[MinedKey]:
        """Mine keys of ``t``; ``size`` is the edge budget already used by the callers."""
        t0 = time.perf_counter()
        store = self.store
        store.status[t] = Status.IN_PROGRESS
        k, delta = self._params(t)
        attrs, variables = candidate_sets(self.summary, t, delta)
        lat = Lattice(t, attrs, variables, max_level=self.max_level, cap=self.lattice_cap)
        store.lattices[t] = lat
        accepted: list[MinedKey] = []
        store.keys[t] = accepted
        log.debug("discover %s (size=%d): %d attributes, %d variables", t, size, len(attrs), len(variables))

        for level in range(1, lat.max_level + 1):
            if level + size > k:
                # every candidate at this level and above exceeds the budget
                self.stats.kbound_pruned += len(lat.level(level))
                lat.truncate(level - 1)
                break
            todo = []
            for cand in lat.level(level):
                if lat.mask_of(cand) & lat._removed:
                    continue
                if self._resolve_variables(t, cand, lat, size):
                    todo.append(cand)
            for cand, res in zip(todo, self._evaluate(todo)):
                self.stats.candidates_evaluated += 1
                self.stats.shortcut_hits += res.shortcut_hits
                key_size = pattern_size(cand, store)
                if key_size > k:
                    self.stats.eq2_rejected += 1
                    lat.prune(cand)
                    continue
                if res.support >= delta:
                    refs = {vt: tuple(x.id for x in store.keys_of(vt)) for vt in cand.variable_types}
                    accepted.append(MinedKey(f"{t}#{len(accepted)}", cand, res.support, key_size, refs))
                    lat.prune_descendants(cand)

        store.partitions.register(t, accepted)
        store.status[t] = Status.DONE
        # inclusive of nested discoveries
        self.timings[f"mine:{t}"] = time.perf_counter() - t0
        log.info("mined %d key(s) for %s", len(accepted), t)
        return accepted

    def _resolve_variables(self, t: str, cand: CandidateKey, lat: Lattice, size: int) -> bool:
        store = self.store
        for vt in cand.variable_types:
            status = store.status_of(vt)
            if status is Status.UNMINED:
                if store.dependencies.add_dependency(t, vt) == OK:
                    self.stats.recursive_calls += 1
                    self.discover(vt, size + cand.level)
                    status = Status.DONE
            if status is not Status.DONE:
                # in progress further up the call chain, or the edge closes a cycle
                removed = lat.remove_type(vt)
                store.cycle_breaks.append((t, vt))
                log.info("cycle %s -> %s: removed %s from lattice of %s", t, vt, removed, t)
                return False
            if not store.keys_of(vt):
                self.stats.no_key_pruned += 1
                lat.prune(cand)
                return False
        return True

    def _evaluate(self, cands: list[CandidateKey]):
        if self.threads > 1 and len(cands) > 1:
            with ThreadPoolExecutor(self.threads) as pool:
                return list(pool.map(lambda c: self.ctx.evaluate(c, self.optimize), cands))
        return [self.ctx.evaluate(c, self.optimize) for c in cands]


def mine_keys(g: DataGraph, u_o: str, k: int, delta, **options) -> KeyStore:
    """Mine minimal k-bounded keys of ``u_o`` (and of every type it recursively needs)."""
    miner = Miner(g, k, delta, **options)
    return miner.mine(u_o)


def discover(miner: Miner, t: str, size: int = 0) -> KeyStore:
    miner.discover(t, size)
    return miner.store
