"""Cross-graph entity linking with mined keys, and link scoring.

Node ids are graph-local, so variables are compared through the value-level
signatures of the neighbour under its own type's keys, never through ids.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Iterable

from .errors import KeyFileError, ParseError
from .graph import DataGraph
from .keyfile import KeyFile, KeySpec

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class LinkPair:
    left: int
    right: int
    key_id: str


class _Signer:
    """Value-level signatures of entities under the keys of a key file."""

    def __init__(self, g: DataGraph, kf: KeyFile):
        self.g = g
        self.kf = kf
        self._by_type: dict[str, dict[int, frozenset]] = {}
        self._active: set[str] = set()

    def key_signatures(self, key: KeySpec) -> dict[int, set[tuple]]:
        g = self.g
        p = key.candidate
        child = [self.type_signatures(vt) for _, vt in p.variables]
        out: dict[int, set[tuple]] = {}
        for e in g.entities_of_type(p.center):
            comps = [g.attribute_values(e, a) for a in p.constants]
            for (label, vt), sigs in zip(p.variables, child):
                found = set()
                for w in g.neighbors(e, label, vt):
                    found.update(sigs.get(w, ()))
                comps.append(sorted(found))
            if all(comps):
                out[e] = set(product(*comps))
        return out

    def type_signatures(self, t: str) -> dict[int, frozenset]:
        """Entity -> signatures tagged with the producing key id, over all keys of ``t``."""
        cached = self._by_type.get(t)
        if cached is not None:
            return cached
        if t in self._active:
            raise KeyFileError(f"recursive keys of {t!r} depend on themselves")
        self._active.add(t)
        merged: dict[int, set] = {}
        for key in self.kf.keys_of(t):
            for e, sigs in self.key_signatures(key).items():
                merged.setdefault(e, set()).update((key.id, s) for s in sigs)
        self._active.discard(t)
        result = {e: frozenset(s) for e, s in merged.items()}
        self._by_type[t] = result
        return result


def _owners(sigs: dict[int, set[tuple]]) -> dict[tuple, list[int]]:
    owners: dict[tuple, list[int]] = {}
    for e in sorted(sigs):
        for s in sigs[e]:
            owners.setdefault(s, []).append(e)
    return owners


def link_entities(g_left: DataGraph, g_right: DataGraph, kf: KeyFile, t: str) -> list[LinkPair]:
    if not g_left.entities_of_type(t) or not g_right.entities_of_type(t):
        log.warning("type %r absent from one of the graphs; no links", t)
        return []
    left, right = _Signer(g_left, kf), _Signer(g_right, kf)
    found: dict[tuple[int, int], str] = {}
    for key in kf.keys_of(t):
        lo = _owners(left.key_signatures(key))
        ro = _owners(right.key_signatures(key))
        ambiguous = 0
        for sig, ls in lo.items():
            rs = ro.get(sig)
            if rs is None:
                continue
            if len(ls) != 1 or len(rs) != 1:
                ambiguous += 1
                continue
            found.setdefault((ls[0], rs[0]), key.id)
        if ambiguous:
            log.info("key %s: %d shared signature(s) not 1-to-1, skipped", key.id, ambiguous)
    return sorted(LinkPair(l, r, k) for (l, r), k in found.items())


def pair_names(pairs: Iterable[LinkPair], g_left: DataGraph, g_right: DataGraph) -> list[tuple[str, str]]:
    return [(g_left.name(p.left), g_right.name(p.right)) for p in pairs]


def links_tsv(pairs: Iterable[LinkPair], g_left: DataGraph, g_right: DataGraph) -> str:
    return "".join(f"{g_left.name(p.left)}\t{g_right.name(p.right)}\t{p.key_id}\n" for p in pairs)


@dataclass(frozen=True)
class LinkScore:
    precision: Fraction
    recall: Fraction
    f1: Fraction
    tp: int
    fp: int
    fn: int

    def to_json(self) -> dict:
        return {
            "precision": float(self.precision), "recall": float(self.recall), "f1": float(self.f1),
            "precisionExact": f"{self.precision.numerator}/{self.precision.denominator}",
            "recallExact": f"{self.recall.numerator}/{self.recall.denominator}",
            "f1Exact": f"{self.f1.numerator}/{self.f1.denominator}",
            "tp": self.tp, "fp": self.fp, "fn": self.fn,
        }


def evaluate_links(pairs: Iterable[tuple[str, str]], gold: Iterable[tuple[str, str]]) -> LinkScore:
    """Set-based P/R/F.  With no predicted pairs precision is reported as 1."""
    predicted = set(pairs)
    gold = set(gold)
    tp = len(predicted & gold)
    fp = len(predicted - gold)
    fn = len(gold - predicted)
    precision = Fraction(tp, tp + fp) if tp + fp else Fraction(1)
    recall = Fraction(tp, tp + fn) if tp + fn else Fraction(1)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else Fraction(0)
    return LinkScore(precision, recall, f1, tp, fp, fn)


def parse_gold(lines: Iterable[str]) -> set[tuple[str, str]]:
    gold = set()
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2 or not cols[0] or not cols[1]:
            raise ParseError(f"gold line {lineno}: expected 2 tab-separated identifiers")
        gold.add((cols[0], cols[1]))
    return gold


def load_gold(path: str | Path) -> set[tuple[str, str]]:
    with open(path, encoding="utf-8") as fh:
        return parse_gold(fh)
