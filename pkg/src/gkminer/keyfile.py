"""keys.json reading/writing and validation of externally supplied keys."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from graphlib import CycleError, TopologicalSorter
from pathlib import Path

from .errors import KeyFileError
from .graph import WILDCARD, DataGraph
from .lattice import CandidateKey
from .matcher import compute_classes, match_candidate, support_of, violating_pairs
from .miner import KeyStore
from .partition import IdentityPartition


def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text: str) -> Fraction:
    """Accepts ``p/q`` or a decimal literal; the result is exact."""
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a number or fraction: {text!r}") from exc


def store_to_json(store: KeyStore, root: str) -> dict:
    order = [root] + [t for t in store.mined_types() if t != root]
    keys = []
    for t in order:
        for key in store.keys_of(t):
            c = key.candidate
            keys.append({
                "id": key.id,
                "type": t,
                "constants": list(c.constants),
                "variables": [{"label": l, "type": vt, "keyRefs": list(key.recursive_refs.get(vt, ()))}
                              for l, vt in c.variables],
                "support": format_fraction(key.support),
                "size": key.size,
            })
    return {"type": root, "keys": keys, "dependencies": [list(e) for e in store.dependencies.edges]}


def dumps_keys(store: KeyStore, root: str) -> str:
    return json.dumps(store_to_json(store, root), indent=2, ensure_ascii=False) + "\n"


@dataclass
class KeySpec:
    id: str
    candidate: CandidateKey
    key_refs: dict[str, tuple[str, ...]] = field(default_factory=dict)
    support: Fraction | None = None
    size: int | None = None

    @property
    def type(self) -> str:
        return self.candidate.center


@dataclass
class KeyFile:
    type: str | None
    keys: list[KeySpec]
    dependencies: list[tuple[str, str]] = field(default_factory=list)

    def keys_of(self, t: str) -> list[KeySpec]:
        return [k for k in self.keys if k.type == t]


def parse_keys(data: dict) -> KeyFile:
    if not isinstance(data, dict):
        raise KeyFileError("key file must hold a JSON object")
    root = data.get("type")
    keys = []
    try:
        for i, raw in enumerate(data.get("keys", [])):
            t = raw.get("type", root)
            if not t:
                raise KeyFileError(f"key #{i} has no type")
            variables, refs = [], {}
            for v in raw.get("variables", []):
                variables.append((v["label"], v["type"]))
                if v.get("keyRefs"):
                    refs[v["type"]] = tuple(v["keyRefs"])
            cand = CandidateKey(t, tuple(raw.get("constants", [])), tuple(variables))
            support = parse_fraction(raw["support"]) if raw.get("support") is not None else None
            keys.append(KeySpec(str(raw.get("id", f"{t}#{i}")), cand, refs, support, raw.get("size")))
    except (KeyError, TypeError, AttributeError) as exc:
        raise KeyFileError(f"malformed key entry: {exc}") from exc
    deps = [tuple(d) for d in data.get("dependencies", [])]
    return KeyFile(root, keys, deps)


def load_keys(path: str | Path) -> KeyFile:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise KeyFileError(f"{path}: {exc}") from exc
    return parse_keys(data)


def key_problems(g: DataGraph, key: KeySpec) -> list[str]:
    c = key.candidate
    problems = []
    entities = g.entities_of_type(c.center)
    if not entities:
        return [f"unknown type {c.center!r}"]
    for a in c.constants:
        if not any(g.attribute_values(e, a) for e in entities):
            problems.append(f"unknown attribute {a!r} for type {c.center!r}")
    for _, vt in c.variables:
        if vt != WILDCARD and not g.entities_of_type(vt):
            problems.append(f"unknown variable type {vt!r}")
    return problems


def file_partitions(g: DataGraph, kf: KeyFile) -> dict[str, IdentityPartition]:
    """Identity partitions per type, built from the file's keys in dependency order."""
    usable = [k for k in kf.keys if not key_problems(g, k)]
    deps: dict[str, set[str]] = {}
    for k in usable:
        deps.setdefault(k.type, set()).update(vt for _, vt in k.candidate.variables
                                              if vt != WILDCARD and vt != k.type)
    try:
        order = list(TopologicalSorter(deps).static_order())
    except CycleError as exc:
        raise KeyFileError(f"key file has cyclic type dependencies: {exc.args[1]}") from exc
    parts: dict[str, IdentityPartition] = {}
    for t in order:
        own = [k for k in usable if k.type == t]
        parts[t] = IdentityPartition.singleton(t)
        while True:
            # a key may refer to its own type, so merge until nothing changes
            groups = []
            for k in own:
                classes = compute_classes(match_candidate(g, k.candidate, parts), k.candidate, parts)
                groups.extend(m for m in classes.groups.values() if len(m) > 1)
            nxt = IdentityPartition.from_groups(t, groups)
            if nxt == parts[t]:
                break
            parts[t] = nxt
    return parts


def validate_keys(g: DataGraph, kf: KeyFile, max_violations: int = 100) -> dict:
    parts = file_partitions(g, kf)
    report = []
    for key in kf.keys:
        problems = key_problems(g, key)
        if problems:
            report.append({"id": key.id, "type": key.type, "error": "; ".join(problems)})
            continue
        p = key.candidate
        classes = compute_classes(match_candidate(g, p, parts), p, parts)
        pairs = violating_pairs(classes)
        report.append({
            "id": key.id,
            "type": key.type,
            "support": format_fraction(support_of(classes, len(g.entities_of_type(p.center)))),
            "covered": len(classes.covered),
            "identified": len(classes.identified),
            "violationCount": len(pairs),
            "violations": [[g.name(a), g.name(b)] for a, b in pairs[:max_violations]],
        })
    return {"keys": report}
