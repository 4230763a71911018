"""Deterministic synthetic graphs and the three-college sample fixture."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .graph import DataGraph, GraphBuilder, graph_from_text

FIG1_NT = """\
# Three colleges, five cities, three countries.
<college_1> <type> <College> .
<college_1> <name> "Trinity College" .
<college_1> <motto> "Lux in tenebris" .
<college_1> <endowment> "210000000" .
<college_1> <city> <city_1> .
<college_1> <country> <country_1> .
<college_2> <type> <College> .
<college_2> <name> "Trinity College" .
<college_2> <motto> "Pro Ecclesia et Patria" .
<college_2> <city> <city_3> .
<college_2> <country> <country_2> .
<college_3> <type> <College> .
<college_3> <name> "Trinity College" .
<college_3> <mascot> "Harp" .
<college_3> <city> <city_4> .
<college_3> <country> <country_3> .
<city_1> <type> <City> .
<city_1> <name> "Toronto" .
<city_1> <city_of> <country_1> .
<city_2> <type> <City> .
<city_2> <city_of> <country_1> .
<city_3> <type> <City> .
<city_3> <name> "Dublin" .
<city_3> <city_of> <country_2> .
<city_4> <type> <City> .
<city_4> <name> "Dublin" .
<city_4> <city_of> <country_3> .
<city_5> <type> <City> .
<city_5> <name> "Cork" .
<country_1> <type> <Country> .
<country_1> <name> "Canada" .
<country_2> <type> <Country> .
<country_2> <name> "USA" .
<country_3> <type> <Country> .
<country_3> <name> "Ireland" .
"""

# Same graph plus country -> city edges, so mining College walks
# College -> City -> Country and then meets Country -> City.
FIG3_NT = FIG1_NT + """\
<country_1> <capital> <city_1> .
<country_2> <capital> <city_3> .
<country_3> <capital> <city_4> .
"""

FIXTURES = {"fig1": FIG1_NT, "fig3": FIG3_NT}


def emit_figure1_fixture() -> DataGraph:
    return graph_from_text(FIG1_NT)


def fixture_text(name: str) -> str:
    try:
        return FIXTURES[name]
    except KeyError:
        raise ValueError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None


@dataclass
class AttributeSpec:
    name: str
    presence: float
    domain: int


@dataclass
class EdgeSpec:
    label: str
    target: str
    presence: float


@dataclass
class SynthSpec:
    seed: int = 0
    types: list[tuple[str, int]] = field(default_factory=list)
    attributes: dict[str, list[AttributeSpec]] = field(default_factory=dict)
    edges: dict[str, list[EdgeSpec]] = field(default_factory=dict)
    duplicate_rate: float = 0.0
    cycle_types: list[str] = field(default_factory=list)

    def validate(self) -> None:
        names = {t for t, _ in self.types}
        for t, n in self.types:
            if n < 0:
                raise ValueError(f"negative entity count for {t!r}")
        if not 0.0 <= self.duplicate_rate <= 1.0:
            raise ValueError(f"duplicate_rate out of [0, 1]: {self.duplicate_rate}")
        for t, specs in self.attributes.items():
            for a in specs:
                if not 0.0 <= a.presence <= 1.0:
                    raise ValueError(f"presence of {t}.{a.name} out of [0, 1]: {a.presence}")
                if a.domain < 1:
                    raise ValueError(f"domain of {t}.{a.name} must be >= 1")
        for t, specs in self.edges.items():
            for e in specs:
                if not 0.0 <= e.presence <= 1.0:
                    raise ValueError(f"presence of {t}-{e.label} out of [0, 1]: {e.presence}")
                if e.target not in names:
                    raise ValueError(f"edge {t}-{e.label} targets unknown type {e.target!r}")
        for t in self.cycle_types:
            if t not in names:
                raise ValueError(f"cycle type {t!r} is not declared")

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        return cls(
            seed=int(d.get("seed", 0)),
            types=[(t["name"], int(t["count"])) for t in d.get("types", [])],
            attributes={t: [AttributeSpec(a["name"], float(a["presence"]), int(a["domain"])) for a in specs]
                        for t, specs in d.get("attributes", {}).items()},
            edges={t: [EdgeSpec(e["label"], e["target"], float(e["presence"])) for e in specs]
                   for t, specs in d.get("edges", {}).items()},
            duplicate_rate=float(d.get("duplicate_rate", 0.0)),
            cycle_types=list(d.get("cycle_types", [])),
        )

    @classmethod
    def load(cls, path: str | Path) -> "SynthSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def generate(spec: SynthSpec) -> DataGraph:
    spec.validate()
    rng = random.Random(spec.seed)
    b = GraphBuilder()
    members: dict[str, list[str]] = {}
    for t, n in spec.types:
        ids = [f"{t.lower()}_{i}" for i in range(n)]
        members[t] = ids
        for v in ids:
            b.add_type(v, t)

    for t, _ in spec.types:
        ids = members[t]
        n_dup = int(round(spec.duplicate_rate * len(ids))) if len(ids) > 1 else 0
        originals = ids[:len(ids) - n_dup]
        values: dict[str, list[tuple[str, str]]] = {}
        for v in originals:
            row = []
            for a in spec.attributes.get(t, []):
                if rng.random() < a.presence:
                    row.append((a.name, f"{a.name}_{rng.randrange(a.domain)}"))
            values[v] = row
        for v in ids[len(originals):]:
            values[v] = list(values[rng.choice(originals)])
        for v in ids:
            for a, x in values[v]:
                b.add_attribute(v, a, x)
        for e in spec.edges.get(t, []):
            targets = members[e.target]
            if not targets:
                continue
            for v in ids:
                if rng.random() < e.presence:
                    b.add_edge(v, e.label, rng.choice(targets))

    cyc = spec.cycle_types
    for i, t in enumerate(cyc):
        nxt = cyc[(i + 1) % len(cyc)]
        if not members[nxt]:
            continue
        for v in members[t]:
            b.add_edge(v, f"cyc_{t.lower()}_{nxt.lower()}", rng.choice(members[nxt]))
    return b.build()
