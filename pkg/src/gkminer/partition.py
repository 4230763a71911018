from __future__ import annotations

from typing import Iterable

from networkx.utils import UnionFind


class IdentityPartition:
    """Equivalence classes over the entities of one type.

    Every entity maps to a block id, the smallest node id in its block.
    Entities that were never merged are their own block.
    """

    def __init__(self, type_name: str, blocks: dict[int, int] | None = None):
        self.type = type_name
        self._blocks = blocks or {}

    @classmethod
    def singleton(cls, type_name: str) -> "IdentityPartition":
        return cls(type_name)

    @classmethod
    def from_groups(cls, type_name: str, groups: Iterable[Iterable[int]]) -> "IdentityPartition":
        uf = UnionFind()
        for group in groups:
            members = list(group)
            if len(members) > 1:
                uf.union(*members)
        blocks = {}
        for members in uf.to_sets():
            if len(members) > 1:
                root = min(members)
                for v in members:
                    blocks[v] = root
        return cls(type_name, blocks)

    def block(self, v: int) -> int:
        return self._blocks.get(v, v)

    def merged_blocks(self) -> list[list[int]]:
        """Non-singleton blocks, each sorted, ordered by block id."""
        out: dict[int, list[int]] = {}
        for v, b in self._blocks.items():
            out.setdefault(b, []).append(v)
        return [sorted(out[b]) for b in sorted(out)]

    def num_blocks(self, entities: Iterable[int]) -> int:
        return len({self.block(v) for v in entities})

    def __eq__(self, other):
        if not isinstance(other, IdentityPartition):
            return NotImplemented
        return self.type == other.type and self._blocks == other._blocks

    def __repr__(self):
        return f"IdentityPartition({self.type!r}, merged={self.merged_blocks()})"
