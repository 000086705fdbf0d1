from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class PassReport:
    name: str
    nodes_removed: int = 0
    nodes_added: int = 0
    pre_inserted: int = 0
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "nodes_removed": self.nodes_removed,
            "nodes_added": self.nodes_added,
            "pre_inserted": self.pre_inserted,
            "warnings": list(self.warnings),
        }
