"""Three-valued verdicts shared by every checker."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

HOLDS = "holds"
FAILS = "fails"
UNRESOLVED = "unresolved"


class BudgetExhausted(RuntimeError):
    """An extendable instance could not grow further within its budget."""


@dataclass
class Verdict:
    status: str
    witness: dict[str, Any] | None = None
    checked: int = 0
    bounded: bool = False
    note: str = ""
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in (HOLDS, FAILS, UNRESOLVED):
            raise ValueError(f"bad verdict status {self.status!r}")

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    @property
    def fails(self) -> bool:
        return self.status == FAILS

    @property
    def unresolved(self) -> bool:
        return self.status == UNRESOLVED

    @property
    def label(self) -> str:
        if self.status == HOLDS and self.bounded:
            return "holds-up-to-bounds"
        return self.status

    def to_json(self) -> dict:
        doc = {"status": self.label, "checked": self.checked}
        if self.witness is not None:
            doc["witness"] = _jsonable(self.witness)
        if self.note:
            doc["note"] = self.note
        if self.extra:
            doc.update(_jsonable(self.extra))
        return doc


def holds(checked: int = 0, bounded: bool = False, **extra) -> Verdict:
    return Verdict(HOLDS, None, checked, bounded, extra=extra)


def fails(witness: dict, checked: int = 0, note: str = "", bounded: bool = False) -> Verdict:
    return Verdict(FAILS, witness, checked, bounded, note)


def unresolved(witness: dict | None = None, checked: int = 0, note: str = "") -> Verdict:
    return Verdict(UNRESOLVED, witness, checked, True, note)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (set, frozenset)):
        return sorted(_jsonable(v) for v in x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "to_json"):
        return x.to_json()
    return x
