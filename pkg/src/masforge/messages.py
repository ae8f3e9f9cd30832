"""Message envelope exchanged over the in-process bus."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .metamodel import Fact, Performative


class _NotKnown:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NOT_KNOWN"

    def as_json(self) -> str:
        return "<not-known>"


NOT_KNOWN = _NotKnown()


@dataclass(frozen=True)
class Message:
    sender: str
    receiver: str
    performative: Performative
    payload: Any = None
    conversation_id: int | None = None
    sent_tick: int = 0

    def as_dict(self) -> dict[str, Any]:
        payload = self.payload
        if isinstance(payload, Fact):
            payload = {"key": payload.key, "value": payload.value}
        elif isinstance(payload, frozenset):
            payload = sorted(payload, key=repr)
        out = {
            "from": self.sender,
            "to": self.receiver,
            "performative": self.performative.value,
            "payload": payload,
            "tick": self.sent_tick,
        }
        if self.conversation_id is not None:
            out["conversation"] = self.conversation_id
        return out
