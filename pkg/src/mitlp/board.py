"""Append-only bulletin board with addressed envelopes.

Every "publish" lands as a record visible to all parties; every private
"send" lands as an envelope only its recipient reads. Payloads should be
JSON-ready (hex strings for integers) so a board doubles as a transcript.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any

# Phase numbers follow the protocol's phases (shared by both schemes). Step
# labels in use:
#   setup b (field published), keygen b (modulus published),
#   puzzle-gen g (chain published),
#   eval-sc a6 (grant), ole (OLE+ session log), b (server's g),
#   eval-mc a (leader set), b4 (leader -> client envelope), ole, b7 (grant), c (server's g),
#   solve d (chain bundle), f (evaluation bundle),
#   verify verdict
PHASES = {
    "setup": 1,
    "keygen": 2,
    "puzzle-gen": 3,
    "eval-sc": 4,
    "eval-mc": 5,
    "solve": 6,
    "verify": 7,
}


def topic(phase: str, step: str, party) -> str:
    who = party if isinstance(party, str) else f"client{party}"
    return f"phase{PHASES[phase]}.step{step}.{who}"


@dataclass(frozen=True)
class Record:
    seq: int
    author: str
    topic: str
    payload: Any


@dataclass(frozen=True)
class Envelope:
    seq: int
    sender: str
    recipient: str
    topic: str
    payload: Any


class BulletinBoard:
    def __init__(self):
        self._lock = threading.Lock()
        self._entries: list = []

    def _next(self, make):
        with self._lock:
            entry = make(len(self._entries))
            self._entries.append(entry)
            return entry

    def publish(self, author: str, topic_: str, payload) -> Record:
        return self._next(lambda s: Record(s, author, topic_, payload))

    def send(self, sender: str, recipient: str, topic_: str, payload) -> Envelope:
        return self._next(lambda s: Envelope(s, sender, recipient, topic_, payload))

    def entries(self) -> list:
        with self._lock:
            return list(self._entries)

    def records(self, prefix: str = "") -> list:
        return [e for e in self.entries() if isinstance(e, Record) and e.topic.startswith(prefix)]

    def inbox(self, recipient: str, prefix: str = "") -> list:
        return [e for e in self.entries()
                if isinstance(e, Envelope) and e.recipient == recipient and e.topic.startswith(prefix)]

    def latest(self, topic_: str):
        for e in reversed(self.entries()):
            if isinstance(e, Record) and e.topic == topic_:
                return e.payload
        raise KeyError(topic_)

    def to_json_obj(self) -> list:
        out = []
        for e in self.entries():
            if isinstance(e, Record):
                out.append({"seq": e.seq, "kind": "publish", "author": e.author,
                            "topic": e.topic, "payload": e.payload})
            else:
                out.append({"seq": e.seq, "kind": "send", "author": e.sender, "recipient": e.recipient,
                            "topic": e.topic, "payload": e.payload})
        return out
