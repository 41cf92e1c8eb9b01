"""Fault plans: a single scripted perturbation injected into one protocol slot."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class FaultPlan:
    """Perturb ``target`` by adding ``delta`` or by replacing it with ``replace``.

    Targets used by the library:
      ``ole1.a`` ``ole1.b`` ``ole1.c`` ``ole2.a`` ``ole2.b`` ``ole2.c``
          a slot of one of the two inner OLE calls
      ``g``       a coordinate of the server's combined vector (``index``)
      ``result``  the claimed combination value
      ``proof.root`` / ``proof.tk``   a proof element (``index`` picks the leader)
      ``grant.h`` / ``grant.com``     a published grant field (``index`` picks the leader)

    ``session`` picks the OLE session an ``ole*`` fault lands in: (i, j) for a
    single-client evaluation, (i, client) for a multi-client one, with the
    coordinate i counted from 1. ``None`` means the first session.
    """
    target: str
    delta: int = 0
    replace: int | None = None
    index: int = 0
    session: tuple | None = None
    phase: str = ""

    def apply(self, value: int, modulus: int | None = None) -> int:
        v = self.replace if self.replace is not None else value + self.delta
        return v % modulus if modulus else v

    def hits(self, target: str, index: int | None = None) -> bool:
        if self.target != target:
            return False
        return index is None or index == self.index


OLE_TARGETS = ("ole1.a", "ole1.b", "ole1.c", "ole2.a", "ole2.b", "ole2.c")
