"""Oblivious linear evaluation: the ideal functionality and the OLE+ wrapper.

OLE+ lets a receiver holding c learn a*c + b from a sender holding (a, b)
through two calls to the ideal functionality, with fresh masks r and u so
that neither inner call exposes the other party's input.
"""
from __future__ import annotations

from dataclasses import dataclass

from .faults import FaultPlan
from .fieldpoly import FieldContext
from .primitives import default_rng


class OleMisbehaviour(Exception):
    """A party deviated from the protocol and the session noticed."""


class OleInputError(ValueError):
    pass


@dataclass(frozen=True)
class OleSenderInput:
    a: int
    b: int


@dataclass(frozen=True)
class OleReceiverInput:
    c: int


@dataclass(frozen=True)
class OleCall:
    """One inner call: who played which role and what flowed."""
    fid: int
    sender_role: str
    sender_inputs: tuple
    receiver_role: str
    receiver_input: int
    output: int


@dataclass
class OleTranscript:
    calls: list

    def append(self, call: OleCall) -> None:
        self.calls.append(call)

    def __len__(self) -> int:
        return len(self.calls)


def ideal_ole(sender: OleSenderInput, receiver: OleReceiverInput, ctx: FieldContext) -> int:
    return (sender.a * receiver.c + sender.b) % ctx.p


def _slot(faults: FaultPlan | None, name: str, value: int, p: int) -> int:
    if faults is not None and faults.target == name:
        return faults.apply(value, p)
    return value


def ole_plus(sender: OleSenderInput, receiver: OleReceiverInput, ctx: FieldContext,
             faults: FaultPlan | None = None, rng=None, verifying: bool = False):
    """Run OLE+ and return ``(s, transcript)`` with s = a*c + b for the receiver.

    With ``verifying=True`` an active fault plan is reported as
    ``OleMisbehaviour`` instead of silently corrupting the output.
    """
    p = ctx.p
    a, b, c = sender.a % p, sender.b % p, receiver.c % p
    if c == 0:
        raise OleInputError("OLE+ receiver input must be nonzero")
    rng = rng or default_rng()
    tr = OleTranscript([])

    # receiver masks its inverted input; sender picks u and learns t
    r = rng.randrange(p)
    u = rng.randrange(p)
    c_inv = pow(c, -1, p)
    s1 = OleSenderInput(_slot(faults, "ole1.a", c_inv, p), _slot(faults, "ole1.b", r, p))
    r1 = OleReceiverInput(_slot(faults, "ole1.c", u, p))
    t = ideal_ole(s1, r1, ctx)
    tr.append(OleCall(1, "receiver", (s1.a, s1.b), "sender", r1.c, t))

    # sender feeds (t + a, b - u); receiver's own input c recovers k
    s2 = OleSenderInput(_slot(faults, "ole2.a", (t + a) % p, p), _slot(faults, "ole2.b", (b - u) % p, p))
    r2 = OleReceiverInput(_slot(faults, "ole2.c", c, p))
    k = ideal_ole(s2, r2, ctx)
    tr.append(OleCall(2, "sender", (s2.a, s2.b), "receiver", r2.c, k))

    if faults is not None and verifying:
        raise OleMisbehaviour(f"deviation detected in slot {faults.target}")
    return (k - r * c) % p, tr
