"""Canonical JSON for every public (and client-secret) protocol object.

Field and ring elements are lowercase hex without leading zeros; byte strings
(digests, keys) are plain hex of their bytes; small counts stay JSON numbers.
Objects carry a ``type`` tag so a file can be loaded without knowing what it
holds.
"""
from __future__ import annotations

import json
from typing import Any

from .faults import FaultPlan
from .fieldpoly import DensePoly, FieldContext, FieldError, from_hex, to_hex
from .mhtlp import EvalGrant, EvalPuzzle, MasterKeyChain, PuzzleChain, SolutionBundle, TimeSchedule
from .mmhtlp import LeaderConfig
from .primitives import Commitment, RsaKeypair


class DecodeError(ValueError):
    pass


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _hexes(vals) -> list:
    return [to_hex(v) for v in vals]


def _ints(vals) -> tuple:
    return tuple(from_hex(v) for v in vals)


def _bytes(s: str, length: int | None = None) -> bytes:
    try:
        b = bytes.fromhex(s)
    except (TypeError, ValueError) as exc:
        raise DecodeError(f"bad byte string {s!r}") from exc
    if length is not None and len(b) != length:
        raise DecodeError(f"expected {length} bytes")
    return b


def schedule_obj(s: TimeSchedule) -> dict:
    return {"deltas": list(s.deltas), "maxss": s.maxss}


def to_obj(x) -> dict:
    if isinstance(x, FieldContext):
        return {"type": "field", "p": to_hex(x.p), "xs": _hexes(x.xs), "u_bound": to_hex(x.u_bound)}
    if isinstance(x, RsaKeypair):
        return {"type": "rsa-keypair", "n": to_hex(x.n), "phi": to_hex(x.phi), "primes": _hexes(x.primes)}
    if isinstance(x, Commitment):
        return {"type": "commitment", "digest": x.digest.hex()}
    if isinstance(x, DensePoly):
        return {"type": "poly", "coeffs": _hexes(x.coeffs)}
    if isinstance(x, TimeSchedule):
        return {"type": "schedule", **schedule_obj(x)}
    if isinstance(x, PuzzleChain):
        return {"type": "puzzle-chain", "coords": [_hexes(c) for c in x.coords],
                "commitments": [c.digest.hex() for c in x.commitments], "r1": to_hex(x.r1),
                "n": to_hex(x.n), "schedule": schedule_obj(x.schedule)}
    if isinstance(x, MasterKeyChain):
        return {"type": "master-keys", "mks": _hexes(x.mks)}
    if isinstance(x, EvalGrant):
        return {"type": "eval-grant", "h": to_hex(x.h), "com": x.com.digest.hex(), "Y": x.Y}
    if isinstance(x, EvalPuzzle):
        return {"type": "eval-puzzle", "g": _hexes(x.g)}
    if isinstance(x, SolutionBundle):
        if x.kind == "chain":
            proofs = _hexes(x.proofs)
        else:
            proofs = [_hexes(pr) for pr in x.proofs]
        return {"type": "solution-bundle", "kind": x.kind,
                "solutions": [[to_hex(v), i] for v, i in x.solutions], "proofs": proofs}
    if isinstance(x, LeaderConfig):
        return {"type": "leader-config", "n": x.n, "tddot": x.tddot, "t": x.t, "rhat": x.rhat.hex(),
                "leaders": list(x.leaders)}
    if isinstance(x, FaultPlan):
        d = {"type": "fault-plan", "target": x.target, "delta": x.delta, "index": x.index, "phase": x.phase}
        if x.replace is not None:
            d["replace"] = x.replace
        if x.session is not None:
            d["session"] = list(x.session)
        return d
    raise TypeError(f"no canonical encoding for {type(x).__name__}")


def _schedule(d: dict) -> TimeSchedule:
    return TimeSchedule(tuple(int(v) for v in d["deltas"]), int(d["maxss"]))


def from_obj(d: dict):
    try:
        kind = d["type"]
        if kind == "field":
            return FieldContext(p=from_hex(d["p"]), xs=_ints(d["xs"]), u_bound=from_hex(d["u_bound"]))
        if kind == "rsa-keypair":
            return RsaKeypair(n=from_hex(d["n"]), phi=from_hex(d["phi"]), primes=_ints(d["primes"]))
        if kind == "commitment":
            return Commitment(_bytes(d["digest"], 32))
        if kind == "poly":
            return DensePoly(_ints(d["coeffs"]))
        if kind == "schedule":
            return _schedule(d)
        if kind == "puzzle-chain":
            return PuzzleChain(tuple(_ints(c) for c in d["coords"]),
                               tuple(Commitment(_bytes(c, 32)) for c in d["commitments"]),
                               from_hex(d["r1"]), from_hex(d["n"]), _schedule(d["schedule"]))
        if kind == "master-keys":
            return MasterKeyChain(_ints(d["mks"]))
        if kind == "eval-grant":
            return EvalGrant(from_hex(d["h"]), Commitment(_bytes(d["com"], 32)), int(d["Y"]))
        if kind == "eval-puzzle":
            return EvalPuzzle(_ints(d["g"]))
        if kind == "solution-bundle":
            sols = tuple((from_hex(v), int(i)) for v, i in d["solutions"])
            if d["kind"] == "chain":
                proofs = _ints(d["proofs"])
            else:
                proofs = tuple(_ints(pr) for pr in d["proofs"])
            return SolutionBundle(d["kind"], sols, proofs)
        if kind == "leader-config":
            return LeaderConfig(int(d["n"]), int(d["tddot"]), int(d["t"]), _bytes(d["rhat"]),
                                tuple(int(v) for v in d["leaders"]))
        if kind == "fault-plan":
            return fault_plan_from(d)
    except DecodeError:
        raise
    except (KeyError, TypeError, ValueError, FieldError) as exc:
        raise DecodeError(f"malformed {d.get('type', 'object') if isinstance(d, dict) else 'object'}: {exc}") from exc
    raise DecodeError(f"unknown object type {kind!r}")


def fault_plan_from(d: dict) -> FaultPlan:
    try:
        return FaultPlan(target=str(d["target"]), delta=int(d.get("delta", 0)),
                         replace=None if d.get("replace") is None else int(d["replace"]),
                         index=int(d.get("index", 0)),
                         session=None if d.get("session") is None else tuple(int(v) for v in d["session"]),
                         phase=str(d.get("phase", "")))
    except (KeyError, TypeError, ValueError) as exc:
        raise DecodeError(f"malformed fault plan: {exc}") from exc


def grants_obj(grants: dict) -> dict:
    return {str(u): to_obj(g) for u, g in grants.items()}


def grants_from(d: dict) -> dict:
    return {int(u): from_obj(g) for u, g in d.items()}


def save(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj if isinstance(obj, (dict, list)) else to_obj(obj)) + "\n")


def load_json(path) -> Any:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise DecodeError(f"{path}: not valid JSON ({exc})") from exc


def load(path):
    return from_obj(load_json(path))
