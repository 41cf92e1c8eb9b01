"""End-to-end scenario runner and squaring-rate calibration.

A scenario runs keygen, puzzle generation, one evaluation, all solves and
all verifications, logging every published value and private message on a
bulletin board. One seed drives every coin, so the transcript is a pure
function of the scenario.
"""
from __future__ import annotations

import random
import secrets
import time
from dataclasses import dataclass, field

from .board import BulletinBoard, topic
from .faults import FaultPlan
from .fieldpoly import setup_field, to_hex
from .mhtlp import (
    EvaluationAborted, IntegrityError, MalformedInput, SolutionBundle, TimeSchedule,
    evaluate, gen_puzzle, solve_chain, solve_evaluation, verify_client_solution, verify_evaluation,
)
from .mmhtlp import McClient, evaluate_mc, select_leaders, solve_mc, verify_mc
from .primitives import rsa_keygen, random_unit
from .serialize import dumps, fault_plan_from, to_obj
from .squaring import resolve_backend, square_block


@dataclass
class Scenario:
    n: int = 1
    z: list = field(default_factory=lambda: [3])
    tddot: int = 1
    t: int = 1
    deltas: list | None = None  # per client; default 4 seconds per puzzle
    maxss: int = 1
    delta: int = 1
    coeffs: list | None = None  # sc: one per puzzle; mc: one per client
    ids: list | None = None  # mc: 1-based puzzle index chosen by each client
    messages: list | None = None  # per client
    seed: int = 0
    prime_bits: int = 128
    rsa_bits: int = 512  # modulus size
    deterministic_rsa: bool = True
    rhat: str | None = None
    faults: FaultPlan | None = None
    detect: bool = False

    @classmethod
    def from_obj(cls, d: dict) -> "Scenario":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known - {"type"}
        if extra:
            raise MalformedInput(f"unknown scenario fields: {sorted(extra)}")
        kw = {k: v for k, v in d.items() if k in known}
        if isinstance(kw.get("z"), int):
            kw["z"] = [kw["z"]] * int(kw.get("n", 1))
        if kw.get("faults") is not None:
            kw["faults"] = fault_plan_from(kw["faults"])
        s = cls(**kw)
        s.validate()
        return s

    def to_obj(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["faults"] = None if self.faults is None else to_obj(self.faults)
        return d

    def validate(self) -> None:
        if self.n < 1 or len(self.z) != self.n or any(int(v) < 1 for v in self.z):
            raise MalformedInput("need n >= 1 and one positive chain length per client")
        if self.n == 1 and self.tddot != 1:
            raise MalformedInput("a single-client scenario has exactly one leader")
        if not 1 <= self.tddot <= self.n:
            raise MalformedInput("need 1 <= tddot <= n")
        if self.deltas is not None and [len(d) for d in self.deltas] != list(self.z):
            raise MalformedInput("deltas must match chain lengths")
        if self.messages is not None and [len(m) for m in self.messages] != list(self.z):
            raise MalformedInput("messages must match chain lengths")
        if self.n == 1 and self.coeffs is not None and len(self.coeffs) != self.z[0]:
            raise MalformedInput("single-client scenarios need one coefficient per puzzle")
        if self.n > 1 and self.coeffs is not None and len(self.coeffs) != self.n:
            raise MalformedInput("multi-client scenarios need one coefficient per client")
        if self.ids is not None and (len(self.ids) != self.n or
                                     any(not 1 <= i <= zz for i, zz in zip(self.ids, self.z))):
            raise MalformedInput("ids must pick one existing puzzle per client")
        if self.rsa_bits < 64 or self.prime_bits < 16:
            raise MalformedInput("parameters too small")


@dataclass
class ScenarioResult:
    board: BulletinBoard
    verdicts: dict
    expected: int | None = None
    result: int | None = None

    @property
    def ok(self) -> bool:
        return all(v == "accept" for v in self.verdicts.values())

    def transcript(self, scenario: Scenario) -> dict:
        return {"scenario": scenario.to_obj(), "records": self.board.to_json_obj(), "verdicts": self.verdicts}

    def transcript_json(self, scenario: Scenario) -> str:
        return dumps(self.transcript(scenario))


def _perturb_bundle(bundle: SolutionBundle, plan: FaultPlan | None, p: int) -> SolutionBundle:
    if plan is None:
        return bundle
    sols, proofs = list(bundle.solutions), [list(pr) for pr in bundle.proofs]
    if plan.target == "result":
        v, i = sols[0]
        sols[0] = (plan.apply(v, p), i)
    elif plan.target in ("proof.root", "proof.tk"):
        slot = 0 if plan.target == "proof.root" else 1
        proofs[plan.index][slot] = plan.apply(proofs[plan.index][slot], p if slot == 0 else None)
    else:
        return bundle
    return SolutionBundle(bundle.kind, tuple(sols), tuple(tuple(pr) for pr in proofs))


def _ole_log(board: BulletinBoard, phase: str, transcripts: list, client_of) -> None:
    for session, tr in transcripts:
        u = client_of(session)
        calls = [{"fid": c.fid, "sender": c.sender_role, "sender_inputs": [to_hex(v) for v in c.sender_inputs],
                  "receiver": c.receiver_role, "receiver_input": to_hex(c.receiver_input),
                  "output": to_hex(c.output)} for c in tr.calls]
        board.send(f"client{u}", "server", topic(phase, "ole", u), {"session": list(session), "calls": calls})


class PhaseError(Exception):
    """A scenario phase failed; ``phase`` names it and ``__cause__`` holds the error."""

    def __init__(self, phase: str, exc: Exception):
        super().__init__(f"[{phase}] {type(exc).__name__}: {exc}")
        self.phase = phase
        self.cause = exc


def run_scenario(s: Scenario, board: BulletinBoard | None = None) -> ScenarioResult:
    s.validate()
    state = {"phase": "setup"}
    try:
        return _run(s, board or BulletinBoard(), state)
    except Exception as exc:
        raise PhaseError(state["phase"], exc) from exc


def _run(s: Scenario, board: BulletinBoard, state: dict) -> ScenarioResult:
    rng = random.Random(s.seed)
    verdicts: dict = {}
    single = s.n == 1
    tbar = 3 if single else s.tddot + 2

    ctx = setup_field(s.prime_bits, tbar, rng)
    board.publish("server", topic("setup", "b", "server"), {"p": to_hex(ctx.p), "xs": [to_hex(x) for x in ctx.xs]})

    state["phase"] = "keygen"
    key_rng = rng if s.deterministic_rsa else secrets.SystemRandom()
    keys = []
    for u in range(s.n):
        k = rsa_keygen(s.rsa_bits // 2, key_rng)
        keys.append(k)
        board.publish(f"client{u}", topic("keygen", "b", u), {"n": to_hex(k.n)})

    state["phase"] = "puzzle-gen"
    chains, mkcs, msgs = [], [], []
    for u in range(s.n):
        z = s.z[u]
        m = list(s.messages[u]) if s.messages else [rng.randrange(ctx.u_bound) for _ in range(z)]
        deltas = s.deltas[u] if s.deltas else [4] * z
        chain, mkc = gen_puzzle(m, keys[u], ctx, TimeSchedule(tuple(deltas), s.maxss), rng)
        chains.append(chain)
        mkcs.append(mkc)
        msgs.append(m)
        board.publish(f"client{u}", topic("puzzle-gen", "g", u), to_obj(chain))

    p = ctx.p
    plan = s.faults
    claim = None
    state["phase"] = "eval-sc" if single else "eval-mc"
    if single:
        coeffs = list(s.coeffs) if s.coeffs is not None else [rng.randrange(p) for _ in range(s.z[0])]
        expected = sum(q * m for q, m in zip(coeffs, msgs[0])) % p
        try:
            g, grant, sec = evaluate(chains[0], coeffs, mkcs[0], keys[0], ctx, s.delta, rng, plan, s.detect)
        except EvaluationAborted as exc:
            board.publish("client0", topic("eval-sc", "abort", 0), {"reason": str(exc)})
            verdicts["evaluation"] = "abort"
            g = None
        else:
            _ole_log(board, "eval-sc", sec.transcripts, lambda session: 0)
            board.publish("client0", topic("eval-sc", "a6", 0), to_obj(grant))
            board.publish("server", topic("eval-sc", "b", "server"), to_obj(g))
            try:
                bundle, _ = solve_evaluation(g, grant, keys[0].n, ctx)
                claim = _perturb_bundle(bundle, plan, p)
                board.publish("server", topic("solve", "f", "server"), to_obj(claim))
            except (IntegrityError, MalformedInput) as exc:
                board.publish("server", topic("solve", "f", "server"), {"error": str(exc)})
            ok = claim is not None and verify_evaluation(claim.values[0], claim.proofs[0], g, grant, ctx)
            verdicts["evaluation verification"] = "accept" if ok else "reject"
    else:
        rhat = bytes.fromhex(s.rhat) if s.rhat else rng.randbytes(32)
        config = select_leaders(s.n, s.tddot, s.t, rhat)
        board.publish("server", topic("eval-mc", "a", "server"), to_obj(config))
        coeffs = list(s.coeffs) if s.coeffs is not None else [rng.randrange(p) for _ in range(s.n)]
        ids = list(s.ids) if s.ids is not None else [rng.randrange(1, z + 1) for z in s.z]
        expected = sum(q * msgs[u][ids[u] - 1] for u, q in enumerate(coeffs)) % p
        clients = [McClient(chains[u], mkcs[u], keys[u], ids[u], coeffs[u]) for u in range(s.n)]
        try:
            g, grants, sec = evaluate_mc(clients, config, ctx, s.delta, rng, plan, s.detect, board)
        except EvaluationAborted as exc:
            board.publish("server", topic("eval-mc", "abort", "server"), {"reason": str(exc)})
            verdicts["evaluation"] = "abort"
            g = None
        else:
            _ole_log(board, "eval-mc", sec.transcripts, lambda session: session[1])
            for u, gr in grants.items():
                board.publish(f"client{u}", topic("eval-mc", "b7", u), to_obj(gr))
            board.publish("server", topic("eval-mc", "c", "server"), to_obj(g))
            try:
                bundle, _ = solve_mc(g, grants, {u: keys[u].n for u in config.leaders}, config, ctx)
                claim = _perturb_bundle(bundle, plan, p)
                board.publish("server", topic("solve", "f", "server"), to_obj(claim))
            except (IntegrityError, MalformedInput) as exc:
                board.publish("server", topic("solve", "f", "server"), {"error": str(exc)})
            ok = claim is not None and verify_mc(claim.values[0], claim.proofs, g, grants, config, ctx)
            verdicts["evaluation verification"] = "accept" if ok else "reject"

    if claim is not None:
        verdicts["evaluation result"] = "accept" if claim.values[0] == expected else "reject"

    state["phase"] = "solve"
    for u in range(s.n):
        bundle, reports = solve_chain(chains[u], ctx)
        board.publish("server", topic("solve", "d", u),
                      {**to_obj(bundle), "squarings": sum(r.squarings_performed for r in reports)})
        ok = all(verify_client_solution(m, mk, com)
                 for (m, _), mk, com in zip(bundle.solutions, bundle.proofs, chains[u].commitments))
        verdicts[f"client verification (client {u})"] = "accept" if ok else "reject"
        verdicts[f"chain recovery (client {u})"] = "accept" if list(bundle.values) == msgs[u] else "reject"

    state["phase"] = "verify"
    for name, v in verdicts.items():
        board.publish("verifier", topic("verify", "verdict", "verifier"), {"check": name, "verdict": v})
    return ScenarioResult(board, verdicts, expected, None if claim is None else claim.values[0])


@dataclass(frozen=True)
class Calibration:
    rate: int  # squarings per second
    modulus_bits: int
    backend: str
    squarings: int
    seconds: float


def calibrate_maxss(n: int, duration: float, backend: str | None = None, rng=None) -> Calibration:
    """Measure sequential squaring throughput modulo ``n`` for ``duration`` seconds."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    backend = resolve_backend(backend)
    rng = rng or random.Random(0)
    x = random_unit(n, rng)
    count, block = 0, 2048
    start = time.perf_counter()
    while True:
        x = square_block(x, block, n, backend)
        count += block
        elapsed = time.perf_counter() - start
        if elapsed >= duration:
            break
    return Calibration(int(count / elapsed), n.bit_length(), backend, count, elapsed)
