"""Multi-client multi-instance homomorphic time-lock puzzles.

Every client keeps its own chain (t-bar = t-ddot + 2 coordinates per puzzle).
For a cross-client combination, t-ddot leader clients each contribute a
secret root, a temporary key and masked root coordinates

    gamma'_{i,u} = (x_i - root_u) * w'_{i,u}

which every client multiplies together into v_i. Pairwise PRF keys give
each client an additive mask y_{i,u}; the masks of all clients sum to zero,
so only the server's sum over *all* clients is meaningful:

    g_i = prod_u gamma'_{i,u} * sum_u q_u pi_u(x_i) + sum_{u in leaders} z'_{i,u}

Solving needs every leader's temporary key; the decoded polynomial is
theta(x) = prod_u (x - root_u) * sum_u q_u (x + m_u).
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence

from .board import BulletinBoard, topic
from .faults import FaultPlan
from .fieldpoly import FieldContext, FieldError, from_hex, inv, poly_eval, to_hex
from .mhtlp import (
    EvalGrant, EvalPuzzle, MalformedInput, IntegrityError, MasterKeyChain, PuzzleChain,
    SolutionBundle, TimeSchedule, _extract, _ole_session, evaluate, gen_puzzle, key_masks,
    perturb_g, perturb_grant, sample_root, solve_chain, solve_evaluation, unblind,
    verify_client_solution, verify_evaluation,
)
from .primitives import (
    COORD, RsaKeypair, commit_ints, default_rng, int_bytes, prf, random_unit, sequential_square,
    trapdoor_power, verify_commit_ints,
)

# single-client evaluation, chain solving and single-solution checks are the
# same algebra at any width
evaluate_sc = evaluate
solve_sc = solve_evaluation
verify_sc = verify_evaluation
solve_client_chain = solve_chain

EnvelopeTopicStep = "b4"


@dataclass(frozen=True)
class LeaderConfig:
    n: int
    tddot: int
    t: int
    rhat: bytes
    leaders: tuple


def leader_hash(j: int, rhat: bytes, n: int, counter: int = 0) -> int:
    data = j.to_bytes(8, "big") + rhat + (int_bytes(counter) if counter else b"")
    return int.from_bytes(hashlib.sha256(data).digest(), "big") % n


def select_leaders(n: int, tddot: int, t: int, rhat: bytes) -> LeaderConfig:
    """Deterministic leader indices (0-based) from the shared random value rhat."""
    if not 1 <= tddot <= n:
        raise MalformedInput("need 1 <= tddot <= n")
    chosen: list = []
    for j in range(1, tddot + 1):
        counter = 0
        idx = leader_hash(j, rhat, n)
        while idx in chosen:
            counter += 1
            idx = leader_hash(j, rhat, n, counter)
        chosen.append(idx)
    return LeaderConfig(n=n, tddot=tddot, t=t, rhat=bytes(rhat), leaders=tuple(chosen))


def mm_gen_puzzle(messages: Sequence[int], keys: RsaKeypair, ctx: FieldContext,
                  schedule: TimeSchedule, rng=None) -> tuple:
    return gen_puzzle(messages, keys, ctx, schedule, rng)


@dataclass(frozen=True)
class McClient:
    """One party's inputs to a multi-client evaluation; ``pid`` is 1-based."""
    chain: PuzzleChain
    mkc: MasterKeyChain
    keys: RsaKeypair
    pid: int
    q: int


@dataclass
class McEvalSecrets:
    tks: dict
    roots: dict
    y: dict  # client -> (y_1, ..., y_tbar)
    v: tuple
    transcripts: list = field(default_factory=list)


def _client(u: int) -> str:
    return f"client{u}"


def evaluate_mc(clients: Sequence[McClient], config: LeaderConfig, ctx: FieldContext, delta: int,
                rng=None, faults: FaultPlan | None = None, verifying: bool = False,
                board: BulletinBoard | None = None) -> tuple:
    """Combine one chosen puzzle per client; returns (EvalPuzzle, {leader: EvalGrant}, McEvalSecrets).

    Leader-to-client messages travel as envelopes on ``board``.
    """
    n = len(clients)
    if n != config.n:
        raise MalformedInput("client count does not match the leader configuration")
    rates = {c.chain.schedule.maxss for c in clients}
    if len(rates) != 1:
        raise MalformedInput("all clients must share maxss")
    for c in clients:
        if not 1 <= c.pid <= c.chain.z:
            raise MalformedInput(f"puzzle index {c.pid} outside the chain")
        if c.chain.n != c.keys.n or len(c.mkc.mks) != c.chain.z:
            raise MalformedInput("chain does not belong to its keys")
        if any(len(o) != ctx.tbar for o in c.chain.coords):
            raise MalformedInput("chain width does not match the field context")
    rng = rng or default_rng()
    board = board or BulletinBoard()
    p, tbar = ctx.p, ctx.tbar
    Y = rates.pop() * delta
    if Y < 0:
        raise MalformedInput("negative evaluation delay")
    leaders = config.leaders

    # leaders: temporary keys, roots, and one envelope per other client
    lead = {}
    used_roots: list = []
    for u in leaders:
        keys = clients[u].keys
        h = random_unit(keys.n, rng)
        tk = trapdoor_power(h, Y, keys)
        zp, wp = key_masks(tk, ctx)
        fkeys = {l: rng.randbytes(32) for l in range(n) if l != u}
        root = sample_root(ctx, rng, used_roots)
        used_roots.append(root)
        gp = tuple((x - root) * wp[i] % p for i, x in enumerate(ctx.xs))
        lead[u] = {"h": h, "tk": tk, "zp": zp, "root": root, "f": fkeys, "gp": gp}
        for l, f in fkeys.items():
            board.send(_client(u), _client(l), topic("eval-mc", EnvelopeTopicStep, u),
                       {"f": f.hex(), "gamma_prime": [to_hex(v) for v in gp]})

    transcripts: list = []
    ys, g = {}, [0] * tbar
    vs = None
    for u, c in enumerate(clients):
        got = {}
        for env in board.inbox(_client(u), f"phase5.step{EnvelopeTopicStep}."):
            sender = int(env.sender[len("client"):])
            got[sender] = (bytes.fromhex(env.payload["f"]), [from_hex(s) for s in env.payload["gamma_prime"]])
        gps = {l: (lead[l]["gp"] if l == u else got[l][1]) for l in leaders}
        v = [1] * tbar
        for l in leaders:
            for i in range(tbar):
                v[i] = v[i] * gps[l][i] % p
        vs = tuple(v)

        y = []
        for i in range(1, tbar + 1):
            incoming = sum(prf(COORD, i, got[l][0], ctx) for l in leaders if l != u)
            if u in lead:
                outgoing = sum(prf(COORD, i, f, ctx) for f in lead[u]["f"].values())
                y.append((incoming - outgoing) % p)
            else:
                y.append(incoming % p)
        ys[u] = tuple(y)

        zs, ws = key_masks(c.mkc.mks[c.pid - 1], ctx)
        coords = c.chain.coords[c.pid - 1]
        q = c.q % p
        for i in range(tbar):
            base = q * v[i] % p
            e = base * inv(ws[i], ctx) % p
            e2 = (-base * zs[i] + (lead[u]["zp"][i] if u in lead else 0) + y[i]) % p
            g[i] += _ole_session(e, e2, coords[i], ctx, rng, faults, verifying, (i + 1, u), transcripts,
                                 default_session=(1, 0))

    puzzle = EvalPuzzle(perturb_g(tuple(x % p for x in g), faults, p))
    grants = {}
    for k, u in enumerate(leaders):
        grant = EvalGrant(lead[u]["h"], commit_ints(lead[u]["root"], lead[u]["tk"]), Y)
        if faults is not None and faults.target.startswith("grant.") and faults.index == k:
            grant = perturb_grant(grant, faults, clients[u].keys.n)
        grants[u] = grant
    secrets_ = McEvalSecrets(
        tks={u: lead[u]["tk"] for u in leaders},
        roots={u: lead[u]["root"] for u in leaders},
        y=ys, v=vs, transcripts=transcripts,
    )
    return puzzle, grants, secrets_


def solve_mc(g: EvalPuzzle, grants: dict, moduli: dict, config: LeaderConfig, ctx: FieldContext,
             cancel=None) -> tuple:
    """Recover sum_u q_u m_u; returns (SolutionBundle, [SquaringReport per leader])."""
    if set(grants) != set(config.leaders):
        raise MalformedInput("need exactly one grant per leader")
    if len({grants[u].Y for u in config.leaders}) != 1:
        raise MalformedInput("leaders disagree on Y")
    reports, tks = [], []
    for u in config.leaders:
        gr = grants[u]
        if not 1 <= gr.h < moduli[u]:
            raise MalformedInput(f"grant base of leader {u} outside [1, N)")
        rep = sequential_square(gr.h, gr.Y, moduli[u], cancel)
        reports.append(rep)
        tks.append(rep.result)
    theta = unblind(g.g, tks, ctx)
    roots = sorted(_extract(theta, config.tddot, ctx))
    proofs = []
    denom = 1
    for u, tk in zip(config.leaders, tks):
        valid = [r for r in roots if r != 0 and verify_commit_ints(grants[u].com, r, tk)]
        if not valid:
            raise IntegrityError(f"no root opens the commitment of leader {u}")
        proofs.append((valid[0], tk))
        denom = denom * (-valid[0]) % ctx.p
    m = theta.constant * inv(denom, ctx) % ctx.p
    return SolutionBundle("eval-mc", ((m, 0),), tuple(proofs)), reports


def verify_mc(m: int, proofs: Sequence[tuple], g: EvalPuzzle, grants: dict, config: LeaderConfig,
              ctx: FieldContext) -> bool:
    if len(proofs) != len(config.leaders) or set(grants) != set(config.leaders):
        return False
    if not 0 <= m < ctx.p:
        return False
    try:
        for u, (root, tk) in zip(config.leaders, proofs):
            if not 0 < root < ctx.p or not verify_commit_ints(grants[u].com, root, tk):
                return False
        theta = unblind(g.g, [tk for _, tk in proofs], ctx)
    except (FieldError, MalformedInput, TypeError, ValueError):
        return False
    denom = 1
    for root, _ in proofs:
        if poly_eval(theta, root, ctx) != 0:
            return False
        denom = denom * (-root) % ctx.p
    return theta.constant * inv(denom, ctx) % ctx.p == m
