"""Single-client multi-instance homomorphic time-lock puzzles.

A client locks z messages into a chain: the master key recovered from
puzzle j seeds the base of puzzle j+1, so a solver pays for the longest
horizon only once. Each message m_j is encoded as pi_j(x) = x + m_j at the
public coordinates and blinded with PRF masks derived from mk_j.

For a linear combination the client grants the server a fresh evaluation
puzzle (h, com', Y). Through OLE+ the server obtains

    g_i = gamma_i * w'_i * sum_j q_j * pi_j(x_i) + z'_i,   gamma_i = x_i - root

where the additive y-masks cancel across j. Whoever solves h^(2^Y) can strip
(z', w'), interpolate theta(x) = (x - root) * sum_j q_j (x + m_j), and read the
result off its constant term.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .faults import OLE_TARGETS, FaultPlan
from .fieldpoly import (
    DensePoly, FieldContext, FieldError, find_roots, interpolate, inv, point_values, poly_eval,
)
from .ole import OleMisbehaviour, OleReceiverInput, OleSenderInput, ole_plus
from .primitives import (
    COORD, KDF, Commitment, RsaKeypair, SquaringCancelled, commit_ints,
    default_rng, derive_base, key_from_int, prf, prf_nonzero, random_unit, sequential_square,
    trapdoor_power, verify_commit_ints,
)


class SchemeError(Exception):
    pass


class MalformedInput(SchemeError, ValueError):
    pass


class IntegrityError(SchemeError):
    """No root of the decoded polynomial opens the published commitment."""


class EvaluationAborted(SchemeError):
    """A party detected OLE misbehaviour and halted the evaluation."""


class ChainSolveCancelled(SchemeError):
    def __init__(self, partial: "SolutionBundle", reports: list, completed: int):
        super().__init__(f"chain solve cancelled after {len(partial.solutions)} puzzles")
        self.partial = partial
        self.reports = reports
        self.completed = completed


# ---------------------------------------------------------------- data

@dataclass(frozen=True)
class TimeSchedule:
    """Per-puzzle intervals (seconds) and the solver rate maxss (squarings/s)."""
    deltas: tuple
    maxss: int

    def __post_init__(self):
        object.__setattr__(self, "deltas", tuple(self.deltas))
        if not self.deltas:
            raise MalformedInput("schedule needs at least one puzzle")
        if any(int(d) != d or d <= 0 for d in self.deltas):
            raise MalformedInput("intervals must be positive integers")
        if int(self.maxss) != self.maxss or self.maxss < 1:
            raise MalformedInput("maxss must be a positive integer")

    @property
    def z(self) -> int:
        return len(self.deltas)

    @property
    def Ts(self) -> tuple:
        return tuple(self.maxss * d for d in self.deltas)

    def cumulative(self) -> tuple:
        out, acc = [], 0
        for d in self.deltas:
            acc += d
            out.append(acc)
        return tuple(out)

    def Y(self, delta: int) -> int:
        if delta < 0:
            raise MalformedInput("negative evaluation delay")
        return self.maxss * delta


@dataclass(frozen=True)
class MasterKeyChain:
    mks: tuple


@dataclass(frozen=True)
class PuzzleChain:
    coords: tuple  # coords[j][i] = o_{i,j}
    commitments: tuple
    r1: int
    n: int
    schedule: TimeSchedule

    @property
    def z(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class EvalGrant:
    h: int
    com: Commitment
    Y: int


@dataclass(frozen=True)
class EvalPuzzle:
    g: tuple


@dataclass
class EvalSecrets:
    """Client-side leftovers of an evaluation (kept for audits and tests)."""
    tk: int
    root: int
    gammas: tuple
    z_prime: tuple
    w_prime: tuple
    f_keys: tuple
    y: tuple  # y[i][j]
    transcripts: list = field(default_factory=list)


@dataclass(frozen=True)
class SolutionBundle:
    """``kind`` is one of chain / eval-sc / eval-mc.

    ``solutions`` holds (value, index) pairs and ``proofs`` the matching
    proof material: mk_j for chain links, (root, tk) pairs for evaluations.
    """
    kind: str
    solutions: tuple
    proofs: tuple

    @property
    def values(self) -> tuple:
        return tuple(v for v, _ in self.solutions)


# ---------------------------------------------------------------- masks

def key_masks(key_int: int, ctx: FieldContext) -> tuple:
    """(z_i, w_i) for every coordinate, derived from a master or temporary key."""
    kk = key_from_int(prf(KDF, 1, key_from_int(key_int), ctx))
    ks = key_from_int(prf(KDF, 2, key_from_int(key_int), ctx))
    zs = tuple(prf(COORD, i, kk, ctx) for i in range(1, ctx.tbar + 1))
    ws = tuple(prf_nonzero(COORD, i, ks, ctx) for i in range(1, ctx.tbar + 1))
    return zs, ws


def sample_root(ctx: FieldContext, rng, avoid: Sequence[int] = ()) -> int:
    bad = set(ctx.xs) | set(avoid)
    while True:
        r = rng.randrange(1, ctx.p)
        if r not in bad:
            return r


def unblind(g: Sequence[int], tks: Sequence[int], ctx: FieldContext) -> DensePoly:
    """Strip the evaluation masks of every temporary key and interpolate theta."""
    if len(g) != ctx.tbar:
        raise MalformedInput(f"expected {ctx.tbar} coordinates, got {len(g)}")
    p = ctx.p
    zsum = [0] * ctx.tbar
    wprod = [1] * ctx.tbar
    for tk in tks:
        zs, ws = key_masks(tk, ctx)
        for i in range(ctx.tbar):
            zsum[i] += zs[i]
            wprod[i] = wprod[i] * ws[i] % p
    theta = [inv(wprod[i], ctx) * (g[i] - zsum[i]) % p for i in range(ctx.tbar)]
    return interpolate(point_values(ctx.xs, theta, ctx), ctx)


# ---------------------------------------------------------------- generation

def _link_keys(r1: int, keys: RsaKeypair, schedule: TimeSchedule) -> list:
    mks = []
    for j, T in enumerate(schedule.Ts, start=1):
        base = r1 if j == 1 else derive_base(j, mks[-1], keys.n)
        mks.append(trapdoor_power(base, T, keys))
    return mks


def gen_puzzle(messages: Sequence[int], keys: RsaKeypair, ctx: FieldContext,
               schedule: TimeSchedule, rng=None) -> tuple:
    """Lock ``messages`` into a chain; returns (PuzzleChain, MasterKeyChain)."""
    if len(messages) != schedule.z:
        raise MalformedInput("one interval per message required")
    for m in messages:
        if not ctx.in_universe(m):
            raise MalformedInput(f"message {m} outside the message universe")
    rng = rng or default_rng()
    p = ctx.p
    r1 = random_unit(keys.n, rng)
    mks = _link_keys(r1, keys, schedule)
    coords, coms = [], []
    for m, mk in zip(messages, mks):
        zs, ws = key_masks(mk, ctx)
        coords.append(tuple(ws[i] * (x + m + zs[i]) % p for i, x in enumerate(ctx.xs)))
        coms.append(commit_ints(m, mk))
    chain = PuzzleChain(tuple(coords), tuple(coms), r1, keys.n, schedule)
    return chain, MasterKeyChain(tuple(mks))


def decode_link(coords: Sequence[int], mk: int, ctx: FieldContext) -> int:
    """Constant term of pi_j recovered from one puzzle's coordinates."""
    zs, ws = key_masks(mk, ctx)
    ys = [(inv(ws[i], ctx) * o - zs[i]) % ctx.p for i, o in enumerate(coords)]
    return interpolate(point_values(ctx.xs, ys, ctx), ctx).constant


def solve_chain(chain: PuzzleChain, ctx: FieldContext, cancel=None) -> tuple:
    """Solve every link in order; returns (SolutionBundle, [SquaringReport per link])."""
    sols, proofs, reports = [], [], []
    prev = None
    for j, (coords, T) in enumerate(zip(chain.coords, chain.schedule.Ts), start=1):
        base = chain.r1 if j == 1 else derive_base(j, prev, chain.n)
        try:
            rep = sequential_square(base, T, chain.n, cancel)
        except SquaringCancelled as exc:
            partial = SolutionBundle("chain", tuple(sols), tuple(proofs))
            done = sum(r.squarings_performed for r in reports) + exc.completed
            raise ChainSolveCancelled(partial, reports, done) from exc
        reports.append(rep)
        prev = rep.result
        sols.append((decode_link(coords, prev, ctx), j))
        proofs.append(prev)
    return SolutionBundle("chain", tuple(sols), tuple(proofs)), reports


def verify_client_solution(m: int, mk: int, com: Commitment) -> bool:
    return verify_commit_ints(com, m, mk)


# ---------------------------------------------------------------- evaluation

def _ole_session(e: int, e2: int, o: int, ctx, rng, faults, verifying, session, transcripts,
                 default_session=(1, 1)):
    plan = None
    if faults is not None and faults.target in OLE_TARGETS:
        if tuple(faults.session or default_session) == session:
            plan = faults
    try:
        d, tr = ole_plus(OleSenderInput(e, e2), OleReceiverInput(o), ctx, plan, rng, verifying)
    except OleMisbehaviour as exc:
        raise EvaluationAborted(str(exc)) from exc
    transcripts.append((session, tr))
    return d


def perturb_grant(grant: EvalGrant, faults: FaultPlan | None, n: int) -> EvalGrant:
    if faults is None:
        return grant
    if faults.target == "grant.h":
        return EvalGrant(faults.apply(grant.h, n), grant.com, grant.Y)
    if faults.target == "grant.com":
        d = faults.apply(int.from_bytes(grant.com.digest, "big"), 1 << 256)
        return EvalGrant(grant.h, Commitment(d.to_bytes(32, "big")), grant.Y)
    return grant


def perturb_g(g: tuple, faults: FaultPlan | None, p: int) -> tuple:
    if faults is None or faults.target != "g":
        return g
    g = list(g)
    g[faults.index] = faults.apply(g[faults.index], p)
    return tuple(g)


def evaluate(chain: PuzzleChain, coeffs: Sequence[int], mkc: MasterKeyChain, keys: RsaKeypair,
             ctx: FieldContext, delta: int, rng=None, faults: FaultPlan | None = None,
             verifying: bool = False) -> tuple:
    """Homomorphically combine every puzzle of ``chain`` with ``coeffs``.

    Plays the client and the server in-process and returns
    (EvalPuzzle, EvalGrant, EvalSecrets). Raises EvaluationAborted when a
    verifying OLE session notices an injected fault.
    """
    z = chain.z
    if len(coeffs) != z or len(mkc.mks) != z:
        raise MalformedInput("need one coefficient and one master key per puzzle")
    if chain.n != keys.n:
        raise MalformedInput("chain does not belong to these keys")
    if any(len(c) != ctx.tbar for c in chain.coords):
        raise MalformedInput("chain width does not match the field context")
    if delta >= chain.schedule.deltas[0]:
        raise MalformedInput("evaluation delay must be shorter than the first interval")
    rng = rng or default_rng()
    p = ctx.p
    Y = chain.schedule.Y(delta)

    h = random_unit(keys.n, rng)
    tk = trapdoor_power(h, Y, keys)
    zp, wp = key_masks(tk, ctx)
    f_keys = tuple(rng.randbytes(32) for _ in range(z - 1))
    root = sample_root(ctx, rng)
    gammas = tuple((x - root) % p for x in ctx.xs)

    # zero-sum masks: y_{i,1} cancels the PRF outputs handed to the other links
    y = []
    for i in range(1, ctx.tbar + 1):
        rest = [prf(COORD, i, f, ctx) for f in f_keys]
        y.append(tuple([(-sum(rest)) % p] + rest))
    blinding = [key_masks(mk, ctx) for mk in mkc.mks]

    transcripts: list = []
    g = []
    for i in range(ctx.tbar):
        acc = 0
        for j in range(z):
            zs, ws = blinding[j]
            q = coeffs[j] % p
            base = gammas[i] * q % p * wp[i] % p
            e = base * inv(ws[i], ctx) % p
            e2 = (-base * zs[i] + (zp[i] if j == 0 else 0) + y[i][j]) % p
            acc += _ole_session(e, e2, chain.coords[j][i], ctx, rng, faults, verifying,
                                (i + 1, j + 1), transcripts)
        g.append(acc % p)

    puzzle = EvalPuzzle(perturb_g(tuple(g), faults, p))
    grant = perturb_grant(EvalGrant(h, commit_ints(root, tk), Y), faults, keys.n)
    secrets_ = EvalSecrets(tk, root, gammas, zp, wp, f_keys, tuple(y), transcripts)
    return puzzle, grant, secrets_


def _extract(theta: DensePoly, roots_needed: int, ctx: FieldContext) -> set:
    if theta.is_zero():
        raise MalformedInput("decoded polynomial is zero; its roots cannot be recovered")
    if not roots_needed <= theta.degree <= roots_needed + 1:
        raise MalformedInput(f"decoded polynomial has unexpected degree {theta.degree}")
    return find_roots(theta, ctx)


def solve_evaluation(g: EvalPuzzle, grant: EvalGrant, n: int, ctx: FieldContext, cancel=None) -> tuple:
    """Recover sum_j q_j m_j; returns (SolutionBundle, SquaringReport)."""
    if not 1 <= grant.h < n:
        raise MalformedInput("grant base outside [1, N)")
    rep = sequential_square(grant.h, grant.Y, n, cancel)
    tk = rep.result
    theta = unblind(g.g, [tk], ctx)
    roots = _extract(theta, 1, ctx)
    valid = [r for r in sorted(roots) if r != 0 and verify_commit_ints(grant.com, r, tk)]
    if not valid:
        raise IntegrityError("no root of the decoded polynomial opens the commitment")
    root = valid[0]
    m = theta.constant * inv(-root, ctx) % ctx.p
    return SolutionBundle("eval-sc", ((m, 0),), ((root, tk),)), rep


def verify_evaluation(m: int, proof: tuple, g: EvalPuzzle, grant: EvalGrant, ctx: FieldContext) -> bool:
    try:
        root, tk = proof
        if not (0 <= m < ctx.p and 0 < root < ctx.p and tk >= 0):
            return False
        if not verify_commit_ints(grant.com, root, tk):
            return False
        theta = unblind(g.g, [tk], ctx)
    except (FieldError, MalformedInput, TypeError, ValueError):
        return False
    if theta.degree > 2:
        return False
    if poly_eval(theta, root, ctx) != 0:
        return False
    return (-theta.constant * inv(root, ctx)) % ctx.p == m
