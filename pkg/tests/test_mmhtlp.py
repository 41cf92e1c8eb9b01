import random

import pytest

from mitlp.board import BulletinBoard
from mitlp.faults import FaultPlan
from mitlp.fieldpoly import field_ctx_new
from mitlp.mhtlp import (
    EvalPuzzle, EvaluationAborted, IntegrityError, MalformedInput, TimeSchedule, evaluate, unblind,
)
from mitlp.mmhtlp import (
    McClient, evaluate_mc, leader_hash, mm_gen_puzzle, select_leaders, solve_client_chain, solve_mc,
    solve_sc, verify_client_solution, verify_mc, verify_sc,
)
from mitlp.primitives import rsa_keygen
from conftest import P128
from oracles import expected_theta

RHAT = bytes(range(32))


@pytest.fixture(scope="module")
def party_keys():
    r = random.Random(31)
    return [rsa_keygen(64, r) for _ in range(5)]


def _clients(ctx, keys, chains_msgs, ids, qs, seed=0):
    r = random.Random(seed)
    out = []
    for k, msgs, pid, q in zip(keys, chains_msgs, ids, qs):
        chain, mkc = mm_gen_puzzle(msgs, k, ctx, TimeSchedule(tuple([5] * len(msgs)), 1), r)
        out.append(McClient(chain, mkc, k, pid, q))
    return out


def _run(ctx, keys, chains_msgs, ids, qs, tddot, seed=0, **kw):
    n = len(chains_msgs)
    cfg = select_leaders(n, tddot, 1, RHAT)
    cl = _clients(ctx, keys, chains_msgs, ids, qs, seed)
    g, grants, sec = evaluate_mc(cl, cfg, ctx, 1, random.Random(seed + 100), **kw)
    moduli = {u: cl[u].keys.n for u in cfg.leaders}
    return cfg, cl, g, grants, sec, moduli


def test_leader_selection_known_answer():
    # independently recomputed from SHA-256(j || rhat) mod n
    assert select_leaders(5, 2, 1, RHAT).leaders == (1, 4)
    assert select_leaders(5, 2, 1, RHAT) == select_leaders(5, 2, 1, RHAT)


def test_leader_selection_boundaries():
    assert sorted(select_leaders(4, 4, 2, RHAT).leaders) == [0, 1, 2, 3]
    with pytest.raises(MalformedInput):
        select_leaders(3, 4, 1, RHAT)
    with pytest.raises(MalformedInput):
        select_leaders(3, 0, 1, RHAT)


def test_leader_collision_is_rehashed():
    rhat = (2).to_bytes(32, "big")
    assert leader_hash(1, rhat, 3) == leader_hash(2, rhat, 3) == 1
    assert leader_hash(2, rhat, 3, 1) == 1
    cfg = select_leaders(3, 2, 1, rhat)
    assert cfg.leaders == (1, 2)


def test_wider_chain(party_keys):
    ctx = field_ctx_new(P128, 4)
    chain, mkc = mm_gen_puzzle([3, 4], party_keys[0], ctx, TimeSchedule((2, 2), 1), random.Random(1))
    assert all(len(c) == 4 for c in chain.coords)
    bundle, _ = solve_client_chain(chain, ctx)
    assert bundle.values == (3, 4)
    assert all(verify_client_solution(m, mk, com)
               for (m, _), mk, com in zip(bundle.solutions, bundle.proofs, chain.commitments))


def test_evaluate_sc_at_width_five(party_keys):
    ctx = field_ctx_new(P128, 5)
    k = party_keys[0]
    chain, mkc = mm_gen_puzzle([10, 20, 30], k, ctx, TimeSchedule((3, 3, 3), 1), random.Random(2))
    g, grant, _ = evaluate(chain, [1, 1, 1], mkc, k, ctx, 1, random.Random(3))
    bundle, _ = solve_sc(g, grant, k.n, ctx)
    assert bundle.values == (60,)
    assert verify_sc(60, bundle.proofs[0], g, grant, ctx)
    bad = EvalPuzzle(g.g[:2] + ((g.g[2] + 9) % ctx.p,) + g.g[3:])
    assert not verify_sc(60, bundle.proofs[0], bad, grant, ctx)


def test_three_clients_one_leader(party_keys):
    ctx = field_ctx_new(P128, 3)
    cfg, cl, g, grants, _, moduli = _run(ctx, party_keys, [[2], [3], [4]], [1, 1, 1], [1, 1, 1], 1)
    bundle, reps = solve_mc(g, grants, moduli, cfg, ctx)
    assert bundle.values == (9,) and len(reps) == 1
    assert verify_mc(9, bundle.proofs, g, grants, cfg, ctx)


def test_two_clients_both_leaders(party_keys):
    ctx = field_ctx_new(P128, 4)
    cfg, _, g, grants, _, moduli = _run(ctx, party_keys, [[6], [11]], [1, 1], [5, 0], 2)
    bundle, reps = solve_mc(g, grants, moduli, cfg, ctx)
    assert bundle.values == (30,) and len(reps) == 2


def test_mixed_puzzle_choice(party_keys):
    ctx = field_ctx_new(P128, 4)
    msgs = [[1, 2, 3], [40, 50], [600]]
    cfg, _, g, grants, _, moduli = _run(ctx, party_keys, msgs, [3, 1, 1], [1, 2, 3], 2)
    assert solve_mc(g, grants, moduli, cfg, ctx)[0].values == (3 + 80 + 1800,)


def test_zero_sum_and_theta(party_keys):
    ctx = field_ctx_new(P128, 5)
    msgs = [[7], [8], [9], [10]]
    qs = [2, 3, 4, 5]
    cfg, _, g, _, sec, _ = _run(ctx, party_keys, msgs, [1] * 4, qs, 3)
    for i in range(ctx.tbar):
        assert sum(sec.y[u][i] for u in sec.y) % ctx.p == 0
    theta = unblind(g.g, [sec.tks[u] for u in cfg.leaders], ctx)
    roots = [sec.roots[u] for u in cfg.leaders]
    assert list(theta.coeffs) == expected_theta(roots, qs, [m[0] for m in msgs], ctx.p)
    assert theta.degree == cfg.tddot + 1
    assert len(set(roots)) == len(roots)


def test_verify_mc_rejections(party_keys):
    ctx = field_ctx_new(P128, 4)
    cfg, _, g, grants, _, moduli = _run(ctx, party_keys, [[1], [2], [3]], [1, 1, 1], [1, 1, 1], 2)
    bundle, _ = solve_mc(g, grants, moduli, cfg, ctx)
    m, proofs = bundle.values[0], bundle.proofs
    assert verify_mc(m, proofs, g, grants, cfg, ctx)
    assert not verify_mc(m + 1, proofs, g, grants, cfg, ctx)
    assert not verify_mc(m, proofs[:1], g, grants, cfg, ctx)
    assert not verify_mc(m, ((proofs[0][0] + 1, proofs[0][1]),) + proofs[1:], g, grants, cfg, ctx)
    assert not verify_mc(m, ((proofs[0][0], proofs[0][1] + 1),) + proofs[1:], g, grants, cfg, ctx)
    bad = EvalPuzzle(((g.g[0] + 1) % ctx.p,) + g.g[1:])
    assert not verify_mc(m, proofs, bad, grants, cfg, ctx)


def test_grant_h_tamper_breaks_solve(party_keys):
    ctx = field_ctx_new(P128, 4)
    cfg, _, g, grants, _, moduli = _run(ctx, party_keys, [[1], [2], [3]], [1, 1, 1], [1, 1, 1], 2,
                                        faults=FaultPlan("grant.h", delta=1, index=1))
    with pytest.raises(IntegrityError):
        solve_mc(g, grants, moduli, cfg, ctx)


def test_grant_com_tamper_rejected(party_keys):
    ctx = field_ctx_new(P128, 4)
    cfg, _, g, grants, sec, _ = _run(ctx, party_keys, [[1], [2], [3]], [1, 1, 1], [1, 1, 1], 2,
                                     faults=FaultPlan("grant.com", delta=1, index=0))
    proofs = tuple((sec.roots[u], sec.tks[u]) for u in cfg.leaders)
    assert not verify_mc(6, proofs, g, grants, cfg, ctx)


def test_ole_fault_aborts_when_verifying(party_keys):
    ctx = field_ctx_new(P128, 3)
    with pytest.raises(EvaluationAborted):
        _run(ctx, party_keys, [[1], [2]], [1, 1], [1, 1], 1,
             faults=FaultPlan("ole1.b", delta=1, session=(2, 1)), verifying=True)


def test_envelopes_on_board(party_keys):
    ctx = field_ctx_new(P128, 4)
    board = BulletinBoard()
    cfg, *_ = _run(ctx, party_keys, [[1], [2], [3]], [1, 1, 1], [1, 1, 1], 2, board=board)
    envs = [e for e in board.entries() if e.topic.startswith("phase5.stepb4.")]
    # every leader writes once to every other client
    assert len(envs) == cfg.tddot * (cfg.n - 1)
    assert {(e.sender, e.recipient) for e in envs} == {
        (f"client{u}", f"client{l}") for u in cfg.leaders for l in range(cfg.n) if l != u}


def test_single_client_reduces_to_sc(party_keys):
    ctx = field_ctx_new(P128, 3)
    k = party_keys[0]
    chain, mkc = mm_gen_puzzle([42], k, ctx, TimeSchedule((5,), 1), random.Random(8))
    g_sc, grant_sc, _ = evaluate(chain, [3], mkc, k, ctx, 1, random.Random(9))
    cfg = select_leaders(1, 1, 1, RHAT)
    g_mc, grants, _ = evaluate_mc([McClient(chain, mkc, k, 1, 3)], cfg, ctx, 1, random.Random(9))
    assert g_mc == g_sc and grants[0] == grant_sc


def test_inconsistent_inputs(party_keys):
    ctx = field_ctx_new(P128, 3)
    cl = _clients(ctx, party_keys, [[1], [2]], [1, 2], [1, 1])
    with pytest.raises(MalformedInput):
        evaluate_mc(cl, select_leaders(2, 1, 1, RHAT), ctx, 1)
    cl = _clients(ctx, party_keys, [[1], [2]], [1, 1], [1, 1])
    with pytest.raises(MalformedInput):
        evaluate_mc(cl, select_leaders(3, 1, 1, RHAT), ctx, 1)
