"""Command-line interface.

Exit codes: 0 success/accept, 1 reject, 2 malformed input, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import secrets
import sys

from .fieldpoly import FieldContext, FieldError, from_hex, setup_field
from .harness import PhaseError, Scenario, calibrate_maxss, run_scenario
from .mhtlp import (
    EvaluationAborted, IntegrityError, MalformedInput, TimeSchedule, evaluate, gen_puzzle,
    solve_chain, solve_evaluation, verify_client_solution, verify_evaluation,
)
from .mmhtlp import McClient, evaluate_mc, select_leaders, solve_mc, verify_mc
from .primitives import RsaKeypair, rsa_keygen
from .serialize import DecodeError, dumps, fault_plan_from, from_obj, grants_from, grants_obj, load, load_json, to_obj

EXIT_OK, EXIT_REJECT, EXIT_MALFORMED, EXIT_INTERNAL = 0, 1, 2, 3


def _rng(args):
    return random.Random(args.seed) if args.seed is not None else secrets.SystemRandom()


def _ints(text: str) -> list:
    try:
        return [int(v, 0) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise MalformedInput(f"bad integer list {text!r}") from exc


def _emit(args, obj) -> None:
    text = dumps(obj if isinstance(obj, (dict, list)) else to_obj(obj))
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _expect(obj, cls, what: str):
    if not isinstance(obj, cls):
        raise MalformedInput(f"{what}: expected {cls.__name__}, got {type(obj).__name__}")
    return obj


def _faults(args):
    return fault_plan_from(load_json(args.faults)) if getattr(args, "faults", None) else None


# ---------------------------------------------------------------- commands

def cmd_setup(args) -> int:
    ctx = setup_field(args.prime_bits, args.leaders + 2, _rng(args), allow_small=args.unsafe_small)
    _emit(args, ctx)
    return EXIT_OK


def cmd_keygen(args) -> int:
    if args.deterministic_rsa and args.seed is None:
        raise MalformedInput("--deterministic-rsa needs --seed")
    rng = random.Random(args.seed) if args.deterministic_rsa else secrets.SystemRandom()
    _emit(args, rsa_keygen(args.rsa_bits // 2, rng))
    return EXIT_OK


def cmd_puzzle_gen(args) -> int:
    ctx = _expect(load(args.field), FieldContext, "--field")
    keys = _expect(load(args.keys), RsaKeypair, "--keys")
    msgs = _ints(args.messages)
    deltas = _ints(args.deltas) if args.deltas else [4] * len(msgs)
    chain, mkc = gen_puzzle(msgs, keys, ctx, TimeSchedule(tuple(deltas), args.maxss), _rng(args))
    _emit(args, chain)
    if args.secrets_out:
        with open(args.secrets_out, "w", encoding="utf-8") as fh:
            fh.write(dumps(to_obj(mkc)) + "\n")
    return EXIT_OK


def cmd_evaluate_sc(args) -> int:
    ctx, keys, chain, mkc = load(args.field), load(args.keys), load(args.chain), load(args.secrets)
    g, grant, _ = evaluate(chain, _ints(args.coeffs), mkc, keys, ctx, args.delta, _rng(args),
                           _faults(args), args.detect)
    _emit(args, {"type": "eval-sc", "puzzle": to_obj(g), "grant": to_obj(grant), "n": to_obj(keys)["n"]})
    return EXIT_OK


def _manifest_clients(path: str) -> list:
    d = load_json(path)
    root = os.path.dirname(os.path.abspath(path))
    out = []
    try:
        for c in d["clients"]:
            def rel(k):
                return os.path.join(root, c[k])
            out.append(McClient(load(rel("chain")), load(rel("secrets")), load(rel("keys")),
                                int(c["id"]), int(c["q"])))
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"bad client manifest: {exc}") from exc
    return out


def cmd_evaluate_mc(args) -> int:
    ctx = load(args.field)
    clients = _manifest_clients(args.manifest)
    rng = _rng(args)
    rhat = bytes.fromhex(args.rhat) if args.rhat else rng.randbytes(32)
    config = select_leaders(len(clients), args.leaders, args.threshold, rhat)
    g, grants, _ = evaluate_mc(clients, config, ctx, args.delta, rng, _faults(args), args.detect)
    moduli = {str(u): to_obj(clients[u].keys)["n"] for u in config.leaders}
    _emit(args, {"type": "eval-mc", "puzzle": to_obj(g), "grants": grants_obj(grants),
                 "config": to_obj(config), "moduli": moduli})
    return EXIT_OK


def _eval_artifact(path: str, kind: str) -> dict:
    d = load_json(path)
    if d.get("type") != kind:
        raise MalformedInput(f"{path}: expected a {kind} artifact")
    return d


def cmd_solve(args) -> int:
    ctx = load(args.field)
    if args.what == "chain":
        bundle, reports = solve_chain(load(args.input), ctx)
    elif args.what == "eval-sc":
        d = _eval_artifact(args.input, "eval-sc")
        bundle, _ = solve_evaluation(from_obj(d["puzzle"]), from_obj(d["grant"]), from_hex(d["n"]), ctx)
    else:
        d = _eval_artifact(args.input, "eval-mc")
        moduli = {int(u): from_hex(v) for u, v in d["moduli"].items()}
        bundle, _ = solve_mc(from_obj(d["puzzle"]), grants_from(d["grants"]), moduli, from_obj(d["config"]), ctx)
    _emit(args, bundle)
    return EXIT_OK


def cmd_verify(args) -> int:
    bundle = load(args.bundle)
    if args.what == "client":
        chain = load(args.input)
        ok = len(bundle.solutions) == chain.z and all(
            verify_client_solution(m, mk, chain.commitments[j - 1])
            for (m, j), mk in zip(bundle.solutions, bundle.proofs) if 1 <= j <= chain.z)
    else:
        ctx = load(args.field)
        if bundle.kind != args.what or len(bundle.solutions) != 1:
            raise MalformedInput("bundle does not match --what")
        m = bundle.solutions[0][0]
        if args.what == "eval-sc":
            d = _eval_artifact(args.input, "eval-sc")
            ok = len(bundle.proofs) == 1 and verify_evaluation(
                m, bundle.proofs[0], from_obj(d["puzzle"]), from_obj(d["grant"]), ctx)
        else:
            d = _eval_artifact(args.input, "eval-mc")
            ok = verify_mc(m, bundle.proofs, from_obj(d["puzzle"]), grants_from(d["grants"]),
                           from_obj(d["config"]), ctx)
    print("accept" if ok else "reject")
    return EXIT_OK if ok else EXIT_REJECT


def cmd_bench_squaring(args) -> int:
    keys = rsa_keygen(args.rsa_bits // 2, _rng(args))
    cal = calibrate_maxss(keys.n, args.duration, args.backend)
    _emit(args, {"rate": cal.rate, "modulus_bits": cal.modulus_bits, "backend": cal.backend,
                 "squarings": cal.squarings, "seconds": round(cal.seconds, 6)})
    return EXIT_OK


def cmd_run_scenario(args) -> int:
    d = load_json(args.scenario)
    if not isinstance(d, dict):
        raise MalformedInput("scenario must be a JSON object")
    if args.faults:
        d = {**d, "faults": load_json(args.faults)}
    scenario = Scenario.from_obj(d)
    result = run_scenario(scenario)
    _emit(args, result.transcript(scenario))
    for name, verdict in result.verdicts.items():
        print(f"{name}: {verdict}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_REJECT


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mitlp", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        sp.add_argument("--seed", type=int, default=None, help="fix all coins (testing)")
        sp.add_argument("--out", help="write the JSON result here instead of stdout")
        return sp

    sp = add("setup", cmd_setup, "generate a prime field and public x-coordinates")
    sp.add_argument("--prime-bits", type=int, default=128, help="p is drawn from [2^bits, 2^(bits+1))")
    sp.add_argument("--leaders", type=int, default=1, help="leader count; coordinates = leaders + 2")
    sp.add_argument("--unsafe-small", action="store_true", help="allow p < 2^128 (tests only)")

    sp = add("keygen", cmd_keygen, "generate an RSA keypair")
    sp.add_argument("--rsa-bits", type=int, default=2048, help="modulus size")
    sp.add_argument("--deterministic-rsa", action="store_true", help="derive primes from --seed")

    sp = add("puzzle-gen", cmd_puzzle_gen, "lock messages into a puzzle chain")
    sp.add_argument("--field", required=True)
    sp.add_argument("--keys", required=True)
    sp.add_argument("--messages", required=True, help="comma-separated integers")
    sp.add_argument("--deltas", help="comma-separated intervals in seconds (default 4 each)")
    sp.add_argument("--maxss", type=int, default=1, help="squarings per second")
    sp.add_argument("--secrets-out", help="where to write the master keys")

    sp = add("evaluate-sc", cmd_evaluate_sc, "linear combination over one client's chain")
    for flag in ("--field", "--keys", "--chain", "--secrets", "--coeffs"):
        sp.add_argument(flag, required=True)
    sp.add_argument("--delta", type=int, default=0, help="evaluation delay in seconds")
    sp.add_argument("--faults", help="fault plan JSON")
    sp.add_argument("--detect", action="store_true", help="OLE sessions report injected faults")

    sp = add("evaluate-mc", cmd_evaluate_mc, "linear combination across clients")
    sp.add_argument("--field", required=True)
    sp.add_argument("--manifest", required=True, help="JSON listing each client's keys/chain/secrets/id/q")
    sp.add_argument("--leaders", type=int, default=1)
    sp.add_argument("--threshold", type=int, default=1)
    sp.add_argument("--rhat", help="hex shared random value for leader selection")
    sp.add_argument("--delta", type=int, default=0)
    sp.add_argument("--faults")
    sp.add_argument("--detect", action="store_true")

    sp = add("solve", cmd_solve, "solve a chain or an evaluation puzzle")
    sp.add_argument("--what", choices=("chain", "eval-sc", "eval-mc"), required=True)
    sp.add_argument("--field", required=True)
    sp.add_argument("--in", dest="input", required=True)

    sp = add("verify", cmd_verify, "verify a solution bundle")
    sp.add_argument("--what", choices=("client", "eval-sc", "eval-mc"), required=True)
    sp.add_argument("--field")
    sp.add_argument("--in", dest="input", required=True, help="chain or evaluation artifact")
    sp.add_argument("--bundle", required=True)

    sp = add("bench-squaring", cmd_bench_squaring, "measure squarings per second (maxss)")
    sp.add_argument("--rsa-bits", type=int, default=2048)
    sp.add_argument("--duration", type=float, default=1.0)
    sp.add_argument("--backend", choices=("auto", "python", "gmpy2"), default=None)

    sp = add("run-scenario", cmd_run_scenario, "run a JSON scenario end to end")
    sp.add_argument("scenario")
    sp.add_argument("--faults", help="fault plan JSON overriding the scenario's")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PhaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc.cause, (MalformedInput, DecodeError, FieldError)):
            return EXIT_MALFORMED
        return EXIT_INTERNAL
    except (IntegrityError, EvaluationAborted) as exc:
        print(f"reject: {exc}", file=sys.stderr)
        return EXIT_REJECT
    except (MalformedInput, DecodeError, FieldError, OSError, json.JSONDecodeError,
            KeyError, TypeError, ValueError, AttributeError) as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
