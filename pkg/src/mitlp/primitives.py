"""PRF, hash commitments, RSA parameters, squaring and the baseline time-lock puzzle."""
from __future__ import annotations

import hashlib
import hmac
import math
import secrets
from dataclasses import dataclass
from typing import Sequence

from .fieldpoly import FieldContext, is_probable_prime
from .squaring import square_block

# PRF domain tags
COORD = 0x01
BASE = 0x02
KDF = 0x03

CANCEL_STRIDE = 1 << 16
MR_ROUNDS = 64
PRF_MAX_RETRIES = 256


class SquaringCancelled(Exception):
    def __init__(self, completed: int, requested: int):
        super().__init__(f"squaring cancelled after {completed} of {requested} steps")
        self.completed = completed
        self.requested = requested


class PrfError(RuntimeError):
    pass


def default_rng():
    return secrets.SystemRandom()


# ---------------------------------------------------------------- encodings

def int_bytes(v: int) -> bytes:
    """Minimal big-endian bytes; zero encodes as the empty string."""
    if v < 0:
        raise ValueError("negative value")
    return v.to_bytes((v.bit_length() + 7) // 8, "big")


def length_prefixed(*fields: bytes) -> bytes:
    return b"".join(len(f).to_bytes(4, "big") + f for f in fields)


def key_from_int(v: int) -> bytes:
    """Adopt a ring or field element as PRF key material."""
    return length_prefixed(int_bytes(v))


def encode_prf_input(label: int, index: int) -> bytes:
    if label not in (COORD, BASE, KDF):
        raise ValueError(f"unknown PRF label {label}")
    if not 0 <= index < 1 << 64:
        raise ValueError("PRF index must fit in 8 bytes")
    msg = bytes([label]) + index.to_bytes(8, "big")
    if label == BASE:
        msg += b"\x00"  # the "||0" suffix of the base derivation
    return msg


# ---------------------------------------------------------------- PRF

def _prf_to_range(msg: bytes, key: bytes, modulus: int) -> int:
    if not key:
        raise ValueError("empty PRF key")
    blocks = math.ceil((modulus.bit_length() + 128) / 256)
    out = b"".join(
        hmac.new(key, c.to_bytes(4, "big") + msg, hashlib.sha256).digest() for c in range(blocks)
    )
    return int.from_bytes(out, "big") % modulus


def prf(label: int, index: int, key: bytes, ctx: FieldContext) -> int:
    return _prf_to_range(encode_prf_input(label, index), key, ctx.p)


# test hook: number of leading samples prf_nonzero treats as zero
_force_zero_samples = 0


def _nonzero_sample(msg: bytes, key: bytes, modulus: int, accept) -> int:
    for counter in range(PRF_MAX_RETRIES):
        m = msg if counter == 0 else msg + bytes([counter])
        v = _prf_to_range(m, key, modulus)
        if counter < _force_zero_samples:
            v = 0
        if accept(v):
            return v
    raise PrfError("PRF kept producing unusable values")


def prf_nonzero(label: int, index: int, key: bytes, ctx: FieldContext) -> int:
    return _nonzero_sample(encode_prf_input(label, index), key, ctx.p, lambda v: v != 0)


def derive_base(j: int, prev_mk: int, n: int) -> int:
    """Base r_j of puzzle j, derived from the previous master key.

    The PRF output is reduced mod N (not mod p) so it is a proper ring
    element whatever the relative sizes of p and N.
    """
    msg = encode_prf_input(BASE, j)
    return _nonzero_sample(msg, key_from_int(prev_mk), n, lambda v: v > 1 and math.gcd(v, n) == 1)


# ---------------------------------------------------------------- commitment

@dataclass(frozen=True)
class Commitment:
    digest: bytes

    def __post_init__(self):
        if len(self.digest) != 32:
            raise ValueError("commitment digest must be 32 bytes")


def commit(message: bytes, opening: bytes) -> Commitment:
    return Commitment(hashlib.sha256(length_prefixed(message, opening)).digest())


def verify_commit(com: Commitment, message: bytes, opening: bytes) -> bool:
    return hmac.compare_digest(commit(message, opening).digest, com.digest)


def commit_ints(m: int, r: int) -> Commitment:
    return commit(int_bytes(m), int_bytes(r))


def verify_commit_ints(com: Commitment, m: int, r: int) -> bool:
    if m < 0 or r < 0:
        return False
    return verify_commit(com, int_bytes(m), int_bytes(r))


# ---------------------------------------------------------------- RSA

@dataclass(frozen=True)
class RsaKeypair:
    n: int
    phi: int
    primes: tuple

    @property
    def public(self) -> int:
        return self.n


def _random_prime(bits: int, rng) -> int:
    while True:
        c = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        if is_probable_prime(c, MR_ROUNDS, rng):
            return c


def rsa_keygen(bits: int, rng=None) -> RsaKeypair:
    """Two random ``bits``-bit primes; N has 2*bits (or 2*bits-1) bits."""
    if bits < 16:
        raise ValueError("prime size below 16 bits is not supported")
    rng = rng or default_rng()
    p1 = _random_prime(bits, rng)
    p2 = _random_prime(bits, rng)
    while p2 == p1:
        p2 = _random_prime(bits, rng)
    return RsaKeypair(n=p1 * p2, phi=(p1 - 1) * (p2 - 1), primes=(p1, p2))


def random_unit(n: int, rng) -> int:
    """Uniform element of Z_N^* other than 1."""
    while True:
        r = rng.randrange(2, n)
        if math.gcd(r, n) == 1:
            return r


def trapdoor_power(base: int, T: int, keys: RsaKeypair) -> int:
    """base^(2^T) mod N through the totient shortcut."""
    if not 1 <= base < keys.n:
        raise ValueError("base not in [1, N)")
    if T < 0:
        raise ValueError("negative squaring count")
    a = pow(2, T, keys.phi)
    if T >= keys.phi.bit_length():
        # keep the exponent positive so non-units of a squarefree N agree too
        a += keys.phi
    return pow(base, a, keys.n)


@dataclass(frozen=True)
class SquaringReport:
    result: int
    squarings_performed: int


def sequential_square(base: int, T: int, n: int, cancel=None, backend: str | None = None) -> SquaringReport:
    """base^(2^T) mod n by T explicit squarings.

    ``cancel`` is any object with ``is_set()`` (e.g. ``threading.Event``);
    it is polled every ``CANCEL_STRIDE`` squarings.
    """
    if not 1 <= base < n:
        raise ValueError("base not in [1, N)")
    if T < 0:
        raise ValueError("negative squaring count")
    x, done = base, 0
    while done < T:
        if cancel is not None and cancel.is_set():
            raise SquaringCancelled(done, T)
        step = min(CANCEL_STRIDE, T - done)
        x = square_block(x, step, n, backend)
        done += step
    return SquaringReport(result=x, squarings_performed=done)


# ---------------------------------------------------------------- baseline TLP

@dataclass(frozen=True)
class BaselinePuzzle:
    n: int
    T: int
    r: int
    o1: bytes
    o2: int


def _keystream(k: int, length: int) -> bytes:
    key = key_from_int(k)
    out = b""
    counter = 0
    while len(out) < length:
        out += hmac.new(key, counter.to_bytes(8, "big"), hashlib.sha256).digest()
        counter += 1
    return out[:length]


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def baseline_tlp_generate(m: bytes, delta: int, maxss: int, keys: RsaKeypair, rng=None) -> BaselinePuzzle:
    """Single RSA time-lock puzzle opening after maxss*delta squarings."""
    rng = rng or default_rng()
    T = maxss * delta
    if T < 0:
        raise ValueError("negative delay")
    k = rng.randrange(keys.n)
    r = random_unit(keys.n, rng)
    o1 = _xor(m, _keystream(k, len(m)))
    o2 = (k + trapdoor_power(r, T, keys)) % keys.n
    return BaselinePuzzle(n=keys.n, T=T, r=r, o1=o1, o2=o2)


def baseline_tlp_solve(puzzle: BaselinePuzzle, cancel=None) -> tuple:
    if not (1 <= puzzle.r < puzzle.n and 0 <= puzzle.o2 < puzzle.n and puzzle.T >= 0):
        raise ValueError("malformed baseline puzzle")
    rep = sequential_square(puzzle.r, puzzle.T, puzzle.n, cancel)
    k = (puzzle.o2 - rep.result) % puzzle.n
    return _xor(puzzle.o1, _keystream(k, len(puzzle.o1))), rep


def total_squarings(reports: Sequence[SquaringReport]) -> int:
    return sum(r.squarings_performed for r in reports)
