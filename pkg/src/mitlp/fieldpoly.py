"""Prime-field arithmetic and small dense/point-value polynomials.

Polynomials never carry their modulus. Every operation takes a
``FieldContext`` so values from two different fields cannot be mixed by
accident.
"""
from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

# Messages live in [0, MESSAGE_BOUND). The public x-coordinates sit just above it.
MESSAGE_BOUND = 1 << 64
DEFAULT_MIN_BITS = 128

_HEX = re.compile("[0-9a-f]+")
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71)


class FieldError(ValueError):
    """Invalid field parameters or an operation outside its domain."""


def is_probable_prime(n: int, rounds: int = 64, rng=None) -> bool:
    """Miller-Rabin with ``rounds`` random bases (deterministic rng by default)."""
    if n < 2:
        return False
    for sp in _SMALL_PRIMES:
        if n % sp == 0:
            return n == sp
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if rng is None:
        rng = random.Random(n)
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldContext:
    p: int
    xs: tuple
    # messages must be < u_bound; equals MESSAGE_BOUND except for test-scale fields
    u_bound: int = MESSAGE_BOUND

    @property
    def tbar(self) -> int:
        return len(self.xs)

    @property
    def tddot(self) -> int:
        return len(self.xs) - 2

    def in_universe(self, m: int) -> bool:
        return 0 <= m < self.u_bound


def field_ctx_new(p: int, tbar: int, min_bits: int = DEFAULT_MIN_BITS, allow_small: bool = False) -> FieldContext:
    """Build a field context with ``tbar`` public x-coordinates.

    ``allow_small=True`` skips the size check. It exists for oracle tests
    over tiny fields and must not be used for anything real.
    """
    if tbar < 3:
        raise FieldError("tbar must be at least 3")
    if not is_probable_prime(p):
        raise FieldError(f"{p} is not prime")
    if not allow_small and p < (1 << min_bits):
        raise FieldError(f"p must be at least 2^{min_bits}")
    if p > MESSAGE_BOUND + tbar:
        bound = MESSAGE_BOUND
    else:
        # shrink the universe so the coordinates still fit between it and p
        bound = p - tbar - 1
        if bound < 1:
            raise FieldError("p too small to host tbar coordinates outside the message universe")
    xs = tuple((bound + 1 + i) % p for i in range(tbar))
    return FieldContext(p=p, xs=xs, u_bound=bound)


def random_prime(bits: int, rng) -> int:
    """Random prime in [2^bits, 2^(bits+1))."""
    while True:
        c = rng.getrandbits(bits) | (1 << bits) | 1
        if is_probable_prime(c):
            return c


def setup_field(prime_bits: int, tbar: int, rng, allow_small: bool = False) -> FieldContext:
    p = random_prime(prime_bits, rng)
    return field_ctx_new(p, tbar, min_bits=min(prime_bits, DEFAULT_MIN_BITS), allow_small=allow_small)


def inv(a: int, ctx: FieldContext) -> int:
    a %= ctx.p
    if a == 0:
        raise FieldError("zero has no inverse")
    return pow(a, -1, ctx.p)


# ---------------------------------------------------------------- dense polys

@dataclass(frozen=True)
class DensePoly:
    """Coefficients lowest degree first, trailing zeros stripped."""
    coeffs: tuple = ()

    def __post_init__(self):
        c = tuple(self.coeffs)
        while c and c[-1] == 0:
            c = c[:-1]
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def constant(self) -> int:
        return self.coeffs[0] if self.coeffs else 0


def poly(coeffs: Iterable[int], ctx: FieldContext) -> DensePoly:
    return DensePoly(tuple(c % ctx.p for c in coeffs))


def poly_eval(f: DensePoly, x: int, ctx: FieldContext) -> int:
    p = ctx.p
    acc = 0
    for c in reversed(f.coeffs):
        acc = (acc * x + c) % p
    return acc


def poly_add(f: DensePoly, g: DensePoly, ctx: FieldContext) -> DensePoly:
    n = max(len(f.coeffs), len(g.coeffs))
    a = f.coeffs + (0,) * (n - len(f.coeffs))
    b = g.coeffs + (0,) * (n - len(g.coeffs))
    return DensePoly(tuple((x + y) % ctx.p for x, y in zip(a, b)))


def poly_sub(f: DensePoly, g: DensePoly, ctx: FieldContext) -> DensePoly:
    return poly_add(f, poly_scale(g, -1, ctx), ctx)


def poly_scale(f: DensePoly, a: int, ctx: FieldContext) -> DensePoly:
    return DensePoly(tuple(c * a % ctx.p for c in f.coeffs))


def poly_mul(f: DensePoly, g: DensePoly, ctx: FieldContext) -> DensePoly:
    if f.is_zero() or g.is_zero():
        return DensePoly()
    out = [0] * (len(f.coeffs) + len(g.coeffs) - 1)
    for i, a in enumerate(f.coeffs):
        if a:
            for j, b in enumerate(g.coeffs):
                out[i + j] += a * b
    return DensePoly(tuple(c % ctx.p for c in out))


def poly_divmod(f: DensePoly, g: DensePoly, ctx: FieldContext):
    if g.is_zero():
        raise FieldError("division by the zero polynomial")
    p = ctx.p
    rem = list(f.coeffs)
    dg = g.degree
    lead_inv = pow(g.coeffs[-1], -1, p)
    if len(rem) <= dg:
        return DensePoly(), DensePoly(tuple(rem))
    quot = [0] * (len(rem) - dg)
    for k in range(len(rem) - 1, dg - 1, -1):
        c = rem[k] * lead_inv % p
        if c == 0:
            continue
        quot[k - dg] = c
        for i, b in enumerate(g.coeffs):
            rem[k - dg + i] = (rem[k - dg + i] - c * b) % p
    return DensePoly(tuple(quot)), DensePoly(tuple(rem[:dg]))


def poly_mod(f: DensePoly, g: DensePoly, ctx: FieldContext) -> DensePoly:
    return poly_divmod(f, g, ctx)[1]


def poly_monic(f: DensePoly, ctx: FieldContext) -> DensePoly:
    if f.is_zero():
        return f
    return poly_scale(f, pow(f.coeffs[-1], -1, ctx.p), ctx)


def poly_gcd(f: DensePoly, g: DensePoly, ctx: FieldContext) -> DensePoly:
    while not g.is_zero():
        f, g = g, poly_mod(f, g, ctx)
    return poly_monic(f, ctx)


def poly_powmod(base: DensePoly, e: int, modulus: DensePoly, ctx: FieldContext) -> DensePoly:
    result = DensePoly((1,))
    base = poly_mod(base, modulus, ctx)
    while e:
        if e & 1:
            result = poly_mod(poly_mul(result, base, ctx), modulus, ctx)
        e >>= 1
        if e:
            base = poly_mod(poly_mul(base, base, ctx), modulus, ctx)
    return poly_mod(result, modulus, ctx)


def poly_from_roots(roots: Iterable[int], ctx: FieldContext) -> DensePoly:
    out = DensePoly((1,))
    for r in roots:
        out = poly_mul(out, DensePoly(((-r) % ctx.p, 1)), ctx)
    return out


# ---------------------------------------------------------------- point-value

@dataclass(frozen=True)
class PointValuePoly:
    points: tuple  # ((x, y), ...)

    @property
    def xs(self) -> tuple:
        return tuple(x for x, _ in self.points)

    @property
    def ys(self) -> tuple:
        return tuple(y for _, y in self.points)


def point_values(xs: Sequence[int], ys: Sequence[int], ctx: FieldContext) -> PointValuePoly:
    if len(xs) != len(ys):
        raise FieldError("xs and ys differ in length")
    return PointValuePoly(tuple((x % ctx.p, y % ctx.p) for x, y in zip(xs, ys)))


def eval_at_xs(f: DensePoly, ctx: FieldContext, xs: Sequence[int] | None = None) -> PointValuePoly:
    xs = ctx.xs if xs is None else xs
    return PointValuePoly(tuple((x, poly_eval(f, x, ctx)) for x in xs))


def scale_points(pts: PointValuePoly, a: int, ctx: FieldContext) -> PointValuePoly:
    return PointValuePoly(tuple((x, y * a % ctx.p) for x, y in pts.points))


def interpolate(pts: PointValuePoly, ctx: FieldContext) -> DensePoly:
    """Lagrange interpolation through every point."""
    p = ctx.p
    xs = [x % p for x in pts.xs]
    if not xs:
        raise FieldError("need at least one point")
    if len(set(xs)) != len(xs):
        raise FieldError("duplicate x values")
    n = len(xs)
    # full product (x - x_0)...(x - x_{n-1}); each basis numerator is it divided by (x - x_k)
    full = [1]
    for x0 in xs:
        nxt = [0] * (len(full) + 1)
        for i, c in enumerate(full):
            nxt[i + 1] = (nxt[i + 1] + c) % p
            nxt[i] = (nxt[i] - c * x0) % p
        full = nxt
    out = [0] * n
    for k, (xk, yk) in enumerate(zip(xs, pts.ys)):
        if yk % p == 0:
            continue
        # synthetic division of `full` by (x - xk)
        num = [0] * n
        carry = 0
        for i in range(n, 0, -1):
            carry = (full[i] + carry * xk) % p
            num[i - 1] = carry
        denom = 1
        for j, xj in enumerate(xs):
            if j != k:
                denom = denom * (xk - xj) % p
        scale = yk * pow(denom, -1, p) % p
        for i in range(n):
            out[i] = (out[i] + num[i] * scale) % p
    return DensePoly(tuple(out))


# ---------------------------------------------------------------- roots

def _split_rng(f: DensePoly) -> random.Random:
    # deterministic coins derived from the input keeps find_roots a pure function
    h = hashlib.sha256(",".join(map(str, f.coeffs)).encode()).digest()
    return random.Random(h)


def _equal_degree_split(g: DensePoly, ctx: FieldContext, rng: random.Random, out: set) -> None:
    """Collect the roots of ``g``, a monic product of distinct linear factors."""
    p = ctx.p
    stack = [g]
    while stack:
        f = stack.pop()
        if f.degree <= 0:
            continue
        if f.degree == 1:
            out.add((-f.coeffs[0]) % p)
            continue
        while True:
            a = rng.randrange(p)
            h = poly_powmod(DensePoly((a, 1)), (p - 1) // 2, f, ctx)
            d = poly_gcd(f, poly_sub(h, DensePoly((1,)), ctx), ctx)
            if 0 < d.degree < f.degree:
                stack.append(d)
                stack.append(poly_divmod(f, d, ctx)[0])
                break


def find_roots(f: DensePoly, ctx: FieldContext) -> set:
    """All roots of ``f`` in F_p."""
    if f.is_zero():
        raise FieldError("the zero polynomial has every element as a root")
    p = ctx.p
    if f.degree == 0:
        return set()
    f = poly_monic(f, ctx)
    if p == 2:
        return {r for r in (0, 1) if poly_eval(f, r, ctx) == 0}
    x = DensePoly((0, 1))
    xp = poly_powmod(x, p, f, ctx)
    g = poly_gcd(f, poly_sub(xp, x, ctx), ctx)
    roots: set = set()
    _equal_degree_split(g, ctx, _split_rng(f), roots)
    for r in roots:
        assert poly_eval(f, r, ctx) == 0
    return roots


# ---------------------------------------------------------------- hex codec

def to_hex(v: int) -> str:
    if v < 0:
        raise FieldError("negative values have no hex encoding")
    return format(v, "x")


def from_hex(s: str) -> int:
    if not isinstance(s, str) or not s:
        raise FieldError(f"bad hex value {s!r}")
    if not _HEX.fullmatch(s) or (len(s) > 1 and s[0] == "0"):
        raise FieldError(f"non-canonical hex value {s!r}")
    return int(s, 16)
