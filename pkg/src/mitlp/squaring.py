"""Repeated modular squaring backends.

``MITLP_SQUARING_BACKEND`` picks the inner loop: ``python`` (builtin ints),
``gmpy2`` (GMP via gmpy2) or ``auto`` (gmpy2 when importable, the default).
Both backends return plain Python ints and perform the same count of
squarings, so counts and results never depend on the choice.
"""
from __future__ import annotations

import os

try:  # optional accelerator
    import gmpy2
except ImportError:  # pragma: no cover - exercised only where gmpy2 is missing
    gmpy2 = None

ENV_VAR = "MITLP_SQUARING_BACKEND"


def available_backends() -> list:
    return ["python"] + (["gmpy2"] if gmpy2 is not None else [])


def resolve_backend(name: str | None = None) -> str:
    name = (name or os.environ.get(ENV_VAR) or "auto").lower()
    if name == "auto":
        return "gmpy2" if gmpy2 is not None else "python"
    if name == "gmpy2" and gmpy2 is None:
        raise RuntimeError("gmpy2 backend requested but gmpy2 is not installed")
    if name not in ("python", "gmpy2"):
        raise ValueError(f"unknown squaring backend {name!r}")
    return name


def _square_python(x: int, count: int, n: int) -> int:
    for _ in range(count):
        x = x * x % n
    return x


def _square_gmpy2(x: int, count: int, n: int) -> int:
    xm, nm = gmpy2.mpz(x), gmpy2.mpz(n)
    for _ in range(count):
        xm = xm * xm % nm
    return int(xm)


def square_block(x: int, count: int, n: int, backend: str | None = None) -> int:
    """``x^(2^count) mod n`` by ``count`` explicit squarings."""
    if resolve_backend(backend) == "gmpy2":
        return _square_gmpy2(x, count, n)
    return _square_python(x, count, n)
