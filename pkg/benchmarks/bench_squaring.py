"""Compare sequential-squaring throughput of the available backends.

Usage: python3 benchmarks/bench_squaring.py [--bits 512 1024 2048] [--count 100000]
"""
import argparse
import random
import time

from mitlp.primitives import rsa_keygen
from mitlp.squaring import available_backends, square_block


def time_backend(backend: str, n: int, count: int) -> float:
    x = random.Random(0).randrange(2, n)
    start = time.perf_counter()
    square_block(x, count, n, backend)
    return time.perf_counter() - start


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--bits", type=int, nargs="+", default=[512, 1024, 2048], help="modulus sizes")
    ap.add_argument("--count", type=int, default=100_000, help="squarings per measurement")
    args = ap.parse_args()
    backends = available_backends()
    print(f"{'bits':>6} " + " ".join(f"{b:>12}" for b in backends) + "   (seconds per run)")
    for bits in args.bits:
        n = rsa_keygen(bits // 2, random.Random(bits)).n
        times = [time_backend(b, n, args.count) for b in backends]
        print(f"{bits:>6} " + " ".join(f"{t:>12.3f}" for t in times))


if __name__ == "__main__":
    main()
