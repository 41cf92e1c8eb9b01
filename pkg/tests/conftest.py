import os
import random
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from mitlp.fieldpoly import field_ctx_new, setup_field  # noqa: E402
from mitlp.primitives import rsa_keygen  # noqa: E402

# smallest prime above 2^128
P128 = 2**128 + 51

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture(scope="session")
def ctx3():
    return field_ctx_new(P128, 3)


@pytest.fixture(scope="session")
def ctx97():
    return field_ctx_new(97, 3, allow_small=True)


@pytest.fixture(scope="session")
def keys512():
    return rsa_keygen(256, random.Random(99))


@pytest.fixture(scope="session")
def keys_small():
    return rsa_keygen(40, random.Random(7))


def make_ctx(tbar, bits=128, seed=0):
    return setup_field(bits, tbar, random.Random(seed))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
