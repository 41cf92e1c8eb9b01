import random

import pytest
from hypothesis import given, settings, strategies as st

from mitlp.faults import FaultPlan
from mitlp.ole import (
    OleInputError, OleMisbehaviour, OleReceiverInput, OleSenderInput, ideal_ole, ole_plus,
)
from conftest import P128


def test_ideal_examples(ctx97):
    assert ideal_ole(OleSenderInput(3, 4), OleReceiverInput(5), ctx97) == 19
    assert ideal_ole(OleSenderInput(0, 8), OleReceiverInput(77), ctx97) == 8


def test_ideal_matches_direct(ctx3, rng):
    p = ctx3.p
    for _ in range(100):
        a, b, c = (rng.randrange(p) for _ in range(3))
        assert ideal_ole(OleSenderInput(a, b), OleReceiverInput(c), ctx3) == (a * c + b) % p


def test_ole_plus_examples(ctx97, rng):
    s, tr = ole_plus(OleSenderInput(3, 4), OleReceiverInput(5), ctx97, rng=rng)
    assert s == 19 and len(tr) == 2
    s, _ = ole_plus(OleSenderInput(10, 20), OleReceiverInput(1), ctx97, rng=rng)
    assert s == 30


def test_ole_plus_transcript_shape(ctx97):
    r = random.Random(0)
    s, tr = ole_plus(OleSenderInput(3, 4), OleReceiverInput(5), ctx97, rng=r)
    first, second = tr.calls
    c_inv = pow(5, -1, 97)
    assert first.fid == 1 and first.sender_role == "receiver" and first.sender_inputs[0] == c_inv
    assert second.fid == 2 and second.receiver_input == 5
    # the receiver's mask r is the first call's b-slot; k - r*c must be the output
    assert (second.output - first.sender_inputs[1] * 5) % 97 == s


def test_ole_plus_rejects_zero(ctx97):
    with pytest.raises(OleInputError):
        ole_plus(OleSenderInput(1, 2), OleReceiverInput(0), ctx97)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, P128 - 1), st.integers(0, P128 - 1), st.integers(1, P128 - 1), st.integers(0, 2**32))
def test_ole_plus_equals_ideal(a, b, c, seed):
    from mitlp.fieldpoly import field_ctx_new
    ctx = field_ctx_new(P128, 3)
    s, _ = ole_plus(OleSenderInput(a, b), OleReceiverInput(c), ctx, rng=random.Random(seed))
    assert s == (a * c + b) % P128


def test_transcript_values_vary(ctx3):
    r = random.Random(5)
    ts = set()
    for _ in range(1000):
        _, tr = ole_plus(OleSenderInput(3, 4), OleReceiverInput(5), ctx3, rng=r)
        ts.add(tr.calls[0].output)
    assert len(ts) >= 990


def test_fault_on_second_b_slot_shifts_output(ctx3, rng):
    s, _ = ole_plus(OleSenderInput(3, 4), OleReceiverInput(5), ctx3, FaultPlan("ole2.b", delta=17), rng)
    assert s == 19 + 17


@pytest.mark.parametrize("slot", ["ole1.a", "ole1.b", "ole1.c", "ole2.a", "ole2.c"])
def test_other_faults_corrupt_output(ctx3, slot):
    s, _ = ole_plus(OleSenderInput(3, 4), OleReceiverInput(5), ctx3, FaultPlan(slot, delta=1), random.Random(2))
    assert s != 19


def test_fault_detected_when_verifying(ctx3, rng):
    with pytest.raises(OleMisbehaviour):
        ole_plus(OleSenderInput(3, 4), OleReceiverInput(5), ctx3, FaultPlan("ole2.b", delta=1), rng, verifying=True)
    # verifying without a fault is a normal run
    assert ole_plus(OleSenderInput(3, 4), OleReceiverInput(5), ctx3, None, rng, verifying=True)[0] == 19
