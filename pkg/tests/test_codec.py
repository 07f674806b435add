from __future__ import annotations

import random

import numpy as np
import pytest

from idos.codec import (
    DecodeFailure,
    DecoderState,
    EncoderState,
    OutOfOrderSlot,
    RecoveredWindow,
    SlotsLost,
    ViolationDetected,
    build_decode_window,
)
from idos.constructions import make_spec
from idos.debt import ViolationKind, WindowPattern

SPEC, CTX = make_spec("A", 4, 2, 1, 2)


def test_zero_messages_give_zero_codewords():
    enc = EncoderState(SPEC, CTX)
    assert all(enc.step([0, 0]) == [0, 0, 0, 0] for _ in range(5))


def test_first_two_codewords():
    enc = EncoderState(SPEC, CTX)
    a = CTX.pow_alpha
    assert enc.step([1, 0]) == [1, a(1), a(2), a(3)]
    assert enc.step([0, 0]) == [a(6), a(4), a(2), 1]


def test_no_erasures_recovers_every_slot():
    enc, dec = EncoderState(SPEC, CTX), DecoderState(SPEC, CTX)
    rng = random.Random(1)
    for t in range(1, 8):
        s = [rng.getrandbits(37) for _ in range(2)]
        c = enc.step(s)
        ev = dec.ingest(t, list(enumerate(c)))
        assert ev == [RecoveredWindow(t, (t,), (tuple(s),), False, t - 1)]


def run(pattern_sets, seed=0, prefix=0):
    enc, dec = EncoderState(SPEC, CTX), DecoderState(SPEC, CTX)
    rng = np.random.default_rng(seed)
    sent, events = [], []
    plan = [range(4)] * prefix + list(pattern_sets)
    for t, rs in enumerate(plan, start=1):
        s = [CTX.random_int(rng) for _ in range(2)]
        sent.append(s)
        c = enc.step(s)
        events.append(dec.ingest(t, [(j, c[j]) for j in rs]))
    return sent, events


def test_zero_four_window_recovers_at_second_slot():
    sent, events = run([(), (0, 1, 2, 3)])
    assert events[0] == []
    (ev,) = events[1]
    assert ev.slots == (1, 2) and not ev.best_effort
    assert [list(m) for m in ev.messages] == sent


def test_window_after_clean_prefix():
    sent, events = run([(0,), (1, 2, 3)], prefix=2)
    (ev,) = events[-1]
    assert ev.slots == (3, 4) and [list(m) for m in ev.messages] == sent[2:]


def test_violation_events():
    _, events = run([(0,), (0,), (0,), (0,)])
    flat = [e for evs in events for e in evs if isinstance(e, ViolationDetected)]
    assert ViolationDetected(3, ViolationKind.DEBT_EXCEEDED) in flat
    assert ViolationDetected(4, ViolationKind.DELAY_EXCEEDED) in flat


def test_best_effort_after_violation():
    # long burst then full slots: memory 1 lets later slots be recovered again
    _, events = run([(), (), (), (), (0, 1, 2, 3), (0, 1, 2, 3), (0, 1, 2, 3)])
    flat = [e for evs in events for e in evs]
    assert any(isinstance(e, SlotsLost) for e in flat)
    assert any(isinstance(e, RecoveredWindow) and e.best_effort for e in flat)


def test_singular_window_reports_decode_failure():
    # the one singular worst-case window of this code
    _, events = run([(0,), (3,), (0, 1, 2, 3)])
    assert any(isinstance(e, DecodeFailure) for e in events[-1])


def test_out_of_order_slot():
    dec = DecoderState(SPEC, CTX)
    dec.ingest(2, [])
    with pytest.raises(OutOfOrderSlot):
        dec.ingest(2, [])


def test_decode_window_rows():
    M = build_decode_window(SPEC, WindowPattern((0, 4), ((), (0, 1, 2, 3))))
    m1, m0 = SPEC.block(1), SPEC.block(0)
    assert [list(r) for r in M.entries] == [list(m1.entries[i]) + list(m0.entries[i]) for i in range(4)]
    M = build_decode_window(SPEC, WindowPattern((1, 3), ((0,), (0, 1, 2))))
    from idos.constructions import build_stacked_exponents
    S = build_stacked_exponents(SPEC, 2)
    assert M == S.select([0, 4, 5, 6])


def test_event_json():
    ev = RecoveredWindow(2, (1, 2), ((1, 0), (0, 1)))
    obj = ev.to_json(CTX)
    assert obj["event"] == "recovered" and obj["slots"] == [1, 2]
    assert obj["messages"][0] == [CTX.to_hex(1), CTX.to_hex(0)]
    assert ViolationDetected(4, ViolationKind.DELAY_EXCEEDED).to_json() == {
        "event": "violation", "t": 4, "kind": "DelayExceeded"}
