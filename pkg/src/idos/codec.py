"""Time-invariant convolutional encoding and the sliding-window decoder.

The decoder keeps one equation per received symbol over the message
vectors it has not recovered yet. While the current window is clean (all
earlier messages in memory range known, no debt violation), it solves
exactly when the information debt returns to zero. After a violation it
switches to best effort: anything the pending system pins down is
released as soon as it is determined, and slots that can no longer be
determined are reported lost once they fall out of the encoder memory.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .constructions import GeneratorSpec, build_stacked_exponents
from .debt import DebtState, ViolationKind, WindowPattern, debt_step
from .exponents import ExponentMatrix, lift
from .field import FieldCtx
from .linalg import Inconsistent, solve_partial


class OutOfOrderSlot(ValueError):
    pass


def lifted_blocks(spec: GeneratorSpec, ctx: FieldCtx) -> list[list[list[int]]]:
    """``blocks[lag][i][j]`` = alpha^M^(lag)(i, j) as raw ints."""
    if ctx.degree != spec.degree:
        raise ValueError(f"context degree {ctx.degree} != spec degree {spec.degree}")
    return [lift(spec.block(lag), ctx).row_lists() for lag in range(spec.params.m + 1)]


class EncoderState:
    """Slot-by-slot encoder; history starts as all-zero messages."""

    def __init__(self, spec: GeneratorSpec, ctx: FieldCtx):
        self.spec = spec
        self.ctx = ctx
        self.blocks = lifted_blocks(spec, ctx)
        k, m = spec.params.k, spec.params.m
        self.history: deque[list[int]] = deque([[0] * k for _ in range(m)], maxlen=m)
        self.t = 0

    def step(self, s_t: Sequence[int]) -> list[int]:
        p = self.spec.params
        if len(s_t) != p.k:
            raise ValueError(f"message vector must have length {p.k}")
        mul = self.ctx.mul
        # history[-1] is s(t-1); lag 0 is the current message
        inputs = [list(s_t)] + list(reversed(self.history))
        c = [0] * p.n
        for lag, s in enumerate(inputs):
            block = self.blocks[lag]
            for i in range(p.n):
                acc = c[i]
                row = block[i]
                for j in range(p.k):
                    if row[j] and s[j]:
                        acc ^= mul(row[j], s[j])
                c[i] = acc
        self.history.append(list(s_t))
        self.t += 1
        return c


def encode_step(state: EncoderState, s_t: Sequence[int]) -> list[int]:
    return state.step(s_t)


def build_decode_window(spec: GeneratorSpec, pattern: WindowPattern) -> ExponentMatrix:
    """Rows of the ell-slot stacked exponent matrix picked by the received sets."""
    if pattern.received_sets is None:
        raise ValueError("pattern needs received sets")
    n = spec.params.n
    stacked = build_stacked_exponents(spec, pattern.ell)
    rows = [t * n + j for t, rs in enumerate(pattern.received_sets) for j in sorted(rs)]
    return stacked.select(rows)


# -- decoder events ----------------------------------------------------------


@dataclass(frozen=True)
class RecoveredWindow:
    slot: int  # decode time
    slots: tuple[int, ...]
    messages: tuple[tuple[int, ...], ...]
    best_effort: bool = False
    window_start: int = 0  # theta_i; the window covers slots after it

    def to_json(self, ctx: FieldCtx) -> dict:
        return {"event": "recovered", "t": self.slot, "slots": list(self.slots),
                "messages": [[ctx.to_hex(v) for v in msg] for msg in self.messages],
                "best_effort": self.best_effort}


@dataclass(frozen=True)
class ViolationDetected:
    slot: int
    kind: ViolationKind

    def to_json(self, ctx: FieldCtx | None = None) -> dict:
        return {"event": "violation", "t": self.slot, "kind": self.kind.value}


@dataclass(frozen=True)
class DecodeFailure:
    """Debt reached zero on a clean window but the system was singular."""

    slot: int
    slots: tuple[int, ...]

    def to_json(self, ctx: FieldCtx | None = None) -> dict:
        return {"event": "decode_failure", "t": self.slot, "slots": list(self.slots)}


@dataclass(frozen=True)
class SlotsLost:
    slot: int
    slots: tuple[int, ...]

    def to_json(self, ctx: FieldCtx | None = None) -> dict:
        return {"event": "lost", "t": self.slot, "slots": list(self.slots)}


Event = Union[RecoveredWindow, ViolationDetected, DecodeFailure, SlotsLost]


@dataclass
class _Equation:
    coeffs: dict[tuple[int, int], int]  # (slot, message index) -> coefficient
    rhs: int


class DecoderState:
    """Streaming decoder; feed slots in order with :meth:`ingest`."""

    def __init__(self, spec: GeneratorSpec, ctx: FieldCtx, horizon: Optional[int] = None):
        self.spec = spec
        self.ctx = ctx
        self.blocks = lifted_blocks(spec, ctx)
        p = spec.params
        # undetermined slots older than this are given up in best-effort mode
        self.horizon = p.tau + 1 + p.m if horizon is None else horizon
        self.debt = DebtState()
        self.t = 0
        self.known: dict[int, tuple[int, ...]] = {}
        self.lost: set[int] = set()
        self.unknown: list[int] = []
        self.equations: list[_Equation] = []
        self.window_start = 0
        self.window_clean = True

    @property
    def pending(self) -> list[int]:
        return list(self.unknown)

    @property
    def best_effort(self) -> bool:
        return not self.window_clean or bool(self.debt.violations and self.debt.debt > 0)

    def ingest(self, t: int, received: Iterable[tuple[int, int]]) -> list[Event]:
        """Consume slot ``t``'s surviving symbols as (0-based index, value)."""
        if t <= self.t:
            raise OutOfOrderSlot(f"slot {t} after slot {self.t}")
        events: list[Event] = []
        while self.t + 1 < t:
            events.extend(self._ingest_one(self.t + 1, []))
        events.extend(self._ingest_one(t, list(received)))
        return events

    def _ingest_one(self, t: int, received: list[tuple[int, int]]) -> list[Event]:
        p = self.spec.params
        mul = self.ctx.mul
        self.t = t
        self.unknown.append(t)
        if len({j for j, _ in received}) != len(received):
            raise ValueError("duplicate symbol index in slot")
        for j, val in received:
            if not 0 <= j < p.n:
                raise ValueError(f"symbol index {j} outside [0, {p.n})")
            eq = _Equation({}, val)
            usable = True
            for lag in range(p.m + 1):
                s = t - lag
                if s < 1:
                    continue
                row = self.blocks[lag][j]
                if s in self.known:
                    msg = self.known[s]
                    for q in range(p.k):
                        if row[q] and msg[q]:
                            eq.rhs ^= mul(row[q], msg[q])
                elif s in self.lost:
                    usable = False
                    break
                else:
                    for q in range(p.k):
                        if row[q]:
                            eq.coeffs[(s, q)] = row[q]
            if usable:
                self.equations.append(eq)

        before = {v for v in self.debt.violations} if self.debt.debt > 0 else set()
        self.debt = debt_step(self.debt, len(received), p)
        events: list[Event] = [ViolationDetected(slot, kind) for kind, slot in self.debt.violations
                               if (kind, slot) not in before]

        if self.debt.debt == 0:
            events.extend(self._close_window())
        elif self.best_effort:
            events.extend(self._best_effort_pass(final=False))
        return events

    # -- solving ---------------------------------------------------------

    def _variables(self) -> list[tuple[int, int]]:
        k = self.spec.params.k
        return [(s, q) for s in self.unknown for q in range(k)]

    def _determined(self) -> dict[tuple[int, int], int]:
        variables = self._variables()
        if not variables or not self.equations:
            return {}
        index = {v: i for i, v in enumerate(variables)}
        rows = []
        for eq in self.equations:
            row = [0] * len(variables)
            for v, c in eq.coeffs.items():
                row[index[v]] = c
            rows.append(row)
        try:
            sol = solve_partial(self.ctx, rows, [eq.rhs for eq in self.equations])
        except Inconsistent:
            return {}
        return {variables[i]: val for i, val in sol.items()}

    def _release(self, slots: list[int], values: dict[tuple[int, int], int]) -> None:
        k = self.spec.params.k
        mul = self.ctx.mul
        for s in slots:
            msg = tuple(values[(s, q)] for q in range(k))
            self.known[s] = msg
            self.unknown.remove(s)
        done = set(slots)
        remaining = []
        for eq in self.equations:
            for v in [v for v in eq.coeffs if v[0] in done]:
                c = eq.coeffs.pop(v)
                val = values[v]
                if val:
                    eq.rhs ^= mul(c, val)
            if eq.coeffs:
                remaining.append(eq)
        self.equations = remaining

    def _project_out(self, slot: int) -> None:
        """Eliminate a slot's unknowns, keeping only constraints free of them."""
        mul, inv = self.ctx.mul, self.ctx.inv
        k = self.spec.params.k
        for q in range(k):
            var = (slot, q)
            pivot = next((eq for eq in self.equations if var in eq.coeffs), None)
            if pivot is None:
                continue
            self.equations.remove(pivot)
            pinv = inv(pivot.coeffs[var])
            for eq in self.equations:
                c = eq.coeffs.get(var)
                if not c:
                    continue
                f = mul(c, pinv)
                for v, pc in pivot.coeffs.items():
                    nv = eq.coeffs.get(v, 0) ^ mul(f, pc)
                    if nv:
                        eq.coeffs[v] = nv
                    else:
                        eq.coeffs.pop(v, None)
                eq.rhs ^= mul(f, pivot.rhs)
        self.equations = [eq for eq in self.equations if eq.coeffs]
        self.unknown.remove(slot)
        self.lost.add(slot)

    def _recover_determined(self, best_effort: bool) -> tuple[list[Event], list[int]]:
        k = self.spec.params.k
        det = self._determined()
        slots = [s for s in self.unknown if all((s, q) in det for q in range(k))]
        if not slots:
            return [], []
        msgs = tuple(tuple(det[(s, q)] for q in range(k)) for s in slots)
        self._release(slots, det)
        return [RecoveredWindow(self.t, tuple(slots), msgs, best_effort, self.window_start)], slots

    def _best_effort_pass(self, final: bool) -> list[Event]:
        events, _ = self._recover_determined(best_effort=True)
        m = self.spec.params.m
        # no future symbol involves slots at or before t - m
        cutoff = self.t - m if final else min(self.t - m, self.t - self.horizon)
        stale = [s for s in self.unknown if s <= cutoff]
        for s in stale:
            self._project_out(s)
        if stale:
            events.append(SlotsLost(self.t, tuple(stale)))
        return events

    def _close_window(self) -> list[Event]:
        events: list[Event] = []
        window = tuple(self.unknown)
        if self.window_clean and not self.debt.violations:
            found, slots = self._recover_determined(best_effort=False)
            if self.unknown:
                # a verified code never gets here on an acceptable pattern
                events.append(DecodeFailure(self.t, window))
                events.extend(RecoveredWindow(e.slot, e.slots, e.messages, True, e.window_start)
                              for e in found)
                events.extend(self._best_effort_pass(final=True))
            else:
                events.extend(found)
        else:
            events.extend(self._best_effort_pass(final=True))
        self.window_start = self.t
        self.window_clean = not self.unknown
        return events


def decoder_ingest(state: DecoderState, t: int, received: Iterable[tuple[int, int]]) -> list[Event]:
    return state.ingest(t, received)
