"""Information-debt tracking and worst-case decode-window enumeration."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .constructions import CodeParams


class ViolationKind(str, enum.Enum):
    DEBT_EXCEEDED = "DebtExceeded"
    DELAY_EXCEEDED = "DelayExceeded"
    UNTERMINATED = "Unterminated"  # sequence ends with positive debt


@dataclass(frozen=True)
class DebtState:
    """Debt after slot ``t``; ``theta_last`` is the latest slot with zero debt.

    ``violations`` holds (kind, slot) pairs for the current window, each
    kind recorded once per window.
    """

    t: int = 0
    debt: int = 0
    theta_last: int = 0
    violations: tuple[tuple[ViolationKind, int], ...] = ()

    @property
    def violation(self) -> Optional[ViolationKind]:
        return self.violations[0][0] if self.violations else None

    @property
    def window_length(self) -> int:
        return self.t - self.theta_last


def debt_step(state: DebtState, n_t: int, params: CodeParams) -> DebtState:
    """Advance one slot: I(t) = max(k - n_t + I(t-1), 0)."""
    if not 0 <= n_t <= params.n:
        raise ValueError(f"received count {n_t} outside [0, {params.n}]")
    t = state.t + 1
    # a new window starts after every zero-debt slot
    violations = list(state.violations) if state.debt > 0 else []
    kinds = {v[0] for v in violations}
    debt = max(params.k - n_t + state.debt, 0)
    if debt > params.m * params.k and ViolationKind.DEBT_EXCEEDED not in kinds:
        violations.append((ViolationKind.DEBT_EXCEEDED, t))
    if t - state.theta_last > params.tau + 1 and ViolationKind.DELAY_EXCEEDED not in kinds:
        violations.append((ViolationKind.DELAY_EXCEEDED, t))
    theta = t if debt == 0 else state.theta_last
    return DebtState(t, debt, theta, tuple(violations))


@dataclass(frozen=True)
class Acceptable:
    windows: tuple[int, ...]  # slots theta_1, theta_2, ... where debt hit zero

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    slot: int
    all: tuple[tuple[ViolationKind, int], ...]

    def __bool__(self) -> bool:
        return False


def classify_pattern(params: CodeParams, counts: Sequence[int]) -> Acceptable | Violation:
    state = DebtState()
    found: list[tuple[ViolationKind, int]] = []
    zeros = []
    for n_t in counts:
        state = debt_step(state, n_t, params)
        for v in state.violations:
            if v not in found:
                found.append(v)
        if state.debt == 0:
            zeros.append(state.t)
    if state.debt > 0:
        found.append((ViolationKind.UNTERMINATED, state.t))
    if found:
        return Violation(found[0][0], found[0][1], tuple(found))
    return Acceptable(tuple(zeros))


def enumerate_worst_case_windows(params: CodeParams, max_ell: int | None = None) -> list[tuple[int, ...]]:
    """Count sequences of windows with exactly k ell received symbols.

    For every proper prefix ell' < ell: k ell' - m k <= sum <= k ell' - 1,
    i.e. debt stays in [1, mk]. Windows have 1 <= ell <= tau + 1. Order:
    ell ascending, then lexicographic.
    """
    n, k, m = params.n, params.k, params.m
    top = params.tau + 1 if max_ell is None else max_ell
    out: list[tuple[int, ...]] = []

    def extend(prefix: list[int], total: int, ell: int):
        pos = len(prefix) + 1
        if pos == ell:
            last = k * ell - total
            if 0 <= last <= n:
                out.append(tuple(prefix + [last]))
            return
        lo = max(0, k * pos - m * k - total)
        hi = min(n, k * pos - 1 - total)
        for v in range(lo, hi + 1):
            prefix.append(v)
            extend(prefix, total + v, ell)
            prefix.pop()

    for ell in range(1, top + 1):
        extend([], 0, ell)
    return out


def check_lemma5(counts: Sequence[int], params: CodeParams) -> tuple[bool, Optional[str]]:
    """Unit-memory window properties; returns (ok, first failed clause)."""
    k = params.k
    ell = len(counts)
    n = [None] + list(counts)  # 1-based
    if n[ell] < k:
        return False, "a"
    for lp in range(2, ell + 1):
        if n[lp] == 0:
            return False, "b"
    for mu in range(1, ell):
        lower = sum(n[ell - mu + 2:ell + 1])
        upper = sum(n[ell - mu + 1:ell + 1])
        if not (lower <= mu * k < upper):
            return False, "c"
    for lp in range(1, ell):
        if n[lp] + n[lp + 1] < k:
            return False, "d"
    return True, None


@dataclass(frozen=True)
class WindowPattern:
    counts: tuple[int, ...]
    received_sets: Optional[tuple[tuple[int, ...], ...]] = None  # 0-based indices

    def __post_init__(self):
        if len(self.counts) < 1:
            raise ValueError("window needs at least one slot")
        if self.received_sets is not None:
            if len(self.received_sets) != len(self.counts):
                raise ValueError("one received set per slot")
            for c, r in zip(self.counts, self.received_sets):
                if len(r) != c:
                    raise ValueError(f"received set {r} does not match count {c}")

    @property
    def ell(self) -> int:
        return len(self.counts)

    def to_json(self) -> dict:
        out = {"ell": self.ell, "counts": list(self.counts)}
        if self.received_sets is not None:
            out["received_sets"] = [[j + 1 for j in r] for r in self.received_sets]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "WindowPattern":
        rs = obj.get("received_sets")
        return cls(tuple(obj["counts"]),
                   None if rs is None else tuple(tuple(j - 1 for j in r) for r in rs))


def expand_received_sets(counts: Sequence[int], n: int) -> Iterator[WindowPattern]:
    """Every choice of received indices, product order over slots."""
    counts = tuple(counts)
    per_slot = [list(itertools.combinations(range(n), c)) for c in counts]
    for sets in itertools.product(*per_slot):
        yield WindowPattern(counts, tuple(sets))


def pattern_count(counts: Sequence[int], n: int) -> int:
    return math.prod(math.comb(n, c) for c in counts)
