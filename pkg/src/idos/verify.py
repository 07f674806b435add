"""Exhaustive checks that a generator spec decodes every worst-case window,
plus executable checks of the dominance and superregularity arguments."""

from __future__ import annotations

import itertools
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .codec import DecoderState, EncoderState, RecoveredWindow, build_decode_window
from .constructions import (
    CodeParams,
    GeneratorSpec,
    build_stacked_exponents,
    check_theorem3_conditions,
    construct_a,
    degree_bound,
)
from .debt import (
    WindowPattern,
    enumerate_worst_case_windows,
    expand_received_sets,
    pattern_count,
)
from .exponents import ExponentMatrix, find_dominant_permutation, lift
from .field import FieldCtx, field_create
from .linalg import mat_det, support_has_nontrivial_term

MODES = ("invertibility", "roundtrip", "both")
DEFAULT_MAX_CASES = 1_000_000
ROUNDTRIP_STREAMS = 3


class GuardrailAbort(RuntimeError):
    def __init__(self, estimated: int, cap: int):
        super().__init__(f"{estimated} decoding matrices exceed the cap of {cap}")
        self.estimated = estimated
        self.cap = cap


def default_max_cases() -> int:
    return int(os.environ.get("IDOS_MAX_CASES", DEFAULT_MAX_CASES))


@dataclass
class VerificationReport:
    params: CodeParams
    spec_id: str
    mode: str
    windows_checked: int = 0
    matrices_checked: int = 0
    failures: list[tuple[dict, str]] = field(default_factory=list)
    max_dominant_sum: Optional[int] = None
    without_dominant_permutation: int = 0
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_json(self, timing: bool = False) -> dict:
        p = self.params
        out = {
            "verdict": self.verdict,
            "params": {"n": p.n, "k": p.k, "m": p.m, "tau": p.tau},
            "spec_id": self.spec_id,
            "mode": self.mode,
            "windows_checked": self.windows_checked,
            "matrices_checked": self.matrices_checked,
            "failures": [{"pattern": pat, "reason": why} for pat, why in self.failures],
            "dominance_stats": {
                "max_dominant_sum": self.max_dominant_sum,
                "without_dominant_permutation": self.without_dominant_permutation,
            },
        }
        if timing:
            out["elapsed"] = round(self.elapsed, 3)
        return out


def spec_id(spec: GeneratorSpec) -> str:
    p = spec.params
    return f"{spec.construction}({p.n},{p.k},{p.m},{p.tau})@d={spec.degree}"


def _cases(params: CodeParams):
    for counts in enumerate_worst_case_windows(params):
        yield from expand_received_sets(counts, params.n)


def estimate_cases(params: CodeParams) -> int:
    return sum(pattern_count(c, params.n) for c in enumerate_worst_case_windows(params))


def _stream_rng(seed: int, case: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, case, stream]))


def roundtrip_pattern(spec: GeneratorSpec, ctx: FieldCtx, pattern: WindowPattern,
                      rng: np.random.Generator) -> Optional[str]:
    """Encode random messages, erase per ``pattern`` after m clean slots,
    decode; returns None on exact recovery at the window's last slot."""
    p = spec.params
    enc, dec = EncoderState(spec, ctx), DecoderState(spec, ctx)
    sent = []
    recovered: list[RecoveredWindow] = []
    t = 0
    plan = [tuple(range(p.n))] * p.m + [tuple(r) for r in pattern.received_sets]
    for rs in plan:
        t += 1
        s = [ctx.random_int(rng) for _ in range(p.k)]
        sent.append(s)
        c = enc.step(s)
        events = dec.ingest(t, [(j, c[j]) for j in rs])
        if t <= p.m:
            continue
        for e in events:
            if not isinstance(e, RecoveredWindow):
                return f"unexpected event {type(e).__name__} at slot {t}"
            recovered.append(e)
    window = tuple(range(p.m + 1, t + 1))
    if len(recovered) != 1:
        return f"expected one recovery, got {len(recovered)}"
    ev = recovered[0]
    if ev.best_effort or ev.slot != t or ev.slots != window:
        return f"recovery at slot {ev.slot} for slots {list(ev.slots)}"
    if [list(msg) for msg in ev.messages] != sent[p.m:]:
        return "recovered messages differ from sent messages"
    return None


def _verify_range(spec_json: dict, mode: str, seed: int, streams: int, start: int, stop: int,
                  dominance: bool):
    spec = GeneratorSpec.from_json(spec_json)
    ctx = field_create(spec.degree, spec.modulus) if spec.modulus else spec.field()
    failures = []
    max_sum = None
    no_dom = 0
    for idx, pattern in enumerate(itertools.islice(_cases(spec.params), start, stop), start):
        if mode in ("invertibility", "both"):
            M = build_decode_window(spec, pattern)
            if mat_det(lift(M, ctx)) == 0:
                failures.append((pattern.to_json(), "singular decoding matrix"))
            if dominance:
                rep = find_dominant_permutation(M)
                if rep.exists:
                    max_sum = rep.dominant_sum if max_sum is None else max(max_sum, rep.dominant_sum)
                else:
                    no_dom += 1
        if mode in ("roundtrip", "both"):
            for stream in range(streams):
                why = roundtrip_pattern(spec, ctx, pattern, _stream_rng(seed, idx, stream))
                if why:
                    failures.append((pattern.to_json(), f"roundtrip stream {stream}: {why}"))
                    break
    return failures, max_sum, no_dom


def verify_idos(
    spec: GeneratorSpec,
    ctx: FieldCtx,
    mode: str = "invertibility",
    jobs: int = 1,
    max_cases: Optional[int] = None,
    seed: int = 0,
    streams: int = ROUNDTRIP_STREAMS,
    dominance: bool = True,
) -> VerificationReport:
    """Check every worst-case decoding window of ``spec`` over ``ctx``."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if ctx.degree != spec.degree or (spec.modulus and tuple(spec.modulus) != ctx.modulus):
        raise ValueError("field context does not match spec")
    spec = spec.with_field(ctx)
    began = time.perf_counter()
    params = spec.params
    total = estimate_cases(params)
    cap = default_max_cases() if max_cases is None else max_cases
    if total > cap:
        raise GuardrailAbort(total, cap)
    report = VerificationReport(params, spec_id(spec), mode,
                                windows_checked=len(enumerate_worst_case_windows(params)),
                                matrices_checked=total)
    jobs = max(1, min(jobs, total or 1))
    bounds = [(total * i // jobs, total * (i + 1) // jobs) for i in range(jobs)]
    args = [(spec.to_json(), mode, seed, streams, a, b, dominance) for a, b in bounds]
    if jobs == 1:
        parts = [_verify_range(*args[0])]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_verify_range, *zip(*args)))
    for failures, max_sum, no_dom in parts:
        report.failures.extend(failures)
        if max_sum is not None:
            report.max_dominant_sum = max_sum if report.max_dominant_sum is None else max(report.max_dominant_sum, max_sum)
        report.without_dominant_permutation += no_dom
    report.elapsed = time.perf_counter() - began
    return report


# -- dominance structure of unit-memory construction -------------------------


@dataclass(frozen=True)
class ThickColumnPlan:
    """Thick column j (1-based): columns A_j, rows B_j received in slot j,
    and the number r of its sigma* rows expected inside B_j."""

    j: int
    columns: tuple[int, ...]
    own_rows: tuple[int, ...]
    next_rows: tuple[int, ...]
    r: int


def thick_column_plans(counts: Sequence[int], k: int) -> list[ThickColumnPlan]:
    ell = len(counts)
    starts = [sum(counts[:i]) for i in range(ell + 1)]
    blocks = [tuple(range(starts[i], starts[i + 1])) for i in range(ell)] + [()]
    plans = []
    for mu in range(ell):
        j = ell - mu
        r = (mu + 1) * k - sum(counts[ell - mu:])
        plans.append(ThickColumnPlan(j, tuple(range((j - 1) * k, j * k)), blocks[j - 1], blocks[j], r))
    return sorted(plans, key=lambda pl: pl.j)


@dataclass
class DominanceStructureReport:
    n: int
    k: int
    tau: int
    matrices_checked: int = 0
    max_dominant_sum: int = 0
    bound: int = 0
    failures: list[tuple[dict, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"verdict": "PASS" if self.passed else "FAIL", "n": self.n, "k": self.k,
                "tau": self.tau, "matrices_checked": self.matrices_checked,
                "max_dominant_sum": self.max_dominant_sum, "bound": self.bound,
                "failures": [{"pattern": p, "reason": r} for p, r in self.failures]}


def verify_dominance_structure(n: int, k: int, tau: int) -> DominanceStructureReport:
    """Per decoding matrix of construction A: dominant permutation exists,
    maps every thick column onto its own diagonal block, splits rows
    (r, k - r) between the slot's own and next received blocks, and its sum
    stays within (n-1) k^2 (tau+1)."""
    params = CodeParams(n, k, 1, tau)
    bound = degree_bound(params, "A")
    spec = GeneratorSpec(params, "A", construct_a(n, k), bound + 1, override=True)
    report = DominanceStructureReport(n, k, tau, bound=bound)
    for counts in enumerate_worst_case_windows(params):
        plans = thick_column_plans(counts, k)
        for pattern in expand_received_sets(counts, n):
            report.matrices_checked += 1
            M = build_decode_window(spec, pattern)
            rep = find_dominant_permutation(M)
            if not rep.exists:
                report.failures.append((pattern.to_json(), "no dominant permutation"))
                continue
            sigma = rep.sigma_star
            report.max_dominant_sum = max(report.max_dominant_sum, rep.dominant_sum)
            for plan in plans:
                image = {sigma[c] for c in plan.columns}
                if image != set(plan.columns):
                    report.failures.append((pattern.to_json(), f"thick column {plan.j} not mapped onto itself"))
                    break
                if len(image & set(plan.own_rows)) != plan.r or \
                        len(image & set(plan.next_rows)) != k - plan.r:
                    report.failures.append((pattern.to_json(), f"row split wrong in thick column {plan.j}"))
                    break
            if rep.dominant_sum > bound:
                report.failures.append((pattern.to_json(), f"dominant sum {rep.dominant_sum} > {bound}"))
    return report


# -- superregularity route of the general construction -----------------------


@dataclass
class SuperregularReport:
    structural_ok: bool
    structural_violations: list[str]
    diagonal_ok: bool
    diagonal_failures: list[dict]
    minors_checked: int = 0
    minors_trivial: int = 0
    singular_minors: list[tuple[tuple[int, ...], tuple[int, ...]]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.structural_ok and self.diagonal_ok and not self.singular_minors

    def to_json(self) -> dict:
        return {
            "verdict": "PASS" if self.passed else "FAIL",
            "structural_ok": self.structural_ok,
            "structural_violations": self.structural_violations,
            "diagonal_ok": self.diagonal_ok,
            "diagonal_failures": self.diagonal_failures,
            "minors_checked": self.minors_checked,
            "minors_trivial": self.minors_trivial,
            "singular_minors": [[[r + 1 for r in rs], [c + 1 for c in cs]] for rs, cs in self.singular_minors],
        }


def verify_superregular_route(spec: GeneratorSpec, ell: int, ctx: Optional[FieldCtx] = None,
                              minor_cap: int = 3) -> SuperregularReport:
    stacked = build_stacked_exponents(spec, ell)
    ok, violations = check_theorem3_conditions(stacked)
    diag_fail = []
    for counts in enumerate_worst_case_windows(spec.params):
        for pattern in expand_received_sets(counts, spec.params.n):
            M = build_decode_window(spec, pattern)
            if any(M[i, i] is None for i in range(M.rows)):
                diag_fail.append(pattern.to_json())
    report = SuperregularReport(ok, violations, not diag_fail, diag_fail)
    if minor_cap and ctx is None:
        raise ValueError("minor checks need a field context")
    R, C = stacked.shape
    for size in range(1, min(minor_cap, R, C) + 1):
        for rows in itertools.combinations(range(R), size):
            for cols in itertools.combinations(range(C), size):
                sub = stacked.select(rows, cols)
                if not support_has_nontrivial_term([[v is not None for v in r] for r in sub.entries]):
                    report.minors_trivial += 1
                    continue
                report.minors_checked += 1
                if mat_det(lift(sub, ctx)) == 0:
                    report.singular_minors.append((rows, cols))
    return report


# -- randomized check that dominance forces nonsingularity -------------------


@dataclass
class OracleReport:
    asserted: int
    nonsingular: int
    generated: int
    failures: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.asserted == self.nonsingular


def lemma1_oracle_suite(trials: int = 200, size: int = 4, max_entry: int = 10, seed: int = 7,
                        neg_inf_rate: float = 0.2, max_draws: int = 1_000_000) -> OracleReport:
    """Draw random exponent matrices until ``trials`` of them have a dominant
    permutation; lift each into GF(2^(sum+1)) and test nonsingularity."""
    if size > 6:
        raise ValueError("oracle suite limited to size <= 6 (brute-force dominance)")
    rng = np.random.default_rng(seed)
    fields: dict[int, FieldCtx] = {}
    report = OracleReport(0, 0, 0)
    while report.asserted < trials and report.generated < max_draws:
        report.generated += 1
        vals = rng.integers(0, max_entry + 1, size=(size, size))
        holes = rng.random((size, size)) < neg_inf_rate
        M = ExponentMatrix.of([[None if holes[i, j] else int(vals[i, j]) for j in range(size)]
                               for i in range(size)])
        rep = find_dominant_permutation(M, method="brute")
        if not rep.exists:
            continue
        d = rep.dominant_sum + 1
        ctx = fields.get(d) or fields.setdefault(d, field_create(d, seed=seed))
        report.asserted += 1
        if mat_det(lift(M, ctx)) != 0:
            report.nonsingular += 1
        else:
            report.failures.append(M.to_json())
    return report
