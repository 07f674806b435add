"""Command-line entry point and the i.i.d. symbol-erasure channel simulator."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .codec import DecoderState, EncoderState, RecoveredWindow, ViolationDetected
from .constructions import BadParams, GeneratorSpec, make_spec
from .debt import ViolationKind
from .exponents import ExponentMatrix, decompose_dominance, find_dominant_permutation
from .field import FieldCtx, FieldError, field_create
from .verify import MODES, GuardrailAbort, default_max_cases, estimate_cases, verify_idos

EXIT_PASS, EXIT_FAIL, EXIT_GUARDRAIL = 0, 1, 2
EXIT_USAGE, EXIT_IO = 64, 74

CSV_COLUMNS = (
    "seed", "epsilon", "slots_run", "windows_completed", "acceptable_windows",
    "recovered_windows", "failed_recoveries", "contaminated_windows",
    "best_effort_recoveries", "violations_DebtExceeded", "violations_DelayExceeded",
    "violations_Unterminated", "max_observed_delay",
)


# -- simulation --------------------------------------------------------------


@dataclass
class SimulationStats:
    seed: int
    epsilon: float
    slots_run: int = 0
    windows_completed: int = 0
    acceptable_windows: int = 0
    recovered_windows: int = 0
    failed_recoveries: int = 0
    # violation-free windows that began with unrecovered messages in memory
    contaminated_windows: int = 0
    best_effort_recoveries: int = 0
    violations: dict[str, int] = field(
        default_factory=lambda: {k.value: 0 for k in ViolationKind})
    max_observed_delay: int = 0

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "epsilon": self.epsilon,
            "slots_run": self.slots_run,
            "windows_completed": self.windows_completed,
            "acceptable_windows": self.acceptable_windows,
            "recovered_windows": self.recovered_windows,
            "failed_recoveries": self.failed_recoveries,
            "contaminated_windows": self.contaminated_windows,
            "best_effort_recoveries": self.best_effort_recoveries,
            "violations": dict(self.violations),
            "max_observed_delay": self.max_observed_delay,
        }

    def csv_row(self) -> dict:
        row = {k: v for k, v in self.to_json().items() if k != "violations"}
        row.update({f"violations_{k}": v for k, v in self.violations.items()})
        return {c: row[c] for c in CSV_COLUMNS}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerow(self.csv_row())
        return buf.getvalue()


def simulate_channel(spec: GeneratorSpec, epsilon: float, slots: int, seed: int,
                     ctx: Optional[FieldCtx] = None) -> SimulationStats:
    """Run ``slots`` slots of random messages through encoder, an i.i.d.
    symbol-erasure channel and the decoder.

    PCG64 streams spawned from ``SeedSequence(seed)``: the first draws
    erasures slot-major, symbol-minor; the second draws messages.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    ctx = ctx or spec.field()
    p = spec.params
    erase_ss, msg_ss = np.random.SeedSequence(seed).spawn(2)
    erase_rng = np.random.Generator(np.random.PCG64(erase_ss))
    msg_rng = np.random.Generator(np.random.PCG64(msg_ss))
    enc, dec = EncoderState(spec, ctx), DecoderState(spec, ctx)
    stats = SimulationStats(seed, epsilon)

    start, clean_start, violated, recovered = 0, True, False, False
    for t in range(1, slots + 1):
        c = enc.step([ctx.random_int(msg_rng) for _ in range(p.k)])
        kept = erase_rng.random(p.n) >= epsilon
        events = dec.ingest(t, [(j, c[j]) for j in range(p.n) if kept[j]])
        for e in events:
            if isinstance(e, ViolationDetected):
                stats.violations[e.kind.value] += 1
                violated = True
            elif isinstance(e, RecoveredWindow):
                if e.best_effort:
                    stats.best_effort_recoveries += 1
                elif e.slots == tuple(range(start + 1, t + 1)):
                    recovered = True
        stats.slots_run = t
        if dec.debt.debt:
            continue
        stats.windows_completed += 1
        if violated:
            pass
        elif not clean_start:
            stats.contaminated_windows += 1
        else:
            stats.acceptable_windows += 1
            stats.max_observed_delay = max(stats.max_observed_delay, t - start)
            if recovered:
                stats.recovered_windows += 1
            else:
                stats.failed_recoveries += 1
        start, clean_start, violated, recovered = t, dec.window_clean, False, False
    if dec.debt.debt:
        stats.violations[ViolationKind.UNTERMINATED.value] += 1
    return stats


# -- argument handling -------------------------------------------------------


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _read_json_lines(path: str) -> list:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _write(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj) + "\n"


def _load_spec(path: str) -> tuple[GeneratorSpec, FieldCtx]:
    spec = GeneratorSpec.from_json(_read_json(path))
    ctx = spec.field()
    return spec.with_field(ctx), ctx


def _cmd_construct(a) -> int:
    construction = a.construction or a.pos_construction
    values = {}
    for name, pos in zip(("n", "k", "m", "tau"), a.positional):
        values[name] = pos
    for name in ("n", "k", "m", "tau"):
        if getattr(a, name) is not None:
            values[name] = getattr(a, name)
    missing = [n for n in ("n", "k", "m", "tau") if n not in values]
    if not construction or missing:
        raise UsageError(f"construct needs a construction and n k m tau (missing {missing})")
    modulus = _read_json(a.modulus) if a.modulus else None
    spec, _ = make_spec(construction, values["n"], values["k"], values["m"], values["tau"],
                        degree=a.degree, modulus=modulus, seed=a.seed, override=a.override)
    _write(json.dumps(spec.to_json(), indent=2) + "\n", a.out)
    return EXIT_PASS


def _cmd_verify(a) -> int:
    spec, ctx = _load_spec(a.spec)
    cap = default_max_cases() if a.max_cases is None else a.max_cases
    print(json.dumps({"estimated_cases": estimate_cases(spec.params), "cap": cap}), file=sys.stderr)
    try:
        report = verify_idos(spec, ctx, a.mode, jobs=a.jobs, max_cases=cap, seed=a.seed)
    except GuardrailAbort as exc:
        _write(_dumps({"verdict": "ABORT", "estimated_cases": exc.estimated, "cap": exc.cap}), a.out)
        return EXIT_GUARDRAIL
    _write(json.dumps(report.to_json(timing=a.timing), indent=2) + "\n", a.out)
    return EXIT_PASS if report.passed else EXIT_FAIL


def _parse_partition(text: str, cols: int) -> list[list[int]]:
    widths = [int(w) for w in text.split(",")]
    if sum(widths) != cols or min(widths) < 1:
        raise UsageError(f"partition widths {widths} must be positive and sum to {cols}")
    parts, at = [], 0
    for w in widths:
        parts.append(list(range(at, at + w)))
        at += w
    return parts


def _cmd_domperm(a) -> int:
    M = ExponentMatrix.from_json(_read_json(a.matrix))
    if a.partition:
        cert = decompose_dominance(M, _parse_partition(a.partition, M.cols))
        _write(_dumps(cert.to_json() if cert else {"certified": False}), a.out)
        return EXIT_PASS if cert else EXIT_FAIL
    report = find_dominant_permutation(M)
    _write(_dumps(report.to_json()), a.out)
    return EXIT_PASS if report.exists else EXIT_FAIL


def _load_messages(path: str) -> list[list[str]]:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = [json.loads(line) for line in text.splitlines() if line.strip()]
    return [row["messages"] if isinstance(row, dict) else row for row in data]


def _cmd_encode(a) -> int:
    spec, ctx = _load_spec(a.spec)
    enc = EncoderState(spec, ctx)
    rng = np.random.Generator(np.random.PCG64(a.seed)) if a.epsilon else None
    lines = []
    for t, msg in enumerate(_load_messages(a.messages), start=1):
        c = enc.step([ctx.from_hex(v) for v in msg])
        lines.append(_dumps({"t": t, "sent": [ctx.to_hex(v) for v in c]}))
        if rng is not None:
            kept = rng.random(spec.params.n) >= a.epsilon
            lines.append(_dumps({"t": t, "received": [
                {"idx": j + 1, "val": ctx.to_hex(c[j])} for j in range(spec.params.n) if kept[j]]}))
    _write("".join(lines), a.out)
    return EXIT_PASS


def _cmd_decode(a) -> int:
    spec, ctx = _load_spec(a.spec)
    rows = _read_json_lines(a.trace)
    # a trace without erasure records is decoded as fully received
    if any("received" in r for r in rows):
        slots = [(r["t"], [(s["idx"] - 1, ctx.from_hex(s["val"])) for s in r["received"]])
                 for r in rows if "received" in r]
    else:
        slots = [(r["t"], [(j, ctx.from_hex(v)) for j, v in enumerate(r["sent"])]) for r in rows]
    dec = DecoderState(spec, ctx)
    out = []
    for t, received in slots:
        out.extend(_dumps(e.to_json(ctx)) for e in dec.ingest(t, received))
    if dec.debt.debt:
        out.append(_dumps(ViolationDetected(dec.t, ViolationKind.UNTERMINATED).to_json()))
    _write("".join(out), a.out)
    return EXIT_PASS


def _cmd_simulate(a) -> int:
    spec, ctx = _load_spec(a.spec)
    stats = simulate_channel(spec, a.epsilon, a.slots, a.seed, ctx)
    _write(stats.to_csv() if a.format == "csv" else json.dumps(stats.to_json(), indent=2) + "\n", a.out)
    return EXIT_PASS if stats.failed_recoveries == 0 else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="idos", description="Information-debt-optimal streaming codes.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("construct", help="write a generator spec")
    p.add_argument("pos_construction", nargs="?", choices=["a", "b", "A", "B"])
    p.add_argument("positional", nargs="*", type=int, metavar="N K M TAU")
    p.add_argument("--construction", choices=["a", "b", "A", "B"])
    for name in ("n", "k", "m", "tau"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--degree", type=int)
    p.add_argument("--modulus", help="JSON file with descending exponents")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--override", action="store_true", help="allow degree at or below the bound")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("verify", help="exhaustively check worst-case windows")
    p.add_argument("--spec", required=True)
    p.add_argument("--mode", choices=MODES, default="invertibility")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-cases", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timing", action="store_true", help="include elapsed seconds")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("domperm", help="dominant permutation of an exponent matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--partition", help="comma-separated column block widths, e.g. 2,2")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_domperm)

    p = sub.add_parser("encode", help="encode message vectors into a trace")
    p.add_argument("--spec", required=True)
    p.add_argument("--messages", required=True)
    p.add_argument("--epsilon", type=float, default=0.0, help="also emit erased 'received' records")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("decode", help="decode a received trace")
    p.add_argument("--spec", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("simulate", help="simulate an i.i.d. symbol-erasure channel")
    p.add_argument("--spec", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--slots", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("a subcommand is required")
        return args.func(args)
    except UsageError as exc:
        print(f"idos: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"idos: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, TypeError, BadParams, FieldError) as exc:
        print(f"idos: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
