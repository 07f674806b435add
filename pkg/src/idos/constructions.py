"""Generator constructions for unit-memory (A) and general-memory (B) codes.

Formulas use 1-based (i, j); storage is 0-based. ``exponent_matrices`` is
always ordered [M^(m), ..., M^(0)], the column order of G = [G^(m) ... G^(0)].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .exponents import ExponentMatrix, lift
from .field import FieldCtx, field_create
from .linalg import FieldMatrix


class BadParams(ValueError):
    pass


class DegreeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class CodeParams:
    n: int
    k: int
    m: int
    tau: int

    def __post_init__(self):
        if not (self.n > self.k >= 1):
            raise BadParams(f"need n > k >= 1, got n={self.n}, k={self.k}")
        if self.m < 1:
            raise BadParams(f"memory must be >= 1, got {self.m}")
        if self.tau < 0:
            raise BadParams(f"tau must be >= 0, got {self.tau}")


def construct_a(n: int, k: int) -> tuple[ExponentMatrix, ExponentMatrix]:
    """(M1, M0) with M0(i,j) = (i-1) j and M1(i,j) = (n-i)(k+1-j)."""
    if not (n > k >= 1):
        raise BadParams(f"need n > k >= 1, got n={n}, k={k}")
    m0 = ExponentMatrix.of([[(i - 1) * j for j in range(1, k + 1)] for i in range(1, n + 1)])
    m1 = ExponentMatrix.of([[(n - i) * (k + 1 - j) for j in range(1, k + 1)] for i in range(1, n + 1)])
    return m1, m0


def construct_b(n: int, k: int, m: int) -> list[ExponentMatrix]:
    """[M^(0), ..., M^(m)] with M^(t)(i,j) = 2^(t n + i + k - 1 - j)."""
    if not (n > k >= 1) or m < 1:
        raise BadParams(f"need n > k >= 1 and m >= 1, got n={n}, k={k}, m={m}")
    return [
        ExponentMatrix.of([[2 ** (t * n + i + k - 1 - j) for j in range(1, k + 1)]
                           for i in range(1, n + 1)])
        for t in range(m + 1)
    ]


def degree_bound(params: CodeParams, construction: str) -> int:
    """The strict lower bound on d; any d > bound is sufficient."""
    n, k, m, tau = params.n, params.k, params.m, params.tau
    c = construction.upper()
    if c == "A":
        if m != 1:
            raise BadParams("construction A is unit-memory only")
        return (n - 1) * k * k * (tau + 1)
    if c == "B":
        return 2 ** ((m + 1) * n + k - 2) * (tau + 1) * k
    raise BadParams(f"no degree bound for construction {construction!r}")


def min_degree(params: CodeParams, construction: str) -> int:
    return degree_bound(params, construction) + 1


@dataclass(frozen=True)
class GeneratorSpec:
    params: CodeParams
    construction: str
    exponent_matrices: tuple[ExponentMatrix, ...]  # [M^(m), ..., M^(0)]
    degree: int
    modulus: tuple[int, ...] = ()
    override: bool = False

    def __post_init__(self):
        p = self.params
        mats = tuple(self.exponent_matrices)
        object.__setattr__(self, "exponent_matrices", mats)
        if self.construction.lower() in ("a", "b"):
            object.__setattr__(self, "construction", self.construction.upper())
        if len(mats) != p.m + 1:
            raise BadParams(f"expected {p.m + 1} exponent matrices, got {len(mats)}")
        for M in mats:
            if M.shape != (p.n, p.k):
                raise BadParams(f"exponent matrix shape {M.shape} != {(p.n, p.k)}")
        if self.construction == "A" and p.m != 1:
            raise BadParams("construction A requires m = 1")
        if self.construction in ("A", "B") and not self.override:
            bound = degree_bound(p, self.construction)
            if self.degree <= bound:
                raise BadParams(
                    f"degree {self.degree} does not exceed bound {bound}; pass override to force")

    def block(self, t: int) -> ExponentMatrix:
        """M^(t): coefficient of s(slot - t) in c(slot)."""
        return self.exponent_matrices[self.params.m - t]

    def field(self, seed: int = 0) -> FieldCtx:
        if self.modulus:
            return field_create(self.degree, self.modulus)
        return field_create(self.degree, seed=seed)

    def with_field(self, ctx: FieldCtx) -> "GeneratorSpec":
        return GeneratorSpec(self.params, self.construction, self.exponent_matrices,
                             ctx.degree, ctx.modulus, self.override)

    def to_json(self) -> dict:
        p = self.params
        out = {
            "n": p.n, "k": p.k, "m": p.m, "tau": p.tau,
            "construction": self.construction,
            "degree": self.degree,
            "modulus": list(self.modulus),
            "exponent_matrices": [M.to_json() for M in self.exponent_matrices],
        }
        if self.override:
            out["override"] = True
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "GeneratorSpec":
        params = CodeParams(obj["n"], obj["k"], obj["m"], obj["tau"])
        mats = tuple(ExponentMatrix.from_json(M) for M in obj["exponent_matrices"])
        return cls(params, obj["construction"], mats, obj["degree"],
                   tuple(obj.get("modulus") or ()), bool(obj.get("override", False)))


def make_spec(
    construction: str,
    n: int,
    k: int,
    m: int,
    tau: int,
    degree: Optional[int] = None,
    modulus: Sequence[int] | None = None,
    seed: int = 0,
    override: bool = False,
) -> tuple[GeneratorSpec, FieldCtx]:
    """Build a spec for construction A or B together with its field."""
    params = CodeParams(n, k, m, tau)
    c = construction.upper()
    if c == "A":
        if m != 1:
            raise BadParams("construction A requires m = 1")
        mats = construct_a(n, k)
    elif c == "B":
        mats = tuple(reversed(construct_b(n, k, m)))
    else:
        raise BadParams(f"unknown construction {construction!r}")
    d = min_degree(params, c) if degree is None else degree
    if not override and d <= degree_bound(params, c):
        raise BadParams(f"degree {d} does not exceed bound {degree_bound(params, c)}")
    ctx = field_create(d, modulus, seed=seed)
    return GeneratorSpec(params, c, mats, d, ctx.modulus, override), ctx


def custom_spec(params: CodeParams, exponent_matrices: Sequence[ExponentMatrix],
                ctx: FieldCtx) -> GeneratorSpec:
    return GeneratorSpec(params, "custom", tuple(exponent_matrices), ctx.degree, ctx.modulus, True)


def build_generator(spec: GeneratorSpec, ctx: FieldCtx) -> FieldMatrix:
    """G = [alpha^M^(m) ... alpha^M^(0)], n x (m+1)k."""
    if ctx.degree != spec.degree:
        raise DegreeMismatch(f"context degree {ctx.degree} != spec degree {spec.degree}")
    p = spec.params
    lifted = [lift(M, ctx) for M in spec.exponent_matrices]
    entries = [L[i, j] for i in range(p.n) for L in lifted for j in range(p.k)]
    return FieldMatrix(ctx, p.n, (p.m + 1) * p.k, entries)


def build_stacked_exponents(spec: GeneratorSpec, ell: int) -> ExponentMatrix:
    """n ell x k ell block-banded matrix mapping s(1..ell) to c(1..ell);
    block (t, t') holds M^(t - t') when 0 <= t - t' <= m."""
    if ell < 1:
        raise BadParams("window length must be >= 1")
    n, k, m = spec.params.n, spec.params.k, spec.params.m
    rows = []
    for t in range(ell):
        for i in range(n):
            row = []
            for tp in range(ell):
                lag = t - tp
                if 0 <= lag <= m:
                    row.extend(spec.block(lag).entries[i])
                else:
                    row.extend([None] * k)
            rows.append(row)
    return ExponentMatrix.of(rows)


def check_theorem3_conditions(M: ExponentMatrix) -> tuple[bool, list[str]]:
    """Structural superregularity conditions on exponents (None = zero entry):
    positive exponents; every zero has only zeros below it or only zeros to
    its right; exponents at least double moving left along a row and moving
    down a column."""
    violations: list[str] = []
    R, C = M.shape
    E = M.entries
    for i in range(R):
        for j in range(C):
            b = E[i][j]
            if b is not None and b < 1:
                violations.append(f"nonpositive exponent {b} at ({i + 1},{j + 1})")
            if b is None:
                below = all(E[r][j] is None for r in range(i + 1, R))
                right = all(E[i][c] is None for c in range(j + 1, C))
                if not (below or right):
                    violations.append(f"zero at ({i + 1},{j + 1}) has nonzeros below and to the right")
    # consecutive nonzero pairs suffice: the doubling relation chains
    for i in range(R):
        prev = None  # (col, beta) of the nearest nonzero to the right
        for j in range(C - 1, -1, -1):
            b = E[i][j]
            if b is None:
                continue
            if prev is not None and 2 * prev[1] > b:
                violations.append(f"row {i + 1}: 2*{prev[1]} > {b} between columns {prev[0] + 1} and {j + 1}")
            prev = (j, b)
    for j in range(C):
        prev = None
        for i in range(R):
            b = E[i][j]
            if b is None:
                continue
            if prev is not None and 2 * prev[1] > b:
                violations.append(f"column {j + 1}: 2*{prev[1]} > {b} between rows {prev[0] + 1} and {i + 1}")
            prev = (i, b)
    return not violations, violations
