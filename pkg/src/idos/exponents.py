"""Exponent matrices over {-inf, 0, 1, 2, ...} and dominant permutations.

``-inf`` is stored as ``None`` everywhere; it lifts to the field zero.
A permutation ``sigma`` is a tuple mapping column ``i`` to row ``sigma[i]``
(0-based).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .field import FieldCtx, field_create
from .linalg import FieldMatrix, mat_det

Entry = Optional[int]
_INF = float("inf")
BRUTE_FORCE_MAX = 6


class PreconditionUnmet(ValueError):
    pass


@dataclass(frozen=True)
class ExponentMatrix:
    entries: tuple[tuple[Entry, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.entries)
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged exponent matrix")
        for r in rows:
            for v in r:
                if v is not None and (not isinstance(v, int) or v < 0):
                    raise ValueError(f"exponent entries must be None or non-negative ints, got {v!r}")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def of(cls, rows: Iterable[Iterable[Entry]]) -> "ExponentMatrix":
        return cls(tuple(tuple(r) for r in rows))

    @classmethod
    def neg_inf(cls, rows: int, cols: int) -> "ExponentMatrix":
        return cls(tuple((None,) * cols for _ in range(rows)))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij: tuple[int, int]) -> Entry:
        return self.entries[ij[0]][ij[1]]

    def select(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> "ExponentMatrix":
        rows = range(self.rows) if rows is None else rows
        cols = range(self.cols) if cols is None else cols
        return ExponentMatrix(tuple(tuple(self.entries[i][j] for j in cols) for i in rows))

    def max_finite(self) -> Optional[int]:
        vals = [v for r in self.entries for v in r if v is not None]
        return max(vals) if vals else None

    def perm_sum(self, sigma: Sequence[int]) -> Optional[int]:
        """Sum of ``M[sigma[i], i]``; None if any picked entry is -inf."""
        total = 0
        for col, row in enumerate(sigma):
            v = self.entries[row][col]
            if v is None:
                return None
            total += v
        return total

    def to_json(self) -> dict:
        # row-major, like field matrices; nested lists are accepted on input
        return {"rows": self.rows, "cols": self.cols,
                "entries": [v for r in self.entries for v in r]}

    @classmethod
    def from_json(cls, obj: dict) -> "ExponentMatrix":
        rows, cols, flat = obj["rows"], obj["cols"], obj["entries"]
        if flat and isinstance(flat[0], list):
            m = cls.of(flat)
        else:
            m = cls.of(flat[i * cols:(i + 1) * cols] for i in range(rows))
        if m.shape != (rows, cols) and not (rows == 0 or cols == 0):
            raise ValueError(f"declared shape {(rows, cols)} != actual {m.shape}")
        return m

    def __str__(self) -> str:
        return "\n".join(" ".join("-inf" if v is None else str(v) for v in r) for r in self.entries)


def lift(M: ExponentMatrix, ctx: FieldCtx) -> FieldMatrix:
    """Entrywise alpha^M."""
    pw = ctx.pow_alpha
    return FieldMatrix(ctx, M.rows, M.cols, [pw(v) for r in M.entries for v in r])


# -- assignment --------------------------------------------------------------


def max_weight_assignment(
    M: ExponentMatrix, banned: Iterable[tuple[int, int]] = ()
) -> Optional[tuple[tuple[int, ...], int]]:
    """Max-sum permutation avoiding -inf entries and ``banned`` (row, col) cells.

    Shortest augmenting path Hungarian method on exact ints; forbidden cells
    are left out of the graph. Returns (sigma, sum) or None if infeasible.
    """
    n = M.rows
    if n != M.cols:
        raise ValueError("assignment needs a square matrix")
    if n == 0:
        return (), 0
    banned = set(banned)
    # workers: columns of M; jobs: rows of M; minimise negated weight
    cost = [[None if (M.entries[r][c] is None or (r, c) in banned) else -M.entries[r][c]
             for r in range(n)] for c in range(n)]
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [_INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = cost[i0 - 1]
            delta, j1 = _INF, 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                w = row[j - 1]
                if w is not None:
                    cur = w - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                if minv[j] < delta:
                    delta, j1 = minv[j], j
            if delta == _INF:
                return None
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    sigma = [0] * n
    for job in range(1, n + 1):
        sigma[p[job] - 1] = job - 1
    sigma_t = tuple(sigma)
    return sigma_t, M.perm_sum(sigma_t)


# -- dominance ---------------------------------------------------------------


@dataclass(frozen=True)
class DominanceReport:
    exists: bool
    sigma_star: Optional[tuple[int, ...]] = None
    dominant_sum: Optional[int] = None
    runner_up_sum: Optional[int] = None
    best_sum: Optional[int] = None  # max feasible sum, also when tied

    def to_json(self) -> dict:
        return {
            "exists": self.exists,
            # 1-based, column i -> row sigma(i)
            "sigma_star": None if self.sigma_star is None else [r + 1 for r in self.sigma_star],
            "dominant_sum": self.dominant_sum,
            "runner_up_sum": self.runner_up_sum,
        }


def _dominance_brute(M: ExponentMatrix) -> DominanceReport:
    best: list[tuple[int, tuple[int, ...]]] = []
    for sigma in itertools.permutations(range(M.rows)):
        s = M.perm_sum(sigma)
        if s is not None:
            best.append((s, sigma))
    if not best:
        return DominanceReport(False)
    best.sort(key=lambda t: t[0], reverse=True)
    top_sum, top_sigma = best[0]
    runner = best[1][0] if len(best) > 1 else None
    if runner is not None and runner == top_sum:
        return DominanceReport(False, runner_up_sum=runner, best_sum=top_sum)
    return DominanceReport(True, top_sigma, top_sum, runner, top_sum)


def _dominance_assignment(M: ExponentMatrix) -> DominanceReport:
    best = max_weight_assignment(M)
    if best is None:
        return DominanceReport(False)
    sigma, top = best
    # every other permutation differs from sigma in some column
    runner = None
    for col, row in enumerate(sigma):
        alt = max_weight_assignment(M, banned=[(row, col)])
        if alt is not None and (runner is None or alt[1] > runner):
            runner = alt[1]
            if runner == top:
                return DominanceReport(False, runner_up_sum=runner, best_sum=top)
    return DominanceReport(True, sigma, top, runner, top)


def find_dominant_permutation(M: ExponentMatrix, method: str = "auto") -> DominanceReport:
    """Unique strictly-maximal permutation sum over -inf-free permutations."""
    if M.rows != M.cols:
        raise ValueError("dominant permutation needs a square matrix")
    if method == "brute" or (method == "auto" and M.rows <= BRUTE_FORCE_MAX):
        return _dominance_brute(M)
    if method in ("auto", "assignment"):
        return _dominance_assignment(M)
    raise ValueError(f"unknown method {method!r}")


def find_dominant_submatrix(
    M: ExponentMatrix,
    forced_rows: Iterable[int] = (),
    allowed_rows: Iterable[int] | None = None,
) -> Optional[tuple[tuple[int, ...], DominanceReport]]:
    """Row set of the (constrained) dominant y x y submatrix of an x x y matrix.

    Candidates use every forced row and only allowed rows; the winner must
    have a dominant permutation and a dominant sum strictly above every
    other candidate's. Rows are 0-based and returned sorted.
    """
    x, y = M.shape
    if y > x:
        raise ValueError("need rows >= cols")
    forced = sorted(set(forced_rows))
    allowed = sorted(set(range(x) if allowed_rows is None else allowed_rows))
    if not set(forced) <= set(allowed):
        raise ValueError("forced rows must be allowed")
    if len(forced) > y or len(allowed) < y:
        return None
    free = [r for r in allowed if r not in set(forced)]
    winner = None
    winner_sum = None
    tied = False
    for extra in itertools.combinations(free, y - len(forced)):
        rows = tuple(sorted(forced + list(extra)))
        rep = find_dominant_permutation(M.select(rows))
        if not rep.exists:
            continue
        if winner_sum is None or rep.dominant_sum > winner_sum:
            winner, winner_sum, tied = (rows, rep), rep.dominant_sum, False
        elif rep.dominant_sum == winner_sum:
            tied = True
    if winner is None or tied:
        return None
    return winner


@dataclass(frozen=True)
class DecompositionCertificate:
    parts: tuple[tuple[int, ...], ...]  # column sets
    rows: tuple[tuple[int, ...], ...]  # row set per part
    sums: tuple[int, ...]
    total: int
    sigma_star: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "parts": [[c + 1 for c in p] for p in self.parts],
            "rows": [[r + 1 for r in rs] for rs in self.rows],
            "sums": list(self.sums),
            "dominant_sum": self.total,
            "sigma_star": [r + 1 for r in self.sigma_star],
        }


def decompose_dominance(
    M: ExponentMatrix,
    column_partition: Sequence[Sequence[int]],
    constraints: Sequence[tuple[Iterable[int], Iterable[int] | None]] | None = None,
) -> Optional[DecompositionCertificate]:
    """Certify a dominant permutation from per-part dominant submatrices
    whose row sets are pairwise disjoint.

    ``constraints`` gives (forced_rows, allowed_rows) per part.
    """
    n = M.rows
    if M.cols != n:
        raise ValueError("decomposition needs a square matrix")
    flat = sorted(c for part in column_partition for c in part)
    if flat != list(range(n)):
        raise ValueError("column sets must partition the columns")
    if constraints is None:
        constraints = [((), None)] * len(column_partition)
    sigma = [0] * n
    rows_used: set[int] = set()
    row_sets, sums = [], []
    for part, (forced, allowed) in zip(column_partition, constraints):
        part = list(part)
        found = find_dominant_submatrix(M.select(None, part), forced, allowed)
        if found is None:
            return None
        rows, rep = found
        if rows_used & set(rows):
            return None
        rows_used |= set(rows)
        for local_col, local_row in enumerate(rep.sigma_star):
            sigma[part[local_col]] = rows[local_row]
        row_sets.append(rows)
        sums.append(rep.dominant_sum)
    return DecompositionCertificate(
        tuple(tuple(p) for p in column_partition), tuple(row_sets), tuple(sums), sum(sums), tuple(sigma)
    )


def check_dominance_implies_invertible(M: ExponentMatrix, d: int, seed: int = 0,
                                       ctx: FieldCtx | None = None) -> bool:
    """Lift ``M`` into GF(2^d) with d above its dominant sum; True iff nonsingular."""
    rep = find_dominant_permutation(M)
    if not rep.exists:
        raise PreconditionUnmet("matrix has no dominant permutation")
    if d <= rep.dominant_sum:
        raise PreconditionUnmet(f"degree {d} must exceed dominant sum {rep.dominant_sum}")
    if ctx is None:
        ctx = field_create(d, seed=seed)
    elif ctx.degree != d:
        raise PreconditionUnmet("context degree mismatch")
    return mat_det(lift(M, ctx)) != 0
