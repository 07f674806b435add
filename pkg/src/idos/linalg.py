"""Dense linear algebra over GF(2^d) by Gaussian elimination."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .field import FieldCtx, FieldElement


class LinalgError(ValueError):
    pass


class RankDeficient(LinalgError):
    pass


class Inconsistent(LinalgError):
    pass


class TooLarge(LinalgError):
    pass


@dataclass
class FieldMatrix:
    """Row-major matrix of raw field ints sharing one context."""

    ctx: FieldCtx
    rows: int
    cols: int
    entries: list[int]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise LinalgError(f"expected {self.rows * self.cols} entries, got {len(self.entries)}")

    @classmethod
    def from_rows(cls, ctx: FieldCtx, rows: Sequence[Sequence[int]]) -> "FieldMatrix":
        r = len(rows)
        c = len(rows[0]) if r else 0
        flat = [int(v.value if isinstance(v, FieldElement) else v) for row in rows for v in row]
        return cls(ctx, r, c, flat)

    @classmethod
    def identity(cls, ctx: FieldCtx, n: int) -> "FieldMatrix":
        return cls(ctx, n, n, [int(i == j) for i in range(n) for j in range(n)])

    @classmethod
    def zeros(cls, ctx: FieldCtx, rows: int, cols: int) -> "FieldMatrix":
        return cls(ctx, rows, cols, [0] * (rows * cols))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    def element(self, i: int, j: int) -> FieldElement:
        return FieldElement(self.ctx, self[i, j])

    def row_lists(self) -> list[list[int]]:
        c = self.cols
        return [self.entries[i * c:(i + 1) * c] for i in range(self.rows)]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int] | None = None) -> "FieldMatrix":
        cols = range(self.cols) if cols is None else cols
        return FieldMatrix(self.ctx, len(rows), len(cols), [self[i, j] for i in rows for j in cols])

    def matvec(self, x: Sequence[int]) -> list[int]:
        if len(x) != self.cols:
            raise LinalgError("dimension mismatch")
        mul = self.ctx.mul
        out = []
        for row in self.row_lists():
            acc = 0
            for a, b in zip(row, x):
                if a and b:
                    acc ^= mul(a, b)
            out.append(acc)
        return out

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols,
                "entries": [self.ctx.to_hex(v) for v in self.entries]}

    @classmethod
    def from_json(cls, ctx: FieldCtx, obj: dict) -> "FieldMatrix":
        return cls(ctx, obj["rows"], obj["cols"], [ctx.from_hex(s) for s in obj["entries"]])


def _eliminate(ctx: FieldCtx, rows: list[list[int]], ncols: int) -> list[int]:
    """In-place reduced row echelon form over the first ``ncols`` columns.

    Rows may carry extra augmented entries past ``ncols``. Pivot is the
    first nonzero entry at or below the current row. Returns pivot columns.
    """
    mul, inv = ctx.mul, ctx.inv
    pivots: list[int] = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        prow = rows[r]
        scale = inv(prow[c])
        if scale != 1:
            prow[:] = [mul(v, scale) if v else 0 for v in prow]
        for i in range(nrows):
            if i == r:
                continue
            f = rows[i][c]
            if f:
                row = rows[i]
                for j in range(c, len(row)):
                    if prow[j]:
                        row[j] ^= mul(f, prow[j])
        pivots.append(c)
        r += 1
    return pivots


def mat_rank(A: FieldMatrix) -> int:
    return len(_eliminate(A.ctx, A.row_lists(), A.cols))


def mat_det(A: FieldMatrix) -> int:
    """Determinant by forward elimination; characteristic 2 makes row swaps sign-free."""
    if A.rows != A.cols:
        raise LinalgError("determinant of a non-square matrix")
    ctx = A.ctx
    mul, inv = ctx.mul, ctx.inv
    rows = A.row_lists()
    n = A.rows
    det = 1
    for c in range(n):
        p = next((i for i in range(c, n) if rows[i][c]), None)
        if p is None:
            return 0
        rows[c], rows[p] = rows[p], rows[c]
        pivot = rows[c][c]
        det = mul(det, pivot)
        pinv = inv(pivot)
        for i in range(c + 1, n):
            f = rows[i][c]
            if f:
                f = mul(f, pinv)
                row, prow = rows[i], rows[c]
                for j in range(c, n):
                    if prow[j]:
                        row[j] ^= mul(f, prow[j])
    return det


def mat_det_leibniz(A: FieldMatrix, max_size: int = 6) -> int:
    """Literal permutation sum; sgn is +1 in characteristic 2."""
    if A.rows != A.cols:
        raise LinalgError("determinant of a non-square matrix")
    n = A.rows
    if n > max_size:
        raise TooLarge(f"Leibniz expansion limited to size {max_size}, got {n}")
    mul = A.ctx.mul
    total = 0
    for sigma in itertools.permutations(range(n)):
        term = 1
        for col, row in enumerate(sigma):
            term = mul(term, A[row, col])
            if not term:
                break
        total ^= term
    return total


def mat_solve(A: FieldMatrix, b: Sequence[int]) -> list[int]:
    """Unique solution of ``A x = b`` for square or tall full-column-rank ``A``."""
    if A.rows < A.cols:
        raise LinalgError("system has fewer equations than unknowns")
    if len(b) != A.rows:
        raise LinalgError("right-hand side length mismatch")
    rows = [row + [int(v)] for row, v in zip(A.row_lists(), b)]
    pivots = _eliminate(A.ctx, rows, A.cols)
    if len(pivots) < A.cols:
        raise RankDeficient(f"rank {len(pivots)} < {A.cols}")
    for row in rows[A.cols:]:
        if row[-1]:
            raise Inconsistent("zero row meets nonzero right-hand side")
    return [rows[i][-1] for i in range(A.cols)]


def mat_inverse(A: FieldMatrix) -> FieldMatrix:
    if A.rows != A.cols:
        raise LinalgError("inverse of a non-square matrix")
    n = A.rows
    rows = [row + [int(i == j) for j in range(n)] for i, row in enumerate(A.row_lists())]
    if len(_eliminate(A.ctx, rows, n)) < n:
        raise RankDeficient("matrix is singular")
    return FieldMatrix(A.ctx, n, n, [v for row in rows for v in row[n:]])


def support_has_nontrivial_term(pattern: Sequence[Sequence[bool]]) -> bool:
    """True iff some permutation picks only nonzero entries (perfect matching
    in the column-row support graph, found by augmenting paths)."""
    n = len(pattern)
    if any(len(r) != n for r in pattern):
        raise LinalgError("pattern must be square")
    adj = [[i for i in range(n) if pattern[i][j]] for j in range(n)]
    match_row: list[int | None] = [None] * n

    def augment(col: int, seen: set[int]) -> bool:
        for row in adj[col]:
            if row in seen:
                continue
            seen.add(row)
            if match_row[row] is None or augment(match_row[row], seen):
                match_row[row] = col
                return True
        return False

    return all(augment(j, set()) for j in range(n))


def solve_partial(ctx: FieldCtx, rows: Sequence[Sequence[int]], rhs: Sequence[int]) -> dict[int, int]:
    """Unknowns uniquely fixed by a possibly underdetermined system.

    Unknown ``j`` is determined iff its pivot row in reduced echelon form
    has no entries in free columns. Raises Inconsistent on a contradiction.
    """
    ncols = len(rows[0]) if rows else 0
    aug = [list(r) + [int(v)] for r, v in zip(rows, rhs)]
    pivots = _eliminate(ctx, aug, ncols)
    for row in aug[len(pivots):]:
        if row[-1]:
            raise Inconsistent("zero row meets nonzero right-hand side")
    free = [c for c in range(ncols) if c not in set(pivots)]
    out = {}
    for r, c in enumerate(pivots):
        if not any(aug[r][f] for f in free):
            out[c] = aug[r][-1]
    return out
