"""Exact dense linear algebra over Q and Q[i].

Matrices are plain lists of rows. Entries are ``mpq`` or ``GaussQ``; Python
ints are lifted to ``mpq`` on entry so that division stays exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from gmpy2 import mpq

from .errors import InputError, MembershipError
from .scalars import RATIONAL, format_scalar, parse_scalar


def _lift(x):
    return mpq(x) if isinstance(x, int) else x


def as_matrix(M) -> list:
    return [[_lift(x) for x in row] for row in M]


def zeros(rows: int, cols: int, z=None) -> list:
    z = mpq(0) if z is None else z
    return [[z] * cols for _ in range(rows)]


def identity(n: int) -> list:
    M = zeros(n, n)
    for i in range(n):
        M[i][i] = mpq(1)
    return M


def transpose(M) -> list:
    return [list(col) for col in zip(*M)]


def mat_mul(A, B) -> list:
    """Product of dense matrices; zero entries of ``A`` are skipped."""
    if not A:
        return []
    inner = len(B)
    cols = len(B[0]) if B else 0
    out = []
    for row in A:
        acc = [0] * cols
        for k in range(inner):
            a = row[k]
            if a:
                brow = B[k]
                for j in range(cols):
                    b = brow[j]
                    if b:
                        acc[j] = acc[j] + a * b
        out.append([_lift(x) for x in acc])
    return out


def mat_vec(A, v) -> list:
    out = []
    for row in A:
        s = 0
        for a, x in zip(row, v):
            if a and x:
                s = s + a * x
        out.append(_lift(s))
    return out


def mat_add(A, B) -> list:
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(A, B) -> list:
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_scale(c, A) -> list:
    return [[c * a for a in row] for row in A]


def is_zero(M) -> bool:
    return not any(any(row) for row in M)


def rref(M, ncols: Optional[int] = None):
    """Reduced row echelon form and pivot columns.

    The first nonzero entry at or below the current row is taken as pivot, so
    the output is deterministic; the reduced form itself is unique anyway.
    """
    A = as_matrix(M)
    rows = len(A)
    cols = len(A[0]) if rows else (ncols or 0)
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = next((i for i in range(r, rows) if A[i][c]), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        piv = A[r][c]
        if piv != 1:
            inv = 1 / piv
            A[r] = [x * inv if x else x for x in A[r]]
        prow = A[r]
        support = [j for j in range(c, cols) if prow[j]]
        for i in range(rows):
            if i == r:
                continue
            row = A[i]
            f = row[c]
            if f:
                for j in support:
                    row[j] = row[j] - f * prow[j]
        pivots.append(c)
        r += 1
    return A, pivots


def rank(M) -> int:
    return len(rref(M)[1])


def _null_from_rref(R, pivots, cols) -> list:
    pivot_set = set(pivots)
    basis = []
    for f in range(cols):
        if f in pivot_set:
            continue
        v = [mpq(0)] * cols
        v[f] = mpq(1)
        for i, pc in enumerate(pivots):
            if R[i][f]:
                v[pc] = -R[i][f]
        basis.append(v)
    return basis


def nullspace(M, ncols: Optional[int] = None) -> list:
    """Basis of ``{x : M x = 0}``, one vector per free column."""
    cols = len(M[0]) if M else (ncols or 0)
    R, pivots = rref(M, cols)
    return _null_from_rref(R, pivots, cols)


@dataclass
class SolutionSet:
    """Solutions of ``M x = b``.

    ``particular`` is ``None`` exactly when the system is infeasible; then
    ``augmented_rank == rank + 1`` is the exact certificate, and
    ``failing_row`` (when known) names an equation that the best candidate
    solution violates.
    """

    particular: Optional[list]
    homogeneous_basis: list
    rank: int
    augmented_rank: int
    failing_row: Optional[int] = None
    residual: object = None

    @property
    def feasible(self) -> bool:
        return self.particular is not None

    def certificate(self) -> dict:
        out = {"rank": self.rank, "augmented_rank": self.augmented_rank}
        if self.failing_row is not None:
            out["failing_row"] = self.failing_row
            out["residual"] = format_scalar(self.residual)
        return out


def solve_affine(M, b: Sequence) -> SolutionSet:
    rows = len(M)
    if len(b) != rows:
        raise InputError(f"right-hand side has length {len(b)}, expected {rows}")
    cols = len(M[0]) if rows else 0
    aug = [list(row) + [b_i] for row, b_i in zip(M, b)]
    R, pivots = rref(aug, cols + 1)
    if pivots and pivots[-1] == cols:
        r = len(pivots) - 1
        return SolutionSet(None, _null_from_rref(R, pivots[:-1], cols), r, r + 1)
    x = [mpq(0)] * cols
    for i, pc in enumerate(pivots):
        x[pc] = R[i][cols]
    r = len(pivots)
    return SolutionSet(x, _null_from_rref(R, pivots, cols), r, r)


def sparse_rref(rows, ncols: int):
    """Incremental sparse elimination.

    ``rows`` are lists of ``(column, value)``. Returns the reduced row space as
    ``{pivot_column: {column: value}}`` (each row normalized at its pivot and
    zero at every other pivot) and the indices of the rows that were
    independent of their predecessors.
    """
    basis = {}
    selected = []
    for idx, row in enumerate(rows):
        vec = {}
        for c, v in row:
            if not 0 <= c < ncols:
                raise InputError(f"column {c} out of range")
            v = vec.get(c, 0) + _lift(v)
            if v:
                vec[c] = v
            else:
                vec.pop(c, None)
        # basis rows are fully reduced, so one pass over the original pivot
        # hits leaves no pivot column behind
        for pc in [c for c in vec if c in basis]:
            f = vec.get(pc)
            if not f:
                continue
            for c, v in basis[pc].items():
                nv = vec.get(c, 0) - f * v
                if nv:
                    vec[c] = nv
                else:
                    vec.pop(c, None)
        if not vec:
            continue
        pc = min(vec)
        inv = 1 / vec[pc]
        vec = {c: _lift(v * inv) for c, v in vec.items()}
        for other in basis.values():
            f = other.get(pc)
            if f:
                for c, v in vec.items():
                    nv = other.get(c, 0) - f * v
                    if nv:
                        other[c] = nv
                    else:
                        other.pop(c, None)
        basis[pc] = vec
        selected.append(idx)
    return basis, selected


def sparse_nullspace(rows, ncols: int) -> list:
    """Nullspace basis of a sparse system, one vector per free column."""
    basis, _ = sparse_rref(rows, ncols)
    out = []
    for f in range(ncols):
        if f in basis:
            continue
        v = [mpq(0)] * ncols
        v[f] = mpq(1)
        for pc, row in basis.items():
            x = row.get(f)
            if x:
                v[pc] = -x
        out.append(v)
    return out


class PreparedSystem:
    """A fixed sparse coefficient matrix solved against many right-hand sides.

    Construction selects a maximal independent subset of rows and inverts the
    elimination on that subset once. ``solve`` then produces the candidate
    solution with free variables at zero and checks it against *every*
    equation. A failed check is an exact infeasibility proof: the selected rows
    span all rows of ``M``, so any solution would have to agree with the
    candidate on them.
    """

    def __init__(self, sparse_rows: list, ncols: int):
        self.rows = [[(c, _lift(v)) for c, v in row if v] for row in sparse_rows]
        self.ncols = ncols
        _, selected = sparse_rref(self.rows, ncols)
        self.selected = selected
        r = len(selected)
        aug = []
        for k, idx in enumerate(selected):
            dense = [mpq(0)] * (ncols + r)
            for c, v in self.rows[idx]:
                dense[c] = v
            dense[ncols + k] = mpq(1)
            aug.append(dense)
        R, pivots = rref(aug, ncols + r)
        self.pivots = pivots[:r]
        self.transform = [
            [(j, row[ncols + j]) for j in range(r) if row[ncols + j]] for row in R
        ]
        self.rank = r
        self.null_basis = _null_from_rref([row[:ncols] for row in R], self.pivots, ncols)

    def solve(self, b: Sequence) -> SolutionSet:
        if len(b) != len(self.rows):
            raise InputError(f"right-hand side has length {len(b)}, expected {len(self.rows)}")
        z = (b[0] - b[0]) if b else mpq(0)
        bs = [b[i] for i in self.selected]
        x = [z] * self.ncols
        for pc, trow in zip(self.pivots, self.transform):
            s = z
            for j, t in trow:
                v = bs[j]
                if v:
                    s = s + t * v
            x[pc] = s
        for k, row in enumerate(self.rows):
            s = -b[k]
            for c, v in row:
                xc = x[c]
                if xc:
                    s = s + v * xc
            if s:
                return SolutionSet(None, self.null_basis, self.rank, self.rank + 1, k, s)
        return SolutionSet(x, self.null_basis, self.rank, self.rank)


def unit_left(p: int, q: int, M) -> list:
    """``E_pq @ M`` for a dense square ``M`` (0-based indices)."""
    n = len(M)
    z = M[0][0] - M[0][0]
    out = [[z] * n for _ in range(n)]
    out[p] = list(M[q])
    return out


def unit_right(M, p: int, q: int) -> list:
    """``M @ E_pq`` for a dense square ``M`` (0-based indices)."""
    n = len(M)
    z = M[0][0] - M[0][0]
    out = [[z] * n for _ in range(n)]
    for x in range(n):
        out[x][q] = M[x][p]
    return out


def mult_rep(side: str, A, basis) -> list:
    """Matrix of ``X -> A X`` (``side='left'``) or ``X -> X A`` on basis coordinates.

    ``basis`` needs ``n``, ``positions`` and ``index``. Left representations
    compose as a homomorphism, right ones as an anti-homomorphism.
    """
    if side not in ("left", "right"):
        raise InputError(f"side must be 'left' or 'right', not {side!r}")
    n = basis.n
    allowed = basis.index
    for p in range(n):
        for q in range(n):
            if A[p][q] and (p, q) not in allowed:
                raise MembershipError(f"entry ({p + 1},{q + 1}) lies outside the algebra")
    d = len(basis.positions)
    z = mpq(0)
    out = [[z] * d for _ in range(d)]
    for j, (p, q) in enumerate(basis.positions):
        if side == "left":
            # A E_pq has column q equal to column p of A
            for x in range(n):
                a = A[x][p]
                if a:
                    out[allowed[(x, q)]][j] = _lift(a)
        else:
            # E_pq A has row p equal to row q of A
            for y in range(n):
                a = A[q][y]
                if a:
                    out[allowed[(p, y)]][j] = _lift(a)
    return out


def parse_matrix(text: str, field=RATIONAL) -> list:
    """One row per line, whitespace-separated entries; blank lines and ``#`` comments skipped."""
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([parse_scalar(tok, field) for tok in line.split()])
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise InputError("ragged matrix: rows have different lengths")
    return rows


def format_matrix(M) -> str:
    return "\n".join(" ".join(format_scalar(x) for x in row) for row in M) + "\n"
