"""Exact linear algebra over the rationals and prime fields.

Elements of ``Q`` are :class:`fractions.Fraction`; elements of ``F_p`` are
ints in ``range(p)``.  Every decomposition here is deterministic:

* ``rref`` pivots on the leftmost nonzero column, topmost available row;
* ``nullspace`` returns one basis vector per free column (in column order),
  with a 1 at that column;
* ``cokernel`` keeps the coordinates of the codomain that are *not* pivots of
  the row-reduced image, and projects onto them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InputError, Mismatch, NotInvertible


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class FieldSpec:
    """``p == 0`` means the rationals, otherwise the prime field with ``p`` elements."""

    p: int = 0

    def __post_init__(self):
        if self.p and not _is_prime(self.p):
            raise InputError(f"F{self.p}: characteristic must be prime")

    @classmethod
    def parse(cls, text) -> "FieldSpec":
        if isinstance(text, FieldSpec):
            return text
        t = str(text).strip()
        if t in ("Q", "QQ"):
            return cls(0)
        m = re.fullmatch(r"F_?(\d+)", t)
        if not m:
            raise InputError(f"unknown field {text!r} (expected Q or Fp)")
        return cls(int(m.group(1)))

    def __str__(self):
        return "Q" if self.p == 0 else f"F{self.p}"

    @property
    def zero(self):
        return 0 if self.p else Fraction(0)

    @property
    def one(self):
        return 1 if self.p else Fraction(1)

    def elem(self, x):
        """Coerce an int, Fraction or string like ``"-3/4"`` into the field."""
        if isinstance(x, str):
            try:
                x = Fraction(x.strip())
            except (ValueError, ZeroDivisionError) as exc:
                raise InputError(f"bad scalar {x!r}") from exc
        if self.p == 0:
            return Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise InputError(f"{x} is not defined in {self}")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return int(x) % self.p

    def fmt(self, x) -> str:
        return str(x)

    def inv(self, x):
        if not x:
            raise ZeroDivisionError("inverse of zero")
        return pow(x, -1, self.p) if self.p else 1 / x

    def random(self, rng, lo: int = -2, hi: int = 2):
        """A random element; for Q an integer in ``[lo, hi]``."""
        if self.p:
            return rng.randrange(self.p)
        return Fraction(rng.randint(lo, hi))


QQ = FieldSpec(0)


class ExactMatrix:
    """Immutable ``rows x cols`` matrix with entries in ``field``.

    Stored row-major; ``A @ v`` for a column vector, so a linear map
    ``V -> W`` has shape ``dim W x dim V``.
    """

    __slots__ = ("field", "rows", "cols", "data", "_hash")

    def __init__(self, field: FieldSpec, rows: int, cols: int, data):
        self.field = field
        self.rows = rows
        self.cols = cols
        self.data = tuple(tuple(r) for r in data)
        self._hash = None
        if len(self.data) != rows or any(len(r) != cols for r in self.data):
            raise ValueError(f"data does not have shape {rows}x{cols}")

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_rows(cls, field, rows: Sequence[Sequence], cols: int | None = None):
        rows = [[field.elem(x) for x in r] for r in rows]
        if cols is None:
            if not rows:
                raise ValueError("cannot infer the column count of an empty matrix")
            cols = len(rows[0])
        return cls(field, len(rows), cols, rows)

    @classmethod
    def zeros(cls, field, rows: int, cols: int):
        z = field.zero
        return cls(field, rows, cols, [[z] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, field, n: int):
        z, o = field.zero, field.one
        return cls(field, n, n, [[o if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def unit_columns(cls, field, n: int, idx: Sequence[int]):
        """The ``n x len(idx)`` matrix whose columns are the unit vectors ``e_i``."""
        z, o = field.zero, field.one
        return cls(field, n, len(idx), [[o if i == j else z for j in idx] for i in range(n)])

    # -- basics -------------------------------------------------------------
    @property
    def shape(self):
        return (self.rows, self.cols)

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return (self.field == other.field and self.shape == other.shape
                and self.data == other.data)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field, self.rows, self.cols, self.data))
        return self._hash

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in r) for r in self.data)
        return f"ExactMatrix<{self.field}>({self.rows}x{self.cols}: [{body}])"

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def to_lists(self):
        return [list(r) for r in self.data]

    def to_strings(self):
        return [[str(x) for x in r] for r in self.data]

    def _check_field(self, other):
        if self.field != other.field:
            raise Mismatch(f"field {self.field} vs {other.field}")

    @property
    def T(self):
        return ExactMatrix(self.field, self.cols, self.rows,
                           [[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def is_zero(self):
        return all(not x for r in self.data for x in r)

    # -- arithmetic -----------------------------------------------------------
    def __matmul__(self, other: "ExactMatrix"):
        self._check_field(other)
        if self.cols != other.rows:
            raise Mismatch(f"cannot multiply {self.shape} by {other.shape}")
        p = self.field.p
        bt = list(zip(*other.data)) if other.rows else [()] * other.cols
        out = []
        z = self.field.zero
        for r in self.data:
            row = []
            for c in bt:
                s = z
                for a, b in zip(r, c):
                    if a and b:
                        s += a * b
                row.append(s % p if p else s)
            out.append(row)
        return ExactMatrix(self.field, self.rows, other.cols, out)

    def _zip(self, other, op):
        self._check_field(other)
        if self.shape != other.shape:
            raise Mismatch(f"shape {self.shape} vs {other.shape}")
        p = self.field.p
        return ExactMatrix(self.field, self.rows, self.cols,
                           [[(op(a, b) % p if p else op(a, b)) for a, b in zip(r, s)]
                            for r, s in zip(self.data, other.data)])

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        c = self.field.elem(c)
        p = self.field.p
        return ExactMatrix(self.field, self.rows, self.cols,
                           [[(c * a % p if p else c * a) for a in r] for r in self.data])

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]):
        return ExactMatrix(self.field, len(rows), len(cols),
                           [[self.data[i][j] for j in cols] for i in rows])

    # -- decompositions -------------------------------------------------------
    def rref(self):
        """Return ``(R, pivots)``; ``R`` keeps only the nonzero rows."""
        rows, piv = rref_rows(self.field, self.to_lists(), self.cols)
        return ExactMatrix(self.field, len(rows), self.cols, rows), piv

    def rank(self) -> int:
        return len(rref_rows(self.field, self.to_lists(), self.cols)[1])

    def nullspace(self) -> "ExactMatrix":
        """Kernel basis as the columns of a ``cols x k`` matrix."""
        return nullspace(self)

    def inverse(self) -> "ExactMatrix":
        return inverse(self)


def rref_rows(field: FieldSpec, rows: list[list], ncols: int):
    """Row-reduce a list of rows in place; return (nonzero rows, pivot columns)."""
    p = field.p
    r = 0
    pivots = []
    m = len(rows)
    for c in range(ncols):
        if r == m:
            break
        k = next((i for i in range(r, m) if rows[i][c]), None)
        if k is None:
            continue
        rows[r], rows[k] = rows[k], rows[r]
        pr = rows[r]
        inv = field.inv(pr[c])
        if p:
            pr[:] = [x * inv % p for x in pr]
        else:
            pr[:] = [x * inv for x in pr]
        for i in range(m):
            if i != r and rows[i][c]:
                f = rows[i][c]
                ri = rows[i]
                if p:
                    rows[i] = [(a - f * b) % p for a, b in zip(ri, pr)]
                else:
                    rows[i] = [a - f * b if b else a for a, b in zip(ri, pr)]
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def nullspace(A: ExactMatrix) -> ExactMatrix:
    F = A.field
    R, piv = rref_rows(F, A.to_lists(), A.cols)
    pivset = set(piv)
    free = [j for j in range(A.cols) if j not in pivset]
    cols = []
    p = F.p
    for f in free:
        v = [F.zero] * A.cols
        v[f] = F.one
        for row, pc in zip(R, piv):
            if row[f]:
                v[pc] = (-row[f]) % p if p else -row[f]
        cols.append(v)
    return ExactMatrix(F, A.cols, len(free), [[c[i] for c in cols] for i in range(A.cols)])


def free_columns(A: ExactMatrix) -> list[int]:
    """Column indices that are not pivots of ``rref(A)``; the rows of a
    :func:`nullspace` basis at these indices form an identity matrix."""
    piv = set(rref_rows(A.field, A.to_lists(), A.cols)[1])
    return [j for j in range(A.cols) if j not in piv]


def cokernel(A: ExactMatrix):
    """Cokernel of ``A : V -> W`` as ``(P, C)``.

    ``C`` lists the coordinates of ``W`` complementary to the pivot set of the
    row-reduced image (rows of ``A^T``); ``P : W -> k^|C|`` is the projection
    with ``P @ A == 0`` and ``P`` restricted to the columns ``C`` equal to the
    identity.
    """
    F = A.field
    p = F.p
    R, piv = rref_rows(F, A.T.to_lists(), A.rows)
    pivset = set(piv)
    comp = [j for j in range(A.rows) if j not in pivset]
    P = [[F.zero] * A.rows for _ in comp]
    for i, c in enumerate(comp):
        P[i][c] = F.one
        for row, pc in zip(R, piv):
            if row[c]:
                P[i][pc] = (-row[c]) % p if p else -row[c]
    return ExactMatrix(F, len(comp), A.rows, P), comp


def solve(A: ExactMatrix, B: ExactMatrix) -> ExactMatrix:
    """Some ``X`` with ``A @ X == B`` (free variables set to zero).

    Raises :class:`NotInvertible` when the system is inconsistent.
    """
    A._check_field(B)
    if A.rows != B.rows:
        raise Mismatch(f"solve: {A.shape} vs {B.shape}")
    F = A.field
    aug = [list(a) + list(b) for a, b in zip(A.data, B.data)]
    R, piv = rref_rows(F, aug, A.cols + B.cols)
    if any(pc >= A.cols for pc in piv):
        raise NotInvertible("linear system has no solution")
    X = [[F.zero] * B.cols for _ in range(A.cols)]
    for row, pc in zip(R, piv):
        X[pc] = list(row[A.cols:])
    return ExactMatrix(F, A.cols, B.cols, X)


def inverse(A: ExactMatrix) -> ExactMatrix:
    if A.rows != A.cols:
        raise NotInvertible(f"non-square matrix {A.shape}")
    n = A.rows
    if A.rank() != n:
        raise NotInvertible("singular matrix")
    return solve(A, ExactMatrix.identity(A.field, n))


def hstack(field: FieldSpec, rows: int, blocks: Iterable[ExactMatrix]) -> ExactMatrix:
    blocks = list(blocks)
    cols = sum(b.cols for b in blocks)
    data = [[] for _ in range(rows)]
    for b in blocks:
        if b.rows != rows:
            raise Mismatch("hstack: row counts differ")
        for i in range(rows):
            data[i].extend(b.data[i])
    return ExactMatrix(field, rows, cols, data)


def vstack(field: FieldSpec, cols: int, blocks: Iterable[ExactMatrix]) -> ExactMatrix:
    data = []
    for b in blocks:
        if b.cols != cols:
            raise Mismatch("vstack: column counts differ")
        data.extend(b.data)
    return ExactMatrix(field, len(data), cols, data)


def block_diag(field: FieldSpec, blocks: Sequence[ExactMatrix]) -> ExactMatrix:
    R = sum(b.rows for b in blocks)
    C = sum(b.cols for b in blocks)
    out = [[field.zero] * C for _ in range(R)]
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.rows):
            out[r0 + i][c0:c0 + b.cols] = b.data[i]
        r0 += b.rows
        c0 += b.cols
    return ExactMatrix(field, R, C, out)


def random_matrix(field: FieldSpec, rows: int, cols: int, rng) -> ExactMatrix:
    return ExactMatrix(field, rows, cols,
                       [[field.random(rng) for _ in range(cols)] for _ in range(rows)])


def product(field: FieldSpec, n: int, mats: Iterable[ExactMatrix]) -> ExactMatrix:
    """Composite ``m_k @ ... @ m_1`` of maps given in application order, starting in dim ``n``."""
    acc = None
    for m in mats:
        acc = m if acc is None else m @ acc
    return ExactMatrix.identity(field, n) if acc is None else acc
