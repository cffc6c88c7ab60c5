"""Dense exact linear algebra over the integers and rationals.

Entries are Python ints and ``fractions.Fraction`` values, so every operation
is exact at arbitrary precision; nothing here ever rounds.  Matrices are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DimensionError

# Fixed 61-bit Mersenne prime used by the certified full-rank fast path.
_RANK_PRIME = (1 << 61) - 1


class IntMatrix:
    """Immutable dense matrix with arbitrary-precision integer entries."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, data: Iterable[Sequence[int]]):
        rows = tuple(tuple(int(x) for x in row) for row in data)
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise DimensionError("ragged rows")
        self._data = rows
        self.rows = len(rows)
        self.cols = len(rows[0]) if rows else 0

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, rows: int, cols: int) -> "IntMatrix":
        return cls([[0] * cols for _ in range(rows)])

    @property
    def data(self) -> tuple[tuple[int, ...], ...]:
        return self._data

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self._data[i][j]

    def row(self, i: int) -> tuple[int, ...]:
        return self._data[i]

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_symmetric(self) -> bool:
        return self.is_square() and all(
            self._data[i][j] == self._data[j][i]
            for i in range(self.rows)
            for j in range(i + 1, self.cols)
        )

    def transpose(self) -> "IntMatrix":
        return IntMatrix(
            [[self._data[i][j] for i in range(self.rows)] for j in range(self.cols)]
        )

    def mul(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise DimensionError(f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        bt = other.transpose()._data
        return IntMatrix(
            [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in self._data]
        )

    def mul_vector(self, v: Sequence[int]) -> list[int]:
        if self.cols != len(v):
            raise DimensionError("vector length mismatch")
        return [sum(x * y for x, y in zip(row, v)) for row in self._data]

    def trace(self) -> int:
        if not self.is_square():
            raise DimensionError("trace of non-square matrix")
        return sum(self._data[i][i] for i in range(self.rows))

    def determinant(self) -> int:
        """Exact determinant by fraction-free Bareiss elimination."""
        if not self.is_square():
            raise DimensionError("determinant of non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        m = [list(row) for row in self._data]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if m[k][k] == 0:
                for i in range(k + 1, n):
                    if m[i][k] != 0:
                        m[k], m[i] = m[i], m[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
                m[i][k] = 0
            prev = m[k][k]
        return sign * m[n - 1][n - 1]

    def to_rational(self) -> "RatMatrix":
        return RatMatrix(self._data)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IntMatrix) and self._data == other._data

    def __hash__(self) -> int:
        return hash(self._data)

    def __repr__(self) -> str:
        return f"IntMatrix({[list(r) for r in self._data]!r})"


class RatMatrix:
    """Immutable dense matrix with exact rational entries.

    Entries are ``Fraction`` values, which are reduced to lowest terms with a
    positive denominator on construction; integrality checks are therefore a
    single denominator comparison per entry.
    """

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, data: Iterable[Sequence]):
        rows = tuple(
            tuple(x if isinstance(x, Fraction) else Fraction(x) for x in row)
            for row in data
        )
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise DimensionError("ragged rows")
        self._data = rows
        self.rows = len(rows)
        self.cols = len(rows[0]) if rows else 0

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls([[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)])

    @property
    def data(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._data

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self._data[i][j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._data[i]

    def is_square(self) -> bool:
        return self.rows == self.cols

    def transpose(self) -> "RatMatrix":
        return RatMatrix(
            [[self._data[i][j] for i in range(self.rows)] for j in range(self.cols)]
        )

    def mul(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise DimensionError(f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        bt = other.transpose()._data
        return RatMatrix(
            [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in self._data]
        )

    def denominator_lcm(self) -> int:
        """Least common multiple of all entry denominators (1 for empty)."""
        acc = 1
        for row in self._data:
            for x in row:
                acc = math.lcm(acc, x.denominator)
        return acc

    def scaled_int(self, factor: int) -> IntMatrix:
        """``factor * self`` as an integer matrix; factor must clear all denominators."""
        out = []
        for row in self._data:
            r = []
            for x in row:
                num = x.numerator * factor
                if num % x.denominator != 0:
                    raise ValueError(f"{factor} does not clear denominator of {x}")
                r.append(num // x.denominator)
            out.append(r)
        return IntMatrix(out)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RatMatrix) and self._data == other._data

    def __hash__(self) -> int:
        return hash(self._data)

    def __repr__(self) -> str:
        return f"RatMatrix({[[str(x) for x in r] for r in self._data]!r})"


class IntPolynomial:
    """Polynomial with integer coefficients, stored degree-ascending.

    Trailing zero coefficients are stripped; the zero polynomial has an empty
    coefficient tuple and degree -1.
    """

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Iterable[int]):
        coeffs = [int(c) for c in coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coefficients = tuple(coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def is_monic(self) -> bool:
        return bool(self.coefficients) and self.coefficients[-1] == 1

    def evaluate(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IntPolynomial) and self.coefficients == other.coefficients

    def __hash__(self) -> int:
        return hash(self.coefficients)

    def __repr__(self) -> str:
        return f"IntPolynomial({list(self.coefficients)!r})"

    def __str__(self) -> str:
        if not self.coefficients:
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coefficients[k]
            if c == 0:
                continue
            if k == 0:
                t = str(abs(c))
            else:
                mag = "" if abs(c) == 1 else f"{abs(c)}*"
                t = f"{mag}x" + (f"^{k}" if k > 1 else "")
            if not terms:
                terms.append(t if c > 0 else f"-{t}")
            else:
                terms.append(f"+ {t}" if c > 0 else f"- {t}")
        return " ".join(terms)


def char_poly(m: IntMatrix) -> IntPolynomial:
    """Characteristic polynomial det(xI - M), monic, exact.

    Faddeev-LeVerrier recursion: every division by the step index is exact
    over the integers, so no rational arithmetic is needed.
    """
    if not m.is_square():
        raise DimensionError("characteristic polynomial needs a square matrix")
    n = m.rows
    if n == 0:
        return IntPolynomial([1])
    a = [list(row) for row in m.data]
    descending = [1]
    b = [row[:] for row in a]
    c = -sum(b[i][i] for i in range(n))
    descending.append(c)
    for k in range(2, n + 1):
        for i in range(n):
            b[i][i] += c
        b = [
            [sum(a[i][t] * b[t][j] for t in range(n)) for j in range(n)]
            for i in range(n)
        ]
        tr = sum(b[i][i] for i in range(n))
        q, r = divmod(-tr, k)
        if r != 0:
            raise ArithmeticError("inexact division in Faddeev-LeVerrier step")
        c = q
        descending.append(c)
    return IntPolynomial(reversed(descending))


def _snf_swap_rows(m: list[list[int]], u: list[list[int]], i: int, j: int) -> None:
    m[i], m[j] = m[j], m[i]
    u[i], u[j] = u[j], u[i]


def _snf_swap_cols(m: list[list[int]], v: list[list[int]], i: int, j: int) -> None:
    for row in m:
        row[i], row[j] = row[j], row[i]
    for row in v:
        row[i], row[j] = row[j], row[i]


def smith_normal_form(m: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form: returns (U, D, V) with U*M*V = D exactly.

    U and V are unimodular, D is diagonal with non-negative entries forming a
    divisibility chain d1 | d2 | ... .  Pivots are chosen with minimal nonzero
    absolute value, which keeps intermediate growth down and makes D canonical.
    """
    rows, cols = m.rows, m.cols
    d = [list(row) for row in m.data]
    u = [[1 if i == j else 0 for j in range(rows)] for i in range(rows)]
    v = [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]

    def min_pivot(t: int) -> tuple[int, int] | None:
        best = None
        best_val = None
        for i in range(t, rows):
            di = d[i]
            for j in range(t, cols):
                x = di[j]
                if x != 0:
                    ax = abs(x)
                    if best_val is None or ax < best_val:
                        best, best_val = (i, j), ax
                        if ax == 1:
                            return best
        return best

    t = 0
    while t < min(rows, cols):
        pos = min_pivot(t)
        if pos is None:
            break
        if pos[0] != t:
            _snf_swap_rows(d, u, t, pos[0])
        if pos[1] != t:
            _snf_swap_cols(d, v, t, pos[1])

        while True:
            # Clear column t below the pivot with Euclidean row steps.
            dirty = False
            for i in range(t + 1, rows):
                if d[i][t] != 0:
                    q = d[i][t] // d[t][t]
                    if q:
                        for j in range(cols):
                            d[i][j] -= q * d[t][j]
                        for j in range(rows):
                            u[i][j] -= q * u[t][j]
                    if d[i][t] != 0:
                        # Remainder is smaller than the pivot: promote it.
                        _snf_swap_rows(d, u, t, i)
                        dirty = True
            if dirty:
                continue
            for j in range(t + 1, cols):
                if d[t][j] != 0:
                    q = d[t][j] // d[t][t]
                    if q:
                        for i in range(rows):
                            d[i][j] -= q * d[i][t]
                        for i in range(cols):
                            v[i][j] -= q * v[i][t]
                    if d[t][j] != 0:
                        _snf_swap_cols(d, v, t, j)
                        dirty = True
            if dirty:
                continue
            # Row and column are clear; enforce divisibility of the rest.
            piv = d[t][t]
            offender = None
            for i in range(t + 1, rows):
                di = d[i]
                for j in range(t + 1, cols):
                    if di[j] % piv != 0:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            for j in range(cols):
                d[t][j] += d[offender][j]
            for j in range(rows):
                u[t][j] += u[offender][j]

        if d[t][t] < 0:
            for j in range(cols):
                d[t][j] = -d[t][j]
            for j in range(rows):
                u[t][j] = -u[t][j]
        t += 1

    return IntMatrix(u), IntMatrix(d), IntMatrix(v)


def invariant_factors(m: IntMatrix) -> tuple[int, ...]:
    """Diagonal of the Smith normal form, padded with zeros to min(rows, cols)."""
    _, d, _ = smith_normal_form(m)
    k = min(m.rows, m.cols)
    return tuple(d[i, i] for i in range(k))


def rank_mod(m: IntMatrix, p: int) -> int:
    """Rank of M over the field Z/pZ (p prime), by Gaussian elimination."""
    a = [[x % p for x in row] for row in m.data]
    rows, cols = m.rows, m.cols
    rank = 0
    for c in range(cols):
        piv = None
        for i in range(rank, rows):
            if a[i][c]:
                piv = i
                break
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = pow(a[rank][c], p - 2, p)
        row_r = a[rank]
        for i in range(rank + 1, rows):
            f = a[i][c]
            if f:
                f = (f * inv) % p
                ai = a[i]
                for j in range(c, cols):
                    ai[j] = (ai[j] - f * row_r[j]) % p
        rank += 1
        if rank == rows:
            break
    return rank


def _rank_exact(data: Sequence[Sequence[Fraction]]) -> int:
    a = [list(row) for row in data]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    rank = 0
    for c in range(cols):
        piv = None
        for i in range(rank, rows):
            if a[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        row_r = a[rank]
        inv = row_r[c]
        for i in range(rank + 1, rows):
            if a[i][c] != 0:
                f = a[i][c] / inv
                ai = a[i]
                for j in range(c, cols):
                    ai[j] -= f * row_r[j]
        rank += 1
        if rank == rows:
            break
    return rank


def rank_rational(m: RatMatrix) -> int:
    """Exact rank over the rationals.

    Fast path: rank modulo a fixed 61-bit prime.  Full modular rank certifies
    full rational rank (a nonzero minor mod p is a nonzero minor over Q); any
    deficient modular rank is re-verified by exact fraction-free elimination.
    """
    if m.rows == 0 or m.cols == 0:
        return 0
    # Clear denominators row by row; the rank is unchanged.
    int_rows = []
    for row in m.data:
        l = 1
        for x in row:
            l = math.lcm(l, x.denominator)
        int_rows.append([x.numerator * (l // x.denominator) for x in row])
    mi = IntMatrix(int_rows)
    r = rank_mod(mi, _RANK_PRIME)
    if r == min(m.rows, m.cols):
        return r
    return _rank_exact(m.data)


def conjugate(q: RatMatrix, a: IntMatrix) -> RatMatrix:
    """Exact Q^T * A * Q, reduced to lowest terms.

    Internally scales Q to an integer matrix by the lcm of its denominators,
    conjugates over the integers, and divides once at the end; this avoids
    churning Fraction normalizations in the inner products.
    """
    if not (q.is_square() and a.is_square() and q.rows == a.rows):
        raise DimensionError("conjugation needs square matrices of equal order")
    level = q.denominator_lcm()
    c = q.scaled_int(level)
    b = c.transpose().mul(a).mul(c)
    den = level * level
    return RatMatrix([[Fraction(x, den) for x in row] for row in b.data])


def conjugate_scaled(c: IntMatrix, a: IntMatrix) -> IntMatrix:
    """C^T * A * C over the integers (C a scaled orthogonal matrix)."""
    return c.transpose().mul(a).mul(c)


def is_integral(m: RatMatrix) -> bool:
    """True iff every entry has denominator 1."""
    return all(x.denominator == 1 for row in m.data for x in row)
