"""Rational orthogonal matrices: levels, enumeration, canonical forms, bounds.

A rational orthogonal matrix Q of level l satisfies Q^T Q = I with l the
least positive integer making l*Q integral.  Enumeration at a target level l
walks integer matrices C = l*Q whose columns are pairwise orthogonal with
squared norm l^2; level-1 matrices are exactly the signed permutations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import DimensionError, FormatError, GuardError
from .linalg import IntMatrix, RatMatrix
from .rng import Stream

ENUM_N_LIMIT = 6
ENUM_LEVEL_LIMIT = 5

MODE_EXACT = "exact-level"
MODE_DIVIDES = "level-divides"


def level(m: RatMatrix) -> int:
    """Least positive integer l such that l*M is integral."""
    return m.denominator_lcm()


class RationalOrthogonalMatrix:
    """A rational matrix Q with Q^T Q = I, plus its cached level."""

    __slots__ = ("matrix", "level", "_scaled")

    def __init__(self, matrix: RatMatrix, validate: bool = True):
        if not matrix.is_square():
            raise DimensionError("orthogonal matrices are square")
        self.matrix = matrix
        self.level = matrix.denominator_lcm()
        self._scaled: IntMatrix | None = None
        if validate:
            c = self.scaled()
            n = matrix.rows
            l2 = self.level * self.level
            prod = c.transpose().mul(c)
            expected = [[l2 if i == j else 0 for j in range(n)] for i in range(n)]
            if [list(r) for r in prod.data] != expected:
                raise ValueError("matrix is not orthogonal")

    @property
    def n(self) -> int:
        return self.matrix.rows

    def scaled(self) -> IntMatrix:
        """level * Q as an integer matrix (cached)."""
        if self._scaled is None:
            self._scaled = self.matrix.scaled_int(self.level)
        return self._scaled

    def is_signed_permutation(self) -> bool:
        return self.level == 1

    def row_sums(self) -> tuple[Fraction, ...]:
        return tuple(sum(row, Fraction(0)) for row in self.matrix.data)

    def mul(self, other: "RationalOrthogonalMatrix") -> "RationalOrthogonalMatrix":
        return RationalOrthogonalMatrix(self.matrix.mul(other.matrix), validate=False)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, RationalOrthogonalMatrix)
            and self.matrix == other.matrix
        )

    def __hash__(self) -> int:
        return hash(self.matrix)

    def __repr__(self) -> str:
        return f"RationalOrthogonalMatrix({self.matrix!r})"


def is_regular(q: RationalOrthogonalMatrix) -> bool:
    """True iff every row sums to exactly 1."""
    return all(s == 1 for s in q.row_sums())


def count_bound(n: int, lv: int) -> int:
    """Upper bound (2n)^(l^2 * n) on the number of matrices with level dividing l."""
    if n < 1 or lv < 1:
        raise ValueError("order and level must be positive")
    return (2 * n) ** (lv * lv * n)


def pair_count_bound(n: int, s: int) -> tuple[int, int]:
    """(falling-factorial square, n^(2s) majorant) for row/column placements.

    Counts the ordered choices of s fractional row positions and s fractional
    column positions inside an n x n matrix.
    """
    if s > n or s < 0:
        raise ValueError("block size must satisfy 0 <= s <= n")
    ff = 1
    for k in range(s):
        ff *= n - k
    return ff * ff, n ** (2 * s)


def _magnitude_tuples(n: int, target: int) -> list[tuple[int, ...]]:
    """Non-negative integer tuples with squared norm ``target``, colex order."""
    out: list[tuple[int, ...]] = []
    buf = [0] * n

    def rec(pos: int, rem: int) -> None:
        if pos == n:
            if rem == 0:
                out.append(tuple(buf))
            return
        cap = math.isqrt(rem)
        for v in range(cap + 1):
            buf[pos] = v
            rec(pos + 1, rem - v * v)
        buf[pos] = 0

    rec(0, target)
    out.sort(key=lambda t: tuple(reversed(t)))
    return out


def _candidate_columns(n: int, lv: int, normalized: bool) -> list[tuple[int, ...]]:
    """Integer columns of squared norm lv^2, in the fixed stream order.

    Magnitude patterns come first (colexicographic), then sign patterns within
    each pattern ('+' before '-', earliest nonzero position most significant).
    With ``normalized`` the first nonzero entry is kept positive, which picks
    one representative per sign orbit.
    """
    cols: list[tuple[int, ...]] = []
    for mags in _magnitude_tuples(n, lv * lv):
        support = [i for i, v in enumerate(mags) if v]
        k = len(support)
        sign_count = 1 << (k - 1) if normalized else 1 << k
        for sbits in range(sign_count):
            col = list(mags)
            for b, pos in enumerate(support):
                if (sbits >> (k - 1 - b)) & 1:
                    col[pos] = -col[pos]
            cols.append(tuple(col))
    return cols


def _column_level(chosen: Sequence[tuple[int, ...]], lv: int) -> int:
    content = 0
    for col in chosen:
        for x in col:
            content = math.gcd(content, x)
    return lv // math.gcd(lv, content)


def enumerate_level(
    n: int,
    lv: int,
    mode: str = MODE_EXACT,
    quotient_signed_perms: bool = False,
    n_limit: int = ENUM_N_LIMIT,
    level_limit: int = ENUM_LEVEL_LIMIT,
) -> Iterator[RationalOrthogonalMatrix]:
    """All rational orthogonal matrices reachable at the target level.

    Yields Q = C / lv for every integer matrix C with pairwise-orthogonal
    columns of squared norm lv^2, filtered by mode: ``exact-level`` keeps
    level(Q) == lv, ``level-divides`` keeps every Q (their levels always
    divide lv).  The stream is deterministic: columns are chosen depth-first
    from the fixed candidate order.

    With ``quotient_signed_perms`` only one representative per right
    signed-permutation orbit {Q*P} is emitted: columns are sign-normalized and
    chosen in strictly increasing candidate order.
    """
    if mode not in (MODE_EXACT, MODE_DIVIDES):
        raise ValueError(f"unknown mode {mode!r}")
    if n < 1 or lv < 1:
        raise ValueError("order and level must be positive")
    if n > n_limit or lv > level_limit:
        raise GuardError(
            f"enumeration guarded at n <= {n_limit}, level <= {level_limit}"
        )

    cands = _candidate_columns(n, lv, normalized=quotient_signed_perms)
    count = len(cands)
    full = (1 << count) - 1
    l2 = lv * lv
    masks: dict[int, int] = {}

    def orth_mask(idx: int) -> int:
        m = masks.get(idx)
        if m is None:
            ci = cands[idx]
            m = 0
            for j in range(count):
                cj = cands[j]
                if sum(a * b for a, b in zip(ci, cj)) == 0:
                    m |= 1 << j
            masks[idx] = m
        return m

    rowsq = [0] * n
    chosen: list[tuple[int, ...]] = []

    def build() -> RationalOrthogonalMatrix:
        rows = [
            [Fraction(chosen[j][i], lv) for j in range(n)] for i in range(n)
        ]
        return RationalOrthogonalMatrix(RatMatrix(rows), validate=False)

    def dfs(avail: int, depth: int) -> Iterator[RationalOrthogonalMatrix]:
        if depth == n:
            if mode == MODE_DIVIDES or _column_level(chosen, lv) == lv:
                yield build()
            return
        need = n - depth
        rest = avail
        while rest:
            low = rest & -rest
            idx = low.bit_length() - 1
            rest ^= low
            col = cands[idx]
            if all(rowsq[i] + col[i] * col[i] <= l2 for i in range(n)):
                for i in range(n):
                    rowsq[i] += col[i] * col[i]
                chosen.append(col)
                nxt = avail & orth_mask(idx)
                if quotient_signed_perms:
                    # Strictly increasing candidate indices.
                    nxt &= full << (idx + 1)
                if need == 1 or nxt.bit_count() >= need - 1:
                    yield from dfs(nxt, depth + 1)
                chosen.pop()
                for i in range(n):
                    rowsq[i] -= col[i] * col[i]

    yield from dfs(full, 0)


@dataclass(frozen=True)
class FractionalIndexSets:
    """Partition of row/column indices by whether they carry a fractional entry.

    All indices are 0-based.  Orthogonality forces equal fractional row and
    column counts; the constructor checks rather than assumes this.
    """

    fractional_rows: frozenset[int]
    fractional_cols: frozenset[int]
    integral_rows: frozenset[int]
    integral_cols: frozenset[int]

    def __post_init__(self):
        if len(self.fractional_rows) != len(self.fractional_cols):
            raise ValueError("fractional row/column counts differ; input not orthogonal")


def fractional_index_sets(q: RationalOrthogonalMatrix) -> FractionalIndexSets:
    n = q.n
    data = q.matrix.data
    frac_rows = frozenset(
        i for i in range(n) if any(x.denominator > 1 for x in data[i])
    )
    frac_cols = frozenset(
        j for j in range(n) if any(data[i][j].denominator > 1 for i in range(n))
    )
    return FractionalIndexSets(
        fractional_rows=frac_rows,
        fractional_cols=frac_cols,
        integral_rows=frozenset(range(n)) - frac_rows,
        integral_cols=frozenset(range(n)) - frac_cols,
    )


@dataclass(frozen=True)
class CanonicalForm:
    """Decomposition P_R^T * Q * P_C = diag(Q_s, I_(n-s)).

    ``p_row`` is a pure permutation; ``p_col`` is a signed permutation whose
    first s columns are sign-free.  The fully fractional block ``q_s`` has no
    entries in {-1, +1} (its block size is 0 for signed permutations, and is
    never 1).
    """

    p_row: IntMatrix
    p_col: IntMatrix
    s: int
    q_s: RationalOrthogonalMatrix
    n: int

    def member(self) -> RationalOrthogonalMatrix:
        """The block-diagonal canonical member diag(Q_s, I)."""
        n, s = self.n, self.s
        rows = [[Fraction(0)] * n for _ in range(n)]
        for i in range(s):
            for j in range(s):
                rows[i][j] = self.q_s.matrix[i, j]
        for i in range(s, n):
            rows[i][i] = Fraction(1)
        return RationalOrthogonalMatrix(RatMatrix(rows), validate=False)

    def reconstruct(self) -> RationalOrthogonalMatrix:
        """P_R * diag(Q_s, I) * P_C^T, which must reproduce the original Q."""
        pr = self.p_row.to_rational()
        pc = self.p_col.to_rational()
        return RationalOrthogonalMatrix(
            pr.mul(self.member().matrix).mul(pc.transpose()), validate=False
        )


def canonical_form(q: RationalOrthogonalMatrix) -> CanonicalForm:
    """Deterministic canonical form of Q.

    Fractional rows/columns are sent, in ascending order, to positions
    0..s-1.  Trailing columns are matched to their integral rows and signed
    so the trailing block is +I.
    """
    n = q.n
    data = q.matrix.data
    sets = fractional_index_sets(q)
    fri = sorted(sets.fractional_rows)
    fci = sorted(sets.fractional_cols)
    iri = sorted(sets.integral_rows)
    s = len(fri)

    row_order = fri + iri
    p_row = IntMatrix(
        [[1 if row_order[k] == i else 0 for k in range(n)] for i in range(n)]
    )

    # Trailing columns: integral row r holds a single +-1 at column unit_col[r];
    # signing that column by the entry's own sign puts +1 on the diagonal.
    pc_cols: list[tuple[int, int]] = [(j, 1) for j in fci]
    for r in iri:
        unit_col = None
        for j in range(n):
            x = data[r][j]
            if x != 0:
                if abs(x) != 1:
                    raise ValueError("integral row of an orthogonal matrix must be a signed unit")
                unit_col = (j, 1 if x > 0 else -1)
        if unit_col is None:
            raise ValueError("zero row in orthogonal matrix")
        pc_cols.append(unit_col)
    p_col = IntMatrix(
        [
            [sign if col == i else 0 for (col, sign) in pc_cols]
            for i in range(n)
        ]
    )

    q_s_rows = [[data[i][j] for j in fci] for i in fri]
    for row in q_s_rows:
        for x in row:
            if x.denominator == 1 and x != 0:
                raise ValueError("fractional block contains an integral nonzero entry")
    if s == 1:
        raise ValueError("fractional block of size 1 cannot be orthogonal")
    q_s = RationalOrthogonalMatrix(RatMatrix(q_s_rows), validate=False)
    return CanonicalForm(p_row=p_row, p_col=p_col, s=s, q_s=q_s, n=n)


# -- signed permutations ----------------------------------------------------


def signed_permutation_matrix(perm: Sequence[int], signs: Sequence[int]) -> IntMatrix:
    """Matrix P with P e_j = signs[j] * e_perm[j]."""
    n = len(perm)
    if sorted(perm) != list(range(n)) or any(s not in (1, -1) for s in signs):
        raise ValueError("invalid signed permutation data")
    m = [[0] * n for _ in range(n)]
    for j in range(n):
        m[perm[j]][j] = signs[j]
    return IntMatrix(m)


def is_signed_permutation_matrix(m: IntMatrix) -> bool:
    if not m.is_square():
        return False
    n = m.rows
    seen_rows = set()
    for j in range(n):
        hits = [i for i in range(n) if m[i, j] != 0]
        if len(hits) != 1 or abs(m[hits[0], j]) != 1 or hits[0] in seen_rows:
            return False
        seen_rows.add(hits[0])
    return True


def random_signed_permutation(n: int, stream: Stream) -> IntMatrix:
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = stream.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    signs = [1 if stream.bit() == 0 else -1 for _ in range(n)]
    return signed_permutation_matrix(perm, signs)


# -- serialization ----------------------------------------------------------


def matrix_to_text(m: RatMatrix) -> str:
    """Exact fraction text, one row per line, entries space-separated."""
    return "\n".join(" ".join(str(x) for x in row) for row in m.data)


def matrix_from_text(text: str) -> RatMatrix:
    rows = []
    for line in text.strip().splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            rows.append([Fraction(tok) for tok in line.split()])
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"bad fraction in matrix text: {exc}") from exc
    if not rows:
        raise FormatError("empty matrix text")
    return RatMatrix(rows)


def rotation_3_4_5(n: int) -> RationalOrthogonalMatrix:
    """diag(R, I_(n-2)) where R is the 3-4-5 Pythagorean rotation of level 5."""
    if n < 2:
        raise ValueError("need order at least 2")
    rows = [[Fraction(0)] * n for _ in range(n)]
    rows[0][0] = Fraction(3, 5)
    rows[0][1] = Fraction(-4, 5)
    rows[1][0] = Fraction(4, 5)
    rows[1][1] = Fraction(3, 5)
    for i in range(2, n):
        rows[i][i] = Fraction(1)
    return RationalOrthogonalMatrix(RatMatrix(rows))


def hadamard_regular_4() -> RationalOrthogonalMatrix:
    """The regular level-2 matrix (1/2) * [[1,1,1,-1],[1,1,-1,1],[1,-1,1,1],[-1,1,1,1]]."""
    h = [
        [1, 1, 1, -1],
        [1, 1, -1, 1],
        [1, -1, 1, 1],
        [-1, 1, 1, 1],
    ]
    return RationalOrthogonalMatrix(
        RatMatrix([[Fraction(x, 2) for x in row] for row in h])
    )
