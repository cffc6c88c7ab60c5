"""Search for cospectral mates linked by rational orthogonal conjugators.

A mate certificate for G is a graph H together with a rational orthogonal Q
satisfying Q^T A_G Q = A_H exactly, H not isomorphic to G.  The search
exhausts conjugators of bounded level; with the signed-permutation quotient
enabled it walks one representative Q per right orbit {Q P} and recovers the
sign vector that turns the conjugated matrix into a 0/1 adjacency (the orbit
is closed inside the integrality set, so nothing is lost).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .errors import GuardError, PreconditionError
from .graph6 import from_graph6, to_graph6
from .graphs import Graph, are_isomorphic, canonical_bits, enumerate_graphs, walk_matrix
from .linalg import IntMatrix, RatMatrix, char_poly, conjugate_scaled
from .ortho import (
    ENUM_LEVEL_LIMIT,
    ENUM_N_LIMIT,
    MODE_DIVIDES,
    RationalOrthogonalMatrix,
    enumerate_level,
    is_regular,
    is_signed_permutation_matrix,
    matrix_from_text,
    matrix_to_text,
)

CENSUS_LIMIT = 6


@dataclass(frozen=True)
class MateCertificate:
    """Exactly verifiable witness that h is a mate of g at the stated level."""

    g: Graph
    h: Graph
    q: RationalOrthogonalMatrix
    level: int
    generalized: bool

    def to_json_obj(self) -> dict:
        return {
            "g": to_graph6(self.g),
            "h": to_graph6(self.h),
            "q": matrix_to_text(self.q.matrix).splitlines(),
            "level": self.level,
            "generalized": self.generalized,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "MateCertificate":
        return cls(
            g=from_graph6(obj["g"]),
            h=from_graph6(obj["h"]),
            q=RationalOrthogonalMatrix(matrix_from_text("\n".join(obj["q"]))),
            level=int(obj["level"]),
            generalized=bool(obj["generalized"]),
        )


def integral_conjugation(q: RationalOrthogonalMatrix, a: IntMatrix) -> bool:
    """True iff Q^T A Q is an integer matrix (checked without Fractions)."""
    c = q.scaled()
    l2 = q.level * q.level
    b = conjugate_scaled(c, a)
    return all(x % l2 == 0 for row in b.data for x in row)


def _conjugation_int(q: RationalOrthogonalMatrix, a: IntMatrix) -> IntMatrix | None:
    """Q^T A Q as an IntMatrix, or None when it is not integral."""
    c = q.scaled()
    l2 = q.level * q.level
    b = conjugate_scaled(c, a)
    out = []
    for row in b.data:
        r = []
        for x in row:
            if x % l2:
                return None
            r.append(x // l2)
        out.append(r)
    return IntMatrix(out)


def q_set(
    a: IntMatrix,
    lv: int,
    quotient_signed_perms: bool = False,
    n_limit: int = ENUM_N_LIMIT,
    level_limit: int = ENUM_LEVEL_LIMIT,
) -> Iterator[RationalOrthogonalMatrix]:
    """All enumerated Q with level dividing lv whose conjugation of A is integral."""
    if not a.is_square():
        raise ValueError("adjacency-like input must be square")
    for q in enumerate_level(
        a.rows, lv, MODE_DIVIDES,
        quotient_signed_perms=quotient_signed_perms,
        n_limit=n_limit, level_limit=level_limit,
    ):
        if integral_conjugation(q, a):
            yield q


def closure_audit(
    a: IntMatrix, q: RationalOrthogonalMatrix, p: IntMatrix
) -> bool:
    """Check that right-multiplying a member of the integrality set stays inside.

    Requires Q^T A Q integral and P a signed permutation; the answer must
    always be True (conjugating an integer matrix by a signed permutation
    keeps it integral).
    """
    if not is_signed_permutation_matrix(p):
        raise PreconditionError("P must be a signed permutation matrix")
    if not integral_conjugation(q, a):
        raise PreconditionError("Q is not in the integrality set of A")
    qp = RationalOrthogonalMatrix(q.matrix.mul(p.to_rational()), validate=False)
    return integral_conjugation(qp, a)


def _sign_balance(b: IntMatrix) -> tuple[list[int], list[list[int]]] | None:
    """Sign vector sigma with sigma_i sigma_j B_ij = |B_ij|, plus components.

    Treats indices as vertices and nonzero entries as edges; BFS 2-colors each
    component (component representatives get +1).  Returns None when the signs
    are inconsistent, i.e. no signed-permutation twin of B is a 0/1 matrix.
    """
    n = b.rows
    sigma = [0] * n
    components: list[list[int]] = []
    for root in range(n):
        if sigma[root]:
            continue
        sigma[root] = 1
        comp = [root]
        queue = [root]
        while queue:
            u = queue.pop()
            for v in range(n):
                x = b[u, v]
                if x == 0 or v == u:
                    continue
                want = sigma[u] * (1 if x > 0 else -1)
                if sigma[v] == 0:
                    sigma[v] = want
                    comp.append(v)
                    queue.append(v)
                elif sigma[v] != want:
                    return None
        components.append(sorted(comp))
    return sigma, components


def _apply_signs(q: RationalOrthogonalMatrix, sigma: list[int]) -> RationalOrthogonalMatrix:
    data = q.matrix.data
    flipped = RatMatrix(
        [[x if sigma[j] == 1 else -x for j, x in enumerate(row)] for row in data]
    )
    return RationalOrthogonalMatrix(flipped, validate=False)


def _regular_sign_variant(
    q: RationalOrthogonalMatrix, sigma: list[int], components: list[list[int]]
) -> list[int] | None:
    """Component-wise flip of sigma making every row of Q*diag(sigma) sum to 1.

    Flipping all signs inside one component preserves the recovered 0/1
    matrix, so this scans exactly the conjugators that produce the same mate.
    """
    data = q.matrix.data
    n = q.n
    base = [sum(data[i][j] * sigma[j] for j in range(n)) for i in range(n)]
    comp_part = []
    for comp in components:
        comp_part.append(
            [sum(data[i][j] * sigma[j] for j in comp) for i in range(n)]
        )
    k = len(components)
    for flips in range(1 << k):
        ok = True
        for i in range(n):
            total = base[i]
            for c in range(k):
                if (flips >> c) & 1:
                    total -= 2 * comp_part[c][i]
            if total != 1:
                ok = False
                break
        if ok:
            out = sigma[:]
            for c in range(k):
                if (flips >> c) & 1:
                    for j in components[c]:
                        out[j] = -out[j]
            return out
    return None


def _zero_diag_pm_one(b: IntMatrix) -> bool:
    n = b.rows
    return all(b[i, i] == 0 for i in range(n)) and all(
        abs(b[i, j]) <= 1 for i in range(n) for j in range(n)
    )


def _graph_from_magnitudes(b: IntMatrix) -> Graph:
    n = b.rows
    return Graph.from_edges(
        n, [(i, j) for i in range(n) for j in range(i + 1, n) if b[i, j] != 0]
    )


def find_mates(
    g: Graph,
    lv: int,
    require_generalized: bool = False,
    quotient_signed_perms: bool = True,
    n_limit: int = ENUM_N_LIMIT,
    level_limit: int = ENUM_LEVEL_LIMIT,
) -> list[MateCertificate]:
    """All mates of g reachable by conjugators of level dividing lv.

    Levels are reported exactly as found; level 1 is excluded because signed
    permutations only ever produce isomorphic graphs.  The result is
    deduplicated by (isomorphism class of the mate, conjugator level) and
    sorted deterministically.
    """
    a = g.adjacency()
    found: dict[tuple[int, int], MateCertificate] = {}
    for q in enumerate_level(
        g.n, lv, MODE_DIVIDES,
        quotient_signed_perms=quotient_signed_perms,
        n_limit=n_limit, level_limit=level_limit,
    ):
        if q.level == 1:
            continue
        b = _conjugation_int(q, a)
        if b is None or not _zero_diag_pm_one(b):
            continue
        if quotient_signed_perms:
            balance = _sign_balance(b)
            if balance is None:
                continue
            sigma, components = balance
            h = _graph_from_magnitudes(b)
            if are_isomorphic(g, h):
                continue
            reg_sigma = _regular_sign_variant(q, sigma, components)
            if require_generalized and reg_sigma is None:
                continue
            final_sigma = reg_sigma if reg_sigma is not None else sigma
            cert_q = _apply_signs(q, final_sigma)
            cert = MateCertificate(
                g=g, h=h, q=cert_q, level=q.level,
                generalized=reg_sigma is not None,
            )
        else:
            if any(b[i, j] < 0 for i in range(g.n) for j in range(g.n)):
                continue
            h = _graph_from_magnitudes(b)
            if are_isomorphic(g, h):
                continue
            regular = is_regular(q)
            if require_generalized and not regular:
                continue
            cert = MateCertificate(g=g, h=h, q=q, level=q.level, generalized=regular)
        key = (canonical_bits(cert.h), cert.level)
        if key not in found:
            found[key] = cert
    return sorted(
        found.values(),
        key=lambda c: (c.level, to_graph6(c.h), matrix_to_text(c.q.matrix)),
    )


def verify_level_divisibility(cert: MateCertificate) -> bool:
    """Audit: the conjugator level must divide the last invariant factor d_n.

    Only defined for generalized certificates whose source graph is
    controllable; anything else is a reported precondition violation.
    """
    if not cert.generalized:
        raise PreconditionError("divisibility audit needs a generalized certificate")
    report = walk_matrix(cert.g)
    if not report.controllable:
        raise PreconditionError("divisibility audit needs a controllable source graph")
    return report.d_n % cert.level == 0


def reverify(cert: MateCertificate) -> list[str]:
    """Re-check every certificate invariant; returns the list of failures."""
    problems = []
    try:
        RationalOrthogonalMatrix(cert.q.matrix, validate=True)
    except ValueError:
        problems.append("conjugator is not orthogonal")
    if cert.q.level != cert.level:
        problems.append(f"stored level {cert.level} != actual {cert.q.level}")
    b = _conjugation_int(cert.q, cert.g.adjacency())
    if b is None or b != cert.h.adjacency():
        problems.append("conjugation does not reproduce the mate adjacency")
    if cert.g.n == cert.h.n and are_isomorphic(cert.g, cert.h):
        problems.append("graphs are isomorphic")
    if cert.generalized:
        if not is_regular(cert.q):
            problems.append("generalized certificate with non-regular conjugator")
        report = walk_matrix(cert.g)
        if report.controllable and report.d_n % cert.level != 0:
            problems.append("level does not divide the last invariant factor")
    return problems


def cospectral_census(n: int, limit: int = CENSUS_LIMIT) -> list[tuple[Graph, Graph]]:
    """All cospectral non-isomorphic pairs on n labeled vertices, up to isomorphism.

    Scans every labeled graph, buckets by characteristic polynomial, splits
    buckets into isomorphism classes, and reports one representative pair per
    unordered pair of distinct classes in a bucket.
    """
    if n > limit:
        raise GuardError(f"census guarded at n <= {limit}")
    buckets: dict[tuple[int, ...], list[Graph]] = {}
    for g in enumerate_graphs(n):
        cp = char_poly(g.adjacency()).coefficients
        reps = buckets.setdefault(cp, [])
        for rep in reps:
            if are_isomorphic(rep, g):
                break
        else:
            reps.append(g)
    pairs: list[tuple[Graph, Graph]] = []
    for reps in buckets.values():
        if len(reps) < 2:
            continue
        canon = sorted(
            (Graph(n, canonical_bits(r)) for r in reps), key=lambda gr: gr.bits
        )
        for x in range(len(canon)):
            for y in range(x + 1, len(canon)):
                pairs.append((canon[x], canon[y]))
    pairs.sort(key=lambda pr: (pr[0].bits, pr[1].bits))
    return pairs
