"""Exact-arithmetic toolkit for cospectral mates of graphs.

Core pieces: exact integer/rational linear algebra (characteristic
polynomials, Smith normal form, ranks), graphs with a reproducible G(n, p)
sampler and walk-matrix controllability, rational orthogonal matrices with
level computation / enumeration / canonical forms, bounded-level cospectral
mate search with verifiable certificates, mechanical audits of the greedy
index-selection argument, and Monte Carlo experiment runners.
"""

from .errors import (
    CertificateError,
    ClaimViolationError,
    DimensionError,
    FormatError,
    GuardError,
    PreconditionError,
)
from .graph6 import from_graph6, to_graph6
from .graphs import (
    GnpSampler,
    Graph,
    WalkMatrixReport,
    are_isomorphic,
    enumerate_graphs,
    is_controllable,
    is_cospectral,
    is_generalized_cospectral,
    walk_matrix,
)
from .linalg import (
    IntMatrix,
    IntPolynomial,
    RatMatrix,
    char_poly,
    conjugate,
    is_integral,
    rank_rational,
    smith_normal_form,
)
from .ortho import (
    CanonicalForm,
    FractionalIndexSets,
    RationalOrthogonalMatrix,
    canonical_form,
    count_bound,
    enumerate_level,
    fractional_index_sets,
    is_regular,
    level,
    pair_count_bound,
)
from .search import (
    MateCertificate,
    closure_audit,
    cospectral_census,
    find_mates,
    q_set,
    reverify,
    verify_level_divisibility,
)
from .verifier import (
    BoundReport,
    IndexSelection,
    SupportMaps,
    entry_dependency,
    epsilon_series,
    exponent_chain_audit,
    greedy_select,
    involution_audit,
    lemma_bound,
    support_maps,
)

__version__ = "0.1.0"
