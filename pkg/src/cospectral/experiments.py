"""Trial schedulers: Monte Carlo estimates, censuses, enumerations, bound tables.

Every experiment is a pure function of its config: trial t of an experiment
derives all randomness from (master_seed, t), so reruns reproduce identical
output byte for byte and trials can be evaluated in any order.  Tables are
CSV with a fixed schema per experiment kind; exact quantities are serialized
as fractions, irrational ones as directed upper bounds in decimal.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import GuardError, PreconditionError
from .graph6 import to_graph6
from .graphs import GnpSampler, is_controllable, walk_matrix
from .ortho import (
    MODE_EXACT,
    RationalOrthogonalMatrix,
    canonical_form,
    count_bound,
    enumerate_level,
    matrix_to_text,
)
from .search import (
    MateCertificate,
    cospectral_census,
    find_mates,
    integral_conjugation,
    reverify,
    verify_level_divisibility,
)
from .verifier import BoundReport, epsilon_series, lemma_bound, p_hat

KINDS = (
    "controllability-sweep",
    "lemma-mc",
    "mate-scan",
    "census",
    "enum-ortho",
    "bounds",
)

# One-sided 99% normal quantile for the Wilson score interval.
WILSON_Z_99 = 2.3263478740408408


@dataclass
class ExperimentConfig:
    """Common experiment parameters; unused fields are ignored per kind."""

    kind: str
    ns: tuple[int, ...]
    p: Fraction = Fraction(1, 2)
    level: int = 2
    trials: int = 1
    master_seed: int = 0
    out: str | None = None
    fmt: str = "csv"
    quotient_signed_perms: bool = True
    mode: str = MODE_EXACT

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        self.ns = tuple(int(n) for n in self.ns)
        if not self.ns:
            raise ValueError("empty n range")
        self.p = Fraction(self.p)
        if not (0 <= self.p <= 1):
            raise ValueError("p must lie in [0, 1]")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.fmt not in ("csv", "json"):
            raise ValueError("format must be csv or json")


@dataclass
class TrialRecord:
    """Outcome of a single trial, reproducible from (config, trial_index)."""

    trial_index: int
    graph6: str | None = None
    controllable: bool | None = None
    integral_conjugation: bool | None = None
    mate_found: bool | None = None
    elapsed: float = 0.0

    def to_json_obj(self) -> dict:
        out: dict = {"trial": self.trial_index}
        if self.graph6 is not None:
            out["graph6"] = self.graph6
        for name in ("controllable", "integral_conjugation", "mate_found"):
            val = getattr(self, name)
            if val is not None:
                out[name] = val
        return out  # elapsed is intentionally not serialized (determinism)


def _fr(x: Fraction) -> str:
    return str(Fraction(x))


def _decimal_upper(x: Fraction, sig: int = 10) -> str:
    """Directed decimal rendering: never smaller than x, `sig` significant digits."""
    if x == 0:
        return "0"
    neg = x < 0
    if neg:
        x = -x
    exp = 0
    while x >= 10:
        x /= 10
        exp += 1
    while x < 1:
        x *= 10
        exp -= 1
    scale = 10 ** (sig - 1)
    mant = x * scale
    mant_int = mant.numerator // mant.denominator
    if not neg and mant_int * mant.denominator < mant.numerator:
        mant_int += 1  # round toward +infinity
    if mant_int >= 10 * scale:
        mant_int //= 10
        exp += 1
    digits = str(mant_int)
    body = f"{digits[0]}.{digits[1:]}"
    sign = "-" if neg else ""
    return f"{sign}{body}e{exp:+03d}"


class TableResult:
    """A CSV table with a fixed header, also expressible as JSON rows."""

    def __init__(self, kind: str, header: Sequence[str], comment: str):
        self.kind = kind
        self.header = list(header)
        self.comment = comment
        self.rows: list[list[str]] = []
        self.elapsed = 0.0

    def add(self, *cells) -> None:
        row = [str(c) for c in cells]
        if len(row) != len(self.header):
            raise ValueError("row width does not match header")
        self.rows.append(row)

    def to_csv_text(self) -> str:
        lines = [f"# {self.comment}", ",".join(self.header)]
        lines.extend(",".join(row) for row in self.rows)
        return "\n".join(lines) + "\n"

    def to_json_obj(self) -> dict:
        return {
            "kind": self.kind,
            "rows": [dict(zip(self.header, row)) for row in self.rows],
        }


def run_controllability_sweep(config: ExperimentConfig) -> TableResult:
    """Frequency of controllable samples of G(n, p) for each n in the range."""
    if config.kind != "controllability-sweep":
        raise ValueError("config kind mismatch")
    started = time.perf_counter()
    table = TableResult(
        config.kind,
        ["n", "p", "trials", "controllable_count", "frequency"],
        f"controllability sweep p={config.p} trials={config.trials} seed={config.master_seed}",
    )
    for n in config.ns:
        sampler = GnpSampler(n=n, p=config.p, master_seed=config.master_seed)
        count = 0
        for t in range(config.trials):
            if is_controllable(sampler.sample(t)):
                count += 1
        table.add(n, _fr(config.p), config.trials, count, _fr(Fraction(count, config.trials)))
    table.elapsed = time.perf_counter() - started
    return table


@dataclass
class LemmaMCResult:
    """Empirical integral-conjugation frequency against the selected bound."""

    config_seed: int
    trials: int
    integral_count: int
    empirical: Fraction
    bound: BoundReport
    wilson_lower: float
    significant_violation: bool
    records: list[TrialRecord] = field(default_factory=list)
    elapsed: float = 0.0

    def to_json_obj(self) -> dict:
        return {
            "kind": "lemma-mc",
            "trials": self.trials,
            "integral_count": self.integral_count,
            "empirical": _fr(self.empirical),
            "selected_bound": _fr(self.bound.selected_bound),
            "selected_exponent": self.bound.selected_exponent,
            "p_hat": _fr(self.bound.p_hat),
            "wilson_lower_99": self.wilson_lower,
            "significant_violation": self.significant_violation,
            "records": [r.to_json_obj() for r in self.records],
        }

    def to_csv_text(self) -> str:
        header = "trials,integral_count,empirical,selected_bound,wilson_lower_99,significant_violation"
        row = ",".join(
            [
                str(self.trials),
                str(self.integral_count),
                _fr(self.empirical),
                _fr(self.bound.selected_bound),
                repr(self.wilson_lower),
                str(self.significant_violation),
            ]
        )
        return f"# lemma-mc\n{header}\n{row}\n"


def wilson_lower(successes: int, trials: int, z: float = WILSON_Z_99) -> float:
    """One-sided Wilson score lower confidence bound for a binomial proportion."""
    if trials == 0:
        return 0.0
    phat = successes / trials
    z2 = z * z
    denom = 1 + z2 / trials
    center = phat + z2 / (2 * trials)
    margin = z * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials))
    return max(0.0, (center - margin) / denom)


def run_lemma_mc(
    config: ExperimentConfig, q: RationalOrthogonalMatrix, keep_records: bool = False
) -> LemmaMCResult:
    """Sample A ~ G(n, p) and count integral conjugations Q^T A Q.

    The comparison is one-sided: the run is flagged only when the Wilson 99%
    lower bound on the true frequency exceeds the selected bound, i.e. on a
    statistically significant violation of the upper bound.
    """
    if config.kind != "lemma-mc":
        raise ValueError("config kind mismatch")
    cf = canonical_form(q)
    if cf.s == 0:
        raise PreconditionError("bound is vacuous for signed permutations (s = 0)")
    started = time.perf_counter()
    n = q.n
    bound = lemma_bound(cf, config.p)
    sampler = GnpSampler(n=n, p=config.p, master_seed=config.master_seed)
    hits = 0
    records = []
    for t in range(config.trials):
        g = sampler.sample(t)
        ok = integral_conjugation(q, g.adjacency())
        hits += ok
        if keep_records:
            records.append(
                TrialRecord(trial_index=t, graph6=to_graph6(g), integral_conjugation=ok)
            )
    empirical = Fraction(hits, config.trials)
    lower = wilson_lower(hits, config.trials)
    result = LemmaMCResult(
        config_seed=config.master_seed,
        trials=config.trials,
        integral_count=hits,
        empirical=empirical,
        bound=bound,
        wilson_lower=lower,
        significant_violation=lower > float(bound.selected_bound),
        records=records,
    )
    result.elapsed = time.perf_counter() - started
    return result


@dataclass
class MateScanResult:
    """Mate-search outcomes over sampled graphs, with certificate audits."""

    n: int
    level: int
    trials: int
    mate_trials: int
    frequency: Fraction
    certificates: list[MateCertificate]
    divisibility_audits: int
    divisibility_violations: int
    reverify_failures: int
    records: list[TrialRecord] = field(default_factory=list)
    elapsed: float = 0.0

    def to_json_obj(self) -> dict:
        return {
            "kind": "mate-scan",
            "n": self.n,
            "level": self.level,
            "trials": self.trials,
            "mate_trials": self.mate_trials,
            "frequency": _fr(self.frequency),
            "certificates": [c.to_json_obj() for c in self.certificates],
            "divisibility_audits": self.divisibility_audits,
            "divisibility_violations": self.divisibility_violations,
            "reverify_failures": self.reverify_failures,
            "records": [r.to_json_obj() for r in self.records],
        }

    def to_csv_text(self) -> str:
        header = "n,level,trials,mate_trials,frequency,certificates,divisibility_violations"
        row = ",".join(
            [
                str(self.n),
                str(self.level),
                str(self.trials),
                str(self.mate_trials),
                _fr(self.frequency),
                str(len(self.certificates)),
                str(self.divisibility_violations),
            ]
        )
        return f"# mate-scan\n{header}\n{row}\n"


def run_mate_scan(config: ExperimentConfig, keep_records: bool = False) -> MateScanResult:
    """Sample graphs and search for mates at the configured level.

    Every generalized certificate of a controllable source graph is put
    through the divisibility audit; every certificate is re-verified.
    """
    if config.kind != "mate-scan":
        raise ValueError("config kind mismatch")
    started = time.perf_counter()
    n = config.ns[0]
    sampler = GnpSampler(n=n, p=config.p, master_seed=config.master_seed)
    mate_trials = 0
    certificates: list[MateCertificate] = []
    audits = violations = bad_reverify = 0
    records = []
    for t in range(config.trials):
        g = sampler.sample(t)
        plain = find_mates(
            g, config.level,
            require_generalized=False,
            quotient_signed_perms=config.quotient_signed_perms,
        )
        mate_trials += bool(plain)
        for cert in plain:
            if reverify(cert):
                bad_reverify += 1
            if cert.generalized and walk_matrix(cert.g).controllable:
                audits += 1
                if not verify_level_divisibility(cert):
                    violations += 1
        certificates.extend(plain)
        if keep_records:
            records.append(
                TrialRecord(trial_index=t, graph6=to_graph6(g), mate_found=bool(plain))
            )
    result = MateScanResult(
        n=n,
        level=config.level,
        trials=config.trials,
        mate_trials=mate_trials,
        frequency=Fraction(mate_trials, config.trials),
        certificates=certificates,
        divisibility_audits=audits,
        divisibility_violations=violations,
        reverify_failures=bad_reverify,
        records=records,
    )
    result.elapsed = time.perf_counter() - started
    return result


def run_bounds(config: ExperimentConfig) -> TableResult:
    """Epsilon-series table across the configured n range."""
    if config.kind != "bounds":
        raise ValueError("config kind mismatch")
    started = time.perf_counter()
    table = TableResult(
        config.kind,
        [
            "n", "level", "p_hat", "epsilon_n", "epsilon_below_one",
            "series_bound", "vacuous_flag", "n_star", "count_bound",
        ],
        f"bound table level={config.level} p={config.p}; epsilon/series are directed upper bounds",
    )
    ph = p_hat(config.p)
    n_star: int | None = None
    if ph != 1:
        n_star = epsilon_series(config.ns[0], config.level, config.p).n_star
    for n in config.ns:
        rep = epsilon_series(n, config.level, config.p, find_threshold=False)
        divergent = not rep.epsilon_below_one
        table.add(
            n,
            config.level,
            _fr(ph),
            _decimal_upper(rep.epsilon_upper),
            rep.epsilon_below_one,
            "" if rep.series_bound_upper is None else _decimal_upper(rep.series_bound_upper),
            divergent,
            "" if n_star is None else n_star,
            count_bound(n, config.level),
        )
    table.elapsed = time.perf_counter() - started
    return table


def run_census(config: ExperimentConfig) -> TableResult:
    """Cospectral pair census rows for each n in range."""
    if config.kind != "census":
        raise ValueError("config kind mismatch")
    started = time.perf_counter()
    table = TableResult(
        config.kind,
        ["n", "pair_index", "graph6_a", "graph6_b", "generalized"],
        "cospectral census (non-isomorphic pairs up to isomorphism)",
    )
    from .graphs import is_generalized_cospectral

    for n in config.ns:
        for idx, (ga, gb) in enumerate(cospectral_census(n)):
            table.add(n, idx, to_graph6(ga), to_graph6(gb), is_generalized_cospectral(ga, gb))
    table.elapsed = time.perf_counter() - started
    return table


@dataclass
class EnumOrthoResult:
    n: int
    level: int
    mode: str
    quotient: bool
    matrices: list[RationalOrthogonalMatrix]
    elapsed: float = 0.0

    def to_json_obj(self) -> dict:
        return {
            "kind": "enum-ortho",
            "n": self.n,
            "level": self.level,
            "mode": self.mode,
            "quotient_signed_perms": self.quotient,
            "count": len(self.matrices),
            "count_bound": count_bound(self.n, self.level),
            "matrices": [matrix_to_text(q.matrix).splitlines() for q in self.matrices],
        }

    def to_csv_text(self) -> str:
        lines = [
            f"# enum-ortho n={self.n} level={self.level} mode={self.mode} quotient={self.quotient}",
            "index,level,matrix",
        ]
        for idx, q in enumerate(self.matrices):
            flat = ";".join(" ".join(str(x) for x in row) for row in q.matrix.data)
            lines.append(f"{idx},{q.level},{flat}")
        return "\n".join(lines) + "\n"


def run_enum_ortho(config: ExperimentConfig) -> EnumOrthoResult:
    if config.kind != "enum-ortho":
        raise ValueError("config kind mismatch")
    started = time.perf_counter()
    n = config.ns[0]
    mats = list(
        enumerate_level(
            n, config.level, config.mode,
            quotient_signed_perms=config.quotient_signed_perms,
        )
    )
    result = EnumOrthoResult(
        n=n, level=config.level, mode=config.mode,
        quotient=config.quotient_signed_perms, matrices=mats,
    )
    result.elapsed = time.perf_counter() - started
    return result


def emit(result, config: ExperimentConfig) -> str:
    """Render a result per the configured format and write it if requested."""
    if config.fmt == "json":
        text = json.dumps(result.to_json_obj(), indent=2, sort_keys=True) + "\n"
    else:
        text = result.to_csv_text()
    if config.out:
        try:
            with open(config.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise GuardError(f"cannot write output {config.out!r}: {exc}") from exc
    return text
