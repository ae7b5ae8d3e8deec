"""Decoders: peeling recovery for one-sided alphabets, shifted-count
recovery for two-sided alphabets, and a brute-force oracle.

All decoders work on exact rationals and finish with a mandatory
re-encode check, so a hypothesis violation in the input surfaces as
``NoConsistentVectorError`` instead of a silently wrong answer. They are
pure functions; per-call comparison counts are reported on the result
for complexity accounting, not shared state.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import comb
from typing import Iterable, Iterator, Optional, Sequence, Tuple

from .core import (
    Alphabet,
    BudgetExceededError,
    DEFAULT_BUDGET,
    DimensionMismatchError,
    Outcome,
    QaryMatrix,
    Rational,
    RationalLike,
    Sidedness,
    SparseVector,
    encode,
    format_rational,
    rat,
    to_outcome,
)
from .disjunct import Transform, optimize_w_by_negation


class NoConsistentVectorError(Exception):
    """No admissible sparse vector is consistent with the outcome.

    Raised when a recovered indicator is too heavy, a recovered value
    falls outside the alphabet, or the final re-encode disagrees with
    the given outcome. On inputs satisfying the decoders' disjunctness
    hypotheses this never fires.
    """


class ComparisonCounter:
    """Mutable tally of row comparisons, threaded through nested decodes."""

    __slots__ = ("count",)

    def __init__(self):
        self.count = 0


@dataclass(frozen=True)
class StageRecord:
    """One recovered threshold indicator.

    ``kind`` is "ge" for indicators of entries >= level (positive side)
    and "le" for entries <= level (negative side). The recovered vector
    is always the exact sum of weight * indicator over the stage log.
    """

    kind: str
    level: Rational
    weight: Rational
    indicator: Tuple[int, ...]


@dataclass(frozen=True)
class DecodeResult:
    x_hat: SparseVector
    stage_log: Tuple[StageRecord, ...]
    comparisons: int


# ---------------------------------------------------------------------------
# Counting functions
# ---------------------------------------------------------------------------

def _t_count(A: QaryMatrix, y: Sequence[Rational], j: int,
             counter: Optional[ComparisonCounter]) -> int:
    if counter is not None:
        counter.count += A.t
    col = A.column(j)
    return sum(1 for e, yi in zip(col, y) if e > yi)


def t_count(A: QaryMatrix, y: Sequence[RationalLike], j: int) -> int:
    """Number of rows whose entry in column j strictly exceeds y there.

    A zero count is the decoders' "column j is active" signal: an active
    item pushes every outcome it touches at least as high as its own
    copy count, while disjunctness guarantees a masked-out column still
    sticks out above the bound in some row.
    """
    if len(y) != A.t:
        raise DimensionMismatchError("vector length != matrix row count")
    if not 0 <= j < A.n:
        raise IndexError(f"column {j} outside 0..{A.n - 1}")
    return _t_count(A, to_outcome(y), j, None)


def v_shift(A: QaryMatrix, v: Sequence[RationalLike], h: RationalLike,
            r: Sequence[int]) -> Outcome:
    """Shifted outcome v + h * (A @ r) for a binary direction r."""
    v = to_outcome(v)
    if len(v) != A.t:
        raise DimensionMismatchError("outcome length != matrix row count")
    if len(r) != A.n:
        raise DimensionMismatchError("direction length != matrix column count")
    if any(e not in (0, 1) for e in r):
        raise ValueError("direction vector must be binary")
    h = rat(h)
    shift = A.mul_indicator(r)
    return tuple(vi + h * si for vi, si in zip(v, shift))


def _shifted(v: Outcome, h: Rational, col_sums: Sequence[int]) -> Tuple[Rational, ...]:
    return tuple(vi + h * si for vi, si in zip(v, col_sums))


def t_star(A: QaryMatrix, v: Sequence[RationalLike], h: RationalLike,
           d: int, j: int) -> int:
    """Minimum of t_count over all shifts v + h*A@r with r binary, phi(r) = d.

    The minimizing shift lets up to d negative entries be compensated
    before counting; with the right h, active columns reach count zero
    under some shift while inactive ones stay positive under all of them.
    Supports are enumerated with size exactly d, so d must not exceed n.
    """
    v = to_outcome(v)
    if len(v) != A.t:
        raise DimensionMismatchError("outcome length != matrix row count")
    if not 0 <= j < A.n:
        raise IndexError(f"column {j} outside 0..{A.n - 1}")
    if not 0 <= d <= A.n:
        raise ValueError(f"d must satisfy 0 <= d <= n = {A.n}, got {d}")
    h = rat(h)
    best = A.t + 1
    for support in combinations(range(A.n), d):
        col_sums = [sum(A.entries[i][jj] for jj in support) for i in range(A.t)]
        y = _shifted(v, h, col_sums)
        best = min(best, _t_count(A, y, j, None))
    return best


def _t_star_all(A: QaryMatrix, v: Outcome, h: Rational, d: int,
                counter: ComparisonCounter) -> Tuple[int, ...]:
    """t_star for every column at once, sharing each shifted outcome."""
    n, t = A.n, A.t
    best = [t + 1] * n
    for support in combinations(range(n), d):
        col_sums = [sum(A.entries[i][j] for j in support) for i in range(t)]
        y = _shifted(v, h, col_sums)
        for j in range(n):
            c = _t_count(A, y, j, counter)
            if c < best[j]:
                best[j] = c
    return tuple(best)


# ---------------------------------------------------------------------------
# Peeling decoder (one-sided alphabets)
# ---------------------------------------------------------------------------

def _rebuild(n: int, records: Iterable[StageRecord]) -> SparseVector:
    dense = [Fraction(0)] * n
    for rec in records:
        if rec.weight == 0:
            continue
        for j, flag in enumerate(rec.indicator):
            if flag:
                dense[j] += rec.weight
    return SparseVector.from_dense(dense)


def _final_checks(A: QaryMatrix, v: Outcome, x_hat: SparseVector,
                  D: Alphabet, d: int) -> None:
    if x_hat.phi > d:
        raise NoConsistentVectorError(
            f"recovered vector has {x_hat.phi} nonzeros, more than d = {d}"
        )
    if not x_hat.values_in(D):
        raise NoConsistentVectorError("recovered values fall outside the alphabet")
    if encode(A, x_hat) != v:
        raise NoConsistentVectorError("re-encoding the recovered vector disagrees "
                                      "with the given outcome")


def decode_one_sided(A: QaryMatrix, v: Sequence[RationalLike], D: Alphabet,
                     d: int, *, counter: Optional[ComparisonCounter] = None
                     ) -> DecodeResult:
    """Recover a d-sparse vector over a one-sided alphabet from v = A @ x.

    Works level by level, smallest magnitude first. At each stage the
    residual outcome is rescaled so the next level becomes 1; columns
    whose count of rows exceeding the rescaled outcome is zero are
    exactly the entries at or above that level, and their contribution
    is subtracted before the next stage. The recovered vector is the sum
    of (level step) * indicator over the stages.

    Requires A to be additive (w,d)-disjunct with w at least the
    alphabet's one-sided bound; that is the caller's responsibility, and
    violations surface as NoConsistentVectorError via the final checks.
    """
    v = to_outcome(v)
    if len(v) != A.t:
        raise DimensionMismatchError("outcome length != matrix row count")
    if d < 0:
        raise ValueError("d must be nonnegative")
    if D.sidedness is Sidedness.GENERAL:
        raise ValueError("alphabet has both signs; use decode_general")
    if counter is None:
        counter = ComparisonCounter()
    start = counter.count

    if D.sidedness is Sidedness.ONE_SIDED_NEG:
        # negate into the positive case and flip the result back
        inner = decode_one_sided(
            A, tuple(-vi for vi in v), D.negate(), d, counter=counter
        )
        records = tuple(
            StageRecord("le", -r.level, -r.weight, r.indicator)
            for r in inner.stage_log
        )
        return DecodeResult(-inner.x_hat, records, counter.count - start)

    n = A.n
    u = list(v)
    records = []
    prev = Fraction(0)
    for c in D.positives:
        step = c - prev
        scaled = tuple(ui / step for ui in u)
        ind = tuple(
            1 if _t_count(A, scaled, j, counter) == 0 else 0 for j in range(n)
        )
        ones = sum(ind)
        if ones > d:
            raise NoConsistentVectorError(
                f"indicator for level >= {format_rational(c)} has "
                f"{ones} nonzeros, more than d = {d}"
            )
        records.append(StageRecord("ge", c, step, ind))
        if ones:
            contrib = A.mul_indicator(ind)
            u = [ui - step * ci for ui, ci in zip(u, contrib)]
        prev = c

    x_hat = _rebuild(n, records)
    _final_checks(A, v, x_hat, D, d)
    return DecodeResult(x_hat, tuple(records), counter.count - start)


# ---------------------------------------------------------------------------
# General decoder (two-sided alphabets)
# ---------------------------------------------------------------------------

def decode_general(A: QaryMatrix, v: Sequence[RationalLike], D: Alphabet,
                   d: int, *, budget: int = DEFAULT_BUDGET, force: bool = False,
                   counter: Optional[ComparisonCounter] = None) -> DecodeResult:
    """Recover a d-sparse vector over a two-sided alphabet from v = A @ x.

    Positive levels are peeled as in the one-sided case, except that
    negative entries can mask a positive one, so each stage uses the
    minimum count over all shifts that add h = -(most negative level)
    to d candidate columns: active columns reach count zero under the
    shift covering the negative support, masked ones never do. Once the
    positive part p is known, p - x is a vector over the negated
    negative levels with outcome A@p - v, and the one-sided decoder
    finishes the job.

    Requires A to be additive (w,2d)-disjunct with w at least the
    alphabet's general bound (caller's responsibility). Cost grows with
    C(n,d); instances beyond ``budget`` operations are refused unless
    ``force`` is set.
    """
    v = to_outcome(v)
    if len(v) != A.t:
        raise DimensionMismatchError("outcome length != matrix row count")
    if D.sidedness is not Sidedness.GENERAL:
        raise ValueError("alphabet is one-sided; use decode_one_sided")
    n, t = A.n, A.t
    if not 0 <= d <= n:
        raise ValueError(f"d must satisfy 0 <= d <= n = {n}, got {d}")
    cost = comb(n, d) * t * n * len(D)
    if cost > budget and not force:
        raise BudgetExceededError(
            f"general decoding needs ~{cost} comparisons (> budget {budget}); "
            "pass force=True to run anyway"
        )
    if counter is None:
        counter = ComparisonCounter()
    start = counter.count

    z_most = D.negatives[-1]
    u = list(v)
    records = []
    prev = Fraction(0)
    for c in D.positives:
        step = c - prev
        scaled = tuple(ui / step for ui in u)
        h = -z_most / step
        mins = _t_star_all(A, scaled, h, d, counter)
        ind = tuple(1 if m == 0 else 0 for m in mins)
        ones = sum(ind)
        if ones > d:
            raise NoConsistentVectorError(
                f"indicator for level >= {format_rational(c)} has "
                f"{ones} nonzeros, more than d = {d}"
            )
        records.append(StageRecord("ge", c, step, ind))
        if ones:
            contrib = A.mul_indicator(ind)
            u = [ui - step * ci for ui, ci in zip(u, contrib)]
        prev = c

    # u is now v - A @ (positive part); the flipped residual is the
    # outcome of the nonnegative vector (positive part) - x.
    neg_levels = Alphabet([0] + [-z for z in D.negatives])
    inner = decode_one_sided(
        A, tuple(-ui for ui in u), neg_levels, d, counter=counter
    )
    for r in inner.stage_log:
        records.append(StageRecord("le", -r.level, -r.weight, r.indicator))

    x_hat = _rebuild(n, records)
    _final_checks(A, v, x_hat, D, d)
    return DecodeResult(x_hat, tuple(records), counter.count - start)


def _negated_records(records: Iterable[StageRecord]) -> Tuple[StageRecord, ...]:
    flip = {"ge": "le", "le": "ge"}
    return tuple(
        StageRecord(flip[r.kind], -r.level, -r.weight, r.indicator)
        for r in records
    )


def decode_auto(A: QaryMatrix, v: Sequence[RationalLike], D: Alphabet, d: int,
                *, budget: int = DEFAULT_BUDGET, force: bool = False
                ) -> DecodeResult:
    """Dispatch on alphabet sidedness, negating the instance when that
    lowers the required disjunctness threshold."""
    if D.sidedness is not Sidedness.GENERAL:
        return decode_one_sided(A, v, D, d)
    transform, _ = optimize_w_by_negation(D)
    if transform is Transform.IDENTITY:
        return decode_general(A, v, D, d, budget=budget, force=force)
    v = to_outcome(v)
    inner = decode_general(
        A, tuple(-vi for vi in v), D.negate(), d, budget=budget, force=force
    )
    return DecodeResult(
        -inner.x_hat, _negated_records(inner.stage_log), inner.comparisons
    )


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

class OracleOutcome(enum.Enum):
    UNIQUE = "unique"
    AMBIGUOUS = "ambiguous"
    NONE = "none"


@dataclass(frozen=True)
class OracleResult:
    outcome: OracleOutcome
    solutions: Tuple[SparseVector, ...]

    @property
    def unique_solution(self) -> SparseVector:
        if self.outcome is not OracleOutcome.UNIQUE:
            raise ValueError(f"oracle outcome is {self.outcome.value}, not unique")
        return self.solutions[0]


def iter_sparse_vectors(n: int, D: Alphabet, max_phi: int
                        ) -> Iterator[SparseVector]:
    """Every vector in D^n with at most max_phi nonzeros, in a fixed
    order: by support size, support lexicographic, then value tuples."""
    nonzero = D.nonzero
    yield SparseVector.zero(n)
    for size in range(1, min(max_phi, n) + 1):
        for support in combinations(range(n), size):
            for values in product(nonzero, repeat=size):
                yield SparseVector(n, zip(support, values))


def count_sparse_vectors(n: int, D: Alphabet, max_phi: int) -> int:
    k = len(D.nonzero)
    return sum(comb(n, s) * k**s for s in range(0, min(max_phi, n) + 1))


def oracle_decode(A: QaryMatrix, v: Sequence[RationalLike], D: Alphabet,
                  d: int, *, budget: int = DEFAULT_BUDGET, force: bool = False
                  ) -> OracleResult:
    """Exhaustive ground truth: collect every admissible x with A @ x = v.

    Returns UNIQUE with the single solution, AMBIGUOUS with the first
    two solutions in enumeration order, or NONE. Independent of the fast
    decoders; this is what their answers are checked against.

    For one-sided alphabets all contributions share a sign, so a
    candidate can only match if each of its columns is nonzero only
    where v is, and together they cover v's support exactly. Candidates
    failing that are skipped without encoding; the scan is still
    exhaustive because no skipped candidate can match.
    """
    v = to_outcome(v)
    if len(v) != A.t:
        raise DimensionMismatchError("outcome length != matrix row count")
    if d < 0:
        raise ValueError("d must be nonnegative")
    n = A.n
    nonzero = D.nonzero
    cost = comb(n, min(d, n)) * max(1, len(nonzero)) ** min(d, n)
    if cost > budget and not force:
        raise BudgetExceededError(
            f"oracle decoding would scan ~{cost} candidates (> budget {budget}); "
            "pass force=True to run anyway"
        )

    one_sided = D.sidedness is not Sidedness.GENERAL
    v_support = frozenset(i for i, vi in enumerate(v) if vi != 0)
    if one_sided:
        columns = [
            j for j in range(n)
            if frozenset(A.column_support(j)) <= v_support
        ]
    else:
        columns = list(range(n))

    matches = []
    zero = SparseVector.zero(n)
    if encode(A, zero) == v:
        matches.append(zero)
    for size in range(1, min(d, n) + 1):
        for support in combinations(columns, size):
            if one_sided:
                covered: set = set()
                for j in support:
                    covered.update(A.column_support(j))
                if covered != v_support:
                    continue
            for values in product(nonzero, repeat=size):
                x = SparseVector(n, zip(support, values))
                if encode(A, x) == v:
                    matches.append(x)
                    if len(matches) == 2:
                        return OracleResult(
                            OracleOutcome.AMBIGUOUS, tuple(matches)
                        )
    if not matches:
        return OracleResult(OracleOutcome.NONE, ())
    return OracleResult(OracleOutcome.UNIQUE, tuple(matches))
