"""Exhaustive disjunctness verification and threshold-ratio bounds.

A q-ary matrix is additive (w,d)-disjunct when, for every candidate
support of at most d columns and every column k outside it, some row's
entry at k strictly exceeds w times that row's sum over the support.
That property is exactly what lets the decoders tell "k is active" from
"k is masked by up to d others", so the verifier here is the ground
truth every construction is checked against.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Optional, Tuple

from .core import (
    Alphabet,
    BudgetExceededError,
    DEFAULT_BUDGET,
    QaryMatrix,
    Rational,
    RationalLike,
    Sidedness,
    format_rational,
    rat,
)


@dataclass(frozen=True)
class DisjunctReport:
    """Result of an exhaustive disjunctness check.

    On failure, ``witness`` holds the violating (support, column) pair:
    no row's entry in that column strictly exceeds w times the row sum
    over the support. Replaying the witness against the definition must
    reproduce the failure; a test enforces that.
    """

    holds: bool
    witness: Optional[Tuple[Tuple[int, ...], int]]
    checks_performed: int

    def __post_init__(self):
        if self.holds and self.witness is not None:
            raise ValueError("report holds but carries a witness")
        if not self.holds and self.witness is None:
            raise ValueError("failing report must carry a witness")


def verify_additive_disjunct(
    A: QaryMatrix,
    w: RationalLike,
    d: int,
    *,
    budget: int = DEFAULT_BUDGET,
    force: bool = False,
) -> DisjunctReport:
    """Exhaustively test whether A is additive (w,d)-disjunct.

    Only supports of size exactly d are enumerated. Entries are
    nonnegative, so the sum over a superset dominates the sum over any
    subset; a row witnessing a size-d support therefore witnesses every
    smaller support it contains, and d <= n-1 guarantees each smaller
    support extends to a size-d one avoiding k. Checking exactly d is
    thus equivalent to checking all sizes 0..d.

    The witness returned is the lexicographically smallest violating
    (support, column) pair. Refuses instances costing more than
    ``budget`` pair checks unless ``force`` is set.
    """
    w = rat(w)
    if w <= 0:
        raise ValueError(f"w must be positive, got {format_rational(w)}")
    n, t = A.n, A.t
    if not 1 <= d <= n - 1:
        raise ValueError(f"d must satisfy 1 <= d <= n-1 = {n - 1}, got {d}")
    cost = comb(n, d) * n * t
    if cost > budget and not force:
        raise BudgetExceededError(
            f"verification needs ~{cost} row checks (> budget {budget}); "
            "pass force=True to run anyway"
        )
    rows = A.entries
    checks = 0
    for support in combinations(range(n), d):
        support_set = set(support)
        # w * (row sum over the support), once per row
        bounds = [
            w * sum(row[j] for j in support) for row in rows
        ]
        for k in range(n):
            if k in support_set:
                continue
            checks += 1
            if not any(row[k] > bound for row, bound in zip(rows, bounds)):
                return DisjunctReport(False, (support, k), checks)
    return DisjunctReport(True, None, checks)


def verify_binary_disjunct(
    A: QaryMatrix,
    d: int,
    *,
    budget: int = DEFAULT_BUDGET,
    force: bool = False,
) -> DisjunctReport:
    """Classic d-disjunctness for a binary matrix.

    Equivalent to additive (1,d)-disjunctness: for every d columns and
    any other column k, some row has 1 at k and 0 on all d columns.
    """
    if not A.is_binary():
        raise ValueError("matrix has entries outside {0,1}")
    return verify_additive_disjunct(A, 1, d, budget=budget, force=force)


# ---------------------------------------------------------------------------
# Required disjunctness thresholds per alphabet
# ---------------------------------------------------------------------------

def required_w_one_sided(D: Alphabet) -> Rational:
    """Smallest w the peeling decoder needs for a one-sided alphabet.

    For positive levels 0 < c_1 < ... < c_m this is
    max over k of (c_m - c_{k-1}) / (c_k - c_{k-1}) with c_0 = 0:
    the worst ratio of the residual range to the peeling step at each
    level. Negative one-sided alphabets are negated first (the decoder
    does the same), which leaves the value unchanged in magnitude.
    """
    side = D.sidedness
    if side is Sidedness.GENERAL:
        raise ValueError("alphabet has both signs; use required_w_general")
    if side is Sidedness.ONE_SIDED_NEG:
        D = D.negate()
    cs = D.positives
    cm = cs[-1]
    prev = rat(0)
    best = rat(0)
    for c in cs:
        best = max(best, (cm - prev) / (c - prev))
        prev = c
    return best


def required_w_general(D: Alphabet) -> Rational:
    """Smallest w the general decoder needs for a two-sided alphabet.

    With positives c_1 < ... < c_m1, negatives z_1 > ... > z_m2 and
    c_0 = z_0 = 0, this is the maximum of
      (c_m1 - c_i - z_m2) / (c_{i+1} - c_i)   for 0 <= i <= m1-1
      (-z_m2 + z_{i-1}) / (-z_i + z_{i-1})    for 1 <= i <= m2.
    The first family covers the positive peeling stages (where the most
    negative level can mask a positive one), the second the one-sided
    cleanup of the remaining negative part.
    """
    if D.sidedness is not Sidedness.GENERAL:
        raise ValueError("alphabet is one-sided; use required_w_one_sided")
    cs = D.positives
    zs = D.negatives
    cm = cs[-1]
    zm = zs[-1]
    best = rat(0)
    prev = rat(0)
    for c in cs:
        best = max(best, (cm - prev - zm) / (c - prev))
        prev = c
    prev = rat(0)
    for z in zs:
        best = max(best, (-zm + prev) / (-z + prev))
        prev = z
    return best


def required_w(D: Alphabet) -> Rational:
    """Dispatch to the one-sided or general bound by alphabet sidedness."""
    if D.sidedness is Sidedness.GENERAL:
        return required_w_general(D)
    return required_w_one_sided(D)


class Transform(enum.Enum):
    IDENTITY = "identity"
    NEGATE = "negate"


def optimize_w_by_negation(D: Alphabet) -> Tuple[Transform, Rational]:
    """Pick the cheaper of decoding D directly or decoding -D.

    Negating the instance is free (outcomes and results flip sign), but
    it can shrink the required disjunctness threshold when the alphabet
    is lopsided. Ties break to IDENTITY.
    """
    w_id = required_w(D)
    w_neg = required_w(D.negate())
    if w_neg < w_id:
        return (Transform.NEGATE, w_neg)
    return (Transform.IDENTITY, w_id)
