"""Exact-arithmetic primitives for multi-group testing instances.

A measurement matrix holds small nonnegative integers (copy counts per
item per test), while item statuses and test outcomes live in an ordered
rational level set. Everything in this module is exact: values are
`fractions.Fraction`, comparisons are never tolerance based, and all
objects are immutable after construction, so they are safe to share
across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence, Tuple, Union

# Exact rational scalar used for every level, outcome, and weight. Python
# Fractions carry arbitrary-precision integers, so the geometric growth in
# the concatenation construction never overflows.
Rational = Fraction

RationalLike = Union[Rational, int, str]

#: Default cap on elementary operations for the exhaustive tools
#: (verifier enumeration, brute-force decoding). Overridable per call.
DEFAULT_BUDGET = 10**9


class DimensionMismatchError(ValueError):
    """Operands have incompatible lengths or shapes."""


class BudgetExceededError(RuntimeError):
    """An exhaustive operation would exceed its operation budget."""


def rat(value: RationalLike) -> Rational:
    """Coerce an int, Fraction, or 'p/q' string to an exact rational.

    Floats are rejected outright: every quantity in this package is exact
    and a float at the boundary would smuggle in rounding.
    """
    if isinstance(value, float):
        raise TypeError(
            f"refusing float {value!r}; pass an int, Fraction, or 'p/q' string"
        )
    return Fraction(value)


def format_rational(value: RationalLike) -> str:
    """Render a rational as 'p' or 'p/q' (lowest terms, q > 0)."""
    x = rat(value)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# Level sets
# ---------------------------------------------------------------------------

class Sidedness(enum.Enum):
    ONE_SIDED_POS = "one-sided-positive"
    ONE_SIDED_NEG = "one-sided-negative"
    GENERAL = "general"


class Alphabet:
    """Ordered set of admissible status levels, always containing 0.

    Levels are stored strictly increasing. ``positives`` lists the positive
    levels ascending (smallest first) and ``negatives`` lists the negative
    levels descending (nearest zero first), so ``negatives[-1]`` is the most
    negative level. An alphabet is one-sided when all nonzero levels share a
    sign; the simple peeling decoder only applies in that case.
    """

    __slots__ = ("levels",)

    def __init__(self, levels: Iterable[RationalLike]):
        vals = [rat(v) for v in levels]
        vals.sort()
        for a, b in zip(vals, vals[1:]):
            if a == b:
                raise ValueError(f"duplicate level {format_rational(a)}")
        if Fraction(0) not in vals:
            raise ValueError("alphabet must contain the level 0")
        if len(vals) < 2:
            raise ValueError("alphabet needs at least one nonzero level")
        self.levels: Tuple[Rational, ...] = tuple(vals)

    @property
    def positives(self) -> Tuple[Rational, ...]:
        """Positive levels, ascending."""
        return tuple(v for v in self.levels if v > 0)

    @property
    def negatives(self) -> Tuple[Rational, ...]:
        """Negative levels, descending (nearest zero first)."""
        return tuple(v for v in reversed(self.levels) if v < 0)

    @property
    def nonzero(self) -> Tuple[Rational, ...]:
        return tuple(v for v in self.levels if v != 0)

    @property
    def sidedness(self) -> Sidedness:
        has_pos = self.levels[-1] > 0
        has_neg = self.levels[0] < 0
        if has_pos and has_neg:
            return Sidedness.GENERAL
        return Sidedness.ONE_SIDED_POS if has_pos else Sidedness.ONE_SIDED_NEG

    def scale(self, a: RationalLike) -> "Alphabet":
        """Alphabet of a*x for x in this alphabet; a must be nonzero."""
        a = rat(a)
        if a == 0:
            raise ValueError("scale factor must be nonzero")
        return Alphabet(a * v for v in self.levels)

    def negate(self) -> "Alphabet":
        return self.scale(-1)

    def __contains__(self, value: object) -> bool:
        try:
            return rat(value) in set(self.levels)  # type: ignore[arg-type]
        except (TypeError, ValueError):
            return False

    def __iter__(self) -> Iterator[Rational]:
        return iter(self.levels)

    def __len__(self) -> int:
        return len(self.levels)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self.levels == other.levels

    def __hash__(self) -> int:
        return hash(self.levels)

    def __repr__(self) -> str:
        return "Alphabet({%s})" % ", ".join(format_rational(v) for v in self.levels)


# ---------------------------------------------------------------------------
# Measurement matrices
# ---------------------------------------------------------------------------

class QaryMatrix:
    """t-by-n measurement matrix with integer entries in {0, ..., q-1}.

    ``families`` is optional metadata naming disjoint groups of rows; the
    rows inside one family must be pairwise disjoint binary rows (no column
    touched twice). The row-reduction construction consumes this metadata.
    Row and column indices are 0-based everywhere in code; the file format
    uses 1-based family indices.
    """

    __slots__ = ("q", "entries", "families", "_columns", "_column_support")

    def __init__(
        self,
        q: int,
        entries: Iterable[Iterable[int]],
        families: Optional[Iterable[Iterable[int]]] = None,
    ):
        if not isinstance(q, int) or q < 2:
            raise ValueError(f"q must be an integer >= 2, got {q!r}")
        rows = tuple(tuple(row) for row in entries)
        if not rows or not rows[0]:
            raise ValueError("matrix must have at least one row and one column")
        n = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != n:
                raise DimensionMismatchError(
                    f"row {i} has {len(row)} entries, expected {n}"
                )
            for j, e in enumerate(row):
                if not isinstance(e, int) or isinstance(e, bool):
                    raise ValueError(f"entry ({i},{j}) is not an integer: {e!r}")
                if not 0 <= e <= q - 1:
                    raise ValueError(
                        f"entry ({i},{j}) = {e} outside 0..{q - 1}"
                    )
        self.q = q
        self.entries: Tuple[Tuple[int, ...], ...] = rows
        self.families: Optional[Tuple[Tuple[int, ...], ...]] = (
            self._validate_families(families, rows) if families is not None else None
        )
        self._columns: Optional[Tuple[Tuple[int, ...], ...]] = None
        self._column_support: Optional[Tuple[Tuple[int, ...], ...]] = None

    @staticmethod
    def _validate_families(families, rows):
        t = len(rows)
        fams = tuple(tuple(f) for f in families)
        seen: set = set()
        for fi, fam in enumerate(fams):
            if not fam:
                raise ValueError(f"family {fi} is empty")
            for r in fam:
                if not isinstance(r, int) or not 0 <= r < t:
                    raise ValueError(f"family {fi} names invalid row {r!r}")
                if r in seen:
                    raise ValueError(f"row {r} appears in more than one family")
                seen.add(r)
            # named rows must be binary and pairwise disjoint
            for r in fam:
                if any(e not in (0, 1) for e in rows[r]):
                    raise ValueError(f"family {fi} row {r} is not binary")
            n = len(rows[0])
            for j in range(n):
                if sum(rows[r][j] for r in fam) > 1:
                    raise ValueError(
                        f"family {fi} rows overlap in column {j}"
                    )
        return fams

    @property
    def t(self) -> int:
        return len(self.entries)

    @property
    def n(self) -> int:
        return len(self.entries[0])

    def row(self, i: int) -> Tuple[int, ...]:
        return self.entries[i]

    def column(self, j: int) -> Tuple[int, ...]:
        if self._columns is None:
            self._columns = tuple(zip(*self.entries))
        return self._columns[j]

    def column_support(self, j: int) -> Tuple[int, ...]:
        """Row indices where column j is nonzero."""
        if self._column_support is None:
            self._column_support = tuple(
                tuple(i for i, e in enumerate(col) if e != 0)
                for col in (self.column(j2) for j2 in range(self.n))
            )
        return self._column_support[j]

    def is_binary(self) -> bool:
        return all(e in (0, 1) for row in self.entries for e in row)

    def mul(self, x: Sequence[RationalLike]) -> Tuple[Rational, ...]:
        """Exact matrix-vector product A @ x for a dense vector."""
        if len(x) != self.n:
            raise DimensionMismatchError(
                f"vector length {len(x)} != column count {self.n}"
            )
        vals = [rat(v) for v in x]
        return tuple(
            sum((e * v for e, v in zip(row, vals) if e), Fraction(0))
            for row in self.entries
        )

    def mul_indicator(self, s: Sequence[int]) -> Tuple[int, ...]:
        """A @ s for a 0/1 vector s, as plain integers."""
        if len(s) != self.n:
            raise DimensionMismatchError(
                f"indicator length {len(s)} != column count {self.n}"
            )
        return tuple(
            sum(e for e, sj in zip(row, s) if sj) for row in self.entries
        )

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, QaryMatrix)
            and self.q == other.q
            and self.entries == other.entries
            and self.families == other.families
        )

    def __hash__(self) -> int:
        return hash((self.q, self.entries, self.families))

    def __repr__(self) -> str:
        return f"QaryMatrix(q={self.q}, t={self.t}, n={self.n})"


# ---------------------------------------------------------------------------
# Status vectors and outcomes
# ---------------------------------------------------------------------------

class SparseVector:
    """Length-n status vector stored by its nonzero support."""

    __slots__ = ("n", "support")

    def __init__(self, n: int, support: Iterable[Tuple[int, RationalLike]] = ()):
        if not isinstance(n, int) or n < 1:
            raise ValueError(f"length must be a positive integer, got {n!r}")
        pairs = []
        seen: set = set()
        for j, value in support:
            if not isinstance(j, int) or not 0 <= j < n:
                raise ValueError(f"support index {j!r} outside 0..{n - 1}")
            if j in seen:
                raise ValueError(f"duplicate support index {j}")
            seen.add(j)
            v = rat(value)
            if v == 0:
                continue
            pairs.append((j, v))
        pairs.sort()
        self.n = n
        self.support: Tuple[Tuple[int, Rational], ...] = tuple(pairs)

    @classmethod
    def zero(cls, n: int) -> "SparseVector":
        return cls(n)

    @classmethod
    def from_dense(cls, values: Sequence[RationalLike]) -> "SparseVector":
        return cls(len(values), ((j, v) for j, v in enumerate(values)))

    @property
    def phi(self) -> int:
        """Number of nonzero entries."""
        return len(self.support)

    def value_at(self, j: int) -> Rational:
        for idx, v in self.support:
            if idx == j:
                return v
        if not 0 <= j < self.n:
            raise IndexError(j)
        return Fraction(0)

    def to_dense(self) -> Tuple[Rational, ...]:
        dense = [Fraction(0)] * self.n
        for j, v in self.support:
            dense[j] = v
        return tuple(dense)

    def values_in(self, alphabet: Alphabet) -> bool:
        levels = set(alphabet.levels)
        return all(v in levels for _, v in self.support)

    def scale(self, a: RationalLike) -> "SparseVector":
        a = rat(a)
        return SparseVector(self.n, ((j, a * v) for j, v in self.support))

    def __neg__(self) -> "SparseVector":
        return self.scale(-1)

    def __add__(self, other: "SparseVector") -> "SparseVector":
        if not isinstance(other, SparseVector):
            return NotImplemented
        if other.n != self.n:
            raise DimensionMismatchError("vector lengths differ")
        merged = dict(self.support)
        for j, v in other.support:
            merged[j] = merged.get(j, Fraction(0)) + v
        return SparseVector(self.n, merged.items())

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self + (-other)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, SparseVector)
            and self.n == other.n
            and self.support == other.support
        )

    def __hash__(self) -> int:
        return hash((self.n, self.support))

    def __repr__(self) -> str:
        body = ", ".join(f"{j}: {format_rational(v)}" for j, v in self.support)
        return f"SparseVector(n={self.n}, {{{body}}})"


#: Outcome of measuring a status vector: one exact rational per test.
#: Entries may exceed q-1; there is no invariant beyond exactness.
Outcome = Tuple[Rational, ...]


def to_outcome(values: Iterable[RationalLike]) -> Outcome:
    return tuple(rat(v) for v in values)


def encode(A: QaryMatrix, x: SparseVector) -> Outcome:
    """Outcome vector of measuring x with A (exact product A @ x)."""
    if x.n != A.n:
        raise DimensionMismatchError(
            f"vector length {x.n} != matrix column count {A.n}"
        )
    out = [Fraction(0)] * A.t
    for j, v in x.support:
        for i in A.column_support(j):
            out[i] += A.entries[i][j] * v
    return tuple(out)


# ---------------------------------------------------------------------------
# Component-wise predicates
# ---------------------------------------------------------------------------

class Threshold(enum.Enum):
    EQ = "eq"
    GE = "ge"
    LE = "le"


def threshold_indicator(
    y: Sequence[RationalLike], delta: RationalLike, mode: Threshold
) -> Tuple[int, ...]:
    """0/1 vector flagging entries equal to / at least / at most delta."""
    d = rat(delta)
    vals = [rat(v) for v in y]
    if mode is Threshold.EQ:
        return tuple(1 if v == d else 0 for v in vals)
    if mode is Threshold.GE:
        return tuple(1 if v >= d else 0 for v in vals)
    if mode is Threshold.LE:
        return tuple(1 if v <= d else 0 for v in vals)
    raise ValueError(f"unknown threshold mode {mode!r}")


def dominates(x: Sequence[RationalLike], y: Sequence[RationalLike]) -> bool:
    """True iff x >= y componentwise (a partial order, not total)."""
    if len(x) != len(y):
        raise DimensionMismatchError("vector lengths differ")
    return all(rat(a) >= rat(b) for a, b in zip(x, y))


# ---------------------------------------------------------------------------
# Affine change of variables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineMap:
    """Invertible change of variables x -> a*x + b on hidden vectors.

    Learning x from the outcome v of a fixed matrix A is equivalent to
    learning x' = a*x + b from v' = a*v + A@b, because outcomes transform
    linearly alongside the hidden vector. Decoders use pure scalings
    (b = 0) to normalize the smallest positive level to 1, and negation
    (a = -1) when that lowers the disjunctness threshold the alphabet
    demands.
    """

    a: Rational
    b: Tuple[Rational, ...]

    def __post_init__(self):
        a = rat(self.a)
        if a == 0:
            raise ValueError("scale factor a must be nonzero")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", tuple(rat(v) for v in self.b))

    @classmethod
    def scaling(cls, a: RationalLike, n: int) -> "AffineMap":
        return cls(rat(a), (Fraction(0),) * n)

    @property
    def is_pure_scaling(self) -> bool:
        return all(v == 0 for v in self.b)

    def inverse(self) -> "AffineMap":
        inv_a = 1 / self.a
        return AffineMap(inv_a, tuple(-v * inv_a for v in self.b))

    def apply_hidden(self, x: Sequence[RationalLike]) -> Tuple[Rational, ...]:
        if len(x) != len(self.b):
            raise DimensionMismatchError("hidden vector length != shift length")
        return tuple(self.a * rat(v) + bv for v, bv in zip(x, self.b))

    def apply_sparse(self, x: SparseVector) -> SparseVector:
        """Transform a sparse vector; requires b = 0 to preserve sparsity."""
        if not self.is_pure_scaling:
            raise ValueError("sparse transform requires a pure scaling (b = 0)")
        if x.n != len(self.b):
            raise DimensionMismatchError("vector length != map length")
        return x.scale(self.a)

    def apply_outcome(self, A: QaryMatrix, v: Sequence[RationalLike]) -> Outcome:
        if A.n != len(self.b):
            raise DimensionMismatchError("matrix width != shift length")
        if len(v) != A.t:
            raise DimensionMismatchError("outcome length != matrix row count")
        shift = A.mul(self.b)
        return tuple(self.a * rat(vi) + si for vi, si in zip(v, shift))

    def apply_alphabet(self, D: Alphabet) -> Alphabet:
        """Level set of transformed entries; requires b = 0 (0 must stay 0)."""
        if not self.is_pure_scaling:
            raise ValueError("alphabet transform requires a pure scaling (b = 0)")
        return D.scale(self.a)
