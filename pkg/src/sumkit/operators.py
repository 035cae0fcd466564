"""Triangle operators built from weight pairs, their inverses, and
classical summability matrices.

The two derived triangles act on a sequence x through the weighted first
difference of (k * x_k) resp. (x_k / k):

* integrated triangle:      y_n = sum_{k<n} k * u_n * (w_k - w_{k+1}) * x_k
                                  + n * u_n * w_n * x_n
* differentiated triangle:  y_n = sum_{k<n} (1/k) * u_n * (w_k - w_{k+1}) * x_k
                                  + (1/n) * u_n * w_n * x_n

Both are strict triangles whenever every u_k and w_k is nonzero, and both
have closed-form inverses implemented below with O(1) work per index after
an incremental prefix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional

from .core import LazySequence, Scalar, as_fraction, ones
from .errors import InvalidWeightError, SingularTriangleError, UnsupportedRowError


@dataclass
class WeightPair:
    """A pair (u, w) of everywhere-nonzero weight sequences.

    Nonzero-ness is checked lazily on access so that rules stay total and
    cheap; a zero term raises InvalidWeightError naming the offending index.
    """

    u: LazySequence
    w: LazySequence

    @property
    def exact(self) -> bool:
        return self.u.exact and self.w.exact

    def u_at(self, k: int) -> Scalar:
        v = self.u.at(k)
        if v == 0:
            raise InvalidWeightError("u", k)
        return v

    def w_at(self, k: int) -> Scalar:
        v = self.w.at(k)
        if v == 0:
            raise InvalidWeightError("w", k)
        return v

    def w_forward_diff(self, k: int) -> Scalar:
        """w_k - w_{k+1}."""
        return self.w_at(k) - self.w_at(k + 1)

    def recip_uw_diff(self, k: int) -> Scalar:
        """(1/u_k) * (1/w_k - 1/w_{k+1})."""
        return (1 / self.u_at(k)) * (1 / self.w_at(k) - 1 / self.w_at(k + 1))

    def as_float(self) -> "WeightPair":
        return WeightPair(self.u.as_float(), self.w.as_float())

    @classmethod
    def all_ones(cls) -> "WeightPair":
        return cls(ones(), ones())


class TriangleKind(Enum):
    STRICT_TRIANGLE = "strict-triangle"
    ROW_EVALUABLE = "row-evaluable"


class TriangleOperator:
    """An infinite matrix given by a pure entry rule ``(n, k) -> scalar``.

    STRICT_TRIANGLE means zero above the diagonal and nonzero on it, so
    rows are finite and back-substitution is available.  ROW_EVALUABLE
    matrices may have infinite rows; applying one needs either a declared
    per-row support or an explicit row truncation bound.
    """

    __slots__ = ("_rule", "kind", "row_support", "exact", "label", "apply_special", "_memo")

    def __init__(self, rule: Callable[[int, int], Scalar], *, kind: TriangleKind,
                 row_support: Optional[Callable[[int], int]] = None,
                 exact: bool = True, label: str = "",
                 apply_special=None):
        self._rule = rule
        self.kind = kind
        if row_support is None and kind is TriangleKind.STRICT_TRIANGLE:
            row_support = lambda n: n
        self.row_support = row_support
        self.exact = exact
        self.label = label
        self.apply_special = apply_special
        self._memo: dict[tuple[int, int], Scalar] = {}

    def zero(self) -> Scalar:
        return Fraction(0) if self.exact else 0.0

    def entry(self, n: int, k: int) -> Scalar:
        if n < 1 or k < 1:
            raise IndexError(f"matrix indices start at 1, got ({n}, {k})")
        if self.kind is TriangleKind.STRICT_TRIANGLE and k > n:
            return self.zero()
        key = (n, k)
        v = self._memo.get(key)
        if v is None:
            v = self._rule(n, k)
            self._memo[key] = v
        return v

    def row(self, n: int, upto: int) -> list[Scalar]:
        return [self.entry(n, k) for k in range(1, upto + 1)]

    def row_sequence(self, n: int) -> LazySequence:
        """Row ``n`` viewed as a lazy sequence over the column index."""
        support = self.row_support(n) if self.row_support is not None else None
        return LazySequence(lambda k: self.entry(n, k), support=support,
                            exact=self.exact, label=f"{self.label}[row {n}]")

    def as_float(self) -> "TriangleOperator":
        if not self.exact:
            return self
        return TriangleOperator(lambda n, k: float(self.entry(n, k)), kind=self.kind,
                                row_support=self.row_support, exact=False,
                                label=self.label)


def truncation(T: TriangleOperator, n: int) -> list[list[Scalar]]:
    """Dense n-by-n leading block of ``T``."""
    return [[T.entry(i, j) for j in range(1, n + 1)] for i in range(1, n + 1)]


# ---------------------------------------------------------------------------
# Derived triangles
# ---------------------------------------------------------------------------


def weighted_mean_triangle(wp: WeightPair) -> TriangleOperator:
    """Entries u_n * w_k for k <= n; the plain generalized weighted mean."""

    def rule(n: int, k: int) -> Scalar:
        return wp.u_at(n) * wp.w_at(k)

    return TriangleOperator(rule, kind=TriangleKind.STRICT_TRIANGLE, exact=wp.exact,
                            label="weighted-mean")


def _bv_triangle(wp: WeightPair, diag_factor, off_factor, label: str) -> TriangleOperator:
    def rule(n: int, k: int) -> Scalar:
        if k == n:
            return diag_factor(n) * wp.u_at(n) * wp.w_at(n)
        return off_factor(k) * wp.u_at(n) * wp.w_forward_diff(k)

    def apply_special(T: TriangleOperator, x: LazySequence, row_bound):
        # y_n = u_n * (prefix_{n-1} + diag_factor(n) * w_n * x_n) with
        # prefix_m = sum_{k<=m} off_factor(k) * (w_k - w_{k+1}) * x_k
        prefix: dict[int, Scalar] = {0: T.zero()}

        def pref(m: int) -> Scalar:
            if m not in prefix:
                lo = m
                while lo not in prefix:
                    lo -= 1
                acc = prefix[lo]
                for j in range(lo + 1, m + 1):
                    acc = acc + off_factor(j) * wp.w_forward_diff(j) * x.at(j)
                    prefix[j] = acc
            return prefix[m]

        def rule_y(n: int) -> Scalar:
            return wp.u_at(n) * (pref(n - 1) + diag_factor(n) * wp.w_at(n) * x.at(n))

        return rule_y

    return TriangleOperator(rule, kind=TriangleKind.STRICT_TRIANGLE, exact=wp.exact,
                            label=label, apply_special=apply_special)


def integrated_triangle(wp: WeightPair) -> TriangleOperator:
    if wp.exact:
        return _bv_triangle(wp, lambda n: Fraction(n), lambda k: Fraction(k), "integrated-bv")
    return _bv_triangle(wp, float, float, "integrated-bv")


def differentiated_triangle(wp: WeightPair) -> TriangleOperator:
    if wp.exact:
        return _bv_triangle(wp, lambda n: Fraction(1, n), lambda k: Fraction(1, k),
                            "differentiated-bv")
    return _bv_triangle(wp, lambda n: 1.0 / n, lambda k: 1.0 / k, "differentiated-bv")


# ---------------------------------------------------------------------------
# Application and inversion
# ---------------------------------------------------------------------------


def apply_triangle(T: TriangleOperator, x: LazySequence,
                   row_bound: Optional[int] = None) -> LazySequence:
    """The matrix transform ``y = T x`` as a lazy sequence.

    Strict triangles sum their finite rows; row-evaluable matrices use the
    declared row support, falling back to ``row_bound`` when given, and
    raise UnsupportedRowError otherwise.
    """
    exact = T.exact and x.exact

    if T.apply_special is not None:
        rule = T.apply_special(T, x, row_bound)
        return LazySequence(rule, exact=exact, label=f"{T.label}*{x.label}")

    def rule(n: int) -> Scalar:
        if T.row_support is not None:
            limit = T.row_support(n)
        elif row_bound is not None:
            limit = row_bound
        else:
            raise UnsupportedRowError(
                f"row {n} of {T.label or 'matrix'} has no finite support; "
                "pass an explicit row bound")
        total = Fraction(0) if exact else 0.0
        for k in range(1, limit + 1):
            total += T.entry(n, k) * x.at(k)
        return total

    return LazySequence(rule, exact=exact, label=f"{T.label}*{x.label}")


def invert_triangle(T: TriangleOperator, y: LazySequence) -> LazySequence:
    """Back-substitution solve of ``T x = y`` for a strict triangle.

    This is the defining oracle used to cross-check every closed form.
    """
    if T.kind is not TriangleKind.STRICT_TRIANGLE:
        raise SingularTriangleError(0, "inversion needs a strict triangle")
    exact = T.exact and y.exact
    memo: dict[int, Scalar] = {}

    def ensure(n: int) -> None:
        for i in range(1, n + 1):
            if i in memo:
                continue
            diag = T.entry(i, i)
            if diag == 0:
                raise SingularTriangleError(i)
            acc = y.at(i)
            for k in range(1, i):
                acc = acc - T.entry(i, k) * memo[k]
            memo[i] = acc / diag

    def rule(n: int) -> Scalar:
        ensure(n)
        return memo[n]

    return LazySequence(rule, exact=exact, label=f"{T.label}^-1*{y.label}")


def _inverse_core(wp: WeightPair, y: LazySequence):
    """Shared prefix for both closed-form inverses:
    core(k) = prefix_{k-1} + y_k / (u_k * w_k), with
    prefix_m = sum_{j<=m} (1/u_j) * (1/w_j - 1/w_{j+1}) * y_j.
    """
    exact = wp.exact and y.exact
    zero: Scalar = Fraction(0) if exact else 0.0
    prefix: dict[int, Scalar] = {0: zero}

    def pref(m: int) -> Scalar:
        if m not in prefix:
            lo = m
            while lo not in prefix:
                lo -= 1
            acc = prefix[lo]
            for j in range(lo + 1, m + 1):
                acc = acc + wp.recip_uw_diff(j) * y.at(j)
                prefix[j] = acc
        return prefix[m]

    def core(k: int) -> Scalar:
        return pref(k - 1) + y.at(k) / (wp.u_at(k) * wp.w_at(k))

    return core, exact


def integrated_inverse(wp: WeightPair, y: LazySequence) -> LazySequence:
    """Closed-form solve of (integrated triangle) x = y:
    x_k = (1/k) * [ sum_{j<k} (1/u_j)(1/w_j - 1/w_{j+1}) y_j + y_k/(u_k w_k) ].
    """
    core, exact = _inverse_core(wp, y)
    if exact:
        return LazySequence(lambda k: core(k) / k, exact=True, label="integrated-inverse")
    return LazySequence(lambda k: core(k) / float(k), exact=False, label="integrated-inverse")


def differentiated_inverse(wp: WeightPair, y: LazySequence) -> LazySequence:
    """Closed-form solve of (differentiated triangle) x = y:
    x_k = k * [ sum_{j<k} (1/u_j)(1/w_j - 1/w_{j+1}) y_j + y_k/(u_k w_k) ].
    """
    core, exact = _inverse_core(wp, y)
    if exact:
        return LazySequence(lambda k: core(k) * k, exact=True, label="differentiated-inverse")
    return LazySequence(lambda k: core(k) * float(k), exact=False,
                        label="differentiated-inverse")


# ---------------------------------------------------------------------------
# Basis columns
# ---------------------------------------------------------------------------


def basis_column(space: str, wp: WeightPair, k: int) -> LazySequence:
    """Column ``k`` of the inverse triangle: the unique solution of
    ``T s = e^(k)``, computed by the back-substitution oracle."""
    from .spaces import SpaceName  # local import to avoid a cycle

    name = SpaceName(space) if not isinstance(space, SpaceName) else space
    T = integrated_triangle(wp) if name is SpaceName.INT_BV else differentiated_triangle(wp)
    return invert_triangle(T, LazySequence.unit(k, exact=wp.exact))


def basis_column_tabulated(space: str, wp: WeightPair, k: int) -> LazySequence:
    """A tabulated closed form for basis columns kept only for comparison.

    Known to disagree with the defining identity for weights where
    u_{k+1} != w_{k+1}; see ``basis_tabulated_discrepancies``.
    """
    from .spaces import SpaceName

    name = SpaceName(space) if not isinstance(space, SpaceName) else space
    exact = wp.exact
    zero: Scalar = Fraction(0) if exact else 0.0

    def factor(kk: int) -> Scalar:
        return 1 / (wp.u_at(kk) * wp.w_at(kk)) - 1 / (wp.u_at(kk) * wp.u_at(kk + 1))

    def rule(n: int) -> Scalar:
        if n < k:
            return zero
        if n == k:
            diag = wp.u_at(k) * wp.w_at(k)
            return 1 / (n * diag) if name is SpaceName.INT_BV else n / diag
        f = factor(k)
        if name is SpaceName.INT_BV:
            return f / n if exact else f / float(n)
        return f * n

    return LazySequence(rule, exact=exact, label="basis-tabulated")


def basis_tabulated_discrepancies(space: str, wp: WeightPair, k: int, n_max: int) -> list[int]:
    """Indices n <= n_max where the tabulated closed form disagrees with the
    oracle-defined basis column."""
    oracle = basis_column(space, wp, k)
    tab = basis_column_tabulated(space, wp, k)
    return [n for n in range(1, n_max + 1) if oracle.at(n) != tab.at(n)]


# ---------------------------------------------------------------------------
# Classical matrices (all converted to 1-based indexing on construction)
# ---------------------------------------------------------------------------


def euler_matrix(r) -> TriangleOperator:
    """Euler means of order r, 0 < r < 1; rows sum to 1 exactly."""
    r = as_fraction(r) if not isinstance(r, float) else r
    if not (0 < r < 1):
        raise ValueError("euler matrix needs 0 < r < 1")
    exact = not isinstance(r, float)
    one_minus = 1 - r

    def rule(n: int, k: int) -> Scalar:
        return math.comb(n - 1, k - 1) * one_minus ** (n - k) * r ** (k - 1)

    return TriangleOperator(rule, kind=TriangleKind.STRICT_TRIANGLE, exact=exact,
                            label=f"euler:{r}")


def riesz_matrix(t: LazySequence) -> TriangleOperator:
    """Riesz (weighted-mean) matrix entry(n,k) = t_k / (t_1 + ... + t_n).

    Requires strictly positive t_k; checked lazily on access.
    """
    totals: dict[int, Scalar] = {0: t.zero()}

    def total(n: int) -> Scalar:
        if n not in totals:
            lo = n
            while lo not in totals:
                lo -= 1
            acc = totals[lo]
            for j in range(lo + 1, n + 1):
                term = t.at(j)
                if term <= 0:
                    raise InvalidWeightError("t", j, "must be positive for a Riesz matrix")
                acc = acc + term
                totals[j] = acc
        return totals[n]

    def rule(n: int, k: int) -> Scalar:
        tk = t.at(k)
        if tk <= 0:
            raise InvalidWeightError("t", k, "must be positive for a Riesz matrix")
        return tk / total(n)

    return TriangleOperator(rule, kind=TriangleKind.STRICT_TRIANGLE, exact=t.exact,
                            label=f"riesz:{t.label or 't'}")


def cesaro_matrix() -> TriangleOperator:
    T = riesz_matrix(ones())
    T.label = "cesaro"
    return T


def taylor_matrix(r) -> TriangleOperator:
    """Taylor matrix: upper-triangular with geometric rows, hence only
    row-evaluable; entry(n,k) = C(k-1, n-1) (1-r)^n r^(k-n) for k >= n."""
    r = as_fraction(r) if not isinstance(r, float) else r
    if not (0 < r < 1):
        raise ValueError("taylor matrix needs 0 < r < 1")
    exact = not isinstance(r, float)
    one_minus = 1 - r
    zero: Scalar = Fraction(0) if exact else 0.0

    def rule(n: int, k: int) -> Scalar:
        if k < n:
            return zero
        return math.comb(k - 1, n - 1) * one_minus ** n * r ** (k - n)

    return TriangleOperator(rule, kind=TriangleKind.ROW_EVALUABLE, row_support=None,
                            exact=exact, label=f"taylor:{r}")


def taylor_row_tail(r, n: int, j_max: int) -> Scalar:
    """Exact mass of row ``n`` of the Taylor matrix beyond column ``j_max``.

    Every Taylor row sums to 1, so the remainder is 1 minus the partial row
    sum; it certifies any truncation of the geometric row.
    """
    T = taylor_matrix(r)
    partial = T.zero()
    for j in range(n, j_max + 1):
        partial += T.entry(n, j)
    return 1 - partial


def difference_matrix() -> TriangleOperator:
    def rule(n: int, k: int) -> Scalar:
        if k == n:
            return Fraction(1)
        if k == n - 1:
            return Fraction(-1)
        return Fraction(0)

    return TriangleOperator(rule, kind=TriangleKind.STRICT_TRIANGLE, label="difference")


def identity_matrix() -> TriangleOperator:
    def rule(n: int, k: int) -> Scalar:
        return Fraction(1) if n == k else Fraction(0)

    return TriangleOperator(rule, kind=TriangleKind.STRICT_TRIANGLE, label="identity")


def classical_matrix(name: str, param=None) -> TriangleOperator:
    """Dispatcher for the named classical matrices."""
    name = name.lower()
    if name == "identity":
        return identity_matrix()
    if name == "cesaro":
        return cesaro_matrix()
    if name == "difference":
        return difference_matrix()
    if name == "euler":
        return euler_matrix(param)
    if name == "taylor":
        return taylor_matrix(param)
    if name == "riesz":
        if not isinstance(param, LazySequence):
            raise ValueError("riesz needs a weight sequence parameter")
        return riesz_matrix(param)
    raise ValueError(f"unknown classical matrix {name!r}")


# ---------------------------------------------------------------------------
# Products
# ---------------------------------------------------------------------------


def matrix_product(L: TriangleOperator, R: TriangleOperator, *,
                   left_row_bound: Optional[int] = None, label: str = "") -> TriangleOperator:
    """Entry-wise product matrix (L R)(n,k) = sum_j L(n,j) R(j,k).

    The inner sum runs over the finite support of row n of ``L`` when
    declared, else up to ``left_row_bound``; a row-evaluable left factor
    without either raises UnsupportedRowError at evaluation time.
    """
    exact = L.exact and R.exact
    strict = (L.kind is TriangleKind.STRICT_TRIANGLE
              and R.kind is TriangleKind.STRICT_TRIANGLE)

    def bound(n: int) -> int:
        if L.row_support is not None:
            return L.row_support(n)
        if left_row_bound is not None:
            return left_row_bound
        raise UnsupportedRowError(
            f"row {n} of {L.label or 'left factor'} has no finite support; "
            "pass an explicit row bound")

    right_strict = R.kind is TriangleKind.STRICT_TRIANGLE

    def rule(n: int, k: int) -> Scalar:
        total = Fraction(0) if exact else 0.0
        start = k if right_strict else 1  # R(j,k) = 0 for j < k then
        for j in range(start, bound(n) + 1):
            lv = L.entry(n, j)
            if lv == 0:
                continue
            total += lv * R.entry(j, k)
        return total

    row_support = None
    if L.row_support is not None and R.row_support is not None:
        lsup, rsup = L.row_support, R.row_support
        row_support = lambda n: max((rsup(j) for j in range(1, lsup(n) + 1)),
                                    default=0)
    elif left_row_bound is not None and R.row_support is not None:
        rsup = R.row_support
        cap = max((rsup(j) for j in range(1, left_row_bound + 1)), default=0)
        row_support = lambda n: cap
    kind = TriangleKind.STRICT_TRIANGLE if strict else TriangleKind.ROW_EVALUABLE
    return TriangleOperator(rule, kind=kind, row_support=row_support, exact=exact,
                            label=label or f"{L.label}*{R.label}")
