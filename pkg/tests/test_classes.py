"""Tests for the matrix-class machinery: conditions, tables, reductions."""

import random
from fractions import Fraction

import pytest

from sumkit.core import SpaceTag, TruncationSchedule, Verdict, ones, zeros
from sumkit.duals import DualMatrixKind, dual_kernel_matrix
from sumkit.errors import UnsupportedClassError, UnsupportedRowError
from sumkit.classes import (
    ClassReport,
    CompositeTarget,
    ConditionId,
    TransformTag,
    characterize,
    check_condition,
    reduce_source_d_bv,
    reduce_source_int_bv,
    reduce_target_d_bv,
    reduce_target_int_bv,
    table_recipe,
    verify_reduction_roundtrip,
)
from sumkit.operators import (
    TriangleKind,
    TriangleOperator,
    WeightPair,
    cesaro_matrix,
    difference_matrix,
    euler_matrix,
    identity_matrix,
    integrated_triangle,
    matrix_product,
    taylor_matrix,
)
from conftest import random_sequence, random_weight_pair

SCHED = TruncationSchedule()
SMALL = TruncationSchedule(sizes=(8, 16, 32, 64))
WP_ONES = WeightPair.all_ones()


def lower_ones() -> TriangleOperator:
    return TriangleOperator(lambda n, k: Fraction(1),
                            kind=TriangleKind.STRICT_TRIANGLE, label="lower-ones")


def row_index_matrix() -> TriangleOperator:
    return TriangleOperator(lambda n, k: Fraction(n),
                            kind=TriangleKind.STRICT_TRIANGLE, label="rows-grow")


def geometric_grid() -> TriangleOperator:
    # entry(n,k) = 2^-(n+k) on the full quadrant
    return TriangleOperator(lambda n, k: Fraction(1, 2 ** (n + k)),
                            kind=TriangleKind.ROW_EVALUABLE, row_support=None,
                            label="geometric-grid")


class TestRecipes:
    def test_out_of_l1(self):
        r = table_recipe(1, "l1", "c")
        assert r.table == 1 and r.transform is TransformTag.NONE
        assert [c for c, _ in r.conditions] == [ConditionId.C11, ConditionId.C12]
        assert [c for c, _ in table_recipe(1, "l1", "linf").conditions] == [ConditionId.C11]
        assert [c for c, _ in table_recipe(1, "l1", "l1").conditions] == [ConditionId.C13]

    def test_into_l1(self):
        assert [c for c, _ in table_recipe(2, "linf", "l1").conditions] == [ConditionId.C20]
        assert [c for c, _ in table_recipe(2, "bs", "l1").conditions] == [
            ConditionId.C21, ConditionId.C22]
        assert [c for c, _ in table_recipe(2, "cs", "l1").conditions] == [ConditionId.C23]

    def test_out_of_domain_spaces(self):
        r = table_recipe(3, "int-bv", "c0")
        assert r.transform is TransformTag.REDUCE_SOURCE_INT_BV
        assert r.conditions == ((ConditionId.C11, False), (ConditionId.C12, True))
        r = table_recipe(4, "d-bv", "linf")
        assert r.transform is TransformTag.REDUCE_SOURCE_D_BV
        assert r.conditions == ((ConditionId.C11, False),)

    def test_into_domain_spaces(self):
        r = table_recipe(5, "bs", "int-bv")
        assert r.transform is TransformTag.REDUCE_TARGET_INT_BV
        assert [c for c, _ in r.conditions] == [ConditionId.C21, ConditionId.C22]
        r = table_recipe(6, "cs", "d-bv")
        assert r.transform is TransformTag.REDUCE_TARGET_D_BV
        assert [c for c, _ in r.conditions] == [ConditionId.C23]

    def test_uncovered_pairs_are_reported(self):
        with pytest.raises(UnsupportedClassError) as exc:
            table_recipe(1, "linf", "c")
        assert exc.value.source == "linf" and exc.value.target == "c"
        with pytest.raises(UnsupportedClassError):
            table_recipe(1, "l1", "c0")  # no c0 row in the l1 table
        with pytest.raises(UnsupportedClassError):
            table_recipe(2, "l1", "c")
        with pytest.raises(UnsupportedClassError):
            table_recipe(3, "l1", "c")
        with pytest.raises(UnsupportedClassError):
            table_recipe(7, "l1", "c")


class TestSourceReduction:
    def test_ones_weights_divide_by_column(self):
        B = reduce_source_int_bv(cesaro_matrix(), WP_ONES)
        for n in range(1, 7):
            for k in range(1, n + 1):
                assert B.entry(n, k) == Fraction(1, n * k)
        assert B.entry(2, 5) == 0

    def test_ones_weights_multiply_for_d_bv(self):
        B = reduce_source_d_bv(identity_matrix(), WP_ONES)
        for n in range(1, 7):
            assert B.entry(n, n) == n
            for k in range(1, n):
                assert B.entry(n, k) == 0

    def test_identity_reduces_to_inverse_diagonal(self):
        rng = random.Random(83)
        wp = random_weight_pair(rng)
        B = reduce_source_int_bv(identity_matrix(), wp)
        for n in range(1, 9):
            assert B.entry(n, n) == 1 / (n * wp.u_at(n) * wp.w_at(n))

    @pytest.mark.parametrize("seed", [85, 86])
    def test_rows_match_the_dual_kernel_construction(self, seed):
        # row n of the reduced matrix is the beta-kernel row built from row
        # n of A, evaluated at the row's support extent
        rng = random.Random(seed)
        wp = random_weight_pair(rng)
        A = euler_matrix(Fraction(1, 3))
        B = reduce_source_int_bv(A, wp)
        D = reduce_source_d_bv(A, wp)
        for n in (1, 2, 5, 12):
            row = A.row_sequence(n)
            K_int = dual_kernel_matrix(DualMatrixKind.BETA_INT_BV, row, wp)
            K_d = dual_kernel_matrix(DualMatrixKind.BETA_D_BV, row, wp)
            for k in range(1, n + 1):
                assert B.entry(n, k) == K_int.entry(n, k)
                assert D.entry(n, k) == K_d.entry(n, k)

    def test_needs_row_finite_input(self):
        with pytest.raises(UnsupportedRowError):
            reduce_source_int_bv(taylor_matrix(Fraction(1, 2)), WP_ONES)


class TestTargetReduction:
    def test_matches_dense_product(self):
        rng = random.Random(87)
        wp = random_weight_pair(rng)
        A = euler_matrix(Fraction(1, 4))
        G = integrated_triangle(wp)
        P = reduce_target_int_bv(A, wp)
        for n in range(1, 13):
            for k in range(1, 13):
                want = sum(G.entry(n, j) * A.entry(j, k) for j in range(1, n + 1))
                assert P.entry(n, k) == want

    def test_ones_weight_shortcuts(self):
        up = reduce_target_int_bv(cesaro_matrix(), WP_ONES)
        down = reduce_target_d_bv(cesaro_matrix(), WP_ONES)
        for n in range(1, 7):
            for k in range(1, n + 1):
                assert up.entry(n, k) == 1           # n * (1/n)
                assert down.entry(n, k) == Fraction(1, n * n)


class TestConditions:
    def test_identity_column_sums_are_exactly_one(self):
        v = check_condition(ConditionId.C13, identity_matrix(), SCHED)
        assert v.status is Verdict.HOLDS
        assert all(s == 1 for _, s in v.trace)

    def test_cesaro_entry_sup(self):
        v = check_condition(ConditionId.C11, cesaro_matrix(), SCHED)
        assert v.status is Verdict.HOLDS
        assert v.trace[-1][1] == 1
        assert v.witness == {"row": 1, "col": 1}

    def test_growing_rows_diverge(self):
        v = check_condition(ConditionId.C11, row_index_matrix(), SMALL)
        assert v.status is Verdict.DIVERGENCE

    def test_column_limits_of_identity(self):
        v = check_condition(ConditionId.C12, identity_matrix(), SCHED)
        assert v.status is Verdict.HOLDS
        assert all(s == 0 for _, s in v.trace)
        assert set(v.limit_estimates) == set(range(1, 17))
        assert all(est == 0 for est in v.limit_estimates.values())
        assert check_condition(ConditionId.C12, identity_matrix(), SCHED,
                               zero_limit=True).status is Verdict.HOLDS

    def test_difference_matrix_battery(self):
        D = difference_matrix()
        v14 = check_condition(ConditionId.C14, D, SMALL)
        assert v14.status is Verdict.HOLDS
        assert v14.trace[-1][1] == 1
        assert check_condition(ConditionId.C15, D, SMALL).status is Verdict.HOLDS
        v16 = check_condition(ConditionId.C16, D, SMALL)
        assert v16.status is Verdict.HOLDS  # column sums are exactly zero

    def test_prefix_sums_of_ones_diverge(self):
        v = check_condition(ConditionId.C14, lower_ones(), SMALL)
        assert v.status is Verdict.DIVERGENCE
        assert v.witness == {"col": 1}

    def test_row_tails(self):
        assert check_condition(ConditionId.C21, identity_matrix(),
                               SMALL).status is Verdict.HOLDS
        # triangular rows have finite support, so their tails vanish too
        assert check_condition(ConditionId.C21, lower_ones(),
                               SMALL).status is Verdict.HOLDS
        # a full quadrant of ones keeps a unit tail: no growth, no decay
        full = TriangleOperator(lambda n, k: Fraction(1),
                                kind=TriangleKind.ROW_EVALUABLE, row_support=None)
        assert check_condition(ConditionId.C21, full,
                               SMALL).status is Verdict.INCONCLUSIVE

    def test_subset_sums_of_summable_grid(self):
        v = check_condition(ConditionId.C20, geometric_grid(), SMALL)
        assert v.status is Verdict.HOLDS
        assert float(v.trace[-1][1]) <= 1.0
        assert v.aux["lower_growth_window_at"] is None
        assert check_condition(ConditionId.C22, geometric_grid(),
                               SMALL).status is Verdict.HOLDS

    def test_subset_sums_of_ones_diverge(self):
        v = check_condition(ConditionId.C20, lower_ones(), SMALL)
        assert v.status is Verdict.DIVERGENCE
        lower = [e["value"] for e in v.aux["lower_bound_trace"]]
        assert lower[-1] > lower[0]
        assert v.witness["method"] in ("greedy", "exhaustive-12")

    def test_identity_difference_conditions_diverge(self):
        # alternating column subsets pick out one +1 per row, so the subset
        # sums of the identity's column differences grow with the truncation
        # (the identity maps neither bs nor cs into l1)
        for cid in (ConditionId.C22, ConditionId.C23):
            v = check_condition(cid, identity_matrix(), SMALL)
            assert v.status is Verdict.DIVERGENCE
            assert v.aux["lower_growth_window_at"] is not None

    def test_lower_bound_never_exceeds_the_upper(self):
        for matrix in (identity_matrix(), cesaro_matrix(), geometric_grid()):
            for cid in (ConditionId.C20, ConditionId.C22, ConditionId.C23):
                v = check_condition(cid, matrix, SMALL)
                uppers = [float(s) for _, s in v.trace]
                lowers = [e["value"] for e in v.aux["lower_bound_trace"]]
                for lo, hi in zip(lowers, uppers):
                    assert lo <= hi + 1e-9


class TestCharacterize:
    def test_identity_maps_l1_to_l1(self):
        rep = characterize(identity_matrix(), "l1", "l1", sched=SCHED)
        assert rep.table == 1 and rep.transform is TransformTag.NONE
        assert rep.overall is Verdict.HOLDS
        (cid, zl, verdict), = rep.conditions
        assert cid is ConditionId.C13 and not zl
        assert verdict.trace[-1][1] == 1
        assert rep.beta_prerequisite is None

    def test_cesaro_maps_l1_to_linf(self):
        rep = characterize(cesaro_matrix(), "l1", "linf", sched=SCHED)
        assert rep.overall is Verdict.HOLDS
        assert rep.conditions[0][2].trace[-1][1] == 1

    def test_growing_rows_fail(self):
        rep = characterize(row_index_matrix(), "l1", "linf", sched=SMALL)
        assert rep.overall is Verdict.DIVERGENCE

    def test_identity_out_of_int_bv(self):
        rep = characterize(identity_matrix(), "int-bv", "linf", WP_ONES, SMALL)
        assert rep.table == 3
        assert rep.transform is TransformTag.REDUCE_SOURCE_INT_BV
        assert rep.overall is Verdict.HOLDS
        assert rep.beta_prerequisite is not None
        assert rep.beta_prerequisite.status is Verdict.HOLDS
        assert rep.beta_prerequisite.aux["rows_checked"] == 32

    def test_conditions_match_direct_checks(self):
        rep = characterize(cesaro_matrix(), "int-bv", "c", WP_ONES, SMALL)
        reduced = reduce_source_int_bv(cesaro_matrix(), WP_ONES)
        for cid, zl, verdict in rep.conditions:
            direct = check_condition(cid, reduced, SMALL, zero_limit=zl)
            assert verdict.status is direct.status
            assert verdict.trace == direct.trace

    def test_verdict_survives_a_deeper_schedule(self):
        for sched in (SMALL, SMALL.doubled()):
            rep = characterize(identity_matrix(), "int-bv", "linf", WP_ONES, sched,
                               beta_row_limit=8)
            assert rep.overall is Verdict.HOLDS

    def test_domain_endpoints_need_weights(self):
        with pytest.raises(UnsupportedClassError):
            characterize(identity_matrix(), "int-bv", "linf", None, SMALL)

    def test_uncovered_pair(self):
        with pytest.raises(UnsupportedClassError):
            characterize(identity_matrix(), "linf", "c", sched=SMALL)

    def test_explicit_table_must_cover_the_pair(self):
        with pytest.raises(UnsupportedClassError):
            characterize(identity_matrix(), "l1", "c", sched=SMALL, table=2)

    def test_report_document_shape(self):
        rep = characterize(identity_matrix(), "int-bv", "c0", WP_ONES, SMALL,
                           beta_row_limit=4)
        doc = rep.to_dict()
        assert doc["source"] == "int-bv" and doc["target"] == "c0"
        assert doc["table"] == 3
        assert doc["transform"] == "reduce-source-int-bv"
        assert doc["conditions"][0]["condition"] == "C11"
        assert doc["conditions"][1]["zero_limit"] is True
        assert "beta_prerequisite" in doc
        assert doc["overall_status"] in ("HOLDS_AT_TRUNCATION",
                                         "DIVERGENCE_EVIDENCE", "INCONCLUSIVE")


class TestCompositeTargets:
    def test_cesaro_bounded_domain(self):
        target = CompositeTarget("cesaro")
        rep = characterize(identity_matrix(), "int-bv", target, WP_ONES, SMALL,
                           beta_row_limit=6)
        assert rep.target == "cesaro-bounded"
        assert rep.table == 3
        assert rep.overall is Verdict.HOLDS
        assert any("composite" in note for note in rep.notes)

    def test_taylor_generator_needs_a_row_bound(self):
        target = CompositeTarget("taylor", Fraction(1, 2))
        with pytest.raises(UnsupportedRowError):
            characterize(identity_matrix(), "int-bv", target, WP_ONES, SMALL)
        rep = characterize(identity_matrix(), "int-bv", target, WP_ONES,
                           TruncationSchedule(sizes=(8, 16, 32)),
                           row_bound=64, beta_row_limit=3)
        assert rep.overall is Verdict.HOLDS
        assert any("truncated at 64" in note for note in rep.notes)

    def test_composite_needs_domain_source(self):
        with pytest.raises(UnsupportedClassError):
            characterize(identity_matrix(), "l1", CompositeTarget("cesaro"),
                         WP_ONES, SMALL)

    def test_composite_rejects_foreign_tables(self):
        with pytest.raises(UnsupportedClassError):
            characterize(identity_matrix(), "int-bv", CompositeTarget("cesaro"),
                         WP_ONES, SMALL, table=5)


class TestReductionRoundtrip:
    def test_identity_factor(self):
        rng = random.Random(91)
        y = random_sequence(rng, 24)
        for n in (1, 4, 19):
            lhs, rhs = verify_reduction_roundtrip(identity_matrix(), WP_ONES, y, n)
            assert lhs == rhs == y.at(n)

    @pytest.mark.parametrize("seed", [93, 94])
    def test_random_row_finite_factor(self, seed):
        rng = random.Random(seed)
        wp = random_weight_pair(rng)
        y = random_sequence(rng, 64)
        B = euler_matrix(Fraction(1, 3))
        for n in (1, 5, 17, 33):
            lhs, rhs = verify_reduction_roundtrip(B, wp, y, n)
            assert lhs == rhs

    def test_zero_sequence(self):
        assert verify_reduction_roundtrip(cesaro_matrix(), WP_ONES,
                                          zeros(), 9) == (0, 0)

    def test_rebuilt_entries_match_the_product(self):
        # the column-wise rebuild used by the roundtrip is the product B T
        rng = random.Random(95)
        wp = random_weight_pair(rng)
        B = euler_matrix(Fraction(1, 3))
        P = matrix_product(B, integrated_triangle(wp))
        for n in (2, 7, 10):
            J = B.row_support(n)
            suffix = [Fraction(0)] * (J + 2)
            for k in range(J, 0, -1):
                suffix[k] = suffix[k + 1] + wp.u_at(k) * B.entry(n, k)
            for k in range(1, J + 1):
                a_nk = (k * wp.w_forward_diff(k) * suffix[k + 1]
                        + k * wp.u_at(k) * wp.w_at(k) * B.entry(n, k))
                assert a_nk == P.entry(n, k)

    def test_needs_row_finite_matrix(self):
        with pytest.raises(UnsupportedRowError):
            verify_reduction_roundtrip(taylor_matrix(Fraction(1, 2)), WP_ONES,
                                       ones(), 3)
