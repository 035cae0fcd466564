"""Tests for the textual spec notation used by the command line."""

from fractions import Fraction

import pytest

from sumkit.core import TruncationSchedule
from sumkit.errors import SpecParseError
from sumkit.minilang import (
    compile_arithmetic,
    parse_matrix_spec,
    parse_schedule_spec,
    parse_sequence_spec,
    parse_weight_spec,
)
from sumkit.operators import TriangleKind


def ev(src, **env):
    return compile_arithmetic(src, variables=tuple(env))(
        **{k: Fraction(v) for k, v in env.items()})


class TestExpressions:
    @pytest.mark.parametrize("src,n,want", [
        ("n^2", 5, 25),
        ("1/(n+1)", 3, Fraction(1, 4)),
        ("2+3*n", 2, 8),
        ("(2+3)*n", 2, 10),
        ("-n^2", 3, -9),
        ("2^-3", 1, Fraction(1, 8)),
        ("n^-1", 4, Fraction(1, 4)),
        ("1.5*n", 2, 3),
        ("n - n", 9, 0),
    ], ids=lambda v: repr(v))
    def test_evaluation(self, src, n, want):
        assert ev(src, n=n) == want

    def test_two_variables(self):
        assert ev("n*k+1", n=2, k=3) == 7

    def test_unknown_names_are_listed(self):
        with pytest.raises(SpecParseError, match="allowed: n"):
            ev("q+1", n=1)

    @pytest.mark.parametrize("src", ["n n", "(n", "n^k", "n^(2)", "$", ""])
    def test_malformed(self, src):
        with pytest.raises(SpecParseError):
            ev(src, n=1)


class TestSequenceSpecs:
    def test_presets(self):
        seq, canon = parse_sequence_spec("e3")
        assert canon == "e3"
        assert seq.prefix(4) == [0, 0, 1, 0]
        assert parse_sequence_spec("ones")[0].at(9) == 1
        assert parse_sequence_spec("harmonic")[0].at(4) == Fraction(1, 4)
        assert parse_sequence_spec("alternating")[0].at(1) == -1
        assert parse_sequence_spec("power:2")[0].at(4) == 16
        assert parse_sequence_spec("geometric:1/3")[0].at(2) == Fraction(1, 9)

    def test_expression_sequences(self):
        seq, canon = parse_sequence_spec("expr: n/(n + 1)")
        assert canon == "expr:n/(n+1)"
        assert seq.at(3) == Fraction(3, 4)

    def test_explicit_lists_have_zero_tails(self):
        seq, canon = parse_sequence_spec("1, 2, 3")
        assert canon == "1,2,3"
        assert seq.at(2) == 2
        assert seq.at(5) == 0
        assert seq.support == 3

    def test_tail_directive(self):
        seq, canon = parse_sequence_spec("1,2;tail=n")
        assert canon == "1,2;tail=n"
        assert seq.at(2) == 2
        assert seq.at(10) == 10

    @pytest.mark.parametrize("bad", ["e0", "power:x", "1,2;cap=3", "", "1,x"])
    def test_malformed(self, bad):
        with pytest.raises(SpecParseError):
            parse_sequence_spec(bad)

    @pytest.mark.parametrize("spec", [
        "e2", "ones", "harmonic", "power:-2", "geometric:2/7",
        "expr:n^2-1", "1,2,3", "1/2,-3;tail=1/n",
    ])
    def test_canonical_form_round_trips(self, spec):
        seq, canon = parse_sequence_spec(spec)
        again, canon2 = parse_sequence_spec(canon)
        assert canon2 == canon
        assert again.prefix(8) == seq.prefix(8)


class TestWeightSpecs:
    def test_explicit_lists_repeat_the_last_term(self):
        w, canon = parse_weight_spec("2,3")
        assert canon == "2,3"
        assert w.at(2) == 3
        assert w.at(7) == 3

    def test_tail_directive_overrides(self):
        w, _ = parse_weight_spec("2,3;tail=n")
        assert w.at(5) == 5

    def test_presets_shared_with_sequences(self):
        w, canon = parse_weight_spec("harmonic")
        assert canon == "harmonic"
        assert w.at(6) == Fraction(1, 6)

    def test_round_trip(self):
        for spec in ("ones", "5", "1,1/2,1/3", "expr:1/n"):
            w, canon = parse_weight_spec(spec)
            again, canon2 = parse_weight_spec(canon)
            assert canon2 == canon
            assert again.prefix(6) == w.prefix(6)


class TestMatrixSpecs:
    def test_named_matrices(self):
        assert parse_matrix_spec("identity").operator.entry(2, 2) == 1
        assert parse_matrix_spec("cesaro").operator.entry(3, 1) == Fraction(1, 3)
        assert parse_matrix_spec("difference").operator.entry(3, 2) == -1

    def test_euler(self):
        spec = parse_matrix_spec("euler:1/2")
        assert spec.canonical == "euler:1/2"
        assert sum(spec.operator.row(4, 4)) == 1

    def test_taylor_comes_with_a_warning(self):
        spec = parse_matrix_spec("taylor:1/2")
        assert spec.operator.kind is TriangleKind.ROW_EVALUABLE
        assert any("infinite" in note for note in spec.notes)

    def test_riesz_embeds_a_weight_spec(self):
        spec = parse_matrix_spec("riesz:ones")
        assert spec.canonical == "riesz:ones"
        assert spec.operator.entry(3, 2) == Fraction(1, 3)

    def test_expression_matrices_are_masked_by_default(self):
        spec = parse_matrix_spec("expr:n*k")
        assert spec.operator.kind is TriangleKind.STRICT_TRIANGLE
        assert spec.operator.entry(3, 2) == 6
        assert spec.operator.entry(2, 3) == 0
        full = parse_matrix_spec("expr:n*k", full=True)
        assert full.operator.kind is TriangleKind.ROW_EVALUABLE
        assert full.operator.entry(2, 3) == 6
        assert any("full rows" in note for note in full.notes)

    def test_csv_matrices(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1,0\n-1/2,1/3\n")
        spec = parse_matrix_spec(f"csv:{path}")
        A = spec.operator
        assert A.entry(1, 1) == 1
        assert A.entry(2, 1) == Fraction(-1, 2)
        assert A.entry(2, 2) == Fraction(1, 3)
        assert A.entry(3, 1) == 0  # beyond the explicit rows
        assert any("2 explicit rows" in note for note in spec.notes)

    def test_csv_errors(self, tmp_path):
        with pytest.raises(SpecParseError):
            parse_matrix_spec(f"csv:{tmp_path / 'missing.csv'}")
        empty = tmp_path / "empty.csv"
        empty.write_text("\n")
        with pytest.raises(SpecParseError):
            parse_matrix_spec(f"csv:{empty}")
        bad = tmp_path / "bad.csv"
        bad.write_text("1,x\n")
        with pytest.raises(SpecParseError):
            parse_matrix_spec(f"csv:{bad}")

    def test_unknown_matrix(self):
        with pytest.raises(SpecParseError):
            parse_matrix_spec("hilbert")


def test_schedule_spec():
    assert parse_schedule_spec("8,16,32") == TruncationSchedule(sizes=(8, 16, 32))
    assert parse_schedule_spec("16,32,64;tol=1e-6").stabilization_tol == 1e-6
