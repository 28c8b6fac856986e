"""Concrete interpreter, coverage maps, test-case files."""

import random

import pytest

from munchkin.executor import (
    CoverageMap,
    EMPTY_COVERAGE,
    Outcome,
    edge_index,
    merge_coverage,
    read_input_file,
    read_seed_dir,
    run_concrete,
    write_input_file,
)
from munchkin.generator import GenParams, generate_program, ground_truth_coverage
from munchkin.ir import parse_program

FAULT_TEXT = """\
program p

func main()
block entry:
  x = const 1
  y = x / 0
  print y
  ret
"""

LOOP_TEXT = """\
program p

func main()
block entry:
  jmp entry
"""

RETVAL_TEXT = """\
program p

func main()
block entry:
  a = call double(21)
  print a
  ret

func double(x)
block entry:
  y = x * 2
  ret y
"""


class TestRunConcrete:
    def test_input_five_matches_oracle(self):
        params = GenParams(2, 3)
        program = generate_program(params)
        result = run_concrete(program, (5,))
        assert result.coverage.functions == ground_truth_coverage(params)[5]
        assert result.printed == (5,)
        assert result.outcome is Outcome.COMPLETED

    def test_exhausted_input_reads_zero(self):
        params = GenParams(2, 3)
        program = generate_program(params)
        result = run_concrete(program, ())
        assert result.coverage.functions == ground_truth_coverage(params)[0]
        assert result.printed == (0,)

    def test_division_by_zero_faults(self):
        result = run_concrete(parse_program(FAULT_TEXT), ())
        assert result.outcome is Outcome.ARITHMETIC_FAULT
        assert result.printed == ()

    def test_step_limit_on_an_infinite_loop(self):
        result = run_concrete(parse_program(LOOP_TEXT), (), step_limit=50)
        assert result.outcome is Outcome.STEP_LIMIT_EXCEEDED
        assert result.steps == 50

    def test_return_values_flow_back(self):
        result = run_concrete(parse_program(RETVAL_TEXT), ())
        assert result.printed == (42,)

    def test_determinism(self):
        program = generate_program(GenParams(3, 2))
        assert run_concrete(program, (4, 9)) == run_concrete(program, (4, 9))

    def test_prefix_coverage_is_subset(self):
        program = generate_program(GenParams(2, 3))
        full = run_concrete(program, (6,))
        for limit in range(1, full.steps + 1):
            partial = run_concrete(program, (6,), step_limit=limit)
            assert partial.coverage.functions <= full.coverage.functions
            assert partial.coverage.edge_bits <= full.coverage.edge_bits

    def test_input_values_are_wrapped_to_int32(self):
        params = GenParams(2, 2)
        program = generate_program(params)
        wrapped = run_concrete(program, (1 << 32,))  # wraps to 0
        assert wrapped.coverage.functions == ground_truth_coverage(params)[0]


class TestCoverageMerge:
    def _random_map(self, rng):
        return CoverageMap(
            frozenset(rng.sample(["main", "a", "b", "c"], rng.randint(1, 4))),
            frozenset(rng.sample(range(100), rng.randint(0, 10))),
        )

    def test_identity_and_idempotence(self):
        rng = random.Random(1)
        cov = self._random_map(rng)
        assert merge_coverage(cov, EMPTY_COVERAGE) == cov
        assert merge_coverage(cov, cov) == cov

    def test_commutative_associative(self):
        rng = random.Random(2)
        a, b, c = (self._random_map(rng) for _ in range(3))
        assert merge_coverage(a, b) == merge_coverage(b, a)
        assert merge_coverage(merge_coverage(a, b), c) == merge_coverage(
            a, merge_coverage(b, c)
        )

    def test_union_of_oracle_runs_covers_everything(self):
        params = GenParams(2, 2)
        program = generate_program(params)
        merged = EMPTY_COVERAGE
        for value in ground_truth_coverage(params):
            merged = merge_coverage(merged, run_concrete(program, (value,)).coverage)
        assert merged.functions == frozenset(program.functions)
        assert len(merged.functions) == 8

    def test_edge_count_is_popcount(self):
        cov = CoverageMap(frozenset(), frozenset({1, 5, 9}))
        assert cov.edge_count == 3


class TestEdgeHash:
    def test_documented_values_are_stable(self):
        # Frozen so bitmaps stay comparable across processes and versions.
        assert edge_index(("", ""), ("main", "entry")) == 8760
        assert edge_index(("main", "entry"), ("f", "entry")) == 16080

    def test_direction_matters(self):
        a = edge_index(("main", "entry"), ("f", "entry"))
        b = edge_index(("f", "entry"), ("main", "entry"))
        assert a != b

    def test_range(self):
        assert 0 <= edge_index(("x", "y"), ("z", "w")) < (1 << 16)


class TestInputFiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "case.txt"
        write_input_file(path, (5, -3, 2**31 - 1))
        assert read_input_file(path) == (5, -3, 2**31 - 1)

    def test_rejects_non_integers(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("5\nhello\n")
        with pytest.raises(ValueError, match="not an integer"):
            read_input_file(path)

    def test_rejects_out_of_range(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text(f"{2**31}\n")
        with pytest.raises(ValueError, match="int32"):
            read_input_file(path)

    def test_seed_dir_sorted_by_name(self, tmp_path):
        write_input_file(tmp_path / "b.txt", (2,))
        write_input_file(tmp_path / "a.txt", (1,))
        assert read_seed_dir(tmp_path) == [(1,), (2,)]
