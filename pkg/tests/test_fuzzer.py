"""Coverage-guided fuzzer: determinism, admission, mutation operators."""

import random

import pytest

from munchkin.callgraph import build_callgraph
from munchkin.executor import EMPTY_COVERAGE, Outcome, merge_coverage, run_concrete
from munchkin.fuzzer import (
    FuzzConfig,
    INTERESTING,
    MUTATION_OPS,
    fuzz_campaign,
    mutate,
)
from munchkin.generator import GenParams, generate_program, ground_truth_coverage
from munchkin.ir import INT32_MAX, INT32_MIN, parse_program

DIV_TEXT = """\
program p

func main()
block entry:
  x = input
  y = 100 / x
  print y
  ret
"""


class TestCampaign:
    def test_zero_budget_runs_only_the_seeds(self):
        params = GenParams(2, 3)
        program = generate_program(params)
        result = fuzz_campaign(program, [(5,)], FuzzConfig(budget=0))
        assert result.cumulative.functions == ground_truth_coverage(params)[5]
        assert result.executions == 1

    def test_determinism(self):
        program = generate_program(GenParams(3, 2))
        cfg = FuzzConfig(rng_seed=11, budget=300)
        first = fuzz_campaign(program, [(0,)], cfg)
        second = fuzz_campaign(program, [(0,)], cfg)
        assert first.cumulative == second.cumulative
        assert [e.values for e in first.corpus] == [e.values for e in second.corpus]
        assert first.faults == second.faults

    def test_small_tree_fully_covered_within_budget(self):
        program = generate_program(GenParams(2, 1))
        result = fuzz_campaign(program, [(0,)], FuzzConfig(rng_seed=0, budget=10_000))
        assert result.cumulative.functions == build_callgraph(program).reachable()

    def test_empty_seed_list_falls_back_to_zero(self):
        program = generate_program(GenParams(2, 1))
        result = fuzz_campaign(program, [], FuzzConfig(budget=0))
        assert result.executions == 1
        assert result.corpus[0].values == (0,)

    def test_corpus_admission_is_sound(self):
        # Replaying entries in order: each must set a bit unseen so far.
        program = generate_program(GenParams(2, 2))
        result = fuzz_campaign(program, [(0,)], FuzzConfig(rng_seed=3, budget=400))
        seen = EMPTY_COVERAGE
        for entry in result.corpus:
            replay = run_concrete(program, entry.values)
            assert replay.coverage.edge_bits - seen.edge_bits
            seen = merge_coverage(seen, replay.coverage)

    def test_cumulative_contains_every_corpus_entry(self):
        program = generate_program(GenParams(3, 2))
        result = fuzz_campaign(program, [(0,)], FuzzConfig(rng_seed=5, budget=200))
        for entry in result.corpus:
            assert entry.coverage.functions <= result.cumulative.functions
            assert entry.coverage.edge_bits <= result.cumulative.edge_bits

    def test_faults_are_collected(self):
        program = parse_program(DIV_TEXT)
        result = fuzz_campaign(program, [(7,)], FuzzConfig(rng_seed=1, budget=500))
        assert any(outcome is Outcome.ARITHMETIC_FAULT for _, outcome in result.faults)

    def test_function_witnesses_replay_to_their_function(self):
        program = generate_program(GenParams(2, 2))
        result = fuzz_campaign(program, [(0,)], FuzzConfig(rng_seed=2, budget=300))
        for function, values in result.function_witnesses.items():
            assert function in run_concrete(program, values).coverage.functions

    def test_negative_budget_rejected(self):
        program = generate_program(GenParams(2, 1))
        with pytest.raises(ValueError):
            fuzz_campaign(program, [(0,)], FuzzConfig(budget=-1))


class _ScriptedRng:
    """Duck-typed rng returning scripted values for operator unit tests."""

    def __init__(self, randranges=(), randints=(), randoms=(), choices=()):
        self._randrange = list(randranges)
        self._randint = list(randints)
        self._random = list(randoms)
        self._choice = list(choices)

    def randrange(self, *_):
        return self._randrange.pop(0)

    def randint(self, *_):
        return self._randint.pop(0)

    def random(self):
        return self._random.pop(0)

    def choice(self, seq):
        return self._choice.pop(0)


class TestMutationOperators:
    def _op(self, name):
        return dict(MUTATION_OPS)[name]

    def test_delete_on_empty_is_noop(self):
        values = []
        self._op("delete")(values, random.Random(0))
        assert values == []

    def test_delta_adds_small_offset(self):
        values = [5]
        self._op("delta")(values, _ScriptedRng(randranges=[0], randints=[3], randoms=[0.9]))
        assert values == [8]

    def test_interesting_replaces_with_table_value(self):
        values = [5]
        self._op("interesting")(values, _ScriptedRng(randranges=[0], choices=[INT32_MAX]))
        assert values == [INT32_MAX]

    def test_duplicate_and_delete_change_length(self):
        values = [1, 2]
        self._op("duplicate")(values, _ScriptedRng(randranges=[0]))
        assert values == [1, 1, 2]
        self._op("delete")(values, _ScriptedRng(randranges=[1]))
        assert values == [1, 2]

    def test_results_stay_in_int32_range(self):
        rng = random.Random(99)
        values = (INT32_MAX, INT32_MIN, 0)
        for _ in range(2000):
            values = mutate(values, rng)
            assert all(INT32_MIN <= v <= INT32_MAX for v in values)

    def test_interesting_table_contents(self):
        assert {0, 1, -1, INT32_MIN, INT32_MAX} <= set(INTERESTING)
        assert (1 << 10) - 1 in INTERESTING and (1 << 10) + 1 in INTERESTING

    def test_every_operator_class_appears_in_a_large_sample(self):
        rng = random.Random(42)
        seen: list[str] = []
        for _ in range(100_000):
            mutate((0,), rng, trace=seen)
        assert set(seen) == {name for name, _ in MUTATION_OPS}
