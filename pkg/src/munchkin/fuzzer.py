"""Deterministic coverage-guided mutational fuzzer.

Single-threaded by contract: results depend only on (program, seeds,
config). Seeds run first, then each iteration picks a corpus entry
round-robin, stacks 1..havoc_stacking integer-level mutations, executes,
and admits the mutant iff it sets an edge bit unseen so far. Budgets are
execution counts, not wall-clock, so campaigns replay exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .ir import INT32_MAX, INT32_MIN, Program, wrap32
from .executor import (
    CoverageMap,
    EMPTY_COVERAGE,
    DEFAULT_STEP_LIMIT,
    InputVector,
    Outcome,
    RunResult,
    merge_coverage,
    run_concrete,
)


def _interesting_values() -> tuple[int, ...]:
    values = {0, 1, -1, INT32_MIN, INT32_MAX}
    for k in range(1, 31):
        values.add((1 << k) - 1)
        values.add((1 << k) + 1)
    return tuple(sorted(values))


INTERESTING = _interesting_values()
MAX_INPUT_LENGTH = 64


@dataclass(frozen=True)
class FuzzConfig:
    rng_seed: int = 0
    budget: int = 1000
    step_limit: int = DEFAULT_STEP_LIMIT
    havoc_stacking: int = 4


@dataclass(frozen=True)
class CorpusEntry:
    values: InputVector
    coverage: CoverageMap
    discovery_iteration: int


@dataclass
class FuzzResult:
    corpus: list[CorpusEntry]
    cumulative: CoverageMap
    executions: int
    faults: list[tuple[InputVector, Outcome]]
    # First input observed entering each function; keeps a concrete witness
    # even when edge-hash collisions block corpus admission.
    function_witnesses: dict[str, InputVector] = field(default_factory=dict)


def _op_bitflip(values: list[int], rng: random.Random) -> None:
    if not values:
        return
    idx = rng.randrange(len(values))
    bit = rng.randrange(32)
    values[idx] = wrap32((values[idx] & 0xFFFFFFFF) ^ (1 << bit))


def _op_delta(values: list[int], rng: random.Random) -> None:
    if not values:
        return
    idx = rng.randrange(len(values))
    delta = rng.randint(1, 35)
    if rng.random() < 0.5:
        delta = -delta
    values[idx] = wrap32(values[idx] + delta)


def _op_interesting(values: list[int], rng: random.Random) -> None:
    if not values:
        return
    values[rng.randrange(len(values))] = rng.choice(INTERESTING)


def _op_duplicate(values: list[int], rng: random.Random) -> None:
    if not values or len(values) >= MAX_INPUT_LENGTH:
        return
    idx = rng.randrange(len(values))
    values.insert(idx + 1, values[idx])


def _op_insert(values: list[int], rng: random.Random) -> None:
    if len(values) >= MAX_INPUT_LENGTH:
        return
    values.insert(rng.randrange(len(values) + 1), rng.randint(INT32_MIN, INT32_MAX))


def _op_delete(values: list[int], rng: random.Random) -> None:
    if not values:
        return
    del values[rng.randrange(len(values))]


MUTATION_OPS = (
    ("bitflip", _op_bitflip),
    ("delta", _op_delta),
    ("interesting", _op_interesting),
    ("duplicate", _op_duplicate),
    ("insert", _op_insert),
    ("delete", _op_delete),
)


def mutate(
    values: InputVector,
    rng: random.Random,
    stacking: int = 4,
    trace: list[str] | None = None,
) -> InputVector:
    """Apply 1..stacking stacked mutations; ``trace`` collects op names."""
    out = list(values)
    for _ in range(rng.randint(1, max(1, stacking))):
        name, op = MUTATION_OPS[rng.randrange(len(MUTATION_OPS))]
        op(out, rng)
        if trace is not None:
            trace.append(name)
    return tuple(out)


def fuzz_campaign(
    program: Program, seeds: list[InputVector], config: FuzzConfig
) -> FuzzResult:
    """Run a coverage-guided campaign; fully deterministic per config."""
    if config.budget < 0:
        raise ValueError("budget must be >= 0")
    rng = random.Random(config.rng_seed)
    seed_list = [tuple(s) for s in seeds] or [(0,)]

    corpus: list[CorpusEntry] = []
    cumulative = EMPTY_COVERAGE
    faults: list[tuple[InputVector, Outcome]] = []
    witnesses: dict[str, InputVector] = {}
    executions = 0

    def execute(values: InputVector, iteration: int) -> RunResult:
        nonlocal cumulative, executions
        result = run_concrete(program, values, config.step_limit)
        executions += 1
        for fn in sorted(result.coverage.functions - cumulative.functions):
            witnesses[fn] = values
        if result.outcome is not Outcome.COMPLETED:
            faults.append((values, result.outcome))
        if result.coverage.edge_bits - cumulative.edge_bits:
            corpus.append(CorpusEntry(values, result.coverage, iteration))
        cumulative = merge_coverage(cumulative, result.coverage)
        return result

    iteration = 0
    for seed in seed_list:
        execute(seed, iteration)
        iteration += 1

    # The first seed always enters the corpus: the virtual start edge sets a
    # bit and the cumulative map begins empty.
    for round_num in range(config.budget):
        parent = corpus[round_num % len(corpus)]
        mutant = mutate(parent.values, rng, config.havoc_stacking)
        execute(mutant, iteration)
        iteration += 1

    return FuzzResult(corpus, cumulative, executions, faults, witnesses)
