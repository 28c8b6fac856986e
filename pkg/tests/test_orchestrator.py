"""FS and SF hybrid campaigns and the two baselines."""

import random

import pytest

from munchkin import orchestrator
from munchkin.callgraph import build_callgraph
from munchkin.executor import run_concrete
from munchkin.generator import GenParams, generate_program
from munchkin.orchestrator import (
    HybridConfig,
    TECHNIQUE_FS,
    TECHNIQUE_FUZZ,
    TECHNIQUE_SF,
    TECHNIQUE_SYMEX,
    run_baselines,
    run_fs,
    run_hybrid,
    run_sf,
)
from munchkin.report import campaign_to_dict, coverage_percent
from munchkin.symex import SolverStats, SymexLimits, SymResult


def _fs_config(**overrides):
    base = dict(mode="fs", fuzz_budget=64, per_target_query_budget=64, rng_seed=7)
    base.update(overrides)
    return HybridConfig(**base)


def _sf_config(**overrides):
    base = dict(mode="sf", fuzz_budget=64, symex_limits=SymexLimits(), rng_seed=7)
    base.update(overrides)
    return HybridConfig(**base)


class TestFS:
    def test_full_coverage_on_tree_depth_three(self):
        program = generate_program(GenParams(2, 3))
        report = run_fs(program, _fs_config(fuzz_budget=8))
        cg = build_callgraph(program)
        assert report.coverage.functions == cg.reachable()
        assert report.technique == TECHNIQUE_FS

    def test_no_queries_when_fuzzing_covers_everything(self):
        program = generate_program(GenParams(2, 1))
        report = run_fs(program, _fs_config(fuzz_budget=10_000, rng_seed=0))
        assert report.solver_stats.queries == 0

    def test_fewer_queries_than_pure_symex(self):
        program = generate_program(GenParams(3, 3))
        cfg = _fs_config(fuzz_budget=128)
        fs_report = run_fs(program, cfg)
        _, symex_report = run_baselines(program, cfg)
        assert fs_report.coverage.functions >= symex_report.coverage.functions
        assert fs_report.solver_stats.queries < symex_report.solver_stats.queries

    def test_coverage_contains_the_fuzz_phase(self):
        program = generate_program(GenParams(3, 2))
        cfg = _fs_config(fuzz_budget=40)
        fs_report = run_fs(program, cfg)
        fuzz_report, _ = run_baselines(program, cfg)
        assert fuzz_report.coverage.functions <= fs_report.coverage.functions

    def test_every_covered_function_has_a_replay_witness(self):
        program = generate_program(GenParams(3, 2))
        report = run_fs(program, _fs_config(fuzz_budget=32))
        witnessed = set()
        for values in report.test_suite:
            witnessed |= run_concrete(program, values).coverage.functions
        assert report.coverage.functions <= witnessed

    def test_parallel_mode_matches_sequential_coverage(self):
        program = generate_program(GenParams(3, 2))
        sequential = run_fs(program, _fs_config(fuzz_budget=16))
        parallel = run_fs(program, _fs_config(fuzz_budget=16, parallel=True))
        assert parallel.coverage.functions == sequential.coverage.functions

    def test_mode_and_budget_validation(self):
        program = generate_program(GenParams(2, 1))
        with pytest.raises(ValueError):
            run_fs(program, _sf_config())
        with pytest.raises(ValueError):
            run_fs(program, _fs_config(per_target_query_budget=0))


class TestSF:
    def test_symex_phase_alone_already_full(self):
        program = generate_program(GenParams(2, 2))
        report = run_sf(program, _sf_config(fuzz_budget=0))
        assert report.coverage.functions == build_callgraph(program).reachable()
        assert report.technique == TECHNIQUE_SF

    def test_empty_symex_phase_falls_back_to_zero_seed(self, monkeypatch):
        program = generate_program(GenParams(2, 1))

        def empty_symex(*args, **kwargs):
            from munchkin.executor import EMPTY_COVERAGE

            return SymResult([], EMPTY_COVERAGE, SolverStats(), 0)

        monkeypatch.setattr(orchestrator, "symex_campaign", empty_symex)
        report = run_sf(program, _sf_config(fuzz_budget=32))
        assert report.coverage.functions  # pure fuzzing from [0]
        assert (0,) in report.test_suite

    def test_sf_coverage_superset_of_symex_phase(self):
        rng = random.Random(5)
        for _ in range(8):
            params = GenParams(rng.choice([2, 3]), rng.choice([1, 2, 3]))
            program = generate_program(params)
            limits = SymexLimits(rng.randint(3, 50), rng.randint(3, 50))
            from munchkin.symex import symex_campaign

            phase = symex_campaign(program, limits=limits, rng_seed=3)
            report = run_sf(
                program,
                _sf_config(
                    symex_limits=limits, fuzz_budget=rng.randint(0, 40), rng_seed=3
                ),
            )
            assert phase.coverage.functions <= report.coverage.functions


class TestBaselines:
    def test_four_way_comparison(self):
        program = generate_program(GenParams(2, 3))
        cfg = _fs_config(fuzz_budget=64)
        fuzz_report, symex_report = run_baselines(program, cfg)
        fs_report = run_fs(program, cfg)
        cg = build_callgraph(program)
        fs_pct = coverage_percent(fs_report.coverage, cg)
        assert fs_pct >= coverage_percent(fuzz_report.coverage, cg)
        assert fs_pct >= coverage_percent(symex_report.coverage, cg)
        assert fuzz_report.technique == TECHNIQUE_FUZZ
        assert symex_report.technique == TECHNIQUE_SYMEX

    def test_symex_only_is_complete_on_smallest_tree(self):
        program = generate_program(GenParams(2, 1))
        _, symex_report = run_baselines(program, _fs_config())
        assert coverage_percent(symex_report.coverage, build_callgraph(program)) == 100

    def test_fuzz_baseline_issues_no_queries(self):
        program = generate_program(GenParams(2, 2))
        fuzz_report, _ = run_baselines(program, _fs_config())
        assert fuzz_report.solver_stats.queries == 0


class TestDeterminism:
    @pytest.mark.parametrize("runner, cfg_factory", [
        (run_fs, _fs_config),
        (run_sf, _sf_config),
    ])
    def test_reports_identical_except_duration(self, runner, cfg_factory):
        program = generate_program(GenParams(3, 2))
        dicts = []
        for _ in range(2):
            report = runner(program, cfg_factory(fuzz_budget=48))
            payload = campaign_to_dict(report)
            payload.pop("duration")
            dicts.append(payload)
        assert dicts[0] == dicts[1]

    def test_run_hybrid_dispatch(self):
        program = generate_program(GenParams(2, 1))
        assert run_hybrid(program, _fs_config()).technique == TECHNIQUE_FS
        assert run_hybrid(program, _sf_config()).technique == TECHNIQUE_SF
        with pytest.raises(ValueError):
            run_hybrid(program, HybridConfig(mode="zz"))
