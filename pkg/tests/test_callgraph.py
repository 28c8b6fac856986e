"""Call-graph depths, sonar distance fields, frontier ordering."""

import pytest

from munchkin.callgraph import (
    DistanceCache,
    build_callgraph,
    depths_tsv,
    frontier_set,
    interprocedural_edges,
    sonar_distances,
    to_dot,
)
from munchkin.generator import GenParams, generate_program
from munchkin.ir import parse_program

UNREACHABLE_TEXT = """\
program p

func main()
block entry:
  call f()
  ret

func f()
block entry:
  ret

func orphan()
block entry:
  ret
"""


class TestDepths:
    def test_chain_depths(self, chain_program):
        cg = build_callgraph(chain_program)
        assert cg.depths == {"main": 0, "f": 1, "g": 2}
        assert cg.edges == {("main", "f"), ("f", "g")}

    def test_generated_histogram(self):
        cg = build_callgraph(generate_program(GenParams(2, 3)))
        assert cg.depth_histogram() == {0: 1, 1: 1, 2: 2, 3: 4, 4: 8}
        assert sum(cg.depth_histogram().values()) == 16

    def test_uncalled_function_is_unreachable(self):
        cg = build_callgraph(parse_program(UNREACHABLE_TEXT))
        assert cg.depth("orphan") is None
        assert cg.depth("f") == 1
        assert cg.reachable() == {"main", "f"}


class TestSonarDistances:
    def test_target_entry_is_zero(self, chain_program):
        df = sonar_distances(chain_program, "g")
        assert df.at("g", "entry") == 0

    def test_chain_distance_matches_brute_force(self, chain_program):
        # Independent shortest-path check on the hand-built block graph:
        # call edges (main->f, f->g), return edges (f->main, g->f).
        edges = {
            (("main", "entry"), ("f", "entry")),
            (("f", "entry"), ("main", "entry")),
            (("f", "entry"), ("g", "entry")),
            (("g", "entry"), ("f", "entry")),
        }
        want = _brute_force_distance(edges, ("main", "entry"), ("g", "entry"))
        df = sonar_distances(chain_program, "g")
        assert df.at("main", "entry") == want == 2

    def test_unreachable_target(self):
        program = parse_program(UNREACHABLE_TEXT)
        df = sonar_distances(program, "orphan")
        assert df.at("orphan", "entry") == 0
        assert df.at("main", "entry") is None

    def test_unknown_target_rejected(self, chain_program):
        with pytest.raises(ValueError, match="unknown target"):
            sonar_distances(chain_program, "nope")

    def test_triangle_inequality_over_generated_program(self):
        program = generate_program(GenParams(2, 2))
        df = sonar_distances(program, "n_3_3")
        for src, dst in interprocedural_edges(program):
            d_src, d_dst = df.dist.get(src), df.dist.get(dst)
            if d_dst is not None:
                assert d_src is not None and d_src <= 1 + d_dst

    def test_cache_returns_identical_fields(self):
        program = generate_program(GenParams(2, 2))
        cache = DistanceCache(program)
        assert cache.get("n_0_0") is cache.get("n_0_0")


def _brute_force_distance(edges, start, goal):
    frontier = [(start, 0)]
    seen = {start}
    while frontier:
        node, dist = frontier.pop(0)
        if node == goal:
            return dist
        for src, dst in sorted(edges):
            if src == node and dst not in seen:
                seen.add(dst)
                frontier.append((dst, dist + 1))
    return None


class TestFrontier:
    def test_everything_covered_gives_empty_list(self, chain_program):
        cg = build_callgraph(chain_program)
        assert frontier_set(cg, {"main", "f", "g"}) == []

    def test_chain_frontier_orders_f_first(self, chain_program):
        cg = build_callgraph(chain_program)
        assert frontier_set(cg, {"main"}) == ["f", "g"]

    def test_right_subtree_root_comes_first(self):
        program = generate_program(GenParams(2, 2))
        cg = build_callgraph(program)
        covered = {"main", "n_0_3", "n_0_1", "n_0_0", "n_1_1"}
        ordered = frontier_set(cg, covered)
        assert ordered[0] == "n_2_3"  # uncovered with covered caller, depth 2
        assert set(ordered) == {"n_2_3", "n_2_2", "n_3_3"}
        assert ordered == ["n_2_3", "n_2_2", "n_3_3"]

    def test_output_is_permutation_of_uncovered(self):
        program = generate_program(GenParams(3, 2))
        cg = build_callgraph(program)
        covered = {"main", "n_0_8"}
        ordered = frontier_set(cg, covered)
        assert sorted(ordered) == sorted(cg.nodes - covered)

    def test_covered_must_be_subset(self, chain_program):
        cg = build_callgraph(chain_program)
        with pytest.raises(ValueError):
            frontier_set(cg, {"main", "stranger"})


class TestTextOutputs:
    def test_dot_lists_every_edge(self, chain_program):
        dot = to_dot(build_callgraph(chain_program))
        assert '"main" -> "f";' in dot
        assert dot.startswith("digraph")

    def test_depths_tsv_has_one_line_per_function(self):
        program = generate_program(GenParams(2, 3))
        tsv = depths_tsv(build_callgraph(program))
        lines = tsv.strip().splitlines()
        assert len(lines) == 16
        assert lines[0] == "main\t0"
