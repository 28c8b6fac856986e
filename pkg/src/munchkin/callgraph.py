"""Static call graph, function depths, and interprocedural block distances.

Function depth is the minimum number of call edges from the entry function,
via BFS over the static call graph. Distance fields support the directed
("sonar") search strategy: for a target function they give every
(function, block) location its shortest hop count to the target's entry
block over the interprocedural block graph, whose edges are intra-function
CFG edges, call edges from call-site blocks to callee entries, and return
edges from callee exit blocks back to the call-site block.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from .ir import Branch, Call, Function, Jump, Program, Return


@dataclass(frozen=True)
class CallGraph:
    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]
    depths: dict[str, int] = field(default_factory=dict)

    def depth(self, name: str) -> int | None:
        """Call depth of a function, or None when unreachable from entry."""
        return self.depths.get(name)

    def reachable(self) -> frozenset[str]:
        return frozenset(self.depths)

    def depth_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for depth in self.depths.values():
            hist[depth] = hist.get(depth, 0) + 1
        return dict(sorted(hist.items()))


def build_callgraph(program: Program) -> CallGraph:
    """Collect static call edges and BFS depths from the entry function."""
    edges: set[tuple[str, str]] = set()
    callees: dict[str, set[str]] = {name: set() for name in program.functions}
    for fname, func in program.functions.items():
        for block in func.blocks.values():
            for instr in block.instructions:
                if isinstance(instr, Call):
                    edges.add((fname, instr.callee))
                    callees[fname].add(instr.callee)

    depths = {program.entry: 0}
    queue = [program.entry]
    while queue:
        fname = queue.pop(0)
        for callee in sorted(callees[fname]):
            if callee not in depths:
                depths[callee] = depths[fname] + 1
                queue.append(callee)

    return CallGraph(frozenset(program.functions), frozenset(edges), depths)


@dataclass(frozen=True)
class DistanceField:
    """Shortest hop counts from every block location to one target entry."""

    target: str
    dist: dict[tuple[str, str], int]

    def at(self, function: str, block: str) -> int | None:
        """Distance from a location, or None when the target is unreachable."""
        return self.dist.get((function, block))


def _exit_blocks(func: Function) -> list[str]:
    return [bid for bid, block in func.blocks.items() if isinstance(block.terminator, Return)]


def interprocedural_edges(program: Program) -> set[tuple[tuple[str, str], tuple[str, str]]]:
    """Forward edges of the interprocedural block graph, all weight 1."""
    edges: set[tuple[tuple[str, str], tuple[str, str]]] = set()
    for fname, func in program.functions.items():
        for bid, block in func.blocks.items():
            src = (fname, bid)
            term = block.terminator
            if isinstance(term, Branch):
                edges.add((src, (fname, term.then_block)))
                edges.add((src, (fname, term.else_block)))
            elif isinstance(term, Jump):
                edges.add((src, (fname, term.target)))
            for instr in block.instructions:
                if isinstance(instr, Call):
                    callee = program.functions[instr.callee]
                    edges.add((src, (instr.callee, callee.entry_block)))
                    for exit_bid in _exit_blocks(callee):
                        edges.add(((instr.callee, exit_bid), src))
    return edges


def sonar_distances(program: Program, target: str) -> DistanceField:
    """Backward BFS from the target's entry over the interprocedural graph."""
    func = program.functions.get(target)
    if func is None:
        raise ValueError(f"unknown target '{target}'")

    reverse: dict[tuple[str, str], list[tuple[str, str]]] = {}
    for src, dst in interprocedural_edges(program):
        reverse.setdefault(dst, []).append(src)

    start = (target, func.entry_block)
    dist = {start: 0}
    queue = [start]
    while queue:
        loc = queue.pop(0)
        for pred in sorted(reverse.get(loc, ())):
            if pred not in dist:
                dist[pred] = dist[loc] + 1
                queue.append(pred)
    return DistanceField(target, dist)


class DistanceCache:
    """Per-program cache of distance fields, one per target.

    Safe for concurrent readers with exclusive insertion; recomputing a
    field twice under a race is harmless because the result is
    deterministic.
    """

    def __init__(self, program: Program):
        self.program = program
        self._fields: dict[str, DistanceField] = {}
        self._lock = threading.Lock()

    def get(self, target: str) -> DistanceField:
        with self._lock:
            cached = self._fields.get(target)
        if cached is not None:
            return cached
        computed = sonar_distances(self.program, target)
        with self._lock:
            return self._fields.setdefault(target, computed)


def frontier_set(cg: CallGraph, covered: set[str] | frozenset[str]) -> list[str]:
    """Uncovered functions, cheapest targets first.

    Frontier functions (uncovered with at least one covered caller) come
    first, ordered by ascending depth then name; the remaining uncovered
    functions follow in the same order. The result is a permutation of the
    uncovered set.
    """
    if not covered <= cg.nodes:
        raise ValueError("covered set contains unknown functions")
    uncovered = cg.nodes - covered
    has_covered_caller = {
        callee for caller, callee in cg.edges if caller in covered and callee in uncovered
    }

    def key(name: str) -> tuple[int, int, int, str]:
        depth = cg.depth(name)
        return (
            0 if name in has_covered_caller else 1,
            1 if depth is None else 0,
            depth if depth is not None else 0,
            name,
        )

    return sorted(uncovered, key=key)


def to_dot(cg: CallGraph) -> str:
    """Graphviz digraph text for the call graph."""
    lines = ["digraph callgraph {"]
    for name in sorted(cg.nodes):
        lines.append(f'  "{name}";')
    for caller, callee in sorted(cg.edges):
        lines.append(f'  "{caller}" -> "{callee}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def depths_tsv(cg: CallGraph) -> str:
    """TSV listing ``function<TAB>depth``, unreachable functions last."""
    def key(name: str) -> tuple[int, int, str]:
        depth = cg.depth(name)
        return (1 if depth is None else 0, depth if depth is not None else 0, name)

    lines = []
    for name in sorted(cg.nodes, key=key):
        depth = cg.depth(name)
        lines.append(f"{name}\t{'unreachable' if depth is None else depth}")
    return "\n".join(lines) + "\n"
