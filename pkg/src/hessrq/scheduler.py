"""Task graphs for the reduction and substitution phases, and their executor.

Reduction graph, per batch of shifts: ReduceDiag on tile column j feeds
every ReduceOffdiag above it; each ReduceOffdiag(i, j) feeds the task at
(i, j-1), which is the next ReduceDiag when j-1 == i.

Substitution graph, per batch: Solve on (j, j) feeds the Updates above it;
every Update into tile row i precedes the solve of tile i; the top-left
solve and the backtransform are merged into a single task.  Updates into
the same tile row are additionally chained right-to-left: they read-modify-
write the same slice, and the chain pins them to the sequential program's
order, which is what makes multi-worker runs bitwise reproducible.

Batches are disconnected components.  A single-worker run executes nodes in
submission (sequential-program) order.
"""

from __future__ import annotations

import heapq
import threading
import time
from dataclasses import dataclass, field

__all__ = [
    "TaskNode",
    "TaskGraph",
    "RunStats",
    "build_reduce_dag",
    "build_solve_dag",
    "execute",
]


@dataclass
class TaskNode:
    kind: str
    coords: tuple  # (tile_i, tile_j, batch)
    seq: int
    run: object = None

    def __repr__(self):
        return f"TaskNode({self.kind}, coords={self.coords})"


class TaskGraph:
    def __init__(self):
        self.nodes = []
        self._succ = []
        self._index = {}

    def add_node(self, kind, coords, run=None):
        if coords in self._index:
            raise ValueError(f"duplicate task coords {coords}")
        node = TaskNode(kind, coords, seq=len(self.nodes), run=run)
        self._index[coords] = node.seq
        self.nodes.append(node)
        self._succ.append([])
        return node

    def add_edge(self, src_coords, dst_coords):
        self._succ[self._index[src_coords]].append(self._index[dst_coords])

    def successors(self, node):
        return [self.nodes[i] for i in self._succ[node.seq]]

    @property
    def edge_count(self):
        return sum(len(s) for s in self._succ)

    def edges(self):
        for i, succs in enumerate(self._succ):
            for j in succs:
                yield self.nodes[i], self.nodes[j]

    def indegrees(self):
        indeg = [0] * len(self.nodes)
        for succs in self._succ:
            for j in succs:
                indeg[j] += 1
        return indeg

    def validate_acyclic(self):
        indeg = self.indegrees()
        stack = [i for i, d in enumerate(indeg) if d == 0]
        seen = 0
        while stack:
            i = stack.pop()
            seen += 1
            for j in self._succ[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    stack.append(j)
        if seen != len(self.nodes):
            raise ValueError("task graph contains a cycle")


class RunStats:
    """Per-task-type wall time and flop accumulators (thread safe)."""

    def __init__(self):
        self.seconds = {}
        self.flops = {}
        self.formula = {}
        self.calls = {}
        self._lock = threading.Lock()

    def add(self, task_type, seconds, flops=0.0, formula=0.0):
        with self._lock:
            self.seconds[task_type] = self.seconds.get(task_type, 0.0) + seconds
            self.flops[task_type] = self.flops.get(task_type, 0.0) + flops
            self.formula[task_type] = self.formula.get(task_type, 0.0) + formula
            self.calls[task_type] = self.calls.get(task_type, 0) + 1

    def timed(self, task_type, fn, flops=0.0, formula=0.0):
        t0 = time.perf_counter()
        result = fn()
        self.add(task_type, time.perf_counter() - t0, flops, formula)
        return result


def build_reduce_dag(grid, n_batches, body_factory=None):
    """Reduction-phase graph; nodes carry (tile_i, tile_j, batch) coords."""
    g = TaskGraph()
    N = grid.N
    for b in range(n_batches):
        for jt in range(N - 1, -1, -1):
            g.add_node(
                "ReduceDiag",
                (jt, jt, b),
                run=None if body_factory is None else body_factory("ReduceDiag", jt, jt, b),
            )
            for i in range(jt - 1, -1, -1):
                kind = "ReduceOffdiagShifted" if i == jt - 1 else "ReduceOffdiagFar"
                g.add_node(
                    kind,
                    (i, jt, b),
                    run=None if body_factory is None else body_factory(kind, i, jt, b),
                )
        for jt in range(N - 1, 0, -1):
            for i in range(jt):
                g.add_edge((jt, jt, b), (i, jt, b))
                g.add_edge((i, jt, b), (i, jt - 1, b))
    return g


def build_solve_dag(grid, n_batches, body_factory=None):
    """Substitution-phase graph; the (0,0) node merges solve and backtransform."""
    g = TaskGraph()
    N = grid.N
    for b in range(n_batches):
        for jt in range(N - 1, 0, -1):
            g.add_node(
                "SolveTile",
                (jt, jt, b),
                run=None if body_factory is None else body_factory("SolveTile", jt, jt, b),
            )
            for i in range(jt - 1, -1, -1):
                kind = "UpdateShifted" if i == jt - 1 else "UpdateFar"
                g.add_node(
                    kind,
                    (i, jt, b),
                    run=None if body_factory is None else body_factory(kind, i, jt, b),
                )
        g.add_node(
            "MergedSolveBacktransform",
            (0, 0, b),
            run=None
            if body_factory is None
            else body_factory("MergedSolveBacktransform", 0, 0, b),
        )
        for jt in range(N - 1, 0, -1):
            for i in range(jt):
                g.add_edge((jt, jt, b), (i, jt, b))
                if jt - 1 > i:
                    g.add_edge((i, jt, b), (i, jt - 1, b))
                else:
                    g.add_edge((i, jt, b), (i, i, b))
    return g


class TaskError(Exception):
    def __init__(self, node, cause):
        super().__init__(f"task {node.kind} at {node.coords} failed: {cause}")
        self.node = node
        self.cause = cause


def execute(graph, workers=1):
    """Run every node once after its predecessors.

    Single-worker execution pops ready nodes in submission order, so it is
    the sequential program and bit-reproducible.  A failing task aborts the
    graph: no further tasks start, and the failure is re-raised with the
    node's coordinates attached.
    """
    graph.validate_acyclic()
    nodes = graph.nodes
    if not nodes:
        return
    indeg = graph.indegrees()
    succ = graph._succ
    ready = [i for i, d in enumerate(indeg) if d == 0]
    heapq.heapify(ready)

    workers = max(1, int(workers))
    if workers == 1:
        while ready:
            i = heapq.heappop(ready)
            node = nodes[i]
            try:
                node.run()
            except Exception as exc:
                raise TaskError(node, exc) from exc
            for j in succ[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    heapq.heappush(ready, j)
        return

    lock = threading.Lock()
    cond = threading.Condition(lock)
    state = {"remaining": len(nodes), "error": None}

    def worker():
        while True:
            with cond:
                while not ready and state["remaining"] > 0 and state["error"] is None:
                    cond.wait()
                if state["error"] is not None or state["remaining"] == 0:
                    cond.notify_all()
                    return
                i = heapq.heappop(ready)
            node = nodes[i]
            try:
                node.run()
            except Exception as exc:
                with cond:
                    if state["error"] is None:
                        state["error"] = TaskError(node, exc)
                    cond.notify_all()
                return
            with cond:
                state["remaining"] -= 1
                for j in succ[i]:
                    indeg[j] -= 1
                    if indeg[j] == 0:
                        heapq.heappush(ready, j)
                cond.notify_all()

    threads = [threading.Thread(target=worker, daemon=True) for _ in range(workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if state["error"] is not None:
        raise state["error"]
