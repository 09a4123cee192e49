"""Exact score-maximizing route search under an arrival deadline.

The search expands labels ``(node, arrival, score, predecessor)`` depth
first from the source.  A label is extended along an out-edge only if the
head is not already on the candidate path (looplessness) and the arrival at
the head does not exceed the head's latest feasible departure time (the
temporal bound from :func:`wayscore.traversal.latest_departures`).  Within
those rules the search is exhaustive, so the returned path is optimal, not
heuristic.

Ties between equal-score paths are broken by earlier destination arrival,
then by lexicographically smaller node sequence.  The tie-break makes the
optimum unique, which is what lets the parallel mode return byte-identical
results for any worker count: subtree searches are independent tasks joined
by a commutative max-reduction.

Parallel execution uses forked worker processes because the recursion is
pure Python and threads would serialize on the interpreter lock.  The tree
is expanded breadth first down to a small fork depth; every frontier label
becomes a task, and workers pull tasks from the shared queue, which keeps
them busy even when subtree sizes are wildly uneven.
"""

from __future__ import annotations

import gc
import json
import math
import multiprocessing
import os
import sys
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

from .network import Edge, RoadNetwork
from .profiles import TIME_EPS
from .traversal import DepartureBounds, Query, latest_departures

STATUS_OK = "ok"
STATUS_INFEASIBLE = "infeasible"
STATUS_LIMIT = "exploration-limit"


class ConsistencyError(RuntimeError):
    """A reconstructed path disagrees with its labels: solver bug."""


class _LimitHit(Exception):
    """Internal: the expansion cap was exceeded."""


@contextmanager
def _gc_paused():
    """Suspend cyclic GC during the search.

    The search allocates labels at a high rate but never forms reference
    cycles, so collector passes are pure overhead; worse, a full pass walks
    the whole (possibly copy-on-write shared) network, which hurts badly in
    forked workers.
    """
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


@dataclass(slots=True, eq=False)
class Label:
    """One unit of search state; ``pred`` chains back to the source label."""

    node: int
    arrival: float
    score: float
    pred: Optional["Label"]
    extras: tuple[float, ...] = ()


@dataclass(frozen=True)
class Constraint:
    """A secondary feasibility limit: accumulated cost must stay within budget.

    ``cost`` maps (edge, departure time at the edge's tail) to a
    non-negative amount.  Constraints are pure feasibility checks; they do
    not prune via bounds.
    """

    cost: Callable[[Edge, float], float]
    budget: float


@dataclass(frozen=True)
class PathResult:
    """A solution path with per-edge timing, total score and travel time."""

    nodes: tuple[int, ...]
    departures: tuple[float, ...]
    arrivals: tuple[float, ...]
    score: float
    travel_time: float
    t_dep: float = 0.0

    @property
    def arrival(self) -> float:
        return self.arrivals[-1] if self.arrivals else self.t_dep

    def to_json(self) -> str:
        return json.dumps(
            {
                "nodes": list(self.nodes),
                "departures": list(self.departures),
                "arrivals": list(self.arrivals),
                "score": self.score,
                "travel_time": self.travel_time,
            },
            sort_keys=True,
            separators=(",", ":"),
        )


@dataclass(frozen=True)
class SolveResult:
    status: str
    path: Optional[PathResult]
    explored: int

    @property
    def feasible(self) -> bool:
        return self.status == STATUS_OK


def label_sequence(label: Label) -> tuple[int, ...]:
    """Node sequence of a label's predecessor chain, source first."""
    seq = []
    cur: Optional[Label] = label
    while cur is not None:
        seq.append(cur.node)
        cur = cur.pred
    seq.reverse()
    return tuple(seq)


class _SearchState:
    """Per-solve bundle shared by every recursion frame."""

    __slots__ = (
        "adj",
        "bounds",
        "destination",
        "t_arr",
        "constraints",
        "explored",
        "cap",
    )

    def __init__(self, net, bounds, destination, t_arr, constraints, cap, adj=None):
        # (head, arrival evaluator, score evaluator, edge) per out-edge,
        # cached once so the hot loop avoids attribute lookups.
        if adj is None:
            adj = [
                [
                    (e.head, e.arrival.arrival, e.score.value, e)
                    for e in (net.edges[i] for i in out)
                ]
                for out in net.out_edges
            ]
        self.adj = adj
        self.bounds = bounds
        self.destination = destination
        self.t_arr = t_arr
        self.constraints = tuple(constraints)
        self.explored = 0
        self.cap = cap


def _extensions(state, label: Label, visited) -> Iterator[Label]:
    """Admissible one-step extensions of ``label``, in adjacency order."""
    t = label.arrival
    score = label.score
    extras = label.extras
    bounds = state.bounds
    constraints = state.constraints
    for head, arrival_at, score_at, edge in state.adj[label.node]:
        if head in visited:
            continue
        arr = arrival_at(t)
        if arr > bounds[head] + TIME_EPS:
            continue
        if constraints:
            new_extras = tuple(
                x + c.cost(edge, t) for x, c in zip(extras, constraints)
            )
            if any(
                x > c.budget + TIME_EPS for x, c in zip(new_extras, constraints)
            ):
                continue
        else:
            new_extras = ()
        state.explored += 1
        if state.cap is not None and state.explored > state.cap:
            raise _LimitHit
        yield Label(head, arr, score + score_at(t), label, new_extras)


def _fast_search(
    state: _SearchState,
    node: int,
    t: float,
    score: float,
    extras: tuple[float, ...],
    visited: set,
    path: list[int],
) -> Optional["_Candidate"]:
    """Hot search engine used by solve().

    Same expansion rules and tie-breaking as :func:`_process`, but the
    recursion stack itself holds the candidate path, so no label objects
    are allocated until a destination is actually reached.  That keeps the
    allocation rate (and with it memory-system pressure, which is what
    limits the parallel workers) low.
    """
    adj = state.adj
    bounds = state.bounds
    dest = state.destination
    deadline = state.t_arr + TIME_EPS
    constraints = state.constraints
    cap = state.cap
    explored = 0
    best_score = -math.inf
    best_arrival = math.inf
    best_seq: tuple[int, ...] = ()

    def rec(node: int, t: float, score: float, extras: tuple[float, ...]) -> None:
        nonlocal explored, best_score, best_arrival, best_seq
        for head, arrival_at, score_at, edge in adj[node]:
            if head in visited:
                continue
            arr = arrival_at(t)
            if arr > bounds[head] + TIME_EPS:
                continue
            if constraints:
                new_extras = tuple(
                    x + c.cost(edge, t) for x, c in zip(extras, constraints)
                )
                if any(
                    x > c.budget + TIME_EPS
                    for x, c in zip(new_extras, constraints)
                ):
                    continue
            else:
                new_extras = ()
            explored += 1
            if cap is not None and explored + state.explored > cap:
                raise _LimitHit
            new_score = score + score_at(t)
            if head == dest:
                if arr <= deadline:
                    if new_score > best_score:
                        best_score, best_arrival = new_score, arr
                        best_seq = tuple(path) + (head,)
                    elif new_score == best_score:
                        if arr < best_arrival:
                            best_arrival = arr
                            best_seq = tuple(path) + (head,)
                        elif arr == best_arrival:
                            seq = tuple(path) + (head,)
                            if seq < best_seq:
                                best_seq = seq
                continue
            visited.add(head)
            path.append(head)
            rec(head, arr, new_score, new_extras)
            path.pop()
            visited.discard(head)

    if node == dest:
        if t <= deadline:
            best_score, best_arrival, best_seq = score, t, tuple(path)
    else:
        try:
            rec(node, t, score, extras)
        finally:
            state.explored += explored
    if best_seq == ():
        return None
    return best_score, best_arrival, best_seq


def _process(state: _SearchState, label: Label, visited: set) -> Optional[Label]:
    """Recursive expansion; returns the best reachable destination label.

    Reference form of the engine, one call frame per label; solve() runs
    the allocation-free :func:`_fast_search` instead, which implements the
    identical expansion rules and tie-breaking.

    ``visited`` holds exactly the nodes on the label's chain; children are
    explored with add-before-recurse / remove-after-return backtracking,
    which is equivalent to copying the list at each branch.
    """
    if label.node == state.destination:
        if label.arrival <= state.t_arr + TIME_EPS:
            return label
        return None
    best: Optional[Label] = None
    best_seq: Optional[tuple[int, ...]] = None
    for child in _extensions(state, label, visited):
        visited.add(child.node)
        found = _process(state, child, visited)
        visited.discard(child.node)
        if found is None:
            continue
        if best is None:
            best = found
            best_seq = None
            continue
        if found.score != best.score:
            if found.score > best.score:
                best, best_seq = found, None
            continue
        if found.arrival != best.arrival:
            if found.arrival < best.arrival:
                best, best_seq = found, None
            continue
        if best_seq is None:
            best_seq = label_sequence(best)
        found_seq = label_sequence(found)
        if found_seq < best_seq:
            best, best_seq = found, found_seq
    return best


def process_label(
    net: RoadNetwork,
    bounds: Optional[DepartureBounds],
    query: Query,
    label: Label,
    visited: set,
    constraints: Sequence[Constraint] = (),
    max_expansions: Optional[int] = None,
) -> Optional[Label]:
    """Expand one label recursively; public wrapper around the engine.

    ``bounds`` of None disables temporal pruning.  ``visited`` must contain
    exactly the nodes on the label's chain and is restored on return.
    """
    times = bounds.times if bounds is not None else [math.inf] * net.node_count
    state = _SearchState(
        net, times, query.destination, query.t_arr, constraints, max_expansions
    )
    return _process(state, label, visited)


def child_labels(
    net: RoadNetwork,
    bounds: Optional[DepartureBounds],
    query: Query,
    label: Label,
    visited: set,
    constraints: Sequence[Constraint] = (),
) -> list[Label]:
    """The admissible immediate children of a label (no recursion)."""
    times = bounds.times if bounds is not None else [math.inf] * net.node_count
    state = _SearchState(
        net, times, query.destination, query.t_arr, constraints, None
    )
    return list(_extensions(state, label, visited))


def reconstruct_path(
    net: RoadNetwork, label: Label, t_dep: Optional[float] = None
) -> PathResult:
    """Turn a destination label's chain into a verified PathResult.

    Every per-edge time and the total score are recomputed forward and must
    match the stored label values to within the time tolerance; a mismatch
    or a repeated node means the chain was corrupted and raises
    ConsistencyError.
    """
    chain: list[Label] = []
    cur: Optional[Label] = label
    while cur is not None:
        chain.append(cur)
        cur = cur.pred
    chain.reverse()
    nodes = tuple(l.node for l in chain)
    if len(set(nodes)) != len(nodes):
        raise ConsistencyError(f"label chain repeats a node: {nodes}")
    start = chain[0].arrival if t_dep is None else t_dep
    if abs(chain[0].arrival - start) > TIME_EPS:
        raise ConsistencyError(
            f"chain starts at t={chain[0].arrival}, expected {start}"
        )
    result = path_from_nodes(net, start, nodes)
    for stored, recomputed in zip((l.arrival for l in chain[1:]), result.arrivals):
        if abs(stored - recomputed) > TIME_EPS:
            raise ConsistencyError(
                f"stored arrival {stored} != recomputed {recomputed}"
            )
    if abs(chain[-1].score - result.score) > TIME_EPS:
        raise ConsistencyError(
            f"stored score {chain[-1].score} != recomputed {result.score}"
        )
    return result


def path_from_nodes(
    net: RoadNetwork, t_dep: float, nodes: Sequence[int]
) -> PathResult:
    """Forward-simulate a node sequence into a PathResult."""
    departures = []
    arrivals = []
    score = 0.0
    t = t_dep
    for u, v in zip(nodes, nodes[1:]):
        idx = net.edge_between(u, v)
        if idx is None:
            raise ConsistencyError(f"no edge {u}->{v} in network")
        e = net.edges[idx]
        departures.append(t)
        score += e.score.value(t)
        t = e.arrival.arrival(t)
        arrivals.append(t)
    return PathResult(
        tuple(nodes), tuple(departures), tuple(arrivals), score, t - t_dep, t_dep
    )


# ---------------------------------------------------------------------------
# Parallel execution
# ---------------------------------------------------------------------------

# Candidate = (score, arrival, full node sequence); the reduction order is
# total over distinct paths, so the winner is scheduling-independent.
_Candidate = tuple[float, float, tuple[int, ...]]


def _better(a: _Candidate, b: _Candidate) -> bool:
    if a[0] != b[0]:
        return a[0] > b[0]
    if a[1] != b[1]:
        return a[1] < b[1]
    return a[2] < b[2]


# State inherited by forked workers; guarded by _PARALLEL_LOCK because two
# concurrent parallel solves in one process would clobber each other.
_WORKER_STATE: dict = {}
_PARALLEL_LOCK = threading.Lock()
# Per-process reuse of the adjacency cache across tasks of one solve; the
# epoch token distinguishes solves so a stale cache can never leak.
_WORKER_CACHE: dict = {}


def _worker_search_state() -> _SearchState:
    st = _WORKER_STATE
    cached = _WORKER_CACHE.get("state")
    if cached is not None and _WORKER_CACHE.get("epoch") == st["epoch"]:
        return cached
    state = _SearchState(
        st["net"], st["bounds"], st["destination"], st["t_arr"],
        st["constraints"], st["cap"], adj=st.get("adj"),
    )
    _WORKER_CACHE["state"] = state
    _WORKER_CACHE["epoch"] = st["epoch"]
    return state


def _run_subtree(task) -> tuple[Optional[_Candidate], int, bool]:
    node, arrival, score, extras, visited, prefix = task
    state = _worker_search_state()
    state.explored = 0
    try:
        with _gc_paused():
            cand = _fast_search(
                state, node, arrival, score, extras, set(visited), list(prefix)
            )
    except _LimitHit:
        return None, state.explored, True
    return cand, state.explored, False


def _default_fork_depth(threads: int) -> int:
    return int(2 * math.log2(max(2, threads))) + 4


# Frontier tasks per worker.  Subtree sizes are heavy-tailed, so the wall
# clock is bounded below by the largest task; hundreds of tasks per worker
# keep that bound small at negligible dispatch cost.
_TASKS_PER_WORKER = 32


def _build_frontier(
    state: _SearchState,
    root: Label,
    source: int,
    fork_depth: int,
    target_tasks: int,
) -> tuple[list[tuple], list[_Candidate]]:
    """Breadth-first expansion of the shallow tree into independent tasks.

    Destination labels met on the way become candidates immediately; every
    surviving frontier label becomes a task carrying its own visited set
    (the copy-at-fork scheme).
    """
    found: list[_Candidate] = []
    frontier: list[tuple[Label, frozenset]] = [(root, frozenset((source,)))]
    depth = 0
    while frontier and depth < fork_depth and len(frontier) < target_tasks:
        nxt: list[tuple[Label, frozenset]] = []
        for lbl, vis in frontier:
            for child in _extensions(state, lbl, vis):
                if child.node == state.destination:
                    if child.arrival <= state.t_arr + TIME_EPS:
                        found.append(
                            (child.score, child.arrival, label_sequence(child))
                        )
                else:
                    nxt.append((child, vis | {child.node}))
        frontier = nxt
        depth += 1
    tasks = [
        (
            lbl.node,
            lbl.arrival,
            lbl.score,
            lbl.extras,
            vis,
            label_sequence(lbl),
        )
        for lbl, vis in frontier
    ]
    return tasks, found


def _solve_parallel(
    net: RoadNetwork,
    query: Query,
    state: _SearchState,
    root: Label,
    threads: int,
    fork_depth: Optional[int],
    max_expansions: Optional[int],
) -> SolveResult:
    depth = fork_depth if fork_depth is not None else _default_fork_depth(threads)
    target = max(64, threads * _TASKS_PER_WORKER)
    remaining_cap = max_expansions
    # More processes than cores cannot help a CPU-bound search and multiply
    # copy-on-write traffic.
    cores = os.cpu_count() or threads
    ctx = multiprocessing.get_context("fork")
    limit_hit = False
    with _PARALLEL_LOCK:
        _WORKER_STATE.update(
            net=net,
            adj=state.adj,
            bounds=state.bounds,
            destination=query.destination,
            t_arr=query.t_arr,
            constraints=state.constraints,
            cap=remaining_cap,
            epoch=object(),
        )
        pool = None
        try:
            if net.node_count >= 256:
                # On real networks the fork cost is worth hiding behind the
                # frontier expansion; tiny instances usually end up with no
                # tasks at all, so they fork lazily below.
                pool = ctx.Pool(processes=max(1, min(threads, cores)))
            try:
                tasks, candidates = _build_frontier(
                    state, root, query.source, depth, target
                )
            except _LimitHit:
                return SolveResult(STATUS_LIMIT, None, state.explored)
            explored = state.explored
            if tasks:
                if max_expansions is not None:
                    remaining_cap = max(0, max_expansions - explored)
                    _WORKER_STATE["cap"] = remaining_cap
                if pool is None:
                    workers = max(1, min(threads, len(tasks), cores))
                    pool = ctx.Pool(processes=workers)
                # chunksize 1: subtree sizes are heavy-tailed, so let idle
                # workers pull single tasks (the balancing matters far more
                # than the per-task dispatch cost).
                for cand, count, hit in pool.imap_unordered(
                    _run_subtree, tasks, chunksize=1
                ):
                    explored += count
                    limit_hit = limit_hit or hit
                    if cand is not None:
                        candidates.append(cand)
        finally:
            if pool is not None:
                pool.terminate()
                pool.join()
            _WORKER_STATE.clear()
    if limit_hit or (max_expansions is not None and explored > max_expansions):
        return SolveResult(STATUS_LIMIT, None, explored)
    if not candidates:
        return SolveResult(STATUS_INFEASIBLE, None, explored)
    best = candidates[0]
    for cand in candidates[1:]:
        if _better(cand, best):
            best = cand
    return SolveResult(STATUS_OK, _verified_path(net, query, best), explored)


def _verified_path(net: RoadNetwork, query: Query, cand: _Candidate) -> PathResult:
    """Rebuild a candidate by forward simulation and cross-check its claim."""
    path = path_from_nodes(net, query.t_dep, cand[2])
    if abs(path.score - cand[0]) > TIME_EPS or abs(path.arrival - cand[1]) > TIME_EPS:
        raise ConsistencyError(
            f"candidate {cand[:2]} does not match recomputation "
            f"({path.score}, {path.arrival})"
        )
    return path


def solve(
    net: RoadNetwork,
    query: Query,
    constraints: Sequence[Constraint] = (),
    mode: str = "sequential",
    threads: int = 1,
    pruning: bool = True,
    max_expansions: Optional[int] = None,
    fork_depth: Optional[int] = None,
) -> SolveResult:
    """Find the loopless max-score path arriving by the query deadline.

    Returns a SolveResult whose status is "ok", "infeasible" (no loopless
    path can make the deadline; a value, not an error) or
    "exploration-limit" (the optional ``max_expansions`` cap fired).  With
    ``mode="parallel"`` the result is identical to sequential mode for any
    ``threads`` value.  Setting ``pruning=False`` removes the temporal
    bounds (useful only for measuring their effect); the answer is the
    same, the work is a superset.
    """
    if mode not in ("sequential", "parallel"):
        raise ValueError(f"unknown mode {mode!r}")
    if not (0 <= query.source < net.node_count):
        raise ValueError(f"source {query.source} out of range")
    if not (0 <= query.destination < net.node_count):
        raise ValueError(f"destination {query.destination} out of range")
    if query.t_arr < query.t_dep:
        raise ValueError("arrival deadline precedes departure")
    if query.source == query.destination:
        path = PathResult((query.source,), (), (), 0.0, 0.0, query.t_dep)
        return SolveResult(STATUS_OK, path, 1)
    if pruning:
        bounds = latest_departures(net, query.destination, query.t_arr, query.t_dep)
        times = bounds.times
        if times[query.source] < query.t_dep - TIME_EPS:
            return SolveResult(STATUS_INFEASIBLE, None, 0)
    else:
        times = [math.inf] * net.node_count
    limit = net.node_count + 1000
    if sys.getrecursionlimit() < limit:
        sys.setrecursionlimit(limit)
    state = _SearchState(
        net, times, query.destination, query.t_arr, constraints, max_expansions
    )
    state.explored = 1  # the source label
    root = Label(
        query.source, query.t_dep, 0.0, None, (0.0,) * len(state.constraints)
    )
    if mode == "parallel" and threads > 1:
        return _solve_parallel(
            net, query, state, root, threads, fork_depth, max_expansions
        )
    try:
        with _gc_paused():
            best = _fast_search(
                state,
                query.source,
                query.t_dep,
                0.0,
                root.extras,
                {query.source},
                [query.source],
            )
    except _LimitHit:
        return SolveResult(STATUS_LIMIT, None, state.explored)
    if best is None:
        return SolveResult(STATUS_INFEASIBLE, None, state.explored)
    return SolveResult(STATUS_OK, _verified_path(net, query, best), state.explored)
