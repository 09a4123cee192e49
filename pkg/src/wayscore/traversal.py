"""Network traversals that bracket a query in time.

* :func:`earliest_arrival` -- forward time-dependent Dijkstra; correct under
  the FIFO property every edge is validated against.
* :func:`build_query` -- turns (source, destination, departure, overhead)
  into a concrete arrival deadline by adding the overhead to the fastest
  travel time.
* :func:`latest_departures` -- backward relaxation from the destination that
  labels every node with the latest moment one can leave it and still make
  the deadline.  These labels are the pruning bounds of the solver.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Optional

from .network import RoadNetwork

UNREACHABLE = -math.inf


class QueryError(ValueError):
    """Raised for queries that cannot be posed (e.g. unreachable pair)."""


def earliest_arrival(
    net: RoadNetwork, source: int, destination: int, t_dep: float
) -> Optional[tuple[float, list[int]]]:
    """Minimum arrival time over all source->destination paths, plus a witness.

    Edge arrival functions are evaluated at the traveller's actual arrival
    time at each edge's tail.  Returns None when the destination is
    unreachable; ``source == destination`` yields ``(t_dep, [source])``.
    """
    if source == destination:
        return t_dep, [source]
    n = net.node_count
    best = [math.inf] * n
    via = [-1] * n
    best[source] = t_dep
    heap = [(t_dep, source)]
    edges = net.edges
    while heap:
        t, u = heapq.heappop(heap)
        if t > best[u]:
            continue
        if u == destination:
            path = [destination]
            node = destination
            while node != source:
                edge = edges[via[node]]
                node = edge.tail
                path.append(node)
            path.reverse()
            return t, path
        for idx in net.out_edges[u]:
            e = edges[idx]
            arr = e.arrival.arrival(t)
            if arr < best[e.head]:
                best[e.head] = arr
                via[e.head] = idx
                heapq.heappush(heap, (arr, e.head))
    return None


@dataclass(frozen=True)
class Query:
    """A fully-derived query: budget and deadline are already computed.

    ``overhead_kind`` is "abs" (minutes on top of the fastest travel time)
    or "pct" (percentage of the fastest travel time).
    """

    source: int
    destination: int
    t_dep: float
    overhead_kind: str
    overhead_value: float
    budget: float
    t_arr: float

    @classmethod
    def from_budget(
        cls, source: int, destination: int, t_dep: float, budget: float
    ) -> "Query":
        """Bypass budget derivation when the budget is already known."""
        if budget < 0:
            raise QueryError(f"budget must be >= 0, got {budget}")
        return cls(source, destination, t_dep, "abs", budget, budget, t_dep + budget)


def build_query(
    net: RoadNetwork,
    source: int,
    destination: int,
    t_dep: float,
    overhead_minutes: Optional[float] = None,
    overhead_percent: Optional[float] = None,
) -> Query:
    """Derive the budget: fastest travel time plus the requested overhead.

    Exactly one overhead form must be given.  Raises QueryError when the
    destination is unreachable from the source.
    """
    if (overhead_minutes is None) == (overhead_percent is None):
        raise QueryError("give exactly one of overhead_minutes / overhead_percent")
    reached = earliest_arrival(net, source, destination, t_dep)
    if reached is None:
        raise QueryError(
            f"destination {destination} unreachable from {source} at t={t_dep}"
        )
    fastest = reached[0] - t_dep
    if overhead_minutes is not None:
        if overhead_minutes <= 0:
            raise QueryError("overhead must be positive")
        kind, value = "abs", float(overhead_minutes)
        budget = fastest + overhead_minutes
    else:
        if overhead_percent <= 0:
            raise QueryError("overhead must be positive")
        kind, value = "pct", float(overhead_percent)
        budget = fastest * (1.0 + overhead_percent / 100.0)
    return Query(source, destination, t_dep, kind, value, budget, t_dep + budget)


@dataclass
class DepartureBounds:
    """Per-node latest departure times toward one destination.

    ``times[v]`` is the latest time one can leave ``v`` and still arrive at
    the destination by ``t_arr``; ``UNREACHABLE`` (-inf) when no departure at
    or after ``t_dep`` works.  ``witness[v]`` is the first edge of a path
    achieving the label, for audit purposes.
    """

    destination: int
    t_arr: float
    t_dep: float
    times: list[float]
    witness: list[int]

    def label(self, node: int) -> Optional[float]:
        t = self.times[node]
        return None if t == UNREACHABLE else t

    def witness_path(self, net: RoadNetwork, node: int) -> list[int]:
        """Node sequence of the recorded witness from ``node`` to the destination."""
        path = [node]
        while path[-1] != self.destination:
            idx = self.witness[path[-1]]
            if idx < 0:
                raise QueryError(f"node {node} has no witness path")
            path.append(net.edges[idx].head)
        return path


def latest_departures(
    net: RoadNetwork, destination: int, t_arr: float, t_dep: float
) -> DepartureBounds:
    """Backward relaxation from the destination over incoming edges.

    Mirror image of the forward Dijkstra: a max-ordered frontier closes the
    node with the largest tentative label first, and relaxing an incoming
    edge inverts its arrival profile against the head's label.  Stops when
    the frontier is empty or its top falls below ``t_dep``, since labels
    below the departure time cannot matter.  Ties close the smaller node id
    first for reproducibility.

    The labels bound path prefixes, not solution paths, so no loop checking
    is needed here.
    """
    n = net.node_count
    times = [UNREACHABLE] * n
    witness = [-1] * n
    closed = [False] * n
    times[destination] = t_arr
    heap = [(-t_arr, destination)]
    edges = net.edges
    while heap:
        neg, v = heapq.heappop(heap)
        label = -neg
        if label < t_dep:
            break
        if closed[v] or label < times[v]:
            continue
        closed[v] = True
        for idx in net.in_edges[v]:
            e = edges[idx]
            u = e.tail
            if closed[u]:
                continue
            cand = e.arrival.latest_departure(times[v])
            if cand is not None and cand > times[u]:
                times[u] = cand
                witness[u] = idx
                heapq.heappush(heap, (-cand, u))
    for v in range(n):
        if not closed[v]:
            times[v] = UNREACHABLE
            witness[v] = -1
    return DepartureBounds(destination, t_arr, t_dep, times, witness)
