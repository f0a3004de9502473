"""Classical single-source shortest path trees: label setting and Bellman-Ford"""

import heapq
import logging
import time
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from utils.errors import ParameterError
from utils.graph import DirectedGraph, UpdateSet, apply_updates

logger = logging.getLogger(__name__)

# Unreached nodes carry None, never an infinite distance.
UNREACHED = None

Distances = Tuple[Optional[float], ...]


@dataclass(frozen=True)
class BaselineResult:
    distances: Distances
    parent: Tuple[Optional[int], ...]
    relaxations: int
    wall_time: float

    def reached(self) -> Tuple[int, ...]:
        return tuple(i for i, d in enumerate(self.distances) if d is not UNREACHED)

    def tree_edges(self) -> Tuple[int, ...]:
        return tuple(sorted(e for e in self.parent if e is not None))


def distances_array(distances: Sequence[Optional[float]]) -> np.ndarray:
    """Float view of a distance tuple with NaN for unreached nodes (for numeric comparison only)."""
    return np.array([np.nan if d is UNREACHED else d for d in distances], dtype=float)


def _check_source(graph: DirectedGraph, source: int) -> None:
    if not 0 <= source < graph.node_count:
        raise ParameterError(f"source {source} outside [0, {graph.node_count})")


def label_setting_spt(graph: DirectedGraph, source: int) -> BaselineResult:
    """Dijkstra with a binary heap; stale heap entries are skipped instead of decreased.

    Ties in the heap pop the smallest node id first.
    """
    _check_source(graph, source)
    if graph.edge_count and np.any(graph.lengths <= 0):
        raise ParameterError("label setting requires strictly positive lengths")
    started = time.perf_counter()

    n = graph.node_count
    dist = [UNREACHED] * n
    parent = [None] * n
    settled = [False] * n
    heads = graph.heads.tolist()
    lengths = graph.lengths.tolist()
    relaxations = 0

    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, node = heapq.heappop(heap)
        if settled[node]:
            continue
        settled[node] = True
        for e in graph.out_edges(node).tolist():
            head = heads[e]
            if settled[head]:
                continue
            relaxations += 1
            candidate = d + lengths[e]
            if dist[head] is UNREACHED or candidate < dist[head]:
                dist[head] = candidate
                parent[head] = e
                heapq.heappush(heap, (candidate, head))

    return BaselineResult(tuple(dist), tuple(parent), relaxations, time.perf_counter() - started)


def bellman_ford_spt(graph: DirectedGraph, source: int) -> BaselineResult:
    """At most n - 1 rounds over the edge list in order, stopping at the first quiet round."""
    _check_source(graph, source)
    started = time.perf_counter()

    n = graph.node_count
    dist = [UNREACHED] * n
    parent = [None] * n
    dist[source] = 0.0
    edges = list(zip(graph.tails.tolist(), graph.heads.tolist(), graph.lengths.tolist()))
    relaxations = 0

    for _ in range(max(n - 1, 0)):
        changed = False
        for e, (tail, head, length) in enumerate(edges):
            if dist[tail] is UNREACHED:
                continue
            relaxations += 1
            candidate = dist[tail] + length
            if dist[head] is UNREACHED or candidate < dist[head]:
                dist[head] = candidate
                parent[head] = e
                changed = True
        if not changed:
            break

    return BaselineResult(tuple(dist), tuple(parent), relaxations, time.perf_counter() - started)


ALGORITHMS: Dict[str, Callable[[DirectedGraph, int], BaselineResult]] = {
    'label_setting': label_setting_spt,
    'bellman_ford': bellman_ford_spt,
}


def recompute_on_update(graph: DirectedGraph, updates: UpdateSet,
                        algorithm: Union[str, Callable[[DirectedGraph, int], BaselineResult]] = 'label_setting',
                        source: int = 0) -> BaselineResult:
    """Apply ``updates`` and rebuild the tree from scratch; wall_time covers both."""
    if isinstance(algorithm, str):
        if algorithm not in ALGORITHMS:
            raise ParameterError(f"unknown algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}")
        algorithm = ALGORITHMS[algorithm]
    started = time.perf_counter()
    mutated = apply_updates(graph, updates)
    result = algorithm(mutated, source)
    elapsed = time.perf_counter() - started
    return BaselineResult(result.distances, result.parent, result.relaxations, elapsed)
