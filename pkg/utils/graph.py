"""Directed weighted graph model, random instances and edge-weight updates"""

import io
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, Optional, Sequence, Set, TextIO, Tuple, Union

import numpy as np
import pandas as pd

from utils.errors import ParameterError

logger = logging.getLogger(__name__)

CATEGORIES = ('increase', 'decrease', 'mixed')

# Largest rcw accepted per category: increase ranges up to 10, decrease up to 0.9.
RCW_LIMITS = {'increase': 10.0, 'decrease': 0.9, 'mixed': 0.9}

# Benchmark graph sizes: (node count, edge probability).
BENCHMARK_DATASETS: Tuple[Tuple[int, float], ...] = ((500, 0.02), (1000, 0.01), (1500, 0.006), (2000, 0.005))


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class DirectedGraph:
    """The network G(V, E, L): node count plus an ordered list of directed edges.

    Edge ``k`` runs from ``tails[k]`` to ``heads[k]`` with length ``lengths[k]``.
    Instances are immutable; updates produce a new graph.
    """

    node_count: int
    tails: np.ndarray
    heads: np.ndarray
    lengths: np.ndarray
    _out_ptr: np.ndarray = field(init=False, repr=False)
    _out_idx: np.ndarray = field(init=False, repr=False)
    _in_ptr: np.ndarray = field(init=False, repr=False)
    _in_idx: np.ndarray = field(init=False, repr=False)
    _lookup: Dict[Tuple[int, int], int] = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.node_count)
        if n < 1:
            raise ParameterError(f"node_count must be positive, got {self.node_count}")
        tails = np.array(self.tails, dtype=np.int64).reshape(-1)
        heads = np.array(self.heads, dtype=np.int64).reshape(-1)
        lengths = np.array(self.lengths, dtype=np.float64).reshape(-1)
        if not (len(tails) == len(heads) == len(lengths)):
            raise ParameterError("tails, heads and lengths must have equal length")
        if len(tails):
            if tails.min() < 0 or heads.min() < 0 or tails.max() >= n or heads.max() >= n:
                raise ParameterError(f"edge endpoint outside [0, {n})")
            if np.any(tails == heads):
                loop = int(tails[tails == heads][0])
                raise ParameterError(f"self-loop at node {loop}")
            if not np.all(np.isfinite(lengths)) or np.any(lengths <= 0):
                raise ParameterError("every edge length must be a finite positive number")

        lookup: Dict[Tuple[int, int], int] = {}
        for k, pair in enumerate(zip(tails.tolist(), heads.tolist())):
            if pair in lookup:
                raise ParameterError(f"duplicate edge {pair}")
            lookup[pair] = k

        out_idx = np.argsort(tails, kind='stable')
        in_idx = np.argsort(heads, kind='stable')
        out_ptr = np.concatenate(([0], np.cumsum(np.bincount(tails, minlength=n))))
        in_ptr = np.concatenate(([0], np.cumsum(np.bincount(heads, minlength=n))))

        object.__setattr__(self, 'node_count', n)
        object.__setattr__(self, 'tails', _frozen(tails))
        object.__setattr__(self, 'heads', _frozen(heads))
        object.__setattr__(self, 'lengths', _frozen(lengths))
        object.__setattr__(self, '_out_ptr', _frozen(out_ptr.astype(np.int64)))
        object.__setattr__(self, '_out_idx', _frozen(out_idx.astype(np.int64)))
        object.__setattr__(self, '_in_ptr', _frozen(in_ptr.astype(np.int64)))
        object.__setattr__(self, '_in_idx', _frozen(in_idx.astype(np.int64)))
        object.__setattr__(self, '_lookup', lookup)

    @classmethod
    def from_edges(cls, node_count: int, edges: Sequence[Tuple[int, int, float]]) -> 'DirectedGraph':
        if len(edges) == 0:
            return cls(node_count, np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0))
        tails, heads, lengths = zip(*edges)
        return cls(node_count, np.asarray(tails), np.asarray(heads), np.asarray(lengths, dtype=float))

    @property
    def edge_count(self) -> int:
        return len(self.tails)

    @property
    def edges(self) -> Iterator[Tuple[int, int, float]]:
        for t, h, length in zip(self.tails.tolist(), self.heads.tolist(), self.lengths.tolist()):
            yield t, h, length

    def out_edges(self, node: int) -> np.ndarray:
        """Edge ids leaving ``node`` in edge-list order."""
        return self._out_idx[self._out_ptr[node]:self._out_ptr[node + 1]]

    def in_edges(self, node: int) -> np.ndarray:
        return self._in_idx[self._in_ptr[node]:self._in_ptr[node + 1]]

    def edge_id(self, tail: int, head: int) -> Optional[int]:
        return self._lookup.get((int(tail), int(head)))

    def with_lengths(self, lengths: np.ndarray) -> 'DirectedGraph':
        return DirectedGraph(self.node_count, self.tails, self.heads, np.asarray(lengths, dtype=float))

    def subgraph(self, edge_ids: Sequence[int]) -> 'DirectedGraph':
        """Same node set, only the listed edges (original lengths kept)."""
        ids = np.asarray(sorted(set(int(e) for e in edge_ids)), dtype=np.int64)
        return DirectedGraph(self.node_count, self.tails[ids], self.heads[ids], self.lengths[ids])

    def same_topology(self, other: 'DirectedGraph') -> bool:
        return (self.node_count == other.node_count
                and np.array_equal(self.tails, other.tails)
                and np.array_equal(self.heads, other.heads))

    def __eq__(self, other) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return self.same_topology(other) and np.array_equal(self.lengths, other.lengths)

    def __repr__(self) -> str:
        return f"DirectedGraph(n={self.node_count}, m={self.edge_count})"


@dataclass(frozen=True)
class UpdateSet:
    """A batch of edge-length changes with the rue / rcw values it was drawn with."""

    changes: Tuple[Tuple[int, float], ...]
    category: str
    rue: float
    rcw: float
    seed: int = 0

    def __post_init__(self):
        changes = tuple((int(e), float(w)) for e, w in self.changes)
        object.__setattr__(self, 'changes', changes)
        if self.category not in CATEGORIES:
            raise ParameterError(f"category must be one of {CATEGORIES}, got {self.category!r}")
        ids = [e for e, _ in changes]
        if len(set(ids)) != len(ids):
            raise ParameterError("an edge appears twice in the update set")
        if any(not (w > 0 and math.isfinite(w)) for _, w in changes):
            raise ParameterError("updated lengths must be finite and strictly positive")
        if changes:
            if not 0 < self.rue <= 1:
                raise ParameterError(f"rue must lie in (0, 1], got {self.rue}")
            if not self.rcw > 0:
                raise ParameterError(f"rcw must be positive, got {self.rcw}")

    @classmethod
    def empty(cls, category: str = 'increase') -> 'UpdateSet':
        return cls(changes=(), category=category, rue=0.0, rcw=0.0)

    def __len__(self) -> int:
        return len(self.changes)

    @property
    def edge_ids(self) -> Tuple[int, ...]:
        return tuple(e for e, _ in self.changes)

    def inverse(self, graph: DirectedGraph) -> 'UpdateSet':
        """The update that restores ``graph``'s current lengths after this one is applied."""
        swapped = {'increase': 'decrease', 'decrease': 'increase', 'mixed': 'mixed'}[self.category]
        restored = tuple((e, float(graph.lengths[e])) for e, _ in self.changes)
        return UpdateSet(restored, swapped, self.rue, self.rcw, self.seed)


def generate_erdos_renyi(n: int, p: float, weight_min: float = 1.0, weight_max: float = 1000.0,
                         seed: int = 0, integer_weights: bool = False) -> DirectedGraph:
    """Directed G(n, p): every ordered pair (i, j), i != j, gets an edge with probability p.

    Weights are uniform on [weight_min, weight_max]; ``integer_weights`` draws integers
    from the same closed range instead.
    """
    if n < 2:
        raise ParameterError(f"n must be at least 2, got {n}")
    if not 0 < p <= 1:
        raise ParameterError(f"p must lie in (0, 1], got {p}")
    if not 0 < weight_min <= weight_max:
        raise ParameterError(f"need 0 < weight_min <= weight_max, got [{weight_min}, {weight_max}]")

    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    tails, heads = np.nonzero(mask)
    if integer_weights:
        lo, hi = math.ceil(weight_min), math.floor(weight_max)
        if lo > hi:
            raise ParameterError(f"no integer in [{weight_min}, {weight_max}]")
        lengths = rng.integers(lo, hi, size=len(tails), endpoint=True).astype(float)
    else:
        lengths = rng.uniform(weight_min, weight_max, size=len(tails))
    logger.debug("G(%d, %g) seed=%d: %d edges", n, p, seed, len(tails))
    return DirectedGraph(n, tails, heads, lengths)


def validate_reachable(graph: DirectedGraph, source: int) -> Set[int]:
    """Nodes reachable from ``source`` along directed edges (breadth-first)."""
    if not 0 <= source < graph.node_count:
        raise ParameterError(f"source {source} outside [0, {graph.node_count})")
    seen = {int(source)}
    queue = deque([int(source)])
    while queue:
        node = queue.popleft()
        for e in graph.out_edges(node):
            head = int(graph.heads[e])
            if head not in seen:
                seen.add(head)
                queue.append(head)
    return seen


def sample_updates(graph: DirectedGraph, rue: float, rcw: float, category: str, seed: int) -> UpdateSet:
    """Pick round(rue * |E|) distinct edges and scale their lengths by (1 + rcw) or (1 - rcw).

    ``mixed`` increases the first half of the selection (the extra one on odd sizes)
    and decreases the rest.
    """
    if category not in CATEGORIES:
        raise ParameterError(f"category must be one of {CATEGORIES}, got {category!r}")
    if not 0 < rue <= 1:
        raise ParameterError(f"rue must lie in (0, 1], got {rue}")
    limit = RCW_LIMITS[category]
    if not 0 < rcw <= limit:
        raise ParameterError(f"rcw for {category} must lie in (0, {limit}], got {rcw}")
    m = graph.edge_count
    if m == 0:
        raise ParameterError("graph has no edges to update")

    count = min(m, max(1, int(math.floor(rue * m + 0.5))))
    rng = np.random.default_rng(seed)
    chosen = rng.choice(m, size=count, replace=False)

    if category == 'increase':
        factors = np.full(count, 1.0 + rcw)
    elif category == 'decrease':
        factors = np.full(count, 1.0 - rcw)
    else:
        grow = (count + 1) // 2
        factors = np.concatenate((np.full(grow, 1.0 + rcw), np.full(count - grow, 1.0 - rcw)))

    new_lengths = graph.lengths[chosen] * factors
    changes = tuple(zip(chosen.tolist(), new_lengths.tolist()))
    return UpdateSet(changes, category, float(rue), float(rcw), int(seed))


def apply_updates(graph: DirectedGraph, updates: UpdateSet) -> DirectedGraph:
    if not updates.changes:
        return graph
    lengths = graph.lengths.copy()
    for edge, new_length in updates.changes:
        if not 0 <= edge < graph.edge_count:
            raise ParameterError(f"unknown edge id {edge} (graph has {graph.edge_count} edges)")
        lengths[edge] = new_length
    return graph.with_lengths(lengths)


def write_graph(graph: DirectedGraph, target: Union[str, Path, TextIO]) -> None:
    """Plain-text format: ``n m`` then one ``tail head length`` line per edge."""
    lines = [f"{graph.node_count} {graph.edge_count}"]
    lines.extend(f"{t} {h} {length:.17g}" for t, h, length in graph.edges)
    text = '\n'.join(lines) + '\n'
    if isinstance(target, (str, Path)):
        Path(target).write_text(text)
    else:
        target.write(text)


def read_graph(source: Union[str, Path, TextIO]) -> DirectedGraph:
    text = Path(source).read_text() if isinstance(source, (str, Path)) else source.read()
    header, _, body = text.partition('\n')
    try:
        n, m = (int(v) for v in header.split())
    except ValueError:
        raise ParameterError(f"bad graph header {header!r}; expected 'n m'") from None

    if m == 0:
        return DirectedGraph.from_edges(n, [])
    try:
        df = pd.read_csv(io.StringIO(body), sep=' ', header=None, names=['tail', 'head', 'length'],
                         dtype={'tail': np.int64, 'head': np.int64, 'length': np.float64},
                         float_precision='round_trip', skipinitialspace=True)
    except (ValueError, pd.errors.ParserError) as exc:
        raise ParameterError(f"malformed edge line: {exc}") from exc
    if len(df) != m:
        raise ParameterError(f"header announces {m} edges, file has {len(df)}")
    return DirectedGraph(n, df['tail'].to_numpy(), df['head'].to_numpy(), df['length'].to_numpy())
