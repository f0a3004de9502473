"""Adaptive amoeba (Physarum) solver for directed shortest paths and shortest path trees.

One iteration solves the grounded Kirchhoff system for pressures, derives edge flux
Q_ij = D_ij / L_ij * (p_i - p_j), cuts off flux running against an edge's direction,
and moves every conductivity toward its flux. Flow settles on shortest paths: in
two-terminal mode one unit flows from s to t, in tree mode the source feeds every
other node an equal share.
"""

import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
import pandas as pd

from utils import linsolve
from utils.baselines import Distances, label_setting_spt
from utils.errors import ParameterError, SingularSystemError, UnreachableNodeError
from utils.graph import DirectedGraph, UpdateSet, apply_updates, validate_reachable

logger = logging.getLogger(__name__)

MODES = ('two_terminal', 'tree')
UPDATE_RULES = ('explicit', 'semi_implicit')
INIT_SCHEMES = ('constant', 'random')
STOP_CRITERIA = ('conductivity', 'flux')

TRACE_COLUMNS = ['iteration', 'edge_tail', 'edge_head', 'flux', 'conductivity']

MIN_AUTO_ITERATIONS = 10_000
# relative excess of u over L that marks an edge as starved
REVIVAL_TOLERANCE = 1e-6


@dataclass(frozen=True)
class SolveMode:
    """Which demand pattern drives the flow: ``two_terminal`` (s -> t) or ``tree`` (s -> all)."""

    kind: str
    source: int
    sink: Optional[int] = None

    def __post_init__(self):
        if self.kind not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.kind!r}")
        if self.kind == 'two_terminal':
            if self.sink is None or self.sink == self.source:
                raise ParameterError("two-terminal mode needs a sink different from the source")
        elif self.sink is not None:
            raise ParameterError("tree mode takes no sink")

    @classmethod
    def two_terminal(cls, source: int, sink: int) -> 'SolveMode':
        return cls('two_terminal', int(source), int(sink))

    @classmethod
    def tree(cls, source: int) -> 'SolveMode':
        return cls('tree', int(source))

    @property
    def ground(self) -> int:
        # two-terminal grounds the sink, tree mode grounds the source
        return self.sink if self.kind == 'two_terminal' else self.source

    def demand_scale(self, node_count: int, source_current: float = 1.0) -> float:
        """Flux owed to a single sink."""
        if self.kind == 'two_terminal':
            return source_current
        return source_current / (node_count - 1)


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 0.5
    delta: Optional[float] = None
    flux_epsilon: float = 0.05
    max_iterations: Optional[int] = None
    source_current: float = 1.0
    conductivity_floor: float = 1e-12
    update_rule: str = 'explicit'
    init: str = 'constant'
    init_seed: int = 0
    stop_criterion: str = 'conductivity'
    linsolve_tolerance: float = linsolve.DEFAULT_TOLERANCE
    # None turns the equilibrium guard and starved-edge lifting off
    growth_tolerance: Optional[float] = 1e-3
    # lift level for starved edges, in multiples of the support threshold; 0 disables
    revival: float = 4.0

    def __post_init__(self):
        if not 0 < self.dt < 1:
            raise ParameterError(f"dt must lie in (0, 1), got {self.dt}")
        if self.delta is not None and not self.delta > 0:
            raise ParameterError(f"delta must be positive, got {self.delta}")
        if not 0 < self.flux_epsilon < 1:
            raise ParameterError(f"flux_epsilon must lie in (0, 1), got {self.flux_epsilon}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ParameterError(f"max_iterations must be positive, got {self.max_iterations}")
        if not self.source_current > 0:
            raise ParameterError(f"source_current must be positive, got {self.source_current}")
        if self.conductivity_floor < 0:
            raise ParameterError("conductivity_floor must be nonnegative")
        if self.update_rule not in UPDATE_RULES:
            raise ParameterError(f"update_rule must be one of {UPDATE_RULES}")
        if self.init not in INIT_SCHEMES:
            raise ParameterError(f"init must be one of {INIT_SCHEMES}")
        if self.stop_criterion not in STOP_CRITERIA:
            raise ParameterError(f"stop_criterion must be one of {STOP_CRITERIA}")
        if not self.linsolve_tolerance > 0:
            raise ParameterError("linsolve_tolerance must be positive")
        if self.growth_tolerance is not None and self.growth_tolerance < 0:
            raise ParameterError("growth_tolerance must be nonnegative or None")
        if self.revival < 0:
            raise ParameterError(f"revival must be nonnegative, got {self.revival}")

    def delta_for(self, edge_count: int) -> float:
        if self.delta is not None:
            return self.delta
        return 1e-6 * max(edge_count, 1)

    def iterations_for(self, node_count: int) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return max(10 * node_count, MIN_AUTO_ITERATIONS)

    def revival_level(self, demand: float) -> float:
        """Conductivity a starved edge is lifted to, or 0 when lifting is off."""
        if self.growth_tolerance is None:
            return 0.0
        return self.revival * self.flux_epsilon * demand

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SolverConfig':
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown solver settings: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def with_overrides(self, **changes) -> 'SolverConfig':
        return replace(self, **changes)


def _readonly(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PhysarumState:
    """Conductivity D, pressure p and post-cutoff flux Q after ``iteration`` steps.

    ``lifted`` counts the starved edges the last step raised to the revival level.
    """

    conductivity: np.ndarray
    pressure: np.ndarray
    flux: np.ndarray
    iteration: int = 0
    last_delta: float = math.inf
    flux_delta: float = math.inf
    conservation_residual: float = 0.0
    lifted: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'conductivity', _readonly(self.conductivity))
        object.__setattr__(self, 'pressure', _readonly(self.pressure))
        object.__setattr__(self, 'flux', _readonly(self.flux))
        if self.flux.shape != self.conductivity.shape:
            raise ParameterError("flux and conductivity must have one entry per edge")


@dataclass(frozen=True, eq=False)
class SptResult:
    mode: SolveMode
    graph: DirectedGraph = field(repr=False)
    distances: Distances
    support: Tuple[int, ...]
    state: PhysarumState = field(repr=False)
    iterations_used: int
    converged: bool
    wall_time: float
    diagnostic: Optional[str] = None

    def support_edges(self) -> List[Tuple[int, int]]:
        return [(int(self.graph.tails[e]), int(self.graph.heads[e])) for e in self.support]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'mode': self.mode.kind,
            'converged': self.converged,
            'iterations': self.iterations_used,
            'distances': list(self.distances),
            'support': [list(edge) for edge in self.support_edges()],
            'wall_time_ms': self.wall_time * 1000.0,
        }


def initial_state(graph: DirectedGraph, config: SolverConfig) -> PhysarumState:
    """D = 1 on every edge, or uniform on (0, 1] when ``config.init == 'random'``."""
    m = graph.edge_count
    if config.init == 'random':
        rng = np.random.default_rng(config.init_seed)
        conductivity = 1.0 - rng.random(m)
    else:
        conductivity = np.ones(m)
    return PhysarumState(conductivity, np.zeros(graph.node_count), np.zeros(m))


def pressure_rhs(mode: SolveMode, node_count: int, source_current: float = 1.0) -> np.ndarray:
    """Injected current per node; entries sum to exactly zero.

    Tree mode splits the source current into node_count - 1 shares on a common binary
    grid of 2**-42 relative spacing, so every partial sum is exact. Sink entries therefore
    differ from -source_current / (node_count - 1) by up to one grid step, and the
    first ``total mod (node_count - 1)`` sinks carry one step more than the rest.
    """
    if node_count < 2:
        raise ParameterError("need at least two nodes")
    for node in (mode.source, mode.sink):
        if node is not None and not 0 <= node < node_count:
            raise ParameterError(f"node {node} outside [0, {node_count})")

    rhs = np.zeros(node_count)
    if mode.kind == 'two_terminal':
        rhs[mode.source] = source_current
        rhs[mode.sink] = -source_current
        return rhs

    unit = math.ldexp(1.0, math.frexp(source_current)[1] - 42)
    total = round(source_current / unit)
    share, extra = divmod(total, node_count - 1)
    sinks = np.full(node_count - 1, -float(share) * unit)
    sinks[:extra] -= unit
    rhs[np.arange(node_count) != mode.source] = sinks
    rhs[mode.source] = float(total) * unit
    return rhs


def flux_divergence(graph: DirectedGraph, flux: np.ndarray) -> np.ndarray:
    """Net outflow per node."""
    n = graph.node_count
    return (np.bincount(graph.tails, weights=flux, minlength=n)
            - np.bincount(graph.heads, weights=flux, minlength=n))


def pressure_differences(graph: DirectedGraph, state: PhysarumState) -> np.ndarray:
    """u_ij = p_i - p_j per edge."""
    return state.pressure[graph.tails] - state.pressure[graph.heads]


def step(graph: DirectedGraph, state: PhysarumState, rhs: np.ndarray, ground: int,
         config: SolverConfig) -> PhysarumState:
    """One pressure solve, flux evaluation, directed cutoff and conductivity update.

    An edge whose pressure drop exceeds its length while its conductivity sits below the
    revival level is starved: decay has left it too thin to carry the flux it would
    attract. Such edges are lifted to the revival level, so a detour made cheaper by an
    update does not have to climb back up from the floor.
    """
    D = state.conductivity
    if D.shape != (graph.edge_count,):
        raise ParameterError(f"state has {D.shape[0]} conductivities, graph has {graph.edge_count} edges")

    system = linsolve.assemble(graph, D, rhs, ground)
    pressure = linsolve.solve(system, config.linsolve_tolerance)

    drop = pressure[graph.tails] - pressure[graph.heads]
    raw = D / graph.lengths * drop
    residual = float(np.max(np.abs(flux_divergence(graph, raw) - rhs)))

    # flux against the edge direction is cut to zero, which also makes the
    # decay branch of the update the same expression as the growth branch
    flux = np.where(drop > 0, raw, 0.0)
    if config.update_rule == 'explicit':
        updated = D + config.dt * (flux - D)
    else:
        updated = (D + config.dt * flux) / (1.0 + config.dt)
    updated = np.maximum(updated, config.conductivity_floor)

    # the largest single sink demand: one share in tree mode, the full current otherwise
    level = config.revival_level(float(-rhs.min()))
    starved = (updated < level) & (drop > graph.lengths * (1.0 + REVIVAL_TOLERANCE))
    lifted = int(np.count_nonzero(starved))
    if lifted:
        updated = np.where(starved, level, updated)

    return PhysarumState(
        conductivity=updated,
        pressure=pressure,
        flux=flux,
        iteration=state.iteration + 1,
        last_delta=float(np.sum(np.abs(updated - D))),
        flux_delta=float(np.sum(np.abs(flux - state.flux))),
        conservation_residual=residual,
        lifted=lifted,
    )


def converged(state: PhysarumState, config: SolverConfig) -> bool:
    if state.iteration == 0:
        return False
    change = state.last_delta if config.stop_criterion == 'conductivity' else state.flux_delta
    return change <= config.delta_for(len(state.conductivity))


def growing_edges(graph: DirectedGraph, state: PhysarumState, config: SolverConfig) -> np.ndarray:
    """Edges still gaining conductivity: pressure drop above length, u_ij > L_ij (1 + growth_tolerance).

    At equilibrium no edge qualifies. A lengthened tree edge keeps its flux, so the total
    change can sit below delta while a cheaper detour is still tiny and growing. On large
    graphs delta = 1e-6 |E| is about one node's share, so the guard is what holds the loop
    until a flipped subtree has moved over.
    """
    if config.growth_tolerance is None or state.iteration == 0:
        return np.empty(0, dtype=np.int64)
    u = pressure_differences(graph, state)
    return np.flatnonzero(u > graph.lengths * (1.0 + config.growth_tolerance))


def settled(graph: DirectedGraph, state: PhysarumState, config: SolverConfig) -> bool:
    """Stop test of the iteration loops: ``converged``, nothing lifted and no growing edge."""
    return (converged(state, config) and state.lifted == 0
            and len(growing_edges(graph, state, config)) == 0)


def extract_support(state: PhysarumState, mode: SolveMode, config: SolverConfig) -> Tuple[int, ...]:
    """Edges whose flux reaches ``flux_epsilon`` of one sink's demand."""
    threshold = config.flux_epsilon * mode.demand_scale(len(state.pressure), config.source_current)
    return tuple(int(e) for e in np.flatnonzero(state.flux >= threshold))


def distances_from_support(graph: DirectedGraph, support: Sequence[int], source: int) -> Distances:
    """Shortest distances from ``source`` using only support edges at their original lengths."""
    return label_setting_spt(graph.subgraph(support), source).distances


def _check_instance(graph: DirectedGraph, mode: SolveMode) -> None:
    n = graph.node_count
    if n < 2:
        raise ParameterError("need at least two nodes")
    for node in (mode.source, mode.sink):
        if node is not None and not 0 <= node < n:
            raise ParameterError(f"node {node} outside [0, {n})")
    reachable = validate_reachable(graph, mode.source)
    if mode.kind == 'tree':
        missing = set(range(n)) - reachable
    else:
        missing = set() if mode.sink in reachable else {mode.sink}
    if missing:
        raise UnreachableNodeError(missing, mode.source)


def _start_state(graph: DirectedGraph, config: SolverConfig, warm_start: Optional[PhysarumState]) -> PhysarumState:
    if warm_start is None:
        return initial_state(graph, config)
    if warm_start.conductivity.shape != (graph.edge_count,) or warm_start.pressure.shape != (graph.node_count,):
        raise ParameterError("warm-start state does not match the graph's shape")
    # same conductivities, iteration count restarted so runs are comparable
    return PhysarumState(warm_start.conductivity, warm_start.pressure, warm_start.flux)


def solve(graph: DirectedGraph, mode: SolveMode, config: Optional[SolverConfig] = None,
          warm_start: Optional[PhysarumState] = None) -> SptResult:
    """Iterate ``step`` until the stop criterion holds or the iteration budget runs out.

    Running out of budget, or a demanding node losing every conducting path, yields a
    result with ``converged=False`` and a diagnostic rather than an exception.
    """
    config = config or SolverConfig()
    _check_instance(graph, mode)
    started = time.perf_counter()

    rhs = pressure_rhs(mode, graph.node_count, config.source_current)
    state = _start_state(graph, config, warm_start)
    budget = config.iterations_for(graph.node_count)
    logger.info("solving %s mode: n=%d m=%d budget=%d warm=%s", mode.kind, graph.node_count,
                graph.edge_count, budget, warm_start is not None)

    diagnostic = None
    done = False
    while state.iteration < budget:
        try:
            state = step(graph, state, rhs, mode.ground, config)
        except SingularSystemError as exc:
            diagnostic = f"singular pressure system at iteration {state.iteration + 1}: {exc}"
            logger.warning(diagnostic)
            break
        logger.debug("iteration %d: delta=%.3e lifted=%d conservation=%.2e", state.iteration, state.last_delta,
                     state.lifted, state.conservation_residual)
        if settled(graph, state, config):
            done = True
            break

    if not done and diagnostic is None:
        diagnostic = (f"no convergence within {budget} iterations (last delta {state.last_delta:.3e}, "
                      f"{len(growing_edges(graph, state, config))} edges still growing)")
        logger.warning(diagnostic)

    support = extract_support(state, mode, config)
    distances = distances_from_support(graph, support, mode.source)
    elapsed = time.perf_counter() - started
    logger.info("finished after %d iterations, converged=%s, support=%d edges", state.iteration, done, len(support))
    return SptResult(mode, graph, distances, support, state, state.iteration, done, elapsed, diagnostic)


def resolve_after_update(previous: SptResult, new_graph: DirectedGraph,
                         config: Optional[SolverConfig] = None) -> SptResult:
    """Continue from ``previous``'s conductivities on a graph whose lengths changed."""
    if not previous.graph.same_topology(new_graph):
        raise ParameterError("updated graph must keep the previous graph's nodes and edges")
    return solve(new_graph, previous.mode, config, warm_start=previous.state)


@dataclass(frozen=True)
class ScheduledUpdate:
    """Apply ``updates`` right after iteration ``iteration`` completes."""

    iteration: int
    updates: UpdateSet


@dataclass(frozen=True, eq=False)
class FluxTrace:
    tails: np.ndarray
    heads: np.ndarray
    iterations: np.ndarray
    flux: np.ndarray
    conductivity: np.ndarray
    last_delta: np.ndarray
    conservation_residual: np.ndarray
    events: Tuple[Tuple[int, str], ...]
    converged: bool
    diagnostic: Optional[str] = None

    def edge_series(self, edge: int) -> np.ndarray:
        return self.flux[:, edge]

    def to_frame(self) -> pd.DataFrame:
        """Long format, one row per edge per recorded iteration."""
        k, m = self.flux.shape
        return pd.DataFrame({
            'iteration': np.repeat(self.iterations, m),
            'edge_tail': np.tile(self.tails, k),
            'edge_head': np.tile(self.heads, k),
            'flux': self.flux.reshape(-1),
            'conductivity': self.conductivity.reshape(-1),
        }, columns=TRACE_COLUMNS)

    def write_csv(self, target: Union[str, Path, TextIO]) -> None:
        """CSV rows with ``# update iteration=K category=C`` lines after iteration K."""
        if isinstance(target, (str, Path)):
            with open(target, 'w', newline='') as handle:
                self.write_csv(handle)
            return

        frame = self.to_frame()
        header = True
        cut = 0
        boundaries = [(it, cat) for it, cat in self.events] + [(None, None)]
        for iteration, category in boundaries:
            part = frame[frame['iteration'] <= iteration] if iteration is not None else frame
            part = part[part['iteration'] > cut]
            if header or len(part):
                part.to_csv(target, index=False, header=header, float_format='%.17g', lineterminator='\n')
                header = False
            if iteration is not None:
                target.write(f"# update iteration={iteration} category={category}\n")
                cut = iteration


def trace(graph: DirectedGraph, mode: SolveMode, config: Optional[SolverConfig] = None,
          schedule: Sequence[ScheduledUpdate] = ()) -> FluxTrace:
    """Record every edge's flux and conductivity at each iteration, applying scheduled updates.

    The iteration budget restarts after each update; the run ends at convergence once no
    update is pending.
    """
    config = config or SolverConfig()
    triggers = [s.iteration for s in schedule]
    if any(t < 1 for t in triggers) or any(b <= a for a, b in zip(triggers, triggers[1:])):
        raise ParameterError("schedule triggers must be strictly increasing positive iterations")
    _check_instance(graph, mode)

    rhs = pressure_rhs(mode, graph.node_count, config.source_current)
    budget = config.iterations_for(graph.node_count)
    pending = list(schedule)
    current = graph
    state = initial_state(graph, config)
    phase_start = 0
    events: List[Tuple[int, str]] = []
    rows: Dict[str, list] = {'iteration': [], 'flux': [], 'conductivity': [], 'delta': [], 'residual': []}
    diagnostic = None
    done = False

    while state.iteration - phase_start < budget:
        try:
            state = step(current, state, rhs, mode.ground, config)
        except SingularSystemError as exc:
            diagnostic = f"singular pressure system at iteration {state.iteration + 1}: {exc}"
            logger.warning(diagnostic)
            break
        rows['iteration'].append(state.iteration)
        rows['flux'].append(state.flux)
        rows['conductivity'].append(state.conductivity)
        rows['delta'].append(state.last_delta)
        rows['residual'].append(state.conservation_residual)

        if pending and state.iteration == pending[0].iteration:
            event = pending.pop(0)
            current = apply_updates(current, event.updates)
            events.append((state.iteration, event.updates.category))
            phase_start = state.iteration
            logger.info("applied %d-edge %s update after iteration %d", len(event.updates),
                        event.updates.category, state.iteration)
            continue
        if not pending and settled(current, state, config):
            done = True
            break

    if pending:
        logger.warning("%d scheduled updates never triggered", len(pending))
    if not done and diagnostic is None:
        diagnostic = f"no convergence within {budget} iterations of the last phase"

    m = graph.edge_count
    return FluxTrace(
        tails=graph.tails.copy(),
        heads=graph.heads.copy(),
        iterations=np.array(rows['iteration'], dtype=np.int64),
        flux=np.array(rows['flux']).reshape(-1, m),
        conductivity=np.array(rows['conductivity']).reshape(-1, m),
        last_delta=np.array(rows['delta']),
        conservation_residual=np.array(rows['residual']),
        events=tuple(events),
        converged=done,
        diagnostic=diagnostic,
    )
