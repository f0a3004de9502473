"""Benchmark sweeps: warm-started amoeba vs. cold amoeba vs. classical recomputation"""

import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from utils import physarum
from utils.baselines import Distances, distances_array, label_setting_spt, recompute_on_update
from utils.errors import OracleMismatchError, ParameterError
from utils.graph import (BENCHMARK_DATASETS, CATEGORIES, RCW_LIMITS, DirectedGraph, apply_updates,
                         generate_erdos_renyi, sample_updates, validate_reachable)
from utils.physarum import SolveMode, SolverConfig

logger = logging.getLogger(__name__)

ALGORITHM_ORDER = ('amoeba_warm', 'amoeba_cold', 'label_setting', 'bellman_ford')
ROW_COLUMNS = ['dataset', 'n', 'm', 'category', 'rue', 'rcw', 'rep', 'algorithm', 'wall_time_ms', 'iterations', 'ok']
SUMMARY_COLUMNS = ['dataset', 'category', 'param_name', 'param_value', 'algorithm', 'mean_ms', 'std_ms', 'mean_iters']
SEED_ENV = 'PHYSARUM_SEED'
SOURCE = 0


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: Tuple[Tuple[int, float], ...] = BENCHMARK_DATASETS
    rue_values: Tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
    rcw_values: Tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
    categories: Tuple[str, ...] = CATEGORIES
    repetitions: int = 10
    base_seed: int = 0
    solver_config: SolverConfig = field(default_factory=SolverConfig)
    output_dir: str = 'results'
    fixed_rue: float = 0.2
    fixed_rcw: float = 0.1
    weight_min: float = 1.0
    weight_max: float = 1000.0
    integer_weights: bool = False
    workers: int = 1
    max_regenerations: int = 100

    def __post_init__(self):
        datasets = tuple((int(n), float(p)) for n, p in self.datasets)
        object.__setattr__(self, 'datasets', datasets)
        object.__setattr__(self, 'rue_values', tuple(float(v) for v in self.rue_values))
        object.__setattr__(self, 'rcw_values', tuple(float(v) for v in self.rcw_values))
        object.__setattr__(self, 'categories', tuple(self.categories))

        if not datasets:
            raise ParameterError("at least one dataset is required")
        for n, p in datasets:
            if n < 2 or not 0 < p <= 1:
                raise ParameterError(f"dataset ({n}, {p}) needs n >= 2 and 0 < p <= 1")
        if not self.rue_values and not self.rcw_values:
            raise ParameterError("nothing to sweep: rue_values and rcw_values are both empty")
        if not self.categories:
            raise ParameterError("at least one category is required")
        unknown = set(self.categories) - set(CATEGORIES)
        if unknown:
            raise ParameterError(f"unknown categories {sorted(unknown)}")
        if self.repetitions < 1:
            raise ParameterError(f"repetitions must be >= 1, got {self.repetitions}")
        for rue in self.rue_values + (self.fixed_rue,):
            if not 0 < rue <= 1:
                raise ParameterError(f"rue must lie in (0, 1], got {rue}")
        for category in self.categories:
            limit = RCW_LIMITS[category]
            for rcw in self.rcw_values + (self.fixed_rcw,):
                if not 0 < rcw <= limit:
                    raise ParameterError(f"rcw for {category} must lie in (0, {limit}], got {rcw}")
        if not 0 < self.weight_min <= self.weight_max:
            raise ParameterError("need 0 < weight_min <= weight_max")
        if self.workers < 1 or self.max_regenerations < 0:
            raise ParameterError("workers must be >= 1 and max_regenerations >= 0")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], env: Optional[Mapping[str, str]] = None) -> 'ExperimentConfig':
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown experiment settings: {sorted(unknown)}")
        if data.get('datasets') == 'standard':
            data['datasets'] = BENCHMARK_DATASETS
        if isinstance(data.get('solver_config'), Mapping):
            data['solver_config'] = SolverConfig.from_dict(data['solver_config'])

        env = os.environ if env is None else env
        if env.get(SEED_ENV):
            try:
                data['base_seed'] = int(env[SEED_ENV])
            except ValueError:
                raise ParameterError(f"{SEED_ENV} must be an integer, got {env[SEED_ENV]!r}") from None
        try:
            return cls(**data)
        except TypeError as exc:
            raise ParameterError(str(exc)) from exc

    @classmethod
    def from_json(cls, path: Union[str, Path], env: Optional[Mapping[str, str]] = None) -> 'ExperimentConfig':
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ParameterError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ParameterError(f"{path}: expected a JSON object")
        return cls.from_dict(data, env)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['datasets'] = [list(d) for d in self.datasets]
        data['solver_config'] = self.solver_config.to_dict()
        return data

    def cell_count(self) -> int:
        return len(self.datasets) * len(self.categories) * (len(self.rue_values) + len(self.rcw_values)) * self.repetitions


@dataclass(frozen=True)
class ReportRow:
    dataset: str
    n: int
    m: int
    category: str
    rue: float
    rcw: float
    rep: int
    algorithm: str
    wall_time_ms: float
    iterations: Optional[int]
    ok: bool
    param_name: str = 'rue'
    seed: int = 0
    graph_attempts: int = 1

    @property
    def param_value(self) -> float:
        return self.rue if self.param_name == 'rue' else self.rcw


@dataclass(frozen=True)
class SweepCell:
    dataset_index: int
    n: int
    p: float
    category: str
    param_name: str
    rue: float
    rcw: float
    rep: int

    @property
    def param_value(self) -> float:
        return self.rue if self.param_name == 'rue' else self.rcw


def dataset_label(n: int, p: float) -> str:
    return f"n{n}_p{p:g}"


def cell_seed(base_seed: int, dataset_index: int, category: str, param_name: str, value: float, rep: int) -> int:
    """Stable 63-bit seed per sweep cell (independent of run order and worker count)."""
    key = f"{base_seed}|{dataset_index}|{category}|{param_name}|{value!r}|{rep}"
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], 'big') >> 1


def draw_reachable_graph(n: int, p: float, seed: int, weight_min: float = 1.0, weight_max: float = 1000.0,
                         integer_weights: bool = False, max_regenerations: int = 100) -> Tuple[DirectedGraph, int, int]:
    """ER graph with every node reachable from node 0; draws again with seed + 1, seed + 2, ...

    Returns the graph, the seed that produced it and the number of draws.
    """
    for attempt in range(max_regenerations + 1):
        graph = generate_erdos_renyi(n, p, weight_min, weight_max, seed + attempt, integer_weights)
        if len(validate_reachable(graph, SOURCE)) == n:
            if attempt:
                logger.warning("regenerated graph n=%d p=%g %d times; using seed %d", n, p, attempt, seed + attempt)
            return graph, seed + attempt, attempt + 1
    raise ParameterError(f"no graph with all nodes reachable from {SOURCE} after "
                         f"{max_regenerations + 1} draws (n={n}, p={p}, seed={seed})")


def distances_match(found: Distances, expected: Distances, rtol: float = 1e-6) -> bool:
    a, b = distances_array(found), distances_array(expected)
    if a.shape != b.shape or not np.array_equal(np.isnan(a), np.isnan(b)):
        return False
    return bool(np.allclose(a, b, rtol=rtol, atol=1e-9, equal_nan=True))


def iter_cells(config: ExperimentConfig) -> List[SweepCell]:
    """Sweep order: dataset, category, rue sweep then rcw sweep, repetition."""
    cells = []
    for index, (n, p) in enumerate(config.datasets):
        for category in config.categories:
            for rue in config.rue_values:
                cells.extend(SweepCell(index, n, p, category, 'rue', rue, config.fixed_rcw, rep)
                             for rep in range(config.repetitions))
            for rcw in config.rcw_values:
                cells.extend(SweepCell(index, n, p, category, 'rcw', config.fixed_rue, rcw, rep)
                             for rep in range(config.repetitions))
    return cells


def run_cell(cell: SweepCell, config: ExperimentConfig) -> List[ReportRow]:
    seed = cell_seed(config.base_seed, cell.dataset_index, cell.category, cell.param_name, cell.param_value, cell.rep)
    graph, graph_seed, attempts = draw_reachable_graph(cell.n, cell.p, seed, config.weight_min, config.weight_max,
                                                       config.integer_weights, config.max_regenerations)
    mode = SolveMode.tree(SOURCE)
    solver = config.solver_config
    initial = physarum.solve(graph, mode, solver)
    updates = sample_updates(graph, cell.rue, cell.rcw, cell.category, graph_seed)
    updated = apply_updates(graph, updates)
    oracle = label_setting_spt(updated, SOURCE).distances

    warm = physarum.resolve_after_update(initial, updated, solver)
    cold = physarum.solve(updated, mode, solver)

    outcomes = [
        ('amoeba_warm', warm.distances, warm.wall_time, warm.iterations_used),
        ('amoeba_cold', cold.distances, cold.wall_time, cold.iterations_used),
    ]
    for name in ('label_setting', 'bellman_ford'):
        result = recompute_on_update(graph, updates, name, SOURCE)
        outcomes.append((name, result.distances, result.wall_time, None))

    rows = []
    params = {'n': cell.n, 'p': cell.p, 'category': cell.category, 'rue': cell.rue, 'rcw': cell.rcw, 'rep': cell.rep}
    for name, distances, wall_time, iterations in outcomes:
        if not distances_match(distances, oracle):
            raise OracleMismatchError(graph_seed, params, name)
        rows.append(ReportRow(dataset_label(cell.n, cell.p), cell.n, graph.edge_count, cell.category, cell.rue,
                              cell.rcw, cell.rep, name, wall_time * 1000.0, iterations, True, cell.param_name,
                              graph_seed, attempts))
    logger.debug("cell %s %s=%g rep %d: warm %d vs cold %d iterations", cell.category, cell.param_name,
                 cell.param_value, cell.rep, warm.iterations_used, cold.iterations_used)
    return rows


def _run_cell_args(args: Tuple[SweepCell, ExperimentConfig]) -> List[ReportRow]:
    return run_cell(*args)


def run_sweep(config: ExperimentConfig, progress: Optional[Callable[[int, int], None]] = None) -> List[ReportRow]:
    """Every cell of the sweep, rows in sweep order regardless of ``config.workers``.

    Raises OracleMismatchError on the first cell whose output disagrees with label setting.
    """
    cells = iter_cells(config)
    logger.info("running %d cells (%d rows) with %d worker(s)", len(cells), len(cells) * len(ALGORITHM_ORDER),
                config.workers)
    rows: List[ReportRow] = []
    if config.workers == 1:
        results = (run_cell(cell, config) for cell in cells)
        for done, cell_rows in enumerate(results, start=1):
            rows.extend(cell_rows)
            if progress:
                progress(done, len(cells))
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for done, cell_rows in enumerate(pool.map(_run_cell_args, [(c, config) for c in cells]), start=1):
                rows.extend(cell_rows)
                if progress:
                    progress(done, len(cells))
    return rows


def rows_to_frame(rows: Sequence[ReportRow]) -> pd.DataFrame:
    df = pd.DataFrame([asdict(r) for r in rows])
    if df.empty:
        return pd.DataFrame(columns=ROW_COLUMNS + ['param_name'])
    df['iterations'] = df['iterations'].astype('Int64')
    return df


def _infer_param_name(df: pd.DataFrame, fixed_rue: float, fixed_rcw: float) -> pd.Series:
    # the shared point (fixed_rue, fixed_rcw) cannot be told apart and is credited to the rue sweep
    swept_rcw = np.isclose(df['rue'], fixed_rue) & ~np.isclose(df['rcw'], fixed_rcw)
    return pd.Series(np.where(swept_rcw, 'rcw', 'rue'), index=df.index)


def summarize(rows: Union[Sequence[ReportRow], pd.DataFrame], fixed_rue: float = 0.2,
              fixed_rcw: float = 0.1) -> pd.DataFrame:
    """Mean and population standard deviation of wall time per (dataset, category, parameter, algorithm).

    Groups appear in first-occurrence order.
    """
    df = rows.copy() if isinstance(rows, pd.DataFrame) else rows_to_frame(rows)
    if df.empty:
        raise ParameterError("no rows to summarize")
    if 'param_name' not in df.columns:
        df['param_name'] = _infer_param_name(df, fixed_rue, fixed_rcw)
    df['param_value'] = np.where(df['param_name'] == 'rue', df['rue'], df['rcw'])
    df['iterations'] = pd.to_numeric(df['iterations'], errors='coerce').astype('float64')

    keys = ['dataset', 'category', 'param_name', 'param_value', 'algorithm']
    summary = df.groupby(keys, sort=False).agg(
        mean_ms=('wall_time_ms', 'mean'),
        std_ms=('wall_time_ms', lambda s: float(np.std(s.to_numpy(dtype=float), ddof=0))),
        mean_iters=('iterations', 'mean'),
    ).reset_index()
    return summary[SUMMARY_COLUMNS]


def write_rows_csv(rows: Union[Sequence[ReportRow], pd.DataFrame], path: Union[str, Path]) -> Path:
    df = rows if isinstance(rows, pd.DataFrame) else rows_to_frame(rows)
    out = df[ROW_COLUMNS].copy()
    out['ok'] = out['ok'].map({True: 'true', False: 'false'})
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    out.to_csv(path, index=False)
    return path


def read_rows_csv(path: Union[str, Path]) -> pd.DataFrame:
    df = pd.read_csv(path, true_values=['true'], false_values=['false'])
    missing = set(ROW_COLUMNS) - set(df.columns)
    if missing:
        raise ParameterError(f"{path}: missing columns {sorted(missing)}")
    df['iterations'] = df['iterations'].astype('Int64')
    return df


def write_summary_csv(summary: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    summary[SUMMARY_COLUMNS].to_csv(path, index=False)
    return path
