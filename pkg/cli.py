"""
Command-line entry point: graph generation, single solves, dynamic updates, flux traces and sweeps.

    python cli.py gen --nodes 500 --prob 0.02 --seed 1 --out g.txt
    python cli.py solve g.txt --algo amoeba --source 0
    python cli.py bench --config configs/sweep_small.json --out-dir results
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from utils import physarum
from utils.baselines import ALGORITHMS, label_setting_spt
from utils.bench import (ExperimentConfig, distances_match, run_sweep, summarize, write_rows_csv,
                         write_summary_csv)
from utils.errors import OracleMismatchError, ParameterError, PhysarumError
from utils.graph import (CATEGORIES, apply_updates, generate_erdos_renyi, read_graph, sample_updates,
                         write_graph)
from utils.physarum import ScheduledUpdate, SolveMode, SolverConfig

logger = logging.getLogger('cli')

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """Prints the full help on bad arguments instead of the one-line usage."""

    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(EXIT_USAGE, f"\n{self.prog}: error: {message}\n")


def _load_solver_config(path: Optional[str]) -> SolverConfig:
    if not path:
        return SolverConfig()
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{path}: invalid JSON ({exc})") from exc
    return SolverConfig.from_dict(data)


def _emit(payload: dict, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + '\n')
    else:
        print(text)


def _mode(args, source: int) -> SolveMode:
    if args.mode == 'two_terminal':
        if args.sink is None:
            raise UsageError("--sink is required with --mode two_terminal")
        return SolveMode.two_terminal(source, args.sink)
    return SolveMode.tree(source)


def cmd_gen(args) -> int:
    graph = generate_erdos_renyi(args.nodes, args.prob, args.weight_min, args.weight_max, args.seed,
                                 args.integer_weights)
    write_graph(graph, args.out)
    logger.info("wrote %r to %s", graph, args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    graph = read_graph(args.graph)
    if args.algo != 'amoeba':
        result = ALGORITHMS[args.algo](graph, args.source)
        _emit({'algorithm': args.algo, 'distances': list(result.distances),
               'relaxations': result.relaxations, 'wall_time_ms': result.wall_time * 1000.0}, args.out)
        return EXIT_OK

    mode = _mode(args, args.source)
    result = physarum.solve(graph, mode, _load_solver_config(args.config))
    oracle = label_setting_spt(graph, args.source).distances
    if mode.kind == 'two_terminal':
        ok = distances_match(result.distances[mode.sink:mode.sink + 1], oracle[mode.sink:mode.sink + 1])
    else:
        ok = distances_match(result.distances, oracle)
    payload = result.to_dict()
    payload.update(algorithm='amoeba', ok=ok)
    if result.diagnostic:
        payload['diagnostic'] = result.diagnostic
    _emit(payload, args.out)
    if not ok:
        logger.error("amoeba distances disagree with label setting")
        return EXIT_FAILURE
    return EXIT_OK


def cmd_update(args) -> int:
    graph = read_graph(args.graph)
    config = _load_solver_config(args.config)
    mode = SolveMode.tree(args.source)
    previous = physarum.solve(graph, mode, config)
    updates = sample_updates(graph, args.rue, args.rcw, args.category, args.seed)
    updated = apply_updates(graph, updates)
    warm = physarum.resolve_after_update(previous, updated, config)
    cold = physarum.solve(updated, mode, config)
    ok = distances_match(warm.distances, label_setting_spt(updated, args.source).distances)
    if args.out_graph:
        write_graph(updated, args.out_graph)

    _emit({
        'category': args.category, 'rue': args.rue, 'rcw': args.rcw, 'changed_edges': len(updates),
        'initial_iterations': previous.iterations_used,
        'warm_iterations': warm.iterations_used, 'cold_iterations': cold.iterations_used,
        'warm_wall_time_ms': warm.wall_time * 1000.0, 'cold_wall_time_ms': cold.wall_time * 1000.0,
        'converged': warm.converged, 'distances': list(warm.distances), 'ok': ok,
    }, args.out)
    return EXIT_OK if ok else EXIT_FAILURE


def _load_schedule(path: Optional[str], graph) -> List[ScheduledUpdate]:
    if not path:
        return []
    try:
        entries = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(entries, list):
        raise ParameterError(f"{path}: expected a JSON list of update events")

    schedule = []
    current = graph
    for entry in entries:
        try:
            updates = sample_updates(current, float(entry['rue']), float(entry['rcw']), entry['category'],
                                     int(entry.get('seed', 0)))
            schedule.append(ScheduledUpdate(int(entry['iteration']), updates))
        except (KeyError, TypeError) as exc:
            raise ParameterError(f"{path}: bad schedule entry {entry!r}") from exc
        current = apply_updates(current, updates)
    return schedule


def cmd_trace(args) -> int:
    graph = read_graph(args.graph)
    mode = _mode(args, args.source)
    series = physarum.trace(graph, mode, _load_solver_config(args.config), _load_schedule(args.schedule, graph))
    series.write_csv(args.out)
    if series.diagnostic:
        logger.warning(series.diagnostic)
    logger.info("wrote %d iterations to %s", len(series.iterations), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    out_dir = Path(args.out_dir or config.output_dir)
    started = time.perf_counter()
    rows = run_sweep(config)
    write_rows_csv(rows, out_dir / 'rows.csv')
    write_summary_csv(summarize(rows), out_dir / 'summary.csv')
    logger.info("%d rows in %.1fs written to %s", len(rows), time.perf_counter() - started, out_dir)
    return EXIT_OK


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog='physarum', description='Adaptive amoeba shortest path trees on directed graphs')
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=ArgumentParser)

    gen = sub.add_parser('gen', help='write a random directed graph')
    gen.add_argument('--nodes', type=int, required=True)
    gen.add_argument('--prob', type=float, required=True)
    gen.add_argument('--seed', type=int, default=0)
    gen.add_argument('--weight-min', type=float, default=1.0)
    gen.add_argument('--weight-max', type=float, default=1000.0)
    gen.add_argument('--integer-weights', action='store_true')
    gen.add_argument('--out', required=True)
    gen.set_defaults(func=cmd_gen)

    solve = sub.add_parser('solve', help='one shortest path tree run')
    solve.add_argument('graph')
    solve.add_argument('--algo', choices=['amoeba'] + sorted(ALGORITHMS), default='amoeba')
    solve.add_argument('--source', type=int, default=0)
    solve.add_argument('--mode', choices=physarum.MODES, default='tree')
    solve.add_argument('--sink', type=int)
    solve.add_argument('--config', help='solver settings JSON')
    solve.add_argument('--out', help='result JSON (default: stdout)')
    solve.set_defaults(func=cmd_solve)

    update = sub.add_parser('update', help='sample an edge-weight update and warm-resolve')
    update.add_argument('graph')
    update.add_argument('--rue', type=float, required=True)
    update.add_argument('--rcw', type=float, required=True)
    update.add_argument('--category', choices=CATEGORIES, required=True)
    update.add_argument('--seed', type=int, default=0)
    update.add_argument('--source', type=int, default=0)
    update.add_argument('--config', help='solver settings JSON')
    update.add_argument('--out-graph', help='write the updated graph here')
    update.add_argument('--out', help='result JSON (default: stdout)')
    update.set_defaults(func=cmd_update)

    tr = sub.add_parser('trace', help='per-iteration flux trajectory CSV')
    tr.add_argument('graph')
    tr.add_argument('--schedule', help='JSON list of {iteration, category, rue, rcw, seed}')
    tr.add_argument('--source', type=int, default=0)
    tr.add_argument('--mode', choices=physarum.MODES, default='tree')
    tr.add_argument('--sink', type=int)
    tr.add_argument('--config', help='solver settings JSON')
    tr.add_argument('--out', required=True)
    tr.set_defaults(func=cmd_trace)

    bench = sub.add_parser('bench', help='run a benchmark sweep')
    bench.add_argument('--config', required=True, help='experiment JSON')
    bench.add_argument('--out-dir')
    bench.set_defaults(func=cmd_bench)
    return parser


def cli(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_help(sys.stderr)
        logger.error(str(exc))
        return EXIT_USAGE
    except OracleMismatchError as exc:
        logger.error(str(exc))
        return EXIT_FAILURE
    except (ParameterError, FileNotFoundError) as exc:
        logger.error(str(exc))
        return EXIT_USAGE
    except PhysarumError as exc:
        logger.error(str(exc))
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(cli())
