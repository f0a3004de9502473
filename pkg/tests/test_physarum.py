import io
import math

import numpy as np
import pytest

from conftest import SIX_NODE_DISTANCES
from utils import physarum
from utils.baselines import label_setting_spt
from utils.bench import distances_match, draw_reachable_graph
from utils.errors import ParameterError, UnreachableNodeError
from utils.graph import DirectedGraph, UpdateSet, apply_updates
from utils.physarum import PhysarumState, ScheduledUpdate, SolveMode, SolverConfig

TIGHT = SolverConfig(delta=1e-10, max_iterations=2000)


class TestConfig:

    @pytest.mark.parametrize('changes', [
        {'dt': 0.0}, {'dt': 1.0}, {'delta': 0.0}, {'flux_epsilon': 1.5}, {'max_iterations': 0},
        {'update_rule': 'implicit'}, {'init': 'zeros'}, {'stop_criterion': 'pressure'}, {'revival': -1.0},
    ])
    def test_rejects_invalid(self, changes):
        with pytest.raises(ParameterError):
            SolverConfig(**changes)

    def test_auto_budgets(self):
        config = SolverConfig()
        assert config.delta_for(200) == pytest.approx(2e-4)
        assert config.iterations_for(50) == physarum.MIN_AUTO_ITERATIONS == 10_000
        assert config.iterations_for(2000) == 20_000
        assert SolverConfig(delta=1e-3, max_iterations=7).delta_for(200) == 1e-3

    def test_dict_round_trip(self):
        config = SolverConfig(dt=0.3, update_rule='semi_implicit', max_iterations=99)
        assert SolverConfig.from_dict(config.to_dict()) == config

    def test_unknown_setting(self):
        with pytest.raises(ParameterError, match="unknown"):
            SolverConfig.from_dict({'dt': 0.5, 'gamma': 2})


class TestMode:

    def test_grounds(self):
        assert SolveMode.two_terminal(0, 2).ground == 2
        assert SolveMode.tree(3).ground == 3

    def test_sink_must_differ(self):
        with pytest.raises(ParameterError):
            SolveMode.two_terminal(1, 1)

    def test_tree_takes_no_sink(self):
        with pytest.raises(ParameterError):
            SolveMode('tree', 0, 2)


class TestPressureRhs:

    def test_two_terminal(self):
        assert physarum.pressure_rhs(SolveMode.two_terminal(0, 2), 3).tolist() == [1.0, 0.0, -1.0]

    def test_tree(self):
        assert physarum.pressure_rhs(SolveMode.tree(0), 5).tolist() == [1.0, -0.25, -0.25, -0.25, -0.25]

    def test_two_nodes_collapse(self):
        tree = physarum.pressure_rhs(SolveMode.tree(0), 2)
        assert tree.tolist() == physarum.pressure_rhs(SolveMode.two_terminal(0, 1), 2).tolist()

    @pytest.mark.parametrize('n', [7, 13, 1000])
    def test_sums_to_exactly_zero(self, n):
        rhs = physarum.pressure_rhs(SolveMode.tree(2), n)
        assert rhs.sum() == 0.0
        assert rhs[2] == 1.0
        assert np.delete(rhs, 2) == pytest.approx(np.full(n - 1, -1.0 / (n - 1)), rel=1e-8)

    @pytest.mark.parametrize('n, current', [(7, 1.0), (1000, 1.0), (13, 3.0)])
    def test_shares_within_one_grid_step(self, n, current):
        rhs = np.delete(physarum.pressure_rhs(SolveMode.tree(0), n, current), 0)
        grid = math.ldexp(1.0, math.frexp(current)[1] - 42)
        assert np.all(np.abs(rhs + current / (n - 1)) <= grid)
        assert rhs.max() - rhs.min() <= grid

    def test_node_out_of_range(self):
        with pytest.raises(ParameterError):
            physarum.pressure_rhs(SolveMode.tree(4), 3)


def _state(conductivity, node_count):
    m = len(conductivity)
    return PhysarumState(np.asarray(conductivity, dtype=float), np.zeros(node_count), np.zeros(m))


class TestStep:

    def test_unit_path_fixed_point(self, unit_path):
        mode = SolveMode.two_terminal(0, 2)
        rhs = physarum.pressure_rhs(mode, 3)
        new = physarum.step(unit_path, _state([1.0, 1.0], 3), rhs, mode.ground, SolverConfig())
        assert new.pressure == pytest.approx([2.0, 1.0, 0.0])
        assert new.flux == pytest.approx([1.0, 1.0])
        assert new.conductivity == pytest.approx([1.0, 1.0])
        assert new.iteration == 1
        assert new.last_delta == pytest.approx(0.0, abs=1e-12)

    def test_explicit_growth(self, unit_path):
        mode = SolveMode.two_terminal(0, 2)
        new = physarum.step(unit_path, _state([0.5, 0.5], 3), physarum.pressure_rhs(mode, 3), 2, SolverConfig())
        assert new.flux == pytest.approx([1.0, 1.0])
        assert new.conductivity == pytest.approx([0.75, 0.75])

    def test_semi_implicit_growth(self, unit_path):
        config = SolverConfig(update_rule='semi_implicit')
        mode = SolveMode.two_terminal(0, 2)
        new = physarum.step(unit_path, _state([0.5, 0.5], 3), physarum.pressure_rhs(mode, 3), 2, config)
        assert new.conductivity == pytest.approx([2 / 3, 2 / 3])

    def test_reverse_edge_is_cut_and_decays(self):
        # 2 -> 0 runs from the sink back to the source, so its pressure drop is always negative
        graph = DirectedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])
        mode = SolveMode.two_terminal(0, 2)
        rhs = physarum.pressure_rhs(mode, 3)
        state = physarum.initial_state(graph, SolverConfig())
        for k in range(1, 6):
            state = physarum.step(graph, state, rhs, mode.ground, SolverConfig())
            assert state.flux[2] == 0.0
            assert state.conductivity[2] == 0.5 ** k
            assert np.all(state.flux >= 0)
        assert state.pressure[2] == 0.0

    def test_floor_holds(self):
        graph = DirectedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])
        config = SolverConfig(dt=0.9, conductivity_floor=1e-3)
        mode = SolveMode.two_terminal(0, 2)
        state = physarum.initial_state(graph, config)
        for _ in range(10):
            state = physarum.step(graph, state, physarum.pressure_rhs(mode, 3), 2, config)
        assert state.conductivity[2] == 1e-3

    def test_wrong_state_shape(self, unit_path):
        with pytest.raises(ParameterError):
            physarum.step(unit_path, _state([1.0], 3), np.array([1.0, 0.0, -1.0]), 2, SolverConfig())

    def test_tree_mode_conserves_flux(self, six_node):
        mode = SolveMode.tree(0)
        rhs = physarum.pressure_rhs(mode, 6)
        state = physarum.initial_state(six_node, SolverConfig())
        for _ in range(30):
            state = physarum.step(six_node, state, rhs, mode.ground, SolverConfig())
            assert state.conservation_residual <= 1e-8
            assert state.pressure[0] == 0.0


class TestConverged:

    def test_not_before_first_step(self, unit_path):
        state = physarum.initial_state(unit_path, SolverConfig())
        assert not physarum.converged(state, SolverConfig(delta=1.0))

    @pytest.mark.parametrize('last_delta, expected', [(0.0, True), (1e-7, True), (1e-3, False)])
    def test_threshold(self, last_delta, expected):
        state = PhysarumState(np.ones(2), np.zeros(3), np.ones(2), iteration=4, last_delta=last_delta)
        assert physarum.converged(state, SolverConfig(delta=1e-6)) is expected

    def test_flux_criterion(self):
        state = PhysarumState(np.ones(2), np.zeros(3), np.ones(2), iteration=4, last_delta=1.0, flux_delta=0.0)
        assert physarum.converged(state, SolverConfig(delta=1e-6, stop_criterion='flux'))
        assert not physarum.converged(state, SolverConfig(delta=1e-6))


def _starved_detour():
    # 0 -> 2 is shorter than the pressure drop 2 that the 0 -> 1 -> 2 path sets up
    graph = DirectedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.5)])
    mode = SolveMode.two_terminal(0, 2)
    return graph, mode, _state([1.0, 1.0, 1e-12], 3)


class TestLifting:

    def test_starved_edge_is_lifted(self):
        graph, mode, state = _starved_detour()
        new = physarum.step(graph, state, physarum.pressure_rhs(mode, 3), mode.ground, SolverConfig())
        assert new.pressure[0] == pytest.approx(2.0)
        assert new.lifted == 1
        assert new.conductivity[2] == pytest.approx(4.0 * 0.05 * 1.0)
        assert new.conductivity[:2] == pytest.approx([1.0, 1.0], rel=1e-9)

    @pytest.mark.parametrize('config', [SolverConfig(revival=0.0), SolverConfig(growth_tolerance=None)])
    def test_lifting_off(self, config):
        graph, mode, state = _starved_detour()
        new = physarum.step(graph, state, physarum.pressure_rhs(mode, 3), mode.ground, config)
        assert new.lifted == 0
        assert new.conductivity[2] < 1e-11

    def test_revival_level(self):
        config = SolverConfig(revival=2.0, flux_epsilon=0.1)
        assert config.revival_level(0.2) == pytest.approx(0.04)
        assert SolverConfig(growth_tolerance=None).revival_level(0.2) == 0.0

    def test_thick_edges_are_left_alone(self, triangle):
        mode = SolveMode.two_terminal(0, 2)
        state = physarum.initial_state(triangle, SolverConfig())
        for _ in range(40):
            state = physarum.step(triangle, state, physarum.pressure_rhs(mode, 3), mode.ground, SolverConfig())
            assert state.lifted == 0

    def test_lift_blocks_settling(self, unit_path):
        pressure = np.array([2.0, 1.0, 0.0])
        calm = PhysarumState(np.ones(2), pressure, np.ones(2), iteration=4, last_delta=0.0)
        lifted = PhysarumState(np.ones(2), pressure, np.ones(2), iteration=4, last_delta=0.0, lifted=1)
        assert physarum.settled(unit_path, calm, SolverConfig())
        assert not physarum.settled(unit_path, lifted, SolverConfig())

    def test_growing_edge_blocks_settling(self):
        graph, _, _ = _starved_detour()
        state = PhysarumState(np.ones(3), np.array([2.0, 1.0, 0.0]), np.ones(3), iteration=4, last_delta=0.0)
        assert list(physarum.growing_edges(graph, state, SolverConfig())) == [2]
        assert not physarum.settled(graph, state, SolverConfig())
        assert physarum.settled(graph, state, SolverConfig(growth_tolerance=0.5))


class TestTwoTerminal:

    def test_unit_path(self, unit_path):
        result = physarum.solve(unit_path, SolveMode.two_terminal(0, 2))
        assert result.converged
        assert result.iterations_used <= 2
        assert result.state.pressure[0] - result.state.pressure[2] == pytest.approx(2.0)
        assert result.support == (0, 1)
        assert result.distances == pytest.approx((0.0, 1.0, 2.0))

    def test_triangle_drops_long_edge(self, triangle):
        result = physarum.solve(triangle, SolveMode.two_terminal(0, 2), SolverConfig(max_iterations=500))
        assert result.converged
        assert result.support == (0, 1)
        assert result.state.pressure[0] - result.state.pressure[2] == pytest.approx(2.0, rel=1e-4)

    def test_tie_keeps_both_paths(self, two_path_tie):
        result = physarum.solve(two_path_tie, SolveMode.two_terminal(0, 3), SolverConfig(max_iterations=200))
        assert result.converged
        assert result.support == (0, 1, 2, 3)
        assert result.state.flux == pytest.approx([0.5] * 4, rel=1e-4)
        assert result.state.pressure[0] - result.state.pressure[3] == pytest.approx(2.0, rel=1e-4)

    def test_unreachable_sink(self):
        graph = DirectedGraph.from_edges(3, [(0, 1, 1.0), (2, 1, 1.0)])
        with pytest.raises(UnreachableNodeError) as info:
            physarum.solve(graph, SolveMode.two_terminal(0, 2))
        assert info.value.nodes == (2,)


class TestTreeMode:

    def test_unique_tree(self, six_node):
        result = physarum.solve(six_node, SolveMode.tree(0), TIGHT)
        assert result.converged
        assert result.support == label_setting_spt(six_node, 0).tree_edges()
        assert result.distances == pytest.approx(SIX_NODE_DISTANCES)
        assert result.support_edges() == [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]

    @pytest.mark.parametrize('seed', [4, 25, 60])
    def test_random_graph_converges_with_defaults(self, seed):
        graph, _, _ = draw_reachable_graph(20, 0.2, seed)
        result = physarum.solve(graph, SolveMode.tree(0))
        assert result.converged, result.diagnostic
        assert result.iterations_used < SolverConfig().iterations_for(20)
        assert distances_match(result.distances, label_setting_spt(graph, 0).distances)

    def test_tree_fluxes(self, six_node):
        result = physarum.solve(six_node, SolveMode.tree(0), TIGHT)
        flux = result.state.flux[list(result.support)]
        assert flux == pytest.approx([1.0, 0.8, 0.6, 0.4, 0.2], rel=1e-6)

    def test_equilibrium_properties(self, six_node):
        result = physarum.solve(six_node, SolveMode.tree(0), TIGHT)
        state = result.state
        support = list(result.support)
        u = physarum.pressure_differences(six_node, state)
        L = six_node.lengths

        assert np.max(np.abs(state.flux[support] - state.conductivity[support])) <= 10 * TIGHT.delta
        assert np.all(np.abs(u[support] - L[support]) <= 1e-4 * L[support])
        forward = u >= 0
        assert np.all(u[forward] <= L[forward] + 1e-6)

        d = np.array(result.distances)
        for e in support:
            tail, head = six_node.tails[e], six_node.heads[e]
            assert d[tail] + L[e] - d[head] <= 1e-6 * d[head] + 1e-9

    def test_tie_support_is_a_dag(self, five_node_tie):
        result = physarum.solve(five_node_tie, SolveMode.tree(0), SolverConfig(max_iterations=2000))
        assert result.converged
        assert set(result.support_edges()) == {(0, 1), (1, 2), (1, 3), (3, 2), (0, 4)}
        assert result.distances == pytest.approx((0.0, 1.0, 3.0, 2.0, 3.0))

    def test_unreachable_nodes_named(self):
        graph = DirectedGraph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])
        with pytest.raises(UnreachableNodeError) as info:
            physarum.solve(graph, SolveMode.tree(0))
        assert info.value.nodes == (2, 3)

    def test_budget_exhaustion_is_not_an_error(self, six_node):
        result = physarum.solve(six_node, SolveMode.tree(0), SolverConfig(max_iterations=2))
        assert not result.converged
        assert result.iterations_used == 2
        assert "no convergence" in result.diagnostic

    def test_random_initialization(self, six_node):
        config = SolverConfig(init='random', init_seed=4, delta=1e-10, max_iterations=2000)
        result = physarum.solve(six_node, SolveMode.tree(0), config)
        assert result.distances == pytest.approx(SIX_NODE_DISTANCES)

    def test_semi_implicit_rule(self, six_node):
        config = SolverConfig(update_rule='semi_implicit', delta=1e-10, max_iterations=2000)
        result = physarum.solve(six_node, SolveMode.tree(0), config)
        assert result.converged
        assert result.support == (0, 2, 4, 6, 8)

    def test_result_json_fields(self, six_node):
        payload = physarum.solve(six_node, SolveMode.tree(0), TIGHT).to_dict()
        assert set(payload) == {'mode', 'converged', 'iterations', 'distances', 'support', 'wall_time_ms'}
        assert payload['mode'] == 'tree'
        assert payload['support'][0] == [0, 1]


class TestSupport:

    def test_threshold_scales_with_sinks(self):
        state = PhysarumState(np.ones(3), np.zeros(5), np.array([0.02, 0.013, 0.001]), iteration=1)
        config = SolverConfig(flux_epsilon=0.05)
        assert physarum.extract_support(state, SolveMode.tree(0), config) == (0, 1)
        assert physarum.extract_support(state, SolveMode.two_terminal(0, 4), config) == ()

    def test_distances_from_empty_support(self, six_node):
        assert physarum.distances_from_support(six_node, (), 0) == (0.0,) + (None,) * 5

    def test_distances_from_chain(self, unit_path):
        assert physarum.distances_from_support(unit_path, (0, 1), 0) == (0.0, 1.0, 2.0)


# 1 -> 2 and 3 -> 4 get longer; the cheapest route to 2 becomes the direct edge 0 -> 2
INCREASE = UpdateSet(((2, 4.0), (6, 2.0)), 'increase', 0.2, 1.0)
# 0 -> 2 gets shorter and takes over from 0 -> 1 -> 2
DECREASE = UpdateSet(((1, 2.0),), 'decrease', 0.1, 0.6)


class TestWarmStart:

    def test_no_op_update(self, six_node):
        config = SolverConfig(max_iterations=1000)
        previous = physarum.solve(six_node, SolveMode.tree(0), config)
        result = physarum.resolve_after_update(previous, apply_updates(six_node, UpdateSet.empty()), config)
        assert result.converged
        assert result.iterations_used <= 2
        assert result.support == previous.support

    def test_increase_reroutes(self, six_node):
        config = SolverConfig(max_iterations=5000)
        previous = physarum.solve(six_node, SolveMode.tree(0), config)
        updated = apply_updates(six_node, INCREASE)
        result = physarum.resolve_after_update(previous, updated, config)
        assert result.converged
        assert result.distances == pytest.approx((0.0, 2.0, 5.0, 7.0, 9.0, 10.0))
        assert 1 in result.support
        assert 2 not in result.support
        assert result.support == label_setting_spt(updated, 0).tree_edges()

    def test_decrease_reroutes(self, six_node):
        config = SolverConfig(max_iterations=5000)
        previous = physarum.solve(six_node, SolveMode.tree(0), config)
        updated = apply_updates(six_node, DECREASE)
        warm = physarum.resolve_after_update(previous, updated, config)
        cold = physarum.solve(updated, SolveMode.tree(0), config)
        assert warm.distances == pytest.approx((0.0, 2.0, 2.0, 4.0, 5.0, 6.0))
        assert warm.support == cold.support == (0, 1, 4, 6, 8)

    def test_narrow_win_costs_more_than_wide_one(self):
        # 0 -> 2 -> 1 (10.5) loses to 0 -> 1 (10); shortening 2 -> 1 by 10% wins by 0.05, by 30% by 1.15
        graph = DirectedGraph.from_edges(3, [(0, 1, 10.0), (0, 2, 5.0), (2, 1, 5.5)])
        previous = physarum.solve(graph, SolveMode.tree(0))
        iterations = {}
        for rcw in (0.1, 0.3):
            shorter = 5.5 * (1 - rcw)
            updated = apply_updates(graph, UpdateSet(((2, shorter),), 'decrease', 1 / 3, rcw))
            result = physarum.resolve_after_update(previous, updated)
            assert result.converged
            assert result.support == (1, 2)
            assert result.distances == pytest.approx((0.0, 5.0 + shorter, 5.0))
            iterations[rcw] = result.iterations_used
        assert iterations[0.1] > 2 * iterations[0.3]

    def test_topology_must_match(self, six_node):
        previous = physarum.solve(six_node, SolveMode.tree(0), SolverConfig(max_iterations=1000))
        with pytest.raises(ParameterError, match="nodes and edges"):
            physarum.resolve_after_update(previous, six_node.subgraph(range(9)))

    def test_iterations_restart(self, six_node):
        config = SolverConfig(max_iterations=1000)
        previous = physarum.solve(six_node, SolveMode.tree(0), config)
        result = physarum.resolve_after_update(previous, apply_updates(six_node, DECREASE), config)
        assert result.state.iteration == result.iterations_used


class TestTrace:

    def test_static_run_ends_converged(self, six_node):
        series = physarum.trace(six_node, SolveMode.tree(0), SolverConfig(max_iterations=1000))
        assert series.converged
        assert series.flux.shape == (len(series.iterations), six_node.edge_count)
        assert series.iterations.tolist() == list(range(1, len(series.iterations) + 1))
        assert series.last_delta[-1] <= SolverConfig().delta_for(six_node.edge_count)
        assert np.max(series.conservation_residual) <= 1e-8

    def test_increase_event_drains_displaced_edge(self, six_node):
        config = SolverConfig(max_iterations=5000)
        series = physarum.trace(six_node, SolveMode.tree(0), config, [ScheduledUpdate(150, INCREASE)])
        assert series.converged
        assert series.events == ((150, 'increase'),)
        displaced = series.edge_series(2)
        assert displaced[149] == pytest.approx(0.8, rel=1e-3)
        assert displaced[-1] < 0.01
        assert series.edge_series(1)[-1] == pytest.approx(0.8, rel=1e-3)

    def test_decrease_event_leaves_downstream_flux(self, six_node):
        config = SolverConfig(max_iterations=5000)
        series = physarum.trace(six_node, SolveMode.tree(0), config, [ScheduledUpdate(150, DECREASE)])
        assert series.converged
        for edge, expected in ((6, 0.4), (8, 0.2)):
            after = series.edge_series(edge)[149:]
            assert np.all(np.abs(after - expected) <= 0.01 * expected)

    def test_schedule_must_increase(self, six_node):
        schedule = [ScheduledUpdate(10, DECREASE), ScheduledUpdate(10, INCREASE)]
        with pytest.raises(ParameterError):
            physarum.trace(six_node, SolveMode.tree(0), SolverConfig(), schedule)

    def test_csv_layout(self, unit_path):
        series = physarum.trace(unit_path, SolveMode.tree(0), SolverConfig(max_iterations=50),
                                [ScheduledUpdate(2, UpdateSet(((0, 2.0),), 'increase', 0.5, 1.0))])
        buf = io.StringIO()
        series.write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == 'iteration,edge_tail,edge_head,flux,conductivity'
        assert lines[1].startswith('1,0,1,')
        assert lines[5] == '# update iteration=2 category=increase'
        assert lines[6].startswith('3,0,1,')
        assert len(series.to_frame()) == 2 * len(series.iterations)
