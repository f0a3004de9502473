"""Session state management"""

from datetime import datetime
from typing import Any, MutableMapping, Optional

import streamlit as st

from utils.graph import DirectedGraph
from utils.physarum import SolverConfig


def _state(state: Optional[MutableMapping[str, Any]]) -> MutableMapping[str, Any]:
    return st.session_state if state is None else state


def init_session_state(state: Optional[MutableMapping[str, Any]] = None):
    """Initialize all session state variables."""
    state = _state(state)
    defaults = {
        'graphs': {},
        'active_graph': None,
        'solver_config': SolverConfig().to_dict(),
        'source': 0,
        'last_result': None,
        'baseline_results': {},
        'update_history': [],
        'bench_rows': None,
        'bench_summary': None,
    }

    for key, value in defaults.items():
        if key not in state:
            state[key] = value


def get_solver_config(state: Optional[MutableMapping[str, Any]] = None) -> SolverConfig:
    return SolverConfig.from_dict(_state(state)['solver_config'])


def set_solver_config(config: SolverConfig, state: Optional[MutableMapping[str, Any]] = None):
    _state(state)['solver_config'] = config.to_dict()


def get_active_graph(state: Optional[MutableMapping[str, Any]] = None) -> Optional[DirectedGraph]:
    """Get currently active graph or None."""
    state = _state(state)
    if state['active_graph']:
        entry = state['graphs'].get(state['active_graph'])
        return entry['graph'] if entry else None
    return None


def add_graph(name: str, graph: DirectedGraph, origin: str = '', state: Optional[MutableMapping[str, Any]] = None):
    """Add a graph and make it active; results of the previous graph are dropped."""
    state = _state(state)
    state['graphs'][name] = {
        'graph': graph,
        'origin': origin,
        'added_at': datetime.now(),
    }
    state['active_graph'] = name
    clear_results(state)


def remove_graph(name: str, state: Optional[MutableMapping[str, Any]] = None):
    state = _state(state)
    if name in state['graphs']:
        del state['graphs'][name]
        if state['active_graph'] == name:
            names = list(state['graphs'].keys())
            state['active_graph'] = names[0] if names else None
            clear_results(state)


def clear_results(state: Optional[MutableMapping[str, Any]] = None):
    state = _state(state)
    state['last_result'] = None
    state['baseline_results'] = {}
    state['update_history'] = []


def record_update(summary: dict, state: Optional[MutableMapping[str, Any]] = None):
    """Append a warm-vs-cold comparison to the update history."""
    entry = dict(summary)
    entry['timestamp'] = datetime.now()
    _state(state)['update_history'].append(entry)
