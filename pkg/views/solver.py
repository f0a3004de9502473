"""Solver page: load a graph, run the amoeba solver and the classical baselines"""

import json
import logging

import streamlit as st

from components.metrics import insight_box, solver_metrics
from components.upload import graph_generator_form, graph_upload_form, show_graph_preview
from utils import physarum
from utils.baselines import ALGORITHMS
from utils.bench import distances_match
from utils.errors import PhysarumError
from utils.formatters import distances_frame, edges_frame, format_ms
from utils.physarum import SolveMode
from utils.session import add_graph, get_active_graph, get_solver_config

logger = logging.getLogger(__name__)


def _load_section():
    tab_gen, tab_upload = st.tabs(["🎲 Generate", "📤 Upload"])
    with tab_gen:
        loaded = graph_generator_form()
    with tab_upload:
        loaded = graph_upload_form() or loaded
    if loaded:
        name, graph = loaded
        add_graph(name, graph, origin='upload' if name.endswith(('.txt', '.graph')) else 'generated')
        st.success(f"✅ Loaded {name}")
        st.rerun()


def render_solver():
    """Render solver page"""
    st.markdown("""
    <div class="section-header">
        <h1 style="margin:0;color:#1e293b;">🧫 Solver</h1>
        <p style="margin:0.5rem 0 0;color:#64748b;">Shortest path trees by flux adaptation, checked against label setting</p>
    </div>
    """, unsafe_allow_html=True)

    with st.expander("📁 Load graph", expanded=get_active_graph() is None):
        _load_section()

    graph = get_active_graph()
    if graph is None:
        st.info("📁 No graph loaded. Generate or upload one to start.")
        return
    show_graph_preview(graph)

    col1, col2, col3 = st.columns(3)
    with col1:
        mode_kind = st.selectbox("Mode", physarum.MODES, index=1)
    with col2:
        source = st.number_input("Source", min_value=0, max_value=graph.node_count - 1,
                                 value=min(st.session_state.source, graph.node_count - 1))
        st.session_state.source = int(source)
    with col3:
        sink = st.number_input("Sink", min_value=0, max_value=graph.node_count - 1,
                               value=graph.node_count - 1, disabled=mode_kind == 'tree')

    if st.button("▶️ Run all algorithms", type="primary", use_container_width=True):
        try:
            mode = SolveMode.tree(source) if mode_kind == 'tree' else SolveMode.two_terminal(source, sink)
            with st.spinner("Iterating..."):
                st.session_state.last_result = physarum.solve(graph, mode, get_solver_config())
            st.session_state.baseline_results = {name: algo(graph, int(source)) for name, algo in ALGORITHMS.items()}
        except PhysarumError as exc:
            logger.warning("solver page run failed: %s", exc)
            st.error(f"❌ {exc}")
            return

    result = st.session_state.last_result
    if result is None or result.graph is not graph:
        return

    st.markdown("---")
    solver_metrics(result)

    baselines = st.session_state.baseline_results
    oracle = baselines['label_setting'].distances
    if result.mode.kind == 'tree':
        ok = distances_match(result.distances, oracle)
    else:
        sink = result.mode.sink
        ok = distances_match(result.distances[sink:sink + 1], oracle[sink:sink + 1])
    if ok:
        insight_box("Amoeba distances match label setting", 'positive')
    else:
        insight_box("Amoeba distances differ from label setting", 'negative')

    col1, col2 = st.columns(2)
    with col1:
        st.metric("Label setting", format_ms(baselines['label_setting'].wall_time * 1000.0))
    with col2:
        st.metric("Bellman-Ford", format_ms(baselines['bellman_ford'].wall_time * 1000.0))

    tab_dist, tab_support = st.tabs(["📏 Distances", "🕸️ Support"])
    with tab_dist:
        table = distances_frame({
            'amoeba': result.distances,
            'label_setting': oracle,
            'bellman_ford': baselines['bellman_ford'].distances,
        })
        st.dataframe(table, use_container_width=True, hide_index=True)
    with tab_support:
        state = result.state
        support = edges_frame(graph, result.support, flux=state.flux, conductivity=state.conductivity)
        st.dataframe(support, use_container_width=True, hide_index=True)

    st.download_button(
        "📥 Download result JSON",
        json.dumps(result.to_dict(), indent=2),
        "amoeba_result.json",
        "application/json",
        use_container_width=True
    )
