"""Dynamic update page: warm-start re-solving after edge-weight changes"""

import io

import pandas as pd
import streamlit as st

from components.metrics import insight_box
from utils import physarum
from utils.baselines import recompute_on_update
from utils.bench import distances_match
from utils.errors import PhysarumError
from utils.formatters import format_ms
from utils.graph import CATEGORIES, RCW_LIMITS, apply_updates, sample_updates
from utils.physarum import ScheduledUpdate, SolveMode
from utils.session import get_active_graph, get_solver_config, record_update


def _update_controls(key: str):
    col1, col2, col3, col4 = st.columns(4)
    with col1:
        category = st.selectbox("Category", CATEGORIES, key=f"{key}_category")
    with col2:
        rue = st.slider("rue (share of edges)", 0.05, 1.0, 0.2, 0.05, key=f"{key}_rue")
    with col3:
        rcw = st.slider("rcw (relative change)", 0.05, RCW_LIMITS[category], 0.1, 0.05, key=f"{key}_rcw")
    with col4:
        seed = st.number_input("Seed", min_value=0, value=0, key=f"{key}_seed")
    return category, rue, rcw, int(seed)


def _warm_vs_cold(graph, mode, config):
    category, rue, rcw, seed = _update_controls('dyn')
    if not st.button("🔄 Apply update and re-solve", type="primary", use_container_width=True):
        return

    try:
        with st.spinner("Solving before the update..."):
            previous = physarum.solve(graph, mode, config)
        updates = sample_updates(graph, rue, rcw, category, seed)
        updated = apply_updates(graph, updates)
        with st.spinner("Warm and cold re-solve..."):
            warm = physarum.resolve_after_update(previous, updated, config)
            cold = physarum.solve(updated, mode, config)
        baseline = recompute_on_update(graph, updates, 'label_setting', mode.source)
    except PhysarumError as exc:
        st.error(f"❌ {exc}")
        return

    ok = distances_match(warm.distances, baseline.distances)
    record_update({
        'category': category, 'rue': rue, 'rcw': rcw, 'seed': seed, 'changed_edges': len(updates),
        'warm_iterations': warm.iterations_used, 'cold_iterations': cold.iterations_used,
        'warm_ms': warm.wall_time * 1000.0, 'cold_ms': cold.wall_time * 1000.0,
        'label_setting_ms': baseline.wall_time * 1000.0, 'ok': ok,
    })

    col1, col2, col3 = st.columns(3)
    with col1:
        st.metric("Warm start", f"{warm.iterations_used} it", format_ms(warm.wall_time * 1000.0), delta_color="off")
    with col2:
        st.metric("Cold start", f"{cold.iterations_used} it", format_ms(cold.wall_time * 1000.0), delta_color="off")
    with col3:
        st.metric("Label setting", format_ms(baseline.wall_time * 1000.0))

    if ok:
        insight_box(f"{len(updates)} edges changed; warm-start distances match a fresh label-setting run", 'positive')
    else:
        insight_box("Warm-start distances differ from label setting", 'negative')


def _trace_section(graph, mode, config):
    st.markdown("### 📈 Flux trace")
    category, rue, rcw, seed = _update_controls('trace')
    trigger = st.number_input("Apply update after iteration", min_value=1, value=20, step=5)
    if not st.button("🧪 Record trace", use_container_width=True):
        return

    try:
        updates = sample_updates(graph, rue, rcw, category, seed)
        with st.spinner("Tracing..."):
            series = physarum.trace(graph, mode, config, [ScheduledUpdate(int(trigger), updates)])
    except PhysarumError as exc:
        st.error(f"❌ {exc}")
        return

    if series.diagnostic:
        insight_box(series.diagnostic, 'warning')
    frame = series.to_frame()
    changed = frame.merge(pd.DataFrame({'edge_tail': graph.tails[list(updates.edge_ids)],
                                        'edge_head': graph.heads[list(updates.edge_ids)]}))
    st.caption(f"{len(series.iterations)} iterations recorded; showing the {len(updates)} updated edges")
    st.dataframe(changed, use_container_width=True, hide_index=True)

    buf = io.StringIO()
    series.write_csv(buf)
    st.download_button("📥 Download trace CSV", buf.getvalue(), "flux_trace.csv", "text/csv",
                       use_container_width=True)


def render_dynamic():
    """Render dynamic update page"""
    st.markdown("""
    <div class="section-header">
        <h1 style="margin:0;color:#1e293b;">🔄 Dynamic Update</h1>
        <p style="margin:0.5rem 0 0;color:#64748b;">Change edge lengths and continue from the converged conductivities</p>
    </div>
    """, unsafe_allow_html=True)

    graph = get_active_graph()
    if graph is None:
        st.info("📁 No graph loaded. Load one on the Solver page.")
        return

    mode = SolveMode.tree(min(st.session_state.source, graph.node_count - 1))
    config = get_solver_config()
    _warm_vs_cold(graph, mode, config)

    history = st.session_state.update_history
    if history:
        st.markdown("#### History")
        st.dataframe(pd.DataFrame(history), use_container_width=True, hide_index=True)

    st.markdown("---")
    _trace_section(graph, mode, config)
