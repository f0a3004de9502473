"""Navigation sidebar"""

import streamlit as st

from utils.formatters import format_number
from utils.session import get_active_graph

PAGES = ["🧫 Solver", "🔄 Dynamic Update", "⏱️ Benchmark", "⚙️ Settings"]


def render_sidebar() -> str:
    with st.sidebar:
        st.markdown("""
        <div class="sidebar-logo">
            <span style="font-size: 2.5rem;">🧫</span>
            <h1>Physarum SPT</h1>
            <p style="color: #64748b; font-size: 0.8rem;">Adaptive shortest path trees</p>
        </div>
        """, unsafe_allow_html=True)

        st.divider()

        page = st.radio("Navigation", PAGES, label_visibility="collapsed")

        st.divider()

        if st.session_state.graphs:
            st.markdown("**📂 Active Graph**")
            names = list(st.session_state.graphs.keys())
            current_index = names.index(st.session_state.active_graph) if st.session_state.active_graph in names else 0

            selected = st.selectbox("Graph", names, index=current_index, label_visibility="collapsed")

            if selected != st.session_state.active_graph:
                st.session_state.active_graph = selected
                st.rerun()

            graph = get_active_graph()
            st.caption(f"🔵 {format_number(graph.node_count)} nodes | ➡️ {format_number(graph.edge_count)} edges")
            st.caption(f"📍 source node {st.session_state.source}")
        else:
            st.info("📁 No graph loaded")

        st.divider()
        st.caption("Physarum SPT v1.0")

    return page
