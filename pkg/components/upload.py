"""Graph upload and generation components"""

import io
from typing import Optional, Tuple

import streamlit as st

from utils.errors import ParameterError
from utils.formatters import edges_frame, format_number
from utils.graph import DirectedGraph, generate_erdos_renyi, read_graph


def show_graph_preview(graph: DirectedGraph, rows: int = 10) -> None:
    with st.expander("📋 Graph Preview", expanded=True):
        st.dataframe(edges_frame(graph).head(rows), use_container_width=True, hide_index=True)
        col1, col2, col3 = st.columns(3)
        with col1:
            st.metric("Nodes", format_number(graph.node_count))
        with col2:
            st.metric("Edges", format_number(graph.edge_count))
        with col3:
            mean = float(graph.lengths.mean()) if graph.edge_count else 0.0
            st.metric("Mean length", f"{mean:,.1f}")


def graph_upload_form() -> Optional[Tuple[str, DirectedGraph]]:
    """Uploaded ``n m`` + edge-list file, parsed; None until a valid file arrives."""
    uploaded = st.file_uploader("Graph file (n m header, then tail head length)", type=['txt', 'graph'])
    if uploaded is None:
        return None
    try:
        graph = read_graph(io.StringIO(uploaded.getvalue().decode()))
    except (ParameterError, UnicodeDecodeError) as exc:
        st.error(f"❌ Could not read {uploaded.name}: {exc}")
        return None
    return uploaded.name, graph


def graph_generator_form() -> Optional[Tuple[str, DirectedGraph]]:
    col1, col2, col3 = st.columns(3)
    with col1:
        n = st.number_input("Nodes", min_value=2, max_value=2000, value=50, step=10)
    with col2:
        p = st.number_input("Edge probability", min_value=0.001, max_value=1.0, value=0.08, step=0.01, format="%.3f")
    with col3:
        seed = st.number_input("Seed", min_value=0, value=1, step=1)

    col1, col2, col3 = st.columns(3)
    with col1:
        wmin = st.number_input("Min length", min_value=0.001, value=1.0)
    with col2:
        wmax = st.number_input("Max length", min_value=0.001, value=1000.0)
    with col3:
        integer = st.checkbox("Integer lengths", value=False)

    if not st.button("🎲 Generate", use_container_width=True):
        return None
    try:
        graph = generate_erdos_renyi(int(n), float(p), float(wmin), float(wmax), int(seed), integer)
    except ParameterError as exc:
        st.error(f"❌ {exc}")
        return None
    return f"er_n{int(n)}_p{p:g}_s{int(seed)}", graph
