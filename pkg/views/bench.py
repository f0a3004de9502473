"""Benchmark page: small sweeps in-app, or summaries of rows CSVs from the CLI"""

import io
from datetime import datetime

import pandas as pd
import streamlit as st

from utils.bench import ExperimentConfig, read_rows_csv, rows_to_frame, run_sweep, summarize
from utils.errors import PhysarumError
from utils.graph import CATEGORIES
from utils.session import get_solver_config


def _parse_values(text: str):
    return tuple(float(v) for v in text.replace(';', ',').split(',') if v.strip())


def _sweep_form():
    col1, col2, col3 = st.columns(3)
    with col1:
        n = st.number_input("Nodes", min_value=5, max_value=500, value=50, step=5)
    with col2:
        p = st.number_input("Edge probability", min_value=0.005, max_value=1.0, value=0.08, format="%.3f")
    with col3:
        reps = st.number_input("Repetitions", min_value=1, max_value=20, value=2)

    col1, col2 = st.columns(2)
    with col1:
        rue_text = st.text_input("rue values", "0.1, 0.3")
    with col2:
        rcw_text = st.text_input("rcw values", "0.1, 0.3")
    categories = st.multiselect("Categories", CATEGORIES, default=list(CATEGORIES))
    base_seed = st.number_input("Base seed", min_value=0, value=0)

    if not st.button("⏱️ Run sweep", type="primary", use_container_width=True):
        return
    try:
        config = ExperimentConfig(
            datasets=((int(n), float(p)),), rue_values=_parse_values(rue_text), rcw_values=_parse_values(rcw_text),
            categories=tuple(categories), repetitions=int(reps), base_seed=int(base_seed),
            solver_config=get_solver_config(),
        )
        bar = st.progress(0.0)
        rows = run_sweep(config, progress=lambda done, total: bar.progress(done / total))
    except (PhysarumError, ValueError) as exc:
        st.error(f"❌ {exc}")
        return
    st.session_state.bench_rows = rows_to_frame(rows)
    st.session_state.bench_summary = summarize(rows, config.fixed_rue, config.fixed_rcw)


def _load_form():
    uploaded = st.file_uploader("rows.csv from `cli.py bench`", type=['csv'])
    if uploaded is None:
        return
    try:
        rows = read_rows_csv(io.BytesIO(uploaded.getvalue()))
        st.session_state.bench_rows = rows
        st.session_state.bench_summary = summarize(rows)
    except (PhysarumError, pd.errors.ParserError) as exc:
        st.error(f"❌ Could not read {uploaded.name}: {exc}")


def _excel_bytes(summary: pd.DataFrame, rows: pd.DataFrame) -> bytes:
    buf = io.BytesIO()
    with pd.ExcelWriter(buf, engine='openpyxl') as writer:
        summary.to_excel(writer, sheet_name='summary', index=False)
        rows.to_excel(writer, sheet_name='rows', index=False)
    return buf.getvalue()


def render_bench():
    """Render benchmark page"""
    st.markdown("""
    <div class="section-header">
        <h1 style="margin:0;color:#1e293b;">⏱️ Benchmark</h1>
        <p style="margin:0.5rem 0 0;color:#64748b;">Warm-start amoeba vs. cold amoeba vs. full recomputation</p>
    </div>
    """, unsafe_allow_html=True)

    tab_run, tab_load = st.tabs(["▶️ Run sweep", "📤 Load rows CSV"])
    with tab_run:
        _sweep_form()
    with tab_load:
        _load_form()

    summary = st.session_state.bench_summary
    rows = st.session_state.bench_rows
    if summary is None:
        st.info("No benchmark results yet.")
        return

    st.markdown("---")
    col1, col2, col3 = st.columns(3)
    with col1:
        st.metric("Rows", f"{len(rows):,}")
    with col2:
        st.metric("Cells", f"{len(summary):,}")
    with col3:
        st.metric("Oracle checks passed", f"{int(rows['ok'].sum()):,}/{len(rows):,}")

    algorithm = st.selectbox("Algorithm", ['all'] + list(summary['algorithm'].unique()))
    shown = summary if algorithm == 'all' else summary[summary['algorithm'] == algorithm]
    st.dataframe(shown, use_container_width=True, hide_index=True)

    pivot = summary.pivot_table(index=['dataset', 'category', 'param_name', 'param_value'],
                                columns='algorithm', values='mean_iters', sort=False)
    st.markdown("#### Mean iterations")
    st.dataframe(pivot.dropna(axis=1, how='all'), use_container_width=True)

    stamp = datetime.now().strftime('%Y%m%d')
    col1, col2 = st.columns(2)
    with col1:
        st.download_button(
            "📥 Download summary CSV",
            summary.to_csv(index=False),
            f"summary_{stamp}.csv",
            "text/csv",
            use_container_width=True
        )
    with col2:
        st.download_button(
            "📥 Download Excel",
            _excel_bytes(summary, rows),
            f"benchmark_{stamp}.xlsx",
            "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet",
            use_container_width=True
        )
