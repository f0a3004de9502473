"""KPI metric components"""

import streamlit as st

from utils.formatters import format_ms, format_number
from utils.physarum import SptResult


def insight_box(message: str, type: str = "info") -> None:
    icons = {'positive': '✅', 'warning': '⚠️', 'negative': '🚨', 'info': '💡'}
    icon = icons.get(type, '💡')

    if type == 'warning':
        st.warning(f"{icon} {message}")
    elif type == 'negative':
        st.error(f"{icon} {message}")
    elif type == 'positive':
        st.success(f"{icon} {message}")
    else:
        st.info(f"{icon} {message}")


def solver_metrics(result: SptResult) -> None:
    col1, col2, col3, col4 = st.columns(4)
    with col1:
        st.metric("Iterations", format_number(result.iterations_used))
    with col2:
        st.metric("Wall time", format_ms(result.wall_time * 1000.0))
    with col3:
        st.metric("Support edges", format_number(len(result.support)))
    with col4:
        st.metric("Last ΣΔD", f"{result.state.last_delta:.2e}")

    if result.converged:
        insight_box("Converged: conductivities settled below the threshold", 'positive')
    else:
        insight_box(result.diagnostic or "Did not converge", 'warning')
