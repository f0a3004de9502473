"""Physarum SPT - results explorer for the adaptive amoeba shortest path tree solver"""

import streamlit as st

from components.sidebar import render_sidebar
from utils.session import init_session_state

# Page config - MUST be first
st.set_page_config(
    page_title="Physarum SPT",
    page_icon="🧫",
    layout="wide",
    initial_sidebar_state="expanded"
)


def load_css():
    st.markdown("""
    <style>
    #MainMenu, footer {visibility: hidden;}
    [data-testid="stSidebarNav"] {display: none !important;}
    [data-testid="stSidebar"] {background: #14281d !important;}
    [data-testid="stSidebar"] * {color: #e6f4ea !important;}
    .sidebar-logo {text-align: center; padding: 0.5rem 0;}
    .sidebar-logo h1 {font-size: 1.4rem; margin: 0.25rem 0 0;}
    .main .block-container {padding-top: 2rem; max-width: 1400px;}
    .section-header {background: #f4f7f2; padding: 1.25rem 1.5rem; border-radius: 12px;
                     margin-bottom: 1.5rem; border-left: 4px solid #d4a017;}
    [data-testid="stMetric"] {border: 1px solid #dfe7dc; border-radius: 10px; padding: 0.75rem;}
    </style>
    """, unsafe_allow_html=True)


def main():
    """Main application entry point"""
    load_css()
    init_session_state()
    page = render_sidebar()

    if page == "🧫 Solver":
        from views.solver import render_solver
        render_solver()
    elif page == "🔄 Dynamic Update":
        from views.dynamic import render_dynamic
        render_dynamic()
    elif page == "⏱️ Benchmark":
        from views.bench import render_bench
        render_bench()
    elif page == "⚙️ Settings":
        from views.settings import render_settings
        render_settings()


if __name__ == "__main__":
    main()
