"""Settings page: solver parameters with JSON import and export"""

import json

import streamlit as st

from utils.errors import ParameterError
from utils.physarum import INIT_SCHEMES, STOP_CRITERIA, UPDATE_RULES, SolverConfig
from utils.session import get_solver_config, set_solver_config


def _solver_form(current: SolverConfig):
    col1, col2 = st.columns(2)
    with col1:
        dt = st.number_input("Time step Δt", min_value=0.01, max_value=0.99, value=current.dt, step=0.05,
                             key="settings_dt")
        flux_epsilon = st.number_input("Support threshold (share of per-sink flux)", min_value=0.001,
                                       max_value=0.999, value=current.flux_epsilon, step=0.01, format="%.3f",
                                       key="settings_eps")
        update_rule = st.selectbox("Update rule", UPDATE_RULES, index=UPDATE_RULES.index(current.update_rule),
                                   key="settings_rule")
        stop = st.selectbox("Stop on change of", STOP_CRITERIA, index=STOP_CRITERIA.index(current.stop_criterion),
                            key="settings_stop")
        revival = st.number_input("Starved-edge revival (× support threshold, 0 = off)", min_value=0.0,
                                  value=current.revival, step=1.0, key="settings_revival")
    with col2:
        auto_delta = st.checkbox("Automatic δ (1e-6 per edge)", value=current.delta is None, key="settings_auto_delta")
        delta = st.number_input("δ", min_value=1e-14, value=current.delta or 1e-6, format="%.2e",
                                disabled=auto_delta, key="settings_delta")
        auto_iters = st.checkbox("Automatic iteration budget (10 per node, at least 10,000)",
                                 value=current.max_iterations is None, key="settings_auto_iters")
        max_iterations = st.number_input("Max iterations", min_value=1, value=current.max_iterations or 1000,
                                         disabled=auto_iters, key="settings_iters")
        init = st.selectbox("Initial conductivity", INIT_SCHEMES, index=INIT_SCHEMES.index(current.init),
                            key="settings_init")
        init_seed = st.number_input("Initialization seed", min_value=0, value=current.init_seed,
                                    disabled=init != 'random', key="settings_init_seed")

    if st.button("💾 Save Settings", type="primary", use_container_width=True):
        try:
            config = current.with_overrides(
                dt=float(dt), flux_epsilon=float(flux_epsilon), update_rule=update_rule, stop_criterion=stop,
                delta=None if auto_delta else float(delta),
                max_iterations=None if auto_iters else int(max_iterations),
                init=init, init_seed=int(init_seed), revival=float(revival),
            )
        except ParameterError as exc:
            st.error(f"❌ {exc}")
            return
        set_solver_config(config)
        st.success("✅ Settings saved!")


def render_settings():
    """Render settings page"""
    st.markdown("""
    <div class="section-header">
        <h1 style="margin:0;color:#1e293b;">⚙️ Settings</h1>
        <p style="margin:0.5rem 0 0;color:#64748b;">Solver parameters shared by every page</p>
    </div>
    """, unsafe_allow_html=True)

    tabs = st.tabs(["🧫 Solver", "📦 Import / Export"])

    with tabs[0]:
        _solver_form(get_solver_config())

    with tabs[1]:
        current = get_solver_config()
        st.code(json.dumps(current.to_dict(), indent=2), language='json')
        st.download_button(
            "📥 Export settings JSON",
            json.dumps(current.to_dict(), indent=2),
            "solver.json",
            "application/json",
            use_container_width=True
        )

        uploaded = st.file_uploader("Import settings JSON", type=['json'])
        if uploaded is not None:
            try:
                config = SolverConfig.from_dict(json.loads(uploaded.getvalue().decode()))
            except (ParameterError, json.JSONDecodeError, TypeError) as exc:
                st.error(f"❌ {exc}")
            else:
                set_solver_config(config)
                st.success("✅ Settings imported")
