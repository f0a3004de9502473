"""Formatting utilities for distances, timings and result tables"""

from typing import Mapping, Optional, Sequence

import pandas as pd

from utils.graph import DirectedGraph


def format_ms(value) -> str:
    """Milliseconds with a unit that keeps three significant figures."""
    if value is None or pd.isna(value):
        return "–"
    value = float(value)
    if value >= 1000:
        return f"{value / 1000:.2f} s"
    if value >= 1:
        return f"{value:.1f} ms"
    return f"{value * 1000:.0f} µs"


def format_distance(value: Optional[float]) -> str:
    if value is None or pd.isna(value):
        return "unreached"
    return f"{float(value):,.6g}"


def format_number(value):
    """Format large numbers with K/M suffix."""
    if pd.isna(value):
        return "0"
    value = float(value)
    if abs(value) >= 1000000:
        return f"{value/1000000:.1f}M"
    elif abs(value) >= 1000:
        return f"{value/1000:.1f}K"
    return f"{value:,.0f}"


def distances_frame(columns: Mapping[str, Sequence[Optional[float]]]) -> pd.DataFrame:
    """One row per node, one column per algorithm; unreached nodes stay empty."""
    df = pd.DataFrame({name: pd.array(list(d), dtype='Float64') for name, d in columns.items()})
    df.insert(0, 'node', range(len(df)))
    return df


def edges_frame(graph: DirectedGraph, edge_ids: Optional[Sequence[int]] = None, **per_edge) -> pd.DataFrame:
    """Edge table (tail, head, length) plus any per-edge arrays passed as keywords."""
    ids = list(range(graph.edge_count)) if edge_ids is None else list(edge_ids)
    df = pd.DataFrame({
        'edge': ids,
        'tail': graph.tails[ids],
        'head': graph.heads[ids],
        'length': graph.lengths[ids],
    })
    for name, values in per_edge.items():
        df[name] = [values[e] for e in ids]
    return df
