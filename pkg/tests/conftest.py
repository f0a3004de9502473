import networkx as nx
import pytest

from utils.graph import DirectedGraph

# Six nodes, unique shortest path tree 0-1-2-3-4-5 from node 0, distances (0, 2, 3, 5, 6, 7).
SIX_NODE_EDGES = [
    (0, 1, 2.0), (0, 2, 5.0), (1, 2, 1.0), (1, 3, 6.0), (2, 3, 2.0),
    (2, 4, 7.0), (3, 4, 1.0), (3, 5, 4.0), (4, 5, 1.0), (5, 0, 3.0),
]
SIX_NODE_DISTANCES = (0.0, 2.0, 3.0, 5.0, 6.0, 7.0)


@pytest.fixture
def unit_path():
    return DirectedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])


@pytest.fixture
def triangle():
    """s=0 -> a=1 -> t=2 of length 2 against the direct s -> t edge of length 3."""
    return DirectedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)])


@pytest.fixture
def two_path_tie():
    """Two s -> t paths of length 2: 0-1-3 and 0-2-3."""
    return DirectedGraph.from_edges(4, [(0, 1, 1.0), (1, 3, 1.0), (0, 2, 1.0), (2, 3, 1.0)])


@pytest.fixture
def five_node_tie():
    """Node 2 is reached at distance 3 both by 0-1-2 and by 0-1-3-2."""
    return DirectedGraph.from_edges(5, [(0, 1, 1.0), (1, 2, 2.0), (1, 3, 1.0), (3, 2, 1.0), (0, 4, 3.0)])


@pytest.fixture
def six_node():
    return DirectedGraph.from_edges(6, SIX_NODE_EDGES)


def to_networkx(graph: DirectedGraph) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(graph.node_count))
    g.add_weighted_edges_from(graph.edges)
    return g


@pytest.fixture
def nx_distances():
    """Reference single-source distances from networkx, None for unreached nodes."""

    def _distances(graph: DirectedGraph, source: int = 0):
        lengths = nx.single_source_dijkstra_path_length(to_networkx(graph), source)
        return tuple(lengths.get(node) for node in range(graph.node_count))

    return _distances
