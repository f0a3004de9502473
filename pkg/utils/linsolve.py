"""Grounded network Poisson (Laplacian) systems and their solution"""

import io
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.io
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import LinearOperator, cg, splu

from utils.errors import ParameterError, SingularSystemError, SolverFailureError
from utils.graph import DirectedGraph

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-10
ZERO_CONDUCTIVITY = 1e-12
DIRECT_SOLVE_LIMIT = 2000


@dataclass(frozen=True, eq=False)
class GroundedSystem:
    """Symmetric conductance Laplacian plus injected currents, one node fixed at pressure 0.

    ``laplacian`` is the full n x n matrix; the reduced system drops the ground row and
    column and every node outside the ground's connected component.
    """

    laplacian: sp.csr_matrix
    rhs: np.ndarray
    ground: int
    labels: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.laplacian.shape[0]

    @property
    def free_nodes(self) -> np.ndarray:
        """Nodes whose pressure is unknown, in increasing id order."""
        in_component = self.labels == self.labels[self.ground]
        in_component[self.ground] = False
        return np.flatnonzero(in_component)

    @property
    def reduced_matrix(self) -> sp.csr_matrix:
        free = self.free_nodes
        return self.laplacian[free][:, free].tocsr()

    @property
    def reduced_rhs(self) -> np.ndarray:
        return self.rhs[self.free_nodes]

    def disconnected_demands(self) -> np.ndarray:
        outside = self.labels != self.labels[self.ground]
        return np.flatnonzero(outside & (self.rhs != 0))

    def to_matrix_market(self) -> str:
        """Coordinate-format dump of the reduced matrix followed by the rhs, for debugging."""
        buf = io.BytesIO()
        scipy.io.mmwrite(buf, self.reduced_matrix.tocoo(), comment=f"ground={self.ground} free={len(self.free_nodes)}")
        text = buf.getvalue().decode()
        rhs = '\n'.join(f"% rhs {node} {value:.17g}" for node, value in zip(self.free_nodes, self.reduced_rhs))
        return text + rhs + ('\n' if rhs else '')


def assemble(graph: DirectedGraph, conductivity: np.ndarray, rhs: np.ndarray, ground: int) -> GroundedSystem:
    """Row i encodes sum_j (D_ij/L_ij + D_ji/L_ji)(p_i - p_j) = rhs_i.

    Edges with conductivity below 1e-12 are left out of the matrix.
    """
    n = graph.node_count
    conductivity = np.asarray(conductivity, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if conductivity.shape != (graph.edge_count,):
        raise ParameterError(f"expected {graph.edge_count} conductivities, got {conductivity.shape}")
    if rhs.shape != (n,):
        raise ParameterError(f"expected rhs of length {n}, got {rhs.shape}")
    if not 0 <= ground < n:
        raise ParameterError(f"ground {ground} outside [0, {n})")

    keep = conductivity >= ZERO_CONDUCTIVITY
    if n > 1 and not keep.any():
        raise SingularSystemError(range(n), "pressure system is fully disconnected: every conductivity is zero")

    c = conductivity[keep] / graph.lengths[keep]
    t, h = graph.tails[keep], graph.heads[keep]
    rows = np.concatenate((t, h, t, h))
    cols = np.concatenate((h, t, t, h))
    data = np.concatenate((-c, -c, c, c))
    laplacian = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    laplacian.sum_duplicates()

    _, labels = connected_components(laplacian, directed=False)
    return GroundedSystem(laplacian, rhs.copy(), int(ground), labels)


def _jacobi(matrix: sp.csr_matrix) -> LinearOperator:
    diag = matrix.diagonal()
    inv = np.where(diag > 0, 1.0 / np.where(diag > 0, diag, 1.0), 1.0)
    return LinearOperator(matrix.shape, matvec=lambda x: inv * x, dtype=float)


def solve(system: GroundedSystem, tolerance: float = DEFAULT_TOLERANCE, max_iterations: Optional[int] = None) -> np.ndarray:
    """Pressures with p[ground] == 0 and relative residual ||Ax - b|| / ||b|| <= tolerance.

    Nodes outside the ground's component carry no demand and get pressure 0.
    """
    stranded = system.disconnected_demands()
    if len(stranded):
        raise SingularSystemError(stranded)

    pressure = np.zeros(system.dimension)
    free = system.free_nodes
    b = system.reduced_rhs
    b_norm = np.linalg.norm(b)
    if len(free) == 0 or b_norm == 0:
        return pressure

    A = system.reduced_matrix
    if len(free) <= DIRECT_SOLVE_LIMIT:
        method = 'direct'
        try:
            lu = splu(A.tocsc())
        except RuntimeError as exc:
            raise SolverFailureError(float('inf'), tolerance, method) from exc
        x = lu.solve(b)
        residual = np.linalg.norm(A @ x - b) / b_norm
        if residual > tolerance:
            # one refinement step
            x = x + lu.solve(b - A @ x)
            residual = np.linalg.norm(A @ x - b) / b_norm
    else:
        method = 'conjugate-gradient'
        budget = max_iterations or 10 * len(free)
        # cg tracks a recursive residual; the true one is checked below
        x, info = cg(A, b, rtol=0.1 * tolerance, maxiter=budget, M=_jacobi(A))
        residual = np.linalg.norm(A @ x - b) / b_norm
        if info != 0:
            logger.warning("CG stopped with info=%s after budget %d, residual %.3e", info, budget, residual)

    if not np.all(np.isfinite(x)) or residual > tolerance:
        raise SolverFailureError(residual, tolerance, method)

    pressure[free] = x
    return pressure
