"""Exception hierarchy shared by the engine modules"""

from typing import Any, Dict, Iterable, Tuple


class PhysarumError(Exception):
    """Base class for every error raised by the engine."""


class ParameterError(PhysarumError, ValueError):
    """A precondition or parameter was violated."""


class UnreachableNodeError(ParameterError):

    def __init__(self, nodes: Iterable[int], source: int):
        self.nodes: Tuple[int, ...] = tuple(sorted(int(n) for n in nodes))
        self.source = int(source)
        shown = ', '.join(str(n) for n in self.nodes[:20])
        more = '' if len(self.nodes) <= 20 else f' (+{len(self.nodes) - 20} more)'
        super().__init__(f"nodes not reachable from source {self.source}: {shown}{more}")

    def __reduce__(self):
        return self.__class__, (self.nodes, self.source)


class SingularSystemError(PhysarumError):
    """Demanding nodes are disconnected from the grounded node."""

    def __init__(self, nodes: Iterable[int], message: str = ''):
        self.nodes: Tuple[int, ...] = tuple(sorted(int(n) for n in nodes))
        shown = ', '.join(str(n) for n in self.nodes[:20])
        self.message = message
        super().__init__(message or f"pressure system is singular; component disconnected from ground: {shown}")

    def __reduce__(self):
        return self.__class__, (self.nodes, self.message)


class SolverFailureError(PhysarumError):

    def __init__(self, residual: float, tolerance: float, method: str):
        self.residual = float(residual)
        self.tolerance = float(tolerance)
        self.method = method
        super().__init__(f"{method} solve reached relative residual {residual:.3e} > {tolerance:.1e}")

    def __reduce__(self):
        return self.__class__, (self.residual, self.tolerance, self.method)


class OracleMismatchError(PhysarumError):

    def __init__(self, seed: int, params: Dict[str, Any], algorithm: str, detail: str = ''):
        self.seed = int(seed)
        self.params = dict(params)
        self.algorithm = algorithm
        self.detail = detail
        super().__init__(f"{algorithm} disagrees with label-setting oracle at seed={seed} params={params} {detail}".strip())

    def __reduce__(self):
        return self.__class__, (self.seed, self.params, self.algorithm, self.detail)
