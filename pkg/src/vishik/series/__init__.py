from .jet import EXACT, FLOAT, FLOAT_TOL, Jet, add, derive, is_negligible, mul, scalar_str, scale, to_scalar
from .maps import (
    JetMap,
    VectorFieldJet,
    compose,
    compose_many,
    flow,
    graph_map,
    invert_map,
    lie_derivative,
    solve_implicit,
)
from .weierstrass import DivisionResult, prepare, weierstrass_divide

__all__ = [
    "EXACT", "FLOAT", "FLOAT_TOL", "Jet", "JetMap", "VectorFieldJet", "DivisionResult",
    "add", "mul", "scale", "derive", "compose", "compose_many", "invert_map",
    "solve_implicit", "graph_map", "lie_derivative", "flow", "weierstrass_divide",
    "prepare", "is_negligible", "scalar_str", "to_scalar",
]
