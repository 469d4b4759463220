"""Vishik normal forms of vector fields at simple contacts with hypersurfaces.

The package works with jets (truncated multivariate Taylor series) of a
vector field ``X`` and a function ``h`` at a point of ``{h = 0}``.  It
classifies the contact, builds a chart ``psi`` conjugating ``X`` to the
model ``(x_2, ..., x_{k+1}, 1, 0, ..., 0)`` while flattening the surface to
``{x_1 = 0}``, and derives half maps at folds.
"""

__version__ = "0.1.0"

from .errors import InputError, PreconditionError, VishikError  # noqa: E402
from .series import (  # noqa: E402
    EXACT,
    FLOAT,
    DivisionResult,
    Jet,
    JetMap,
    VectorFieldJet,
    compose,
    flow,
    invert_map,
    lie_derivative,
    prepare,
    solve_implicit,
    weierstrass_divide,
)
from .contact import ContactReport, SurfaceSpec, contact_order, oracle_contact_order  # noqa: E402
from .normal_form import (  # noqa: E402
    NormalFormResult,
    NormalFormTrace,
    build_beta,
    build_gamma,
    choose_column_permutation,
    flow_box,
    pushforward,
    shear,
    straighten_surface,
    verify,
    vishik_normal_form,
)
from .halfmap import HalfMapResult, normal_half_map, pullback_half_map  # noqa: E402
from .problem import ProblemSpec, parse_problem  # noqa: E402

__all__ = [
    "EXACT", "FLOAT", "Jet", "JetMap", "VectorFieldJet", "DivisionResult",
    "compose", "flow", "invert_map", "lie_derivative", "prepare", "solve_implicit",
    "weierstrass_divide", "ContactReport", "SurfaceSpec", "contact_order",
    "oracle_contact_order", "NormalFormResult", "NormalFormTrace", "build_beta",
    "build_gamma", "choose_column_permutation", "flow_box", "pushforward", "shear",
    "straighten_surface", "verify", "vishik_normal_form", "HalfMapResult",
    "normal_half_map", "pullback_half_map", "ProblemSpec", "parse_problem",
    "VishikError", "InputError", "PreconditionError",
]
