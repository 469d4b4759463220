"""Poincare half maps at fold contacts.

In normal coordinates the fold field is ``(x_2, 1, 0, ..., 0)`` and the
surface is ``{x_1 = 0}``.  The orbit through ``(0, x_2, ..., x_m)`` returns
to the surface after time ``t = -2 x_2`` at ``(0, -x_2, x_3, ..., x_m)``, so
the half map is the linear involution ``P``.  Pulling ``P`` back through
the normalizing chart gives the half map of the original problem.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnsupportedContactError, ShapeError
from .normal_form import NormalFormResult, model_field, surface_graph
from .series import EXACT, Jet, JetMap, compose, flow, invert_map
from .series.jet import scalar_str

__all__ = ["HalfMapResult", "normal_half_map", "pullback_half_map", "involution_residual"]


def _embed_surface(m: int, order: int, mode: str) -> JetMap:
    """``w -> (0, w)`` from the surface coordinates into ``R^m``."""
    return JetMap(tuple([Jet.zero(m - 1, order, mode)]
                        + [Jet.variable(i, m - 1, order, mode) for i in range(m - 1)]))


def _drop_first(F: JetMap) -> JetMap:
    return JetMap(F.components[1:])


def normal_half_map(m: int, order: int = 6, mode: str = EXACT) -> tuple[JetMap, Jet]:
    """Half map and flight time of the fold model on ``{x_1 = 0}``.

    Both live in the surface coordinates ``(x_2, ..., x_m)``.  The map is
    obtained by running the model flow for time ``-2 x_2``; a nonzero first
    component at the landing point would mean the orbit had not returned.
    """
    if m < 2:
        raise ShapeError("half maps need m >= 2")
    model = model_field(1, m, order, mode)
    F = flow(model)
    w = [Jet.variable(i, m - 1, order, mode) for i in range(m - 1)]
    flight_time = w[0].scale(-2)
    start = JetMap(tuple([flight_time, Jet.zero(m - 1, order, mode)] + w))
    landing = F.compose(start)
    if not landing.components[0].is_zero():
        raise ArithmeticError("model orbit does not return to the surface")  # pragma: no cover
    return _drop_first(landing), flight_time


def involution_residual(Q: JetMap) -> JetMap:
    """``Q o Q - id``."""
    return Q.compose(Q) - JetMap.identity(Q.dim, Q.order, Q.mode)


@dataclass
class HalfMapResult:
    """Half map of a fold.

    ``Q`` is the half map in the chart of the surface induced by ``psi``
    (coordinates ``x_2..x_m`` of the normal form); ``Q_graph`` is the same
    map in the graph chart of ``{h = 0}`` over ``m - 1`` original
    coordinates, related to ``Q`` by ``surface_chart``.  All maps are
    certified through order ``N - 1``.
    """

    Q: JetMap
    P_normal: JetMap
    flight_time: Jet
    involution_residual: list
    Q_graph: JetMap
    surface_chart: JetMap
    graph_variable: int
    graph_involution_residual: list

    @property
    def involution_residual_max(self):
        return max(self.involution_residual + self.graph_involution_residual, default=0)

    def to_json(self) -> dict:
        mode = self.Q.mode
        val = self.involution_residual_max
        return {
            "Q": self.Q.to_json(),
            "flight_time": self.flight_time.to_json(),
            "involution_residual_max": scalar_str(val) if mode == EXACT else repr(float(val)),
            "P_normal": self.P_normal.to_json(),
            "Q_graph": self.Q_graph.to_json(),
            "graph_variable": self.graph_variable,
        }


def _per_degree(F: JetMap) -> list:
    return F.max_abs_by_degree()


def pullback_half_map(nf: NormalFormResult, h: Jet | None = None) -> HalfMapResult:
    """Half map ``Q = psi^{-1} o P o psi`` restricted to the surface.

    The surface chart induced by ``psi`` is ``w -> psi^{-1}(0, w)``.  In
    that chart ``Q`` is computed as ``pi o psi o psi^{-1} o iota o P``
    (``iota(w) = (0, w)``, ``pi`` drops the first coordinate).  When ``h``
    is given, ``Q`` is also expressed in the graph chart of ``{h = 0}``:
    with ``T(w) = pi(psi(G(w)))`` for the graph parametrization ``G``,
    ``Q_graph = T^{-1} o Q o T``.
    """
    if nf.k != 1:
        raise UnsupportedContactError(f"half maps are only defined at folds (k = 1), got k = {nf.k}")
    psi, psi_inv = nf.psi, nf.psi_inv
    m, N, mode = nf.m, psi.order, psi.mode
    P, flight_time = normal_half_map(m, N, mode)
    iota = _embed_surface(m, N, mode)
    back = psi_inv.compose(iota.compose(P))   # points of the surface, original coordinates
    Q = _drop_first(psi.compose(back)).truncate(N - 1)
    if h is None:
        # the surface is psi^{-1}({x_1 = 0}); parametrize it by the inverse chart
        h = psi.components[0]
    G, var = surface_graph(h.truncate(N) if h.order > N else h)
    T = _drop_first(psi.compose(G))
    T_inv = invert_map(T)
    Q_graph = T_inv.compose(P.compose(T)).truncate(N - 1)
    return HalfMapResult(
        Q=Q,
        P_normal=P,
        flight_time=flight_time,
        involution_residual=_per_degree(involution_residual(Q)),
        Q_graph=Q_graph,
        surface_chart=T,
        graph_variable=var,
        graph_involution_residual=_per_degree(involution_residual(Q_graph)),
    )
