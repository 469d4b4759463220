"""Lie derivatives, contact order and simplicity of a contact point.

A point of ``Sigma = {h = 0}`` has contact of order ``k`` with ``X`` when
``X h, ..., X^k h`` vanish there and ``X^{k+1} h`` does not; the contact is
simple when the gradients of ``h, Xh, ..., X^k h`` are linearly independent.
Everything is evaluated at the origin of the jet coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import linalg
from .errors import BasePointError, ShapeError, SurfaceError, UndecidableError
from .series import Jet, JetMap, VectorFieldJet, compose, flow, is_negligible, lie_derivative
from .series.jet import scalar_str

__all__ = [
    "SurfaceSpec",
    "ContactReport",
    "lie_derivative",
    "lie_derivatives",
    "contact_order",
    "oracle_contact_order",
]


@dataclass(frozen=True)
class SurfaceSpec:
    """The hypersurface ``h = 0`` through the origin."""

    h: Jet

    def __post_init__(self):
        h = self.h
        scale = max(h.max_abs_by_degree()[:2], default=0)
        if not is_negligible(h.constant_term, h.mode, scale):
            raise BasePointError("h(0) != 0: the base point is not on the surface")
        if all(is_negligible(g, h.mode, scale) for g in h.gradient()):
            raise SurfaceError("grad h(0) = 0: 0 is not a regular value of h")

    @property
    def m(self) -> int:
        return self.h.nvars


@dataclass(frozen=True)
class ContactReport:
    """Outcome of :func:`contact_order`.

    ``gradients`` has rows ``grad X^i h(0)`` for ``i = 0..k``; ``leading``
    is ``X^{k+1} h(0)``.
    """

    k: int
    simple: bool
    rank: int
    leading: object
    gradients: list
    m: int
    order: int
    mode: str
    lie_values: list = field(default_factory=list)

    def to_json(self) -> dict:
        conv = scalar_str if self.mode == "exact" else float
        return {
            "k": self.k,
            "simple": self.simple,
            "rank": self.rank,
            "leading_lie_derivative": scalar_str(self.leading) if self.mode == "exact"
            else repr(float(self.leading)),
            "gradients": [[conv(x) for x in row] for row in self.gradients],
        }


def _check_pair(X: VectorFieldJet, h: Jet):
    if h.nvars != X.m:
        raise ShapeError(f"surface has {h.nvars} variables, field has dimension {X.m}")
    if (h.order, h.mode) != (X.order, X.mode):
        raise ShapeError("surface and field must share order and mode")


def lie_derivatives(h: Jet, X: VectorFieldJet, count: int) -> list[Jet]:
    """``[h, Xh, ..., X^count h]``; ``X^n h`` carries order ``N - n``."""
    out = [h]
    for _ in range(count):
        out.append(lie_derivative(out[-1], X))
    return out


def _value_zero(jet: Jet) -> bool:
    return is_negligible(jet.constant_term, jet.mode, max(jet.max_abs_by_degree(), default=0))


def contact_order(X: VectorFieldJet, S: SurfaceSpec | Jet, k_max: int | None = None) -> ContactReport:
    """Least ``k <= k_max`` with ``X^{k+1} h(0) != 0``, plus the simplicity verdict.

    ``k_max`` defaults to ``m - 1``.  It must satisfy ``k_max + 1 <= N`` so
    that ``X^{k_max+1} h`` still has a certified constant term.
    """
    if isinstance(S, Jet):
        S = SurfaceSpec(S)
    h = S.h
    _check_pair(X, h)
    m, N = X.m, X.order
    if k_max is None:
        k_max = m - 1
    if k_max < 0:
        raise ShapeError("k_max must be non-negative")
    if k_max + 1 > N:
        raise UndecidableError(f"deciding contact order up to {k_max} needs jet order >= {k_max + 1}, got {N}")
    derivs = [h]
    k = None
    for n in range(1, k_max + 2):
        derivs.append(lie_derivative(derivs[-1], X))
        if not _value_zero(derivs[-1]):
            k = n - 1
            break
    if k is None:
        raise UndecidableError(
            f"X^n h(0) = 0 for n = 1..{k_max + 1}; contact order exceeds {k_max} at jet order {N}"
        )
    gradients = [d.gradient() for d in derivs[: k + 1]]
    r = linalg.rank(gradients, X.mode)
    simple = k + 1 <= m and r == k + 1
    return ContactReport(
        k=k,
        simple=simple,
        rank=r,
        leading=derivs[k + 1].constant_term,
        gradients=gradients,
        m=m,
        order=N,
        mode=X.mode,
        lie_values=[d.constant_term for d in derivs],
    )


def oracle_contact_order(X: VectorFieldJet, S: SurfaceSpec | Jet) -> int:
    """Contact order from the root multiplicity of ``t -> h(X_t(0))``.

    Independent of :func:`contact_order`: expands the trajectory through the
    origin with the Lie-series flow and composes ``h`` with it.
    """
    h = S.h if isinstance(S, SurfaceSpec) else S
    _check_pair(X, h)
    m = X.m
    F = flow(X)
    # restrict the flow to the initial point x = 0
    curve = JetMap(tuple(c.set_zero(range(1, m + 1)) for c in F.components))
    series = compose(h, curve)
    scale = max(series.max_abs_by_degree(), default=0)
    for deg, c in enumerate(series.max_abs_by_degree()):
        if not is_negligible(c, series.mode, scale):
            return deg - 1
    raise UndecidableError(f"h along the trajectory vanishes to order {series.order}")
