"""Vishik normal form at a simple k-contact.

The conjugating chart is built as ``psi = gamma o beta o alpha`` with
``alpha = sigma o alpha_check o P o alpha_hat``:

* ``alpha_hat`` straightens ``X`` to ``(1, 0, ..., 0)`` (flow box);
* ``P`` swaps a coordinate with a nonzero surface partial into the last slot,
  so the surface becomes a graph ``y_m = Phi(y_1..y_{m-1})``;
* ``alpha_check`` shears away the linear part of ``Phi`` in ``y_2..y_{m-1}``;
* ``sigma`` permutes ``y_2..y_{m-1}`` so that the relevant minor of second
  derivatives of the graph function is invertible;
* ``beta`` comes out of the preparation identity
  ``y_1^{k+1} + sum_i y_1^i a_i = b`` and carries the surface onto
  ``x_1^{k+1} + x_2 x_1^{k-1} + ... + x_k x_1 + x_{k+1} = 0``;
* ``gamma`` turns that polynomial into a coordinate and the constant field
  into the model ``(x_2, ..., x_{k+1}, 1, 0, ..., 0)``.

All steps are jet operations at order ``N``; the field identity is
certified through ``N - 1`` and the surface identity through ``N``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import comb, factorial

from gmpy2 import mpq

from . import linalg
from .contact import ContactReport, SurfaceSpec, contact_order
from .errors import (
    DegenerateError,
    DimensionError,
    EquilibriumError,
    NotAContactError,
    NotSimpleError,
    OrderError,
    ShapeError,
    SurfaceError,
)
from .series import (
    EXACT,
    Jet,
    JetMap,
    VectorFieldJet,
    compose,
    compose_many,
    flow,
    graph_map,
    invert_map,
    is_negligible,
    prepare,
    solve_implicit,
)
from .series.jet import scalar_str

log = logging.getLogger(__name__)

__all__ = [
    "NormalFormTrace",
    "NormalFormResult",
    "ResidualReport",
    "model_field",
    "pushforward",
    "flow_box",
    "straighten_surface",
    "shear",
    "choose_column_permutation",
    "build_beta",
    "build_gamma",
    "surface_graph",
    "vishik_normal_form",
    "verify",
]


# small helpers

def _pivot(values, mode, prefer=None) -> int | None:
    """Index of a usable nonzero entry: ``prefer`` if possible, else first
    nonzero (exact) or largest (float)."""
    scale = max((abs(v) for v in values), default=0)
    ok = [i for i, v in enumerate(values) if not is_negligible(v, mode, scale)]
    if not ok:
        return None
    if prefer is not None and prefer in ok:
        return prefer
    if mode == EXACT:
        return ok[0]
    return max(ok, key=lambda i: abs(values[i]))


def _transposition(n: int, i: int, j: int) -> list[int]:
    perm = list(range(n))
    perm[i], perm[j] = perm[j], perm[i]
    return perm


def model_field(k: int, m: int, order: int, mode: str = EXACT) -> VectorFieldJet:
    """``(x_2, ..., x_{k+1}, 1, 0, ..., 0)`` on ``R^m``."""
    if not 1 <= k <= m - 1:
        raise DimensionError(f"contact order {k} outside 1..{m - 1}")
    comps = [Jet.variable(i + 1, m, order, mode) for i in range(k)]
    comps.append(Jet.constant(1, m, order, mode))
    comps += [Jet.zero(m, order, mode)] * (m - k - 1)
    return VectorFieldJet(tuple(comps))


def _apply_field(F: JetMap, X: VectorFieldJet) -> list[Jet]:
    """``DF . X`` with the derivative loss accounted for (order N - 1)."""
    n = F.order - 1
    Xs = [x.truncate(n) for x in X.components]
    out = []
    for c in F.components:
        acc = Jet.zero(F.domain_vars, n, F.mode)
        for j, xj in enumerate(Xs):
            d = c.derive(j).truncate(n)
            if not d.is_zero() and not xj.is_zero():
                acc = acc + d * xj
        out.append(acc)
    return out


def pushforward(F: JetMap, X: VectorFieldJet, F_inv: JetMap | None = None) -> VectorFieldJet:
    """``F_* X = (DF . X) o F^{-1}``, certified through order ``N - 1``."""
    if F.dim != X.m or F.domain_vars != X.m:
        raise ShapeError("pushforward needs a square map matching the field's dimension")
    if F_inv is None:
        F_inv = invert_map(F)
    DFX = _apply_field(F, X)
    return VectorFieldJet(tuple(compose_many(DFX, F_inv.truncate(F.order - 1))))


# pipeline steps

def flow_box(X: VectorFieldJet, return_inverse: bool = False):
    """Chart ``alpha_hat`` with ``alpha_hat_* X = (1, 0, ..., 0)``.

    Flows the hyperplane ``{x_j = 0}`` along ``X``, where ``j`` maximises
    ``|X_j(0)|`` (first index on ties).  The map ``(t, s) -> X_t(s)`` is
    inverted formally; output coordinate 1 is the flight time.  With
    ``return_inverse`` the pair ``(alpha_hat, alpha_hat^{-1})`` is returned.
    """
    m, N, mode = X.m, X.order, X.mode
    x0 = X.at_origin()
    scale = max((abs(v) for v in x0), default=0)
    if scale == 0 or all(is_negligible(v, mode, 1.0) for v in x0):
        raise EquilibriumError("X(0) = 0: no flow box at an equilibrium")
    mags = [abs(v) for v in x0]
    j = mags.index(max(mags))
    F = flow(X)
    # inner map (t, s_1..s_{m-1}) -> (t, s with 0 inserted at slot j)
    t = Jet.variable(0, m, N, mode)
    s = [Jet.variable(i, m, N, mode) for i in range(1, m)]
    point = s[:j] + [Jet.zero(m, N, mode)] + s[j:]
    Psi = F.compose(JetMap((t, *point)))
    alpha_hat = invert_map(Psi)
    if return_inverse:
        return alpha_hat, Psi
    return alpha_hat


def straighten_surface(alpha_hat: JetMap, h: Jet, alpha_hat_inv: JetMap | None = None):
    """Graph function of the surface in flow-box coordinates.

    Returns ``(Phi, perm)``: ``perm`` is the transposition moving a
    coordinate with ``df_hat/dy_j(0) != 0`` (``j >= 2``) into the last slot,
    and ``f_hat(y', Phi(y')) = 0`` after that swap.  The last coordinate is
    kept when it qualifies.
    """
    m = h.nvars
    if alpha_hat_inv is None:
        alpha_hat_inv = invert_map(alpha_hat)
    f_hat = compose(h, alpha_hat_inv)
    grad = f_hat.gradient()
    j = _pivot(grad[1:], f_hat.mode, prefer=m - 2)
    if j is None:
        raise SurfaceError("the surface gradient has no component across the flow lines")
    j += 1
    perm = _transposition(m, j, m - 1)
    f = compose(f_hat, JetMap.permutation(perm, f_hat.order, f_hat.mode))
    return solve_implicit(f, m - 1), perm


def shear(Phi: Jet) -> JetMap:
    """``alpha_check(y) = (y_1, ..., y_{m-1}, y_m - sum_{i>=2} dPhi/dy_i(0) y_i)``."""
    n1, N, mode = Phi.nvars, Phi.order, Phi.mode
    m = n1 + 1
    ys = [Jet.variable(i, m, N, mode) for i in range(m)]
    grad = Phi.gradient()
    last = ys[-1]
    for i in range(1, n1):
        if grad[i]:
            last = last - ys[i].scale(grad[i])
    return JetMap(tuple(ys[:-1] + [last]))


def _shifted_graph(Phi: Jet) -> Jet:
    grad = Phi.gradient()
    out = Phi
    for i in range(1, Phi.nvars):
        if grad[i]:
            out = out - Jet.variable(i, Phi.nvars, Phi.order, Phi.mode).scale(grad[i])
    return out


def _mixed_matrix(phi: Jet, rows, cols):
    """``d^{i+1} phi / dy_1^i dy_j (0)``, 1-based ``i`` and ``j``."""
    n = phi.nvars
    out = []
    for i in rows:
        row = []
        for j in cols:
            exp = [0] * n
            exp[0] += i
            exp[j - 1] += 1
            row.append(phi.partial_at_zero(exp))
        out.append(row)
    return out


def choose_column_permutation(phi: Jet, k: int) -> list[int]:
    """Reorder ``y_2..y_{m-1}`` so that the leading minor ``B`` is invertible.

    ``B`` collects ``d^{i+1} phi / dy_1^i dy_j (0)`` for ``i = 1..k-1`` and
    ``j = 2..k``.  Columns are picked greedily from ``y_2..y_{m-1}`` (first
    nonzero pivot in exact mode, largest in float mode); the chosen columns
    come first, both groups in increasing order.  Returns a permutation of
    ``0..m-1`` (0-based, fixing the first and last coordinate): new
    coordinate ``i`` is old coordinate ``perm[i]``.
    """
    m = phi.nvars + 1
    if k < 1:
        raise NotAContactError("contact order must be at least 1")
    if k > m - 1:
        raise DimensionError(f"contact order {k} exceeds m - 1 = {m - 1}")
    if k == 1 or m <= 2:
        return list(range(m))
    cols = list(range(2, m))
    M = _mixed_matrix(phi, range(1, k), cols)
    chosen = linalg.select_columns(M, k - 1, phi.mode)
    if len(chosen) < k - 1:
        raise NotSimpleError("mixed second derivatives of the graph have deficient rank")
    picked = sorted(cols[c] for c in chosen)
    rest = [c for c in cols if c not in picked]
    return [0] + [c - 1 for c in picked + rest] + [m - 1]


def build_beta(a: list[Jet], b: Jet, k: int, m: int) -> JetMap:
    """The map ``beta`` from the preparation data.

    ``a = [a_1..a_k]`` and ``b`` are jets in ``(y_2, ..., y_m)``.  With
    ``c = -a_k/(k+1)``::

        beta_1       = y_1 - c
        beta_{k+1-j} = C(k+1, j) c^{k+1-j} + sum_{i=j}^{k} C(i, j) c^{i-j} a_i,  1 <= j <= k-1
        beta_{k+1}   = -b - k c^{k+1} + sum_{i=1}^{k-1} c^i a_i
        beta_i       = y_i,  k+2 <= i <= m-1
        beta_m       = y_{k+1}   (only when k+1 < m)

    The constant term in ``beta_{k+1}`` carries ``-k c^{k+1}``: expanding
    ``(x_1 + c)^{k+1} + sum a_i (x_1 + c)^i`` shows this is the sign that
    makes the surface polynomial come out right.
    """
    if len(a) != k:
        raise ShapeError(f"expected {k} coefficients a_i, got {len(a)}")
    if not 1 <= k <= m - 1:
        raise DimensionError(f"contact order {k} outside 1..{m - 1}")
    N, mode = b.order, b.mode
    pos = list(range(1, m))
    A = [ai.embed(m, pos) for ai in a]
    B = b.embed(m, pos)
    y = [Jet.variable(i, m, N, mode) for i in range(m)]
    c = -A[k - 1] / (k + 1)
    cpow = [Jet.constant(1, m, N, mode)]
    for _ in range(k + 1):
        cpow.append(cpow[-1] * c)
    comps: list[Jet | None] = [None] * m
    comps[0] = y[0] - c
    for j in range(1, k):
        acc = cpow[k + 1 - j].scale(comb(k + 1, j))
        for i in range(j, k + 1):
            acc = acc + (cpow[i - j] * A[i - 1]).scale(comb(i, j))
        comps[k - j] = acc
    last = -B - cpow[k + 1].scale(k)
    for i in range(1, k):
        last = last + cpow[i] * A[i - 1]
    comps[k] = last
    for i in range(k + 1, m - 1):
        comps[i] = y[i]
    if k + 1 < m:
        comps[m - 1] = y[k]
    beta = JetMap(tuple(comps))
    D = beta.linear_part()
    d = linalg.det(D, mode)
    if is_negligible(d, mode, max((abs(v) for row in D for v in row), default=0)):
        raise DegenerateError("det D beta(0) = 0")
    return beta


def build_gamma(k: int, m: int, order: int = 6, mode: str = EXACT) -> JetMap:
    """The polynomial map ``gamma``.

    For ``1 <= i <= k+1``::

        gamma_i = x_1^{k+2-i}/(k+2-i)!
                  + sum_{l=2}^{k+2-i} (k+1-l)!/(k+1)! * x_1^{k+2-i-l} x_l / (k+2-i-l)!

    and ``gamma_i = x_i`` beyond.  Each ``gamma_i`` is the ``x_1``-derivative
    of the previous one, ``gamma_{k+1} = x_1``, and ``(k+1)! gamma_1`` is the
    surface polynomial ``x_1^{k+1} + sum_l x_l x_1^{k+1-l}``.
    """
    if not 1 <= k <= m - 1:
        raise DimensionError(f"contact order {k} outside 1..{m - 1}")
    if order < k + 1:
        raise OrderError(f"gamma for k = {k} needs jet order >= {k + 1}")
    fk1 = factorial(k + 1)
    comps = []
    for i in range(1, k + 2):
        e = k + 2 - i
        terms: dict[tuple[int, ...], object] = {}
        exp = [0] * m
        exp[0] = e
        terms[tuple(exp)] = (1, factorial(e))
        for l in range(2, e + 1):
            exp = [0] * m
            exp[0] = e - l
            exp[l - 1] = 1
            terms[tuple(exp)] = (factorial(k + 1 - l), fk1 * factorial(e - l))
        comps.append(Jet(m, order, {ex: (mpq(p, q) if mode == EXACT else p / q)
                                    for ex, (p, q) in terms.items()}, mode))
    for i in range(k + 1, m):
        comps.append(Jet.variable(i, m, order, mode))
    return JetMap(tuple(comps))


def surface_graph(h: Jet, prefer_last: bool = True) -> tuple[JetMap, int]:
    """Parametrization ``w -> x`` of ``h = 0`` as a graph over ``m - 1`` coordinates.

    Solves for the coordinate with a nonzero partial of ``h`` at 0: the last
    qualifying one when ``prefer_last`` (the default), otherwise the first
    (exact) or the largest (float).  Returns ``(G, solved_index)``.
    """
    m = h.nvars
    grad = h.gradient()
    if prefer_last:
        scale = max((abs(g) for g in grad), default=0)
        ok = [i for i, g in enumerate(grad) if not is_negligible(g, h.mode, scale)]
        j = ok[-1] if ok else None
    else:
        j = _pivot(grad, h.mode)
    if j is None:
        raise SurfaceError("grad h(0) = 0")
    return graph_map(solve_implicit(h, j), j), j


# results

@dataclass
class NormalFormTrace:
    """Intermediate objects of one pipeline run (see the module docstring)."""

    alpha_hat: JetMap
    transversal_permutation: list[int]
    Phi: Jet
    alpha_check: JetMap
    phi: Jet
    column_permutation: list[int]
    a: list[Jet]
    b: Jet
    beta: JetMap
    gamma: JetMap
    A_matrix: list
    B_bar_matrix: list
    det_Dbeta: object
    db_dym: object
    flow_axis: int
    contact: ContactReport | None = None

    def to_json(self) -> dict:
        mode = self.b.mode
        conv = scalar_str if mode == EXACT else float
        return {
            "alpha_hat": self.alpha_hat.to_json(),
            "transversal_permutation": list(self.transversal_permutation),
            "Phi": self.Phi.to_json(),
            "alpha_check": self.alpha_check.to_json(),
            "phi": self.phi.to_json(),
            "column_permutation": list(self.column_permutation),
            "a": [ai.to_json() for ai in self.a],
            "b": self.b.to_json(),
            "beta": self.beta.to_json(),
            "gamma": self.gamma.to_json(),
            "A_matrix": [[conv(x) for x in row] for row in self.A_matrix],
            "B_bar_matrix": [[conv(x) for x in row] for row in self.B_bar_matrix],
            "det_Dbeta": conv(self.det_Dbeta),
            "db_dym": conv(self.db_dym),
            "flow_axis": self.flow_axis,
        }


@dataclass
class NormalFormResult:
    k: int
    m: int
    psi: JetMap
    psi_inv: JetMap
    trace: NormalFormTrace
    residual_field: VectorFieldJet
    residual_surface: Jet
    alpha: JetMap = field(repr=False, default=None)

    @property
    def order(self) -> int:
        return self.psi.order

    @property
    def mode(self) -> str:
        return self.psi.mode

    def residual_max_by_degree(self) -> dict:
        return {
            "field": self.residual_field.max_abs_by_degree(),
            "surface": self.residual_surface.max_abs_by_degree(),
        }

    def is_exact_conjugation(self) -> bool:
        return all(c.is_zero() for c in self.residual_field) and self.residual_surface.is_zero()

    def to_json(self) -> dict:
        conv = scalar_str if self.mode == EXACT else float
        res = self.residual_max_by_degree()
        return {
            "k": self.k,
            "m": self.m,
            "psi": self.psi.to_json(),
            "psi_inv": self.psi_inv.to_json(),
            "trace": self.trace.to_json(),
            "residual_max_by_degree": {key: [conv(v) for v in vals] for key, vals in res.items()},
        }


def _reorder_prepared(jet: Jet, m: int) -> Jet:
    """Prepared coefficients live in ``(u, y_2..y_{m-1})``; move ``u`` last."""
    return jet.embed(m - 1, [m - 2] + list(range(m - 2)))


def vishik_normal_form(X: VectorFieldJet, S: SurfaceSpec | Jet, order: int | None = None,
                       k_max: int | None = None) -> NormalFormResult:
    """Conjugate ``X`` near a simple k-contact with ``{h = 0}`` to the model.

    Parameters
    ----------
    X : VectorFieldJet
        The field, centered at the contact point.
    S : SurfaceSpec or Jet
        The surface ``h = 0``.
    order : int, optional
        Jet order ``N`` (defaults to that of ``X``; may only lower it).
    k_max : int, optional
        Largest contact order examined; defaults to ``N - 1`` so that
        contacts above ``m - 1`` are reported as such.

    Raises :class:`EquilibriumError`, :class:`NotAContactError`,
    :class:`DimensionError`, :class:`NotSimpleError` or :class:`OrderError`
    when the hypotheses fail.
    """
    h = S.h if isinstance(S, SurfaceSpec) else S
    if order is not None and order != X.order:
        X, h = X.truncate(order), h.truncate(order)
    S = SurfaceSpec(h)
    m, N, mode = X.m, X.order, X.mode
    if h.nvars != m:
        raise ShapeError("surface and field dimensions differ")
    if all(is_negligible(v, mode, 1.0) for v in X.at_origin()):
        raise EquilibriumError("X(0) = 0: the base point is an equilibrium")
    report = contact_order(X, S, N - 1 if k_max is None else k_max)
    k = report.k
    if k == 0:
        raise NotAContactError("X is transversal to the surface (contact order 0): not a contact")
    if k > m - 1:
        raise DimensionError(f"contact order {k} exceeds m - 1 = {m - 1}")
    if not report.simple:
        raise NotSimpleError(f"the {k}-contact is not simple (gradient rank {report.rank} < {k + 1})")
    if N < k + 2:
        raise OrderError(f"jet order {N} too low for a {k}-contact; need N >= {k + 2}")

    # flow box and graph of the surface
    alpha_hat, alpha_hat_inv = flow_box(X, return_inverse=True)
    mags = [abs(v) for v in X.at_origin()]
    axis = mags.index(max(mags))
    Phi, tperm = straighten_surface(alpha_hat, h, alpha_hat_inv)
    P = JetMap.permutation(tperm, N, mode)
    alpha_check = shear(Phi)
    phi0 = _shifted_graph(Phi)

    # column permutation of y_2..y_{m-1}
    cperm = choose_column_permutation(phi0, k)
    sigma = JetMap.permutation(cperm, N, mode)
    inv = [0] * m
    for i, p in enumerate(cperm):
        inv[p] = i
    # phi in the permuted coordinates: phi'(y') = phi(y'[inv])
    phi = compose(phi0, JetMap(tuple(Jet.variable(inv[i], m - 1, N, mode) for i in range(m - 1))))

    # preparation: y_1^{k+1} + sum y_1^i a_i(y_2..y_{m-1}, phi) = b(..., phi)
    a_raw, b_raw = prepare(phi, k + 1)
    a = [_reorder_prepared(ai, m) for ai in a_raw]
    b = _reorder_prepared(b_raw, m)
    A_matrix = [[a[i].gradient()[j - 2] for j in range(2, k + 1)] for i in range(k - 1)]
    B_bar = _mixed_matrix(phi, range(1, k + 1), range(1, k + 1))
    db_dym = b.gradient()[m - 2]
    beta = build_beta(a, b, k, m)
    det_Dbeta = linalg.det(beta.linear_part(), mode)
    gamma = build_gamma(k, m, N, mode)

    alpha = sigma.compose(alpha_check.compose(P.compose(alpha_hat)))
    psi = gamma.compose(beta.compose(alpha))
    psi_inv = invert_map(psi)

    model = model_field(k, m, N - 1, mode)
    Y = pushforward(psi, X, psi_inv)
    residual_field = Y - model
    G, _ = surface_graph(h)
    residual_surface = compose(psi.components[0], G)

    trace = NormalFormTrace(
        alpha_hat=alpha_hat,
        transversal_permutation=tperm,
        Phi=Phi,
        alpha_check=alpha_check,
        phi=phi,
        column_permutation=cperm,
        a=a,
        b=b,
        beta=beta,
        gamma=gamma,
        A_matrix=A_matrix,
        B_bar_matrix=B_bar,
        det_Dbeta=det_Dbeta,
        db_dym=db_dym,
        flow_axis=axis,
        contact=report,
    )
    log.debug("normal form k=%d m=%d N=%d done", k, m, N)
    return NormalFormResult(k, m, psi, psi_inv, trace, residual_field, residual_surface, alpha)


@dataclass
class ResidualReport:
    """Per-degree maxima of the recomputed residuals."""

    field: list
    surface: list
    inverse: list
    mode: str

    @property
    def ok(self) -> bool:
        if self.mode == EXACT:
            return not any(self.field) and not any(self.surface) and not any(self.inverse)
        tol = 1e-8
        return max(self.field + self.surface + self.inverse, default=0) < tol

    def max(self):
        return max(self.field + self.surface + self.inverse, default=0)

    def to_json(self) -> dict:
        conv = scalar_str if self.mode == EXACT else float
        return {
            "field": [conv(v) for v in self.field],
            "surface": [conv(v) for v in self.surface],
            "inverse": [conv(v) for v in self.inverse],
            "ok": self.ok,
        }


def verify(result: NormalFormResult, X: VectorFieldJet, S: SurfaceSpec | Jet) -> ResidualReport:
    """Recompute the residuals without the pushforward.

    Field: ``D psi . X - model o psi`` (no inverse map involved), through
    order ``N - 1``.  Surface: ``psi_1`` along a graph parametrization that
    solves for a different coordinate than the constructor when possible.
    Inverse: ``psi o psi_inv - id``.
    """
    h = S.h if isinstance(S, SurfaceSpec) else S
    psi = result.psi
    N, mode, m = psi.order, psi.mode, psi.dim
    X = X.truncate(N) if X.order > N else X
    h = h.truncate(N) if h.order > N else h
    lhs = _apply_field(psi, X)
    model = model_field(result.k, m, N - 1, mode)
    rhs = compose_many(list(model.components), psi.truncate(N - 1))
    field_res = [l - r for l, r in zip(lhs, rhs)]
    G, _ = surface_graph(h, prefer_last=False)
    surf = compose(psi.components[0], G)
    ident = psi.compose(result.psi_inv) - JetMap.identity(m, N, mode)

    def per_degree(jets):
        per = [j.max_abs_by_degree() for j in jets]
        return [max(col) for col in zip(*per)]

    return ResidualReport(per_degree(field_res), surf.max_abs_by_degree(), per_degree(ident.components), mode)
