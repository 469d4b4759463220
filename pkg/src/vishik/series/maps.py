"""Map germs: composition, inversion, implicit functions and flows."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Sequence

from ..errors import (
    BasePointError,
    CompositionDomainError,
    ImplicitSolveError,
    NonInvertibleError,
    ShapeError,
)
from .. import linalg
from .jet import BITS, EXACT, Jet, _mul_graded, is_negligible, key_degree, to_scalar


def _same_shape(jets: Sequence[Jet], what: str):
    if not jets:
        raise ShapeError(f"{what} needs at least one component")
    first = jets[0]
    for j in jets[1:]:
        if (j.nvars, j.order, j.mode) != (first.nvars, first.order, first.mode):
            raise ShapeError(f"{what} components must share nvars, order and mode")


@dataclass(frozen=True)
class JetMap:
    """Map germ ``R^n -> R^m`` given by ``m`` jets in ``n`` variables."""

    components: tuple[Jet, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        _same_shape(comps, "JetMap")
        object.__setattr__(self, "components", comps)

    @property
    def domain_vars(self) -> int:
        return self.components[0].nvars

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def order(self) -> int:
        return self.components[0].order

    @property
    def mode(self) -> str:
        return self.components[0].mode

    @property
    def base_shift(self) -> tuple:
        return tuple(c.constant_term for c in self.components)

    @property
    def origin_preserving(self) -> bool:
        return all(c.constant_term == 0 for c in self.components)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def linear_part(self) -> list[list]:
        """Jacobian matrix at the origin (rows: components)."""
        return [c.gradient() for c in self.components]

    def jacobian(self) -> list[list[Jet]]:
        return [[c.derive(j) for j in range(self.domain_vars)] for c in self.components]

    def truncate(self, order: int) -> "JetMap":
        return JetMap(tuple(c.truncate(order) for c in self.components))

    def astype(self, mode: str) -> "JetMap":
        return JetMap(tuple(c.astype(mode) for c in self.components))

    def compose(self, inner: "JetMap", order: int | None = None) -> "JetMap":
        """``self o inner``."""
        return JetMap(tuple(compose_many(self.components, inner, order=order)))

    def __sub__(self, other: "JetMap") -> "JetMap":
        return JetMap(tuple(a - b for a, b in zip(self.components, other.components, strict=True)))

    def is_identity(self) -> bool:
        return self == JetMap.identity(self.dim, self.order, self.mode)

    def max_abs_by_degree(self) -> list:
        per = [c.max_abs_by_degree() for c in self.components]
        return [max(col) for col in zip(*per)]

    @classmethod
    def identity(cls, n: int, order: int, mode: str = EXACT) -> "JetMap":
        return cls(tuple(Jet.variable(i, n, order, mode) for i in range(n)))

    @classmethod
    def linear(cls, matrix, order: int, mode: str = EXACT) -> "JetMap":
        """``x -> matrix @ x``."""
        n = len(matrix[0])
        comps = []
        for row in matrix:
            terms = {tuple(int(i == j) for i in range(n)): a for j, a in enumerate(row)}
            comps.append(Jet(n, order, terms, mode))
        return cls(tuple(comps))

    @classmethod
    def permutation(cls, perm: Sequence[int], order: int, mode: str = EXACT) -> "JetMap":
        """Coordinate permutation: new coordinate ``i`` is old coordinate ``perm[i]``."""
        n = len(perm)
        return cls(tuple(Jet.variable(p, n, order, mode) for p in perm))

    def to_json(self) -> list:
        return [c.to_json() for c in self.components]

    @classmethod
    def from_json(cls, data) -> "JetMap":
        return cls(tuple(Jet.from_json(d) for d in data))


@dataclass(frozen=True)
class VectorFieldJet:
    """Vector field on ``R^m``: ``m`` component jets in ``m`` variables."""

    components: tuple[Jet, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        _same_shape(comps, "VectorFieldJet")
        if comps[0].nvars != len(comps):
            raise ShapeError("a vector field on R^m needs m components in m variables")
        object.__setattr__(self, "components", comps)

    @property
    def m(self) -> int:
        return len(self.components)

    @property
    def order(self) -> int:
        return self.components[0].order

    @property
    def mode(self) -> str:
        return self.components[0].mode

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def at_origin(self) -> tuple:
        return tuple(c.constant_term for c in self.components)

    def truncate(self, order: int) -> "VectorFieldJet":
        return VectorFieldJet(tuple(c.truncate(order) for c in self.components))

    def astype(self, mode: str) -> "VectorFieldJet":
        return VectorFieldJet(tuple(c.astype(mode) for c in self.components))

    def __sub__(self, other: "VectorFieldJet") -> "VectorFieldJet":
        return VectorFieldJet(tuple(a - b for a, b in zip(self.components, other.components, strict=True)))

    def max_abs_by_degree(self) -> list:
        per = [c.max_abs_by_degree() for c in self.components]
        return [max(col) for col in zip(*per)]

    @classmethod
    def from_polynomials(cls, polys: Sequence[Jet]) -> "VectorFieldJet":
        return cls(tuple(polys))

    def to_json(self) -> list:
        return [c.to_json() for c in self.components]


# composition

def _compose_packed(fs: Sequence[Jet], comps: Sequence[Jet], limit: int) -> list[dict]:
    """Raw substitution ``f(comps)`` for each ``f``, truncated at ``limit``.

    ``comps`` must have zero constant terms.  Powers ``comps^a`` are built
    once, each from its parent ``a - e_i`` (``i`` the lowest used variable),
    and shared by all outer jets.  ``comps^a`` starts in degree ``|a|``, so
    high powers only touch the top few degrees.
    """
    mode = comps[0].mode if comps else fs[0].mode
    one = to_scalar(1, mode)
    graded = [c.graded()[: limit + 1] for c in comps]
    cache: dict[int, list] = {0: [[(0, one)]]}

    def power(key: int):
        g = cache.get(key)
        if g is not None:
            return g
        i = 0
        while not (key >> (BITS * i)) & ((1 << BITS) - 1):
            i += 1
        parent = power(key - (1 << (BITS * i)))
        lo = key_degree(key)
        prod = _mul_graded(parent, graded[i], limit, lo)
        g = [[] for _ in range(limit + 1)]
        for k, c in prod.items():
            g[key_degree(k)].append((k, c))
        cache[key] = g
        return g

    results = []
    for f in fs:
        out: dict[int, object] = {}
        get = out.get
        for key, c in f._terms.items():
            if key_degree(key) > limit:
                continue
            for grade in power(key):
                for k, v in grade:
                    out[k] = get(k, 0) + c * v
        results.append({k: v for k, v in out.items() if v})
    return results


def compose_many(fs: Sequence[Jet], g: JetMap, order: int | None = None) -> list[Jet]:
    """Compose several jets in ``g.dim`` variables with the same inner map."""
    if not isinstance(g, JetMap):
        g = JetMap(tuple(g))
    if not g.origin_preserving:
        raise CompositionDomainError("inner map must fix the origin (use Jet.translate first)")
    for f in fs:
        if f.nvars != g.dim:
            raise ShapeError(f"outer jet has {f.nvars} variables but inner map has {g.dim} components")
        if f.mode != g.mode:
            raise ShapeError("scalar modes differ")
    limit = min([g.order] + [f.order for f in fs])
    if order is not None:
        if order > limit:
            raise ShapeError(f"requested order {order} exceeds certified order {limit}")
        limit = order
    packed = _compose_packed(fs, g.components, limit)
    return [Jet._raw(g.domain_vars, limit, g.mode, p) for p in packed]


def compose(f: Jet, g: JetMap, order: int | None = None) -> Jet:
    """Taylor jet of ``f o g`` for an origin-preserving inner map ``g``.

    The result is certified to ``min(f.order, g.order)``.
    """
    return compose_many([f], g, order=order)[0]


# linear-algebra helpers on jet vectors

def _apply_matrix(matrix, jets: Sequence[Jet]) -> list[Jet]:
    out = []
    for row in matrix:
        acc = None
        for a, j in zip(row, jets):
            if a:
                acc = j.scale(a) if acc is None else acc + j.scale(a)
        out.append(acc if acc is not None else Jet.zero(jets[0].nvars, jets[0].order, jets[0].mode))
    return out


def invert_map(F: JetMap) -> JetMap:
    """Formal inverse of an origin-preserving map with invertible linear part.

    Writes ``F = L + R`` (``R`` of degree >= 2) and iterates
    ``G <- L^-1 (y - R(G))``; iteration ``j`` fixes degree ``j`` and is run
    truncated at ``j``.
    """
    if F.dim != F.domain_vars:
        raise ShapeError("invert_map needs a square map")
    if not F.origin_preserving:
        raise CompositionDomainError("invert_map needs an origin-preserving map")
    n, order, mode = F.dim, F.order, F.mode
    L = F.linear_part()
    Linv = linalg.inverse(L, mode)
    rest = [c - c.homogeneous_part(1) for c in F.components]
    ident = JetMap.identity(n, order, mode)
    G = _apply_matrix(Linv, list(ident.components))
    if all(r.is_zero() for r in rest):
        return JetMap(tuple(G))
    for j in range(2, order + 1):
        RG = [Jet._raw(n, order, mode, p) for p in _compose_packed(rest, G, j)]
        G = _apply_matrix(Linv, [y - r for y, r in zip(ident.components, RG)])
        G = [_cut(g, j) for g in G]
    return JetMap(tuple(G))


def _cut(jet: Jet, degree: int) -> Jet:
    """Drop terms above ``degree`` but keep the jet's nominal order."""
    return Jet._raw(jet.nvars, jet.order, jet.mode,
                    {k: c for k, c in jet._terms.items() if key_degree(k) <= degree})


def solve_implicit(f: Jet, solved_var: int) -> Jet:
    """Graph ``y_v = Phi(y')`` of ``f = 0`` near the origin.

    Requires ``f(0) = 0`` and ``df/dy_v(0) != 0``; ``y'`` are the remaining
    variables in their original order.  Iterates ``Phi <- Phi - f(y', Phi)/c``
    with ``c = df/dy_v(0)``, gaining one degree per step.
    """
    n, order, mode = f.nvars, f.order, f.mode
    if not 0 <= solved_var < n:
        raise ShapeError(f"variable {solved_var} out of range")
    scale = max(f.max_abs_by_degree()[:2], default=0)
    if not is_negligible(f.constant_term, mode, scale):
        raise BasePointError("implicit solve needs f(0) = 0")
    c = f.gradient()[solved_var]
    if is_negligible(c, mode, scale):
        raise ImplicitSolveError(f"df/dy_{solved_var + 1}(0) vanishes; cannot solve for it")
    f = f - f.constant_term
    rest = [Jet.variable(i, n - 1, order, mode) for i in range(n - 1)]
    phi = Jet.zero(n - 1, order, mode)
    for j in range(1, order + 1):
        comps = rest[:solved_var] + [phi] + rest[solved_var:]
        val = Jet._raw(n - 1, order, mode, _compose_packed([f], comps, j)[0])
        phi = _cut(phi - val / c, j)
    return phi


def graph_map(phi: Jet, solved_var: int) -> JetMap:
    """Parametrization ``y' -> (y' with phi inserted at solved_var)``."""
    n1, order, mode = phi.nvars, phi.order, phi.mode
    rest = [Jet.variable(i, n1, order, mode) for i in range(n1)]
    return JetMap(tuple(rest[:solved_var] + [phi] + rest[solved_var:]))


# vector fields

def lie_derivative(h: Jet, X: VectorFieldJet) -> Jet:
    """``Xh = grad h . X``.

    Certified through ``min(h.order - 1, X.order)``: each derivative costs
    one degree, and the result carries that lower order.
    """
    if h.nvars != X.m or h.mode != X.mode:
        raise ShapeError("h and X must share the number of variables and mode")
    order = min(h.order - 1, X.order)
    if order < 0:
        raise ShapeError("jet order exhausted by differentiation")
    acc = Jet.zero(h.nvars, order, h.mode)
    for i, Xi in enumerate(X.components):
        dh = h.derive(i).truncate(order)
        if dh.is_zero():
            continue
        acc = acc + dh * Xi.truncate(order)
    return acc


def flow(X: VectorFieldJet, order: int | None = None) -> JetMap:
    """Lie-series flow ``(t, x) -> X_t(x)`` in the variables ``(t, x_1..x_m)``.

    Component ``i`` is ``sum_j t^j (X^j x_i) / j!`` truncated to total degree
    ``order`` (default ``X.order``).
    """
    m = X.m
    N = X.order if order is None else order
    if N > X.order:
        raise ShapeError("flow order cannot exceed the field's order")
    X = X.truncate(N)
    mode = X.mode
    positions = list(range(1, m + 1))
    t = Jet.variable(0, m + 1, N, mode)
    comps = []
    for i in range(m):
        g = Jet.variable(i, m, N, mode)
        total = g.embed(m + 1, positions)
        tj = Jet.constant(1, m + 1, N, mode)
        for j in range(1, N + 1):
            g = lie_derivative(g, X)
            tj = tj * t
            if g.is_zero():
                break
            lifted = Jet._raw(m + 1, N, mode, g.embed(m + 1, positions)._terms)
            total = total + (tj * lifted) / factorial(j)
        comps.append(total)
    return JetMap(tuple(comps))
