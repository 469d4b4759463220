"""Formal Weierstrass division and the preparation identity built on it.

Division of ``g`` by a divisor ``d(t, u, x)`` that is t-regular of order
``s`` (``d(t, 0, 0) = t^s * unit``) yields

    g = q * d + sum_{i < s} t^i r_i(u, x).

The jets are treated as exact polynomials.  Solving degree by degree in the
total degree is not triangular (``d`` may contain ``-u`` while its leading
t-term has degree ``s``), but it is in the weighted degree ``wt(t) = 1``,
``wt(u) = wt(x_j) = s``: every term of ``d`` has weight >= s, and the only
weight-s terms are ``c t^s`` and the linear part in ``(u, x)``.  Within one
weight the unknowns are eliminated by decreasing power of ``t``.  All
monomials of total degree <= N have weight <= s*N, so solving up to that
weight yields the remainders exactly through total degree N.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ContactOrderError, NotRegularError, ShapeError
from .jet import BITS, Jet, is_negligible, key_degree, to_scalar
from .maps import JetMap, compose_many

_MASK = (1 << BITS) - 1


@dataclass(frozen=True)
class DivisionResult:
    """``g = quotient * d + sum_i t^i remainders[i]``.

    ``quotient`` lives in ``(t, u, x_1..x_n)`` and is certified through
    degree ``N - 1`` (all that enters the identity at order N); each
    remainder lives in ``(u, x_1..x_n)`` and is exact through degree N.
    """

    quotient: Jet
    remainders: tuple[Jet, ...]
    s: int

    def residual(self, g: Jet, d: Jet) -> Jet:
        """``g - q d - sum t^i r_i`` in ``(t, u, x)``; zero when the identity holds."""
        g = _lift_dividend(g, d)
        n2 = d.nvars
        t = Jet.variable(0, n2, d.order, d.mode)
        acc = g - self.quotient * d
        tp = Jet.constant(1, n2, d.order, d.mode)
        for r in self.remainders:
            acc = acc - tp * r.embed(n2, list(range(1, n2)))
            tp = tp * t
        return acc


def _lift_dividend(g: Jet, d: Jet) -> Jet:
    if (g.order, g.mode) != (d.order, d.mode):
        raise ShapeError("dividend and divisor must share order and mode")
    if g.nvars == d.nvars:
        return g
    if g.nvars == d.nvars - 1:
        # g(t, x): insert the u slot
        return g.embed(d.nvars, [0] + list(range(2, d.nvars)))
    raise ShapeError("dividend must live in (t, x) or (t, u, x)")


def _check_regular(d: Jet, s: int):
    scale = max(d.max_abs_by_degree(), default=0)
    for j in range(s):
        c = d._terms.get(j, 0)  # pure t^j has packed key j
        if not is_negligible(c, d.mode, scale):
            raise NotRegularError(f"divisor has a t^{j} term at (u, x) = 0; not t-regular of order {s}")
    lead = d._terms.get(s, 0)
    if is_negligible(lead, d.mode, scale):
        raise NotRegularError(f"divisor has no t^{s} term at (u, x) = 0; not t-regular of order {s}")
    return lead


def weierstrass_divide(g: Jet, d: Jet, s: int) -> DivisionResult:
    """Divide ``g`` by the t-regular divisor ``d`` of order ``s``.

    Parameters
    ----------
    g : Jet
        Dividend in ``(t, x_1..x_n)`` or ``(t, u, x_1..x_n)``.
    d : Jet
        Divisor in ``(t, u, x_1..x_n)``; variable 0 is ``t``.
    s : int
        Regularity order, ``s >= 1``.
    """
    if s < 1:
        raise ShapeError("regularity order must be positive")
    if d.nvars < 2:
        raise ShapeError("divisor needs at least the variables (t, u)")
    g = _lift_dividend(g, d)
    mode, N, nv = d.mode, d.order, d.nvars
    lead = _check_regular(d, s)
    inv_lead = to_scalar(1, mode) / lead

    # split keys into (t exponent, packed (u, x) part); the (u, x) part keeps
    # its position bits so products stay key sums
    def split(key):
        return key & _MASK, key >> BITS

    dterms = []
    for k, c in d._terms.items():
        a, rk = split(k)
        if rk == 0 and a < s:
            continue  # negligible float residue, already checked
        if rk == 0 and a == s:
            continue  # the leading term cancels by construction
        dterms.append((a, rk, c))

    wmax = s * N
    # buckets[W][a] -> {rk: coef}
    buckets: list[dict[int, dict[int, object]]] = [dict() for _ in range(wmax + 1)]

    def deposit(a, rk, c):
        w = a + s * key_degree(rk)
        if w > wmax:
            return
        row = buckets[w].setdefault(a, {})
        row[rk] = row.get(rk, 0) + c

    for k, c in g._terms.items():
        deposit(*split(k), c)

    quotient: dict[tuple[int, int], object] = {}
    rems: list[dict[int, object]] = [dict() for _ in range(s)]
    for w in range(wmax + 1):
        bucket = buckets[w]
        if not bucket:
            continue
        a = max(bucket)
        while a >= 0:
            row = bucket.get(a)
            if row:
                for rk, c in row.items():
                    if not c:
                        continue
                    if a >= s:
                        qc = c * inv_lead
                        qa = a - s
                        quotient[(qa, rk)] = quotient.get((qa, rk), 0) + qc
                        for da, drk, dc in dterms:
                            deposit(qa + da, rk + drk, -qc * dc)
                    else:
                        rems[a][rk] = rems[a].get(rk, 0) + c
            a -= 1

    qjet = Jet._raw(nv, N, mode, {qa | (rk << BITS): c for (qa, rk), c in quotient.items()
                                  if c and qa + key_degree(rk) <= N - 1})
    remainders = tuple(
        Jet._raw(nv - 1, N, mode, {k: c for k, c in r.items() if c and key_degree(k) <= N})
        for r in rems
    )
    return DivisionResult(qjet, remainders, s)


def prepare(phi: Jet, s: int) -> tuple[list[Jet], Jet]:
    """Coefficients of the prepared identity for ``phi(t, x)``.

    Returns ``(a, b)`` with ``a = [a_1, ..., a_{s-1}]`` and ``b`` jets in
    ``(u, x_1..x_n)`` such that, substituting ``u = phi(t, x)``,

        t^s + sum_{i=1}^{s-1} t^i a_i(phi, x) = b(phi, x)

    through the jet order.  Obtained by dividing ``t^s`` by ``phi - u``:
    ``b = r_0`` and ``a_i = -r_i``.
    """
    mode, N, n1 = phi.mode, phi.order, phi.nvars
    if n1 < 1:
        raise ShapeError("phi needs the variable t")
    if s < 1 or s > N:
        raise ContactOrderError(f"regularity order {s} outside 1..{N}")
    scale = max(phi.max_abs_by_degree(), default=0)
    for i in range(s):
        if not is_negligible(phi._terms.get(i, 0), mode, scale):
            raise ContactOrderError(f"d^{i}phi/dt^{i}(0) != 0; phi is not of order {s} in t")
    if is_negligible(phi._terms.get(s, 0), mode, scale):
        raise ContactOrderError(f"d^{s}phi/dt^{s}(0) = 0; phi vanishes to higher order than {s}")
    nv = n1 + 1
    lifted = phi.embed(nv, [0] + list(range(2, nv)))
    d = lifted - Jet.variable(1, nv, N, mode)
    g = Jet.monomial((s,) + (0,) * (n1 - 1), 1, N, mode)
    div = weierstrass_divide(g, d, s)
    b = div.remainders[0]
    a = [-r for r in div.remainders[1:]]
    return a, b


def prepared_residual(phi: Jet, a, b) -> Jet:
    """``t^s + sum t^i a_i(phi, x) - b(phi, x)`` as a jet in ``(t, x)``."""
    n1, N, mode = phi.nvars, phi.order, phi.mode
    s = len(a) + 1
    inner = JetMap((phi,) + tuple(Jet.variable(i, n1, N, mode) for i in range(1, n1)))
    subs = compose_many(list(a) + [b], inner)
    t = Jet.variable(0, n1, N, mode)
    acc = t ** s - subs[-1]
    tp = t
    for ai in subs[:-1]:
        acc = acc + tp * ai
        tp = tp * t
    return acc
