"""Shared test helpers, including the sympy oracles."""

import sympy as sp
from gmpy2 import mpq

from vishik.series import Jet, JetMap, VectorFieldJet

# criterion number -> (passed, detail); filled by test_acceptance, printed at the end
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def var(i, n, order=6, mode="exact"):
    return Jet.variable(i, n, order, mode)


def const(c, n, order=6, mode="exact"):
    return Jet.constant(c, n, order, mode)


def field(*comps):
    return VectorFieldJet(tuple(comps))


def jmap(*comps):
    return JetMap(tuple(comps))


def syms(n):
    return sp.symbols(f"z0:{n}")


def to_sympy(jet, symbols):
    return sum((sp.Rational(int(c.numerator), int(c.denominator)) * sp.Mul(*[s**e for s, e in zip(symbols, exp)])
                for exp, c in jet.terms.items()), sp.Integer(0))


def truncate_sympy(expr, symbols, order):
    """Drop all terms of total degree > order from a polynomial."""
    poly = sp.Poly(sp.expand(expr), *symbols)
    return sum((c * sp.Mul(*[s**e for s, e in zip(symbols, m)])
                for m, c in poly.terms() if sum(m) <= order), sp.Integer(0))


def from_sympy(expr, symbols, order=6):
    poly = sp.Poly(sp.expand(expr), *symbols)
    terms = {}
    for m, c in poly.terms():
        if sum(m) <= order:
            c = sp.Rational(c)
            terms[m] = f"{c.p}/{c.q}"
    return Jet(len(symbols), order, {k: mpq(v) for k, v in terms.items()})


def max_abs(values):
    return max((abs(v) for v in values), default=0)


# random jets for the division tests

def random_jet(rng, n, order, density=(1, 3), bound=3, lowest=0, top=None):
    terms = {}
    for exp in exponents(n, order if top is None else top):
        if sum(exp) >= lowest and rng.chance(*density):
            terms[exp] = rng.randint(-bound, bound)
    return Jet(n, order, terms)


def exponents(n, order):
    if n == 0:
        yield ()
        return
    for e in range(order + 1):
        for rest in exponents(n - 1, order - e):
            yield (e,) + rest


def random_divisor(rng, s, n, order):
    """t-regular of order s in (t, u, x_1..x_n): lead * t^s plus terms vanishing at (u, x) = 0."""
    d = random_jet(rng, n + 2, order)
    # drop pure powers of t, then plant the leading one
    keep = {e: c for e, c in d.terms.items() if any(e[1:])}
    keep[(s,) + (0,) * (n + 1)] = rng.randint(1, 3) * (1 if rng.chance(1, 2) else -1)
    keep[(s + 1,) + (0,) * (n + 1)] = rng.randint(-2, 2)
    return Jet(n + 2, order, keep)
