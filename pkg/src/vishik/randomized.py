"""Seeded random test instances.

Every random choice goes through :class:`LCG`, a 64-bit linear congruential
generator with Knuth's MMIX constants, so that a seed fixes the instances
independently of the Python version or platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

from .series import EXACT, Jet, JetMap, VectorFieldJet, compose, invert_map
from .normal_form import model_field, pushforward

LCG_MULTIPLIER = 6364136223846793005
LCG_INCREMENT = 1442695040888963407
LCG_MODULUS = 1 << 64

# the cases of the conjugation suite: (k, m)
SUITE_SHAPES = ((1, 2), (1, 3), (2, 3), (2, 4), (3, 4))


class LCG:
    """``state <- (a * state + c) mod 2^64``; outputs are the high 32 bits."""

    def __init__(self, seed: int = 0):
        self.state = seed % LCG_MODULUS

    def next_u32(self) -> int:
        self.state = (LCG_MULTIPLIER * self.state + LCG_INCREMENT) % LCG_MODULUS
        return self.state >> 32

    def randint(self, lo: int, hi: int) -> int:
        """Uniform-ish integer in ``[lo, hi]`` (modulo reduction of ``next_u32``)."""
        return lo + self.next_u32() % (hi - lo + 1)

    def chance(self, num: int, den: int) -> bool:
        return self.next_u32() % den < num

    def fork(self, index: int) -> "LCG":
        """Independent stream for case ``index``."""
        g = LCG(self.state ^ ((index + 1) * 0x9E3779B97F4A7C15 % LCG_MODULUS))
        g.next_u32()
        return g


def _monomials(m: int, degree: int):
    for combo in combinations_with_replacement(range(m), degree):
        exp = [0] * m
        for v in combo:
            exp[v] += 1
        yield tuple(exp)


def random_unimodular(rng: LCG, m: int, bound: int = 2) -> list[list[int]]:
    """Integer matrix ``U L`` with unit triangular factors, so ``det = 1``."""
    U = [[1 if i == j else (rng.randint(-bound, bound) if j > i else 0) for j in range(m)] for i in range(m)]
    L = [[1 if i == j else (rng.randint(-bound, bound) if j < i else 0) for j in range(m)] for i in range(m)]
    return [[sum(U[i][r] * L[r][j] for r in range(m)) for j in range(m)] for i in range(m)]


def random_diffeo(rng: LCG, m: int, order: int, mode: str = EXACT, degree: int = 3,
                  coef_bound: int = 2, density: tuple[int, int] = (1, 3)) -> JetMap:
    """Origin-preserving polynomial map of degree ``<= degree`` with a
    unit-determinant integer linear part and integer nonlinear coefficients."""
    lin = random_unimodular(rng, m)
    comps = []
    for i in range(m):
        terms = {}
        for j in range(m):
            if lin[i][j]:
                terms[tuple(int(r == j) for r in range(m))] = lin[i][j]
        for d in range(2, degree + 1):
            for exp in _monomials(m, d):
                if rng.chance(*density):
                    c = rng.randint(-coef_bound, coef_bound)
                    if c:
                        terms[exp] = c
        comps.append(Jet(m, order, terms, mode))
    return JetMap(tuple(comps))


def random_unit(rng: LCG, m: int, order: int, mode: str = EXACT, degree: int = 2) -> Jet:
    """Polynomial with nonzero constant term."""
    terms = {(0,) * m: rng.randint(1, 3) * (1 if rng.chance(1, 2) else -1)}
    for d in range(1, degree + 1):
        for exp in _monomials(m, d):
            if rng.chance(1, 3):
                terms[exp] = rng.randint(-2, 2)
    return Jet(m, order, terms, mode)


@dataclass(frozen=True)
class ConjugatedCase:
    """A model pulled back by ``G``: ``G_* X = model`` and ``h = x_1 o G``."""

    k: int
    m: int
    X: VectorFieldJet
    h: Jet
    G: JetMap
    index: int = 0


def conjugate_model(model: VectorFieldJet, G: JetMap, h_model: Jet | None = None):
    """Pull ``model`` and ``h_model`` (default ``x_1``) back through ``G``.

    Both ``model`` and ``G`` are given at order ``N + 1``; the returned
    field is certified through ``N``.  Returns ``(X, h)`` at order ``N``.
    """
    N1 = G.order
    m = G.dim
    G_inv = invert_map(G)
    X = pushforward(G_inv, model, G)  # (DG^{-1} . model) o G
    if h_model is None:
        h_model = Jet.variable(0, m, N1, G.mode)
    h = compose(h_model, G).truncate(N1 - 1)
    return X, h


def conjugation_case(k: int, m: int, seed: int, index: int, order: int = 6,
                     mode: str = EXACT) -> ConjugatedCase:
    """Case ``index`` of the conjugation suite for ``(k, m)``.

    The case is always built in exact arithmetic; float mode converts the
    finished data, so both modes see the same problem.
    """
    rng = LCG(seed).fork(1000 * (10 * k + m) + index)
    G = random_diffeo(rng, m, order + 1, EXACT)
    model = model_field(k, m, order + 1, EXACT)
    X, h = conjugate_model(model, G)
    G = G.truncate(order)
    if mode != EXACT:
        X, h, G = X.astype(mode), h.astype(mode), G.astype(mode)
    return ConjugatedCase(k, m, X, h, G, index)


def conjugation_suite(seed: int = 0, per_shape: int = 20, order: int = 6, mode: str = EXACT,
                      shapes=SUITE_SHAPES) -> list[ConjugatedCase]:
    return [conjugation_case(k, m, seed, i, order, mode) for k, m in shapes for i in range(per_shape)]


def _nonsimple_model(k: int, m: int, order: int, mode: str) -> VectorFieldJet:
    """``(x_2^k, 1, 0, ..., 0)``: contact order ``k`` with ``{x_1 = 0}``,
    not simple once ``k >= 2`` since ``grad(Xh)(0) = 0``."""
    comps = [Jet.variable(1, m, order, mode) ** k, Jet.constant(1, m, order, mode)]
    comps += [Jet.zero(m, order, mode)] * (m - 2)
    return VectorFieldJet(tuple(comps))


def planted_contact_case(seed: int, index: int, order: int = 6, mode: str = EXACT):
    """Random ``(X, h, k, m)`` with planted contact order ``k in 0..3``.

    Alternates between conjugated models (simple contacts) and conjugated
    fields ``(x_2^k, 1, 0, ...)`` (non-simple for ``k >= 2``); ``h`` is
    multiplied by a random unit, which changes neither ``k`` nor simplicity.
    Returns ``(X, h, k, m, simple)``.
    """
    rng = LCG(seed).fork(77_000 + index)
    k = index % 4
    m = max(k + 1, 2) + rng.randint(0, 1)
    m = min(m, 4) if k < 3 else 4
    G = random_diffeo(rng, m, order + 1, mode)
    if k == 0:
        model = VectorFieldJet(tuple([Jet.constant(1, m, order + 1, mode)]
                                     + [Jet.zero(m, order + 1, mode)] * (m - 1)))
        simple = True
    elif (index // 4) % 2 == 0:
        model = model_field(k, m, order + 1, mode)
        simple = True
    else:
        model = _nonsimple_model(k, m, order + 1, mode)
        simple = k <= 1
    X, h = conjugate_model(model, G)
    h = h * random_unit(rng, m, order, mode)
    return X, h, k, m, simple
