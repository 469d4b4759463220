"""Truncated multivariate power series.

A :class:`Jet` stores the Taylor coefficients of a germ at the origin up to a
total-degree bound ``order``.  Coefficients are either exact rationals
(``gmpy2.mpq``) or Python floats; a jet never mixes the two.

Internally an exponent vector ``(e_0, ..., e_{n-1})`` is packed into the
integer ``sum(e_i << (BITS * i))``.  With every exponent below ``1 << BITS``
the product of two monomials is the sum of their keys, which keeps the inner
multiplication loop to a single integer addition.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from ..errors import ShapeError

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)

FLOAT_TOL = 1e-9

BITS = 6
MAX_ORDER = (1 << BITS) - 1
_MASK = MAX_ORDER

_DEGREE: dict[int, int] = {0: 0}


def key_degree(key: int) -> int:
    try:
        return _DEGREE[key]
    except KeyError:
        d, k = 0, key
        while k:
            d += k & _MASK
            k >>= BITS
        _DEGREE[key] = d
        return d


def pack(exp: Sequence[int]) -> int:
    key = 0
    for i, e in enumerate(exp):
        key |= e << (BITS * i)
    return key


def unpack(key: int, nvars: int) -> tuple[int, ...]:
    return tuple((key >> (BITS * i)) & _MASK for i in range(nvars))


def exponent(key: int, var: int) -> int:
    return (key >> (BITS * var)) & _MASK


def remap_key(key: int, positions: Sequence[int]) -> int:
    """Move the exponent of variable ``i`` to variable ``positions[i]``."""
    out = 0
    for i, p in enumerate(positions):
        e = (key >> (BITS * i)) & _MASK
        if e:
            out += e << (BITS * p)
    return out


def grlex(exp: Sequence[int]):
    """Sort key: total degree ascending, then larger leading exponents first."""
    return (sum(exp), tuple(-e for e in exp))


# scalars

def to_scalar(value, mode: str = EXACT):
    """Coerce ``value`` (int, Fraction, mpq, float or "p/q" string) to ``mode``."""
    if mode == EXACT:
        if isinstance(value, float):
            if not value.is_integer():
                raise TypeError(f"float {value!r} is not an exact rational literal")
            return mpq(int(value))
        if isinstance(value, Fraction):
            return mpq(value.numerator, value.denominator)
        return mpq(value)
    if mode == FLOAT:
        if isinstance(value, str):
            return float(Fraction(value))
        return float(value)
    raise ShapeError(f"unknown scalar mode {mode!r}")


def scalar_str(value) -> str:
    if isinstance(value, float):
        return repr(value)
    q = mpq(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def is_negligible(value, mode: str, scale=1.0) -> bool:
    """Zero test used by every decision point.

    Exact mode compares with zero.  Float mode uses the threshold
    ``FLOAT_TOL * max(1, scale)``, where ``scale`` is the magnitude of the
    largest comparable coefficient (same degree, same matrix, ...).
    """
    if mode == EXACT:
        return value == 0
    return abs(value) <= FLOAT_TOL * max(1.0, abs(float(scale)))


def _zero(mode):
    return mpq(0) if mode == EXACT else 0.0


def _one(mode):
    return mpq(1) if mode == EXACT else 1.0


# kernel

def _graded(terms: Mapping[int, object], order: int) -> list[list[tuple[int, object]]]:
    out: list[list] = [[] for _ in range(order + 1)]
    for k, c in terms.items():
        out[key_degree(k)].append((k, c))
    return out


def _mul_graded(ga, gb, limit: int, lo: int = 0) -> dict[int, object]:
    """Product of two graded term lists, keeping degrees ``lo..limit``."""
    out: dict[int, object] = {}
    get = out.get
    nb = len(gb)
    for da, ta in enumerate(ga):
        if not ta:
            continue
        top = limit - da
        if top < 0:
            break
        for db in range(max(0, lo - da), min(top, nb - 1) + 1):
            tb = gb[db]
            if not tb:
                continue
            for ka, ca in ta:
                for kb, cb in tb:
                    k = ka + kb
                    out[k] = get(k, 0) + ca * cb
    return {k: v for k, v in out.items() if v}


class Jet:
    """Truncated multivariate formal power series.

    Parameters
    ----------
    nvars : int
        Number of variables (may be 0: a constant).
    order : int
        Total-degree truncation bound ``N``; terms of degree > N are dropped.
    terms : mapping or iterable of pairs
        Exponent tuple -> coefficient.
    mode : {"exact", "float"}
        Scalar mode.

    Jets are immutable.  Zero coefficients are never stored, so two jets of
    the same shape are equal iff their term dictionaries agree.
    """

    __slots__ = ("nvars", "order", "mode", "_terms", "_grades")

    def __init__(self, nvars: int, order: int, terms=(), mode: str = EXACT):
        if nvars < 0 or not 0 <= order <= MAX_ORDER:
            raise ShapeError(f"bad jet shape nvars={nvars}, order={order}")
        if mode not in MODES:
            raise ShapeError(f"unknown scalar mode {mode!r}")
        items = terms.items() if isinstance(terms, Mapping) else terms
        packed: dict[int, object] = {}
        for exp, c in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars or min(exp, default=0) < 0:
                raise ShapeError(f"exponent {exp} does not fit {nvars} variables")
            if sum(exp) > order:
                continue
            k = pack(exp)
            packed[k] = packed.get(k, 0) + to_scalar(c, mode)
        self._init(nvars, order, mode, {k: v for k, v in packed.items() if v})

    def _init(self, nvars, order, mode, packed):
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "_terms", packed)
        object.__setattr__(self, "_grades", None)

    def __setattr__(self, name, value):
        raise AttributeError("Jet is immutable")

    @classmethod
    def _raw(cls, nvars: int, order: int, mode: str, packed: dict) -> "Jet":
        # trusted constructor: keys fit, degrees <= order, no zeros
        self = object.__new__(cls)
        self._init(nvars, order, mode, packed)
        return self

    # constructors

    @classmethod
    def zero(cls, nvars: int, order: int, mode: str = EXACT) -> "Jet":
        return cls._raw(nvars, order, mode, {})

    @classmethod
    def constant(cls, value, nvars: int, order: int, mode: str = EXACT) -> "Jet":
        c = to_scalar(value, mode)
        return cls._raw(nvars, order, mode, {0: c} if c else {})

    @classmethod
    def variable(cls, index: int, nvars: int, order: int, mode: str = EXACT) -> "Jet":
        if not 0 <= index < nvars:
            raise ShapeError(f"variable {index} out of range for {nvars} variables")
        if order < 1:
            return cls.zero(nvars, order, mode)
        return cls._raw(nvars, order, mode, {1 << (BITS * index): _one(mode)})

    @classmethod
    def monomial(cls, exp: Sequence[int], coef=1, order: int = 6, mode: str = EXACT) -> "Jet":
        return cls(len(exp), order, {tuple(exp): coef}, mode)

    def _like(self, packed: dict) -> "Jet":
        return Jet._raw(self.nvars, self.order, self.mode, packed)

    # inspection

    @property
    def terms(self) -> dict[tuple[int, ...], object]:
        """Exponent tuple -> coefficient, in graded-lexicographic order."""
        items = [(unpack(k, self.nvars), c) for k, c in self._terms.items()]
        items.sort(key=lambda kv: grlex(kv[0]))
        return dict(items)

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, exp: Sequence[int]):
        return self._terms.get(pack(exp), _zero(self.mode))

    @property
    def constant_term(self):
        return self._terms.get(0, _zero(self.mode))

    def gradient(self) -> list:
        """Linear coefficients, i.e. the gradient at the origin."""
        z = _zero(self.mode)
        return [self._terms.get(1 << (BITS * i), z) for i in range(self.nvars)]

    def partial_at_zero(self, exp: Sequence[int]):
        """Mixed partial derivative at the origin, ``d^exp f(0) = exp! * coef``."""
        c = self.coefficient(exp)
        for e in exp:
            c = c * factorial(e)
        return c

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        """Largest total degree present (-1 for the zero jet)."""
        return max((key_degree(k) for k in self._terms), default=-1)

    def lowest_degree(self) -> int:
        """Smallest total degree present (order + 1 for the zero jet)."""
        return min((key_degree(k) for k in self._terms), default=self.order + 1)

    def graded(self) -> list[list[tuple[int, object]]]:
        g = self._grades
        if g is None:
            g = _graded(self._terms, self.order)
            object.__setattr__(self, "_grades", g)
        return g

    def homogeneous_part(self, degree: int) -> "Jet":
        return self._like({k: c for k, c in self._terms.items() if key_degree(k) == degree})

    def max_abs_by_degree(self) -> list:
        """Largest coefficient magnitude in each degree 0..order."""
        out = [_zero(self.mode)] * (self.order + 1)
        for k, c in self._terms.items():
            d = key_degree(k)
            if abs(c) > out[d]:
                out[d] = abs(c)
        return out

    def depends_on(self, var: int) -> bool:
        return any(exponent(k, var) for k in self._terms)

    # shape helpers

    def _check(self, other: "Jet"):
        if not isinstance(other, Jet):
            raise TypeError(f"expected Jet, got {type(other).__name__}")
        if (self.nvars, self.order, self.mode) != (other.nvars, other.order, other.mode):
            raise ShapeError(
                f"jet shapes differ: ({self.nvars}, {self.order}, {self.mode}) vs "
                f"({other.nvars}, {other.order}, {other.mode})"
            )

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            self._check(other)
            return other
        return Jet.constant(other, self.nvars, self.order, self.mode)

    def truncate(self, order: int) -> "Jet":
        """Drop all terms above ``order`` and lower the certified order."""
        if order > self.order:
            raise ShapeError(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        packed = {k: c for k, c in self._terms.items() if key_degree(k) <= order}
        return Jet._raw(self.nvars, order, self.mode, packed)

    def astype(self, mode: str) -> "Jet":
        if mode == self.mode:
            return self
        if mode == FLOAT:
            packed = {k: float(c) for k, c in self._terms.items()}
        else:
            packed = {k: to_scalar(Fraction(c), EXACT) for k, c in self._terms.items()}
        return Jet._raw(self.nvars, self.order, mode, {k: c for k, c in packed.items() if c})

    def embed(self, nvars: int, positions: Sequence[int]) -> "Jet":
        """Re-index variables: variable ``i`` becomes variable ``positions[i]`` of ``nvars``."""
        if len(positions) != self.nvars or len(set(positions)) != len(positions):
            raise ShapeError("positions must list distinct targets, one per variable")
        if any(not 0 <= p < nvars for p in positions):
            raise ShapeError("embedding position out of range")
        packed = {remap_key(k, positions): c for k, c in self._terms.items()}
        return Jet._raw(nvars, self.order, self.mode, packed)

    def set_zero(self, variables: Iterable[int]) -> "Jet":
        """Substitute 0 for the listed variables and drop them; the rest keep their order."""
        drop = set(variables)
        keep = [i for i in range(self.nvars) if i not in drop]
        positions = {v: j for j, v in enumerate(keep)}
        packed = {}
        for k, c in self._terms.items():
            if any(exponent(k, v) for v in drop):
                continue
            packed[sum(exponent(k, v) << (BITS * positions[v]) for v in keep)] = c
        return Jet._raw(len(keep), self.order, self.mode, packed)

    def chop(self, tol: float = FLOAT_TOL) -> "Jet":
        """Float mode: drop coefficients below ``tol`` times the largest of their degree."""
        if self.mode == EXACT:
            return self
        scale = self.max_abs_by_degree()
        packed = {k: c for k, c in self._terms.items()
                  if abs(c) > tol * max(1.0, scale[key_degree(k)])}
        return self._like(packed)

    # arithmetic

    def __add__(self, other) -> "Jet":
        other = self._coerce(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return self._like(out)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return self._like({k: -c for k, c in self._terms.items()})

    def __pos__(self) -> "Jet":
        return self

    def __sub__(self, other) -> "Jet":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Jet":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Jet":
        if isinstance(other, Jet):
            self._check(other)
            return self._like(_mul_graded(self.graded(), other.graded(), self.order))
        return self.scale(other)

    def __rmul__(self, other) -> "Jet":
        return self.scale(other)

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            raise TypeError("division by a jet is not supported; use reciprocal()")
        c = to_scalar(other, self.mode)
        if c == 0:
            raise ZeroDivisionError("jet divided by zero")
        return self.scale(_one(self.mode) / c)

    def __pow__(self, n: int) -> "Jet":
        if not isinstance(n, int) or n < 0:
            raise ValueError("jet powers need a non-negative integer exponent")
        result = Jet.constant(1, self.nvars, self.order, self.mode)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c) -> "Jet":
        c = to_scalar(c, self.mode)
        if not c:
            return self._like({})
        return self._like({k: v * c for k, v in self._terms.items()})

    def derive(self, var: int) -> "Jet":
        """Partial derivative in variable ``var``; the jet order is kept.

        The degree-``order`` part of the result is not certified (it would
        need the unknown terms of degree ``order + 1``); use
        :func:`lie_derivative`-style bookkeeping or :meth:`truncate`.
        """
        if not 0 <= var < self.nvars:
            raise ShapeError(f"variable {var} out of range for {self.nvars} variables")
        step = 1 << (BITS * var)
        out = {}
        for k, c in self._terms.items():
            e = (k >> (BITS * var)) & _MASK
            if e:
                out[k - step] = c * e
        return self._like(out)

    def reciprocal(self) -> "Jet":
        """Multiplicative inverse of a unit (nonzero constant term)."""
        c0 = self.constant_term
        if is_negligible(c0, self.mode):
            raise ZeroDivisionError("jet with vanishing constant term is not a unit")
        inv0 = _one(self.mode) / c0
        rest = (self - c0) * inv0  # in the maximal ideal
        # 1/(c0 (1 + r)) = inv0 * sum (-r)^j, nilpotent after `order` steps
        total = Jet.constant(1, self.nvars, self.order, self.mode)
        power = total
        for _ in range(self.order):
            power = -(power * rest)
            if power.is_zero():
                break
            total = total + power
        return total * inv0

    def translate(self, shift: Sequence) -> "Jet":
        """Return ``x -> self(shift + x)``, treating the jet as a polynomial.

        Exact for polynomials of degree <= order; for a genuine truncated
        series the result is only as good as the series' polynomial part.
        """
        if len(shift) != self.nvars:
            raise ShapeError("shift length must equal nvars")
        p = [to_scalar(s, self.mode) for s in shift]
        out: dict[tuple[int, ...], object] = {}
        for exp, c in self.terms.items():
            partial = [((), c)]
            for i, e in enumerate(exp):
                nxt = []
                for head, val in partial:
                    for j in range(e + 1):
                        factor = comb(e, j) * (p[i] ** (e - j) if e - j else 1)
                        if factor:
                            nxt.append((head + (j,), val * factor))
                partial = nxt
            for exp2, val in partial:
                out[exp2] = out.get(exp2, 0) + val
        return Jet(self.nvars, self.order, out, self.mode)

    # comparison / hashing

    def __eq__(self, other) -> bool:
        if not isinstance(other, Jet):
            return NotImplemented
        return (self.nvars, self.order, self.mode) == (other.nvars, other.order, other.mode) \
            and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.nvars, self.order, self.mode, frozenset(self._terms.items())))

    # text

    def to_expression(self, names: Sequence[str] | None = None) -> str:
        """Polynomial text in the CLI grammar (``+ - * ^``, rational literals)."""
        if names is None:
            names = [f"x{i + 1}" for i in range(self.nvars)]
        if not self._terms:
            return "0"
        parts = []
        for exp, c in self.terms.items():
            mono = "*".join(
                names[i] if e == 1 else f"{names[i]}^{e}" for i, e in enumerate(exp) if e
            )
            neg = c < 0
            mag = -c if neg else c
            coef = scalar_str(mag)
            if not mono:
                body = coef
            elif mag == 1:
                body = mono
            else:
                body = f"{coef}*{mono}"
            parts.append(("- " if neg else "+ ") + body)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __repr__(self) -> str:
        return f"Jet(nvars={self.nvars}, order={self.order}, mode={self.mode}: {self.to_expression()})"

    # serialization

    def to_json(self) -> dict:
        terms = []
        for exp, c in self.terms.items():
            if self.mode == EXACT:
                q = mpq(c)
                terms.append({"exp": list(exp), "num": str(q.numerator), "den": str(q.denominator)})
            else:
                terms.append({"exp": list(exp), "coef": c})
        return {"nvars": self.nvars, "order": self.order, "mode": self.mode, "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping) -> "Jet":
        mode = data.get("mode", EXACT)
        items = []
        for t in data["terms"]:
            if mode == EXACT:
                items.append((t["exp"], mpq(int(t["num"]), int(t["den"]))))
            else:
                items.append((t["exp"], float(t["coef"])))
        return cls(int(data["nvars"]), int(data["order"]), items, mode)


# functional spellings of the ring operations

def add(a: Jet, b: Jet) -> Jet:
    return a + b


def mul(a: Jet, b: Jet) -> Jet:
    if not isinstance(b, Jet):
        raise TypeError("mul expects two jets; use scale for scalars")
    return a * b


def scale(a: Jet, c) -> Jet:
    return a.scale(c)


def derive(a: Jet, var: int) -> Jet:
    return a.derive(var)

