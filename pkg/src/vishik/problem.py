"""Problem files: a vector field, a surface and a base point.

Schema::

    {"variables": ["x", "y"], "field": ["y", "1"], "surface": "x",
     "point": [0, 0], "order": 6, "mode": "exact"}

Expressions are polynomials over the declared variables built from
``+ - * ^``, parentheses and numeric literals; ``a/b`` is a rational
literal (both sides integer literals), and there is no implicit
multiplication.  Decimal literals are accepted in float mode only.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import BasePointNotOnSurfaceError, ProblemError
from .series import EXACT, FLOAT, Jet, VectorFieldJet, is_negligible
from .series.jet import MAX_ORDER, scalar_str, to_scalar

__all__ = ["ProblemSpec", "parse_problem", "parse_polynomial", "load_problem"]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*^/()]))"
)


class _Poly(dict):
    """Exponent tuple -> coefficient; only used while parsing."""

    def __init__(self, n, items=()):
        super().__init__(items)
        self.n = n

    def __add__(self, other):
        out = _Poly(self.n, self)
        for e, c in other.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return out

    def __neg__(self):
        return _Poly(self.n, {e: -c for e, c in self.items()})

    def __mul__(self, other):
        out = _Poly(self.n)
        for e1, c1 in self.items():
            for e2, c2 in other.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, 0) + c1 * c2
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        return out

    def degree(self):
        return max((sum(e) for e in self), default=0)


class _Parser:
    def __init__(self, text, names, mode, where, locate):
        self.text = text
        self.names = {n: i for i, n in enumerate(names)}
        self.n = len(names)
        self.mode = mode
        self.where = where
        self.locate = locate
        self.tokens = self._lex()
        self.i = 0

    def error(self, msg, pos):
        line, col = self.locate(pos)
        raise ProblemError(f"{self.where}: {msg}", line, col)

    def _lex(self):
        out, pos, text = [], 0, self.text
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                if text[pos:].strip() == "":
                    break
                bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
                self.error(f"unexpected character {text[bad]!r}", bad)
            kind = m.lastgroup
            start = m.start(kind)
            out.append((kind, m.group(kind), start))
            pos = m.end()
        out.append(("end", "", len(text)))
        return out

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            self.error(f"expected {value!r}, found {tok[1] or 'end of expression'!r}", tok[2])
        return tok

    def const(self, value):
        return _Poly(self.n, {(0,) * self.n: value} if value else {})

    def parse(self):
        if self.peek()[0] == "end":
            self.error("empty expression", 0)
        p = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            self.error(f"unexpected {tok[1]!r} (implicit multiplication is not allowed)", tok[2])
        return p

    def expr(self):
        p = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p + (-q)
        return p

    def term(self):
        p = self.unary()
        while self.peek()[1] == "*":
            self.take()
            p = p * self.unary()
        tok = self.peek()
        if tok[1] == "/":
            self.error("'/' is only allowed between integer literals (a/b)", tok[2])
        return p

    def unary(self):
        tok = self.peek()
        if tok[1] == "-":
            self.take()
            return -self.unary()
        if tok[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "num" or not tok[1].isdigit():
                self.error("exponent must be a non-negative integer literal", tok[2])
            e = int(tok[1])
            if e > MAX_ORDER:
                self.error(f"exponent {e} too large", tok[2])
            out = self.const(1)
            for _ in range(e):
                out = out * base
            return out
        return base

    def number(self, tok):
        text = tok[1]
        if text.isdigit():
            return int(text)
        if self.mode == EXACT:
            self.error(f"decimal literal {text!r} not allowed in exact mode; write a rational a/b", tok[2])
        return float(text)

    def atom(self):
        tok = self.take()
        kind, text, pos = tok
        if kind == "num":
            value = self.number(tok)
            if self.peek()[1] == "/":
                slash = self.take()
                den = self.take()
                if den[0] != "num":
                    self.error("'/' is only allowed between integer literals (a/b)", slash[2])
                d = self.number(den)
                if d == 0:
                    self.error("division by zero in rational literal", den[2])
                value = Fraction(value, d) if isinstance(value, int) and isinstance(d, int) else value / d
            return self.const(to_scalar(value, self.mode))
        if kind == "name":
            if text not in self.names:
                self.error(f"undeclared variable {text!r}", pos)
            exp = [0] * self.n
            exp[self.names[text]] = 1
            return _Poly(self.n, {tuple(exp): to_scalar(1, self.mode)})
        if text == "(":
            p = self.expr()
            self.expect(")")
            return p
        self.error(f"unexpected {text or 'end of expression'!r}", pos)


def parse_polynomial(text: str, names, order: int = 6, mode: str = EXACT, where: str = "expression",
                     locate=None) -> Jet:
    """Parse ``text`` into a jet; the polynomial degree must not exceed ``order``."""
    if locate is None:
        def locate(pos):
            return 1, pos + 1
    if not isinstance(text, str):
        if isinstance(text, (int, float)) and not isinstance(text, bool):
            text = str(text)
        else:
            raise ProblemError(f"{where}: expected a string expression")
    poly = _Parser(text, list(names), mode, where, locate).parse()
    if poly.degree() > order:
        raise ProblemError(f"{where}: degree {poly.degree()} exceeds the jet order {order}")
    return Jet(len(names), order, dict(poly), mode)


@dataclass(frozen=True)
class ProblemSpec:
    """A parsed problem.  ``X`` and ``h`` are centered at ``point``;
    ``field_raw`` and ``surface_raw`` keep the uncentered polynomials."""

    variables: tuple[str, ...]
    field_raw: tuple[Jet, ...]
    surface_raw: Jet
    point: tuple
    order: int
    mode: str
    X: VectorFieldJet
    h: Jet

    @property
    def m(self) -> int:
        return len(self.variables)

    def to_json(self) -> dict:
        names = list(self.variables)
        conv = scalar_str if self.mode == EXACT else float
        return {
            "variables": names,
            "field": [f.to_expression(names) for f in self.field_raw],
            "surface": self.surface_raw.to_expression(names),
            "point": [conv(p) for p in self.point],
            "order": self.order,
            "mode": self.mode,
        }

    def serialize(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _line_col(text: str, offset: int):
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _locator(source: str, expr):
    """Map positions in ``expr`` to line/column in ``source`` when it is found verbatim."""
    if isinstance(expr, str):
        off = source.find(json.dumps(expr))
        if off < 0:
            off = source.find('"' + expr + '"')
        if off >= 0:
            return lambda pos: _line_col(source, off + 1 + pos)
    return lambda pos: (1, pos + 1)


def _scalar(value, mode, where):
    if isinstance(value, bool):
        raise ProblemError(f"{where}: expected a number")
    if isinstance(value, int):
        return to_scalar(value, mode)
    if isinstance(value, float):
        if mode == EXACT:
            if value.is_integer():
                return to_scalar(int(value), mode)
            raise ProblemError(f"{where}: decimal {value!r} not allowed in exact mode; use \"a/b\"")
        return value
    if isinstance(value, str):
        try:
            frac = Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ProblemError(f"{where}: cannot read {value!r} as a number") from None
        if mode == EXACT and not re.fullmatch(r"\s*[+-]?\d+(\s*/\s*\d+)?\s*", value):
            raise ProblemError(f"{where}: decimal {value!r} not allowed in exact mode; use \"a/b\"")
        return to_scalar(frac if mode == EXACT else float(frac), mode)
    raise ProblemError(f"{where}: expected a number, got {type(value).__name__}")


def parse_problem(text: str, order: int | None = None, mode: str | None = None) -> ProblemSpec:
    """Parse a problem file; ``order`` and ``mode`` override the file's values."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ProblemError("problem must be a JSON object", 1, 1)
    known = {"variables", "field", "surface", "point", "order", "mode"}
    extra = sorted(set(data) - known)
    if extra:
        raise ProblemError(f"unknown keys: {', '.join(extra)}")
    for key in ("variables", "field", "surface"):
        if key not in data:
            raise ProblemError(f"missing key {key!r}")
    names = data["variables"]
    if not isinstance(names, list) or not names or not all(isinstance(v, str) for v in names):
        raise ProblemError("'variables' must be a non-empty list of names")
    for v in names:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", v):
            raise ProblemError(f"bad variable name {v!r}")
    if len(set(names)) != len(names):
        raise ProblemError("duplicate variable names")
    m = len(names)
    if mode is None:
        mode = data.get("mode", EXACT)
    if mode not in (EXACT, FLOAT):
        raise ProblemError(f"'mode' must be 'exact' or 'float', got {mode!r}")
    if order is None:
        order = data.get("order", 6)
    if isinstance(order, bool) or not isinstance(order, int) or not 1 <= order <= MAX_ORDER - 1:
        raise ProblemError(f"'order' must be an integer in 1..{MAX_ORDER - 1}")
    field = data["field"]
    if not isinstance(field, list) or len(field) != m:
        raise ProblemError(f"'field' must list {m} expressions, one per variable")
    point = data.get("point", [0] * m)
    if not isinstance(point, list) or len(point) != m:
        raise ProblemError(f"'point' must list {m} coordinates")

    comps = tuple(
        parse_polynomial(e, names, order, mode, f"field[{i}]", _locator(text, e))
        for i, e in enumerate(field)
    )
    surface = parse_polynomial(data["surface"], names, order, mode, "surface",
                               _locator(text, data["surface"]))
    p = tuple(_scalar(v, mode, f"point[{i}]") for i, v in enumerate(point))
    h = surface.translate(p)
    scale = max(surface.max_abs_by_degree(), default=0)
    if not is_negligible(h.constant_term, mode, scale):
        raise BasePointNotOnSurfaceError(
            f"the point is not on the surface: h(p) = {scalar_str(h.constant_term) if mode == EXACT else h.constant_term}"
        )
    if mode == FLOAT:
        h = h - h.constant_term
    X = VectorFieldJet(tuple(c.translate(p) for c in comps))
    return ProblemSpec(tuple(names), comps, surface, p, order, mode, X, h)


def load_problem(path: str, order: int | None = None, mode: str | None = None) -> ProblemSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ProblemError(f"cannot read {path}: {exc.strerror}") from None
    return parse_problem(text, order, mode)
