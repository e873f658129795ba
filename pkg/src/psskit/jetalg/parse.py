"""Text grammar for jet expressions, with a canonical pretty-printer.

Grammar (UTF-8, whitespace-insensitive)::

    expr    := term (('+'|'-') term)*
    term    := factor (('*'|'/') factor)*
    factor  := ('+'|'-')* power
    power   := atom ('^' exponent)?
    exponent:= ['-'] INT | '(' ['-'] INT ')'
    atom    := NUMBER | VARIABLE | CALL | '(' expr ')'

Variables: ``x t u0..u9 w1..w9 v1..v9`` (indices are checked against the
configured jet order).  Numbers are decimal rationals (``2``, ``0.5``).
Calls: ``exp(<linear form>)``, ``sin(<linear form>)``, ``cos(<linear
form>)``, the opaque atoms ``f<k>(u0-u2)``, ``phi1_<a>_<b>(u0,u1)`` and
``vphi<k>(u0)`` whose written argument must match their fixed argument.

``parse_expr(render(e)) == e`` holds for every expression.
"""

from __future__ import annotations

import re
from fractions import Fraction
from .expr import (DEFAULT_JET_ORDER, ExprError, JetExpr, cos_k, exp_k, jv,
                   mk_var, num, op_atom, sin_k, var_name)


class ExprSyntaxError(ExprError):
    """Parse failure; carries the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+(\.\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)

_VAR_RE = re.compile(r"^(u|w|v)(\d+)$")
_F_RE = re.compile(r"^f(\d*)$")
_PHI1_RE = re.compile(r"^phi1(?:_(\d+)_(\d+))?$")
_VPHI_RE = re.compile(r"^vphi(\d*)$")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, max_order: int):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.max_order = max_order

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if kind and tok[0] != kind or value and tok[1] != value:
            raise ExprSyntaxError(
                f"expected {value or kind}, found {tok[1]!r}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> JetExpr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"trailing input {tok[1]!r}", tok[2])
        return e

    def expr(self) -> JetExpr:
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> JetExpr:
        e = self.factor()
        while self.peek()[1] in ("*", "/"):
            _kind, op, off = self.take()
            rhs = self.factor()
            if op == "*":
                e = e * rhs
            else:
                try:
                    e = e / rhs
                except ZeroDivisionError:
                    raise ExprSyntaxError("division by zero", off) from None
        return e

    def factor(self) -> JetExpr:
        sign = 1
        while self.peek()[1] in ("+", "-"):
            if self.take()[1] == "-":
                sign = -sign
        e = self.power()
        return e if sign > 0 else -e

    def power(self) -> JetExpr:
        e = self.atom()
        if self.peek()[1] == "^":
            self.take()
            e = e ** self.exponent()
        return e

    def exponent(self) -> int:
        neg = False
        paren = False
        if self.peek()[1] == "(":
            self.take()
            paren = True
        if self.peek()[1] == "-":
            self.take()
            neg = True
        tok = self.take("num")
        if "." in tok[1]:
            raise ExprSyntaxError("exponents must be integers", tok[2])
        if paren:
            self.take(value=")")
        n = int(tok[1])
        return -n if neg else n

    def atom(self) -> JetExpr:
        tok = self.peek()
        if tok[1] == "(":
            self.take()
            e = self.expr()
            self.take(value=")")
            return e
        if tok[0] == "num":
            self.take()
            return num(Fraction(tok[1]))
        if tok[0] == "name":
            return self.name_atom()
        raise ExprSyntaxError(f"expected a value, found {tok[1]!r}", tok[2])

    def name_atom(self) -> JetExpr:
        kind, name, off = self.take("name")
        if self.peek()[1] == "(":
            return self.call(name, off)
        if name in ("x", "t"):
            return jv(name)
        m = _VAR_RE.match(name)
        if m:
            try:
                v = mk_var(m.group(1), int(m.group(2)), self.max_order)
            except ExprError as exc:
                raise ExprSyntaxError(str(exc), off) from None
            return JetExpr.variable(v)
        raise ExprSyntaxError(f"unknown symbol {name!r}", off)

    def call(self, name: str, off: int) -> JetExpr:
        self.take(value="(")
        args = [self.expr()]
        while self.peek()[1] == ",":
            self.take()
            args.append(self.expr())
        self.take(value=")")
        if name in ("exp", "sin", "cos"):
            if len(args) != 1:
                raise ExprSyntaxError(f"{name} takes one argument", off)
            try:
                return {"exp": exp_k, "sin": sin_k, "cos": cos_k}[name](args[0])
            except ExprError as exc:
                raise ExprSyntaxError(str(exc), off) from None
        m = _F_RE.match(name)
        if m:
            expected = [jv("u0") - jv("u2")]
            return self._opaque("f", (int(m.group(1) or 0),), args, expected, off)
        m = _PHI1_RE.match(name)
        if m:
            a, b = int(m.group(1) or 0), int(m.group(2) or 0)
            expected = [jv("u0"), jv("u1")]
            return self._opaque("phi1", (a, b), args, expected, off)
        m = _VPHI_RE.match(name)
        if m:
            return self._opaque("vphi", (int(m.group(1) or 0),), args, [jv("u0")], off)
        raise ExprSyntaxError(f"unknown symbol {name!r}", off)

    def _opaque(self, name, orders, args, expected, off) -> JetExpr:
        if len(args) != len(expected) or any(a != b for a, b in zip(args, expected)):
            want = ", ".join(repr(e) for e in expected)
            raise ExprSyntaxError(
                f"{name} takes the fixed argument ({want})", off)
        return op_atom(name, orders)


def parse_expr(text: str, max_order: int = DEFAULT_JET_ORDER) -> JetExpr:
    """Parse a jet expression; raises ExprSyntaxError with a byte offset."""
    if not isinstance(text, str):
        raise ExprError("expression source must be a string")
    return _Parser(text, max_order).parse()


# -- rendering ---------------------------------------------------------


def _render_lf(lf) -> str:
    parts = []
    for i, (v, c) in enumerate(lf):
        mag = abs(c)
        body = var_name(v) if mag == 1 else f"{mag}*{var_name(v)}"
        if i == 0:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f" + {body}" if c > 0 else f" - {body}")
    return "".join(parts)


def _render_pow(base: str, p: int) -> str:
    return base if p == 1 else f"{base}^{p}"


def _opaque_name(name: str, orders: tuple) -> str:
    if name == "f":
        return "f" if orders[0] == 0 else f"f{orders[0]}"
    if name == "phi1":
        a, b = orders
        return "phi1" if (a, b) == (0, 0) else f"phi1_{a}_{b}"
    return "vphi" if orders[0] == 0 else f"vphi{orders[0]}"


_OPAQUE_PRINT_ARGS = {"f": "u0 - u2", "phi1": "u0, u1", "vphi": "u0"}


def _render_monomial(key, coeff: Fraction) -> str:
    vp, kp, ex = key
    parts = []
    for v, p in vp:
        parts.append(_render_pow(var_name(v), p))
    for atom, p in kp:
        if atom[0] in ("sin", "cos"):
            parts.append(_render_pow(f"{atom[0]}({_render_lf(atom[1])})", p))
        else:
            _tag, name, orders = atom
            head = f"{_opaque_name(name, orders)}({_OPAQUE_PRINT_ARGS[name]})"
            parts.append(_render_pow(head, p))
    if ex:
        parts.append(f"exp({_render_lf(ex)})")
    mag = abs(coeff)
    if not parts:
        return str(mag)
    body = "*".join(parts)
    return body if mag == 1 else f"{mag}*{body}"


def render(e: JetExpr) -> str:
    """Deterministic canonical text form; round-trips through parse_expr."""
    items = sorted(e.terms())
    if not items:
        return "0"
    out = []
    for i, (key, coeff) in enumerate(items):
        body = _render_monomial(key, coeff)
        if i == 0:
            out.append(body if coeff > 0 else f"-{body}")
        else:
            out.append(f" + {body}" if coeff > 0 else f" - {body}")
    return "".join(out)
