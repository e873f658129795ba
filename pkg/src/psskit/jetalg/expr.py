"""Exact symbolic algebra over jet coordinates.

The coordinate alphabet is x, t, the x-derivatives u0, u1, u2, ..., the
t-derivatives w1, w2, ..., and the mixed derivatives v1, v2, ... of u_x.
``u0`` doubles as the plain dependent variable and ``u1`` as its first
x-derivative, so the aliases w0 and v0 are rejected outright.

An expression is kept in an expanded canonical form: a finite sum of
monomials, each a rational coefficient times integer powers of variables
and kernels, plus at most one exponential factor whose argument is a
rational linear form in the variables.  Negative powers encode monomial
denominators (1/f', 1/u0, ...); any construction that would put a sum in
a denominator raises ``SumDenominatorError``.

Canonicalization rules applied on every construction:

* like monomials merge and zero coefficients vanish,
* exponential factors combine by adding their arguments,
* ``sin(L)**2`` rewrites to ``1 - cos(L)**2`` so sine powers stay below 2,
* ``sin(-L) = -sin(L)`` and ``cos(-L) = cos(L)`` normalize kernel arguments.

Three opaque function symbols are available for statements about
arbitrary differentiable functions: ``f`` with argument u0 - u2, ``phi1``
with arguments (u0, u1) and ``vphi`` with argument u0.  They carry a
derivative multi-order and differentiate by the chain rule on their fixed
argument; distinct orders are treated as algebraically independent atoms.

The zero test — "no monomials survive" — is exact under that independence
assumption.  Every residual constructed by this package stays inside the
expression class where the assumption is valid; it is an assumption about
usage, not a theorem about arbitrary inputs.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Union

Rat = Union[int, Fraction]

VAR_KINDS = ("x", "t", "u", "w", "v")

#: hard lexical cap on derivative indices; the effective bound is usually
#: the configured jet order (see DEFAULT_JET_ORDER)
MAX_VAR_INDEX = 99

#: default jet order bound; D_x of the deepest prolongation used by the
#: structure-equation checks stays at or below u6, so 8 leaves headroom
DEFAULT_JET_ORDER = 8

#: opaque symbol -> (arity of derivative multi-order, printable argument)
OPAQUE_ARGS = {
    "f": (1, "u0 - u2"),
    "phi1": (2, "u0, u1"),
    "vphi": (1, "u0"),
}

Var = tuple  # (kind, index)


class ExprError(ValueError):
    """Base class for expression-layer failures."""


class SumDenominatorError(ExprError):
    """Raised when a division would require a non-monomial denominator."""


class OrderBoundError(ExprError):
    """Raised when a jet index exceeds the configured order bound."""


def _rat(x: Rat) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise ExprError(f"expected an exact rational, got {type(x).__name__}: {x!r}")


def mk_var(kind: str, index: int, max_order: Optional[int] = None) -> Var:
    if kind not in VAR_KINDS:
        raise ExprError(f"unknown variable kind {kind!r}")
    if kind in ("x", "t"):
        if index != 0:
            raise ExprError(f"{kind} carries no index")
        return (kind, 0)
    if index < 0 or index > MAX_VAR_INDEX:
        raise ExprError(f"variable index out of range: {kind}{index}")
    if kind in ("w", "v") and index == 0:
        raise ExprError(f"{kind}0 is stored as its u-form alias; write "
                        f"{'u0' if kind == 'w' else 'u1'}")
    if max_order is not None and index > max_order:
        raise OrderBoundError(f"{kind}{index} exceeds the jet order bound {max_order}")
    return (kind, index)


def var_name(v: Var) -> str:
    kind, idx = v
    return kind if kind in ("x", "t") else f"{kind}{idx}"


# A linear form is a sorted tuple of (var, Fraction) with nonzero
# coefficients; it is the argument of exp/sin/cos kernels.
LinForm = tuple


def _lf_from_dict(d: dict) -> LinForm:
    return tuple(sorted((v, c) for v, c in d.items() if c != 0))


def _lf_add(a: LinForm, b: LinForm, scale: Fraction = Fraction(1)) -> LinForm:
    d = dict(a)
    for v, c in b:
        d[v] = d.get(v, Fraction(0)) + scale * c
    return _lf_from_dict(d)


def _lf_neg(a: LinForm) -> LinForm:
    return tuple((v, -c) for v, c in a)


def _lf_scale(a: LinForm, s: Fraction) -> LinForm:
    if s == 0:
        return ()
    return tuple((v, s * c) for v, c in a)


def _lf_coeff(a: LinForm, v: Var) -> Fraction:
    for w, c in a:
        if w == v:
            return c
    return Fraction(0)


# Kernel atoms inside a monomial key:
#   ('sin', linform) | ('cos', linform) | ('op', name, orders)
# The exponential factor is not an atom; it lives in the key's third slot.
KAtom = tuple

# Monomial key: (varpows, kernelpows, exp_linform) with varpows and
# kernelpows sorted tuples of (atom, nonzero int power).
Key = tuple

_EMPTY_KEY: Key = ((), (), ())


def _canon_monomials(coeff: Fraction, vp: dict, kp: dict, ex: LinForm) -> list:
    """Expand one raw monomial into canonical monomials.

    Applies the sin^2 -> 1 - cos^2 rewrite (which can fan out into several
    monomials) and drops zero powers.
    """
    if coeff == 0:
        return []
    vp = {v: p for v, p in vp.items() if p != 0}
    kp = {k: p for k, p in kp.items() if p != 0}
    for atom, p in kp.items():
        if atom[0] == "sin" and p >= 2:
            q, r = divmod(p, 2)
            base_kp = dict(kp)
            del base_kp[atom]
            if r:
                base_kp[atom] = r
            cos_atom = ("cos", atom[1])
            out = []
            for j in range(q + 1):
                c = coeff * math.comb(q, j) * (-1) ** j
                kpj = dict(base_kp)
                if j:
                    kpj[cos_atom] = kpj.get(cos_atom, 0) + 2 * j
                out.extend(_canon_monomials(Fraction(c), vp, kpj, ex))
            return out
    key = (tuple(sorted(vp.items())), tuple(sorted(kp.items())), ex)
    return [(key, coeff)]


def _merge(pairs: Iterable) -> dict:
    terms: dict = {}
    for key, c in pairs:
        acc = terms.get(key, Fraction(0)) + c
        if acc == 0:
            terms.pop(key, None)
        else:
            terms[key] = acc
    return terms


def _mul_keys(k1: Key, c1: Fraction, k2: Key, c2: Fraction) -> list:
    vp = dict(k1[0])
    for v, p in k2[0]:
        vp[v] = vp.get(v, 0) + p
    kp = dict(k1[1])
    for a, p in k2[1]:
        kp[a] = kp.get(a, 0) + p
    ex = _lf_add(k1[2], k2[2])
    return _canon_monomials(c1 * c2, vp, kp, ex)


def _invert_key(key: Key) -> Key:
    vp = tuple((v, -p) for v, p in key[0])
    kp = tuple((a, -p) for a, p in key[1])
    return (tuple(sorted(vp)), tuple(sorted(kp)), _lf_neg(key[2]))


class JetExpr:
    """Immutable canonical-form expression; see the module docstring."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[dict] = None):
        self._terms = dict(terms) if terms else {}

    # -- constructors ------------------------------------------------

    @staticmethod
    def zero() -> "JetExpr":
        return JetExpr()

    @staticmethod
    def one() -> "JetExpr":
        return JetExpr({_EMPTY_KEY: Fraction(1)})

    @staticmethod
    def number(q: Rat) -> "JetExpr":
        q = _rat(q)
        return JetExpr({_EMPTY_KEY: q} if q != 0 else {})

    @staticmethod
    def variable(v: Var) -> "JetExpr":
        return JetExpr({(((v, 1),), (), ()): Fraction(1)})

    @staticmethod
    def _from_pairs(pairs: Iterable) -> "JetExpr":
        return JetExpr(_merge(pairs))

    # -- inspection --------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def terms(self) -> Iterator:
        return iter(self._terms.items())

    def n_terms(self) -> int:
        return len(self._terms)

    def as_monomial(self):
        """Return (key, coeff) when the expression is a single monomial."""
        if len(self._terms) != 1:
            return None
        return next(iter(self._terms.items()))

    def constant_value(self) -> Optional[Fraction]:
        if self.is_zero:
            return Fraction(0)
        mono = self.as_monomial()
        if mono and mono[0] == _EMPTY_KEY:
            return mono[1]
        return None

    def support_vars(self) -> set:
        """All variables the expression depends on, kernel arguments included."""
        out: set = set()
        for (vp, kp, ex), _ in self._terms.items():
            out.update(v for v, _p in vp)
            out.update(v for v, _c in ex)
            for atom, _p in kp:
                if atom[0] in ("sin", "cos"):
                    out.update(v for v, _c in atom[1])
                else:
                    name = atom[1]
                    if name == "f":
                        out.update({("u", 0), ("u", 2)})
                    elif name == "phi1":
                        out.update({("u", 0), ("u", 1)})
                    elif name == "vphi":
                        out.add(("u", 0))
        return out

    def has_opaque(self) -> bool:
        return any(a[0] == "op" for (_vp, kp, _ex) in self._terms for a in
                   (x[0] for x in kp))

    def max_u_index(self) -> int:
        idx = -1
        for v in self.support_vars():
            if v[0] == "u":
                idx = max(idx, v[1])
        return idx

    # -- arithmetic --------------------------------------------------

    def __add__(self, other) -> "JetExpr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        terms = dict(self._terms)
        for key, c in other._terms.items():
            acc = terms.get(key, Fraction(0)) + c
            if acc == 0:
                terms.pop(key, None)
            else:
                terms[key] = acc
        return JetExpr(terms)

    __radd__ = __add__

    def __neg__(self) -> "JetExpr":
        return JetExpr({k: -c for k, c in self._terms.items()})

    def __sub__(self, other) -> "JetExpr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "JetExpr":
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "JetExpr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero or other.is_zero:
            return JetExpr.zero()
        pairs = []
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                pairs.extend(_mul_keys(k1, c1, k2, c2))
        return JetExpr._from_pairs(pairs)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "JetExpr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero:
            raise ZeroDivisionError("division of a jet expression by zero")
        mono = other.as_monomial()
        if mono is None:
            raise SumDenominatorError(
                "denominators must be single product terms; got a sum with "
                f"{other.n_terms()} terms")
        key, c = mono
        inv = JetExpr({_invert_key(key): 1 / c})
        return self * inv

    def __rtruediv__(self, other) -> "JetExpr":
        return _coerce(other) / self

    def __pow__(self, n: int) -> "JetExpr":
        if not isinstance(n, int):
            raise ExprError("exponents must be integers")
        if n == 0:
            return JetExpr.one()
        if n < 0:
            return JetExpr.one() / (self ** (-n))
        half = self ** (n // 2)
        out = half * half
        return out * self if n % 2 else out

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __bool__(self) -> bool:
        return not self.is_zero

    # -- calculus helpers (used by the derivative layer) --------------

    def diff(self, v: Var) -> "JetExpr":
        """Formal partial derivative with respect to a single variable.

        Opaque atoms differentiate by the chain rule on their fixed
        argument; exp/sin/cos by the coefficient of ``v`` in their linear
        form.
        """
        pairs = []
        for (vp, kp, ex), c in self._terms.items():
            vpd, kpd = dict(vp), dict(kp)
            # power of the bare variable
            p = vpd.get(v, 0)
            if p:
                d = dict(vpd)
                d[v] = p - 1
                pairs.extend(_canon_monomials(c * p, d, kpd, ex))
            # exponential factor
            q = _lf_coeff(ex, v)
            if q:
                pairs.extend(_canon_monomials(c * q, vpd, kpd, ex))
            # kernels
            for atom, ap in kp:
                kind = atom[0]
                if kind in ("sin", "cos"):
                    q = _lf_coeff(atom[1], v)
                    if not q:
                        continue
                    other = ("cos" if kind == "sin" else "sin", atom[1])
                    d = dict(kpd)
                    d[atom] = ap - 1
                    d[other] = d.get(other, 0) + 1
                    s = 1 if kind == "sin" else -1
                    pairs.extend(_canon_monomials(c * ap * q * s, vpd, d, ex))
                else:
                    _tag, name, orders = atom
                    s = _opaque_chain(name, orders, v)
                    if s is None:
                        continue
                    factor, bumped = s
                    d = dict(kpd)
                    d[atom] = ap - 1
                    nxt = ("op", name, bumped)
                    d[nxt] = d.get(nxt, 0) + 1
                    pairs.extend(_canon_monomials(c * ap * factor, vpd, d, ex))
        return JetExpr._from_pairs(pairs)

    def subs_var(self, v: Var, repl: "JetExpr") -> "JetExpr":
        """Substitute an expression for a bare variable.

        The variable must not occur inside a kernel argument, and negative
        powers of it require a monomial replacement.
        """
        out = JetExpr.zero()
        for (vp, kp, ex), c in self._terms.items():
            if _lf_coeff(ex, v) != 0 or any(
                    a[0] in ("sin", "cos") and _lf_coeff(a[1], v) != 0
                    for a, _p in kp):
                raise ExprError(
                    f"cannot substitute {var_name(v)} inside a kernel argument")
            p = dict(vp).get(v, 0)
            rest = {w: q for w, q in vp if w != v}
            base = JetExpr._from_pairs(_canon_monomials(c, rest, dict(kp), ex))
            out = out + base * (repl ** p if p else JetExpr.one())
        return out

    # -- numeric evaluation -------------------------------------------

    def eval(self, env: dict) -> float:
        """Evaluate at a point; ``env`` maps variable names to floats.

        Opaque atoms have no numeric value and raise.  Works elementwise
        when the env values are numpy arrays.
        """
        total = 0.0
        for (vp, kp, ex), c in self._terms.items():
            val = float(c)
            for v, p in vp:
                val = val * _env_val(env, v) ** p
            if ex:
                val = val * _np_exp(sum(float(q) * _env_val(env, v) for v, q in ex))
            for atom, p in kp:
                if atom[0] == "sin":
                    val = val * _np_sin(
                        sum(float(q) * _env_val(env, v) for v, q in atom[1])) ** p
                elif atom[0] == "cos":
                    val = val * _np_cos(
                        sum(float(q) * _env_val(env, v) for v, q in atom[1])) ** p
                else:
                    raise ExprError(
                        f"opaque atom {atom[1]} has no numeric value")
            total = total + val
        return total

    def __repr__(self) -> str:
        from .parse import render
        return render(self)

    __str__ = __repr__


def _coerce(x) -> "JetExpr":
    if isinstance(x, JetExpr):
        return x
    if isinstance(x, (int, Fraction)):
        return JetExpr.number(x)
    return NotImplemented


def _env_val(env: dict, v: Var):
    name = var_name(v)
    try:
        return env[name]
    except KeyError:
        raise ExprError(f"no value supplied for {name}") from None


def _np_exp(x):
    if isinstance(x, (int, float)):
        return math.exp(x)
    import numpy as np
    return np.exp(x)


def _np_sin(x):
    if isinstance(x, (int, float)):
        return math.sin(x)
    import numpy as np
    return np.sin(x)


def _np_cos(x):
    if isinstance(x, (int, float)):
        return math.cos(x)
    import numpy as np
    return np.cos(x)


def _opaque_chain(name: str, orders: tuple, v: Var):
    """Chain-rule data for d(atom)/d(var): (scalar factor, bumped orders)."""
    if name == "f":
        if v == ("u", 0):
            return 1, (orders[0] + 1,)
        if v == ("u", 2):
            return -1, (orders[0] + 1,)
        return None
    if name == "phi1":
        if v == ("u", 0):
            return 1, (orders[0] + 1, orders[1])
        if v == ("u", 1):
            return 1, (orders[0], orders[1] + 1)
        return None
    if name == "vphi":
        if v == ("u", 0):
            return 1, (orders[0] + 1,)
        return None
    raise ExprError(f"unknown opaque symbol {name!r}")


# -- public building helpers ------------------------------------------


def num(q: Rat) -> JetExpr:
    return JetExpr.number(q)


def jv(name: str, max_order: Optional[int] = None) -> JetExpr:
    """Variable by name: 'x', 't', 'u0'...'u9', 'w1'..., 'v1'..."""
    if name in ("x", "t"):
        return JetExpr.variable((name, 0))
    kind, idx = name[0], name[1:]
    if kind not in ("u", "w", "v") or not idx.isdigit():
        raise ExprError(f"unknown variable {name!r}")
    return JetExpr.variable(mk_var(kind, int(idx), max_order))


def _as_linform(e: JetExpr, what: str) -> LinForm:
    d: dict = {}
    for (vp, kp, ex), c in e._terms.items():
        if kp or ex or len(vp) != 1 or vp[0][1] != 1:
            raise ExprError(
                f"{what} argument must be a linear form in the variables "
                f"with no constant term; got {e!r}")
        d[vp[0][0]] = d.get(vp[0][0], Fraction(0)) + c
    return _lf_from_dict(d)


def exp_k(arg: JetExpr) -> JetExpr:
    """exp of a rational linear form in the variables."""
    lf = _as_linform(arg, "exp")
    if not lf:
        return JetExpr.one()
    return JetExpr({((), (), lf): Fraction(1)})


def _trig(kind: str, arg: JetExpr) -> JetExpr:
    lf = _as_linform(arg, kind)
    if not lf:
        raise ExprError(f"{kind} argument must not vanish identically")
    sign = Fraction(1)
    if lf[0][1] < 0:
        lf = _lf_neg(lf)
        if kind == "sin":
            sign = Fraction(-1)
    return JetExpr({((), (((kind, lf), 1),), ()): sign})


def sin_k(arg: JetExpr) -> JetExpr:
    return _trig("sin", arg)


def cos_k(arg: JetExpr) -> JetExpr:
    return _trig("cos", arg)


def op_atom(name: str, orders: tuple) -> JetExpr:
    """Opaque atom; ``orders`` is the derivative multi-order."""
    if name not in OPAQUE_ARGS:
        raise ExprError(f"unknown opaque symbol {name!r}")
    arity = OPAQUE_ARGS[name][0]
    if len(orders) != arity or any(o < 0 for o in orders):
        raise ExprError(f"bad derivative order {orders} for {name}")
    return JetExpr({((), ((("op", name, tuple(orders)), 1),), ()): Fraction(1)})


def op_f(k: int = 0) -> JetExpr:
    return op_atom("f", (k,))


def op_phi1(a: int = 0, b: int = 0) -> JetExpr:
    return op_atom("phi1", (a, b))


def op_vphi(k: int = 0) -> JetExpr:
    return op_atom("vphi", (k,))


def normalize(e: JetExpr) -> JetExpr:
    """Rebuild an expression through the canonicalizer (idempotent)."""
    pairs = []
    for (vp, kp, ex), c in e.terms():
        pairs.extend(_canon_monomials(c, dict(vp), dict(kp), ex))
    return JetExpr._from_pairs(pairs)


def is_zero(e: JetExpr) -> bool:
    """Exact zero test on the canonical form.

    Sound for the expression class this package generates, where distinct
    kernels and opaque atoms are algebraically independent.
    """
    return e.is_zero


def clear_denominators(e: JetExpr) -> tuple:
    """Return (cleared, multiplier): multiplier * e with no negative powers.

    The multiplier is the smallest monomial of the atoms appearing with
    negative exponents; it is reported so "zero after clearing" stays
    auditable.
    """
    worst_v: dict = {}
    worst_k: dict = {}
    for (vp, kp, _ex), _c in e.terms():
        for v, p in vp:
            if p < 0:
                worst_v[v] = max(worst_v.get(v, 0), -p)
        for a, p in kp:
            if p < 0:
                worst_k[a] = max(worst_k.get(a, 0), -p)
    if not worst_v and not worst_k:
        return e, JetExpr.one()
    key = (tuple(sorted(worst_v.items())), tuple(sorted(worst_k.items())), ())
    mult = JetExpr({key: Fraction(1)})
    return e * mult, mult
