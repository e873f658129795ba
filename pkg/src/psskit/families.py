"""Constructors and checkers for the classified pseudospherical PDE families.

Every family packages a third-order evolution law

    u_{0,t} - u_{2,t} = lam * u0^2 * u3 + G(u0, u1, u2)

together with three 1-forms whose flatness equations hold exactly on the
PDE's solution set.  The families are tagged T22, T23, T24, T25i, T25ii
and are distinguished by the vanishing pattern of three derived
quantities (Q, L2, gamma); the sine-Gordon fixture SG rides along for
cross-checking the machinery against a classical example.

Function slots: ``f`` is a function of u0 - u2 (its derivative must be
invertible as a monomial, so concrete choices are affine or exponential
in the argument; pass None for a fully opaque symbol), ``phi1`` a
function of (u0, u1) and ``vphi`` a function of u0 alone.

Scalar parameters are exact rationals.  Wherever sqrt(1 + mu2^2) enters
a formula the implementation insists that it is rational (mu2 = 0, 3/4,
4/3, ... work); this keeps every verification an exact zero test.  The
numeric immersion layer has no such restriction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Tuple

from .cartan import (OneForm, ResidualReport, independence_witness,
                     structure_residuals)
from .jetalg import (JetExpr, PDESpec, cos_k, exp_k, jv, num, op_f,
                     op_phi1, op_vphi, parse_expr, render, sin_k)

KINDS = ("T22", "T23", "T24", "T25i", "T25ii", "SG")

_F0 = Fraction(0)
_F1 = Fraction(1)


class FamilyError(ValueError):
    """Parameter validation failure; the message names the invariant."""


def rat(x) -> Fraction:
    """Exact rational from int, Fraction or string; floats are refused."""
    if isinstance(x, bool):
        raise FamilyError(f"expected a rational scalar, got {x!r}")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise FamilyError(
        f"scalar parameters must be exact rationals, got {type(x).__name__}; "
        "write 3/4 or '0.75' instead of a float")


def sqrt_rational(q: Fraction) -> Optional[Fraction]:
    if q < 0:
        return None
    rn = math.isqrt(q.numerator)
    rd = math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


@dataclass
class FamilyParams:
    """Parameter pack for one family; unused scalars stay at zero."""
    kind: str
    mu2: Fraction = _F0
    eta2: Fraction = _F0
    mu3: Optional[Fraction] = None
    eta3: Optional[Fraction] = None
    lam: Fraction = _F0
    c1: Fraction = _F0
    c2: Fraction = _F0
    theta: Fraction = _F0
    nu: Fraction = _F0
    sigma: Fraction = _F0
    tau: Fraction = _F0
    sign: int = 1
    f_slot: Optional[str] = "u0 - u2"
    phi1_slot: Optional[str] = None
    vphi_slot: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FamilyError(f"unknown family kind {self.kind!r}")
        for name in ("mu2", "eta2", "lam", "c1", "c2", "theta", "nu",
                     "sigma", "tau"):
            setattr(self, name, rat(getattr(self, name)))
        for name in ("mu3", "eta3"):
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, rat(v))
        if self.sign not in (1, -1):
            raise FamilyError(f"sign must be +1 or -1, got {self.sign!r}")

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "sign": self.sign}
        for name in ("mu2", "mu3", "eta2", "eta3", "lam", "c1", "c2",
                     "theta", "nu", "sigma", "tau"):
            v = getattr(self, name)
            if v is not None:
                out[name] = str(v)
        for name in ("f_slot", "phi1_slot", "vphi_slot"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        return out


# -- function slots -----------------------------------------------------


class _Slot:
    """Common behaviour of the three function slots."""

    name: str
    allowed_vars: set

    def __init__(self, source: Optional[str]):
        self.source = source
        self.opaque = source is None
        if not self.opaque:
            expr = parse_expr(source)
            bad = expr.support_vars() - self.allowed_vars
            if bad:
                names = ", ".join(sorted(k + str(i) for k, i in bad))
                raise FamilyError(
                    f"{self.name} slot may only involve "
                    f"{sorted(self.allowed_vars)}; found {names}")
            self.expr = expr


class FSlot(_Slot):
    """Function of u0 - u2.

    Concrete sources must genuinely be functions of the difference
    (du0 + du2 = 0) and have a monomial-invertible derivative, since the
    evolution laws divide by f'.
    """

    name = "f"
    allowed_vars = {("u", 0), ("u", 2)}

    def __init__(self, source: Optional[str]):
        super().__init__(source)
        if not self.opaque:
            sym = self.expr.diff(("u", 0)) + self.expr.diff(("u", 2))
            if not sym.is_zero:
                raise FamilyError(
                    "f slot must depend on u0 and u2 only through u0 - u2")
            d1 = self.order(1)
            if d1.is_zero:
                raise FamilyError("f slot must have a nonvanishing derivative")
            try:
                JetExpr.one() / d1
            except Exception:
                raise FamilyError(
                    "1/f' must stay a single product term; use an affine or "
                    "exponential f, or the opaque slot (f_slot=None)") from None

    def order(self, k: int) -> JetExpr:
        if self.opaque:
            return op_f(k)
        e = self.expr
        for _ in range(k):
            e = e.diff(("u", 0))
        return e


class Phi1Slot(_Slot):
    name = "phi1"
    allowed_vars = {("u", 0), ("u", 1)}

    def order(self, a: int, b: int) -> JetExpr:
        if self.opaque:
            return op_phi1(a, b)
        e = self.expr
        for _ in range(a):
            e = e.diff(("u", 0))
        for _ in range(b):
            e = e.diff(("u", 1))
        return e


class VphiSlot(_Slot):
    name = "vphi"
    allowed_vars = {("u", 0)}

    def order(self, k: int) -> JetExpr:
        if self.opaque:
            return op_vphi(k)
        e = self.expr
        for _ in range(k):
            e = e.diff(("u", 0))
        return e


# -- built instance ------------------------------------------------------


@dataclass
class FamilyInstance:
    """A family with its PDE, 1-forms and derived invariants resolved."""
    params: FamilyParams
    pde: PDESpec
    forms: Tuple[OneForm, OneForm, OneForm]
    mu3: Optional[Fraction] = None
    eta3: Optional[Fraction] = None
    rho: Optional[Fraction] = None
    gamma: Optional[Fraction] = None
    phi: Optional[Tuple[JetExpr, JetExpr, JetExpr]] = None
    L2: Optional[JetExpr] = None
    L3: Optional[JetExpr] = None
    M: Optional[JetExpr] = None
    N: Optional[JetExpr] = None
    Q: Optional[JetExpr] = None
    fprime: Optional[JetExpr] = None

    def with_forms(self, forms) -> "FamilyInstance":
        """Copy with replaced 1-forms; used to plant mutations in tests."""
        return replace(self, forms=tuple(forms))


def _rho_of(mu2: Fraction) -> Fraction:
    r = sqrt_rational(1 + mu2 * mu2)
    if r is None:
        raise FamilyError(
            f"sqrt(1 + mu2^2) must be rational for exact verification; "
            f"mu2={mu2} gives 1+mu2^2={1 + mu2 * mu2}. Pythagorean values "
            f"such as 0, 3/4, 4/3 work")
    return r


def _derived(params, forms, lam, mu3, eta3) -> dict:
    """phi_i, the L/M/N/Q combinations and gamma from the built forms."""
    u0sq = jv("u0") ** 2
    lam_e = num(lam)
    phis = tuple(f.cdt + lam_e * u0sq * f.cdx for f in forms)
    for i, p in enumerate(phis):
        bad = [v for v in p.support_vars() if v[0] != "u" or v[1] > 1]
        if bad:
            raise FamilyError(
                f"phi_{i + 1} = f_{i + 1}2 + lam*u0^2*f_{i + 1}1 must depend "
                f"only on (u0, u1); found {bad}")
    mu2, eta2 = params.mu2, params.eta2
    L2 = phis[1] - num(mu2) * phis[0]
    L3 = phis[2] - num(mu3) * phis[0]
    M = num(mu2) * phis[2] - num(mu3) * phis[1]
    N = num(eta2) * phis[2] - num(eta3) * phis[1]
    Q = -(L3 + num(mu2) * M)
    gamma = mu2 * mu3 * eta2 - (1 + mu2 * mu2) * eta3
    return dict(phi=phis, L2=L2, L3=L3, M=M, N=N, Q=Q, gamma=gamma)


_SIGNATURES = {
    "T22": ("Q = 0", "L2 = 0", "gamma = 0"),
    "T23": ("Q = 0", "L2 = 0", "gamma != 0"),
    "T24": ("Q = 0", "L2 != 0", "gamma = 0"),
    "T25i": ("Q != 0", "L2 != 0", "gamma != 0"),
    "T25ii": ("Q != 0", "L2 != 0", "gamma != 0"),
}


def _check_signature(kind: str, d: dict):
    want_q, want_l2, want_g = _SIGNATURES[kind]
    got_q = "Q = 0" if d["Q"].is_zero else "Q != 0"
    got_l2 = "L2 = 0" if d["L2"].is_zero else "L2 != 0"
    got_g = "gamma = 0" if d["gamma"] == 0 else "gamma != 0"
    if (got_q, got_l2, got_g) != (want_q, want_l2, want_g):
        raise FamilyError(
            f"{kind} signature mismatch: expected ({want_q}, {want_l2}, "
            f"{want_g}), derived ({got_q}, {got_l2}, {got_g})")


# -- individual builders --------------------------------------------------


def _build_t22(p: FamilyParams) -> FamilyInstance:
    if p.eta2 == 0:
        raise FamilyError("T22 requires eta2 != 0")
    rho = _rho_of(p.mu2)
    eps = p.sign
    fS = FSlot(p.f_slot)
    phiS = Phi1Slot(p.phi1_slot)
    if not phiS.opaque and phiS.order(0, 0).is_zero:
        raise FamilyError("T22 requires a nonzero phi1 slot")

    f, fp = fS.order(0), fS.order(1)
    ph, ph10, ph01 = phiS.order(0, 0), phiS.order(1, 0), phiS.order(0, 1)
    u1, u2 = jv("u1"), jv("u2")
    aa = Fraction(eps) * p.eta2 / rho

    G = (ph10 * u1 + ph01 * u2 + num(aa) * ph) / fp
    pde = PDESpec.third_order(0, G)

    w1 = OneForm(f, ph)
    w2 = OneForm(num(p.mu2) * f + num(p.eta2), num(p.mu2) * ph)
    w3 = OneForm(num(eps) * (num(rho) * f + num(p.mu2 * p.eta2 / rho)),
                 num(eps * rho) * ph)

    mu3 = eps * rho
    eta3 = eps * p.mu2 * p.eta2 / rho
    _validate_given(p, mu3, eta3)
    d = _derived(p, (w1, w2, w3), _F0, mu3, eta3)
    _check_signature("T22", d)
    return FamilyInstance(p, pde, (w1, w2, w3), mu3=mu3, eta3=eta3, rho=rho,
                          fprime=fp, **d)


def _build_t23(p: FamilyParams) -> FamilyInstance:
    if p.lam * p.eta2 == 0:
        raise FamilyError("T23 requires lam*eta2 != 0")
    if p.mu3 is None or p.eta3 is None:
        raise FamilyError("T23 requires explicit mu3 and eta3")
    cons = p.eta2 ** 2 - p.eta3 ** 2 - (p.mu2 * p.eta3 - p.mu3 * p.eta2) ** 2
    if cons != 0:
        raise FamilyError(
            f"T23 constraint eta2^2 - eta3^2 - (mu2*eta3 - mu3*eta2)^2 = 0 "
            f"violated (value {cons})")
    gamma = p.mu2 * p.mu3 * p.eta2 - (1 + p.mu2 ** 2) * p.eta3
    if gamma == 0:
        raise FamilyError("T23 requires gamma != 0")
    fS = FSlot(p.f_slot)
    f, fp = fS.order(0), fS.order(1)
    u0, u1, u2 = jv("u0"), jv("u1"), jv("u2")
    lam = num(p.lam)
    two_g = num(2 * p.eta2 / gamma)

    G = -(lam / fp) * (2 * u0 * u1 * f + u0 ** 2 * u1 * fp
                       + two_g * (u1 ** 2 + u0 * u2
                                  + num(p.mu3 * p.eta2 - p.mu2 * p.eta3) * u0 * u1))
    pde = PDESpec.third_order(p.lam, G)

    f21 = num(p.mu2) * f + num(p.eta2)
    f31 = num(p.mu3) * f + num(p.eta3)
    w1 = OneForm(f, -lam * (u0 ** 2 * f + two_g * u0 * u1))
    w2 = OneForm(f21, -lam * (u0 ** 2 * f21 + num(p.mu2) * two_g * u0 * u1))
    w3 = OneForm(f31, -lam * (u0 ** 2 * f31 + num(p.mu3) * two_g * u0 * u1))

    d = _derived(p, (w1, w2, w3), p.lam, p.mu3, p.eta3)
    _check_signature("T23", d)
    return FamilyInstance(p, pde, (w1, w2, w3), mu3=p.mu3, eta3=p.eta3,
                          rho=None, fprime=fp, **d)


def _build_t24(p: FamilyParams) -> FamilyInstance:
    if (p.lam * p.eta2) ** 2 + p.c1 ** 2 == 0:
        raise FamilyError("T24 requires (lam*eta2)^2 + c1^2 != 0")
    rho = _rho_of(p.mu2)
    eps = p.sign
    fS = FSlot(p.f_slot)
    phiS = Phi1Slot(p.phi1_slot)
    f, fp = fS.order(0), fS.order(1)
    ph, ph10, ph01 = phiS.order(0, 0), phiS.order(1, 0), phiS.order(0, 1)
    u0, u1, u2 = jv("u0"), jv("u1"), jv("u2")
    lam = num(p.lam)
    aa = num(Fraction(eps) * p.eta2 / rho)
    bb = num(Fraction(eps) * p.c1 / rho)

    G = (u1 * ph10 + u2 * ph01 - lam * u0 ** 2 * u1 * fp + aa * ph
         - (2 * lam * u0 * u1 + aa * lam * u0 ** 2 + bb) * f) / fp
    pde = PDESpec.third_order(p.lam, G)

    w1 = OneForm(f, ph - lam * u0 ** 2 * f)
    w2 = OneForm(num(p.mu2) * f + num(p.eta2),
                 -(lam * num(p.mu2) * u0 ** 2 * f - num(p.mu2) * ph - num(p.c1)))
    w3 = OneForm(num(eps) * (num(rho) * f + num(p.mu2 * p.eta2 / rho)),
                 num(-eps * rho) * (lam * u0 ** 2 * f - ph
                                    - num(p.mu2 * p.c1 / (1 + p.mu2 ** 2))))

    mu3 = eps * rho
    eta3 = eps * p.mu2 * p.eta2 / rho
    _validate_given(p, mu3, eta3)
    d = _derived(p, (w1, w2, w3), p.lam, mu3, eta3)
    _check_signature("T24", d)
    return FamilyInstance(p, pde, (w1, w2, w3), mu3=mu3, eta3=eta3, rho=rho,
                          fprime=fp, **d)


def t25i_displayed_zeta1(p: FamilyParams) -> Fraction:
    """The published closed form for the T25i coupling scalar.

    Kept for reference: it does not close the structure equations (see
    ``_build_t25i``, which solves for the consistent value instead).
    """
    r2 = 1 + p.mu2 ** 2
    return (2 * p.sigma / p.nu - 1 / p.theta - p.theta / (p.nu ** 2 * r2)
            - p.eta2 * (2 * p.theta * p.mu2 + p.nu * p.eta2)
            / (p.theta * p.nu * r2))


def _t25i_forms(p: FamilyParams, rho: Fraction, eta3: Fraction):
    eps = p.sign
    u0, u1 = jv("u0"), jv("u1")
    lam = num(p.lam)
    kernel = num(p.theta * p.c2) * exp_k(num(p.theta) * u0)  # theta*C2*e^{theta*u0}
    E = num(2 * p.lam / p.theta) - kernel + 2 * lam * u0
    Eprime = 2 * lam - num(p.theta) * kernel
    f11 = num(p.nu) * (u0 - jv("u2")) - num(p.sigma)

    # the u1-coefficient scalar inside phi1 and the constant slot of L3 are
    # linked (closure of the compatibility conditions), not independent
    pcoef = Fraction(eps) * (p.mu2 - p.nu * p.eta2 / p.theta) / rho
    dcoef = (p.mu2 * pcoef - Fraction(eps) * rho) / p.nu

    f12 = -(lam * u0 ** 2 * f11 + num(p.nu / p.theta) * Eprime * u1 ** 2
            + E * (num(Fraction(1, 1) / p.theta) * (num(p.nu) * u0 - num(p.sigma))
                   + num(pcoef) * u1))
    w1 = OneForm(f11, f12)
    phi1 = f12 + lam * u0 ** 2 * f11
    f21 = num(p.mu2) * f11 + num(p.eta2)
    f22 = (num(p.mu2) * f12 - num(p.lam * p.eta2) * u0 ** 2
           + E * (num(Fraction(eps) * rho) * u1 - num(p.eta2 / p.theta)))
    w2 = OneForm(f21, f22)
    f31 = num(eps * rho) * f11 + num(eta3)
    f32 = (-lam * u0 ** 2 * f31 + num(eps * rho) * phi1
           + E * (num(p.mu2) * u1 + num(dcoef)))
    w3 = OneForm(f31, f32)
    return (w1, w2, w3)


def _t25i_pde(p: FamilyParams, z1: Fraction) -> PDESpec:
    u0, u1, u2 = jv("u0"), jv("u1"), jv("u2")
    lam = num(p.lam)
    kernel = num(p.theta * p.c2) * exp_k(num(p.theta) * u0)
    G = (lam * (-5 * u0 ** 2 * u1 + 4 * u0 * u1 * u2
                + num(2 * z1 - 4 / p.theta) * u0 * u1
                - num(Fraction(2, 1) / p.theta) * u1 * u2
                + num(2 * z1 / p.theta) * u1)
         + (num(p.theta) * u1 ** 3 + 2 * u0 * u1 + u1 * u2 - num(z1) * u1)
         * kernel)
    return PDESpec.third_order(p.lam, G)


def _solve_affine(r0: JetExpr, r1: JetExpr) -> Optional[Fraction]:
    """Rational s with r0 + s*r1 == 0, if one exists."""
    if r1.is_zero:
        return _F0 if r0.is_zero else None
    key, slope = sorted(r1.terms())[0]
    c0 = dict(r0.terms()).get(key, _F0)
    s = -c0 / slope
    return s if (r0 + num(s) * r1).is_zero else None


def t25i_scalars(p: FamilyParams) -> Tuple[Fraction, Fraction]:
    """The (zeta1, eta3) pair that closes the structure equations.

    Neither scalar is free data: eta3 is forced by the compatibility of
    the second and third forms, and zeta1 by the zero-curvature closure
    of the evolution law (the published zeta1 differs by the sign of one
    term; see the tests, which re-derive the pair independently).
    """
    rho = _rho_of(p.mu2)
    r2 = rho * rho
    eta3 = Fraction(p.sign) * (p.theta / p.nu + p.mu2 * p.eta2) / rho
    zeta1 = (2 * p.sigma / p.nu - 1 / p.theta - p.theta / (p.nu ** 2 * r2)
             - p.eta2 * (2 * p.theta * p.mu2 - p.nu * p.eta2)
             / (p.theta * p.nu * r2))
    return zeta1, eta3


def _build_t25i(p: FamilyParams) -> FamilyInstance:
    if p.nu * p.theta == 0:
        raise FamilyError("T25i requires nu*theta != 0")
    if p.lam ** 2 + p.c2 ** 2 == 0:
        raise FamilyError("T25i requires lam^2 + c2^2 != 0")
    rho = _rho_of(p.mu2)
    zeta1, eta3 = t25i_scalars(p)
    if p.eta3 is not None and p.eta3 != eta3:
        raise FamilyError(
            f"T25i eta3={p.eta3} is inconsistent with the structure "
            f"equations; the consistent value is {eta3}")
    mu3 = p.sign * rho
    if p.mu3 is not None and p.mu3 != mu3:
        raise FamilyError(f"T25i fixes mu3 = sign*sqrt(1+mu2^2) = {mu3}")
    pde = _t25i_pde(p, zeta1)
    forms = _t25i_forms(p, rho, eta3)
    d = _derived(p, forms, p.lam, mu3, eta3)
    _check_signature("T25i", d)
    return FamilyInstance(p, pde, forms, mu3=mu3, eta3=eta3, rho=rho,
                          fprime=num(p.nu), **d)


def _solve_affine_pair(r0, rz, re) -> Optional[tuple]:
    """Solve r0[i] + z*rz[i] + e*re[i] == 0 (all i) for rationals (z, e)."""
    rows = []
    keys = set()
    for i in range(len(r0)):
        keys = (set(dict(r0[i].terms())) | set(dict(rz[i].terms()))
                | set(dict(re[i].terms())))
        for k in keys:
            a = dict(rz[i].terms()).get(k, _F0)
            b = dict(re[i].terms()).get(k, _F0)
            c = dict(r0[i].terms()).get(k, _F0)
            if a or b or c:
                rows.append((a, b, -c))
    piv = next((r for r in rows if r[0] != 0), None)
    if piv is None:
        # no zeta1 dependence: fall back to single-unknown solve on e
        er = next((r for r in rows if r[1] != 0), None)
        if er is None:
            return (_F0, _F0) if all(r[2] == 0 for r in rows) else None
        z, e = _F0, er[2] / er[1]
    else:
        red = None
        for r in rows:
            rr = (r[1] - r[0] * piv[1] / piv[0], r[2] - r[0] * piv[2] / piv[0])
            if rr[0] != 0:
                red = rr
                break
        if red is None:
            return None
        e = red[1] / red[0]
        z = (piv[2] - piv[1] * e) / piv[0]
    ok = all((r0[i] + num(z) * rz[i] + num(e) * re[i]).is_zero
             for i in range(len(r0)))
    return (z, e) if ok else None


def t25ii_mu3_eta3(mu2, eta2, tau, nu, sign: int, k) -> Tuple[Fraction, Fraction]:
    """The (mu3, eta3) pair consistent with the third form's coefficients.

    ``k = mu3*eta2 - mu2*eta3`` is not free: closure of the third structure
    equation forces the quadratic solved by :func:`t25ii_admissible_k`.
    This helper only applies the affine relations for a given k.
    """
    mu2, eta2, tau, nu, k = map(rat, (mu2, eta2, tau, nu, k))
    s = -Fraction(sign) * tau / nu
    mu3 = k * (1 + mu2 ** 2) / eta2 + s * mu2
    eta3 = k * mu2 + s * eta2
    return mu3, eta3


def t25ii_admissible_k(mu2, eta2, tau, nu, sign: int) -> Tuple[Fraction, ...]:
    """Roots of (1+mu2^2) k^2 - 2*sign*tau*mu2*eta2/nu k - eta2^2 (1 - tau^2/nu^2).

    These are the only couplings for which the three 1-forms close; real
    roots need tau <= nu*sqrt(1+mu2^2), and exact verification needs the
    discriminant's square root sqrt(1 + mu2^2 - tau^2/nu^2) rational.
    """
    mu2, eta2, tau, nu = map(rat, (mu2, eta2, tau, nu))
    r2 = 1 + mu2 * mu2
    disc = r2 - (tau / nu) ** 2
    s = sqrt_rational(disc)
    if s is None:
        raise FamilyError(
            f"T25ii admissibility: 1 + mu2^2 - (tau/nu)^2 = {disc} must be "
            "a square of a rational (and nonnegative: tau <= nu*sqrt(1+mu2^2))")
    base = Fraction(sign) * tau * mu2 * eta2 / nu
    roots = {(base + eta2 * s) / r2, (base - eta2 * s) / r2}
    return tuple(sorted(roots))


def _build_t25ii(p: FamilyParams) -> FamilyInstance:
    if not (p.tau > 0 and p.nu > 0 and p.sigma > 0):
        raise FamilyError("T25ii requires tau, nu, sigma > 0")
    if p.nu * p.eta2 == 0:
        raise FamilyError("T25ii requires nu*eta2 != 0")
    vS = VphiSlot(p.vphi_slot)
    if not vS.opaque and vS.order(0).is_zero:
        raise FamilyError("T25ii requires a nonzero vphi slot")
    admissible = t25ii_admissible_k(p.mu2, p.eta2, p.tau, p.nu, p.sign)
    if p.mu3 is None and p.eta3 is None:
        k = admissible[-1]
        mu3, eta3 = t25ii_mu3_eta3(p.mu2, p.eta2, p.tau, p.nu, p.sign, k)
    elif p.mu3 is not None and p.eta3 is not None:
        mu3, eta3 = p.mu3, p.eta3
        k = mu3 * p.eta2 - p.mu2 * eta3
        want = t25ii_mu3_eta3(p.mu2, p.eta2, p.tau, p.nu, p.sign, k)
        if (mu3, eta3) != want:
            raise FamilyError(
                f"T25ii (mu3, eta3)=({mu3}, {eta3}) breaks the third form's "
                f"affine structure; for k={k} the consistent pair is {want}")
        if k not in admissible:
            raise FamilyError(
                f"T25ii coupling k={k} does not close the third structure "
                f"equation; admissible values here: {admissible}")
    else:
        raise FamilyError("T25ii needs both mu3 and eta3, or neither")

    eps = p.sign
    k = mu3 * p.eta2 - p.mu2 * eta3
    zeta2 = p.sigma / p.nu - Fraction(eps) * k / p.tau
    u0, u1, u2 = jv("u0"), jv("u1"), jv("u2")
    lam = num(p.lam)
    vp0, vp1, vp2 = vS.order(0), vS.order(1), vS.order(2)
    ek = exp_k(num(Fraction(eps) * p.tau) * u1)
    tau_e, nu_e, sig_e = num(p.tau), num(p.nu), num(p.sigma)

    G = (lam * (-3 * u0 ** 2 * u1 + 2 * u0 * u1 * u2 + num(2 * zeta2) * u0 * u1
                - num(Fraction(eps) * 2 / p.tau) * (u1 ** 2 + u0 * u2))
         + tau_e * (tau_e * u0 * u2 + num(eps) * u1 - num(zeta2 * p.tau) * u2)
         * vp0 * ek
         + vp2 * u1 ** 2 * ek
         + num(eps) * (tau_e * u0 * u1 + tau_e * u1 * u2 + num(eps) * u2
                       - num(zeta2 * p.tau) * u1) * vp1 * ek)
    pde = PDESpec.third_order(p.lam, G)

    f11 = nu_e * (u0 - u2) - sig_e
    f12 = -(lam * u0 ** 2 * f11
            - (num(eps) * tau_e * (nu_e * u0 - sig_e) * vp0 + nu_e * vp1 * u1) * ek
            + num(Fraction(eps) * 2 * p.lam * p.nu / p.tau) * u0 * u1)
    w1 = OneForm(f11, f12)
    f21 = num(p.mu2) * f11 + num(p.eta2)
    f22 = num(p.mu2) * f12 - num(p.lam * p.eta2) * u0 ** 2 \
        + num(Fraction(eps) * p.tau * p.eta2) * vp0 * ek
    w2 = OneForm(f21, f22)
    sv = num(p.sigma / p.nu - zeta2)
    r2e2 = num((1 + p.mu2 ** 2) / p.eta2)
    f31 = num(eps) * tau_e * (sv * (r2e2 * f11 + num(p.mu2)) - f21 / nu_e)
    f32 = num(eps) * tau_e * (
        sv * (r2e2 * f12 - num(p.mu2) * (lam * u0 ** 2
                                         - num(eps) * tau_e * vp0 * ek))
        - f22 / nu_e)
    w3 = OneForm(f31, f32)

    d = _derived(p, (w1, w2, w3), p.lam, mu3, eta3)
    _check_signature("T25ii", d)
    return FamilyInstance(p, pde, (w1, w2, w3), mu3=mu3, eta3=eta3, rho=None,
                          fprime=num(p.nu), **d)


def _build_sg(p: FamilyParams) -> FamilyInstance:
    eta = p.eta2
    if eta == 0:
        raise FamilyError("the sine-Gordon fixture needs a nonzero eta2")
    u0, u1 = jv("u0"), jv("u1")
    w1 = OneForm(JetExpr.zero(), sin_k(u0) / num(eta))
    w2 = OneForm(num(eta), cos_k(u0) / num(eta))
    w3 = OneForm(u1, JetExpr.zero())
    return FamilyInstance(p, PDESpec.sine_gordon(), (w1, w2, w3))


def _validate_given(p: FamilyParams, mu3: Fraction, eta3: Fraction):
    if p.mu3 is not None and p.mu3 != mu3:
        raise FamilyError(f"{p.kind} fixes mu3 = {mu3}, got {p.mu3}")
    if p.eta3 is not None and p.eta3 != eta3:
        raise FamilyError(f"{p.kind} fixes eta3 = {eta3}, got {p.eta3}")


_BUILDERS = {
    "T22": _build_t22,
    "T23": _build_t23,
    "T24": _build_t24,
    "T25i": _build_t25i,
    "T25ii": _build_t25ii,
    "SG": _build_sg,
}


def build_family(params: FamilyParams) -> FamilyInstance:
    """Validate the parameter pack and assemble the PDE plus its 1-forms."""
    return _BUILDERS[params.kind](params)


def default_params(kind: str, sign: int = 1) -> FamilyParams:
    """Smallest concrete instantiations used by the CI suites."""
    if kind == "T22":
        return FamilyParams("T22", mu2=0, eta2=1, sign=sign,
                            f_slot="u0 - u2", phi1_slot="u1")
    if kind == "T23":
        return FamilyParams("T23", mu2=0, mu3=0, eta2=1, eta3=1, lam=1,
                            sign=sign, f_slot="u0 - u2")
    if kind == "T24":
        return FamilyParams("T24", mu2=0, eta2=1, lam=1, c1=1, sign=sign,
                            f_slot="u0 - u2", phi1_slot="u0*u1^2")
    if kind == "T25i":
        return FamilyParams("T25i", mu2=0, eta2=1, lam=1, c2=0, theta=1,
                            nu=1, sigma=1, sign=sign)
    if kind == "T25ii":
        return FamilyParams("T25ii", mu2=0, eta2=1, lam=1, tau=1, nu=1,
                            sigma=1, sign=sign, vphi_slot="1")
    if kind == "SG":
        return FamilyParams("SG", eta2=1, sign=sign)
    raise FamilyError(f"unknown family kind {kind!r}")


# -- verification ---------------------------------------------------------


@dataclass
class VerifyReport:
    """Outcome of the flatness check for one instance."""
    params: FamilyParams
    residuals: ResidualReport
    witness: JetExpr
    ok: bool

    def to_dict(self) -> dict:
        r = self.residuals.to_dict()
        return {
            "family": self.params.kind,
            "params": self.params.to_dict(),
            "residuals": r["residuals"],
            "cleared_denominator": ", ".join(r["cleared_denominator"]),
            "zero": r["zero"],
            "independence_witness": render(self.witness),
            "ok": self.ok,
        }


def verify_pss(inst: FamilyInstance) -> VerifyReport:
    """True iff the three structure residuals vanish identically modulo the
    PDE and the first two forms stay independent."""
    rep = structure_residuals(*inst.forms, inst.pde)
    wit = independence_witness(inst.forms[0], inst.forms[1])
    return VerifyReport(inst.params, rep, wit, rep.zero and not wit.is_zero)


@dataclass
class ConditionResult:
    cond: str
    passed: bool
    detail: str


@dataclass
class Lemma21Report:
    conditions: Tuple[ConditionResult, ...]
    delta_used: Optional[Fraction]
    delta_solved: Optional[Fraction]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def to_dict(self) -> dict:
        return {
            "conditions": [
                {"cond": c.cond, "passed": c.passed, "detail": c.detail}
                for c in self.conditions],
            "delta_used": None if self.delta_used is None else str(self.delta_used),
            "delta_solved": None if self.delta_solved is None else str(self.delta_solved),
            "all_passed": self.all_passed,
        }


def lemma21_check(inst: FamilyInstance,
                  delta: Optional[Fraction] = None) -> Lemma21Report:
    """Evaluate the classification's pointwise conditions on an instance.

    The final first-order condition involves an undetermined scalar
    multiplier delta; pass one explicitly or leave None to use the value
    that closes the condition (also reported as ``delta_solved``).
    """
    if inst.params.kind == "SG":
        raise FamilyError("the condition checker applies to the third-order "
                          "families, not the sine-Gordon fixture")
    p = inst.params
    lam = num(p.lam if p.kind != "T22" else 0)
    u0, u1, u2 = jv("u0"), jv("u1"), jv("u2")
    results = []

    def check(cond, expr_or_flag, detail=""):
        if isinstance(expr_or_flag, JetExpr):
            ok = expr_or_flag.is_zero
            detail = detail or f"residual {render(expr_or_flag)}"
        else:
            ok = bool(expr_or_flag)
        results.append(ConditionResult(cond, ok, detail))

    # first-order data must not leak beyond (u0, u1, u2)
    for i, w in enumerate(inst.forms, start=1):
        check(f"dx-coefficient {i} independent of u1",
              w.cdx.diff(("u", 1)))
        high = [v for v in (w.cdx.support_vars() | w.cdt.support_vars())
                if v[0] != "u" or v[1] > 2]
        check(f"form {i} depends only on (u0, u1, u2)", not high,
              f"extra variables {high}" if high else "none")
        check(f"dx-coefficient {i} translation invariance",
              w.cdx.diff(("u", 0)) + w.cdx.diff(("u", 2)))
    # the dt-coefficients decompose as -lam*u0^2*f_i1 + phi_i(u0,u1)
    for i, (w, phi) in enumerate(zip(inst.forms, inst.phi), start=1):
        check(f"dt-coefficient {i} decomposition",
              w.cdt + lam * u0 ** 2 * w.cdx - phi)

    G = inst.pde.G
    f11 = inst.forms[0].cdx
    phi1 = inst.phi[0]
    c25 = (-G * f11.diff(("u", 0))
           + (-2 * lam * u0 * f11 - lam * u0 ** 2 * f11.diff(("u", 0))
              + phi1.diff(("u", 0))) * u1
           + phi1.diff(("u", 1)) * u2 + inst.M * f11 + inst.N)
    check("zero-curvature closure of G", c25)

    c26 = (inst.Q * f11 + inst.L2.diff(("u", 0)) * u1
           + inst.L2.diff(("u", 1)) * u2
           - 2 * lam * num(p.eta2) * u0 * u1
           - num(p.mu2) * inst.N + num(inst.eta3) * phi1)
    check("second-form compatibility", c26)

    witness = -inst.L2 * f11 + num(p.eta2) * phi1

    def c27_of(dd: Fraction) -> JetExpr:
        return (-(num(dd) * inst.L2 + num(inst.mu3) * inst.M) * f11
                + inst.L3.diff(("u", 0)) * u1 + inst.L3.diff(("u", 1)) * u2
                - 2 * lam * num(inst.eta3) * u0 * u1
                - num(inst.mu3) * inst.N + num(dd) * num(p.eta2) * phi1)

    r0 = c27_of(_F0)
    solved = _solve_affine(r0, c27_of(_F1) - r0)
    used = delta if delta is not None else solved
    if used is None:
        check("third-form compatibility (delta)", JetExpr.one(),
              "no scalar delta closes the condition")
    else:
        check("third-form compatibility (delta)", c27_of(rat(used)))

    check("nondegeneracy witness", not witness.is_zero,
          f"witness {render(witness)}")
    return Lemma21Report(tuple(results), None if used is None else rat(used),
                         solved)
