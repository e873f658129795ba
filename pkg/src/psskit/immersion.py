"""Second-fundamental-form coefficients for the immersible families.

For the families that do admit local isometric immersions the
coefficients a, b, c are universal functions of (x, t) living on an
exponential strip in xi = eta2*x + c1*t:

* ``P35i``  (T22 with mu2 = 0): pure-x strip, closed form,
* ``P37i``  (T24 with mu2 = eta2 = 0, c1 != 0): pure-t strip, closed form,
* ``P37ii`` (T24 with mu2 = 0, eta2 != 0): mixed strip, closed form,
* ``P35ii``/``P37iii`` (mu2 != 0): b solves a guarded nonlinear ODE and
  a rides along through a first-order companion equation; c = a + Phi is
  algebraic.

In every case a*c - b^2 = -1 must hold: exactly for the closed forms,
and to integrator tolerance for the ODE cases (a is integrated through
an independent route precisely so that the Gauss residual measures
integration quality; the closed-form root supplies the initial value and
a cross-check).

The non-immersible families get obstruction certificates: a computed
quantity whose nonvanishing reproduces the contradiction that rules the
immersion out.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Tuple

import numpy as np

from .families import (FamilyInstance, FamilyParams,
                       t25ii_admissible_k, t25ii_mu3_eta3)
from .jetalg import exp_k, is_zero, jv, num, render
from .rk import OdeSolution, solve_ivp_dp45

CLOSED_CASES = ("P35i", "P37i", "P37ii")
ODE_CASES = ("P35ii", "P37iii")


class ImmersionError(ValueError):
    """Parameter or domain violation in the immersion layer."""


# -- strip domains --------------------------------------------------------


@dataclass(frozen=True)
class StripDomain:
    """Interval where L > 0, in exponential and strip coordinates.

    ``e_lo < exp(2*sign*xi) < e_hi`` and correspondingly ``xi_lo < xi <
    xi_hi``.  With beta = 0 the upper end degenerates to a half line
    (flagged), the connected positivity component of L.
    """
    e_lo: float
    e_hi: float
    xi_lo: float
    xi_hi: float
    degenerate_beta: bool = False

    def contains_xi(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return (xi > self.xi_lo) & (xi < self.xi_hi)

    def sample_xi(self, n: int, seed: int = 0, margin: float = 1e-6) -> np.ndarray:
        lo = self.xi_lo if np.isfinite(self.xi_lo) else self.xi_hi - 10.0
        hi = self.xi_hi if np.isfinite(self.xi_hi) else self.xi_lo + 10.0
        w = hi - lo
        rng = np.random.default_rng(seed)
        return lo + w * (margin + (1 - 2 * margin) * rng.random(n))


def _check_alpha_beta(alpha: float, beta: float):
    if not alpha > 0:
        raise ImmersionError(f"alpha must be positive, got {alpha}")
    if not alpha * alpha > 4 * beta * beta:
        raise ImmersionError(
            f"alpha^2 > 4 beta^2 required, got alpha={alpha}, beta={beta}")


def sff_closed_form(case_id: str, alpha: float, beta: float, sign: int = 1,
                    eta2: float = 1.0, c1: float = 0.0) -> "ClosedFormSFF":
    """Closed-form coefficients for one of the strip cases."""
    return ClosedFormSFF(case_id, alpha, beta, sign, eta2=eta2, c1=c1)


def strip_domain(alpha: float, beta: float, sign: int = 1) -> StripDomain:
    """Solve L(E) = alpha*E - beta^2*E^2 - 1 > 0 for E = exp(2*sign*xi)."""
    _check_alpha_beta(alpha, beta)
    if beta == 0:
        e_lo, e_hi = 1.0 / alpha, math.inf
        degenerate = True
    else:
        disc = math.sqrt(alpha * alpha - 4 * beta * beta)
        e_lo = (alpha - disc) / (2 * beta * beta)
        e_hi = (alpha + disc) / (2 * beta * beta)
        degenerate = False
    lo = math.log(e_lo) / 2.0
    hi = math.log(e_hi) / 2.0 if math.isfinite(e_hi) else math.inf
    if sign > 0:
        xi_lo, xi_hi = lo, hi
    else:
        xi_lo, xi_hi = (-hi if math.isfinite(hi) else -math.inf), -lo
    return StripDomain(e_lo, e_hi, xi_lo, xi_hi, degenerate)


# -- closed-form coefficients ---------------------------------------------


_CASE_B_SIGN = {"P35i": -1.0, "P37i": +1.0, "P37ii": -1.0}


@dataclass
class ClosedFormSFF:
    """Universal (x, t) coefficients a = sqrt(L), b ~ beta*E, c = a - s*a_xi.

    ``xi = eta2*x + c1*t``; the case tag fixes which slope is active and
    the sign convention of b.
    """
    case_id: str
    alpha: float
    beta: float
    sign: int = 1
    eta2: float = 1.0
    c1: float = 0.0
    domain: StripDomain = field(init=False)

    def __post_init__(self):
        if self.case_id not in CLOSED_CASES:
            raise ImmersionError(f"unknown closed-form case {self.case_id!r}")
        _check_alpha_beta(self.alpha, self.beta)
        if self.case_id == "P35i":
            if self.eta2 == 0 or self.c1 != 0:
                raise ImmersionError("P35i is the pure-x strip: eta2 != 0, c1 = 0")
        elif self.case_id == "P37i":
            if self.c1 == 0 or self.eta2 != 0:
                raise ImmersionError("P37i is the pure-t strip: c1 != 0, eta2 = 0")
        else:
            if self.eta2 == 0:
                raise ImmersionError("P37ii needs eta2 != 0")
        self.domain = strip_domain(self.alpha, self.beta, self.sign)

    # xi helpers -----------------------------------------------------

    def xi(self, x, t) -> np.ndarray:
        return self.eta2 * np.asarray(x, float) + self.c1 * np.asarray(t, float)

    def _E(self, xi):
        return np.exp(2.0 * self.sign * np.asarray(xi, float))

    def _L(self, E):
        return self.alpha * E - self.beta ** 2 * E * E - 1.0

    def abc_xi(self, xi, check_domain: bool = True):
        xi = np.asarray(xi, float)
        if check_domain and not np.all(self.domain.contains_xi(xi)):
            raise ImmersionError("evaluation outside the strip where L > 0")
        E = self._E(xi)
        L = self._L(E)
        a = np.sqrt(L)
        b = _CASE_B_SIGN[self.case_id] * self.beta * E
        a_xi = self.sign * (self.alpha * E - 2 * self.beta ** 2 * E * E) / a
        c = a - self.sign * a_xi
        return a, b, c

    def abc(self, x, t, check_domain: bool = True):
        return self.abc_xi(self.xi(x, t), check_domain)

    def partials_xi(self, xi):
        """d/dxi of (a, b, c) plus the values; all closed form."""
        xi = np.asarray(xi, float)
        E = self._E(xi)
        L = self._L(E)
        a = np.sqrt(L)
        s = float(self.sign)
        L1 = s * 2 * (self.alpha * E - 2 * self.beta ** 2 * E * E)
        L2 = 4 * (self.alpha * E - 4 * self.beta ** 2 * E * E)
        a1 = L1 / (2 * a)
        a2 = L2 / (2 * a) - a1 * a1 / a
        b = _CASE_B_SIGN[self.case_id] * self.beta * E
        b1 = s * 2 * b
        c = a - s * a1
        c1 = a1 - s * a2
        return {"a": a, "b": b, "c": c, "a_xi": a1, "b_xi": b1, "c_xi": c1}

    def partials(self, x, t) -> Dict[str, np.ndarray]:
        p = self.partials_xi(self.xi(x, t))
        out = dict(a=p["a"], b=p["b"], c=p["c"])
        for q in ("a", "b", "c"):
            out[f"{q}_x"] = self.eta2 * p[f"{q}_xi"]
            out[f"{q}_t"] = self.c1 * p[f"{q}_xi"]
        return out

    def gauss_residual_xi(self, xi) -> np.ndarray:
        a, b, c = self.abc_xi(xi)
        return np.abs(a * c - b * b + 1.0)


# -- the guarded b-ODE cases ----------------------------------------------


@dataclass
class BOdeProblem:
    """Initial-value data for the mu2 != 0 coefficient system."""
    case_id: str = "P35ii"
    mu2: float = 1.0
    eta2: float = 1.0
    c1: float = 0.0
    beta: float = 0.0
    sign: int = 1
    xi0: float = 0.0
    b0: float = 2.0
    xi_range: Tuple[float, float] = (0.0, 1.0)
    rtol: float = 1e-10
    atol: float = 1e-10
    guard_rel: float = 1e-8
    delta_floor: float = 1e-10

    def __post_init__(self):
        if self.case_id not in ODE_CASES:
            raise ImmersionError(f"unknown ODE case {self.case_id!r}")
        if self.mu2 == 0:
            raise ImmersionError("the ODE cases require mu2 != 0")
        if self.case_id == "P35ii" and self.c1 != 0:
            raise ImmersionError("P35ii is the pure-x case: c1 = 0")


class OdeSFF:
    """Coefficients from the integrated (b, a) system; c = a + Phi."""

    def __init__(self, problem: BOdeProblem, sol_fwd: Optional[OdeSolution],
                 sol_bwd: Optional[OdeSolution]):
        self.problem = problem
        self.case_id = problem.case_id
        self.sign = problem.sign
        self._fwd = sol_fwd
        self._bwd = sol_bwd
        los = [s.ts.min() for s in (sol_fwd, sol_bwd) if s is not None]
        his = [s.ts.max() for s in (sol_fwd, sol_bwd) if s is not None]
        self.xi_lo, self.xi_hi = min(los), max(his)
        self.stopped = [(s.status, s.message, s.stopped_at)
                        for s in (sol_fwd, sol_bwd)
                        if s is not None and s.status != "completed"]

    # scalar field helpers --------------------------------------------

    def _rho(self) -> float:
        return math.sqrt(1.0 + self.problem.mu2 ** 2)

    def _Exp(self, xi):
        return np.exp(2.0 * self.sign * np.asarray(xi, float) / self._rho())

    def _phi_of(self, xi, b):
        m = self.problem.mu2
        return ((m * m - 1.0) * b - self.problem.beta * self._Exp(xi)) / m

    def xi(self, x, t):
        return (self.problem.eta2 * np.asarray(x, float)
                + self.problem.c1 * np.asarray(t, float))

    def _eval_ba(self, xi):
        xi = np.atleast_1d(np.asarray(xi, float))
        if self._fwd is None:
            out = self._bwd(xi)
        elif self._bwd is None:
            out = self._fwd(xi)
        else:
            out = np.empty((xi.size, 2))
            fwd = xi >= self.problem.xi0
            if fwd.any():
                out[fwd] = self._fwd(xi[fwd])
            if (~fwd).any():
                out[~fwd] = self._bwd(xi[~fwd])
        return out[:, 0], out[:, 1]

    def abc_xi(self, xi):
        b, a = self._eval_ba(xi)
        c = a + self._phi_of(xi, b)
        return a, b, c

    def abc(self, x, t, check_domain: bool = True):
        return self.abc_xi(self.xi(x, t))

    def closed_form_a_xi(self, xi):
        """Algebraic root for a from (b, Phi); the cross-check route."""
        b, _a = self._eval_ba(xi)
        phi = self._phi_of(xi, b)
        delta = phi * phi - 4.0 * (1.0 - b * b)
        return (self.sign * np.sqrt(delta) - phi) / 2.0

    def relation_residual_xi(self, xi) -> np.ndarray:
        """|a^2 + a*Phi - b^2 + 1| along the trajectory (= Gauss residual)."""
        b, a = self._eval_ba(xi)
        phi = self._phi_of(xi, b)
        return np.abs(a * a + a * phi - b * b + 1.0)

    def gauss_residual_xi(self, xi) -> np.ndarray:
        a, b, c = self.abc_xi(xi)
        return np.abs(a * c - b * b + 1.0)

    def partials_xi(self, xi):
        xi = np.atleast_1d(np.asarray(xi, float))
        b, a = self._eval_ba(xi)
        phi = self._phi_of(xi, b)
        m = self.problem.mu2
        rho = self._rho()
        s = float(self.sign)
        g = _b_slope(xi, b, m, self.problem.beta, s, rho)
        a1 = (s * rho * b - m * m * g
              + s * (self.problem.beta / rho) * self._Exp(xi)) / m
        phi1 = ((m * m - 1.0) * g
                - self.problem.beta * s * (2.0 / rho) * self._Exp(xi)) / m
        return {"a": a, "b": b, "c": a + phi,
                "a_xi": a1, "b_xi": g, "c_xi": a1 + phi1}

    def partials(self, x, t):
        p = self.partials_xi(self.xi(x, t))
        out = dict(a=p["a"], b=p["b"], c=p["c"])
        for q in ("a", "b", "c"):
            out[f"{q}_x"] = self.problem.eta2 * p[f"{q}_xi"]
            out[f"{q}_t"] = self.problem.c1 * p[f"{q}_xi"]
        return out


def _b_slope(xi, b, m, beta, s, rho):
    E = np.exp(2.0 * s * np.asarray(xi, float) / rho)
    phi = ((m * m - 1.0) * b - beta * E) / m
    delta = phi * phi - 4.0 * (1.0 - b * b)
    rt = np.sqrt(delta)
    numer = s * 2.0 * rho * b * rt + (2.0 * beta / rho) * phi * E
    denom = (m * m + 1.0) * rt + s * (m * m - 1.0) * phi + s * 4.0 * m * b
    return numer / denom


def solve_b_ode(problem: BOdeProblem) -> OdeSFF:
    """Integrate the guarded (b, a) system over the requested range.

    Stops early (with the reason recorded) when the discriminant closes
    or the slope's denominator approaches zero; the initial point must
    satisfy the discriminant condition outright.
    """
    m, beta, s = problem.mu2, problem.beta, float(problem.sign)
    rho = math.sqrt(1.0 + m * m)

    def pieces(xi, b):
        E = math.exp(2.0 * s * xi / rho)
        phi = ((m * m - 1.0) * b - beta * E) / m
        delta = phi * phi - 4.0 * (1.0 - b * b)
        return E, phi, delta

    E0, phi0, delta0 = pieces(problem.xi0, problem.b0)
    if delta0 <= 0:
        raise ImmersionError(
            f"initial condition violates the discriminant: Delta(xi0, b0) = "
            f"{delta0} <= 0")
    a0 = (s * math.sqrt(delta0) - phi0) / 2.0

    def rhs(xi, y):
        b = y[0]
        E, phi, delta = pieces(xi, b)
        if delta <= 0:
            return np.array([math.nan, math.nan])
        rt = math.sqrt(delta)
        numer = s * 2.0 * rho * b * rt + (2.0 * beta / rho) * phi * E
        denom = (m * m + 1.0) * rt + s * (m * m - 1.0) * phi + s * 4.0 * m * b
        g = numer / denom
        a1 = (s * rho * b - m * m * g + s * (beta / rho) * E) / m
        return np.array([g, a1])

    def guard(xi, y):
        b = y[0]
        E, phi, delta = pieces(xi, b)
        # the slope has a square-root singularity at Delta = 0, so the
        # fence sits at a small positive floor rather than at zero
        if delta <= problem.delta_floor:
            return f"discriminant closed (Delta = {delta:.3e})"
        if phi * phi + 4 * b * b <= 0:
            return "degenerate coefficients (Phi = b = 0)"
        rt = math.sqrt(delta)
        numer = abs(s * 2.0 * rho * b * rt) + abs((2.0 * beta / rho) * phi * E)
        denom = (m * m + 1.0) * rt + s * (m * m - 1.0) * phi + s * 4.0 * m * b
        if abs(denom) < problem.guard_rel * max(numer, 1.0):
            return f"slope denominator vanishing ({denom:.3e})"
        return None

    lo, hi = problem.xi_range
    if not lo <= problem.xi0 <= hi:
        raise ImmersionError("xi0 must lie inside xi_range")
    y0 = np.array([problem.b0, a0])
    # the dense output is cubic Hermite on the accepted nodes; capping the
    # step at rtol^(1/4) keeps its error at the controller's accuracy level
    cap = min(max(hi - lo, 1e-3) / 8.0, problem.rtol ** 0.25)
    sol_fwd = sol_bwd = None
    if hi > problem.xi0:
        sol_fwd = solve_ivp_dp45(rhs, problem.xi0, hi, y0,
                                 rtol=problem.rtol, atol=problem.atol,
                                 max_step=cap, guard=guard)
    if lo < problem.xi0:
        sol_bwd = solve_ivp_dp45(rhs, problem.xi0, lo, y0,
                                 rtol=problem.rtol, atol=problem.atol,
                                 max_step=cap, guard=guard)
    if sol_fwd is None and sol_bwd is None:
        f0 = rhs(problem.xi0, y0)
        sol_fwd = OdeSolution(np.array([problem.xi0]), y0[None], f0[None])
    return OdeSFF(problem, sol_fwd, sol_bwd)


# -- residual evaluation ---------------------------------------------------


def gauss_residual(sff, xi_points=None, n: int = 1000, seed: int = 0) -> float:
    """max |a*c - b^2 + 1| over sample points in the strip coordinate."""
    if xi_points is None:
        if isinstance(sff, ClosedFormSFF):
            xi_points = sff.domain.sample_xi(n, seed)
        else:
            xi_points = np.linspace(sff.xi_lo, sff.xi_hi, n)
    return float(np.max(sff.gauss_residual_xi(np.asarray(xi_points, float))))


def codazzi_residuals(inst: FamilyInstance, sff, sample: Dict[str, np.ndarray]):
    """Pointwise residuals of the two compatibility equations.

    ``sample`` holds arrays x, t and the jets u0, u1, u2 of a solution (the
    forms need nothing deeper).  The coefficients are universal in (x, t),
    so their derivatives come from the closed forms, not from the jets.
    """
    x, t = np.asarray(sample["x"], float), np.asarray(sample["t"], float)
    env = {k: np.asarray(sample[k], float) for k in ("u0", "u1", "u2")
           if k in sample}
    f = [[w.cdx.eval(env), w.cdt.eval(env)] for w in inst.forms]
    f11, f12 = f[0]
    f21, f22 = f[1]
    f31, f32 = f[2]
    d13 = f11 * f32 - f31 * f12
    d23 = f21 * f32 - f31 * f22
    p = sff.partials(x, t)
    a, b, c = p["a"], p["b"], p["c"]
    r1 = (f11 * p["a_t"] + f21 * p["b_t"] - f12 * p["a_x"] - f22 * p["b_x"]
          - 2 * b * d13 + (a - c) * d23)
    r2 = (f11 * p["b_t"] + f21 * p["c_t"] - f12 * p["b_x"] - f22 * p["c_x"]
          + (a - c) * d13 + 2 * b * d23)
    return r1, r2


def sff_to_csv(sff, path, n: int = 200) -> None:
    """Write (xi, a, b, c, gauss_residual) samples as CSV."""
    if isinstance(sff, ClosedFormSFF):
        xi = sff.domain.sample_xi(n, seed=0)
        xi.sort()
    else:
        xi = np.linspace(sff.xi_lo, sff.xi_hi, n)
    a, b, c = sff.abc_xi(xi)
    g = sff.gauss_residual_xi(xi)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("xi,a,b,c,gauss_residual\n")
        for row in zip(xi, a, b, c, g):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


# -- obstruction certificates ---------------------------------------------


@dataclass
class CertificateReport:
    kind: str
    value: str
    nonzero: bool
    detail: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value,
                "nonzero": self.nonzero, "detail": self.detail}


def nonexistence_certificate(kind: str, params: FamilyParams) -> CertificateReport:
    """Nonvanishing quantity reproducing the family's immersion obstruction.

    T23: eta3^2 + (mu3*eta2 - mu2*eta3)^2, which the family constraint
    pins to eta2^2; forcing it to vanish would force eta2 = 0.
    T25i: the expression 2*lam/theta - theta*C2*e^{theta*u0} + 2*lam*u0,
    never identically zero while lam^2 + C2^2 != 0.
    T25ii: eta3^2 + (mu3*eta2 - mu2*eta3)^2; vanishing would wipe out both
    independence witnesses at once, which the coupling relations forbid.
    """
    p = params
    if kind != p.kind:
        raise ImmersionError(f"params are for {p.kind}, certificate for {kind}")
    if kind == "T23":
        if p.lam * p.eta2 == 0 or p.mu3 is None or p.eta3 is None:
            raise ImmersionError("T23 certificate needs lam*eta2 != 0 and mu3/eta3")
        cons = p.eta2 ** 2 - p.eta3 ** 2 - (p.mu2 * p.eta3 - p.mu3 * p.eta2) ** 2
        if cons != 0:
            raise ImmersionError(f"T23 constraint violated (value {cons})")
        val = p.eta3 ** 2 + (p.mu3 * p.eta2 - p.mu2 * p.eta3) ** 2
        return CertificateReport(
            "T23", str(val), val != 0,
            f"equals eta2^2 = {p.eta2 ** 2}; vanishing would force eta2 = 0, "
            "so the coefficient system degenerates to a = c, b = 0")
    if kind == "T25i":
        if p.nu * p.theta == 0:
            raise ImmersionError("T25i certificate needs nu*theta != 0")
        if p.lam ** 2 + p.c2 ** 2 == 0:
            raise ImmersionError("T25i requires lam^2 + c2^2 != 0")
        u0 = jv("u0")
        expr = (num(2 * p.lam / p.theta)
                - num(p.theta * p.c2) * exp_k(num(p.theta) * u0)
                + num(2 * p.lam) * u0)
        return CertificateReport(
            "T25i", render(expr), not is_zero(expr),
            "multiplies (a-c, 2b) in the reduced compatibility system; "
            "nonvanishing forces a = c and b = 0 against the curvature relation")
    if kind == "T25ii":
        if not (p.tau > 0 and p.nu > 0 and p.sigma > 0) or p.nu * p.eta2 == 0:
            raise ImmersionError("T25ii certificate needs tau, nu, sigma > 0 "
                                 "and eta2 != 0")
        if p.mu3 is not None and p.eta3 is not None:
            mu3, eta3 = p.mu3, p.eta3
        else:
            k = t25ii_admissible_k(p.mu2, p.eta2, p.tau, p.nu, p.sign)[-1]
            mu3, eta3 = t25ii_mu3_eta3(p.mu2, p.eta2, p.tau, p.nu, p.sign, k)
        val = eta3 ** 2 + (mu3 * p.eta2 - p.mu2 * eta3) ** 2
        return CertificateReport(
            "T25ii", str(val), val != 0,
            "vanishing would zero both independence witnesses of the normal "
            "forms, impossible while tau*eta2/nu != 0")
    raise ImmersionError(f"no nonexistence certificate for kind {kind!r}")


# -- random admissible parameter generators (for certificate sweeps) -------


def _rand_nonzero(rng: random.Random, lo=-6, hi=6) -> Fraction:
    while True:
        q = Fraction(rng.randint(lo, hi), rng.randint(1, 6))
        if q != 0:
            return q


def random_certificate_params(kind: str, rng: random.Random) -> FamilyParams:
    """Admissible random parameters for one nonexistence family."""
    if kind == "T23":
        r = rng.randint(1, 6)
        s = rng.randint(0, r - 1)
        scale = _rand_nonzero(rng)
        eta2 = (r * r + s * s) * scale
        eta3 = (r * r - s * s) * scale
        m = 2 * r * s * scale  # mu2*eta3 - mu3*eta2
        mu2 = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        mu3 = (mu2 * eta3 - m) / eta2
        return FamilyParams("T23", mu2=mu2, mu3=mu3, eta2=eta2, eta3=eta3,
                            lam=_rand_nonzero(rng), f_slot=None)
    if kind == "T25i":
        lam, c2 = rng.choice([
            (_rand_nonzero(rng), Fraction(rng.randint(-5, 5), rng.randint(1, 3))),
            (Fraction(0), _rand_nonzero(rng)),
        ])
        return FamilyParams("T25i", mu2=Fraction(rng.randint(-4, 4)),
                            eta2=Fraction(rng.randint(-5, 5), rng.randint(1, 3)),
                            lam=lam, c2=c2, theta=_rand_nonzero(rng),
                            nu=_rand_nonzero(rng),
                            sigma=Fraction(rng.randint(-5, 5)),
                            sign=rng.choice([1, -1]))
    if kind == "T25ii":
        # rotate the circle point (1, mu2) by a Pythagorean angle so that
        # 1 + mu2^2 = s^2 + (tau/nu)^2 splits rationally
        mu2 = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        a, b, c = rng.choice([(3, 4, 5), (5, 12, 13), (8, 15, 17), (20, 21, 29)])
        if rng.random() < 0.5:
            a, b = b, a
        ratio = abs(Fraction(b, c) + mu2 * Fraction(a, c))  # tau/nu
        if ratio == 0:
            ratio = abs(Fraction(a, c) + mu2 * Fraction(b, c))
        nu = abs(_rand_nonzero(rng))
        tau = ratio * nu
        eta2 = _rand_nonzero(rng)
        sign = rng.choice([1, -1])
        k = rng.choice(t25ii_admissible_k(mu2, eta2, tau, nu, sign))
        mu3, eta3 = t25ii_mu3_eta3(mu2, eta2, tau, nu, sign, k)
        return FamilyParams("T25ii", mu2=mu2, eta2=eta2, mu3=mu3, eta3=eta3,
                            lam=Fraction(rng.randint(-4, 4)), tau=tau, nu=nu,
                            sigma=abs(_rand_nonzero(rng)), sign=sign,
                            vphi_slot=None)
    raise ImmersionError(f"no generator for kind {kind!r}")


def certificate_sweep(kind: str, count: int = 100, seed: int = 0):
    """Certificates for ``count`` random admissible parameter sets."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        params = random_certificate_params(kind, rng)
        out.append(nonexistence_certificate(kind, params))
    return out
