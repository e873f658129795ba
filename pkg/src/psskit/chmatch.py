"""Recover family parameters from a concrete third-order evolution law.

Given a target right-hand side R(u0, u1, u2, u3) the matcher searches the
ansatz

    f affine in u0 - u2  (normalized to f = u0 - u2 + p: the law is
    invariant under joint rescaling of f and phi1, so f' = 1),
    phi1 polynomial in (u0, u1) of total degree <= 3,
    mu2 = 0, both sign branches, eta2/C1 rational,

expands the family law symbolically and matches monomial coefficients
exactly.  The leading coefficient lam is read off the u0^2*u3 term.  The
solved parameters are only accepted after two independent gates: the
reassembled law must equal the target exactly, and the resulting family
must pass the full structure-equation verification.

The generalized Camassa-Holm equation

    u_t - u_xxt = u^2 u_xxx - u^2 u_xx - 3 u u_x^2 - 2 u^2 u_x
                  + 4 u u_x u_xx + u_x^3

is the flagship target; ``match_generalized_ch`` matches it into the T24
family.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .families import FamilyInstance, FamilyParams, build_family, verify_pss
from .jetalg import JetExpr, parse_expr, render

_F0 = Fraction(0)

CH_RHS = ("u0^2*u3 - u0^2*u2 - 3*u0*u1^2 - 2*u0^2*u1 + 4*u0*u1*u2 + u1^3")


class MatchError(ValueError):
    """No parameters in the ansatz reproduce the target; carries the target."""


def _poly_coeffs(e: JetExpr) -> Dict[Tuple[int, int, int, int], Fraction]:
    """Exponent map over (u0, u1, u2, u3); rejects kernels and other vars."""
    out: Dict[Tuple[int, int, int, int], Fraction] = {}
    for (vp, kp, ex), c in e.terms():
        if kp or ex:
            raise MatchError("target must be polynomial in u0..u3 "
                             f"(found kernel factors in {render(e)})")
        key = [0, 0, 0, 0]
        for (kind, idx), p in vp:
            if kind != "u" or idx > 3 or p < 0:
                raise MatchError(f"target must be polynomial in u0..u3, "
                                 f"found {kind}{idx}^{p}")
        for (kind, idx), p in vp:
            key[idx] = p
        out[tuple(key)] = c
    return out


def _rational_roots(coeffs: List[Fraction]) -> List[Fraction]:
    """All rational roots of sum(coeffs[i] * x^i) = 0 (exact)."""
    while coeffs and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    if len(coeffs) <= 1:
        return []
    den = 1
    for c in coeffs:
        den = den * c.denominator // _gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    while ints and ints[0] == 0:
        # x = 0 is a root; deflate
        ints = ints[1:]
        roots = _rational_roots([Fraction(i) for i in ints])
        return sorted(set(roots + [_F0]))
    a0, an = abs(ints[0]), abs(ints[-1])
    roots = set()
    for pdiv in _divisors(a0):
        for qdiv in _divisors(an):
            for cand in (Fraction(pdiv, qdiv), Fraction(-pdiv, qdiv)):
                if sum(c * cand ** i for i, c in enumerate(ints)) == 0:
                    roots.add(cand)
    return sorted(roots)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _divisors(n: int) -> List[int]:
    n = abs(n)
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.extend((d, n // d))
        d += 1
    return sorted(set(out))


@dataclass
class MatchResult:
    params: FamilyParams
    instance: FamilyInstance
    lam: Fraction
    reassembled: JetExpr

    def to_dict(self) -> dict:
        return {"params": self.params.to_dict(), "lam": str(self.lam),
                "rhs": render(self.reassembled)}


def _c(d, key):
    return d.get(key, _F0)


def _candidate_As(lam, T2, T0, kind) -> List[Fraction]:
    """Deterministic candidate list for A = sign*eta2/sqrt(1+mu2^2)."""
    cands: List[Fraction] = []
    piv = _c(T2, (1, 1, 0, 0)) / 2 - 3 * lam
    if piv != 0:
        cands.append((_c(T0, (1, 2, 0, 0)) - 2 * _c(T2, (2, 0, 0, 0))) / piv)
    piv = _c(T2, (0, 2, 0, 0)) / 3
    if piv != 0:
        cands.append((_c(T0, (0, 3, 0, 0)) - (_c(T2, (1, 1, 0, 0)) - 2 * lam) / 2)
                     / piv)
    cands.extend(_rational_roots([
        -_c(T0, (3, 0, 0, 0)), _c(T0, (2, 1, 0, 0)) / 3,
        -_c(T2, (2, 0, 0, 0)) / 3, lam / 3]))
    if kind == "T22":
        cands.extend(_rational_roots([
            _c(T0, (1, 0, 0, 0)), -_c(T0, (0, 1, 0, 0)), _c(T2, (0, 0, 0, 0))]))
    seen, out = set(), []
    for a in cands:
        if a not in seen:
            seen.add(a)
            out.append(a)
    return out


def _try_candidate(kind, eps, lam, A, T2, T0) -> Optional[FamilyParams]:
    """Complete the remaining unknowns for a fixed A; None if inconsistent."""
    c21 = _c(T2, (2, 0, 0, 0)) - lam * A
    c12 = (_c(T2, (1, 1, 0, 0)) - 2 * lam) / 2
    c03 = _c(T2, (0, 2, 0, 0)) / 3
    c11 = _c(T2, (1, 0, 0, 0))
    c02 = _c(T2, (0, 1, 0, 0)) / 2
    c30 = (_c(T0, (2, 1, 0, 0)) + 3 * lam - A * c21) / 3

    # B and the linear phi1 part from the u0- and u1-rows
    if kind == "T22":
        B = _F0
        if A == 0:
            return None
        c10 = _c(T0, (1, 0, 0, 0)) / A
        if c10 + A * (_c(T2, (0, 0, 0, 0)) - B) != _c(T0, (0, 1, 0, 0)):
            return None
    else:
        rhs = (_c(T0, (0, 1, 0, 0)) - A * _c(T2, (0, 0, 0, 0))
               - A * _c(T0, (1, 0, 0, 0)))
        if A * A != 1:
            c10 = rhs / (1 - A * A)
        elif rhs == 0:
            c10 = _F0
        else:
            return None
        B = A * c10 - _c(T0, (1, 0, 0, 0))
    c01 = _c(T2, (0, 0, 0, 0)) - B

    # quadratic phi1 part and the constant slot of f
    kappa = (_c(T0, (1, 1, 0, 0)) - A * c11) / 2
    p = _F0
    if A * kappa != _c(T0, (2, 0, 0, 0)):
        return None
    if A != 0:
        c20 = kappa
        c00 = _c(T0, (0, 0, 0, 0)) / A
    elif B != 0:
        p = -_c(T0, (0, 0, 0, 0)) / B
        c20 = kappa + lam * p
        c00 = _F0
    elif _c(T0, (0, 0, 0, 0)) == 0:
        c20 = kappa
        c00 = _F0
    else:
        return None

    phi1 = {(3, 0): c30, (2, 1): c21, (1, 2): c12, (0, 3): c03,
            (2, 0): c20, (1, 1): c11, (0, 2): c02,
            (1, 0): c10, (0, 1): c01, (0, 0): c00}
    parts = []
    for (i, j), q in sorted(phi1.items()):
        if q == 0:
            continue
        body = "*".join([f"{q}"] + (["u0"] if i == 1 else [f"u0^{i}"] if i else [])
                        + (["u1"] if j == 1 else [f"u1^{j}"] if j else []))
        parts.append(body)
    phi1_src = " + ".join(parts) if parts else "0"
    f_src = "u0 - u2" if p == 0 else f"u0 - u2 + {p}"

    eta2 = Fraction(eps) * A
    c1 = Fraction(eps) * B
    if kind == "T22":
        return FamilyParams("T22", mu2=0, eta2=eta2, sign=eps,
                            f_slot=f_src, phi1_slot=phi1_src)
    if (lam * eta2) ** 2 + c1 ** 2 == 0:
        return None
    return FamilyParams("T24", mu2=0, eta2=eta2, lam=lam, c1=c1, sign=eps,
                        f_slot=f_src, phi1_slot=phi1_src)


def match_family(target: JetExpr, kind: str = "T24") -> MatchResult:
    """Match a concrete law into the T22 or T24 ansatz; exact or raises."""
    if kind not in ("T22", "T24"):
        raise MatchError(f"matcher supports kinds T22 and T24, not {kind!r}")
    coeffs = _poly_coeffs(target)

    lam = coeffs.get((2, 0, 0, 1), _F0)
    rest = dict(coeffs)
    rest.pop((2, 0, 0, 1), None)
    if any(k[3] for k in rest):
        bad = {k: v for k, v in rest.items() if k[3]}
        raise MatchError(
            "outside the ansatz: the u3 part must be exactly lam*u0^2*u3; "
            f"leftover {bad}")
    if kind == "T22" and lam != 0:
        raise MatchError("the T22 ansatz carries no u0^2*u3 term")

    if any(k[2] > 1 for k in rest):
        raise MatchError("outside the ansatz: target is nonlinear in u2")
    T2 = {(k[0], k[1], 0, 0): v for k, v in rest.items() if k[2] == 1}
    T0 = {k: v for k, v in rest.items() if k[2] == 0}
    allowed2 = {(2, 0, 0, 0), (1, 1, 0, 0), (0, 2, 0, 0),
                (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 0, 0)}
    if set(T2) - allowed2:
        raise MatchError(f"u2-coefficient outside the degree-2 ansatz: "
                         f"{sorted(set(T2) - allowed2)}")

    for eps in (1, -1):
        for A in _candidate_As(lam, T2, T0, kind):
            params = _try_candidate(kind, eps, lam, A, T2, T0)
            if params is None:
                continue
            try:
                inst = build_family(params)
            except Exception:
                continue
            lhs = inst.pde.F
            if not (lhs - target).is_zero:
                continue
            if not verify_pss(inst).ok:
                continue
            return MatchResult(params, inst, lam, lhs)
    raise MatchError(f"no exact match within the ansatz for target "
                     f"{render(target)}")


def match_generalized_ch() -> MatchResult:
    """Parameters exhibiting the generalized Camassa-Holm law as a T24 member."""
    return match_family(parse_expr(CH_RHS), "T24")
