"""Differential 1- and 2-forms on the (x, t) plane with jet coefficients.

Forms are written in the fixed coordinates dx, dt; the only 2-form basis
element is dx^dt.  The exterior derivative of P dx + Q dt modulo a PDE is
(D_x Q - D_t P) dx^dt, so checking the flatness system

    d w1 = w3 ^ w2,   d w2 = w1 ^ w3,   d w3 = w1 ^ w2

for a triple of 1-forms reduces to three exact zero tests.  Residuals are
reported with denominators cleared and the clearing multiplier recorded,
so "zero after clearing" stays auditable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

from .jetalg import (JetExpr, PDESpec, clear_denominators, is_zero, render,
                     total_dt, total_dx)


@dataclass(frozen=True)
class OneForm:
    """P dx + Q dt with canonical jet-expression coefficients."""
    cdx: JetExpr
    cdt: JetExpr

    def __add__(self, other: "OneForm") -> "OneForm":
        return OneForm(self.cdx + other.cdx, self.cdt + other.cdt)

    def __sub__(self, other: "OneForm") -> "OneForm":
        return OneForm(self.cdx - other.cdx, self.cdt - other.cdt)

    def __neg__(self) -> "OneForm":
        return OneForm(-self.cdx, -self.cdt)

    def scale(self, s) -> "OneForm":
        return OneForm(self.cdx * s, self.cdt * s)

    @property
    def is_zero(self) -> bool:
        return self.cdx.is_zero and self.cdt.is_zero


@dataclass(frozen=True)
class TwoForm:
    """c dx^dt; dx^dx = dt^dt = 0 is structural."""
    c: JetExpr

    def __add__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm(self.c + other.c)

    def __sub__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm(self.c - other.c)

    @property
    def is_zero(self) -> bool:
        return self.c.is_zero


def wedge(a: OneForm, b: OneForm) -> TwoForm:
    return TwoForm(a.cdx * b.cdt - a.cdt * b.cdx)


def exterior_d(w: OneForm, pde: PDESpec) -> TwoForm:
    """Exterior derivative modulo the PDE's prolongation table."""
    return TwoForm(total_dx(w.cdt, pde) - total_dt(w.cdx, pde))


def independence_witness(w1: OneForm, w2: OneForm) -> JetExpr:
    """dx^dt coefficient of w1 ^ w2; nonzero certifies independence."""
    return wedge(w1, w2).c


def delta(i: int, j: int, forms: Sequence[OneForm]) -> JetExpr:
    """f_{i1} f_{j2} - f_{j1} f_{i2} for the indexed pair of forms."""
    if i not in (1, 2, 3) or j not in (1, 2, 3):
        raise IndexError(f"form indices must lie in 1..3, got ({i}, {j})")
    a, b = forms[i - 1], forms[j - 1]
    return a.cdx * b.cdt - b.cdx * a.cdt


@dataclass(frozen=True)
class ResidualReport:
    """Structure-equation residuals, denominator-cleared."""
    residuals: Tuple[JetExpr, JetExpr, JetExpr]
    multipliers: Tuple[JetExpr, JetExpr, JetExpr]
    raw: Tuple[JetExpr, JetExpr, JetExpr]

    @property
    def zero(self) -> bool:
        return all(r.is_zero for r in self.residuals)

    def to_dict(self) -> dict:
        return {
            "residuals": [render(r) for r in self.residuals],
            "cleared_denominator": [render(m) for m in self.multipliers],
            "zero": self.zero,
        }


def structure_residuals(w1: OneForm, w2: OneForm, w3: OneForm,
                        pde: PDESpec) -> ResidualReport:
    """Residuals of the three flatness equations, cleared of denominators."""
    raw = (
        exterior_d(w1, pde).c - wedge(w3, w2).c,
        exterior_d(w2, pde).c - wedge(w1, w3).c,
        exterior_d(w3, pde).c - wedge(w1, w2).c,
    )
    cleared, mults = [], []
    for r in raw:
        c, m = clear_denominators(r)
        cleared.append(c)
        mults.append(m)
    return ResidualReport(tuple(cleared), tuple(mults), raw)


def fundamental_forms(forms: Sequence[OneForm], a, b, c):
    """Coefficient triples (dx^2, dx dt, dt^2) of the metric and shape forms.

    The metric is w1^2 + w2^2.  The shape form uses the normal-connection
    coefficients a, b, c (jet expressions or exact rationals); its middle
    slot is the single mixed coefficient, i.e. II = A1 dx^2 + 2 A2 dx dt
    + A3 dt^2 returns (A1, A2, A3).
    """
    f11, f12 = forms[0].cdx, forms[0].cdt
    f21, f22 = forms[1].cdx, forms[1].cdt
    a = a if isinstance(a, JetExpr) else JetExpr.number(a)
    b = b if isinstance(b, JetExpr) else JetExpr.number(b)
    c = c if isinstance(c, JetExpr) else JetExpr.number(c)
    first = (f11 * f11 + f21 * f21,
             f11 * f12 + f21 * f22,
             f12 * f12 + f22 * f22)
    second = (a * f11 * f11 + 2 * b * f11 * f21 + c * f21 * f21,
              a * f11 * f12 + b * (f11 * f22 + f21 * f12) + c * f21 * f22,
              a * f12 * f12 + 2 * b * f12 * f22 + c * f22 * f22)
    return first, second
