"""Total derivatives and prolongation modulo a PDE.

On jet space the total derivatives act as

    D_x h = h_x + sum_i h_{u_i} u_{i+1} + sum_j h_{w_j} w_{j,x}
                + sum_k h_{v_k} v_{k,x},
    D_t h = h_t + h_{u_0} w_1 + h_{u_1} v_1 + sum_{i>=2} h_{u_i} u_{i,t}
                + sum_j h_{w_j} w_{j+1} + sum_k h_{v_k} v_{k+1},

where w_{j,x} = v_j identically and v_{k,x} is the k-fold t-derivative of
u_2, which only makes sense once a PDE supplies u_{2,t}.

Two evolution laws are supported:

* ``PDESpec.third_order(lam, G)`` for u_{0,t} - u_{2,t} = F with
  F = lam*u0^2*u3 + G(u0,u1,u2).  The prolongation table reads
  u_{2q,t}   = w1 - (F + D_x^2 F + ... + D_x^{2q-2} F),
  u_{2q+1,t} = v1 - (D_x F + D_x^3 F + ... + D_x^{2q-1} F);
  w_j and v_k remain free coordinates.
* ``PDESpec.sine_gordon()`` for u_{xt} = sin u0, where u_{i,t} is the
  (i-1)-fold x-derivative of sin u0 for i >= 1 and the v_k become
  determined (v_1 = sin u0, ...); ``reduce`` substitutes them away.
"""

from __future__ import annotations

import threading
from typing import Optional

from .expr import (DEFAULT_JET_ORDER, ExprError, JetExpr, OrderBoundError,
                   _rat, jv, mk_var, sin_k)


class ProlongationError(ExprError):
    """Raised when a t-derivative needs a PDE that was not supplied."""


class PDESpec:
    """Evolution law binding the mixed derivatives of the jet alphabet.

    Instances are immutable; the prolongation tables are built lazily and
    the caches are guarded by a lock so concurrent readers are safe.
    """

    def __init__(self, kind: str, lam=None, G: Optional[JetExpr] = None,
                 max_order: int = DEFAULT_JET_ORDER):
        self.kind = kind
        self.max_order = max_order
        self.lam = None if lam is None else _rat(lam)
        self.G = G
        if kind == "third_order":
            bad = [v for v in G.support_vars()
                   if v[0] != "u" or v[1] > 2]
            if bad:
                names = ", ".join(sorted(f"{k}{i}" for k, i in bad))
                raise ExprError(
                    f"G must depend only on u0, u1, u2; found {names}")
            u0, u3 = jv("u0"), jv("u3")
            self.F = JetExpr.number(self.lam) * u0 * u0 * u3 + G
        elif kind == "sine_gordon":
            self.F = None
        else:
            raise ExprError(f"unknown PDE kind {kind!r}")
        self._lock = threading.Lock()
        self._dxF: list = [self.F] if self.F is not None else []
        self._ut: dict = {}
        self._vx: dict = {}

    @classmethod
    def third_order(cls, lam, G: JetExpr,
                    max_order: int = DEFAULT_JET_ORDER) -> "PDESpec":
        return cls("third_order", lam, G, max_order)

    @classmethod
    def sine_gordon(cls, max_order: int = DEFAULT_JET_ORDER) -> "PDESpec":
        return cls("sine_gordon", max_order=max_order)

    # -- prolongation tables ------------------------------------------

    def _dx_pow_F(self, m: int) -> JetExpr:
        with self._lock:
            while len(self._dxF) <= m:
                self._dxF.append(total_dx(self._dxF[-1], None, self.max_order))
            return self._dxF[m]

    def u_t(self, i: int) -> JetExpr:
        """t-derivative of u_i, rewritten through the evolution law."""
        if i == 0:
            return jv("w1")
        with self._lock:
            if i in self._ut:
                return self._ut[i]
        if self.kind == "third_order":
            if i == 1:
                out = jv("v1")
            elif i % 2 == 0:
                q = i // 2
                out = jv("w1")
                for s in range(q):
                    out = out - self._dx_pow_F(2 * s)
            else:
                q = (i - 1) // 2
                out = jv("v1")
                for s in range(q):
                    out = out - self._dx_pow_F(2 * s + 1)
        else:
            out = sin_k(jv("u0"))
            for _ in range(i - 1):
                out = total_dx(out, None, self.max_order)
        with self._lock:
            self._ut[i] = out
        return out

    def v_x(self, k: int) -> JetExpr:
        """x-derivative of v_k, i.e. the k-fold t-derivative of u2."""
        with self._lock:
            if k in self._vx:
                return self._vx[k]
        out = self.u_t(2)
        for _ in range(k - 1):
            out = total_dt(out, self)
        with self._lock:
            self._vx[k] = out
        return out

    def reduce(self, e: JetExpr) -> JetExpr:
        """Substitute PDE-determined coordinates (no-op for third order)."""
        if self.kind != "sine_gordon":
            return e
        out = e
        for v in sorted(out.support_vars()):
            if v[0] == "v":
                repl = sin_k(jv("u0"))
                for _ in range(v[1] - 1):
                    repl = total_dt(repl, self)
                out = out.subs_var(v, repl)
        return out

    def __repr__(self):
        if self.kind == "sine_gordon":
            return "PDESpec(sine_gordon)"
        return f"PDESpec(third_order, lam={self.lam}, G={self.G!r})"


def diff_wrt(e: JetExpr, var) -> JetExpr:
    """Formal partial derivative with respect to one jet coordinate."""
    if isinstance(var, str):
        v = var
        var = (v, 0) if v in ("x", "t") else mk_var(v[0], int(v[1:]))
    return e.diff(var)


def total_dx(e: JetExpr, pde: Optional[PDESpec] = None,
             max_order: int = DEFAULT_JET_ORDER) -> JetExpr:
    """Total x-derivative; needs a PDE only when some v_k is present."""
    if pde is not None:
        max_order = pde.max_order
    out = JetExpr.zero()
    for v in sorted(e.support_vars()):
        d = e.diff(v)
        if d.is_zero:
            continue
        kind, idx = v
        if kind == "x":
            out = out + d
        elif kind == "t":
            continue
        elif kind == "u":
            if idx + 1 > max_order:
                raise OrderBoundError(
                    f"D_x needs u{idx + 1}, beyond the jet order bound {max_order}")
            out = out + d * jv(f"u{idx + 1}")
        elif kind == "w":
            out = out + d * jv(f"v{idx}")
        else:  # v_k
            if pde is None:
                raise ProlongationError(
                    f"D_x of v{idx} requires a bound PDE")
            out = out + d * pde.v_x(idx)
    return pde.reduce(out) if pde is not None else out


def total_dt(e: JetExpr, pde: PDESpec) -> JetExpr:
    """Total t-derivative modulo the PDE's prolongation table."""
    if pde is None:
        raise ProlongationError("total_dt requires a bound PDE")
    out = JetExpr.zero()
    for v in sorted(e.support_vars()):
        d = e.diff(v)
        if d.is_zero:
            continue
        kind, idx = v
        if kind == "t":
            out = out + d
        elif kind == "x":
            continue
        elif kind == "u":
            out = out + d * pde.u_t(idx)
        elif kind == "w":
            if idx + 1 > pde.max_order:
                raise OrderBoundError(
                    f"D_t needs w{idx + 1}, beyond the jet order bound {pde.max_order}")
            out = out + d * jv(f"w{idx + 1}")
        else:
            if idx + 1 > pde.max_order:
                raise OrderBoundError(
                    f"D_t needs v{idx + 1}, beyond the jet order bound {pde.max_order}")
            out = out + d * jv(f"v{idx + 1}")
    return pde.reduce(out)
