"""Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4)).

Fifth-order propagation with an embedded fourth-order error estimate and
PI-free step control; dense output by cubic Hermite interpolation on the
accepted nodes.  A ``guard`` callable can stop the run early (singularity
fences); the solution then reports where and why.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                187 / 2100, 1 / 40])


class OdeError(RuntimeError):
    """Integration could not proceed (step underflow, bad initial data)."""


@dataclass
class OdeSolution:
    """Accepted nodes plus a cubic Hermite dense evaluator."""
    ts: np.ndarray
    ys: np.ndarray
    fs: np.ndarray
    status: str = "completed"
    message: str = ""
    stopped_at: Optional[float] = None

    def __post_init__(self):
        order = np.argsort(self.ts)
        self._t = self.ts[order]
        self._y = self.ys[order]
        self._f = self.fs[order]

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])

    @property
    def y_end(self) -> np.ndarray:
        return self.ys[-1]

    def __call__(self, t):
        """Evaluate the dense output at scalar or array times."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(np.searchsorted(self._t, t_arr, side="right") - 1,
                      0, len(self._t) - 2)
        t0, t1 = self._t[idx], self._t[idx + 1]
        h = t1 - t0
        s = np.where(h != 0, (t_arr - t0) / np.where(h == 0, 1.0, h), 0.0)
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        y0, y1 = self._y[idx], self._y[idx + 1]
        f0, f1 = self._f[idx], self._f[idx + 1]
        out = (h00[..., None] * y0 + h10[..., None] * (h[..., None] * f0)
               + h01[..., None] * y1 + h11[..., None] * (h[..., None] * f1))
        return out[0] if np.isscalar(t) or np.asarray(t).ndim == 0 else out

    def derivative(self, t):
        """d/dt of the dense output (derivative of the Hermite cubic)."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(np.searchsorted(self._t, t_arr, side="right") - 1,
                      0, len(self._t) - 2)
        t0, t1 = self._t[idx], self._t[idx + 1]
        h = t1 - t0
        hs = np.where(h == 0, 1.0, h)
        s = np.where(h != 0, (t_arr - t0) / hs, 0.0)
        d00 = 6 * s * (s - 1) / hs
        d10 = (1 - 4 * s + 3 * s * s)
        d01 = -d00
        d11 = s * (3 * s - 2)
        y0, y1 = self._y[idx], self._y[idx + 1]
        f0, f1 = self._f[idx], self._f[idx + 1]
        out = (d00[..., None] * y0 + d10[..., None] * f0
               + d01[..., None] * y1 + d11[..., None] * f1)
        return out[0] if np.isscalar(t) or np.asarray(t).ndim == 0 else out


def solve_ivp_dp45(f: Callable, t0: float, t1: float, y0,
                   rtol: float = 1e-10, atol: float = 1e-10,
                   max_step: float = np.inf,
                   guard: Optional[Callable] = None,
                   max_steps: int = 200_000) -> OdeSolution:
    """Integrate y' = f(t, y) from t0 to t1.

    ``guard(t, y)`` returning a string stops the run there with status
    ``"stopped"`` and that reason.  Raises OdeError when the controller
    underflows the step size (typically a genuine singularity).
    """
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    direction = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)
    if span == 0:
        f0 = np.asarray(f(t0, y0), dtype=float)
        return OdeSolution(np.array([t0]), y0[None], f0[None])
    if guard is not None:
        reason = guard(t0, y0)
        if reason:
            raise OdeError(f"initial point rejected by guard: {reason}")

    t, y = float(t0), y0.copy()
    k1 = np.asarray(f(t, y), dtype=float)
    h = direction * min(max_step, span / 100.0, _initial_step(k1, y, rtol, atol))
    ts, ys, fs = [t], [y.copy()], [k1.copy()]
    hmin = 1e-14 * max(1.0, span)

    for _ in range(max_steps):
        if direction * (t + h - t1) > 0:
            h = t1 - t
        K = np.empty((7, y.size))
        K[0] = k1
        bad = False
        for i in range(1, 7):
            yi = y + h * (_A[i] @ K[:i])
            Ki = np.asarray(f(t + _C[i] * h, yi), dtype=float)
            if not np.all(np.isfinite(Ki)):
                bad = True
                break
            K[i] = Ki
        if not bad:
            y5 = y + h * (_B5 @ K)
            err = h * ((_B5 - _B4) @ K)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
            enorm = float(np.sqrt(np.mean((err / scale) ** 2)))
        if bad or not np.isfinite(enorm):
            h *= 0.5
            if abs(h) < hmin:
                raise OdeError(f"step underflow near t={t} (non-finite RHS)")
            continue
        if enorm <= 1.0:
            t_new = t + h
            if guard is not None:
                reason = guard(t_new, y5)
                if reason:
                    return OdeSolution(np.array(ts), np.array(ys), np.array(fs),
                                       status="stopped", message=reason,
                                       stopped_at=t_new)
            t, y = t_new, y5
            k1 = K[6]  # FSAL
            ts.append(t)
            ys.append(y.copy())
            fs.append(k1.copy())
            if t == t1 or direction * (t - t1) >= 0:
                return OdeSolution(np.array(ts), np.array(ys), np.array(fs))
        factor = 0.9 * enorm ** -0.2 if enorm > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
        if abs(h) > max_step:
            h = direction * max_step
        if abs(h) < hmin:
            raise OdeError(f"step underflow near t={t} (tolerance too tight "
                           "or singular right-hand side)")
    raise OdeError(f"step budget exhausted after {max_steps} steps at t={t}")


def _initial_step(f0, y0, rtol, atol) -> float:
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    if d0 < 1e-5 or d1 < 1e-5:
        return 1e-6
    return 0.01 * d0 / d1
