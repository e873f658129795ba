"""Finite-difference cross-check of the flatness equations.

The symbolic verification rests on the total-derivative engine and its
zero test.  This module checks the same statements through a completely
independent route: evaluate the form coefficients pointwise along a
genuine solution (kink or traveling wave), differentiate them by central
finite differences in (x, t), and compare against the wedge products.
Agreement at second order in the grid spacing ties the symbolic engine,
the family builders and the solution samplers together end to end.
"""

import random

import numpy as np
import pytest

from psskit.bonnet import make_grid, sg_kink, traveling_wave
from psskit.chmatch import match_generalized_ch
from psskit.families import build_family, default_params
from psskit.jetalg import diff_wrt


def test_symbolic_derivative_matches_finite_differences():
    """Unit-level anchor: diff against central differences on random
    kernel-bearing expressions at random points."""
    from test_jetexpr import random_expr
    rng = random.Random(424242)
    names = ["x", "t", "u0", "u1", "u2", "u3", "w1", "v1"]
    checked = 0
    while checked < 60:
        e = random_expr(rng)
        if e.has_opaque() or e.is_zero:
            continue
        env = {n: rng.uniform(0.3, 1.7) for n in names}
        for n in ("u0", "u1", "u2"):
            d = diff_wrt(e, n)
            h = 1e-6
            up = dict(env, **{n: env[n] + h})
            dn = dict(env, **{n: env[n] - h})
            fd = (e.eval(up) - e.eval(dn)) / (2 * h)
            sym = d.eval(env)
            scale = 1.0 + abs(sym) + abs(e.eval(env))
            assert abs(fd - sym) <= 1e-6 * scale, (e, n)
        checked += 1


def _fd_structure_residuals(inst, sampler, h):
    """Max structure-equation residual via central differences."""
    xs, ts = sampler.xs, sampler.ts
    X, T = np.meshgrid(xs, ts, indexing="ij")
    jets = sampler.eval_jets(X, T)
    env = {k: jets[k] for k in ("u0", "u1", "u2") if k in jets}
    F = [[np.broadcast_to(np.asarray(w.cdx.eval(env), float), X.shape),
          np.broadcast_to(np.asarray(w.cdt.eval(env), float), X.shape)]
         for w in inst.forms]

    def ddx(A):
        return (A[2:, 1:-1] - A[:-2, 1:-1]) / (2 * h)

    def ddt(A):
        return (A[1:-1, 2:] - A[1:-1, :-2]) / (2 * h)

    def inner(A):
        return A[1:-1, 1:-1]

    (f11, f12), (f21, f22), (f31, f32) = F
    d = [ddx(F[i][1]) - ddt(F[i][0]) for i in range(3)]
    w32 = inner(f31) * inner(f22) - inner(f21) * inner(f32)
    w13 = inner(f11) * inner(f32) - inner(f31) * inner(f12)
    w12 = inner(f11) * inner(f22) - inner(f21) * inner(f12)
    res = [d[0] - w32, d[1] - w13, d[2] - w12]
    return max(float(np.abs(r).max()) for r in res)


def test_sine_gordon_kink_fd():
    inst = build_family(default_params("SG"))

    def run(h):
        xs, ts = make_grid(0.2, 0.2, 41, 41, h)
        return _fd_structure_residuals(inst, sg_kink(1.0, xs, ts), h)

    r1, r2 = run(2e-3), run(1e-3)
    assert r1 <= 1e-5
    assert r1 / r2 >= 3.0    # second-order convergence


def test_camassa_holm_wave_fd():
    inst = match_generalized_ch().instance

    def run(h):
        xs, ts = make_grid(0.0, 0.0, 41, 41, h)
        tw = traveling_wave(inst, 2.0, (0.1, 0.05, 0.0), xs, ts)
        return _fd_structure_residuals(inst, tw, h)

    r1, r2 = run(2e-3), run(1e-3)
    assert r1 <= 1e-5
    assert r1 / r2 >= 3.0


@pytest.mark.parametrize("kind,c,initial", [
    ("T22", 2.0, (0.3, 0.1, -0.05)),
    ("T23", 2.0, (0.3, 0.1, 0.0)),
    ("T24", 2.0, (0.1, 0.05, 0.0)),
    ("T25i", 3.0, (0.2, 0.1, 0.0)),
    ("T25ii", 3.0, (0.2, -0.1, 0.05)),
])
def test_family_waves_fd(kind, c, initial):
    inst = build_family(default_params(kind))

    def run(h):
        xs, ts = make_grid(0.0, 0.0, 31, 31, h)
        tw = traveling_wave(inst, c, initial, xs, ts)
        return _fd_structure_residuals(inst, tw, h)

    r1, r2 = run(2e-3), run(1e-3)
    assert r1 <= 1e-4, kind
    assert r1 / r2 >= 3.0, kind
