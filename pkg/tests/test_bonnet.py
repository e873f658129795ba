"""Solution samplers, frame integration, curvature, export."""

import math

import numpy as np
import pytest

from psskit.bonnet import (CSV_HEADER, ReconstructionError, SolutionSampler,
                           SurfaceMesh, discrete_curvature, export_mesh,
                           integrate_frame, make_grid, sg_kink,
                           sine_gordon_abc, traveling_wave)
from psskit.chmatch import match_generalized_ch
from psskit.families import FamilyParams, build_family, default_params


@pytest.fixture(scope="module")
def sg_inst():
    return build_family(default_params("SG"))


@pytest.fixture(scope="module")
def ch_inst():
    return match_generalized_ch().instance


class TestSgKink:
    def test_center_value(self):
        xs, ts = make_grid(0.0, 0.0, 3, 3, 0.01)
        sk = sg_kink(1.0, xs, ts)
        assert abs(sk.jets["u0"][0, 0] - math.pi) <= 1e-12

    def test_residual_101_grid(self):
        xs, ts = make_grid(0.0, 0.0, 101, 101, 0.01)
        sk = sg_kink(1.0, xs, ts)
        assert sk.residual <= 1e-10

    def test_zero_parameter_rejected(self):
        xs, ts = make_grid(0.0, 0.0, 3, 3, 0.01)
        with pytest.raises(ReconstructionError, match="nonzero"):
            sg_kink(0.0, xs, ts)

    def test_jets_match_finite_differences(self):
        xs, ts = make_grid(0.2, 0.1, 5, 5, 1e-4)
        sk = sg_kink(1.3, xs, ts)
        h = 1e-4
        du = (sk.jets["u0"][2 + 1, 2] - sk.jets["u0"][2 - 1, 2]) / (2 * h)
        assert abs(du - sk.jets["u1"][2, 2]) <= 1e-6
        dw = (sk.jets["u0"][2, 3] - sk.jets["u0"][2, 1]) / (2 * h)
        assert abs(dw - sk.jets["w1"][2, 2]) <= 1e-6


class TestTravelingWave:
    def test_ch_residual(self, ch_inst):
        xs, ts = make_grid(0.0, 0.0, 41, 41, 0.02)
        tw = traveling_wave(ch_inst, 2.0, (0.1, 0.05, 0.0), xs, ts)
        assert tw.residual <= 1e-8

    def test_reduction_matches_hand_coded_ch(self, ch_inst):
        # independent oracle: the reduced profile equation written out by
        # hand for the generalized Camassa-Holm right-hand side
        xs, ts = make_grid(0.0, 0.0, 21, 21, 0.02)
        tw = traveling_wave(ch_inst, 2.0, (0.1, 0.05, 0.0), xs, ts)
        z = np.linspace(0.0, 0.4, 9)
        j = tw.eval_jets(z, np.zeros_like(z))
        U, U1, U2 = j["u0"], j["u1"], j["u2"]
        want = (2.0 * U1 - U * U * U2 - 3 * U * U1 * U1 - 2 * U * U * U1
                + 4 * U * U1 * U2 + U1 ** 3) / (2.0 - U * U)
        assert np.abs(j["u3"] - want).max() <= 1e-7

    def test_zero_solution_exact(self, ch_inst):
        xs, ts = make_grid(0.0, 0.0, 11, 11, 0.05)
        tw = traveling_wave(ch_inst, 2.0, (0.0, 0.0, 0.0), xs, ts)
        assert tw.residual == 0.0

    def test_singular_initial_point(self, ch_inst):
        xs, ts = make_grid(0.0, 0.0, 5, 5, 0.01)
        with pytest.raises(ReconstructionError, match="leading coefficient"):
            traveling_wave(ch_inst, 0.01, (0.1, 0.0, 0.0), xs, ts)

    def test_opaque_instance_rejected(self):
        inst = build_family(FamilyParams("T22", mu2=0, eta2=1, f_slot=None,
                                         phi1_slot=None))
        xs, ts = make_grid(0.0, 0.0, 5, 5, 0.01)
        with pytest.raises(ReconstructionError, match="concrete"):
            traveling_wave(inst, 2.0, (0.1, 0.0, 0.0), xs, ts)


class TestFrameIntegration:
    def test_sg_drift_and_defect(self, sg_inst):
        xs, ts = make_grid(0.3, 0.3, 51, 51, 0.02)
        mesh = integrate_frame(sg_kink(1.0, xs, ts), sg_inst,
                               sine_gordon_abc(1))
        assert mesh.drift.max() <= 1e-6
        assert mesh.commutation_defect <= 1e-6

    def test_defect_shrinks_under_refinement(self, sg_inst):
        def defect(n, h):
            xs, ts = make_grid(0.3, 0.3, n, n, h)
            mesh = integrate_frame(sg_kink(1.0, xs, ts), sg_inst,
                                   sine_gordon_abc(1))
            return mesh.commutation_defect

        d1, d2 = defect(21, 0.04), defect(41, 0.02)
        assert d2 <= d1 / 4

    def test_drift_reduces_at_fourth_order(self, sg_inst):
        def drift(n, h):
            xs, ts = make_grid(0.3, 0.3, n, n, h)
            mesh = integrate_frame(sg_kink(1.0, xs, ts), sg_inst,
                                   sine_gordon_abc(1))
            return mesh.drift.max()

        d1, d2 = drift(21, 0.04), drift(41, 0.02)
        assert d2 <= d1 / 12   # fourth-order contract, generous margin

    def test_single_vertex_grid(self, sg_inst):
        xs, ts = make_grid(0.3, 0.3, 1, 1, 0.01)
        mesh = integrate_frame(sg_kink(1.0, xs, ts), sg_inst, (0.0, 1.0, 0.0))
        assert mesh.r.shape == (1, 1, 3)
        assert np.allclose(mesh.frames[0, 0], np.eye(3))
        assert np.allclose(mesh.r[0, 0], 0.0)

    def test_gauss_violation_rejected(self, sg_inst):
        xs, ts = make_grid(0.3, 0.3, 5, 5, 0.02)
        sk = sg_kink(1.0, xs, ts)
        with pytest.raises(ReconstructionError, match="a\\*c - b\\^2"):
            integrate_frame(sk, sg_inst, (0.0, 0.0, 0.0))

    def test_constant_b_has_large_defect(self, sg_inst):
        # (0, 1, 0) passes the curvature relation but breaks compatibility:
        # the frame stays orthonormal while the two path orders disagree
        xs, ts = make_grid(0.3, 0.3, 41, 41, 0.02)
        mesh = integrate_frame(sg_kink(1.0, xs, ts), sg_inst, (0.0, 1.0, 0.0))
        assert mesh.drift.max() <= 1e-6
        assert mesh.commutation_defect >= 1e-2

    def test_edge_lengths_match_metric(self, sg_inst):
        # discrete x-edges of the sine-Gordon mesh have length
        # sqrt(f11^2 + f21^2) h = eta h up to O(h^2)
        h = 0.01
        xs, ts = make_grid(0.3, 0.3, 21, 21, h)
        mesh = integrate_frame(sg_kink(1.0, xs, ts), sg_inst,
                               sine_gordon_abc(1))
        ex = np.linalg.norm(np.diff(mesh.r, axis=0), axis=-1)
        assert np.abs(ex - h).max() <= 5 * h * h
        # t-edges: length sqrt(f12^2 + f22^2) h = h/eta
        et = np.linalg.norm(np.diff(mesh.r, axis=1), axis=-1)
        assert np.abs(et - h).max() <= 5 * h * h

    def test_edge_lengths_anisotropic_metric(self):
        # eta = 2: x-edges stretch to 2h, t-edges shrink to h/2
        inst = build_family(FamilyParams("SG", eta2=2))
        h = 0.01
        xs, ts = make_grid(0.3, 0.3, 21, 21, h)
        mesh = integrate_frame(sg_kink(1.0, xs, ts), inst,
                               sine_gordon_abc(1))
        ex = np.linalg.norm(np.diff(mesh.r, axis=0), axis=-1)
        et = np.linalg.norm(np.diff(mesh.r, axis=1), axis=-1)
        assert np.abs(ex - 2 * h).max() <= 5 * h * h
        assert np.abs(et - h / 2).max() <= 5 * h * h
        K = discrete_curvature(mesh)
        assert -1.1 <= np.nanmedian(K[1:-1, 1:-1]) <= -0.9

    def test_renormalization_flag(self, sg_inst):
        xs, ts = make_grid(0.3, 0.3, 21, 21, 0.02)
        sk = sg_kink(1.0, xs, ts)
        mesh = integrate_frame(sk, sg_inst, sine_gordon_abc(1),
                               renormalize=True)
        assert mesh.drift.max() <= 1e-12


class TestCurvature:
    def test_flat_strip_is_zero(self):
        xs = np.linspace(0, 1, 11)
        ts = np.linspace(0, 1, 11)
        X, T = np.meshgrid(xs, ts, indexing="ij")
        r = np.stack([X, T, np.zeros_like(X)], axis=-1)
        mesh = SurfaceMesh(xs, ts, r, np.zeros((11, 11, 3, 3)),
                           np.zeros((11, 11, 3)), np.zeros((11, 11)), 0.0)
        K = discrete_curvature(mesh)
        assert np.nanmax(np.abs(K)) <= 1e-10

    def test_sphere_patch(self):
        # unit sphere: K = +1
        u = np.linspace(0.6, 1.0, 25)
        v = np.linspace(0.2, 0.6, 25)
        U, V = np.meshgrid(u, v, indexing="ij")
        r = np.stack([np.sin(U) * np.cos(V), np.sin(U) * np.sin(V),
                      np.cos(U)], axis=-1)
        mesh = SurfaceMesh(u, v, r, np.zeros((25, 25, 3, 3)),
                           np.zeros((25, 25, 3)), np.zeros((25, 25)), 0.0)
        K = discrete_curvature(mesh)
        assert abs(np.nanmedian(K[1:-1, 1:-1]) - 1.0) <= 0.05

    def test_sg_mesh_curvature(self, sg_inst):
        xs, ts = make_grid(0.3, 0.3, 51, 51, 0.02)
        mesh = integrate_frame(sg_kink(1.0, xs, ts), sg_inst,
                               sine_gordon_abc(1))
        K = discrete_curvature(mesh)
        assert -1.05 <= np.nanmedian(K[1:-1, 1:-1]) <= -0.95

    def test_too_small_grid(self):
        xs = np.linspace(0, 1, 2)
        r = np.zeros((2, 2, 3))
        mesh = SurfaceMesh(xs, xs, r, np.zeros((2, 2, 3, 3)),
                           np.zeros((2, 2, 3)), np.zeros((2, 2)), 0.0)
        with pytest.raises(ReconstructionError, match="3x3"):
            discrete_curvature(mesh)

    def test_degenerate_triangles(self):
        xs = np.linspace(0, 1, 3)
        r = np.zeros((3, 3, 3))   # all vertices coincide
        mesh = SurfaceMesh(xs, xs, r, np.zeros((3, 3, 3, 3)),
                           np.zeros((3, 3, 3)), np.zeros((3, 3)), 0.0)
        with pytest.raises(ReconstructionError, match="degenerate"):
            discrete_curvature(mesh)


class TestExport:
    @pytest.fixture()
    def mesh2x2(self, sg_inst):
        xs, ts = make_grid(0.3, 0.3, 2, 2, 0.01)
        return integrate_frame(sg_kink(1.0, xs, ts), sg_inst, (0.0, 1.0, 0.0))

    def test_obj_counts(self, mesh2x2, tmp_path):
        paths = export_mesh(mesh2x2, str(tmp_path / "m"), "obj")
        text = open(paths[0]).read().strip().splitlines()
        assert sum(1 for l in text if l.startswith("v ")) == 4
        assert sum(1 for l in text if l.startswith("f ")) == 2

    def test_csv_header(self, mesh2x2, tmp_path):
        paths = export_mesh(mesh2x2, str(tmp_path / "m"), "csv")
        first = open(paths[0]).readline().strip()
        assert first == "x,t,rx,ry,rz,a,b,c,K,drift"
        assert CSV_HEADER == first

    def test_reexport_identical_bytes(self, mesh2x2, tmp_path):
        p1 = export_mesh(mesh2x2, str(tmp_path / "a"), "obj")
        p2 = export_mesh(mesh2x2, str(tmp_path / "b"), "obj")
        assert open(p1[0], "rb").read() == open(p2[0], "rb").read()
        assert open(p1[1], "rb").read() == open(p2[1], "rb").read()

    def test_unknown_format(self, mesh2x2, tmp_path):
        with pytest.raises(ReconstructionError, match="format"):
            export_mesh(mesh2x2, str(tmp_path / "m"), "ply")


def test_sampler_validation_catches_bad_residual():
    xs, ts = make_grid(0.0, 0.0, 3, 3, 0.01)
    jets = {k: np.ones((3, 3)) for k in ("u0", "u1", "u2", "u3", "w1", "v1")}
    with pytest.raises(ReconstructionError, match="residual"):
        SolutionSampler(xs, ts, jets, "tabulated", residual=1.0,
                        tolerance=1e-8)


def test_tabulated_sampler_bilinear_fallback():
    xs, ts = make_grid(0.0, 0.0, 5, 5, 0.25)
    X, T = np.meshgrid(xs, ts, indexing="ij")
    jets = {"u0": X + T, "u1": np.ones_like(X), "u2": np.zeros_like(X),
            "u3": np.zeros_like(X), "w1": np.ones_like(X),
            "v1": np.zeros_like(X)}
    s = SolutionSampler(xs, ts, jets, "tabulated", residual=0.0,
                        tolerance=1e-8)
    out = s.eval_jets(np.array([0.375]), np.array([0.125]))
    assert abs(out["u0"][0] - 0.5) <= 1e-12
