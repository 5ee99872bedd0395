import io

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mmsverify.constitutive import CaseId
from mmsverify.errors import BoundaryNode
from mmsverify.manufactured import (
    FIELD_CSV_HEADER, MmsField, case1_closed_form, cospi, evaluate, kinematics, load_value,
    oracle_source, plane_points, sinpi, source, write_field_csv,
)

PHI_QUARTER = 12 * np.pi ** 2          # Case I source at (1/4, 1/4, 1/4)
GRAD_EIGHTH = 0.01 * 2 * np.pi * np.cos(np.pi / 4) * np.sin(np.pi / 4) ** 2
J_EIGHTH = 1 + 3 * GRAD_EIGHTH


def interior_points(rng, n=100):
    return rng.uniform(0.02, 0.98, (n, 3))


class TestTrig:
    def test_exact_zeros(self):
        t = np.arange(-4, 5, dtype=float)
        assert np.all(sinpi(t) == 0.0)
        assert np.all(cospi(t + 0.5) == 0.0)

    def test_matches_numpy(self, rng):
        t = rng.uniform(-3, 3, 100)
        assert_allclose(sinpi(t), np.sin(np.pi * t), atol=1e-15)
        assert_allclose(cospi(t), np.cos(np.pi * t), atol=1e-15)


class TestField:
    def test_validation(self):
        with pytest.raises(ValueError):
            MmsField(0.0, 2)
        with pytest.raises(ValueError):
            MmsField(0.01, 0)

    def test_center_is_zero(self, field):
        assert_allclose(evaluate(field, [0.5, 0.5, 0.5]).u, 0.0, atol=0)

    def test_quarter_point(self, field):
        assert_allclose(evaluate(field, [0.25, 0.25, 0.25]).u, [0.01] * 3, rtol=1e-15)

    def test_gradient_at_eighth_point(self, field):
        gradU = evaluate(field, [0.125] * 3).gradU
        assert_allclose(gradU, np.full((3, 3), GRAD_EIGHTH), rtol=1e-14)
        assert_allclose(gradU[0, 0], 0.0222144, atol=5e-8)

    def test_vanishes_on_faces(self, rng, field):
        X = rng.uniform(0, 1, (10_000, 3))
        face = rng.integers(0, 3, len(X))
        X[np.arange(len(X)), face] = rng.integers(0, 2, len(X))
        assert np.all(field.displacement(X) == 0.0)

    def test_hessian_symmetry(self, rng, field):
        H = evaluate(field, rng.uniform(0, 1, (50, 3))).hessU
        assert np.array_equal(H, np.swapaxes(H, -1, -2))
        bound = field.C1 * (field.n * np.pi) ** 2
        assert np.abs(H).max() <= bound * (1 + 1e-14)

    def test_derivatives_match_differences(self, rng, field):
        X = rng.uniform(0, 1, (20, 3))
        h = 1e-6
        d = evaluate(field, X)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            fd_u = (field.displacement(X + e) - field.displacement(X - e)) / (2 * h)
            assert_allclose(d.gradU[..., k], fd_u, atol=1e-9)
            fd_g = (evaluate(field, X + e).gradU - evaluate(field, X - e).gradU) / (2 * h)
            assert_allclose(d.hessU[..., k], fd_g, atol=1e-8)

    def test_peak_principal_strain_about_ten_percent(self, field):
        g = (np.arange(64) + 0.5) / 64
        X = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)
        gradU = evaluate(field, X).gradU
        eps = 0.5 * (gradU + np.swapaxes(gradU, -1, -2))
        peak = np.abs(np.linalg.eigvalsh(eps)).max()
        assert 0.08 <= peak <= 0.12


class TestKinematics:
    def test_face_point(self, field):
        d = evaluate(field, [0.0, 0.3, 0.7])
        assert np.all(d.u == 0.0)
        assert np.any(d.gradU[:, 0] != 0.0)
        assert np.all(d.gradU[:, 1:] == 0.0)

    def test_jacobian_at_eighth_point(self, field):
        kin = kinematics(field, [0.125] * 3)
        assert_allclose(kin.J, J_EIGHTH, rtol=1e-14)
        assert_allclose(kin.J, 1.0666432, atol=5e-8)

    def test_B_and_C_share_spectrum(self, rng, field):
        kin = kinematics(field, rng.uniform(0, 1, (20, 3)))
        assert_allclose(np.linalg.eigvalsh(kin.B), np.linalg.eigvalsh(kin.C), atol=1e-14)
        assert_allclose(kin.B, kin.F @ np.swapaxes(kin.F, -1, -2))


class TestSource:
    @pytest.mark.parametrize("case", list(CaseId))
    def test_origin(self, case, params, field):
        assert np.all(source(case, params, field, [0.0, 0.0, 0.0]).phi == 0.0)

    def test_case_one_quarter_point(self, params, field):
        ev = source(CaseId.I, params, field, [0.25] * 3)
        assert_allclose(ev.phi, [PHI_QUARTER] * 3, rtol=1e-13)
        assert_allclose(ev.phi, [118.4353] * 3, atol=5e-5)

    @pytest.mark.parametrize("case", list(CaseId))
    def test_matches_oracle(self, case, rng, params, field):
        X = interior_points(rng)
        phi = source(case, params, field, X).phi
        ref = oracle_source(case, params, field, X)
        rel = np.linalg.norm(phi - ref, axis=-1) / np.maximum(np.linalg.norm(ref, axis=-1), 1.0)
        assert rel.max() <= 1e-7

    def test_oracle_fourth_order(self, params, field):
        X = np.array([0.31, 0.62, 0.17])
        exact = source(CaseId.II, params, field, X).phi
        e1 = np.linalg.norm(oracle_source(CaseId.II, params, field, X, step=4e-2) - exact)
        e2 = np.linalg.norm(oracle_source(CaseId.II, params, field, X, step=2e-2) - exact)
        assert 12 < e1 / e2 < 20

    def test_oracle_origin(self, params, field):
        assert_allclose(oracle_source(CaseId.III, params, field, [0.0, 0.0, 0.0]), 0.0, atol=1e-10)

    def test_case_one_closed_form(self, rng, params, field):
        X = rng.uniform(0, 1, (1000, 3))
        phi = source(CaseId.I, params, field, X).phi
        ref = case1_closed_form(X)
        assert np.abs(phi - ref).max() <= 1e-12 * np.abs(ref).max()

    def test_closed_form_special_points(self):
        assert_allclose(case1_closed_form([0.25] * 3), [PHI_QUARTER] * 3, rtol=1e-14)
        assert_allclose(case1_closed_form([0.5] * 3), 0.0, atol=1e-12)
        Y, Z = 0.3, 0.1
        assert_allclose(case1_closed_form([0.0, Y, Z])[0], -6 * np.pi ** 2 * np.sin(np.pi * (2 * Y + 2 * Z)))

    def test_finite_strain_sources_differ_slightly(self, rng, params, field):
        X = interior_points(rng, 500)
        p2 = source(CaseId.II, params, field, X).phi
        p3 = source(CaseId.III, params, field, X).phi
        rel = np.linalg.norm(p2 - p3) / np.linalg.norm(p2)
        assert 1e-4 < rel < 0.05


class TestLoadValue:
    def test_lumped(self, params, field):
        out = load_value(CaseId.I, params, field, [0.25] * 3, "lumped", h=0.25)
        assert_allclose(out, [PHI_QUARTER / 64] * 3, rtol=1e-13)
        assert_allclose(out[0], 1.8506, atol=5e-5)

    def test_lumped_rejects_boundary(self, params, field):
        with pytest.raises(BoundaryNode):
            load_value(CaseId.I, params, field, [0.0, 0.5, 0.5], "lumped", h=0.25)

    def test_body_without_nlgeom(self, rng, params, field):
        X = interior_points(rng, 10)
        assert_allclose(load_value(CaseId.II, params, field, X, "body", nlgeom=False),
                        source(CaseId.II, params, field, X).phi)

    def test_body_with_nlgeom(self, params, field):
        X = [0.125] * 3
        phi = source(CaseId.II, params, field, X).phi
        assert_allclose(load_value(CaseId.II, params, field, X, "body"), phi / J_EIGHTH, rtol=1e-14)

    def test_unknown_mode(self, params, field):
        with pytest.raises(ValueError):
            load_value(CaseId.I, params, field, [0.5] * 3, "surface")


class TestFieldCsv:
    def test_plane_export(self, params, field):
        buf = io.StringIO()
        n = write_field_csv(buf, CaseId.III, params, field, plane_points(4, 0.25))
        lines = buf.getvalue().splitlines()
        assert n == 25 and len(lines) == 26
        assert lines[0] == ",".join(FIELD_CSV_HEADER)
        row = np.array(lines[1 + 6].split(","), dtype=float)   # X = Y = Z = 0.25
        assert_allclose(row[:3], [0.25] * 3)
        assert_allclose(row[6], np.linalg.norm(row[3:6]))
