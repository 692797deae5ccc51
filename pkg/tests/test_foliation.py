import math

import numpy as np
import pytest

from foliage import jet as J
from foliage.chart import Chart, Field, Form, SU2Model
from foliage.foliation import (Foliation, classify_field, holonomy_residual, integrability_residual,
                               is_basic_function, leaf_independence, leaf_mean_curvature, mean_curvature_sup,
                               project_perp, transverse_metric, transverse_volume, volume_forms)
from foliage.gallery import hopf_monomial, kronecker

SQRT2 = math.sqrt(2.0)


class TestKronecker:
    def test_projection_of_dy(self, example):
        ex = example("kronecker")
        s = ex.sample()
        p = project_perp(s.constant([0.0, 1.0]), ex.foliation, s)
        np.testing.assert_allclose(p.v, np.tile([-SQRT2 / 3, 1 / 3], (s.size, 1)), atol=1e-15)
        np.testing.assert_allclose(p.v, np.tile(ex.expected["project_dy"].value, (s.size, 1)), atol=1e-15)

    def test_transverse_metric(self, example):
        ex = example("kronecker")
        s = ex.sample()
        dy = Field.constant([0.0, 1.0])
        np.testing.assert_allclose(transverse_metric(dy, dy, ex.foliation, s).v, 1 / 3, atol=1e-15)
        leaf = ex.foliation.leaf_fields[0]
        np.testing.assert_allclose(transverse_metric(leaf, dy, ex.foliation, s).v, 0.0, atol=1e-15)

    def test_rational_slope_flagged(self):
        assert kronecker(0.5).flags and not kronecker().flags


class TestClassification:
    def test_non_foliate(self, example):
        ex = example("product_t3")
        cl = classify_field(ex.non_foliate_field, ex.foliation, ex.sample())
        assert not cl.is_foliate and not cl.is_transverse and cl.foliate_residual > 1.0

    def test_foliate_with_leaf_component(self, example):
        ex = example("product_t3")
        f = Field(lambda s: J.stack([J.cos(2 * math.pi * s.pos[0]), J.sin(2 * math.pi * s.pos[1]),
                                     s.constant(1.0)]))
        cl = classify_field(f, ex.foliation, ex.sample())
        assert cl.is_foliate and not cl.is_transverse

    def test_transverse_foliate(self, example):
        ex = example("product_t3")
        f = Field(lambda s: J.stack([s.constant(0.0), J.sin(2 * math.pi * s.pos[2]), s.constant(1.0)]))
        assert classify_field(f, ex.foliation, ex.sample()).is_transverse

    @pytest.mark.parametrize("name", ["product_t3", "kronecker", "hopf", "heisenberg3", "warped_nonharmonic"])
    def test_gallery_foliate_fields(self, example, name, rng):
        ex = example(name)
        s = ex.sample()
        for F in ex.foliate_fields(rng, 4):
            assert classify_field(F, ex.foliation, s).is_foliate

    def test_basic_function(self, example):
        ex = example("hopf")
        s = ex.sample()
        assert is_basic_function(hopf_monomial((1, 2, 0)), ex.foliation, s).ok
        w = Form.function(lambda s: s.pos[0] * s.pos[1])
        assert not is_basic_function(w, ex.foliation, s).ok


class TestStructuralChecks:
    @pytest.mark.parametrize("name", ["product_t3", "kronecker", "hopf", "heisenberg3", "warped_nonharmonic",
                                      "quat_heisenberg7"])
    def test_gallery_is_riemannian(self, example, name):
        ex = example(name)
        s = ex.sample()
        assert integrability_residual(ex.foliation, s) < 1e-12
        assert holonomy_residual(ex.foliation, s) < 1e-10
        assert leaf_independence(ex.foliation, s) > 0.1

    def test_bundle_like_violation_detected(self):
        # leaves d/dy, transverse metric f(y)^2 dx^2 changes along them
        backend = Chart(2, lambda x: [[(2.0 + J.sin(2 * math.pi * x[1])) ** 2, 0.0], [0.0, 1.0]])
        fol = Foliation([Field.constant([0.0, 1.0])], [Field.constant([1.0, 0.0])])
        s = backend.sample(np.random.default_rng(0).random((10, 2)))
        assert holonomy_residual(fol, s) > 0.1

    def test_contact_distribution_not_integrable(self):
        from foliage.chart import Frame

        backend = Frame(SU2Model.structure_constants, model=SU2Model)
        e = np.eye(3)
        fol = Foliation([Field.constant(e[1]), Field.constant(e[2])], [Field.constant(e[0])])
        s = backend.sample(SU2Model.random_points(np.random.default_rng(1), 5))
        assert integrability_residual(fol, s) == pytest.approx(2.0)


class TestMeanCurvature:
    def test_warped_closed_form(self, example):
        # leaf F = f^-1 d/dy, H = -(f'/f) d/dx
        ex = example("warped_nonharmonic")
        s = ex.sample(0, grid=64)
        x = s.points[:, 0]
        f = 2 + np.sin(2 * math.pi * x)
        fp = 2 * math.pi * np.cos(2 * math.pi * x)
        h = leaf_mean_curvature(ex.foliation, s).v
        np.testing.assert_allclose(h[:, 0], -fp / f, atol=1e-12)
        np.testing.assert_allclose(h[:, 1], 0.0, atol=1e-12)

    def test_warped_supremum(self, example):
        ex = example("warped_nonharmonic")
        fine = ex.sample(0, grid=20_000, extra=0)
        assert mean_curvature_sup(ex.foliation, fine) == pytest.approx(2 * math.pi / math.sqrt(3), rel=1e-7)

    @pytest.mark.parametrize("name", ["product_t3", "kronecker", "hopf", "heisenberg3", "quat_heisenberg7"])
    def test_minimal_leaves(self, example, name):
        ex = example(name)
        assert mean_curvature_sup(ex.foliation, ex.sample()) < 1e-12


class TestVolumeForms:
    def test_heisenberg_densities(self, example):
        ex = example("heisenberg3")
        vf = volume_forms(ex.foliation, ex.sample())
        np.testing.assert_allclose(vf.mu, 0.5, atol=1e-14)
        np.testing.assert_allclose(vf.mu_transverse_on_frame, 1.0, atol=1e-14)
        # g_T(E1, E1) = 1/2, so the supplied frame has transverse volume 1/2
        np.testing.assert_allclose(vf.orientation, 0.5, atol=1e-14)

    def test_degenerate_transverse_frame_rejected(self, example):
        ex = example("product_t3")
        e = np.eye(3)
        fol = Foliation(ex.foliation.leaf_fields, [Field.constant(e[0]), Field.constant(e[1])])
        with pytest.raises(ValueError):
            volume_forms(fol, ex.sample())

    def test_swapped_frame_has_opposite_orientation(self, example):
        ex = example("product_t3")
        s = ex.sample()
        fs = ex.foliation.at(s)
        swapped = s.constant(np.eye(3)[[2, 1]], 0)
        np.testing.assert_allclose(transverse_volume(fs, swapped).v, -1.0)
