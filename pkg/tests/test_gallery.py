import math

import numpy as np
import pytest

from foliage import construct
from foliage.gallery import NAMES, catalogue, fourier_functions, fourier_modes, kronecker, monomial_exponents

ORIGINS = {"by construction", "stated identity", "independent oracle"}


class TestRegistry:
    def test_names(self):
        assert NAMES == ("product_t3", "kronecker", "hopf", "heisenberg3", "warped_nonharmonic", "quat_heisenberg7")

    def test_unknown_name(self):
        with pytest.raises(KeyError, match="hopf"):
            construct("sphere")

    def test_unexpected_parameter(self):
        with pytest.raises(TypeError):
            construct("hopf", slope=2.0)

    def test_parameterised_kronecker(self):
        ex = construct("kronecker", slope=math.sqrt(3.0))
        assert ex.expected["gT_dy_dy"].value == pytest.approx(0.25)


class TestCatalogue:
    def test_entries(self):
        items = catalogue()
        assert [i["name"] for i in items] == list(NAMES)
        for item in items:
            assert item["dim"] == item["rank"] + item["codim"]
            assert item["expected"], item["name"]
            for key, e in item["expected"].items():
                assert e["origin"] in ORIGINS, (item["name"], key)
                assert e["oracle"]

    def test_deterministic(self):
        assert catalogue() == catalogue()

    @pytest.mark.parametrize("name,key,value", [("hopf", "ricci_transverse_factor", 4.0), ("heisenberg3", "b1", 2),
                                                ("hopf", "aut_dim", 4), ("heisenberg3", "eta_einstein", (-2.0, 4.0)),
                                                ("product_t3", "q", 2), ("hopf", "volume", 2 * math.pi**2)])
    def test_expected_values(self, example, name, key, value):
        assert example(name).expected[key].value == value

    def test_flags(self, example):
        assert not example("warped_nonharmonic").harmonic
        assert example("hopf").ricci_positive and not example("hopf").transverse_flat
        assert kronecker(2.0).flags


class TestSampling:
    @pytest.mark.parametrize("name", NAMES)
    def test_deterministic(self, example, name):
        ex = example(name)
        np.testing.assert_array_equal(ex.sample_points(3), ex.sample_points(3))
        pts = ex.sample_points(0)
        assert pts.ndim == 2 and ex.sample(0).size == pts.shape[0]

    def test_seed_changes_random_points(self, example):
        ex = example("hopf")
        assert not np.array_equal(ex.sample_points(0), ex.sample_points(1))

    def test_hopf_points_on_sphere(self, example):
        pts = example("hopf").sample_points(0)
        np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-14)


class TestAnsatzBuilders:
    def test_fourier_modes(self):
        # one representative per +/- pair: (3^2 - 1) / 2 nonzero modes plus zero
        modes = fourier_modes(1, 2)
        assert len(modes) == 5 and (0, 0) in modes
        assert not any(tuple(-v for v in k) in modes for k in modes if any(k))
        assert len(fourier_functions(1, (0, 1))) == 9

    def test_monomials(self):
        assert len(monomial_exponents(2)) == 10
        assert all(sum(a) >= 1 for a in monomial_exponents(2, minimum=1))
