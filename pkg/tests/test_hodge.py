import math

import numpy as np
import pytest

from foliage.chart import Form
from foliage.gallery import fourier_functions
from foliage.hodge import (AnsatzNotClosed, AnsatzSpace, NotApplicable, Subspace, adjointness_residual,
                           build_basic_complex, classify_basic_harmonic, classify_killing, classify_parallel,
                           codifferential_check, harmonic_agreement, inclusion_angle, laplacian_check, nullspace,
                           rank)

RESOLUTION = {"hopf": 12, "quat_heisenberg7": 4}
CACHE: dict = {}


def complex_for(example, name, cutoff=1):
    key = (name, cutoff)
    if key not in CACHE:
        ex = example(name)
        s = ex.sample()
        f0, f1, f2, note = ex.form_candidates(cutoff)
        res = RESOLUTION.get(name, 16)
        spaces = [AnsatzSpace.build("form", k, c, ex.backend, ex.foliation, s, res, note)
                  for k, c in enumerate((f0, f1, f2))]
        CACHE[key] = (ex, s, build_basic_complex(*spaces, s), res)
    return CACHE[key]


def fields_for(example, name, cutoff=1):
    ex = example(name)
    s = ex.sample()
    cands, note = ex.field_candidates(cutoff)
    return ex, s, AnsatzSpace.build("field", 1, cands, ex.backend, ex.foliation, s, RESOLUTION.get(name, 16), note)


class TestLinearAlgebra:
    def test_nullspace_and_rank(self):
        m = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1e-12]])
        ns = nullspace(m)
        assert ns.dim == 2 and rank(m) == 1
        assert np.allclose(m @ ns.basis, 0, atol=1e-11)

    def test_gap(self):
        ns = nullspace(np.diag([3.0, 1.0, 0.0]))
        assert ns.dim == 1 and math.isinf(ns.gap) is False and ns.gap > 1e10
        assert math.isinf(Subspace(np.zeros((2, 0)), np.ones(2), 0.1).gap)

    def test_inclusion_angle(self):
        e = np.eye(3)
        assert inclusion_angle(e[:, :1], e[:, :2]) == pytest.approx(0.0, abs=1e-15)
        assert inclusion_angle(e[:, 2:], e[:, :2]) == pytest.approx(math.pi / 2)
        assert inclusion_angle(e[:, :2], e[:, :1]) == pytest.approx(math.pi / 2)
        assert inclusion_angle(np.zeros((3, 0)), e[:, :1]) == 0.0


class TestBasicComplex:
    @pytest.mark.parametrize("name,b1", [("product_t3", 2), ("kronecker", 1), ("hopf", 0), ("heisenberg3", 2),
                                         ("warped_nonharmonic", 1), ("quat_heisenberg7", 4)])
    def test_betti_number(self, example, name, b1):
        ex, s, sol, _ = complex_for(example, name, ex_cutoff(example, name))
        assert sol.b1_harmonic == b1 == sol.b1_cohomological
        assert sol.b1_harmonic <= ex.codim
        nh, ncc, angle = harmonic_agreement(sol)
        assert nh == ncc and angle < 1e-6

    @pytest.mark.parametrize("name,eigenvalue", [("product_t3", 4 * math.pi**2), ("heisenberg3", 8 * math.pi**2),
                                                 ("hopf", 8.0)])
    def test_first_eigenvalue(self, example, name, eigenvalue):
        _, _, sol, _ = complex_for(example, name)
        spec = sol.laplacian_spectrum
        first = spec[spec > 1e-6][0]
        assert first == pytest.approx(eigenvalue, rel=1e-9)

    @pytest.mark.parametrize("name", ["product_t3", "heisenberg3", "hopf"])
    def test_d_squared_and_adjointness(self, example, name):
        ex, s, sol, res = complex_for(example, name)
        assert np.max(np.abs(sol.d1 @ sol.d0)) < 1e-9
        assert adjointness_residual(sol, ex.backend, res) < 1e-9
        for sp in sol.spaces:
            if sp.dim:
                np.testing.assert_allclose(sp.gram, np.eye(sp.dim), atol=1e-9)

    def test_harmonic_forms_of_flat_torus(self, example):
        ex, s, sol, _ = complex_for(example, "product_t3")
        comb = [sol.spaces[1].combination(sol.harmonic[:, k]) for k in range(sol.b1_harmonic)]
        for w in comb:
            v = w(s).v
            assert np.max(np.abs(v - v[0])) < 1e-9  # constant coefficients
            assert np.max(np.abs(v[:, 0])) < 1e-12  # no dx component

    def test_restriction_keeps_only_basic_kronecker_modes(self, example):
        _, _, sol, _ = complex_for(example, "kronecker")
        assert [sp.dim for sp in sol.spaces] == [1, 1, 0]

    def test_ansatz_not_closed(self, example):
        ex = example("product_t3")
        s = ex.sample()
        f0 = fourier_functions(1, (1,))
        a0 = AnsatzSpace.build("form", 0, f0, ex.backend, ex.foliation, s, 8, "functions of y")
        a1 = AnsatzSpace.build("form", 1, [Form.constant([0.0, 0.0, 1.0], "dz")], ex.backend, ex.foliation, s, 8,
                               "dz only")
        with pytest.raises(AnsatzNotClosed, match="dz only"):
            build_basic_complex(a0, a1, AnsatzSpace.empty("form", 2), s)

    def test_non_basic_candidates_are_removed(self, example):
        ex = example("product_t3")
        s = ex.sample()
        f = fourier_functions(1, (0, 1))  # includes x-dependent modes
        space = AnsatzSpace.build("form", 0, f, ex.backend, ex.foliation, s, 8, "all of (x, y)")
        assert space.dim == 3 and space.basic_residual < 1e-10


class TestCrossChecks:
    @pytest.mark.parametrize("name", ["product_t3", "heisenberg3", "hopf"])
    def test_codifferential_is_minus_divergence(self, example, name):
        ex, s, fields = fields_for(example, name, 1)
        _, _, sol, _ = complex_for(example, name, 2)
        assert codifferential_check(sol, fields, ex.foliation, s) < 1e-7
        assert laplacian_check(sol, ex.foliation, s) < 1e-7

    def test_field_ansatz_outside_one_forms(self, example):
        ex, s, fields = fields_for(example, "product_t3", 2)
        _, _, sol, _ = complex_for(example, "product_t3", 1)
        with pytest.raises(AnsatzNotClosed):
            codifferential_check(sol, fields, ex.foliation, s)


class TestFieldClassifiers:
    @pytest.mark.parametrize("name,iso,par", [("product_t3", 2, 2), ("kronecker", 1, 1), ("hopf", 3, 0),
                                              ("heisenberg3", 2, 2), ("quat_heisenberg7", 4, 4)])
    def test_dimensions(self, example, name, iso, par):
        ex, s, fields = fields_for(example, name, ex_cutoff(example, name))
        assert classify_killing(fields, ex.foliation, s).dim == iso
        assert classify_parallel(fields, ex.foliation, s).dim == par
        harm = classify_basic_harmonic(fields, ex.foliation, s, ex.harmonic)
        assert harm.dim == par

    def test_gated_on_harmonicity(self, example):
        ex, s, fields = fields_for(example, "warped_nonharmonic", 1)
        with pytest.raises(NotApplicable):
            classify_basic_harmonic(fields, ex.foliation, s, ex.harmonic)


def ex_cutoff(example, name):
    return 0 if example(name).default_cutoff == 0 else 1
