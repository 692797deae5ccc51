import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from foliage import construct
from foliage import jet as J
from foliage.chart import Chart, Field, Form
from foliage.gallery import ContactData
from foliage.structures import (StructureError, almost_contact_check, almost_three_contact_check,
                                automorphism_report, contact_density, eta_einstein_fit, invariance_residual,
                                nijenhuis_tensor, sasaki_check, sasaki_residual, three_alpha_delta_check,
                                three_contact_density)

X, Y, Z = sp.symbols("x y z")
SYMS = (X, Y, Z)
PHI = sp.Matrix([[Y, sp.sin(X), 0], [Z * X, 1, sp.cos(Y)], [0, X**2, Y * Z]])  # PHI[m, i] = (phi e_i)^m


def symbolic_nijenhuis(phi):
    def apply(v):
        return phi * v

    def bracket(a, b):
        return sp.Matrix([sum(a[j] * sp.diff(b[i], SYMS[j]) - b[j] * sp.diff(a[i], SYMS[j]) for j in range(3))
                          for i in range(3)])

    e = [sp.Matrix(sp.eye(3)[:, i]) for i in range(3)]
    out = {}
    for i in range(3):
        for j in range(3):
            out[i, j] = (bracket(apply(e[i]), apply(e[j])) - apply(bracket(apply(e[i]), e[j]))
                         - apply(bracket(e[i], apply(e[j]))))
    return out


def small_sample(ex, seed=0):
    return ex.sample(seed, grid=4, extra=8)


class TestNijenhuis:
    def test_against_sympy_on_chart(self):
        pts = np.random.default_rng(0).random((7, 3))
        s = Chart(3, lambda x: np.eye(3)).sample(pts)
        fns = [[sp.lambdify(SYMS, PHI[m, i], modules=[{"sin": J.sin, "cos": J.cos}]) for i in range(3)]
               for m in range(3)]
        x = s.pos
        phi = J.stack([J.stack([J.as_jet(fns[m][i](x[0], x[1], x[2]), x[0]) for i in range(3)])
                       for m in range(3)])
        got = nijenhuis_tensor(phi, s.structure).v
        exact = symbolic_nijenhuis(PHI)
        for (i, j), vec in exact.items():
            for m in range(3):
                ref = sp.lambdify(SYMS, vec[m])(*pts.T) * np.ones(7)
                np.testing.assert_allclose(got[:, m, i, j], ref, atol=1e-12)

    def test_antisymmetric(self, example):
        ex = example("heisenberg3")
        s = small_sample(ex)
        n = nijenhuis_tensor(ex.contact.phi(s), s.structure).v
        np.testing.assert_allclose(n, -np.swapaxes(n, 2, 3), atol=1e-14)


class TestAlmostContact:
    @pytest.mark.parametrize("name", ["hopf", "heisenberg3"])
    def test_identities_hold(self, example, name):
        ex = example(name)
        res = almost_contact_check(ex.contact, small_sample(ex))
        assert max(res.values()) < 1e-12

    def test_scaled_reeb_field_detected(self, example):
        ex = example("hopf")
        res = almost_contact_check(ex.contact.scaled(2.0), small_sample(ex))
        assert res["unit_length"] == pytest.approx(1.0)
        assert res["eta_xi"] == pytest.approx(1.0)

    @pytest.mark.parametrize("name", ["hopf", "heisenberg3"])
    def test_sasaki(self, example, name):
        ex = example(name)
        res = sasaki_check(ex.contact, small_sample(ex))
        assert res["normality"] < 1e-12 and res["d_eta_minus_2Phi"] < 1e-12

    def test_flat_torus_is_not_sasaki(self, example):
        ex = example("product_t3")
        s = small_sample(ex)
        e = np.eye(3)
        phi = np.zeros((3, 3))
        phi[1, 2], phi[2, 1] = 1.0, -1.0  # phi e_z = e_y, phi e_y = -e_z
        cd = ContactData(Field.constant(e[0]), Form.constant(e[0]), lambda s: s.constant(phi), "flat")
        assert max(almost_contact_check(cd, s).values()) < 1e-14
        assert sasaki_residual(cd, s) == pytest.approx(2.0)

    @pytest.mark.parametrize("name,density", [("hopf", -2.0), ("heisenberg3", -1.0)])
    def test_contact_density(self, example, name, density):
        ex = example(name)
        np.testing.assert_allclose(contact_density(ex.contact, small_sample(ex)), density, atol=1e-12)

    def test_density_needs_odd_dimension(self, example):
        ex = example("warped_nonharmonic")
        s = small_sample(ex)
        cd = ContactData(Field.constant([1.0, 0.0]), Form.constant([1.0, 0.0]), lambda s: s.constant(np.zeros((2, 2))))
        with pytest.raises(StructureError):
            contact_density(cd, s)


class TestEtaEinstein:
    @pytest.mark.parametrize("name,a,b", [("hopf", 2.0, 0.0), ("heisenberg3", -2.0, 4.0)])
    def test_constants(self, example, name, a, b):
        ex = example(name)
        fit = eta_einstein_fit(ex.contact, small_sample(ex))
        assert fit.constants["a"] == pytest.approx(a, abs=1e-10)
        assert fit.constants["b"] == pytest.approx(b, abs=1e-10)
        assert fit.max_residual < 1e-10 and fit.classification == "eta-Einstein"
        # Ric(xi, xi) = a + b = 2 on a 3-dimensional Sasaki manifold
        assert fit.constants["a"] + fit.constants["b"] == pytest.approx(2.0)

    @settings(max_examples=5, deadline=None)
    @given(st.integers(0, 1000))
    def test_fit_is_sample_independent(self, seed):
        ex = construct("heisenberg3")
        fit = eta_einstein_fit(ex.contact, ex.random_sample(seed, 10))
        assert fit.constants["b"] == pytest.approx(4.0, abs=1e-10)

    def test_missing_structure(self, example):
        with pytest.raises(StructureError):
            eta_einstein_fit(None, small_sample(example("product_t3")))


class TestThreeStructures:
    def test_constants(self, example):
        ex = example("quat_heisenberg7")
        s = ex.sample(grid=4, extra=0)
        fit = three_alpha_delta_check(ex.three_contact, s)
        assert fit.constants["alpha"] == pytest.approx(1.0, abs=1e-10)
        assert fit.constants["delta"] == pytest.approx(0.0, abs=1e-10)
        assert fit.classification == "degenerate" and fit.max_residual < 1e-10

    def test_interrelations(self, example):
        ex = example("quat_heisenberg7")
        res = almost_three_contact_check(ex.three_contact, ex.sample(grid=4, extra=0))
        assert set(res) == {(1, 2, 3), (2, 3, 1), (3, 1, 2)} and max(res.values()) < 1e-12

    def test_permuted_structures_break_relations(self, example):
        ex = example("quat_heisenberg7")
        a, b, c = ex.three_contact
        res = almost_three_contact_check((b, a, c), ex.sample(grid=4, extra=0))
        assert max(res.values()) > 0.5

    def test_cyclic_relabelling_keeps_constants(self, example):
        ex = example("quat_heisenberg7")
        a, b, c = ex.three_contact
        fit = three_alpha_delta_check((b, c, a), ex.sample(grid=4, extra=0))
        assert fit.constants["alpha"] == pytest.approx(1.0) and fit.max_residual < 1e-10

    def test_single_structure_refused(self, example):
        ex = example("quat_heisenberg7")
        with pytest.raises(StructureError):
            three_alpha_delta_check(ex.three_contact[0], ex.sample(grid=4, extra=0))
        with pytest.raises(StructureError):
            three_alpha_delta_check(ex.three_contact[:2], ex.sample(grid=4, extra=0))

    def test_volume_density(self, example):
        ex = example("quat_heisenberg7")
        d = three_contact_density(ex.three_contact, ex.sample(grid=4, extra=0))
        np.testing.assert_allclose(d, d[0], atol=1e-12)
        assert abs(d[0]) > 1.0


class TestAutomorphisms:
    @pytest.mark.parametrize("name,dim", [("hopf", 4), ("heisenberg3", 1), ("quat_heisenberg7", 3)])
    def test_dimension(self, example, name, dim):
        ex = example(name)
        s = ex.sample(grid=4, extra=8)
        structs = ex.contact if ex.contact is not None else ex.three_contact
        rep = automorphism_report(ex.automorphism_candidates(), structs, ex.foliation, ex.backend, s,
                                  8 if name != "quat_heisenberg7" else 4)
        assert rep.dim == dim == ex.expected["aut_dim"].value
        assert rep.reeb_detected and rep.killing_residual < 1e-8
        assert rep.reeb_kernel_dim == ex.rank and rep.reeb_coefficient_variance < 1e-12

    def test_basic_multiple_of_reeb_rejected(self, example):
        ex = example("heisenberg3")
        s = small_sample(ex)
        assert invariance_residual(ex.contact.xi, ex.contact, s) < 1e-12
        fxi = [F for F in ex.automorphism_candidates() if "*xi" in F.name]
        assert fxi and min(invariance_residual(F, ex.contact, s) for F in fxi) > 1e-3

    def test_needs_structure(self, example):
        ex = example("product_t3")
        with pytest.raises(StructureError):
            automorphism_report([], None, ex.foliation, ex.backend, small_sample(ex))
