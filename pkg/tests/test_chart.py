import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from foliage import jet as J
from foliage.chart import (Chart, Field, Form, Frame, SU2Model, alternate, antisymmetry_residual, exterior_derivative,
                           exterior_derivative_values, form_inner, integrate, interior, jacobi_residual, lie_bracket,
                           qconj, qmul, shuffle_sum, sparse_form, sparse_wedge, wedge)
from foliage.gallery import heisenberg_metric, random_form

X, Y, Z = sp.symbols("x y z")
SYMS = (X, Y, Z)


def flat3():
    return Chart(3, lambda x: np.eye(3))


def su2():
    return Frame(SU2Model.structure_constants, np.eye(3), SU2Model.total_volume, model=SU2Model)


def jet_form(exprs):
    """A chart form whose components are the given sympy expressions."""
    fns = [sp.lambdify(SYMS, e, modules=[{"sin": J.sin, "cos": J.cos, "exp": J.exp}]) for e in exprs]

    def fn(s):
        x = s.pos
        return J.stack([J.as_jet(f(x[0], x[1], x[2]), x[0]) for f in fns])
    return Form(1, fn, "symbolic")


class TestBrackets:
    def test_su2_frame(self):
        c = SU2Model.structure_constants
        assert c[0, 1, 2] == 2 and c[1, 2, 0] == 2 and c[2, 0, 1] == 2
        assert c[1, 0, 2] == -2
        assert jacobi_residual(c) == 0 and antisymmetry_residual(c) == 0

    def test_broken_jacobi_is_detected(self):
        c = np.zeros((3, 3, 3))
        c[0, 1, 1], c[1, 0, 1] = 1, -1
        c[1, 2, 0], c[2, 1, 0] = 1, -1
        assert jacobi_residual(c) > 0.5

    def test_quaternion_model_realizes_frame(self):
        # e_j(q) = q u_j, so [e_1, e_2] = q (ij - ji) = 2 q k
        i, j, k = np.eye(4)[1:]
        assert np.allclose(qmul(i, j) - qmul(j, i), 2 * k)
        assert np.allclose(qmul(i, qconj(i)), [1, 0, 0, 0])

    def test_chart_bracket_against_sympy(self):
        xs = [Y * Z, sp.sin(X), X**2]
        ys = [Z, X * Y, sp.cos(Y)]
        expected = [sum(xs[j] * sp.diff(ys[i], SYMS[j]) - ys[j] * sp.diff(xs[i], SYMS[j]) for j in range(3))
                    for i in range(3)]
        pts = np.random.default_rng(0).random((10, 3))
        s = flat3().sample(pts)
        br = lie_bracket(Field(jet_form(xs).fn), Field(jet_form(ys).fn), s)
        exact = np.stack([sp.lambdify(SYMS, e)(*pts.T) * np.ones(10) for e in expected], 1)
        np.testing.assert_allclose(br.v, exact, atol=1e-12)

    def test_constant_frame_bracket(self):
        s = su2().sample(SU2Model.random_points(np.random.default_rng(1), 4))
        e = np.eye(3)
        br = lie_bracket(Field.constant(e[0]), Field.constant(e[1]), s)
        np.testing.assert_allclose(br.v, np.tile(2 * e[2], (4, 1)))


class TestExteriorDerivative:
    def test_heisenberg_contact_form(self):
        # eta = dz - x dy; oracle d eta = d(-x) ^ dy = -dx ^ dy
        eta = [sp.Integer(0), -X, sp.Integer(1)]
        d = [[sp.diff(eta[j], SYMS[i]) - sp.diff(eta[i], SYMS[j]) for j in range(3)] for i in range(3)]
        assert d[0][1] == -1 and d[0][2] == 0 and d[1][2] == 0
        backend = Chart(3, heisenberg_metric, periodic=(False,) * 3)
        s = backend.sample(np.random.default_rng(2).random((6, 3)))
        w = Form(1, lambda s: J.stack([s.constant(0.0), -s.pos[0], s.constant(1.0)]))
        dw = exterior_derivative(w, s).v
        np.testing.assert_allclose(dw, np.tile(np.array(d, dtype=float), (6, 1, 1)), atol=1e-14)

    def test_one_form_against_sympy(self):
        comps = [X * Y * Z, sp.sin(X + Z), sp.exp(Y) * X]
        pts = np.random.default_rng(3).random((8, 3))
        s = flat3().sample(pts)
        dw = exterior_derivative(jet_form(comps), s).v
        for i in range(3):
            for j in range(3):
                e = sp.diff(comps[j], SYMS[i]) - sp.diff(comps[i], SYMS[j])
                np.testing.assert_allclose(dw[:, i, j], sp.lambdify(SYMS, e)(*pts.T) * np.ones(8), atol=1e-12)

    def test_invariant_coframe_on_su2(self):
        # d theta(X, Y) = -theta([X, Y]) for invariant theta: d e^1 = -2 e^2 ^ e^3
        s = su2().sample(SU2Model.random_points(np.random.default_rng(4), 3))
        de = exterior_derivative(Form.constant(np.eye(3)[0]), s).v
        assert np.allclose(de[:, 1, 2], -2) and np.allclose(de[:, 2, 1], 2)
        assert np.allclose(de[:, 0, :], 0)

    def test_top_degree_rejected(self):
        s = flat3().sample(np.zeros((1, 3)))
        with pytest.raises(ValueError):
            exterior_derivative_values(s.constant(np.zeros((3, 3, 3))), 3, s.structure)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10_000), st.integers(0, 1), st.booleans())
    def test_d_squared_vanishes(self, seed, degree, on_group):
        backend = su2() if on_group else flat3()
        s = backend.sample(backend.random_points(np.random.default_rng(seed), 4))
        w = random_form(seed, degree)(s)
        dd = exterior_derivative_values(exterior_derivative_values(w, degree, s.structure), degree + 1,
                                        s.structure)
        assert np.max(np.abs(dd.v)) < 1e-9


class TestAlgebra:
    def test_wedge_determinant_convention(self):
        dx, dy = np.eye(2)
        w = wedge(dx, 1, dy, 1)
        np.testing.assert_allclose(w, [[0, 1], [-1, 0]])

    def test_wedge_antisymmetric_and_sparse_agrees(self):
        rng = np.random.default_rng(5)
        a, b = rng.standard_normal(4), alternate(rng.standard_normal((4, 4)))
        dense = wedge(a, 1, b, 2)
        sa, sb = sparse_form(a[None], 1), sparse_form(b[None], 2)
        sparse = sparse_wedge(sa, sb)
        for idx, val in sparse.items():
            assert np.isclose(dense[idx], val[0])
        np.testing.assert_allclose(wedge(b, 2, a, 1), dense)

    @pytest.mark.parametrize("p,q", [(1, 1), (1, 2), (2, 1), (1, 3), (2, 2)])
    def test_shuffles_match_full_alternation(self, p, q):
        # sums of (alternating p-tensor) x (alternating q-tensor)
        rng = np.random.default_rng(p + 10 * q)
        x = sum(np.multiply.outer(alternate(rng.standard_normal((4,) * p)), alternate(rng.standard_normal((4,) * q)))
                for _ in range(3))
        np.testing.assert_allclose(shuffle_sum(x, p, q), math.comb(p + q, p) * alternate(x), atol=1e-13)

    def test_interior_and_inner(self):
        s = flat3().sample(np.zeros((1, 3)))
        dxdy = s.constant(wedge(np.eye(3)[0], 1, np.eye(3)[1], 1))
        ix = interior(s.constant(np.eye(3)[0]), dxdy)
        np.testing.assert_allclose(ix.v, [[0, 1, 0]])
        assert float(form_inner(dxdy, dxdy, s.metric_inverse)) == pytest.approx(1.0)
        with pytest.raises(ValueError):
            interior(s.constant([1.0, 0, 0]), s.constant(1.0))

    def test_form_degree_checked(self):
        s = flat3().sample(np.zeros((1, 3)))
        with pytest.raises(ValueError):
            Form(2, lambda s: s.constant(np.ones(3)))(s)
        with pytest.raises(ValueError):
            Form.constant(np.ones(3)) + Form.function(lambda s: s.constant(1.0))


class TestQuadrature:
    def test_flat_box(self):
        r = integrate(lambda s: s.constant(1.0), flat3(), 8)
        assert r.value == pytest.approx(1.0) and r.converged

    def test_three_sphere_volume(self):
        r = integrate(lambda s: s.constant(1.0), su2(), 12)
        assert r.value == pytest.approx(2 * math.pi**2, rel=1e-12)

    def test_polynomial_on_sphere(self):
        # int_{S^3} w^2 = vol / 4 by symmetry
        r = integrate(lambda s: s.pos[0] ** 2, su2(), 12)
        assert r.value == pytest.approx(math.pi**2 / 2, rel=1e-10)

    def test_heisenberg_density(self):
        backend = Chart(3, heisenberg_metric, periodic=(False,) * 3)
        assert integrate(lambda s: s.constant(1.0), backend, 8).value == pytest.approx(0.5)

    def test_trig_integrand_exact_on_periodic_grid(self):
        r = integrate(lambda s: J.cos(2 * math.pi * s.pos[0]) ** 2, flat3(), 8)
        assert r.value == pytest.approx(0.5, abs=1e-14)

    def test_modelless_frame_uses_total_volume(self):
        backend = Frame(np.zeros((2, 2, 2)), total_volume=3.0)
        assert integrate(lambda s: s.constant(2.0), backend).value == pytest.approx(6.0)
        with pytest.raises(ValueError):
            backend.position(np.ones((1, 2)))

    def test_model_must_match_brackets(self):
        with pytest.raises(ValueError):
            Frame(np.zeros((3, 3, 3)), model=SU2Model)
