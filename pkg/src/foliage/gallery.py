"""Named example geometries with their foliations, structures and expected values.

Every expected value records where it comes from: ``"by construction"``
(true because of how the example is built), ``"stated identity"`` (a
statement the library verifies, such as the vanishing of transverse
curvature along leaves) or ``"independent oracle"`` (computed separately,
by hand or by a symbolic routine in the test-suite, and frozen here).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import jet as J
from .chart import Chart, Field, Form, Frame, Sample, SU2Model, _QTABLE, qconj, qmul
from .foliation import Foliation
from .jet import Jet

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Expected:
    value: object
    origin: str
    oracle: str


@dataclass(frozen=True, eq=False)
class ContactData:
    """An almost contact metric structure: Reeb field, its dual one-form and ``phi``.

    ``phi(sample)`` returns ``out[m, i] = (phi e_i)^m``.
    """

    xi: Field
    eta: Form
    phi: Callable[[Sample], Jet]
    name: str = "contact"

    def scaled(self, factor: float) -> "ContactData":
        """Same structure with the Reeb field multiplied by ``factor`` (negative control)."""
        return ContactData(self.xi.scale(factor), self.eta, self.phi, f"{self.name} with xi scaled by {factor:g}")


@dataclass(eq=False)
class GalleryExample:
    """A fully wired example geometry."""

    name: str
    description: str
    backend: object
    foliation: Foliation
    expected: dict
    notes: str
    harmonic: bool
    transverse_flat: bool
    ricci_positive: bool
    form_candidates: Callable[[int], tuple]
    field_candidates: Callable[[int], tuple]
    grid_points: Callable[[int], np.ndarray]
    default_cutoff: int = 2
    contact: ContactData | None = None
    three_contact: tuple | None = None
    automorphism_candidates: Callable[[], tuple] | None = None
    foliate_fields: Callable[[np.random.Generator, int], list] | None = None
    non_foliate_field: Field | None = None
    flags: tuple = ()
    resolution: int = 32
    divergence_resolution: int | None = None

    @property
    def dim(self) -> int:
        return self.backend.dim

    @property
    def rank(self) -> int:
        return self.foliation.rank

    @property
    def codim(self) -> int:
        return self.foliation.codim

    def sample_points(self, seed: int = 0, grid: int = 16, extra: int = 32) -> np.ndarray:
        """Deterministic transverse grid plus seeded random points."""
        rng = np.random.default_rng(seed)
        pts = self.grid_points(grid)
        if not self.backend.has_model:
            return pts
        return np.concatenate([pts, self.backend.random_points(rng, extra)], axis=0)

    def sample(self, seed: int = 0, order: int = 2, grid: int = 16, extra: int = 32) -> Sample:
        return self.backend.sample(self.sample_points(seed, grid, extra), order)

    def random_sample(self, seed: int, count: int, order: int = 2) -> Sample:
        rng = np.random.default_rng(seed)
        return self.backend.sample(self.backend.random_points(rng, count) if self.backend.has_model
                                   else np.zeros((count, self.dim)), order)


# -- shared helpers -------------------------------------------------------------------------


def _random_tensor(s: Sample, rng: np.random.Generator, shape: tuple, scale: float, trig: bool) -> Jet:
    """Quadratic polynomial in the position jet (plus an optional sine term), sample-wise coefficients."""
    p, m = s.pos.shape[0], s.size
    pos = s.pos
    a = s.per_sample(rng.standard_normal((m,) + shape) * scale)
    b = s.per_sample(rng.standard_normal((m,) + shape + (p,)) * scale)
    c = s.per_sample(rng.standard_normal((m,) + shape + (p, p)) * scale * 0.5)
    t = "".join(chr(97 + i) for i in range(len(shape)))
    out = a + J.einsum(f"{t}y,y->{t}", b, pos) + J.einsum(f"{t}yz,y,z->{t}", c, pos, pos)
    if trig:
        w = s.per_sample(rng.standard_normal((m, p)))
        amp = s.per_sample(rng.standard_normal((m,) + shape) * scale)
        out = out + amp * J.sin(J.einsum("y,y->", w, pos)).expand(len(shape))
    return out


def random_polynomial_field(seed: int, scale: float = 1.0, name: str = "random field") -> Field:
    """Random vector field, a different one at every sample point (deterministic in ``seed``)."""
    return Field(lambda s: _random_tensor(s, np.random.default_rng(seed), (s.n,), scale, False), name)


def random_form(seed: int, degree: int, trig: bool = True, name: str = "random form") -> Form:
    """Random polynomial/trigonometric k-form, a different one at every sample point."""
    def fn(s):
        return _random_tensor(s, np.random.default_rng(seed), (s.n,) * degree, 1.0, trig)
    return Form(degree, fn, name)


def fourier_modes(cutoff: int, naxes: int) -> list:
    """Integer frequency vectors with entries in ``[-cutoff, cutoff]``, one per +/- pair."""
    modes = []
    for k in itertools.product(range(-cutoff, cutoff + 1), repeat=naxes):
        nz = [v for v in k if v != 0]
        if not nz or nz[0] > 0:
            modes.append(k)
    return modes


def fourier_functions(cutoff: int, axes: Sequence[int]) -> list:
    """Real trigonometric functions ``cos``/``sin`` of ``2 pi k . x`` on the chosen axes."""
    out = []
    for k in fourier_modes(cutoff, len(axes)):
        def phase(s, k=k):
            return sum((s.pos[a] * (TWO_PI * kk) for a, kk in zip(axes, k) if kk), s.constant(0.0))
        if not any(k):
            out.append(Form.function(lambda s: s.constant(1.0), "1"))
            continue
        out.append(Form.function(lambda s, ph=phase: J.cos(ph(s)), f"cos{k}"))
        out.append(Form.function(lambda s, ph=phase: J.sin(ph(s)), f"sin{k}"))
    return out


def _times_constant(funcs: Sequence[Form], comps: np.ndarray, label: str, kind: str):
    comps = np.asarray(comps, dtype=float)
    out = []
    for f in funcs:
        def fn(s, f=f):
            return f(s).expand(comps.ndim) * s.constant(comps)
        if kind == "field":
            out.append(Field(fn, f"{f.name}*{label}"))
        else:
            out.append(Form(comps.ndim, fn, f"{f.name}*{label}"))
    return out


def _times_field(funcs: Sequence[Form], vec: Callable[[Sample], Jet], label: str, kind: str,
                 degree: int = 1):
    out = []
    for f in funcs:
        def fn(s, f=f):
            v = vec(s)
            return f(s).expand(v.ndim) * v
        out.append(Field(fn, f"{f.name}*{label}") if kind == "field" else Form(degree, fn, f"{f.name}*{label}"))
    return out


def _grid(m: int, q: int) -> np.ndarray:
    t = (np.arange(m) + 0.5) / m
    return np.stack([g.reshape(-1) for g in np.meshgrid(*([t] * q), indexing="ij")], axis=1)


# -- product_t3 ------------------------------------------------------------------------------


def product_t3() -> GalleryExample:
    backend = Chart(3, lambda x: np.eye(3), name="flat T^3")
    e = np.eye(3)
    fol = Foliation([Field.constant(e[0], "d/dx")], [Field.constant(e[1], "d/dy"), Field.constant(e[2], "d/dz")],
                    "x-circles")
    dy, dz = e[1], e[2]
    dydz = np.outer(dy, dz) - np.outer(dz, dy)

    def forms(cutoff):
        f = fourier_functions(cutoff, (1, 2))
        return (f, _times_constant(f, dy, "dy", "form") + _times_constant(f, dz, "dz", "form"),
                _times_constant(f, dydz, "dy^dz", "form"), f"Fourier modes |k| <= {cutoff} in (y, z)")

    def fields(cutoff):
        f = fourier_functions(cutoff, (1, 2))
        return (_times_constant(f, dy, "d/dy", "field") + _times_constant(f, dz, "d/dz", "field"),
                f"Fourier fields |k| <= {cutoff} in (y, z)")

    def grid(m):
        g = _grid(m, 2)
        return np.column_stack([np.full(len(g), 0.37), g])

    def foliate(rng, count):
        out = []
        for i in range(count):
            a, b, c = rng.standard_normal((3, 5))
            def fn(s, a=a, b=b, c=c):
                x, y, z = s.pos[0], s.pos[1], s.pos[2]
                u = a[0] + a[1] * J.cos(TWO_PI * y) + a[2] * J.sin(TWO_PI * (y + z)) + a[3] * J.cos(TWO_PI * 2 * z)
                v = b[0] + b[1] * J.sin(TWO_PI * z) + b[2] * J.cos(TWO_PI * (y - z)) + b[3] * J.sin(TWO_PI * 2 * y)
                w = c[0] + c[1] * J.cos(TWO_PI * x) + c[2] * J.sin(TWO_PI * (x + y))
                return J.stack([w, u, v])
            out.append(Field(fn, f"foliate field {i}"))
        return out

    expected = {
        "q": Expected(2, "by construction", "codimension of the x-circles"),
        "b1": Expected(2, "independent oracle", "basic cohomology of the x-circle foliation is H(T^2)"),
        "iso": Expected(2, "independent oracle", "Killing fields of the flat 2-torus: d/dy, d/dz"),
        "parallel": Expected(2, "independent oracle", "parallel fields of the flat 2-torus"),
        "basic_harmonic": Expected(2, "independent oracle", "harmonic one-forms of the flat 2-torus"),
        "ricci_transverse_factor": Expected(0.0, "by construction", "flat metric"),
        "mean_curvature": Expected(0.0, "by construction", "leaves are closed geodesics"),
        "volume": Expected(1.0, "by construction", "unit cube"),
    }
    return GalleryExample(
        "product_t3", "flat 3-torus foliated by the circles in x", backend, fol, expected,
        "Unit-period torus, metric dx^2 + dy^2 + dz^2; all candidates are x-independent",
        harmonic=True, transverse_flat=True, ricci_positive=False,
        form_candidates=forms, field_candidates=fields, grid_points=grid,
        foliate_fields=foliate,
        non_foliate_field=Field(lambda s: J.stack([s.constant(0.0), J.cos(TWO_PI * s.pos[0]), s.constant(0.0)]),
                                "cos(2 pi x) d/dy"),
    )


# -- kronecker -------------------------------------------------------------------------------


def kronecker(slope: float = math.sqrt(2.0)) -> GalleryExample:
    """Linear foliation of the flat 2-torus by lines of the given slope."""
    slope = float(slope)
    flags = ()
    frac = Fraction(slope).limit_denominator(1000)
    if abs(float(frac) - slope) < 1e-12:
        flags = ("rational slope: leaves are closed",)
    backend = Chart(2, lambda x: np.eye(2), name="flat T^2")
    leaf = np.array([1.0, slope])
    normal = np.array([-slope, 1.0])
    fol = Foliation([Field.constant(leaf, "leaf direction")], [Field.constant(normal, "normal")],
                    f"lines of slope {slope:g}")
    e = np.eye(2)
    dxdy = np.outer(e[0], e[1]) - np.outer(e[1], e[0])

    def forms(cutoff):
        f = fourier_functions(cutoff, (0, 1))
        return (f, _times_constant(f, e[0], "dx", "form") + _times_constant(f, e[1], "dy", "form"),
                _times_constant(f, dxdy, "dx^dy", "form"),
                f"basic part of Fourier modes |k| <= {cutoff} on T^2")

    def fields(cutoff):
        f = fourier_functions(cutoff, (0, 1))
        return (_times_constant(f, e[0], "d/dx", "field") + _times_constant(f, e[1], "d/dy", "field"),
                f"transverse foliate part of Fourier fields |k| <= {cutoff}")

    direction = normal / np.linalg.norm(normal)

    def grid(m):
        t = (np.arange(m) + 0.5) / m
        pts = np.array([0.1, 0.2]) + np.outer(t, direction)
        return backend.reduce(pts)

    def foliate(rng, count):
        out = []
        for i in range(count):
            a = rng.standard_normal(5)
            def fn(s, a=a):
                x, y = s.pos[0], s.pos[1]
                f = a[1] * J.cos(TWO_PI * x) + a[2] * J.sin(TWO_PI * (x + 2 * y)) + a[3] * J.cos(TWO_PI * y) + a[4]
                return s.constant(a[0] * normal) + f.expand(1) * s.constant(leaf)
            out.append(Field(fn, f"foliate field {i}"))
        return out

    expected = {
        "q": Expected(1, "by construction", "codimension one"),
        "b1": Expected(1, "independent oracle", "basic forms are constants and constant multiples of the unit conormal"),
        "iso": Expected(1, "independent oracle", "constant multiples of the unit normal"),
        "parallel": Expected(1, "independent oracle", "constant multiples of the unit normal"),
        "basic_harmonic": Expected(1, "independent oracle", "constant multiples of the unit normal"),
        "ricci_transverse_factor": Expected(0.0, "by construction", "flat metric"),
        "mean_curvature": Expected(0.0, "by construction", "straight lines in a flat torus"),
        "volume": Expected(1.0, "by construction", "unit square"),
        "project_dy": Expected([-slope / (1 + slope**2), 1 / (1 + slope**2)], "independent oracle",
                               "Gram-Schmidt of d/dy against the leaf direction"),
        "gT_dy_dy": Expected(1 / (1 + slope**2), "independent oracle", "squared norm of the projection of d/dy"),
    }
    return GalleryExample(
        "kronecker", f"Kronecker foliation of T^2 with slope {slope:g}", backend, fol, expected,
        "Dense leaves for irrational slope, so no global quotient exists; basic candidates are "
        "extracted from Fourier modes as a nullspace", harmonic=True, transverse_flat=True,
        ricci_positive=False, form_candidates=forms, field_candidates=fields, grid_points=grid,
        foliate_fields=foliate, flags=flags,
    )


# -- hopf ------------------------------------------------------------------------------


_UNITS = np.eye(4)[1:]


def hopf_projection(s: Sample) -> Jet:
    """``pi(q) = q i conj(q)`` as an imaginary quaternion, shape ``(3,)``."""
    def build():
        q = s.pos
        p = qmul(qmul(q, s.constant(_UNITS[0])), qconj(q))
        return p[1:]
    return s.memo("hopf_pi", build)


def hopf_projection_derivative(s: Sample) -> Jet:
    """``D[a, j] = e_j(pi_a)`` computed in closed form (keeps full jet order)."""
    def build():
        q = s.pos
        cols = []
        for j in range(3):
            u = _UNITS[j]
            comm = qmul(u, _UNITS[0]) - qmul(_UNITS[0], u)
            cols.append(qmul(qmul(q, s.constant(comm)), qconj(q))[1:])
        return J.stack(cols, 1)
    return s.memo("hopf_dpi", build)


def right_invariant(s: Sample, v: int) -> Jet:
    """Frame components of ``q -> u_v q``: the imaginary part of ``conj(q) u_v q``."""
    def build():
        q = s.pos
        return qmul(qmul(qconj(q), s.constant(_UNITS[v])), q)[1:]
    return s.memo(("right_invariant", v), build)


def monomial_exponents(degree: int, nvars: int = 3, minimum: int = 0) -> list:
    out = []
    for total in range(minimum, degree + 1):
        for alpha in itertools.product(range(total + 1), repeat=nvars):
            if sum(alpha) == total:
                out.append(alpha)
    return out


def _monomial(values: Jet, alpha) -> Jet:
    out = None
    for a, k in enumerate(alpha):
        for _ in range(k):
            out = values[a] if out is None else out * values[a]
    return out


def hopf_monomial(alpha) -> Form:
    def fn(s):
        m = _monomial(hopf_projection(s), alpha)
        return s.constant(1.0) if m is None else m
    return Form.function(fn, "pi^" + "".join(map(str, alpha)))


def hopf_monomial_differential(alpha) -> Callable[[Sample], Jet]:
    """Frame components of ``d(pi^alpha)`` by the chain rule (full jet order)."""
    def fn(s):
        pi = hopf_projection(s)
        dpi = hopf_projection_derivative(s)
        total = s.constant(np.zeros(3))
        for a, k in enumerate(alpha):
            if k == 0:
                continue
            lower = list(alpha)
            lower[a] -= 1
            m = _monomial(pi, lower)
            coeff = s.constant(float(k)) if m is None else m * float(k)
            total = total + coeff.expand(1) * dpi[a]
        return total
    return fn


def hopf() -> GalleryExample:
    backend = Frame(SU2Model.structure_constants, np.eye(3), SU2Model.total_volume, model=SU2Model,
                    name="unit S^3 = SU(2)")
    e = np.eye(3)
    fol = Foliation([Field.constant(e[0], "e1")], [Field.constant(e[1], "e2"), Field.constant(e[2], "e3")],
                    "Hopf circles")
    psi = np.outer(e[1], e[2]) - np.outer(e[2], e[1])
    killing = [lambda s, v=v: right_invariant(s, v) * s.constant([0.0, 1.0, 1.0]) for v in range(3)]

    def forms(cutoff):
        f0 = [hopf_monomial(a) for a in monomial_exponents(cutoff)]
        f1 = [Form(1, hopf_monomial_differential(a), f"d(pi^{''.join(map(str, a))})")
              for a in monomial_exponents(cutoff, minimum=1)]
        low = [hopf_monomial(a) for a in monomial_exponents(cutoff - 1)]
        for v, kv in enumerate(killing):
            f1 += _times_field(low, kv, f"K{v + 1}", "form")
        f2 = _times_constant(f0, psi, "e2^e3", "form")
        return f0, f1, f2, f"polynomials of degree <= {cutoff} in the Hopf projection"

    def fields(cutoff):
        out = [Field(hopf_monomial_differential(a), f"grad(pi^{''.join(map(str, a))})")
               for a in monomial_exponents(cutoff, minimum=1)]
        low = [hopf_monomial(a) for a in monomial_exponents(cutoff - 1)]
        for v, kv in enumerate(killing):
            out += _times_field(low, kv, f"K{v + 1}", "field")
        return out, f"gradients and rotation multiples, degree <= {cutoff}"

    def grid(m):
        a = (np.arange(m) + 0.5) / m * (math.pi / 2)
        b = TWO_PI * np.arange(m) / m
        aa, bb = np.meshgrid(a, b, indexing="ij")
        aa, bb = aa.reshape(-1), bb.reshape(-1)
        return np.stack([np.cos(aa), np.zeros_like(aa), np.sin(aa) * np.cos(bb), np.sin(aa) * np.sin(bb)], axis=1)

    def phi(s):
        return s.constant(np.array([[0.0, 0, 0], [0, 0, -1], [0, 1, 0]]))

    contact = ContactData(Field.constant(e[0], "e1"), Form.constant(e[0], "e^1"), phi, "standard Sasaki")

    def automorphisms():
        cands = [Field.constant(e[i], f"e{i + 1}") for i in range(3)]
        cands += [Field(lambda s, v=v: right_invariant(s, v), f"R{v + 1}") for v in range(3)]
        cands += [Field(lambda s, a=a: hopf_projection(s)[a].expand(1) * s.constant(e[0]), f"pi{a + 1}*xi")
                  for a in range(3)]
        return tuple(cands)

    def foliate(rng, count):
        basis, _ = fields(2)
        out = []
        for i in range(count):
            c = rng.standard_normal(len(basis))
            alpha = monomial_exponents(2)
            d = rng.standard_normal((len(alpha), 4))
            def fn(s, c=c, d=d):
                x = sum((b(s) * float(ci) for b, ci in zip(basis, c)), s.constant(np.zeros(3)))
                leafcoef = s.constant(0.0)
                for k, al in enumerate(alpha):
                    m = _monomial(s.pos, al)
                    leafcoef = leafcoef + (s.constant(1.0) if m is None else m) * float(d[k, 0])
                return x + leafcoef.expand(1) * s.constant(e[0])
            out.append(Field(fn, f"foliate field {i}"))
        return out

    expected = {
        "q": Expected(2, "by construction", "Hopf fibration S^3 -> S^2"),
        "b1": Expected(0, "independent oracle", "H^1(S^2) = 0"),
        "iso": Expected(3, "independent oracle", "so(3) acting on S^2(1/2)"),
        "parallel": Expected(0, "independent oracle", "no parallel fields on S^2"),
        "basic_harmonic": Expected(0, "independent oracle", "no harmonic one-forms on S^2"),
        "ricci_transverse_factor": Expected(4.0, "independent oracle",
                                            "O'Neill: K_base = K_total + 3/4 |[X,Y]^v|^2 = 1 + 3 = 4, base S^2(1/2)"),
        "transverse_sectional": Expected(4.0, "independent oracle", "round sphere of radius 1/2"),
        "sectional": Expected(1.0, "independent oracle", "unit round S^3"),
        "eta_einstein": Expected((2.0, 0.0), "independent oracle", "Einstein: Ric = (n - 1) g on the unit S^3"),
        "volume": Expected(2 * math.pi**2, "independent oracle", "volume of the unit 3-sphere"),
        "aut_dim": Expected(4, "independent oracle", "u(2): right-invariant su(2) plus the Reeb field"),
        "mean_curvature": Expected(0.0, "independent oracle", "Hopf circles are great circles"),
    }
    return GalleryExample(
        "hopf", "Hopf fibration of the unit 3-sphere", backend, fol, expected,
        "Left-invariant frame e_j(q) = q u_j of SU(2) with [e1, e2] = 2 e3; the leaves are the orbits "
        "of e1 and basic functions are polynomials in pi(q) = q i conj(q)",
        harmonic=True, transverse_flat=False, ricci_positive=True,
        form_candidates=forms, field_candidates=fields, grid_points=grid, contact=contact,
        automorphism_candidates=automorphisms, foliate_fields=foliate,
        # divergence integrands are polynomials of low degree in q, integrated exactly at 16
        divergence_resolution=16,
    )


# -- heisenberg3 ---------------------------------------------------------------------------


def heisenberg_metric(x):
    u = x[0]
    return [[0.5, 0.0, 0.0], [0.0, u * u + 0.5, -u], [0.0, -u, 1.0]]


def heisenberg3() -> GalleryExample:
    """Compact Heisenberg nilmanifold, metric (dx^2 + dy^2)/2 + (dz - x dy)^2.

    The lattice identification ``(x, y, z) ~ (x + 1, y, z + y)`` is twisted, so
    the chart is not reduced periodically; all integrands used are
    invariant and the unit cube is a fundamental domain.
    """
    backend = Chart(3, heisenberg_metric, periodic=(False, False, False), name="Heisenberg nilmanifold")
    e = np.eye(3)
    xi = Field.constant(e[2], "xi = d/dz")

    def e2_vec(s):
        return J.stack([s.constant(0.0), s.constant(1.0), s.pos[0]])

    E1 = Field.constant(e[0], "E1 = d/dx")
    E2 = Field(e2_vec, "E2 = d/dy + x d/dz")
    fol = Foliation([xi], [E1, E2], "Reeb lines")
    dxdy = np.outer(e[0], e[1]) - np.outer(e[1], e[0])

    def forms(cutoff):
        f = fourier_functions(cutoff, (0, 1))
        return (f, _times_constant(f, e[0], "dx", "form") + _times_constant(f, e[1], "dy", "form"),
                _times_constant(f, dxdy, "dx^dy", "form"), f"Fourier modes |k| <= {cutoff} in (x, y)")

    def fields(cutoff):
        f = fourier_functions(cutoff, (0, 1))
        return (_times_constant(f, e[0], "E1", "field") + _times_field(f, e2_vec, "E2", "field"),
                f"Fourier multiples of E1, E2, |k| <= {cutoff}")

    def grid(m):
        g = _grid(m, 2)
        return np.column_stack([g, np.full(len(g), 0.29)])

    def eta(s):
        return J.stack([s.constant(0.0), -s.pos[0], s.constant(1.0)])

    def phi(s):
        x = s.pos[0]
        z = s.constant(0.0)
        return J.array([[z, -1.0, z], [1.0, z, z], [x, z, z]], like=s.pos)

    contact = ContactData(xi, Form(1, eta, "dz - x dy"), phi, "Heisenberg Sasaki")

    def automorphisms():
        f = fourier_functions(1, (0, 1))[1:3]
        cands = [E1, E2, xi] + [Field(lambda s, g=g: g(s).expand(1) * s.constant(e[2]), f"{g.name}*xi") for g in f]
        return tuple(cands)

    def foliate(rng, count):
        out = []
        for i in range(count):
            a, b, c = rng.standard_normal((3, 4))
            def fn(s, a=a, b=b, c=c):
                x, y = s.pos[0], s.pos[1]
                u = a[0] + a[1] * J.cos(TWO_PI * x) + a[2] * J.sin(TWO_PI * (x - y)) + a[3] * J.cos(TWO_PI * 2 * y)
                v = b[0] + b[1] * J.sin(TWO_PI * y) + b[2] * J.cos(TWO_PI * (x + y)) + b[3] * J.sin(TWO_PI * 2 * x)
                w = c[0] + c[1] * J.cos(TWO_PI * x) + c[2] * J.sin(TWO_PI * y)
                return u.expand(1) * s.constant(e[0]) + v.expand(1) * e2_vec(s) + w.expand(1) * s.constant(e[2])
            out.append(Field(fn, f"foliate field {i}"))
        return out

    expected = {
        "q": Expected(2, "by construction", "circle bundle over T^2"),
        "b1": Expected(2, "independent oracle", "basic cohomology is H(T^2)"),
        "iso": Expected(2, "independent oracle", "Killing fields of the flat base torus"),
        "parallel": Expected(2, "independent oracle", "parallel fields of the flat base torus"),
        "basic_harmonic": Expected(2, "independent oracle", "harmonic one-forms of the flat base torus"),
        "ricci_transverse_factor": Expected(0.0, "independent oracle", "flat transverse torus"),
        "ricci_reeb": Expected(2.0, "independent oracle", "symbolic curvature computation"),
        "eta_einstein": Expected((-2.0, 4.0), "independent oracle", "symbolic Ricci tensor of the chart metric"),
        "d_eta": Expected("-dx^dy", "independent oracle", "symbolic exterior derivative of dz - x dy"),
        "aut_bound": Expected(3, "stated identity", "b1 + rank E"),
        "aut_dim": Expected(1, "independent oracle", "only the Reeb field among the candidates"),
        "mean_curvature": Expected(0.0, "independent oracle", "Reeb orbits are geodesics"),
        "volume": Expected(0.5, "independent oracle", "sqrt(det g) = 1/2 on the unit cube"),
    }
    return GalleryExample(
        "heisenberg3", "Heisenberg nilmanifold with its Sasaki structure", backend, fol, expected,
        "Sasaki normalization: g = (dx^2 + dy^2)/2 + eta^2 with eta = dz - x dy gives d eta = 2 Phi",
        harmonic=True, transverse_flat=True, ricci_positive=False,
        form_candidates=forms, field_candidates=fields, grid_points=grid, contact=contact,
        automorphism_candidates=automorphisms, foliate_fields=foliate,
    )


# -- warped_nonharmonic -------------------------------------------------------------------


def warp(x):
    return 2.0 + J.sin(TWO_PI * x)


def warped_nonharmonic() -> GalleryExample:
    """Torus with metric dx^2 + f(x)^2 dy^2 foliated by the y-circles; leaves are not minimal."""
    backend = Chart(2, lambda x: [[1.0, 0.0], [0.0, warp(x[0]) ** 2]], name="warped T^2")
    e = np.eye(2)
    fol = Foliation([Field.constant(e[1], "d/dy")], [Field.constant(e[0], "d/dx")], "y-circles")

    def forms(cutoff):
        f = fourier_functions(cutoff, (0,))
        return f, _times_constant(f, e[0], "dx", "form"), [], f"Fourier modes |k| <= {cutoff} in x"

    def fields(cutoff):
        f = fourier_functions(cutoff, (0,))
        return _times_constant(f, e[0], "d/dx", "field"), f"Fourier multiples of d/dx, |k| <= {cutoff}"

    def grid(m):
        t = (np.arange(m) + 0.5) / m
        return np.column_stack([t, np.full(m, 0.41)])

    def foliate(rng, count):
        out = []
        for i in range(count):
            a = rng.standard_normal(3)
            out.append(Field(lambda s, a=a: J.stack([a[0] + a[1] * J.sin(TWO_PI * s.pos[0]),
                                                     a[2] * J.cos(TWO_PI * s.pos[1])]), f"foliate field {i}"))
        return out

    expected = {
        "q": Expected(1, "by construction", "codimension one"),
        "harmonic": Expected(False, "independent oracle", "H = -(f'/f) d/dx is nonzero"),
        "mean_curvature_sup": Expected(TWO_PI / math.sqrt(3.0), "independent oracle",
                                       "max of 2 pi |cos(2 pi x)| / (2 + sin(2 pi x))"),
        "b1": Expected(1, "independent oracle", "basic forms a(x) dx on the circle"),
        "volume": Expected(2.0, "independent oracle", "integral of 2 + sin(2 pi x) over the unit square"),
    }
    return GalleryExample(
        "warped_nonharmonic", "warped torus whose leaves are not minimal", backend, fol, expected,
        "Negative control: harmonicity-gated statements must report not-applicable",
        harmonic=False, transverse_flat=True, ricci_positive=False,
        form_candidates=forms, field_candidates=fields, grid_points=grid, foliate_fields=foliate,
    )


# -- quat_heisenberg7 ------------------------------------------------------------------------


def left_multiplication(v: int) -> np.ndarray:
    """Matrix of ``x -> u_v x`` on quaternions ``(w, x, y, z)``."""
    return _QTABLE[:, v + 1, :].copy()


def quaternionic_heisenberg_data(alpha: float = 1.0):
    """Structure constants and the three structures of the quaternionic Heisenberg algebra.

    Horizontal indices 0..3 carry R^4 = H, vertical indices 4..6 the Reeb
    fields; ``[X, Y] = -2 alpha sum_i Phi_i(X, Y) xi_i`` for horizontal X, Y and
    the Reeb fields are central, which is the degenerate case.
    """
    n = 7
    c = np.zeros((n, n, n))
    phis = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        p = np.zeros((n, n))
        p[:4, :4] = left_multiplication(i)
        # phi_i xi_j = xi_k, phi_i xi_k = -xi_j
        p[4 + k, 4 + j] = 1.0
        p[4 + j, 4 + k] = -1.0
        phis.append(p)
        c[:4, :4, 4 + i] = -2.0 * alpha * p[:4, :4]
    return c, phis


def quat_heisenberg7() -> GalleryExample:
    c, phis = quaternionic_heisenberg_data()
    backend = Frame(c, np.eye(7), 1.0, model=None, name="quaternionic Heisenberg algebra")
    e = np.eye(7)
    fol = Foliation([Field.constant(e[4 + i], f"xi{i + 1}") for i in range(3)],
                    [Field.constant(e[a], f"e{a}") for a in range(4)], "Reeb 3-leaves")
    structures = tuple(
        ContactData(Field.constant(e[4 + i], f"xi{i + 1}"), Form.constant(e[4 + i], f"eta{i + 1}"),
                    (lambda s, p=phis[i]: s.constant(p)), f"structure {i + 1}")
        for i in range(3))

    def forms(cutoff):
        one = [Form.function(lambda s: s.constant(1.0), "1")]
        f1 = [Form.constant(e[a], f"e^{a}") for a in range(4)]
        f2 = [Form.constant(np.outer(e[a], e[b]) - np.outer(e[b], e[a]), f"e^{a}^e^{b}")
              for a, b in itertools.combinations(range(4), 2)]
        return one, f1, f2, "invariant basic forms"

    def fields(cutoff):
        return [Field.constant(e[a], f"e{a}") for a in range(4)], "invariant horizontal fields"

    def automorphisms():
        return tuple(Field.constant(e[a], f"e{a}") for a in range(7))

    def foliate(rng, count):
        return [Field.constant(rng.standard_normal(7), f"invariant field {i}") for i in range(count)]

    expected = {
        "q": Expected(4, "by construction", "horizontal R^4"),
        "b1": Expected(4, "independent oracle", "invariant basic cohomology of the flat base T^4"),
        "iso": Expected(4, "independent oracle", "horizontal translations"),
        "parallel": Expected(4, "independent oracle", "horizontal translations"),
        "basic_harmonic": Expected(4, "independent oracle", "horizontal translations"),
        "alpha_delta": Expected((1.0, 0.0), "by construction", "brackets chosen with alpha = 1, central Reeb fields"),
        "aut_dim": Expected(3, "independent oracle", "the central Reeb fields"),
        "aut_bound": Expected(7, "stated identity", "b1 + rank E"),
        "ricci_transverse_factor": Expected(0.0, "independent oracle", "flat base"),
        "mean_curvature": Expected(0.0, "independent oracle", "invariant Reeb foliation"),
    }
    return GalleryExample(
        "quat_heisenberg7", "quaternionic Heisenberg algebra with degenerate 3-structure", backend, fol,
        expected, "Frame without group model: only invariant data at the identity is evaluated; "
        "the compact quotient is a T^3-bundle over T^4", harmonic=True, transverse_flat=True,
        ricci_positive=False, form_candidates=forms, field_candidates=fields,
        grid_points=lambda m: np.zeros((1, 7)), three_contact=structures,
        automorphism_candidates=automorphisms, foliate_fields=foliate, default_cutoff=0,
    )


# -- registry -------------------------------------------------------------------------------


_BUILDERS = {
    "product_t3": product_t3,
    "kronecker": kronecker,
    "hopf": hopf,
    "heisenberg3": heisenberg3,
    "warped_nonharmonic": warped_nonharmonic,
    "quat_heisenberg7": quat_heisenberg7,
}

NAMES = tuple(_BUILDERS)


def construct(name: str, **params) -> GalleryExample:
    """Build a named example.

    Raises:
        KeyError: Unknown name.
        TypeError: Parameters the example does not take.
    """
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise KeyError(f"unknown example {name!r}; known: {', '.join(NAMES)}") from None
    return builder(**params)


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if isinstance(value, list):
        return [_plain(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def catalogue() -> list:
    """Machine-readable list of examples with their expected-value tables, in stable order."""
    out = []
    for name in NAMES:
        ex = construct(name)
        out.append({
            "name": name,
            "description": ex.description,
            "dim": ex.dim,
            "rank": ex.rank,
            "codim": ex.codim,
            "harmonic": ex.harmonic,
            "flags": list(ex.flags),
            "expected": {k: {"value": _plain(v.value), "origin": v.origin, "oracle": v.oracle}
                         for k, v in ex.expected.items()},
        })
    return out
