"""Manifold backends, field and form expressions, brackets, d and integration.

Two backends share one interface.  A :class:`Chart` is a box in R^n with a
position-dependent metric and the coordinate frame (all brackets of frame
fields vanish).  A :class:`Frame` is a Lie algebra with structure constants
``c[i, j, k]`` (``[e_i, e_j] = c[i, j, k] e_k``) and a constant metric; fields are
expanded in the invariant frame.  A frame may carry a concrete group model
(currently :class:`SU2Model`) so that non-invariant fields can be sampled and
integrated; without a model only the identity is available and every field
is expected to be invariant.

All tensors are expressed in the backend's frame.  A vector field has
components ``X[k]`` with ``X = X[k] e_k``; a k-form has components
``w[i1, ..., ik] = w(e_i1, ..., e_ik)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import jet as J
from .jet import Jet

# ---------------------------------------------------------------------------------
# exterior algebra helpers on dense tensors


def _perm_sign(perm) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def alternate(t, k: int | None = None):
    """Alternating projection over the last ``k`` tensor axes (all axes by default).

    Works on jets (tensor axes only) and on plain arrays (all axes).
    """
    nd = t.ndim if k is None else k
    lead = t.ndim - nd
    acc = None
    for perm in itertools.permutations(range(nd)):
        axes = tuple(range(lead)) + tuple(lead + p for p in perm)
        term = t.transpose(axes) * float(_perm_sign(perm))
        acc = term if acc is None else acc + term
    return acc * (1.0 / math.factorial(nd))


def shuffle_sum(t, p: int, q: int):
    """Signed sum over (p, q)-shuffles of the last ``p + q`` tensor axes.

    For ``t`` antisymmetric within its first ``p`` and its last ``q`` of those
    axes this equals ``C(p + q, p) * alternate(t, p + q)`` with far fewer terms.
    """
    nd = p + q
    lead = t.ndim - nd
    acc = None
    for first in itertools.combinations(range(nd), p):
        rest = [j for j in range(nd) if j not in first]
        src = [0] * nd
        for r, j in enumerate(first):
            src[j] = r
        for r, j in enumerate(rest):
            src[j] = p + r
        axes = tuple(range(lead)) + tuple(lead + s for s in src)
        term = t.transpose(axes) * float(_perm_sign(list(first) + rest))
        acc = term if acc is None else acc + term
    return acc


def wedge(a, ka: int, b, kb: int):
    """Wedge product of dense forms, determinant convention.

    ``(a ^ b)(X, Y) = a(X) b(Y) - a(Y) b(X)`` for one-forms.
    """
    if ka == 0 or kb == 0:
        return _outer(a, b)
    coeff = math.comb(ka + kb, ka)
    return alternate(_outer(a, b), ka + kb) * float(coeff)


def _outer(a, b):
    if isinstance(a, Jet) or isinstance(b, Jet):
        la = a.ndim if hasattr(a, "ndim") else 0
        lb = b.ndim if hasattr(b, "ndim") else 0
        sa = "".join(chr(97 + i) for i in range(la))
        sb = "".join(chr(97 + la + i) for i in range(lb))
        return J.einsum(f"{sa},{sb}->{sa}{sb}", a, b)
    return np.multiply.outer(a, b)


def sparse_form(values: np.ndarray, k: int) -> dict:
    """Sorted-index components of a k-form given as a dense ``(S, n, ..., n)`` array."""
    n = values.shape[-1] if k else 0
    out = {}
    for idx in itertools.combinations(range(n), k):
        comp = values[(slice(None),) + idx]
        if np.any(comp != 0.0):
            out[idx] = comp
    return out


def sparse_wedge(a: dict, b: dict) -> dict:
    """Wedge product of sorted-index forms (determinant convention)."""
    out: dict = {}
    for ia, va in a.items():
        for ib, vb in b.items():
            if set(ia) & set(ib):
                continue
            merged = ia + ib
            order = sorted(range(len(merged)), key=merged.__getitem__)
            key = tuple(merged[i] for i in order)
            val = _perm_sign(order) * va * vb
            out[key] = out.get(key, 0.0) + val
    return out


# ---------------------------------------------------------------------------------
# backends


class Backend:
    """Common interface of the two manifold backends."""

    dim: int
    name: str = "backend"

    @property
    def structure_constants(self) -> np.ndarray:
        raise NotImplementedError

    def position(self, points: np.ndarray, order: int = 2) -> Jet:
        raise NotImplementedError

    def metric(self, pos: Jet) -> Jet:
        raise NotImplementedError

    def quadrature(self, resolution: int) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights of the reference measure; density is added by :func:`integrate`."""
        raise NotImplementedError

    def random_points(self, rng: np.random.Generator, m: int) -> np.ndarray:
        raise NotImplementedError

    def sample(self, points, order: int = 2) -> "Sample":
        return Sample(self, np.asarray(points, dtype=float), order)

    @property
    def has_model(self) -> bool:
        return True


class Chart(Backend):
    """A box in R^n with coordinate frame and a metric given by component functions.

    Args:
        dim: Dimension n.
        metric_fn: Maps the coordinate jet ``x`` (shape ``(n,)``) to the metric
            matrix; may return a jet, an array or a nested list mixing both.
        lower, upper: Corners of the fundamental domain.
        periodic: Per-axis flags; periodic axes are reduced modulo the box when
            sampling.
    """

    def __init__(self, dim: int, metric_fn: Callable, lower=None, upper=None,
                 periodic=None, name: str = "chart"):
        self.dim = int(dim)
        self.metric_fn = metric_fn
        self.lower = np.zeros(dim) if lower is None else np.asarray(lower, dtype=float)
        self.upper = np.ones(dim) if upper is None else np.asarray(upper, dtype=float)
        self.periodic = tuple([True] * dim if periodic is None else periodic)
        self.name = name

    @property
    def structure_constants(self) -> np.ndarray:
        return np.zeros((self.dim,) * 3)

    def reduce(self, points: np.ndarray) -> np.ndarray:
        pts = np.array(points, dtype=float, copy=True)
        span = self.upper - self.lower
        for axis, per in enumerate(self.periodic):
            if per:
                pts[:, axis] = self.lower[axis] + np.mod(pts[:, axis] - self.lower[axis], span[axis])
        return pts

    def position(self, points, order: int = 2) -> Jet:
        pts = np.asarray(points, dtype=float)
        s, n = pts.shape
        d = np.broadcast_to(np.eye(n), (s, n, n)) if order >= 1 else None
        h = np.broadcast_to(0.0, (s, n, n, n)) if order >= 2 else None
        return Jet(pts, d, h)

    def metric(self, pos: Jet) -> Jet:
        return J.as_jet(self.metric_fn(pos), pos)

    def quadrature(self, resolution: int):
        axes = [self.lower[a] + (np.arange(resolution) + 0.5) / resolution * (self.upper[a] - self.lower[a])
                for a in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
        cell = np.prod(self.upper - self.lower) / resolution**self.dim
        return pts, np.full(len(pts), cell)

    def random_points(self, rng, m):
        return self.lower + rng.random((m, self.dim)) * (self.upper - self.lower)


class SU2Model:
    """The unit quaternions S^3 = SU(2) with left-invariant frame ``e_j(q) = q u_j``.

    ``u = (i, j, k)``, so ``[e_1, e_2] = 2 e_3`` cyclically and the round unit
    metric makes the frame orthonormal.  Positions are unit quaternions stored
    as ``(w, x, y, z)``.
    """

    dim = 3
    total_volume = 2.0 * np.pi**2
    structure_constants = 2.0 * np.array(
        [[[float(_perm_sign((i, j, k)) if len({i, j, k}) == 3 else 0.0) for k in range(3)]
          for j in range(3)] for i in range(3)])

    @staticmethod
    def position(points, order: int = 2) -> Jet:
        q = np.asarray(points, dtype=float)
        units = np.eye(4)[1:]
        d = h = None
        if order >= 1:
            d = np.stack([qmul(q, units[j]) for j in range(3)], axis=1)
        if order >= 2:
            h = np.stack([np.stack([qmul(qmul(q, units[i]), units[j]) for j in range(3)], axis=1)
                          for i in range(3)], axis=1)
        return Jet(q, d, h)

    @staticmethod
    def quadrature(resolution: int):
        """Hopf coordinates: Gauss-Legendre in ``sin^2 a``, uniform in both phases."""
        t, wt = np.polynomial.legendre.leggauss(resolution)
        t, wt = 0.5 * (t + 1.0), 0.5 * wt
        phase = 2.0 * np.pi * np.arange(resolution) / resolution
        tt, p1, p2 = np.meshgrid(t, phase, phase, indexing="ij")
        ww = np.broadcast_to(wt[:, None, None], tt.shape)
        ca, sa = np.sqrt(1.0 - tt), np.sqrt(tt)
        q = np.stack([ca * np.cos(p1), ca * np.sin(p1), sa * np.cos(p2), sa * np.sin(p2)], axis=-1)
        # volume element cos a sin a da dp1 dp2 = 1/2 dt dp1 dp2
        weights = 0.5 * ww * (2.0 * np.pi / resolution) ** 2
        return q.reshape(-1, 4), weights.reshape(-1)

    @staticmethod
    def random_points(rng, m):
        q = rng.standard_normal((m, 4))
        return q / np.linalg.norm(q, axis=1, keepdims=True)


def qmul(a, b):
    """Quaternion product of ``(w, x, y, z)`` arrays (broadcasting), plain or jet."""
    if isinstance(a, Jet) or isinstance(b, Jet):
        return J.einsum("abc,b,c->a", _QTABLE, a, b)
    return np.einsum("abc,...b,...c->...a", _QTABLE, np.asarray(a, float), np.asarray(b, float))


def _quaternion_table():
    basis = {(0, 0): (0, 1), (0, 1): (1, 1), (0, 2): (2, 1), (0, 3): (3, 1),
             (1, 0): (1, 1), (1, 1): (0, -1), (1, 2): (3, 1), (1, 3): (2, -1),
             (2, 0): (2, 1), (2, 1): (3, -1), (2, 2): (0, -1), (2, 3): (1, 1),
             (3, 0): (3, 1), (3, 1): (2, 1), (3, 2): (1, -1), (3, 3): (0, -1)}
    t = np.zeros((4, 4, 4))
    for (b, c), (a, s) in basis.items():
        t[a, b, c] = s
    return t


_QTABLE = _quaternion_table()


def qconj(a):
    sign = np.array([1.0, -1.0, -1.0, -1.0])
    return a * sign


class Frame(Backend):
    """A Lie algebra with constant metric, optionally realized on a group model.

    Args:
        structure_constants: ``c[i, j, k]`` with ``[e_i, e_j] = c[i, j, k] e_k``.
        metric: Constant symmetric positive definite matrix ``g(e_i, e_j)``.
        total_volume: Volume of the closed manifold the frame lives on.
        model: Optional group model providing positions and quadrature.
    """

    def __init__(self, structure_constants, metric=None, total_volume: float = 1.0,
                 model=None, name: str = "frame"):
        c = np.asarray(structure_constants, dtype=float)
        self.dim = c.shape[0]
        self._c = c
        self.metric_matrix = np.eye(self.dim) if metric is None else np.asarray(metric, dtype=float)
        self.total_volume = float(total_volume)
        self.model = model
        self.name = name
        if model is not None and not np.allclose(model.structure_constants, c):
            raise ValueError("model frame brackets disagree with structure constants")

    @property
    def structure_constants(self):
        return self._c

    @property
    def has_model(self) -> bool:
        return self.model is not None

    def position(self, points, order: int = 2) -> Jet:
        if self.model is not None:
            return self.model.position(points, order)
        # exponential coordinates at the identity: e_i e_j x^k = c[i, j, k] / 2
        pts = np.asarray(points, dtype=float)
        s, n = pts.shape
        if np.any(pts != 0.0):
            raise ValueError("a frame without model only knows the identity")
        d = np.broadcast_to(np.eye(n), (s, n, n)) if order >= 1 else None
        h = np.broadcast_to(0.5 * self._c, (s, n, n, n)) if order >= 2 else None
        return Jet(pts, d, h)

    def metric(self, pos: Jet) -> Jet:
        return Jet.constant(self.metric_matrix, pos.nsamples, self.dim, pos.order)

    def quadrature(self, resolution: int):
        if self.model is None:
            return np.zeros((1, self.dim)), np.array([self.total_volume])
        pts, w = self.model.quadrature(resolution)
        return pts, w * (self.total_volume / self.model.total_volume)

    def random_points(self, rng, m):
        if self.model is None:
            return np.zeros((m, self.dim))
        return self.model.random_points(rng, m)

    def base_points(self, m: int = 1):
        return np.zeros((m, self.dim)) if self.model is None else np.tile([1.0, 0, 0, 0], (m, 1))


# ---------------------------------------------------------------------------------
# samples and expressions


class Sample:
    """Points of a backend with the position jet and a memo for derived data."""

    def __init__(self, backend: Backend, points: np.ndarray, order: int = 2):
        self.backend = backend
        self.points = points
        self.order = order
        self.pos = backend.position(points, order)
        self.cache: dict = {}
        self._metric = None

    @property
    def n(self) -> int:
        return self.backend.dim

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def structure(self) -> np.ndarray:
        return self.backend.structure_constants

    @property
    def metric(self) -> Jet:
        if self._metric is None:
            self._metric = self.backend.metric(self.pos)
        return self._metric

    @property
    def metric_inverse(self) -> Jet:
        if "ginv" not in self.cache:
            self.cache["ginv"] = J.inv(self.metric)
        return self.cache["ginv"]

    def constant(self, value, order: int | None = None) -> Jet:
        return Jet.constant(value, self.size, self.n, self.order if order is None else order)

    def per_sample(self, values, order: int | None = None) -> Jet:
        return Jet.per_sample(values, self.n, self.order if order is None else order)

    def memo(self, key, fn):
        if key not in self.cache:
            self.cache[key] = fn()
        return self.cache[key]


@dataclass(frozen=True)
class Field:
    """A vector field: ``fn(sample)`` returns frame components of shape ``(n,)``."""

    fn: Callable
    name: str = "field"

    def __call__(self, sample: Sample) -> Jet:
        return J.as_jet(self.fn(sample), sample.pos)

    @classmethod
    def constant(cls, components, name: str = "constant field"):
        comps = np.asarray(components, dtype=float)
        return cls(lambda s: s.constant(comps), name)

    def __add__(self, other: "Field") -> "Field":
        return Field(lambda s: self(s) + other(s), f"{self.name} + {other.name}")

    def __sub__(self, other: "Field") -> "Field":
        return Field(lambda s: self(s) - other(s), f"{self.name} - {other.name}")

    def scale(self, factor) -> "Field":
        """Multiply by a number or a scalar :class:`Form` of degree 0."""
        if isinstance(factor, Form):
            return Field(lambda s: self(s) * factor(s).expand(1), f"{factor.name}*{self.name}")
        return Field(lambda s: self(s) * float(factor), f"{factor:g}*{self.name}")


@dataclass(frozen=True)
class Form:
    """A k-form: ``fn(sample)`` returns components ``(n,)*k``; antisymmetrized on evaluation."""

    degree: int
    fn: Callable
    name: str = "form"

    def __call__(self, sample: Sample) -> Jet:
        w = J.as_jet(self.fn(sample), sample.pos)
        if w.ndim != self.degree:
            raise ValueError(f"{self.name}: expected {self.degree} tensor axes, got {w.ndim}")
        if self.degree >= 2:
            w = alternate(w)
        return w

    @classmethod
    def function(cls, fn, name: str = "function"):
        return cls(0, fn, name)

    @classmethod
    def constant(cls, components, name: str = "constant form"):
        comps = np.asarray(components, dtype=float)
        return cls(comps.ndim, lambda s: s.constant(comps), name)

    def __add__(self, other: "Form") -> "Form":
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        return Form(self.degree, lambda s: self(s) + other(s), f"{self.name} + {other.name}")

    def scale(self, factor) -> "Form":
        if isinstance(factor, Form):
            if factor.degree != 0:
                raise ValueError("only functions scale forms")
            return Form(self.degree, lambda s: self(s) * factor(s).expand(self.degree),
                        f"{factor.name}*{self.name}")
        return Form(self.degree, lambda s: self(s) * float(factor), f"{factor:g}*{self.name}")


# ---------------------------------------------------------------------------------
# calculus


def derivative(values: Jet) -> Jet:
    """``D[..., j] = e_j(values[...])``; lowers the order by one."""
    return J.grad(values)


def bracket_values(x: Jet, y: Jet, c: np.ndarray) -> Jet:
    """Lie bracket from component jets: ``X(Y) - Y(X) + c(X, Y)``."""
    dx, dy = J.grad(x), J.grad(y)
    out = J.einsum("kj,j->k", dy, x) - J.einsum("kj,j->k", dx, y)
    if np.any(c):
        out = out + J.einsum("ijk,i,j->k", c, x, y)
    return out


def lie_bracket(X: Field, Y: Field, sample: Sample) -> Jet:
    """Components of ``[X, Y]`` at the sample points."""
    return bracket_values(X(sample), Y(sample), sample.structure)


def jacobi_residual(c: np.ndarray) -> float:
    """Max violation of the Jacobi identity by structure constants."""
    c = np.asarray(c, dtype=float)
    t = np.einsum("jkl,ilm->ijkm", c, c)
    cyc = t + np.einsum("ijkm->jkim", t) + np.einsum("ijkm->kijm", t)
    return float(np.max(np.abs(cyc))) if cyc.size else 0.0


def antisymmetry_residual(c: np.ndarray) -> float:
    c = np.asarray(c, dtype=float)
    return float(np.max(np.abs(c + c.transpose(1, 0, 2)))) if c.size else 0.0


def exterior_derivative_values(w: Jet, degree: int, c: np.ndarray) -> Jet:
    """``d`` of a k-form from its component jet, via the invariant formula."""
    n = c.shape[0]
    if degree >= n:
        raise ValueError(f"degree {degree} form has no exterior derivative in dimension {n}")
    if degree == 0:
        return J.grad(w)
    # w is alternating, so shuffles replace the full alternation
    t0 = J.grad(w).moveaxis(-1, 0)
    out = shuffle_sum(t0, 1, degree)
    if np.any(c):
        letters = "".join(chr(100 + i) for i in range(degree - 1))
        t1 = J.einsum(f"abz,z{letters}->ab{letters}", c, w)
        out = out - shuffle_sum(t1, 2, degree - 1)
    return out


def exterior_derivative(form: Form, sample: Sample) -> Jet:
    return exterior_derivative_values(form(sample), form.degree, sample.structure)


def d(form: Form) -> Form:
    """The exterior derivative as a new form expression."""
    return Form(form.degree + 1, lambda s: exterior_derivative(form, s), f"d({form.name})")


def interior(x: Jet, w: Jet) -> Jet:
    """Interior product ``iota_X w`` on component jets."""
    if w.ndim == 0:
        raise ValueError("cannot contract a function")
    rest = "".join(chr(98 + i) for i in range(w.ndim - 1))
    return J.einsum(f"a,a{rest}->{rest}", x, w)


def form_inner(w1: Jet, w2: Jet, ginv: Jet) -> Jet:
    """Pointwise ``g(w1, w2)`` with the ``1/k!`` normalization, so ``|dx ^ dy| = 1``."""
    k = w1.ndim
    if k == 0:
        return w1 * w2
    a = "".join(chr(97 + i) for i in range(k))
    b = "".join(chr(107 + i) for i in range(k))
    spec = f"{a},{b}," + ",".join(f"{a[i]}{b[i]}" for i in range(k)) + "->"
    return J.einsum(spec, w1, w2, *([ginv] * k)) * (1.0 / math.factorial(k))


def volume_density(sample: Sample) -> Jet:
    """``mu(e_1, ..., e_n) = sqrt(det g)``."""
    g = sample.metric
    return sample.memo("mu", lambda: _sqrt_det(g))


def _sqrt_det(g: Jet) -> Jet:
    return J.exp(_logdet(g) * 0.5)


def _logdet(g: Jet) -> Jet:
    """``log det g`` with derivatives from ``e_j log det g = tr(g^-1 e_j g)``."""
    sign, ld = np.linalg.slogdet(g.v)
    if np.any(sign <= 0):
        raise np.linalg.LinAlgError("metric is not positive definite")
    gi = np.linalg.inv(g.v)
    first = h = None
    if g.order >= 1:
        first = np.einsum("Zab,ZIba->ZI", gi, g.d)
    if g.order >= 2:
        dgi = -np.einsum("Zab,ZIbc,Zcd->ZIad", gi, g.d, gi)
        h = np.einsum("ZIab,ZJba->ZIJ", dgi, g.d) + np.einsum("Zab,ZIJba->ZIJ", gi, g.h)
    return Jet(ld, first, h)


@dataclass
class IntegralResult:
    """Quadrature value together with the doubled-resolution value."""

    value: float
    refined: float | None = None
    tolerance: float = 1e-6

    @property
    def relative_change(self) -> float:
        if self.refined is None:
            return 0.0
        scale = max(abs(self.refined), 1.0)
        return abs(self.refined - self.value) / scale

    @property
    def converged(self) -> bool:
        return self.relative_change <= self.tolerance


def quadrature_sample(backend: Backend, resolution: int, order: int = 0):
    pts, w = backend.quadrature(resolution)
    return backend.sample(pts, order), w


def integrate_values(backend: Backend, fn: Callable, resolution: int = 32, order: int = 0,
                     chunk: int = 8192) -> np.ndarray:
    """Integrate ``fn(sample) -> Jet`` (any tensor shape) against the Riemannian volume."""
    pts, w = backend.quadrature(resolution)
    total = 0.0
    for start in range(0, len(pts), chunk):
        s = backend.sample(pts[start:start + chunk], order)
        vals = J.as_jet(fn(s), s.pos).v
        dens = volume_density(s).v
        wt = (w[start:start + chunk] * dens).reshape((-1,) + (1,) * (vals.ndim - 1))
        total = total + np.sum(vals * wt, axis=0)
    return np.asarray(total)


def integrate(f: Form | Callable, backend: Backend, resolution: int = 32,
              check: bool = True, tolerance: float = 1e-6) -> IntegralResult:
    """Integral of a scalar function over the closed manifold.

    On a chart this is tensor-product midpoint quadrature of ``f sqrt(det g)``
    over the fundamental domain; on a frame without model, ``f`` must be
    constant and the result is ``f * total_volume``.  With ``check`` the
    integral is repeated at doubled resolution and the relative change is
    reported through :attr:`IntegralResult.converged`.
    """
    fn = f if not isinstance(f, (Form, Field)) else f.__call__
    value = float(integrate_values(backend, fn, resolution))
    refined = None
    if check and backend.has_model:
        refined = float(integrate_values(backend, fn, 2 * resolution))
    return IntegralResult(value, refined, tolerance)
