"""Foliation data: leaf frame, projections, transverse metric and basic checks.

A :class:`Foliation` is given by fields spanning the integrable subbundle E
(the leaf frame) and an ordered frame whose projection to the orthogonal
complement fixes the transverse orientation.  Everything pointwise is
derived on a :class:`~foliage.chart.Sample` and memoized there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import jet as J
from .chart import Field, Form, Sample, bracket_values
from .jet import Jet
from .riemannian import covariant_derivative, orthonormal_frame


@dataclass(frozen=True, eq=False)
class Foliation:
    """An integrable subbundle E given by a spanning leaf frame.

    Args:
        leaf_fields: p fields spanning E pointwise.
        transverse_fields: q fields whose projections to E^perp give an
            oriented transverse frame.
    """

    leaf_fields: Sequence[Field]
    transverse_fields: Sequence[Field]
    name: str = "foliation"

    @property
    def rank(self) -> int:
        return len(self.leaf_fields)

    @property
    def codim(self) -> int:
        return len(self.transverse_fields)

    def at(self, sample: Sample) -> "FoliatedSample":
        return sample.memo(("foliation", id(self)), lambda: FoliatedSample(self, sample))


class FoliatedSample:
    """Pointwise foliation quantities on one sample (all jets in the backend frame)."""

    def __init__(self, foliation: Foliation, sample: Sample):
        self.foliation = foliation
        self.sample = sample
        self._cache: dict = {}

    def _memo(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def leaf(self) -> Jet:
        """``L[:, a]``: components of the a-th leaf field."""
        return self._memo("L", lambda: J.stack([F(self.sample) for F in self.foliation.leaf_fields], 1))

    @property
    def leaf_dual(self) -> Jet:
        """``lam`` with ``P_E = L lam``; ``lam[a]`` reads off the a-th leaf coefficient."""
        def build():
            L, g = self.leaf, self.sample.metric
            gl = J.einsum("ab,bc->ac", g, L)
            return J.einsum("ab,cb->ac", J.inv(J.einsum("ka,kb->ab", L, gl)), gl)
        return self._memo("lam", build)

    @property
    def proj_leaf(self) -> Jet:
        return self._memo("PE", lambda: J.einsum("ia,aj->ij", self.leaf, self.leaf_dual))

    @property
    def proj_perp(self) -> Jet:
        return self._memo("Pp", lambda: self.sample.constant(np.eye(self.sample.n)) - self.proj_leaf)

    @property
    def transverse_metric(self) -> Jet:
        """``gT[i, j] = g(P e_i, P e_j)`` with P the orthogonal projection to E^perp."""
        def build():
            p, g = self.proj_perp, self.sample.metric
            return J.einsum("ai,ab,bj->ij", p, g, p)
        return self._memo("gT", build)

    @property
    def leaf_orthonormal(self) -> Jet:
        """Gram-Schmidt orthonormal leaf frame, rows ``F[a]``."""
        return self._memo("Fleaf", lambda: orthonormal_frame(self.leaf.T, self.sample.metric))

    @property
    def transverse_orthonormal(self) -> Jet:
        """Oriented orthonormal frame of E^perp, rows ``F[a]``."""
        def build():
            tv = J.stack([F(self.sample) for F in self.foliation.transverse_fields], 0)
            tv = J.einsum("ij,aj->ai", self.proj_perp, tv)
            return orthonormal_frame(tv, self.sample.metric)
        return self._memo("Fperp", build)

    def perp(self, v: Jet) -> Jet:
        return J.einsum("ij,j->i", self.proj_perp.truncate(v.order), v)

    def gT(self, x: Jet, y: Jet) -> Jet:
        order = min(x.order, y.order)
        return J.einsum("i,ij,j->", x, self.transverse_metric.truncate(order), y)


# -- pointwise operations ---------------------------------------------------------


def project_perp(v, foliation: Foliation, sample: Sample) -> Jet:
    """Orthogonal projection of vector components onto E^perp."""
    v = J.as_jet(v, sample.pos) if not isinstance(v, Jet) else v
    return foliation.at(sample).perp(v)


def transverse_metric(X: Field, Y: Field, foliation: Foliation, sample: Sample) -> Jet:
    return foliation.at(sample).gT(X(sample), Y(sample))


def perp_field(X: Field, foliation: Foliation) -> Field:
    return Field(lambda s: foliation.at(s).perp(X(s)), f"({X.name})^perp")


def lie_derivative_2tensor(x: Jet, t: Jet, c: np.ndarray) -> Jet:
    """``(L_X T)[i, j] = X(T_ij) - T([X, e_i], e_j) - T(e_i, [X, e_j])`` in the frame."""
    order = min(x.order - 1, t.order - 1)
    dx = J.grad(x).truncate(order)
    x0 = x.truncate(order)
    # [X, e_i]^m = -e_i(X^m) + X^l c[l, i, m]
    bx = -dx
    if np.any(c):
        bx = bx + J.einsum("lim,l->mi", c, x0)
    t0 = t.truncate(order)
    xt = J.einsum("ijk,k->ij", J.grad(t).truncate(order), x0)
    return xt - J.einsum("mi,mj->ij", bx, t0) - J.einsum("im,mj->ij", t0, bx)


def lie_derivative_vector(x: Jet, y: Jet, c: np.ndarray) -> Jet:
    return bracket_values(x, y, c)


def lie_derivative_1form(x: Jet, w: Jet, c: np.ndarray) -> Jet:
    """``(L_X w)[i] = X(w_i) - w([X, e_i])``."""
    order = min(x.order, w.order) - 1
    x0 = x.truncate(order)
    bx = -J.grad(x).truncate(order)
    if np.any(c):
        bx = bx + J.einsum("lim,l->mi", c, x0)
    return J.einsum("ik,k->i", J.grad(w).truncate(order), x0) - J.einsum("m,mi->i", w.truncate(order), bx)


def lie_derivative_endomorphism(x: Jet, phi: Jet, c: np.ndarray) -> Jet:
    """``(L_X phi)(e_i) = [X, phi e_i] - phi [X, e_i]`` as ``out[m, i]``."""
    order = min(x.order, phi.order) - 1
    x0 = x.truncate(order)
    dx = J.grad(x).truncate(order)
    bx = -dx
    if np.any(c):
        bx = bx + J.einsum("lim,l->mi", c, x0)
    dphi = J.grad(phi).truncate(order)
    phi0 = phi.truncate(order)
    # [X, Y] with Y = phi e_i: X(Y) - Y(X) + c(X, Y)
    term = J.einsum("mik,k->mi", dphi, x0) - J.einsum("mk,ki->mi", dx, phi0)
    if np.any(c):
        term = term + J.einsum("lkm,l,ki->mi", c, x0, phi0)
    return term - J.einsum("mk,ki->mi", phi0, bx)


@dataclass
class FieldClassification:
    """Foliate/transverse verdict with the residuals it was based on."""

    is_foliate: bool
    is_transverse: bool
    foliate_residual: float
    transverse_residual: float


def classify_field(X: Field, foliation: Foliation, sample: Sample, tol: float = 1e-8) -> FieldClassification:
    """Foliate iff ``[leaf_a, X]`` stays in E; transverse iff additionally ``X`` is in E^perp."""
    fs = foliation.at(sample)
    x = X(sample)
    res = 0.0
    for L in foliation.leaf_fields:
        br = bracket_values(L(sample), x, sample.structure)
        res = max(res, float(np.max(np.abs(fs.perp(br).v))))
    scale = max(1.0, float(np.max(np.abs(x.v))))
    tres = float(np.max(np.abs(J.einsum("ij,j->i", fs.proj_leaf, x).v)))
    foliate = res <= tol * scale
    return FieldClassification(foliate, foliate and tres <= tol * scale, res, tres)


@dataclass
class Verdict:
    ok: bool
    residual: float


def is_basic_function(f: Form, foliation: Foliation, sample: Sample, tol: float = 1e-8) -> Verdict:
    """Basic iff every leaf field annihilates ``f``."""
    df = J.grad(f(sample))
    res = 0.0
    for L in foliation.leaf_fields:
        res = max(res, float(np.max(np.abs(J.einsum("k,k->", df, L(sample).truncate(df.order)).v))))
    return Verdict(res <= tol, res)


def is_basic_form_values(w: Jet, dw: Jet, leaf: Jet) -> float:
    """Max of ``|iota_L w|`` and ``|iota_L dw|`` over leaf columns."""
    res = 0.0
    for a in range(leaf.shape[1]):
        la = leaf[:, a]
        if w.ndim:
            res = max(res, float(np.max(np.abs(_contract(la, w).v))))
        res = max(res, float(np.max(np.abs(_contract(la.truncate(dw.order), dw).v))))
    return res


def _contract(x: Jet, w: Jet) -> Jet:
    rest = "".join(chr(98 + i) for i in range(w.ndim - 1))
    return J.einsum(f"a,a{rest}->{rest}", x.truncate(w.order), w)


def integrability_residual(foliation: Foliation, sample: Sample) -> float:
    """Max ``|[leaf_a, leaf_b]^perp|`` (Frobenius condition)."""
    fs = foliation.at(sample)
    res = 0.0
    for a, La in enumerate(foliation.leaf_fields):
        for Lb in foliation.leaf_fields[a + 1:]:
            res = max(res, float(np.max(np.abs(fs.perp(bracket_values(La(sample), Lb(sample), sample.structure)).v))))
    return res


def holonomy_residual(foliation: Foliation, sample: Sample) -> float:
    """Max ``|L_X gT|`` over leaf fields X, evaluated on every frame pair."""
    fs = foliation.at(sample)
    res = 0.0
    for L in foliation.leaf_fields:
        lg = lie_derivative_2tensor(L(sample), fs.transverse_metric, sample.structure)
        res = max(res, float(np.max(np.abs(lg.v))))
    return res


def leaf_independence(foliation: Foliation, sample: Sample) -> float:
    """Smallest singular value of the leaf frame over the sample (0 means degenerate)."""
    L = foliation.at(sample).leaf.v
    return float(np.min(np.linalg.svd(L, compute_uv=False)))


def leaf_mean_curvature(foliation: Foliation, sample: Sample) -> Jet:
    """``H = sum_a (nabla_{F_a} F_a)^perp`` over an orthonormal leaf frame."""
    fs = foliation.at(sample)
    F = fs.leaf_orthonormal
    total = None
    for a in range(foliation.rank):
        fa = F[a]
        term = J.einsum("mi,i->m", covariant_derivative(fa, sample), fa.truncate(fa.order - 1))
        total = term if total is None else total + term
    return fs.perp(total)


def mean_curvature_sup(foliation: Foliation, sample: Sample) -> float:
    h = leaf_mean_curvature(foliation, sample)
    g = sample.metric.truncate(0)
    norms = np.sqrt(np.abs(np.einsum("Zi,Zij,Zj->Z", h.v, g.v, h.v)))
    return float(np.max(norms))


@dataclass
class VolumeForms:
    """Ambient density ``mu(e_1..e_n)`` and the transverse volume on the oriented frame."""

    mu: np.ndarray
    mu_transverse_on_frame: np.ndarray
    orientation: np.ndarray


def transverse_volume(fs: FoliatedSample, vectors: Jet) -> Jet:
    """``mu_T(Y_1, ..., Y_q) = det g(F_a, Y_b)`` for an oriented orthonormal frame F."""
    F = fs.transverse_orthonormal.truncate(vectors.order)
    g = fs.sample.metric.truncate(vectors.order)
    m = J.einsum("ai,ij,bj->ab", F, g, vectors)
    return Jet(np.linalg.det(m.v))


def volume_forms(foliation: Foliation, sample: Sample) -> VolumeForms:
    """Evaluate both densities and the orientation of the supplied transverse frame.

    Raises:
        ValueError: If the supplied transverse frame is degenerate or
            inconsistently oriented across the sample.
    """
    from .chart import volume_density

    fs = foliation.at(sample)
    with np.errstate(all="ignore"):
        F = fs.transverse_orthonormal.truncate(0)
        tv = J.stack([T(sample).truncate(0) for T in foliation.transverse_fields], 0)
        orient = transverse_volume(fs, tv).v
    if not np.all(np.isfinite(orient) & (orient > 1e-12)):
        raise ValueError("transverse frame is degenerate or inconsistently oriented")
    return VolumeForms(volume_density(sample).v, transverse_volume(fs, F).v, orient)
