"""Transverse calculus of a Riemannian foliation.

The Bott connection is evaluated through its tensorial branch split

    nabla^T_X Y = (nabla_{X^perp} Y)^perp + [X^E, Y]^perp,

which at a point reduces to ``P (DY x + A(x) Y)`` with a coefficient tensor
``A`` built from the Christoffel symbols, the leaf frame and its derivative.
The transverse curvature is obtained by applying the connection twice to the
projected frame ``P e_k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jet as J
from .chart import Field, Form, Sample, bracket_values, integrate_values
from .foliation import Foliation, FoliatedSample
from .jet import Jet
from .riemannian import christoffel, gradient_values


def bott_coefficient(fs: FoliatedSample, order: int) -> Jet:
    """``A[i, m, j]`` such that ``(nabla^T_x Y)^m = P[m, l] (DY[l, i] x^i + A[i, l, j] x^i Y^j)``."""
    def build():
        s = fs.sample
        gamma = christoffel(s).truncate(order)
        p = fs.proj_perp.truncate(order)
        lam = fs.leaf_dual.truncate(order)
        L = fs.leaf
        dl = J.grad(L).truncate(order)  # dl[m, a, j] = e_j L^m_a
        a = J.einsum("li,ljm->imj", p, gamma) - J.einsum("ai,maj->imj", lam, dl)
        c = s.structure
        if np.any(c):
            a = a + J.einsum("ai,la,ljm->imj", lam, L.truncate(order), c)
        return a
    return fs._memo(("bottA", order), build)


def bott_all(y: Jet, fs: FoliatedSample) -> Jet:
    """``nabla^T Y`` for a (batch of) section(s) of E^perp: ``out[..., m, i] = (nabla^T_{e_i} Y)^m``."""
    dy = J.grad(y)
    order = dy.order
    a = bott_coefficient(fs, order)
    p = fs.proj_perp.truncate(order)
    inner = dy + J.einsum("ilj,...j->...li", a, y.truncate(order))
    return J.einsum("ml,...li->...mi", p, inner)


def bott_values(x: Jet, y: Jet, fs: FoliatedSample) -> Jet:
    nab = bott_all(y, fs)
    return J.einsum("mi,i->m", nab, x.truncate(nab.order))


def bott(X: Field, Y: Field, foliation: Foliation, sample: Sample) -> Jet:
    """``nabla^T_X Y``; ``Y`` is projected to E^perp first."""
    fs = foliation.at(sample)
    return bott_values(X(sample), fs.perp(Y(sample)), fs)


def koszul_rhs(x: Jet, y: Jet, z: Jet, fs: FoliatedSample) -> Jet:
    """Right-hand side of the transverse Koszul formula written with ``gT`` and brackets."""
    c = fs.sample.structure
    gt = fs.transverse_metric

    def der(u, v, w):
        # u(gT(v, w))
        f = J.einsum("i,ij,j->", v, gt, w)
        df = J.grad(f)
        return J.einsum("k,k->", df, u.truncate(df.order))

    def gtb(u, v, w):
        b = bracket_values(u, v, c)
        return J.einsum("i,ij,j->", b, gt.truncate(b.order), w.truncate(b.order))

    return (der(x, y, z) + der(y, z, x) - der(z, x, y)
            + gtb(x, y, z) + gtb(z, x, y) - gtb(y, z, x))


def koszul_residual_values(x: Jet, y: Jet, z: Jet, fs: FoliatedSample) -> np.ndarray:
    y = fs.perp(y)
    lhs = 2.0 * fs.gT(bott_values(x, y, fs), z.truncate(1))
    return np.abs(lhs.v - koszul_rhs(x, y, z, fs).v)


def koszul_residual(X: Field, Z: Field, Y: Field, foliation: Foliation, sample: Sample) -> np.ndarray:
    """``|2 gT(nabla^T_X Y, Z) - RHS|`` per sample point."""
    return koszul_residual_values(X(sample), Y(sample), Z(sample), foliation.at(sample))


def compatibility_residual(x: Jet, y: Jet, z: Jet, fs: FoliatedSample) -> np.ndarray:
    """``X gT(Y, Z) - gT(nabla^T_X Y, Z) - gT(Y, nabla^T_X Z)`` for projected Y, Z."""
    y, z = fs.perp(y), fs.perp(z)
    f = fs.gT(y, z)
    df = J.grad(f)
    lhs = J.einsum("k,k->", df, x.truncate(df.order))
    rhs = fs.gT(bott_values(x, y, fs), z) + fs.gT(y, bott_values(x, z, fs))
    return np.abs(lhs.v - rhs.v)


def torsion_residual(y: Jet, z: Jet, fs: FoliatedSample) -> np.ndarray:
    """``|nabla^T_Y Z - nabla^T_Z Y - [Y, Z]^perp|`` for projected Y, Z."""
    y, z = fs.perp(y), fs.perp(z)
    t = bott_values(y, z, fs) - bott_values(z, y, fs) - fs.perp(bracket_values(y, z, fs.sample.structure))
    return np.max(np.abs(t.v), axis=-1)


# -- curvature --------------------------------------------------------------------


def transverse_riemann(fs: FoliatedSample) -> Jet:
    """``RT[i, j, k, m]``: components of ``R^T(e_i, e_j)(P e_k)``."""
    def build():
        c = fs.sample.structure
        z = fs.proj_perp.T  # z[k] = P e_k
        w = bott_all(z, fs)  # w[k, m, j] = (nabla^T_{e_j} Z_k)^m
        v = bott_all(w.transpose(0, 2, 1), fs)  # v[k, j, m, i] = (nabla^T_i nabla^T_j Z_k)^m
        r = v.transpose(3, 1, 0, 2) - v.transpose(1, 3, 0, 2)
        if np.any(c):
            r = r - J.einsum("ijl,kml->ijkm", c, w.truncate(0))
        return r
    return fs._memo("RT", build)


def transverse_riemann_lowered(fs: FoliatedSample) -> Jet:
    """``R^T(e_i, e_j, e_k, e_v) = gT(R^T(e_i, e_j) P e_k, e_v)``."""
    return fs._memo("RTl", lambda: J.einsum("ijkm,mv->ijkv", transverse_riemann(fs),
                                            fs.transverse_metric.truncate(0)))


def transverse_curvature(X: Field, Y: Field, Z: Field, V: Field, foliation: Foliation,
                         sample: Sample) -> Jet:
    """``R^T(X, Y, Z, V)``."""
    fs = foliation.at(sample)
    vs = [F(sample).truncate(0) for F in (X, Y, Z, V)]
    return J.einsum("ijkv,i,j,k,v->", transverse_riemann_lowered(fs), *vs)


def transverse_ricci_tensor(fs: FoliatedSample) -> Jet:
    """``RicT[j, k] = sum_a R^T(F_a, P e_j, P e_k, F_a)`` over an orthonormal frame of E^perp."""
    def build():
        f = fs.transverse_orthonormal.truncate(0)
        p = fs.proj_perp.truncate(0)
        r = transverse_riemann_lowered(fs)
        return J.einsum("ai,ijkv,av,jb,kc->bc", f, r, f, p, p)
    return fs._memo("RicT", build)


def transverse_ricci(X: Field, foliation: Foliation, sample: Sample) -> Jet:
    """``Ric^T(X, X)`` with X projected to E^perp first."""
    fs = foliation.at(sample)
    x = X(sample).truncate(0)
    return J.einsum("jk,j,k->", transverse_ricci_tensor(fs), x, x)


def ricci_eigenvalues(fs: FoliatedSample) -> np.ndarray:
    """Eigenvalues of Ric^T on E^perp in the orthonormal transverse frame, ``(S, q)``."""
    f = fs.transverse_orthonormal.truncate(0).v
    ric = transverse_ricci_tensor(fs).v
    m = np.einsum("Zai,Zij,Zbj->Zab", f, ric, f)
    return np.linalg.eigvalsh(0.5 * (m + np.swapaxes(m, 1, 2)))


# -- second-order operators on basic functions ---------------------------------------


def transverse_hessian_values(f: Jet, fs: FoliatedSample) -> Jet:
    """``Hess[i, v] = gT(nabla^T_{e_i} grad f, e_v)``."""
    grad = gradient_values(f, fs.sample)
    nab = bott_all(grad, fs)
    return J.einsum("mi,mv->iv", nab, fs.transverse_metric.truncate(nab.order))


def transverse_hessian(f: Form, X: Field, Y: Field, foliation: Foliation, sample: Sample) -> Jet:
    fs = foliation.at(sample)
    h = transverse_hessian_values(f(sample), fs)
    return J.einsum("iv,i,v->", h, X(sample).truncate(h.order), Y(sample).truncate(h.order))


def frame_trace(t: Jet, fs: FoliatedSample) -> Jet:
    """``sum_a t(F_a, F_a)`` over the orthonormal frame of E^perp."""
    f = fs.transverse_orthonormal.truncate(t.order)
    return J.einsum("ai,iv,av->", f, t, f)


def transverse_laplacian_values(f: Jet, fs: FoliatedSample) -> Jet:
    return frame_trace(transverse_hessian_values(f, fs), fs)


def transverse_laplacian(f: Form, foliation: Foliation, sample: Sample) -> Jet:
    """``Delta_T f = tr Hess_T f``."""
    return transverse_laplacian_values(f(sample), foliation.at(sample))


def transverse_divergence_values(x: Jet, fs: FoliatedSample) -> Jet:
    """``Div_T X = sum_a gT(nabla^T_{F_a} X, F_a)`` for the projection of X."""
    nab = bott_all(fs.perp(x), fs)
    return frame_trace(J.einsum("mi,mv->iv", nab, fs.transverse_metric.truncate(nab.order)), fs)


def transverse_divergence(X: Field, foliation: Foliation, sample: Sample) -> Jet:
    return transverse_divergence_values(X(sample), foliation.at(sample))


def divergence_from_volume(x: Jet, fs: FoliatedSample) -> Jet:
    """``(L_X mu_T)(F_1..F_q)`` for the orthonormal frame, i.e. ``-sum_a gT([X, F_a], F_a)``."""
    f = fs.transverse_orthonormal
    x = fs.perp(x)
    total = None
    for a in range(f.shape[0]):
        b = bracket_values(x, f[a], fs.sample.structure)
        term = -fs.gT(b, f[a].truncate(b.order))
        total = term if total is None else total + term
    return total


def divergence_theorem_check(X: Field, foliation: Foliation, backend, resolution: int = 32) -> float:
    """``|int_M Div_T X mu|``; the caller gates on harmonicity."""
    def fn(s):
        return transverse_divergence(X, foliation, s)
    return abs(float(integrate_values(backend, fn, resolution, order=1)))


# -- Bochner identities -------------------------------------------------------------


def connection_norm_sq(x: Jet, fs: FoliatedSample) -> Jet:
    """``|nabla^T X|^2 = sum_a gT(nabla^T_{F_a} X, nabla^T_{F_a} X)``."""
    nab = bott_all(fs.perp(x), fs)
    f = fs.transverse_orthonormal.truncate(nab.order)
    cols = J.einsum("mi,ai->am", nab, f)
    return J.einsum("am,mv,av->", cols, fs.transverse_metric.truncate(nab.order), cols)


@dataclass
class BochnerResiduals:
    """Pointwise residuals of the Bochner identities for one field."""

    gradient: float
    laplacian: float
    length_variance: float
    laplacian_general: float


def bochner_residuals(x: Jet, fs: FoliatedSample) -> BochnerResiduals:
    """Residuals for ``f = gT(X, X) / 2``.

    ``gradient``: ``sup |grad f - nabla^T_X X|``.
    ``laplacian``: ``sup |Delta_T f - |nabla^T X|^2 - Ric^T(X, X)|``.
    ``laplacian_general``: the same with ``X(Div_T X)`` subtracted as well,
    valid for any transverse field with symmetric ``nabla^T X``.
    ``length_variance``: relative variance of ``gT(X, X)`` over the sample.
    """
    x = fs.perp(x)
    f = fs.gT(x, x) * 0.5
    grad = gradient_values(f, fs.sample).truncate(0)
    res_a = float(np.max(np.abs(grad.v - bott_values(x, x, fs).truncate(0).v)))
    lap = transverse_laplacian_values(f, fs)
    nsq = connection_norm_sq(x, fs).truncate(0)
    x0 = x.truncate(0)
    ric = J.einsum("jk,j,k->", transverse_ricci_tensor(fs), x0, x0)
    c = lap.v - nsq.v - ric.v
    div = transverse_divergence_values(x, fs)
    xdiv = J.einsum("k,k->", J.grad(div), x0)
    length = 2.0 * f.v
    mean = float(np.mean(length))
    var = float(np.var(length)) / max(mean**2, 1e-300) if mean > 0 else float(np.var(length))
    return BochnerResiduals(res_a, float(np.max(np.abs(c))), var, float(np.max(np.abs(c - xdiv.v))))


def hessian_identity_residual(x: Jet, y: Jet, fs: FoliatedSample) -> np.ndarray:
    """Pointwise identity for ``Hess_T f(Y, Y)`` with ``f = gT(X, X)/2`` and symmetric ``nabla^T X``."""
    x, y = fs.perp(x), fs.perp(y)
    f = fs.gT(x, x) * 0.5
    hess = transverse_hessian_values(f, fs)
    y0, x0 = y.truncate(0), x.truncate(0)
    lhs = J.einsum("iv,i,v->", hess, y0, y0)
    u = bott_values(y, x, fs)  # nabla^T_Y X, order 1
    t1 = fs.gT(u.truncate(0), u.truncate(0))
    t2 = J.einsum("ijkv,i,j,k,v->", transverse_riemann_lowered(fs), y0, x0, x0, y0)
    t3 = fs.gT(bott_values(x, u, fs), y0)
    w = bott_values(x, y, fs).truncate(0)  # nabla^T_X Y
    t4 = fs.gT(bott_values(w, x, fs).truncate(0), y0)
    return np.abs(lhs.v - (t1.v + t2.v + t3.v - t4.v))
