"""Levi-Civita calculus of the ambient metric in the backend frame.

Christoffel coefficients are stored as ``gamma[i, j, m]`` with
``nabla_{e_i} e_j = gamma[i, j, m] e_m``; the curvature tensor as
``riem[i, j, k, m]`` with ``R(e_i, e_j) e_k = riem[i, j, k, m] e_m`` where
``R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]``.
"""

from __future__ import annotations

import numpy as np

from . import jet as J
from .chart import Field, Form, Sample
from .jet import Jet


def christoffel(sample: Sample) -> Jet:
    """Frame Christoffel coefficients from the Koszul formula."""
    def build():
        g = sample.metric
        c = sample.structure
        dg = J.grad(g)  # dg[a, b, k] = e_k g_ab
        low = (dg.transpose(1, 2, 0) + dg.transpose(2, 0, 1) - dg) * 0.5
        # dg terms above: [j,k,i] + [k,i,j] - [i,j,k] indexed as low[i, j, k]
        if np.any(c):
            gt = g.truncate(low.order)
            low = low + (J.einsum("ijl,lk->ijk", c, gt)
                         - J.einsum("jkl,li->ijk", c, gt)
                         + J.einsum("kil,lj->ijk", c, gt)) * 0.5
        ginv = sample.metric_inverse.truncate(low.order)
        return J.einsum("ijk,km->ijm", low, ginv)
    return sample.memo("gamma", build)


def covariant_derivative(y: Jet, sample: Sample) -> Jet:
    """``nabla Y`` as ``out[m, i] = (nabla_{e_i} Y)^m``."""
    gamma = christoffel(sample)
    return J.grad(y) + J.einsum("ijm,j->mi", gamma, y)


def levi_civita_values(x: Jet, y: Jet, sample: Sample) -> Jet:
    return J.einsum("mi,i->m", covariant_derivative(y, sample), x)


def levi_civita(X: Field, Y: Field, sample: Sample) -> Jet:
    """Components of ``nabla_X Y``."""
    return levi_civita_values(X(sample), Y(sample), sample)


def riemann_tensor(sample: Sample) -> Jet:
    """``riem[i, j, k, m]``: components of ``R(e_i, e_j) e_k``; needs a second-order sample."""
    def build():
        gamma = christoffel(sample)
        if gamma.order < 1:
            raise ValueError("curvature needs a sample of order 2")
        dgam = J.grad(gamma)  # dgam[a, b, c, d] = e_d gamma[a, b, c]
        g0 = gamma.truncate(0)
        c = sample.structure
        r = (dgam.transpose(3, 0, 1, 2) - dgam.transpose(0, 3, 1, 2)
             + J.einsum("jkl,ilm->ijkm", g0, g0) - J.einsum("ikl,jlm->ijkm", g0, g0))
        # transpose(3,0,1,2)[i,j,k,m] = dgam[j,k,m,i]; transpose(0,3,1,2)[i,j,k,m] = dgam[i,k,m,j]
        if np.any(c):
            r = r - J.einsum("ijl,lkm->ijkm", c, g0)
        return r
    return sample.memo("riemann", build)


def riemann(X: Field, Y: Field, Z: Field, sample: Sample) -> Jet:
    """Components of ``R(X, Y) Z``."""
    r = riemann_tensor(sample)
    x, y, z = (F(sample).truncate(0) for F in (X, Y, Z))
    return J.einsum("ijkm,i,j,k->m", r, x, y, z)


def riemann_lowered(sample: Sample) -> Jet:
    """``R(e_i, e_j, e_k, e_l) = g(R(e_i, e_j) e_k, e_l)``."""
    return J.einsum("ijkm,ml->ijkl", riemann_tensor(sample), sample.metric.truncate(0))


def orthonormal_frame(vectors: Jet, metric: Jet) -> Jet:
    """Gram-Schmidt on the rows of ``vectors`` (shape ``(r, n)``) with respect to ``metric``.

    Returns a jet of shape ``(r, n)``; differentiable wherever the input is
    linearly independent.
    """
    r = vectors.shape[0]
    out = []
    for a in range(r):
        v = vectors[a]
        for f in out:
            v = v - f * J.einsum("i,ij,j->", f, metric, v).expand(1)
        norm = J.sqrt(J.einsum("i,ij,j->", v, metric, v))
        out.append(v / norm.expand(1))
    return J.stack(out, 0)


def frame_matrix(sample: Sample, order: int | None = None) -> Jet:
    return sample.constant(np.eye(sample.n), order)


def ricci_tensor(sample: Sample) -> Jet:
    """``Ric(e_j, e_k)`` by tracing over a Gram-Schmidt orthonormal frame."""
    def build():
        r = riemann_tensor(sample)
        g = sample.metric.truncate(0)
        f = orthonormal_frame(frame_matrix(sample, 0), g)
        # Ric(Y, Z) = sum_a g(R(F_a, Y) Z, F_a)
        return J.einsum("ai,ijkm,ml,al->jk", f, r, g, f)
    return sample.memo("ricci", build)


def ricci_trace(sample: Sample) -> Jet:
    """Endomorphism-trace form of the Ricci tensor, ``riem[i, j, k, i]``."""
    return J.einsum("ijki->jk", riemann_tensor(sample))


def ricci(X: Field, sample: Sample) -> Jet:
    """``Ric(X, X)``."""
    x = X(sample).truncate(0)
    return J.einsum("jk,j,k->", ricci_tensor(sample), x, x)


def gradient_values(f: Jet, sample: Sample) -> Jet:
    """Metric gradient ``(grad f)^m = g^{mk} e_k(f)``."""
    df = J.grad(f)
    return J.einsum("mk,k->m", sample.metric_inverse.truncate(df.order), df)


def gradient(f: Form, sample: Sample) -> Jet:
    if f.degree != 0:
        raise ValueError("gradient needs a function")
    return gradient_values(f(sample), sample)


def gradient_field(f: Form) -> Field:
    return Field(lambda s: gradient(f, s), f"grad({f.name})")


def metric_pair(x: Jet, y: Jet, sample: Sample) -> Jet:
    order = min(x.order, y.order)
    return J.einsum("i,ij,j->", x, sample.metric.truncate(order), y)


def sectional_curvature(x: Jet, y: Jet, sample: Sample) -> Jet:
    """``g(R(X, Y) Y, X) / (|X|^2 |Y|^2 - g(X, Y)^2)``."""
    x0, y0 = x.truncate(0), y.truncate(0)
    g = sample.metric.truncate(0)
    num = J.einsum("ijkl,i,j,k,l->", riemann_lowered(sample), x0, y0, y0, x0)
    den = J.einsum("i,ij,j->", x0, g, x0) * J.einsum("i,ij,j->", y0, g, y0) \
        - J.einsum("i,ij,j->", x0, g, y0) ** 2
    return num / den
