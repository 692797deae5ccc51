"""Basic Hodge theory and field classifiers on finite ansatz spaces.

An :class:`AnsatzSpace` holds raw candidate forms or fields, reduced to an
L^2-orthonormal basis of the basic (for forms) or transverse-foliate (for
fields) subspace.  Because the reduced basis is orthonormal, the codifferential
is simply the transpose of the fitted matrix of ``d`` and the Laplacian is
symmetric.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import subspace_angles

from . import jet as J
from .chart import Backend, Field, Form, Sample
from .foliation import Foliation, lie_derivative_2tensor
from .jet import Jet
from .transverse import bochner_residuals, bott_all, transverse_laplacian_values

NULL_THRESHOLD = 1e-7
_TOKENS = itertools.count()


class AnsatzNotClosed(ValueError):
    """``d`` of an ansatz element leaves the span of the next ansatz."""


@dataclass
class Subspace:
    """A subspace of reduced ansatz coordinates together with its spectral evidence."""

    basis: np.ndarray  # (m, k), orthonormal columns
    singular_values: np.ndarray
    threshold: float

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def gap(self) -> float:
        """Ratio of the smallest kept singular value to the largest discarded one."""
        sv = self.singular_values
        k = len(sv) - self.dim
        if self.dim == 0 or k == 0:
            return math.inf
        small = sv[k:]
        big = sv[:k]
        return float(big[-1] / max(small[0], 1e-300))


def nullspace(matrix: np.ndarray, rel: float = NULL_THRESHOLD, atol: float = 1e-12) -> Subspace:
    """Right nullspace: singular values below ``rel * sigma_max`` (or ``atol``) count as zero."""
    m = matrix.shape[1]
    if matrix.size == 0 or matrix.shape[0] == 0:
        return Subspace(np.eye(m), np.zeros(m), 0.0)
    _, sv, vt = np.linalg.svd(matrix, full_matrices=True)
    full = np.zeros(m)
    full[: len(sv)] = sv
    smax = float(full.max()) if m else 0.0
    thr = max(rel * smax, atol)
    keep = full < thr
    return Subspace(vt[keep].T, full, thr)


def rank(matrix: np.ndarray, rel: float = NULL_THRESHOLD, atol: float = 1e-12) -> int:
    if matrix.size == 0:
        return 0
    return matrix.shape[1] - nullspace(matrix, rel, atol).dim


def principal_angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Principal angles between column spans (Euclidean = L^2 in reduced coordinates)."""
    if a.shape[1] == 0 or b.shape[1] == 0:
        return np.zeros(0)
    return subspace_angles(a, b)


def inclusion_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Largest angle between span(a) and span(b); 0 iff span(a) is inside span(b)."""
    if a.shape[1] == 0:
        return 0.0
    if b.shape[1] < a.shape[1]:
        return math.pi / 2
    ang = principal_angles(a, b)
    return float(np.max(ang)) if ang.size else 0.0


# -- ansatz spaces ---------------------------------------------------------------------


def _stack_raw(elements: Sequence, sample: Sample) -> Jet:
    return J.stack([e(sample) for e in elements], 0)


def _lowered(vals: np.ndarray, kind: str, degree: int, g: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    """Raw values ``(S, r, ...)`` with indices moved by the metric, so that the
    pointwise inner product is the full contraction with ``vals``."""
    if kind == "field":
        return vals @ np.swapaxes(g, 1, 2)
    if degree == 0:
        return vals
    if degree == 1:
        return vals @ np.swapaxes(ginv, 1, 2)
    if degree == 2:
        return 0.5 * (ginv[:, None] @ vals @ np.swapaxes(ginv, 1, 2)[:, None])
    raise ValueError("inner products are implemented up to degree 2")


def gram_matrix(elements: Sequence, kind: str, degree: int, backend: Backend,
                resolution: int, chunk: int = 4096) -> np.ndarray:
    """``<a, b> = int g(a, b) mu`` for raw elements by quadrature."""
    from .chart import volume_density

    r = len(elements)
    pts, w = backend.quadrature(resolution)
    gram = np.zeros((r, r))
    for start in range(0, len(pts), chunk):
        s = backend.sample(pts[start:start + chunk], 0)
        vals = _stack_raw(elements, s).v
        g = s.metric.v
        ginv = s.metric_inverse.v
        wt = w[start:start + chunk] * volume_density(s).v
        low = _lowered(vals, kind, degree, g, ginv) * wt.reshape((-1,) + (1,) * (vals.ndim - 1))
        rest = list(range(2, vals.ndim))
        gram += np.tensordot(vals, low, axes=([0] + rest, [0] + rest))
    return 0.5 * (gram + gram.T)


@dataclass
class AnsatzSpace:
    """Finite-dimensional space of basic forms (``kind='form'``) or transverse fields.

    ``coeffs[:, a]`` expresses the a-th reduced basis element in the raw
    candidates; reduced elements are L^2-orthonormal, so the reduced Gram
    matrix is the identity.
    """

    kind: str
    degree: int
    raw: list
    coeffs: np.ndarray
    note: str
    gram_raw: np.ndarray | None = None
    basic_residual: float = 0.0
    _token: int = field(default_factory=lambda: next(_TOKENS), init=False, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    @property
    def gram(self) -> np.ndarray:
        if self.gram_raw is None:
            return np.eye(self.dim)
        return self.coeffs.T @ self.gram_raw @ self.coeffs

    def values(self, sample: Sample) -> Jet:
        """Reduced basis evaluated at a sample, leading axis over the basis."""
        if self.dim == 0:
            raise ValueError("empty ansatz has no values")
        key = ("ansatz", self._token, self.coeffs.shape)
        def build():
            raw = _stack_raw(self.raw, sample)
            rest = "".join(chr(98 + i) for i in range(raw.ndim - 1))
            return J.einsum(f"ra,r{rest}->a{rest}", self.coeffs, raw)
        return sample.memo(key, build)

    def element(self, a: int):
        """Reduced basis element ``a`` as a standalone expression."""
        def fn(s):
            return self.values(s)[a]
        if self.kind == "field":
            return Field(fn, f"{self.note}[{a}]")
        return Form(self.degree, fn, f"{self.note}[{a}]")

    def combination(self, vec: np.ndarray, name: str = "combination"):
        vec = np.asarray(vec, dtype=float)
        def fn(s):
            vals = self.values(s)
            rest = "".join(chr(98 + i) for i in range(vals.ndim - 1))
            return J.einsum(f"a,a{rest}->{rest}", vec, vals)
        if self.kind == "field":
            return Field(fn, name)
        return Form(self.degree, fn, name)

    @classmethod
    def empty(cls, kind: str, degree: int, note: str = "empty"):
        return cls(kind, degree, [], np.zeros((0, 0)), note)

    @classmethod
    def build(cls, kind: str, degree: int, candidates: Sequence, backend: Backend,
              foliation: Foliation, check_sample: Sample | None, resolution: int = 32,
              note: str = "ansatz", restrict: bool = True, tol: float = 1e-8,
              orth_tol: float = 1e-10) -> "AnsatzSpace":
        """Reduce raw candidates to an orthonormal basis of their basic subspace.

        Args:
            kind: ``"form"`` or ``"field"``.
            degree: Form degree (ignored for fields, use 1).
            candidates: Raw expressions.
            check_sample: Order-2 sample on which basicness (forms) or
                transverse foliateness (fields) is enforced as a nullspace.
            restrict: When False, candidates are assumed basic and only
                the residual is recorded.
        """
        candidates = list(candidates)
        if not candidates:
            return cls.empty(kind, degree, note)
        gram = gram_matrix(candidates, kind, degree, backend, resolution)
        lam, vec = np.linalg.eigh(gram)
        keep = lam > orth_tol * max(float(lam.max()), 1e-300)
        c = vec[:, keep] / np.sqrt(lam[keep])
        space = cls(kind, degree, candidates, c, note, gram)
        if check_sample is None:
            return space
        res = basicness_matrix(space, foliation, check_sample)
        if restrict:
            ns = nullspace(res, rel=0.0, atol=tol * math.sqrt(res.shape[0]))
            c = c @ ns.basis
            space = cls(kind, degree, candidates, c, note, gram)
            if space.dim:
                res = basicness_matrix(space, foliation, check_sample)
        space.basic_residual = float(np.max(np.abs(res))) if res.size and space.dim else 0.0
        return space


def basicness_matrix(space: AnsatzSpace, foliation: Foliation, sample: Sample) -> np.ndarray:
    """Rows: sampled basicness/foliateness residual entries; columns: reduced elements."""
    if space.dim == 0:
        return np.zeros((0, 0))
    fs = foliation.at(sample)
    vals = space.values(sample)
    c = sample.structure
    rows = []
    leaf = fs.leaf
    if space.kind == "field":
        for a in range(foliation.rank):
            la = leaf[:, a]
            br = _batched_bracket(la, vals, c)
            rows.append(J.einsum("ij,aj->ai", fs.proj_perp.truncate(br.order), br).v)
        rows.append(J.einsum("ij,aj->ai", fs.proj_leaf.truncate(0), vals.truncate(0)).v)
    else:
        k = space.degree
        dw = _batched_d(vals, k, c)
        for a in range(foliation.rank):
            la = leaf[:, a]
            if k > 0:
                rest = "".join(chr(99 + i) for i in range(k - 1))
                rows.append(J.einsum(f"b,ab{rest}->a{rest}", la.truncate(0), vals.truncate(0)).v)
            rest = "".join(chr(99 + i) for i in range(k))
            rows.append(J.einsum(f"b,ab{rest}->a{rest}", la.truncate(0), dw.truncate(0)).v)
    return np.concatenate([np.moveaxis(r, 1, -1).reshape(-1, space.dim) for r in rows], axis=0)


def _batched_bracket(x: Jet, ys: Jet, c: np.ndarray) -> Jet:
    """``[X, Y_a]`` for a batch ``ys[a]``."""
    dx, dy = J.grad(x), J.grad(ys)
    out = J.einsum("akj,j->ak", dy, x) - J.einsum("kj,aj->ak", dx, ys)
    if np.any(c):
        out = out + J.einsum("ijk,i,aj->ak", c, x, ys)
    return out


def _batched_d(vals: Jet, k: int, c: np.ndarray) -> Jet:
    """Exterior derivative of a batch of k-forms (leading batch axis)."""
    from .chart import alternate

    if k == 0:
        return J.grad(vals)
    t0 = J.grad(vals).moveaxis(-1, 1)
    out = alternate(t0, k + 1) * float(k + 1)
    if np.any(c):
        letters = "".join(chr(100 + i) for i in range(k - 1))
        t1 = J.einsum(f"xyz,az{letters}->axy{letters}", c, vals)
        out = out - alternate(t1, k + 1) * float(math.comb(k + 1, 2))
    return out


# -- the basic complex ---------------------------------------------------------------------


def _flat(vals: np.ndarray) -> np.ndarray:
    """``(S, m, ...)`` -> ``(S * prod(...), m)``."""
    m = vals.shape[1]
    return np.moveaxis(vals, 1, -1).reshape(-1, m)


def fit_derivative(source: AnsatzSpace, target: AnsatzSpace, sample: Sample, tol: float):
    """Matrix of ``d`` from ``source`` to ``target`` by least squares at the sample.

    Raises:
        AnsatzNotClosed: If some ``d``-image is not in the span of ``target``.
    """
    c = sample.structure
    if source.dim == 0:
        return np.zeros((target.dim, 0)), 0.0
    dv = _batched_d(source.values(sample), source.degree, c).truncate(0).v
    rhs = _flat(dv)
    scale = max(1.0, float(np.max(np.abs(rhs))))
    if target.dim == 0:
        res = float(np.max(np.abs(rhs)))
        if res > tol * scale:
            worst = int(np.argmax(np.max(np.abs(rhs), axis=0)))
            raise AnsatzNotClosed(_offender(source, worst, res, target.note))
        return np.zeros((0, source.dim)), res
    tv = _flat(target.values(sample).truncate(0).v)
    sol, *_ = np.linalg.lstsq(tv, rhs, rcond=None)
    resid = np.abs(tv @ sol - rhs)
    col = np.max(resid, axis=0)
    if np.max(col) > tol * scale:
        worst = int(np.argmax(col))
        raise AnsatzNotClosed(_offender(source, worst, float(col[worst]), target.note))
    return sol, float(np.max(col) / scale)


def _offender(space: AnsatzSpace, a: int, res: float, target: str) -> str:
    raw = int(np.argmax(np.abs(space.coeffs[:, a])))
    name = getattr(space.raw[raw], "name", f"#{raw}")
    return (f"d of {space.note} element {a} (dominated by {name}) leaves the span of "
            f"{target}: residual {res:.3e}")


@dataclass
class HodgeSolution:
    """Matrices of the basic complex in degrees 0, 1, 2 on orthonormal ansatz bases."""

    spaces: tuple
    d0: np.ndarray
    d1: np.ndarray
    fit_residual: float
    harmonic: np.ndarray
    laplacian_spectrum: np.ndarray
    threshold: float

    @property
    def codifferential1(self) -> np.ndarray:
        """delta on 1-forms; Gram-adjoint of ``d0``."""
        g0, g1 = self.spaces[0].gram, self.spaces[1].gram
        return np.linalg.solve(g0, self.d0.T @ g1)

    @property
    def codifferential2(self) -> np.ndarray:
        g1, g2 = self.spaces[1].gram, self.spaces[2].gram if self.spaces[2].dim else np.zeros((0, 0))
        if self.d1.shape[0] == 0:
            return np.zeros((self.spaces[1].dim, 0))
        return np.linalg.solve(g1, self.d1.T @ g2)

    @property
    def laplacian1(self) -> np.ndarray:
        lap = self.d0 @ self.codifferential1
        if self.d1.size:
            lap = lap + self.codifferential2 @ self.d1
        return lap

    @property
    def laplacian0(self) -> np.ndarray:
        return self.codifferential1 @ self.d0

    @property
    def b1_harmonic(self) -> int:
        return self.harmonic.shape[1]

    @property
    def b1_cohomological(self) -> int:
        m1 = self.spaces[1].dim
        closed = m1 - rank(self.d1) if self.d1.size else m1
        return closed - rank(self.d0)

    def closed_coclosed(self) -> Subspace:
        """``ker d1 ∩ ker delta1`` as a subspace of reduced 1-form coordinates."""
        blocks = [self.codifferential1]
        if self.d1.size:
            blocks.append(self.d1)
        return nullspace(np.vstack(blocks))

    def spectral_gap(self) -> float:
        ev = self.laplacian_spectrum
        k = self.b1_harmonic
        if k == len(ev) or k == 0:
            return math.inf
        return float(ev[k] / max(abs(ev[k - 1]), 1e-300))


def build_basic_complex(a0: AnsatzSpace, a1: AnsatzSpace, a2: AnsatzSpace, sample: Sample,
                        tol: float = 1e-8) -> HodgeSolution:
    """Fit ``d_B`` on the ansatz, assemble ``delta_B`` and ``Delta_B``, extract harmonic 1-forms."""
    d0, r0 = fit_derivative(a0, a1, sample, tol)
    d1, r1 = fit_derivative(a1, a2, sample, tol)
    partial = HodgeSolution((a0, a1, a2), d0, d1, max(r0, r1), np.zeros((a1.dim, 0)), np.zeros(0), 0.0)
    lap = partial.laplacian1
    g1 = a1.gram
    sym = g1 @ lap
    sym = 0.5 * (sym + sym.T)
    from scipy.linalg import eigh

    ev, vec = eigh(sym, g1)
    scale = max(float(np.max(np.abs(ev))) if ev.size else 0.0, 1.0)
    thr = NULL_THRESHOLD * scale
    harm = vec[:, np.abs(ev) < thr]
    if harm.size:
        q, _ = np.linalg.qr(harm)
        harm = q
    partial.harmonic = harm
    partial.laplacian_spectrum = np.sort(np.abs(ev))
    partial.threshold = thr
    return partial


def adjointness_residual(sol: HodgeSolution, backend: Backend, resolution: int) -> float:
    """``max |<d f, w> - <f, delta w>|`` with the left side integrated directly."""
    a0, a1 = sol.spaces[0], sol.spaces[1]
    if a0.dim == 0 or a1.dim == 0:
        return 0.0
    from .chart import volume_density

    pts, w = backend.quadrature(resolution)
    direct = np.zeros((a0.dim, a1.dim))
    for start in range(0, len(pts), 4096):
        s = backend.sample(pts[start:start + 4096], 1)
        df = J.grad(a0.values(s)).v
        om = a1.values(s).truncate(0).v
        pw = np.einsum("Zai,Zij,Zbj->Zab", df, s.metric_inverse.truncate(0).v, om)
        direct += np.einsum("Z,Zab->ab", w[start:start + 4096] * volume_density(s).truncate(0).v, pw)
    via_delta = a0.gram @ sol.codifferential1  # <f_a, delta w_b>
    return float(np.max(np.abs(direct - via_delta)))


def harmonic_agreement(sol: HodgeSolution) -> tuple[int, int, float]:
    """Dimensions of ``ker Delta`` and ``ker d ∩ ker delta`` and their largest principal angle."""
    cc = sol.closed_coclosed()
    harm = sol.harmonic
    if cc.dim != harm.shape[1]:
        return harm.shape[1], cc.dim, math.pi / 2
    ang = principal_angles(harm, cc.basis)
    return harm.shape[1], cc.dim, float(np.max(ang)) if ang.size else 0.0


# -- sampled linear maps on field ansatz -------------------------------------------------------


def _field_maps(space: AnsatzSpace, foliation: Foliation, sample: Sample) -> dict:
    key = ("fieldmaps", space._token, id(foliation))
    def build():
        fs = foliation.at(sample)
        vals = space.values(sample)
        c = sample.structure
        gt = fs.transverse_metric
        xs = J.einsum("ij,aj->ai", fs.proj_perp, vals)
        nab = bott_all(xs, fs)  # (m, k, i)
        gt1 = gt.truncate(nab.order)
        low = J.einsum("ami,mv->aiv", nab, gt1)
        killing = []
        for a in range(space.dim):
            killing.append(lie_derivative_2tensor(vals[a], gt, c).v)
        killing = np.stack(killing, axis=1)
        f = fs.transverse_orthonormal.truncate(nab.order)
        div = J.einsum("aiv,bi,bv->a", low, f, f)
        anti = low - low.transpose(0, 2, 1)
        return {"xs": xs, "nab": nab, "killing": killing, "div": div, "anti": anti, "low": low}
    return sample.memo(key, build)


def _matrix(arr: np.ndarray) -> np.ndarray:
    return _flat(arr)


def classify_killing(space: AnsatzSpace, foliation: Foliation, sample: Sample) -> Subspace:
    """Nullspace of ``X -> L_X gT`` on the sample (transverse Killing fields)."""
    if space.dim == 0:
        return Subspace(np.zeros((0, 0)), np.zeros(0), 0.0)
    return nullspace(_matrix(_field_maps(space, foliation, sample)["killing"]))


def classify_parallel(space: AnsatzSpace, foliation: Foliation, sample: Sample) -> Subspace:
    """Nullspace of ``X -> nabla^T X`` (transverse parallel fields)."""
    if space.dim == 0:
        return Subspace(np.zeros((0, 0)), np.zeros(0), 0.0)
    return nullspace(_matrix(_field_maps(space, foliation, sample)["nab"].v))


class NotApplicable(Exception):
    """A hypothesis of the statement being checked does not hold."""


def classify_basic_harmonic(space: AnsatzSpace, foliation: Foliation, sample: Sample,
                            harmonic: bool) -> Subspace:
    """Nullspace of ``X -> (antisymmetric part of nabla^T X, Div_T X)``.

    Raises:
        NotApplicable: If the foliation is not harmonic.
    """
    if not harmonic:
        raise NotApplicable("the basic harmonic criterion needs a harmonic foliation")
    if space.dim == 0:
        return Subspace(np.zeros((0, 0)), np.zeros(0), 0.0)
    maps = _field_maps(space, foliation, sample)
    anti = _matrix(maps["anti"].v)
    div = maps["div"].v  # (S, m)
    return nullspace(np.vstack([anti, div]))


def length_variance(space: AnsatzSpace, sub: Subspace, foliation: Foliation, sample: Sample) -> float:
    """Max relative variance of ``gT(X, X)`` over the sample, for X in the subspace basis."""
    if sub.dim == 0:
        return 0.0
    fs = foliation.at(sample)
    maps = _field_maps(space, foliation, sample)
    xs = maps["xs"].truncate(0).v  # (S, m, n)
    gt = fs.transverse_metric.truncate(0).v
    worst = 0.0
    for k in range(sub.dim):
        x = np.einsum("Zai,a->Zi", xs, sub.basis[:, k])
        length = np.einsum("Zi,Zij,Zj->Z", x, gt, x)
        mean = float(np.mean(length))
        worst = max(worst, float(np.var(length)) / max(mean**2, 1e-300))
    return worst


def symmetry_equivalence(space: AnsatzSpace, foliation: Foliation, sample: Sample) -> tuple[float, list]:
    """Pointwise ``d(omega_X)(Y, Z) = gT(nabla^T_Y X, Z) - gT(nabla^T_Z X, Y)`` on E^perp.

    Returns the identity residual and, per basis element, the pair
    ``(|d omega_X|, |antisymmetric part of nabla^T X|)`` so that the two
    vanishing statements can be compared.
    """
    fs = foliation.at(sample)
    maps = _field_maps(space, foliation, sample)
    xs = maps["xs"]
    g = sample.metric
    omega = J.einsum("ij,aj->ai", g.truncate(xs.order), xs)
    domega = _batched_d(omega, 1, sample.structure).truncate(0)
    p = fs.proj_perp.truncate(0)
    dperp = J.einsum("aij,ik,jl->akl", domega, p, p)
    anti = J.einsum("aij,ik,jl->akl", maps["anti"].truncate(0), p, p)
    res = float(np.max(np.abs(dperp.v - anti.v))) if space.dim else 0.0
    pairs = [(float(np.max(np.abs(dperp.v[:, a]))), float(np.max(np.abs(anti.v[:, a]))))
             for a in range(space.dim)]
    return res, pairs


# -- cross-checks between the matrix and pointwise pictures -----------------------------------


def codifferential_check(sol: HodgeSolution, fields: AnsatzSpace, foliation: Foliation,
                         sample: Sample, fit_tol: float = 1e-8) -> float:
    """``sup |delta_B omega_X + Div_T X|`` over the field ansatz basis."""
    a0, a1 = sol.spaces[0], sol.spaces[1]
    if fields.dim == 0 or a1.dim == 0:
        return 0.0
    maps = _field_maps(fields, foliation, sample)
    xs = maps["xs"].truncate(0)
    omega = J.einsum("ij,aj->ai", sample.metric.truncate(0), xs).v  # (S, m, n)
    basis1 = _flat(a1.values(sample).truncate(0).v)
    coef, *_ = np.linalg.lstsq(basis1, _flat(omega), rcond=None)
    fit = float(np.max(np.abs(basis1 @ coef - _flat(omega))))
    if fit > fit_tol * max(1.0, float(np.max(np.abs(omega)))):
        raise AnsatzNotClosed(f"omega_X of {fields.note} is not in the span of {a1.note}: {fit:.3e}")
    delta = sol.codifferential1 @ coef  # (m0, m)
    f0 = a0.values(sample).truncate(0).v  # (S, m0)
    lhs = f0 @ delta  # (S, m)
    div = maps["div"].truncate(0).v
    return float(np.max(np.abs(lhs + div)))


def laplacian_check(sol: HodgeSolution, foliation: Foliation, sample: Sample) -> float:
    """``sup |Delta_B f + Delta_T f|`` over the degree-0 basis."""
    a0 = sol.spaces[0]
    if a0.dim == 0:
        return 0.0
    fs = foliation.at(sample)
    vals = a0.values(sample)
    lap_b = vals.truncate(0).v @ sol.laplacian0
    lap_t = np.stack([transverse_laplacian_values(vals[a], fs).v for a in range(a0.dim)], axis=1)
    return float(np.max(np.abs(lap_b + lap_t)))


def bochner_field_residuals(space: AnsatzSpace, sub: Subspace, foliation: Foliation,
                            sample: Sample) -> list:
    """Bochner residuals for each basis vector of a subspace of the field ansatz."""
    fs = foliation.at(sample)
    vals = space.values(sample)
    out = []
    for k in range(sub.dim):
        x = J.einsum("a,ai->i", sub.basis[:, k], vals)
        out.append(bochner_residuals(x, fs))
    return out
