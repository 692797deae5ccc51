"""Verifiers for almost contact, Sasaki, eta-Einstein and 3-(alpha, delta) structures.

Endomorphisms are stored as ``phi[m, i] = (phi e_i)^m``; the fundamental
two-form is ``Phi(X, Y) = g(X, phi Y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import jet as J
from .chart import Field, Sample, bracket_values, exterior_derivative_values, sparse_form, sparse_wedge
from .foliation import (Foliation, lie_derivative_1form, lie_derivative_2tensor, lie_derivative_endomorphism)
from .gallery import ContactData
from .hodge import NULL_THRESHOLD, gram_matrix, nullspace
from .jet import Jet
from .riemannian import ricci_tensor


class StructureError(ValueError):
    """The input does not carry the structure the check needs."""


@dataclass
class StructureFit:
    """Fitted constants with the residual of each identity after the fit."""

    constants: dict
    residuals: dict
    classification: str = ""
    notes: list = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0


def _sup(x: Jet | np.ndarray) -> float:
    v = x.v if isinstance(x, Jet) else np.asarray(x)
    return float(np.max(np.abs(v))) if v.size else 0.0


def _parts(cd: ContactData, sample: Sample, order: int | None = None):
    xi, eta, phi = cd.xi(sample), cd.eta(sample), cd.phi(sample)
    if order is not None:
        xi, eta, phi = xi.truncate(order), eta.truncate(order), phi.truncate(order)
    return xi, eta, phi


def fundamental_form(cd: ContactData, sample: Sample) -> Jet:
    """``Phi[i, j] = g(e_i, phi e_j)``."""
    _, _, phi = _parts(cd, sample)
    return J.einsum("im,mj->ij", sample.metric.truncate(phi.order), phi)


# -- almost contact metric --------------------------------------------------------------


def almost_contact_check(cd: ContactData, sample: Sample) -> dict:
    """Sup residuals of the almost contact metric identities.

    Keys: ``phi_squared`` (phi^2 = -id + xi (x) eta), ``compatibility``
    (g(phi., phi.) = g - eta (x) eta), ``phi_xi`` (phi xi = 0), ``eta_dual``
    (eta = iota_xi g), ``eta_xi`` (eta(xi) = 1) and ``unit_length``
    (| |xi| - 1 |).
    """
    xi, eta, phi = _parts(cd, sample, 0)
    g = sample.metric.truncate(0)
    n = sample.n
    eye = sample.constant(np.eye(n), 0)
    sq = J.einsum("mk,ki->mi", phi, phi) + eye - J.einsum("m,i->mi", xi, eta)
    comp = J.einsum("ki,kl,lj->ij", phi, g, phi) - g + J.einsum("i,j->ij", eta, eta)
    length = J.sqrt(J.einsum("i,ij,j->", xi, g, xi))
    return {
        "phi_squared": _sup(sq),
        "compatibility": _sup(comp),
        "phi_xi": _sup(J.einsum("mi,i->m", phi, xi)),
        "eta_dual": _sup(eta - J.einsum("ij,i->j", g, xi)),
        "eta_xi": _sup(J.einsum("i,i->", eta, xi) - 1.0),
        "unit_length": _sup(length - 1.0),
    }


# -- Sasaki -------------------------------------------------------------------------------


def nijenhuis_tensor(phi: Jet, c: np.ndarray) -> Jet:
    """``N[m, i, j]``: components of ``phi^2 [e_i, e_j] + [phi e_i, phi e_j] - phi[phi e_i, e_j] - phi[e_i, phi e_j]``."""
    n = c.shape[0]
    dphi = J.grad(phi).truncate(0)  # dphi[m, i, k] = e_k (phi e_i)^m
    p0 = phi.truncate(0)
    cc = Jet.constant(c, phi.nsamples, n, 0)
    # [phi e_i, phi e_j]^m = (phi e_i)(phi e_j)^m - (phi e_j)(phi e_i)^m + c(phi e_i, phi e_j)
    pp = (J.einsum("mjk,ki->mij", dphi, p0) - J.einsum("mik,kj->mij", dphi, p0)
          + J.einsum("abm,ai,bj->mij", cc, p0, p0))
    # [phi e_i, e_j]^m = -e_j (phi e_i)^m + c(phi e_i, e_j)
    pe = -dphi + J.einsum("ajm,ai->mij", cc, p0)
    ep = -pe.transpose(0, 2, 1)  # [e_i, phi e_j] = -[phi e_j, e_i]
    sq = J.einsum("mk,kl->ml", p0, p0)
    out = J.einsum("ml,ijl->mij", sq, cc) + pp - J.einsum("mk,kij->mij", p0, pe) - J.einsum("mk,kij->mij", p0, ep)
    return out


def sasaki_check(cd: ContactData, sample: Sample) -> dict:
    """Residuals of normality ``[phi, phi] + d eta (x) xi`` and of ``d eta - 2 Phi``.

    Needs a sample of order at least 1 (fields are differentiated once).
    """
    c = sample.structure
    xi, eta, phi = _parts(cd, sample)
    deta = exterior_derivative_values(eta, 1, c).truncate(0)
    nij = nijenhuis_tensor(phi, c)
    normal = nij + J.einsum("ij,m->mij", deta, xi.truncate(0))
    contact = deta - fundamental_form(cd, sample).truncate(0) * 2.0
    return {"normality": _sup(normal), "d_eta_minus_2Phi": _sup(contact)}


def sasaki_residual(cd: ContactData, sample: Sample) -> float:
    return max(sasaki_check(cd, sample).values())


# -- eta-Einstein ---------------------------------------------------------------------------


def eta_einstein_fit(cd: ContactData | None, sample: Sample) -> StructureFit:
    """Least-squares fit of ``Ric = a g + b eta (x) eta`` over all sampled frame pairs.

    Raises:
        StructureError: Without a contact one-form.
    """
    if cd is None:
        raise StructureError("eta-Einstein fit needs a contact one-form eta")
    ric = ricci_tensor(sample).v
    g = sample.metric.truncate(0).v
    eta = cd.eta(sample).truncate(0).v
    ee = np.einsum("Zi,Zj->Zij", eta, eta)
    A = np.stack([g.reshape(-1), ee.reshape(-1)], axis=1)
    rhs = ric.reshape(-1)
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    res = float(np.max(np.abs(A @ sol - rhs)))
    a, b = (float(v) for v in sol)
    n = sample.n
    notes = [f"a + b = {a + b:.12g}; Sasaki manifolds have Ric(xi, xi) = dim - 1 = {n - 1}"]
    return StructureFit({"a": a, "b": b}, {"fit": res}, "eta-Einstein" if res < 1e-8 else "not eta-Einstein", notes)


# -- 3-structures ----------------------------------------------------------------------------


CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


def almost_three_contact_check(structures, sample: Sample) -> dict:
    """Interrelation residuals per even permutation ``(i, j, k)``.

    ``phi_k = phi_i phi_j - eta_j (x) xi_i = -phi_j phi_i + eta_i (x) xi_j``,
    ``xi_k = phi_i xi_j = -phi_j xi_i`` and ``eta_k = eta_i o phi_j = -eta_j o phi_i``.
    """
    parts = [_parts(cd, sample, 0) for cd in structures]
    out = {}
    for i, j, k in CYCLIC:
        xi_i, eta_i, phi_i = parts[i]
        xi_j, eta_j, phi_j = parts[j]
        xi_k, eta_k, phi_k = parts[k]
        r1 = J.einsum("mk,ki->mi", phi_i, phi_j) - J.einsum("m,i->mi", xi_i, eta_j) - phi_k
        r2 = -J.einsum("mk,ki->mi", phi_j, phi_i) + J.einsum("m,i->mi", xi_j, eta_i) - phi_k
        r3 = J.einsum("mi,i->m", phi_i, xi_j) - xi_k
        r4 = -J.einsum("mi,i->m", phi_j, xi_i) - xi_k
        r5 = J.einsum("m,mi->i", eta_i, phi_j) - eta_k
        r6 = -J.einsum("m,mi->i", eta_j, phi_i) - eta_k
        out[(i + 1, j + 1, k + 1)] = max(_sup(r) for r in (r1, r2, r3, r4, r5, r6))
    return out


def three_alpha_delta_check(structures, sample: Sample, band: float = 1e-9) -> StructureFit:
    """Fit ``d eta_i = 2 alpha Phi_i + 2 (alpha - delta) eta_j ^ eta_k`` over cyclic ``(i, j, k)``.

    Raises:
        StructureError: Unless exactly three structures are given.
    """
    if structures is None or isinstance(structures, ContactData) or len(structures) != 3:
        raise StructureError("the 3-(alpha, delta) check needs three almost contact structures")
    c = sample.structure
    rows, rhs = [], []
    for i, j, k in CYCLIC:
        cdi = structures[i]
        deta = exterior_derivative_values(cdi.eta(sample), 1, c).truncate(0).v
        Phi = fundamental_form(cdi, sample).truncate(0).v
        ej = structures[j].eta(sample).truncate(0).v
        ek = structures[k].eta(sample).truncate(0).v
        wedge = np.einsum("Za,Zb->Zab", ej, ek) - np.einsum("Za,Zb->Zab", ek, ej)
        rows.append(np.stack([2.0 * Phi.reshape(-1), 2.0 * wedge.reshape(-1)], axis=1))
        rhs.append(deta.reshape(-1))
    A, b = np.concatenate(rows), np.concatenate(rhs)
    (alpha, beta), *_ = np.linalg.lstsq(A, b, rcond=None)
    fit = float(np.max(np.abs(A @ np.array([alpha, beta]) - b)))
    delta = float(alpha - beta)
    inter = almost_three_contact_check(structures, sample)
    if abs(delta) < band:
        kind = "degenerate"
    else:
        kind = "positive" if alpha * delta > 0 else "negative"
    residuals = {"fit": fit, "interrelations": max(inter.values())}
    residuals.update({f"contact {n}": max(almost_contact_check(cd, sample).values())
                      for n, cd in enumerate(structures, 1)})
    return StructureFit({"alpha": float(alpha), "delta": delta}, residuals, kind,
                        [f"interrelations per cyclic triple: {inter}"])


# -- orientation densities -------------------------------------------------------------------


def _dense_form(x: Jet) -> np.ndarray:
    return x.truncate(0).v


def contact_density(cd: ContactData, sample: Sample) -> np.ndarray:
    """Coefficient of ``(d eta)^n ^ eta`` on ``e_1 ^ ... ^ e_{2n+1}`` at each sample point."""
    dim = sample.n
    if dim % 2 == 0:
        raise StructureError("contact density needs odd dimension")
    c = sample.structure
    deta = sparse_form(_dense_form(exterior_derivative_values(cd.eta(sample), 1, c)), 2)
    eta = sparse_form(_dense_form(cd.eta(sample)), 1)
    acc = eta
    for _ in range(dim // 2):
        acc = sparse_wedge(deta, acc)
    return np.asarray(acc.get(tuple(range(dim)), np.zeros(sample.size)), dtype=float)


def three_contact_density(structures, sample: Sample) -> np.ndarray:
    """Coefficient of ``(d eta_1)^{2n} ^ eta_1 ^ eta_2 ^ eta_3`` on the frame volume element."""
    dim = sample.n
    c = sample.structure
    d1 = sparse_form(_dense_form(exterior_derivative_values(structures[0].eta(sample), 1, c)), 2)
    acc = sparse_form(_dense_form(structures[0].eta(sample)), 1)
    for cd in structures[1:]:
        acc = sparse_wedge(acc, sparse_form(_dense_form(cd.eta(sample)), 1))
    for _ in range((dim - 3) // 2):
        acc = sparse_wedge(d1, acc)
    return np.asarray(acc.get(tuple(range(dim)), np.zeros(sample.size)), dtype=float)


# -- automorphisms ---------------------------------------------------------------------------


@dataclass
class AutomorphismReport:
    """Infinitesimal automorphisms found inside a declared candidate ansatz."""

    dim: int
    candidates: int
    singular_values: np.ndarray
    basis: np.ndarray
    killing_residual: float
    reeb_kernel_dim: int
    reeb_coefficient_variance: float
    reeb_detected: bool
    reeb_residual: float
    note: str = "dimension within ansatz"


def _structure_list(cd):
    if cd is None:
        return []
    if isinstance(cd, ContactData):
        return [cd]
    return list(cd)


def _invariance_rows(x: Jet, structures, sample: Sample) -> list:
    c = sample.structure
    g = sample.metric
    rows = [lie_derivative_2tensor(x, g, c).truncate(0)]
    for cd in structures:
        rows.append(bracket_values(x, cd.xi(sample), c).truncate(0))
        rows.append(lie_derivative_1form(x, cd.eta(sample), c).truncate(0))
        rows.append(lie_derivative_endomorphism(x, cd.phi(sample), c).truncate(0))
    return rows


def invariance_residual(X: Field, structures, sample: Sample) -> float:
    """Sup of ``L_X g``, ``L_X xi``, ``L_X eta``, ``L_X phi`` over all structures."""
    return max(_sup(r) for r in _invariance_rows(X(sample), _structure_list(structures), sample))


def automorphism_report(candidates, structures, foliation: Foliation, backend, sample: Sample,
                        resolution: int = 16) -> AutomorphismReport:
    """Nullspace of ``X -> (L_X g, L_X xi_i, L_X eta_i, L_X phi_i)`` on the candidate span.

    The candidates are first L^2-orthonormalized.  Found fields are then checked
    to project to transverse Killing fields, and the ones lying in the leaf
    directions to have constant Reeb coefficients.
    """
    structures = _structure_list(structures)
    if not structures:
        raise StructureError("automorphism report needs structure data")
    cands = list(candidates)
    gram = gram_matrix(cands, "field", 1, backend, resolution)
    lam, vec = np.linalg.eigh(gram)
    keep = lam > 1e-10 * float(lam.max())
    coeffs = vec[:, keep] / np.sqrt(lam[keep])
    raw = J.stack([F(sample) for F in cands], 0)
    vals = J.einsum("ra,rk->ak", coeffs, raw)
    m = coeffs.shape[1]
    cols = []
    for a in range(m):
        rows = _invariance_rows(vals[a], structures, sample)
        cols.append(np.concatenate([r.v.reshape(-1) for r in rows]))
    mat = np.stack(cols, axis=1)
    ns = nullspace(mat, rel=NULL_THRESHOLD, atol=1e-9 * math.sqrt(mat.shape[0]))
    basis = ns.basis
    fs = foliation.at(sample)
    c = sample.structure
    kill = 0.0
    found = J.einsum("ab,ak->bk", sample.constant(basis), vals) if basis.shape[1] else None
    if found is not None:
        for b in range(basis.shape[1]):
            xp = fs.perp(found[b])
            lg = lie_derivative_2tensor(xp, fs.transverse_metric, c)
            kill = max(kill, _sup(lg))
    # automorphisms lying in E: nullspace of the perpendicular part
    kdim, var = 0, 0.0
    if found is not None:
        perp = np.stack([fs.perp(found[b].truncate(0)).v.reshape(-1) for b in range(basis.shape[1])], axis=1)
        inner = nullspace(perp, rel=NULL_THRESHOLD, atol=1e-9 * math.sqrt(perp.shape[0]))
        kdim = inner.dim
        for col in inner.basis.T:
            x = J.einsum("b,bk->k", sample.constant(col, 0), found.truncate(0))
            coef = J.einsum("ak,k->a", fs.leaf_dual.truncate(0), x).v
            var = max(var, float(np.max(np.var(coef, axis=0))))
    # Reeb field(s) inside the found span
    reeb_res = 0.0
    span = found.truncate(0).v if found is not None else None
    for cd in structures:
        xi = cd.xi(sample).truncate(0).v
        inv = invariance_residual(cd.xi, structures, sample)
        if span is None:
            reeb_res = max(reeb_res, float(np.max(np.abs(xi))), inv)
            continue
        A = np.moveaxis(span, 1, -1).reshape(-1, span.shape[1])
        sol, *_ = np.linalg.lstsq(A, xi.reshape(-1), rcond=None)
        reeb_res = max(reeb_res, float(np.max(np.abs(A @ sol - xi.reshape(-1)))), inv)
    return AutomorphismReport(ns.dim, len(cands), ns.singular_values, basis, kill, kdim, var,
                              reeb_res < 1e-9, reeb_res)
