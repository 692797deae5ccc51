"""Verification suites over gallery examples and the report they produce.

Each check records a descriptive reference to the statement it tests, the
measured residual or dimension, the tolerance or expected value, and a status
``pass``, ``fail`` or ``not-applicable``.  Checks whose hypotheses do not hold
on an example are marked not-applicable rather than skipped.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property

import numpy as np

from . import jet as J
from .chart import (antisymmetry_residual, bracket_values, exterior_derivative_values, integrate,
                    jacobi_residual)
from .foliation import (classify_field, holonomy_residual, integrability_residual, leaf_independence,
                        mean_curvature_sup, volume_forms)
from .gallery import NAMES, ContactData, GalleryExample, construct, random_form, random_polynomial_field
from .hodge import (AnsatzNotClosed, AnsatzSpace, NotApplicable, Subspace, adjointness_residual,
                    bochner_field_residuals, build_basic_complex, classify_basic_harmonic, classify_killing,
                    classify_parallel, codifferential_check, harmonic_agreement, inclusion_angle,
                    laplacian_check, length_variance, nullspace, symmetry_equivalence, _field_maps, _flat)
from .riemannian import covariant_derivative, metric_pair
from .structures import (StructureError, almost_contact_check, automorphism_report, contact_density,
                         eta_einstein_fit, invariance_residual, sasaki_check, three_alpha_delta_check,
                         three_contact_density)
from .transverse import (compatibility_residual, divergence_from_volume, hessian_identity_residual,
                         koszul_residual_values, ricci_eigenvalues, torsion_residual,
                         transverse_divergence_values, transverse_ricci_tensor, transverse_riemann_lowered)

SCHEMA_VERSION = "1.0"
SUITES = ("structural", "transverse", "hodge", "bochner", "sasaki")
PASS, FAIL, NA = "pass", "fail", "not-applicable"

# fixed tolerances of individual statements
TOL_BOCHNER = 1e-7
TOL_ANGLE = 1e-6
TOL_KILLING_PROJECTION = 1e-7
TOL_REEB_VARIANCE = 1e-10
TOL_FIT = 1e-8
TOL_EXPECTED = 1e-6
TOL_FIT_INVARIANCE = 1e-9


@dataclass
class Tolerances:
    """``struct`` for exact identities, ``sampled`` for sampled invariance statements."""

    struct: float = 1e-9
    sampled: float = 1e-8
    quadrature: float = 1e-6


@dataclass
class RunConfig:
    examples: tuple = NAMES
    suites: tuple = SUITES
    seed: int = 0
    resolution: int | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    triples: int = 100
    random_forms: int = 50
    test_fields: int = 20


@dataclass
class Check:
    example: str
    suite: str
    name: str
    reference: str
    value: object
    tolerance: object
    status: str
    kind: str
    detail: str = ""


def _num(x):
    """Stable JSON number: 10 significant digits, integers unchanged."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.10g}")
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_num(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _num(v) for k, v in x.items()}
    return x


class _Suite:
    """Collects checks for one example and one suite."""

    def __init__(self, example: str, suite: str):
        self.example, self.suite = example, suite
        self.checks: list[Check] = []

    def _add(self, name, ref, value, tol, ok, kind, detail=""):
        self.checks.append(Check(self.example, self.suite, name, ref, _num(value), _num(tol),
                                 PASS if ok else FAIL, kind, detail))

    def below(self, name, ref, value, tol, detail=""):
        value = float(value)
        self._add(name, ref, value, tol, math.isfinite(value) and value < tol, "residual", detail)

    def above(self, name, ref, value, threshold, detail=""):
        value = float(value)
        self._add(name, ref, value, threshold, math.isfinite(value) and value > threshold, "lower-bound", detail)

    def equal(self, name, ref, value, expected, detail=""):
        self._add(name, ref, value, expected, value == expected, "dimension", detail)

    def at_most(self, name, ref, value, bound, detail=""):
        self._add(name, ref, value, bound, value <= bound, "bound", detail)

    def detects(self, name, ref, value, threshold, detail=""):
        """Negative control: passes when the expected failure is observed (value above threshold)."""
        value = float(value)
        self._add(name, ref, value, threshold, value > threshold, "negative-control", detail)

    def holds(self, name, ref, ok, detail=""):
        self._add(name, ref, bool(ok), True, bool(ok), "predicate", detail)

    def info(self, name, ref, value, detail=""):
        self._add(name, ref, value, None, True, "reported", detail)

    def na(self, name, ref, reason):
        self.checks.append(Check(self.example, self.suite, name, ref, None, None, NA, "gated", reason))

    def error(self, name, ref, exc):
        self.checks.append(Check(self.example, self.suite, name, ref, None, None, FAIL, "error",
                                 f"{type(exc).__name__}: {exc}"))


# -- per-example lazily computed state -------------------------------------------------------


class ExampleContext:
    """Caches samples, ansatz spaces and Hodge data shared between suites."""

    def __init__(self, example: GalleryExample, config: RunConfig):
        self.ex = example
        self.cfg = config
        self.resolution = config.resolution or example.resolution
        self._spaces: dict = {}
        self._solutions: dict = {}
        self._fields: dict = {}

    @cached_property
    def sample(self):
        return self.ex.sample(self.cfg.seed)

    @cached_property
    def sample_doubled(self):
        return self.ex.sample(self.cfg.seed + 1, grid=16, extra=64)

    @property
    def fs(self):
        return self.ex.foliation.at(self.sample)

    @cached_property
    def triple_sample(self):
        return self.ex.random_sample(self.cfg.seed + 17, self.cfg.triples)

    def random_triple(self, sample):
        seed = self.cfg.seed
        return tuple(random_polynomial_field(1000 * seed + k, 0.5)(sample) for k in range(3))

    def cutoffs(self):
        k = self.ex.default_cutoff
        return (k, 2 * k) if k else (k,)

    def forms(self, cutoff):
        if cutoff not in self._spaces:
            f0, f1, f2, note = self.ex.form_candidates(cutoff)
            self._spaces[cutoff] = tuple(
                AnsatzSpace.build("form", k, cands, self.ex.backend, self.ex.foliation, self.sample,
                                  self.resolution, f"{note}, degree {k}")
                for k, cands in enumerate((f0, f1, f2)))
        return self._spaces[cutoff]

    def hodge(self, cutoff=None):
        cutoff = self.ex.default_cutoff if cutoff is None else cutoff
        if cutoff not in self._solutions:
            self._solutions[cutoff] = build_basic_complex(*self.forms(cutoff), self.sample,
                                                          tol=self.cfg.tolerances.sampled)
        return self._solutions[cutoff]

    def fields(self, cutoff=None):
        cutoff = self.ex.default_cutoff if cutoff is None else cutoff
        if cutoff not in self._fields:
            cands, note = self.ex.field_candidates(cutoff)
            self._fields[cutoff] = AnsatzSpace.build("field", 1, cands, self.ex.backend, self.ex.foliation,
                                                     self.sample, self.resolution, note)
        return self._fields[cutoff]

    @cached_property
    def killing(self) -> Subspace:
        return classify_killing(self.fields(), self.ex.foliation, self.sample)

    @cached_property
    def parallel(self) -> Subspace:
        return classify_parallel(self.fields(), self.ex.foliation, self.sample)

    @cached_property
    def harmonic_fields(self) -> Subspace:
        return classify_basic_harmonic(self.fields(), self.ex.foliation, self.sample, self.ex.harmonic)

    @cached_property
    def ricci_range(self):
        ev = ricci_eigenvalues(self.fs)
        return float(np.min(ev)), float(np.max(ev))

    def expected(self, key, default=None):
        e = self.ex.expected.get(key)
        return default if e is None else e.value


def _sup(x) -> float:
    v = x.v if hasattr(x, "v") else np.asarray(x)
    return float(np.max(np.abs(v))) if np.size(v) else 0.0


# -- suites ------------------------------------------------------------------------------------


def structural_suite(ctx: ExampleContext) -> list:
    ex, tol = ctx.ex, ctx.cfg.tolerances
    s = _Suite(ex.name, "structural")
    c = ex.backend.structure_constants
    s.below("bracket antisymmetry", "structure constants of the frame are antisymmetric",
            antisymmetry_residual(c), tol.struct)
    s.below("Jacobi identity", "cyclic sum of nested frame brackets vanishes", jacobi_residual(c), tol.struct)

    sample = ctx.triple_sample
    worst = 0.0
    n = ex.dim
    for k in range(ctx.cfg.random_forms):
        degree = k % (min(n - 2, 2) + 1)
        w = random_form(10_000 + 97 * ctx.cfg.seed + k, degree)(sample)
        dw = exterior_derivative_values(w, degree, sample.structure)
        ddw = exterior_derivative_values(dw, degree + 1, sample.structure)
        worst = max(worst, _sup(ddw))
    s.below("d squared", f"d(d w) = 0 on {ctx.cfg.random_forms} random polynomial/trigonometric forms",
            worst, tol.struct)

    x, y, z = ctx.random_triple(sample)
    lhs = J.grad(metric_pair(y, z, sample))
    lhs = J.einsum("k,k->", lhs, x.truncate(lhs.order))
    nxy = J.einsum("mi,i->m", covariant_derivative(y, sample), x.truncate(1))
    nxz = J.einsum("mi,i->m", covariant_derivative(z, sample), x.truncate(1))
    comp = lhs - metric_pair(nxy, z, sample) - metric_pair(y, nxz, sample)
    s.below("Levi-Civita metric compatibility", "X g(Y, Z) = g(nabla_X Y, Z) + g(Y, nabla_X Z)",
            _sup(comp), tol.struct, f"{ctx.cfg.triples} random triples")
    tors = (J.einsum("mi,i->m", covariant_derivative(y, sample), x.truncate(1))
            - J.einsum("mi,i->m", covariant_derivative(x, sample), y.truncate(1))
            - bracket_values(x, y, sample.structure))
    s.below("Levi-Civita torsion", "nabla_X Y - nabla_Y X = [X, Y]", _sup(tors), tol.struct)

    s.above("leaf frame rank", "leaf fields are pointwise independent", leaf_independence(ex.foliation, ctx.sample),
            1e-6)
    s.below("integrability", "leaf distribution is involutive", integrability_residual(ex.foliation, ctx.sample),
            tol.struct)
    s.below("bundle-like metric", "transverse metric is invariant along leaves (L_X g_T = 0 for X in E)",
            holonomy_residual(ex.foliation, ctx.sample), tol.sampled)
    try:
        vf = volume_forms(ex.foliation, ctx.sample)
        s.above("transverse orientation", "supplied transverse frame is consistently oriented",
                float(np.min(vf.orientation)), 0.0)
    except ValueError as exc:
        s.error("transverse orientation", "supplied transverse frame is consistently oriented", exc)

    h = mean_curvature_sup(ex.foliation, ctx.sample)
    if ex.harmonic:
        s.below("harmonic foliation", "leaves are minimal: sup |H| vanishes", h, tol.struct)
    else:
        s.detects("non-harmonic control", "warped leaves have nonzero mean curvature: sup |H| > 0.1", h, 0.1)
        exp = ctx.expected("mean_curvature_sup")
        if exp is not None:
            fine = mean_curvature_sup(ex.foliation, ex.sample(ctx.cfg.seed, grid=4096, extra=0))
            s.below("mean curvature value", "sup |H| matches the closed form", abs(fine - exp), 1e-5,
                    "sampled on a fine grid")

    res = integrate(lambda smp: smp.constant(1.0), ex.backend, ctx.resolution, tolerance=tol.quadrature)
    vol = ctx.expected("volume")
    detail = "" if res.converged else f"non-convergent quadrature: relative change {res.relative_change:.3e}"
    if vol is not None:
        s.below("total volume", "quadrature reproduces the known volume", abs(res.value - vol) / vol,
                tol.quadrature, detail)
    else:
        s.info("total volume", "quadrature of the Riemannian volume", res.value, detail)
    s.below("quadrature convergence", "relative change under resolution doubling", res.relative_change,
            tol.quadrature)

    if ex.foliate_fields is not None:
        rng = np.random.default_rng(ctx.cfg.seed)
        fields = ex.foliate_fields(rng, 5)
        worst = max(classify_field(F, ex.foliation, ctx.sample).foliate_residual for F in fields)
        s.below("foliate test fields", "[leaf field, X] stays tangent to the leaves", worst, tol.sampled)
    if ex.non_foliate_field is not None:
        cl = classify_field(ex.non_foliate_field, ex.foliation, ctx.sample, tol.sampled)
        s.detects("non-foliate control", f"{ex.non_foliate_field.name} is classified as not foliate",
                  cl.foliate_residual, tol.sampled, f"is_foliate={cl.is_foliate}")
    return s.checks


def transverse_suite(ctx: ExampleContext) -> list:
    ex, tol = ctx.ex, ctx.cfg.tolerances
    s = _Suite(ex.name, "transverse")
    sample = ctx.triple_sample
    fs = ex.foliation.at(sample)
    x, y, z = ctx.random_triple(sample)
    s.below("Bott connection metric compatibility", "X g_T(Y, Z) = g_T(nabla^T_X Y, Z) + g_T(Y, nabla^T_X Z)",
            float(np.max(compatibility_residual(x, y, z, fs))), tol.struct, f"{ctx.cfg.triples} random triples")
    s.below("Bott connection torsion", "nabla^T_Y Z - nabla^T_Z Y = [Y, Z]^perp",
            float(np.max(torsion_residual(y, z, fs))), tol.struct)
    s.below("Koszul formula", "2 g_T(nabla^T_X Y, Z) equals the transverse Koszul expression",
            float(np.max(koszul_residual_values(x, y, z, fs))), tol.struct)

    fs = ctx.fs
    rl = transverse_riemann_lowered(fs).truncate(0).v
    leaf = fs.leaf.truncate(0).v
    along = max(_sup(np.einsum("Zia,Zijkv->Zajkv", leaf, rl)), _sup(np.einsum("Zja,Zijkv->Ziakv", leaf, rl)))
    s.below("curvature along leaves", "iota_X R^T = 0 for X tangent to the leaves", along, tol.sampled)
    p = fs.proj_perp.truncate(0).v
    rp = np.einsum("Zijkv,Zia,Zjb,Zkc,Zvd->Zabcd", rl, p, p, p, p)
    sym = max(_sup(rp + np.swapaxes(rp, 1, 2)), _sup(rp + np.swapaxes(rp, 3, 4)),
              _sup(rp - np.transpose(rp, (0, 3, 4, 1, 2))),
              _sup(rp + np.transpose(rp, (0, 2, 3, 1, 4)) + np.transpose(rp, (0, 3, 1, 2, 4))))
    s.below("transverse curvature symmetries", "R^T is antisymmetric in both pairs, pair-symmetric and satisfies Bianchi",
            sym, tol.sampled)
    factor = ctx.expected("ricci_transverse_factor")
    ric = transverse_ricci_tensor(fs).truncate(0).v
    gt = fs.transverse_metric.truncate(0).v
    if factor is not None:
        s.below("transverse Ricci", f"Ric^T = {factor:g} g_T", _sup(ric - factor * gt), tol.sampled)
    lo, hi = ctx.ricci_range
    s.info("transverse Ricci eigenvalues", "min and max eigenvalue of Ric^T on an orthonormal frame", [lo, hi])

    if ex.foliate_fields is None:
        return s.checks
    rng = np.random.default_rng(ctx.cfg.seed + 5)
    fields = ex.foliate_fields(rng, ctx.cfg.test_fields)
    worst = 0.0
    for F in fields[:5]:
        v = F(ctx.sample)
        worst = max(worst, _sup(transverse_divergence_values(v, fs) - divergence_from_volume(v, fs)))
    s.below("divergence cross-check", "Div_T X from nabla^T agrees with -sum_a g_T([X, F_a], F_a)",
            worst, tol.sampled)
    ref = "integral of Div_T X against the volume vanishes on a harmonic foliation"
    name = f"transverse divergence theorem ({len(fields)} foliate fields)"
    if not ex.harmonic:
        s.na(name, ref, "foliation is not harmonic")
        return s.checks

    def integrand(smp):
        f2 = ex.foliation.at(smp)
        return J.stack([transverse_divergence_values(F(smp), f2) for F in fields])

    from .chart import integrate_values
    vals = integrate_values(ex.backend, integrand, ctx.cfg.resolution or ex.divergence_resolution or ctx.resolution,
                            order=1)
    s.below(name, ref, float(np.max(np.abs(vals))), tol.sampled)
    return s.checks


def hodge_suite(ctx: ExampleContext) -> list:
    ex, tol = ctx.ex, ctx.cfg.tolerances
    s = _Suite(ex.name, "hodge")
    ref_fit = "d maps the degree-k ansatz into the degree-(k+1) ansatz"
    try:
        sol = ctx.hodge()
    except AnsatzNotClosed as exc:
        s.error("ansatz closed under d", ref_fit, exc)
        return s.checks
    spaces = sol.spaces
    note = spaces[1].note
    s.below("ansatz closed under d", ref_fit, sol.fit_residual, tol.sampled, note)
    s.below("ansatz basic", "ansatz forms are annihilated by iota_X and iota_X d for leaf fields X",
            max(sp.basic_residual for sp in spaces), tol.sampled, f"dims {[sp.dim for sp in spaces]}")
    if sol.d1.size and sol.d0.size:
        s.below("d_B squared", "d_B d_B = 0 on the ansatz", _sup(sol.d1 @ sol.d0), tol.sampled)
    s.below("codifferential adjoint", "<d_B f, w> = <f, delta_B w> with the left side integrated directly",
            adjointness_residual(sol, ex.backend, ctx.resolution), tol.sampled)
    b1 = sol.b1_harmonic
    s.equal("basic Hodge isomorphism", "dim ker Delta_B = dim H^1_B on the same ansatz",
            b1, sol.b1_cohomological, note)
    nh, ncc, ang = harmonic_agreement(sol)
    s.below("harmonic equals closed and coclosed", "ker Delta_B = ker d_B ∩ ker delta_B (principal angles)",
            ang, TOL_ANGLE, f"dims {nh} and {ncc}")
    exp = ctx.expected("b1")
    if exp is not None:
        s.equal("b1", "first basic Betti number (dimension within ansatz)", b1, exp, note)
    s.at_most("b1 bounded by codimension", "b_1 <= q", b1, ex.codim)
    for cutoff in ctx.cutoffs()[1:]:
        try:
            s.equal(f"b1 stable at cutoff {cutoff}", "b_1 unchanged under ansatz-cutoff doubling",
                    ctx.hodge(cutoff).b1_harmonic, b1)
        except AnsatzNotClosed as exc:
            s.error(f"b1 stable at cutoff {cutoff}", "b_1 unchanged under ansatz-cutoff doubling", exc)
    gap = sol.spectral_gap()
    s.info("spectral gap", f"first nonzero over largest null eigenvalue (threshold {sol.threshold:.1e})",
           gap if math.isfinite(gap) else "inf")

    fields = ctx.fields()
    s.below("field ansatz transverse-foliate", "field ansatz elements are foliate and lie in E^perp",
            fields.basic_residual, tol.sampled, fields.note)
    if ex.harmonic:
        try:
            s.below("codifferential of dual one-form", "delta_B omega_X = -Div_T X",
                    codifferential_check(sol, fields, ex.foliation, ctx.sample), TOL_BOCHNER)
        except AnsatzNotClosed as exc:
            s.error("codifferential of dual one-form", "delta_B omega_X = -Div_T X", exc)
        s.below("basic Laplacian on functions", "Delta_B f = -Delta_T f",
                laplacian_check(sol, ex.foliation, ctx.sample), TOL_BOCHNER)
    else:
        s.na("codifferential of dual one-form", "delta_B omega_X = -Div_T X", "foliation is not harmonic")
        s.na("basic Laplacian on functions", "Delta_B f = -Delta_T f", "foliation is not harmonic")
    res, _ = symmetry_equivalence(fields, ex.foliation, ctx.sample)
    s.below("dual one-form closedness", "d omega_X(Y, Z) = g_T(nabla^T_Y X, Z) - g_T(nabla^T_Z X, Y)",
            res, tol.sampled)
    iso, par = ctx.killing.dim, ctx.parallel.dim
    for key, label, value in (("iso", "transverse Killing fields", iso), ("parallel", "transverse parallel fields", par)):
        exp = ctx.expected(key)
        if exp is not None:
            s.equal(f"dim {key}", f"dimension of {label} within ansatz", value, exp, fields.note)
    ref = "dim iso = b_1 when Ric^T vanishes"
    if ex.transverse_flat:
        s.equal("Killing dimension equals b1", ref, iso, b1)
    else:
        s.na("Killing dimension equals b1", ref, "transverse Ricci curvature does not vanish")
    return s.checks


def bochner_suite(ctx: ExampleContext) -> list:
    ex = ctx.ex
    s = _Suite(ex.name, "bochner")
    names = [
        ("Bochner gradient identity", "grad(g_T(X, X)/2) = nabla^T_X X for basic harmonic X"),
        ("Bochner Laplacian identity", "Delta_T f = |nabla^T X|^2 + Ric^T(X, X) for basic harmonic X"),
        ("harmonic fields are parallel", "basic harmonic subspace lies in the parallel subspace"),
        ("positive Ricci kills harmonic fields", "Ric^T > 0 forces no basic harmonic fields and b_1 = 0"),
        ("Bochner formula with divergence term",
         "Delta_T f = |nabla^T X|^2 + Ric^T(X, X) + X(Div_T X) for symmetric nabla^T X"),
        ("Hessian identity", "pointwise Hessian identity for g_T(X, X)/2 with symmetric nabla^T X"),
    ]
    if not ex.harmonic:
        for name, ref in names:
            s.na(name, ref, "foliation is not harmonic")
        return s.checks
    lo, hi = ctx.ricci_range
    tol0 = ctx.cfg.tolerances.sampled
    s.info("transverse Ricci sign", "min eigenvalue of Ric^T over the sample", lo)
    harm = ctx.harmonic_fields
    fields = ctx.fields()
    exp = ctx.expected("basic_harmonic")
    if exp is not None:
        s.equal("dim basic harmonic", "dimension of basic harmonic fields within ansatz", harm.dim, exp, fields.note)
    res = bochner_field_residuals(fields, harm, ex.foliation, ctx.sample)
    (n1, r1), (n2, r2), (n3, r3), (n4, r4), (n5, r5), (n6, r6) = names
    if res:
        s.below(n1, r1, max(r.gradient for r in res), TOL_BOCHNER, f"{harm.dim} certified fields")
        s.below(n2, r2, max(r.laplacian for r in res), TOL_BOCHNER, f"{harm.dim} certified fields")
    else:
        s.na(n1, r1, "no basic harmonic fields in the ansatz")
        s.na(n2, r2, "no basic harmonic fields in the ansatz")
    if lo >= -tol0:
        par = ctx.parallel
        angle = inclusion_angle(harm.basis, par.basis) if harm.dim else 0.0
        s.below(n3, r3, angle, TOL_ANGLE, f"dims {harm.dim} and {par.dim}")
        s.below("parallel fields have constant length", "g_T(X, X) is constant for parallel X",
                length_variance(fields, par, ex.foliation, ctx.sample), TOL_REEB_VARIANCE)
    else:
        s.na(n3, r3, f"Ric^T is indefinite (min eigenvalue {lo:.3g})")
    if lo > tol0:
        b1 = ctx.hodge().b1_harmonic
        s.holds(n4, r4, harm.dim == 0 and b1 == 0, f"dim harmonic {harm.dim}, b1 {b1}")
    else:
        s.na(n4, r4, "Ric^T is not positive")

    # fields with symmetric nabla^T X: nullspace of the antisymmetric part only
    anti = _flat(_field_maps(fields, ex.foliation, ctx.sample)["anti"].v) if fields.dim else np.zeros((0, 0))
    symm = nullspace(anti) if fields.dim else Subspace(np.zeros((0, 0)), np.zeros(0), 0.0)
    if symm.dim:
        keep = Subspace(symm.basis[:, :6], symm.singular_values, symm.threshold)
        gen = bochner_field_residuals(fields, keep, ex.foliation, ctx.sample)
        s.below(n5, r5, max(r.laplacian_general for r in gen), TOL_BOCHNER, f"{keep.dim} fields")
        fs = ctx.fs
        vals = fields.values(ctx.sample)
        ys = random_polynomial_field(4242 + ctx.cfg.seed, 0.5)(ctx.sample)
        worst = 0.0
        for k in range(keep.dim):
            x = J.einsum("a,ai->i", keep.basis[:, k], vals)
            worst = max(worst, float(np.max(hessian_identity_residual(x, ys, fs))))
        s.below(n6, r6, worst, TOL_BOCHNER, f"{keep.dim} fields, random Y")
    else:
        s.na(n5, r5, "no fields with symmetric nabla^T X in the ansatz")
        s.na(n6, r6, "no fields with symmetric nabla^T X in the ansatz")
    return s.checks


def _contactless(ex: GalleryExample) -> ContactData | None:
    """A cosymplectic-type structure on the flat product: almost contact but not Sasaki."""
    if ex.name != "product_t3":
        return None
    from .chart import Field, Form
    e = np.eye(3)
    phi = np.array([[0.0, 0, 0], [0, 0, -1], [0, 1, 0]])
    return ContactData(Field.constant(e[0], "d/dx"), Form.constant(e[0], "dx"), lambda smp: smp.constant(phi),
                       "flat product structure")


def sasaki_suite(ctx: ExampleContext) -> list:
    ex, tol = ctx.ex, ctx.cfg.tolerances
    s = _Suite(ex.name, "sasaki")
    sample = ctx.sample
    if ex.contact is None and ex.three_contact is None:
        flat = _contactless(ex)
        if flat is None:
            s.na("Sasaki structure", "Sasaki structure equations", "example carries no contact structure")
            return s.checks
        s.below("almost contact identities (control)", "flat product structure is almost contact metric",
                max(almost_contact_check(flat, sample).values()), tol.struct)
        s.detects("Sasaki control", "flat product structure violates d eta = 2 Phi",
                  sasaki_check(flat, sample)["d_eta_minus_2Phi"], 0.1)
        try:
            eta_einstein_fit(None, sample)
            s.holds("eta-Einstein fit refused", "fit needs a contact form", False)
        except StructureError as exc:
            s.holds("eta-Einstein fit refused", "fit needs a contact form", True, str(exc))
        return s.checks

    structures = [ex.contact] if ex.contact is not None else list(ex.three_contact)
    for cd in structures:
        s.below(f"almost contact identities ({cd.name})",
                "phi^2 = -id + xi (x) eta, g(phi., phi.) = g - eta (x) eta, phi xi = 0, eta = g(xi, .)",
                max(almost_contact_check(cd, sample).values()), tol.struct)
    s.below("characteristic foliation harmonic", "Reeb leaves are minimal",
            mean_curvature_sup(ex.foliation, sample), tol.struct)
    scaled = structures[0].scaled(2.0)
    s.detects("scaled Reeb control", "xi of length 2 violates unit length", almost_contact_check(scaled, sample)["unit_length"],
              0.5)

    if ex.contact is not None:
        cd = ex.contact
        res = sasaki_check(cd, sample)
        s.below("normality", "[phi, phi] + d eta (x) xi = 0", res["normality"], tol.struct)
        s.below("contact condition", "d eta = 2 Phi", res["d_eta_minus_2Phi"], tol.struct)
        dens = contact_density(cd, sample)
        s.above("contact volume density", "(d eta)^n ^ eta is nowhere zero with one sign",
                float(np.min(np.abs(dens))) if np.all(np.sign(dens) == np.sign(dens[0])) else 0.0, 1e-6)
        fit = eta_einstein_fit(cd, sample)
        a, b = fit.constants["a"], fit.constants["b"]
        s.below("eta-Einstein fit residual", "Ric = a g + b eta (x) eta", fit.residuals["fit"], TOL_FIT,
                f"a = {a:.10g}, b = {b:.10g}")
        exp = ctx.expected("eta_einstein")
        if exp is not None:
            s.below("eta-Einstein constants", f"(a, b) = ({exp[0]:g}, {exp[1]:g})",
                    max(abs(a - exp[0]), abs(b - exp[1])), TOL_EXPECTED)
        s.below("Reeb Ricci", "a + b = dim - 1 for Sasaki", abs(a + b - (ex.dim - 1)), TOL_EXPECTED)
        refit = eta_einstein_fit(cd, ctx.sample_doubled)
        s.below("eta-Einstein fit invariance", "constants unchanged when the sample set is doubled",
                max(abs(refit.constants[k] - fit.constants[k]) for k in "ab"), TOL_FIT_INVARIANCE)
        if ex.transverse_flat:
            s.above("eta-Einstein with b nonzero", "transverse Calabi-Yau Sasaki manifold is not Einstein: |b| > 0.1",
                    abs(b), 0.1)
    else:
        fit = three_alpha_delta_check(ex.three_contact, sample)
        alpha, delta = fit.constants["alpha"], fit.constants["delta"]
        s.below("3-(alpha, delta) fit residual", "d eta_i = 2 alpha Phi_i + 2 (alpha - delta) eta_j ^ eta_k",
                fit.residuals["fit"], TOL_FIT, f"alpha = {alpha:.10g}, delta = {delta:.10g}")
        s.below("almost 3-contact relations", "phi_k = phi_i phi_j - eta_j (x) xi_i and companions, all cyclic (i, j, k)",
                fit.residuals["interrelations"], tol.struct)
        exp = ctx.expected("alpha_delta")
        if exp is not None:
            s.below("3-(alpha, delta) constants", f"(alpha, delta) = ({exp[0]:g}, {exp[1]:g})",
                    max(abs(alpha - exp[0]), abs(delta - exp[1])), TOL_EXPECTED)
        s.holds("degenerate classification", "delta = 0 within the zero band", fit.classification == "degenerate",
                fit.classification)
        refit = three_alpha_delta_check(ex.three_contact, ctx.sample_doubled)
        s.below("3-(alpha, delta) fit invariance", "constants unchanged when the sample set is doubled",
                max(abs(refit.constants[k] - fit.constants[k]) for k in ("alpha", "delta")), TOL_FIT_INVARIANCE)
        dens = three_contact_density(ex.three_contact, sample)
        s.above("3-contact volume density", "(d eta_1)^{2n} ^ eta_1 ^ eta_2 ^ eta_3 is nowhere zero",
                float(np.min(np.abs(dens))), 1e-6)
        try:
            three_alpha_delta_check(ex.three_contact[0], sample)
            s.holds("single structure refused", "3-(alpha, delta) check needs three structures", False)
        except StructureError as exc:
            s.holds("single structure refused", "3-(alpha, delta) check needs three structures", True, str(exc))

    if ex.automorphism_candidates is None:
        s.na("automorphisms", "infinitesimal automorphisms", "no candidate ansatz declared")
        return s.checks
    structs = ex.contact if ex.contact is not None else ex.three_contact
    cands = ex.automorphism_candidates()
    rep = automorphism_report(cands, structs, ex.foliation, ex.backend, sample, min(ctx.resolution, 16))
    s.info("automorphism dimension", "dimension within ansatz of aut", rep.dim, f"{rep.candidates} candidates")
    exp = ctx.expected("aut_dim")
    if exp is not None:
        s.equal("automorphism dimension", "dimension within ansatz of aut", rep.dim, exp)
    s.holds("Reeb field is an automorphism", "L_xi of g, xi, eta, phi vanish and xi lies in aut",
            rep.reeb_detected, f"residual {rep.reeb_residual:.3e}")
    s.below("automorphisms project to Killing fields", "projection of aut to E^perp is transverse Killing",
            rep.killing_residual, TOL_KILLING_PROJECTION)
    s.below("automorphisms along leaves", "aut ∩ E consists of constant combinations of Reeb fields",
            rep.reeb_coefficient_variance, TOL_REEB_VARIANCE, f"dim aut ∩ E = {rep.reeb_kernel_dim}")
    b1 = ctx.hodge().b1_harmonic
    rk = ex.rank
    ref = "dim aut <= b_1 + rk E (needs vanishing Ric^T)"
    if ex.transverse_flat:
        s.at_most("automorphism bound", ref, rep.dim, b1 + rk, "dimension within ansatz")
    else:
        s.na("automorphism bound", ref, f"Ric^T does not vanish; b_1 + rk E = {b1 + rk}")
    s.at_most("automorphism rank-nullity bound", "dim aut <= dim iso + rk E", rep.dim, ctx.killing.dim + rk,
              "dimension within ansatz")
    if ex.contact is not None:
        nonconst = [F for F in cands if "*xi" in F.name]
        if nonconst:
            worst = min(invariance_residual(F, structs, sample) for F in nonconst)
            s.detects("basic multiple of Reeb rejected", "f xi with non-constant basic f is not an automorphism",
                      worst, 1e-3, ", ".join(F.name for F in nonconst))
    return s.checks


_SUITE_FUNCS = {
    "structural": structural_suite,
    "transverse": transverse_suite,
    "hodge": hodge_suite,
    "bochner": bochner_suite,
    "sasaki": sasaki_suite,
}


# -- the report ----------------------------------------------------------------------------


@dataclass
class VerificationReport:
    config: dict
    checks: list
    tables: list
    warnings: list

    @property
    def counts(self) -> dict:
        out = {PASS: 0, FAIL: 0, NA: 0}
        for c in self.checks:
            out[c.status] += 1
        return out

    @property
    def failed(self) -> bool:
        return self.counts[FAIL] > 0

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "summary": self.counts,
            "checks": [asdict(c) for c in self.checks],
            "tables": self.tables,
            "warnings": self.warnings,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _cell(value) -> str:
    return str(value).replace("|", "\\|")


def markdown_from_json(data: dict) -> str:
    """Render the JSON document; all numbers come from the JSON itself."""
    lines = [f"# Verification report (schema {data['schema_version']})", ""]
    s = data["summary"]
    lines.append(f"pass {s[PASS]}, fail {s[FAIL]}, not-applicable {s[NA]}")
    lines.append("")
    if data["tables"]:
        lines += ["## Dimensions", "",
                  "| example | q | b1 | dim iso | dim parallel | dim harmonic | aut (within ansatz) | aut bound | Ric^T eigenvalues |",
                  "|---|---|---|---|---|---|---|---|---|"]
        for row in data["tables"]:
            lines.append("| " + " | ".join(str(row.get(k, "")) for k in
                                             ("example", "q", "b1", "iso", "parallel", "harmonic", "aut", "aut_bound",
                                              "ricci_T")) + " |")
        lines.append("")
        lines += ["## Residual histograms", "", "| example | decade counts (log10 residual: count) |", "|---|---|"]
        for row in data["tables"]:
            hist = ", ".join(f"{k}: {v}" for k, v in row.get("residual_histogram", {}).items())
            lines.append(f"| {row['example']} | {hist} |")
        lines.append("")
    lines += ["## Checks", "", "| example | suite | check | status | value | tolerance | statement |",
              "|---|---|---|---|---|---|---|"]
    for c in data["checks"]:
        cells = [c["example"], c["suite"], c["name"], c["status"], c["value"], c["tolerance"], c["reference"]]
        lines.append("| " + " | ".join(_cell(v) for v in cells) + " |")
    if data["warnings"]:
        lines += ["", "## Warnings", ""] + [f"- {w}" for w in data["warnings"]]
    return "\n".join(lines) + "\n"


def _histogram(checks) -> dict:
    out: dict = {}
    for c in checks:
        if c.kind != "residual" or not isinstance(c.value, float):
            continue
        key = "0" if c.value == 0.0 else str(int(math.floor(math.log10(abs(c.value)))))
        out[key] = out.get(key, 0) + 1
    return dict(sorted(out.items(), key=lambda kv: -1e9 if kv[0] == "0" else float(kv[0])))


def _table_row(ctx: ExampleContext, checks) -> dict:
    row = {"example": ctx.ex.name, "q": ctx.ex.codim}
    try:
        row["b1"] = ctx.hodge().b1_harmonic
    except AnsatzNotClosed:
        row["b1"] = None
    row["iso"] = ctx.killing.dim
    row["parallel"] = ctx.parallel.dim
    try:
        row["harmonic"] = ctx.harmonic_fields.dim
    except NotApplicable:
        row["harmonic"] = NA
    lo, hi = ctx.ricci_range
    row["ricci_T"] = _num([lo, hi])
    aut = [c for c in checks if c.name == "automorphism dimension" and c.kind == "reported"]
    row["aut"] = aut[0].value if aut else None
    bound = [c for c in checks if c.name == "automorphism bound"]
    if bound:
        row["aut_bound"] = bound[0].tolerance if bound[0].status != NA else NA
    row["residual_histogram"] = _histogram(checks)
    return row


def run(config: RunConfig, tables: bool = False) -> VerificationReport:
    """Run the configured suites; deterministic for a fixed configuration."""
    for name in config.examples:
        if name not in NAMES:
            raise KeyError(f"unknown example {name!r}")
    for suite in config.suites:
        if suite not in _SUITE_FUNCS:
            raise KeyError(f"unknown suite {suite!r}")
    checks, rows, warnings = [], [], []
    for name in config.examples:
        ctx = ExampleContext(construct(name), config)
        mine = []
        for suite in config.suites:
            try:
                mine += _SUITE_FUNCS[suite](ctx)
            except Exception as exc:  # report, never crash the batch
                bad = _Suite(name, suite)
                bad.error("suite", "suite ran to completion", exc)
                mine += bad.checks
        for c in mine:
            if "non-convergent quadrature" in c.detail:
                warnings.append(f"{c.example}: {c.detail}")
        checks += mine
        if tables:
            rows.append(_table_row(ctx, mine))
    cfg = {
        "examples": list(config.examples),
        "suites": list(config.suites),
        "seed": config.seed,
        "resolution": config.resolution,
        "tolerances": _num(asdict(config.tolerances)),
    }
    return VerificationReport(cfg, checks, rows, warnings)
