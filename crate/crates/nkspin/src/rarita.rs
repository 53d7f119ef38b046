//! Rarita-Schwinger fields on `S³×S³`: sections of `S_{3/2}` in the kernel
//! of the twisted Dirac operator, their correspondence with harmonic
//! 3-forms, and the estimate that rules them out on the round product.

use serde::Serialize;
use thiserror::Error;

use crate::clifford::{assemble_spinor_vector, extract_symbols, killing, CliffordError, SpinorSymbols, s32_membership_residuals};
use crate::exterior::{hodge, Endo6, Form, Vec6, N};
use crate::homogeneous::FrameGeometry;
use crate::linalg::{complexify, hermitian_eigen, identity, max_abs_vec, nullspace, subspace_sine, vstack, CMat, CVec, RankSummary, C64};
use crate::opcalc::{
    covariant_derivative, fiber, harmonic_three_forms, invariant_operators, pi_operator, realify, twisted_dirac, twistor,
    BundleSpec, InvariantOperators, Mode, SectionSpace,
};
use crate::par;
use crate::report::{Assertion, Observation, Provenance, SuiteReport, Tolerances};

#[derive(Debug, Error)]
pub enum RaritaError {
    #[error("the geometry carries no SU(3)-structure")]
    NoSu3Structure,
    #[error("expected a 3-form")]
    NotThreeForm,
    #[error("form is not harmonic: |Δσ| = {residual:.3e}")]
    NotHarmonic { residual: f64 },
    #[error("form is not primitive of type (2,1)+(1,2): |α| = {alpha:.3e}, a+ = {a_plus:.3e}, a- = {a_minus:.3e}")]
    WrongType { alpha: f64, a_plus: f64, a_minus: f64 },
    #[error(transparent)]
    Clifford(#[from] CliffordError),
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SolutionResiduals {
    pub pi: f64,
    pub dirac: f64,
    pub twistor_adjoint: f64,
}

#[derive(Clone, Debug)]
pub struct RaritaSolution {
    /// Coefficients in the section space (mode ⊗ `S_{1/2}⊗TM`).
    pub section: CVec,
    /// Form symbols; only defined for invariant sections with an SU(3)-structure.
    pub symbols: Option<SpinorSymbols>,
    pub source_form: Option<Form>,
    pub residuals: SolutionResiduals,
}

/// The stacked kernel computation on one section space.
#[derive(Clone, Debug)]
pub struct RaritaKernel {
    pub metric: String,
    pub space: String,
    /// `ker D_TM ∩ ker Π ∩ ker P*`.
    pub kernel: RankSummary,
    /// `ker D_TM ∩ ker Π` alone.
    pub kernel_without_twistor: RankSummary,
    /// Orthonormal kernel basis as computed (real on invariant sections).
    pub basis: CMat,
    /// Kernel vectors aligned with the harmonic projections of the factor
    /// volume forms where that applies, else the computed basis.
    pub solutions: Vec<RaritaSolution>,
    /// Largest distance of an aligned target from the kernel.
    pub alignment_residual: Option<f64>,
    pub warning: Option<String>,
}

/// `D_TM`, `Π` and `P*` on one mode.
pub struct RsOperators {
    pub dirac: CMat,
    pub pi: CMat,
    pub twistor_adjoint: CMat,
}

pub fn rs_operators(geom: &FrameGeometry, mode: Mode) -> RsOperators {
    let st = SectionSpace::new(geom, BundleSpec::SpinorTangent, mode);
    let ss = SectionSpace::new(geom, BundleSpec::Spinor, mode);
    RsOperators { dirac: twisted_dirac(&st, false), pi: pi_operator(&st), twistor_adjoint: twistor(&ss).adjoint() }
}

fn residuals_of(ops: &RsOperators, v: &CVec) -> SolutionResiduals {
    let scale = 1.0_f64.max(max_abs_vec(v));
    let r = |m: &CMat| max_abs_vec(&(m * v)) / scale;
    SolutionResiduals { pi: r(&ops.pi), dirac: r(&ops.dirac), twistor_adjoint: r(&ops.twistor_adjoint) }
}

const GAP_WARNING: f64 = 10.0;

pub fn solve_rarita(geom: &FrameGeometry, mode: Mode, rank_tol: f64) -> RaritaKernel {
    let ops = rs_operators(geom, mode);
    let full = vstack(&[&ops.dirac, &ops.pi, &ops.twistor_adjoint]);
    let partial = vstack(&[&ops.dirac, &ops.pi]);
    let k = nullspace(&full, rank_tol);
    let k2 = nullspace(&partial, rank_tol);
    let basis = if mode.is_invariant() { realify(&k.basis) } else { k.basis.clone() };
    let mut warning = None;
    if k.gap < GAP_WARNING {
        warning = Some(format!("ill-conditioned rank decision: spectral gap {:.3e}", k.gap));
    }
    let mut alignment_residual = None;
    let mut solutions = Vec::new();
    let aligned = if mode.is_invariant() && geom.su3.is_some() && basis.ncols() > 0 {
        let h = harmonic_three_forms(geom, rank_tol);
        let targets: Vec<CVec> = h
            .projected_volumes
            .iter()
            .filter_map(|s| rs_from_harmonic_3form(geom, s).ok())
            .map(|sol| sol.section)
            .collect();
        if targets.len() == basis.ncols() {
            let mut worst: f64 = 0.0;
            let proj: Vec<CVec> = targets
                .iter()
                .map(|t| {
                    let p = &basis * (basis.adjoint() * t);
                    worst = worst.max(max_abs_vec(&(&p - t)) / 1.0_f64.max(max_abs_vec(t)));
                    p
                })
                .collect();
            alignment_residual = Some(worst);
            Some(proj)
        } else {
            None
        }
    } else {
        None
    };
    let vectors: Vec<CVec> = aligned.unwrap_or_else(|| (0..basis.ncols()).map(|j| basis.column(j).into_owned()).collect());
    for v in vectors {
        let symbols = match (mode.is_invariant(), geom.su3.as_ref()) {
            (true, Some(model)) => extract_symbols(model, killing(), &v).ok(),
            _ => None,
        };
        let source_form = symbols.as_ref().map(|s| s.sigma);
        solutions.push(RaritaSolution { residuals: residuals_of(&ops, &v), section: v, symbols, source_form });
    }
    RaritaKernel {
        metric: geom.kind.label().to_string(),
        space: mode.to_string(),
        kernel: k.summary(),
        kernel_without_twistor: k2.summary(),
        basis,
        solutions,
        alignment_residual,
        warning,
    }
}

/// The Rarita-Schwinger field `Σ (S e_i)·κ ⊗ e_i` of a harmonic 3-form.
pub fn rs_from_harmonic_3form(geom: &FrameGeometry, sigma: &Form) -> Result<RaritaSolution, RaritaError> {
    let model = geom.su3.as_ref().ok_or(RaritaError::NoSu3Structure)?;
    if (*sigma - sigma.part(3)).max_abs() > 0.0 {
        return Err(RaritaError::NotThreeForm);
    }
    let ops = invariant_operators(geom);
    let scale = 1.0_f64.max(sigma.max_abs());
    let lap = (&ops.laplacian * sigma.to_dvector()).amax() / scale;
    if lap > 1e-9 {
        return Err(RaritaError::NotHarmonic { residual: lap });
    }
    let split = model.split_lambda3(sigma).map_err(|_| RaritaError::NotThreeForm)?;
    let (alpha, a_plus, a_minus) = (split.alpha.norm(), split.a_plus.abs(), split.a_minus.abs());
    if alpha.max(a_plus).max(a_minus) > 1e-9 * scale {
        return Err(RaritaError::WrongType { alpha, a_plus, a_minus });
    }
    let section = assemble_spinor_vector(killing(), &Vec6::zeros(), &split.s, &Vec6::zeros());
    let symbols = extract_symbols(model, killing(), &section)?;
    let rs = rs_operators(geom, Mode::INVARIANT);
    Ok(RaritaSolution { residuals: residuals_of(&rs, &section), section, symbols: Some(symbols), source_form: Some(*sigma) })
}

/// Residuals of the equations the symbols of a solution must satisfy.
#[derive(Clone, Debug, Serialize)]
pub struct ReductionResiduals {
    pub alpha0_sum: f64,
    pub alpha6_sum: f64,
    pub s32_trace: f64,
    pub s32_omega: f64,
    pub s32_vector: f64,
    pub divergence_w_plus_h: f64,
    pub divergence_s: f64,
    pub star_d_sigma: f64,
    pub delta_sigma: f64,
    pub star_dw: f64,
    pub delta_w: f64,
    pub delta_phi: f64,
    pub final_laplacian_sigma: f64,
    pub final_phi: f64,
    pub final_w: f64,
}

impl ReductionResiduals {
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("lemma4.2-alpha0", self.alpha0_sum),
            ("lemma4.2-alpha6", self.alpha6_sum),
            ("lemma4.1-trace", self.s32_trace),
            ("lemma4.1-omega", self.s32_omega),
            ("lemma4.1-vector", self.s32_vector),
            ("eq4.17-w-h", self.divergence_w_plus_h),
            ("eq4.17-S", self.divergence_s),
            ("system-b-star-d-sigma", self.star_d_sigma),
            ("system-b-delta-sigma", self.delta_sigma),
            ("system-b-star-dw", self.star_dw),
            ("system-b-delta-w", self.delta_w),
            ("system-b-delta-phi", self.delta_phi),
            ("final-laplacian-sigma", self.final_laplacian_sigma),
            ("final-phi", self.final_phi),
            ("final-w", self.final_w),
        ]
    }

    pub fn max(&self) -> f64 {
        self.entries().iter().map(|e| e.1).fold(0.0, f64::max)
    }
}

fn one_form_vector(f: &Form) -> Vec6 {
    Vec6::from_fn(|i, _| f.coef(1 << i))
}

fn apply(m: &nalgebra::DMatrix<f64>, f: &Form) -> Form {
    Form::from_slice((m * f.to_dvector()).as_slice())
}

/// Symbols of a solution checked against the reduction of `D_TM = 0` on
/// `S_{3/2}`. Uses the measured sign `∗dw = −dφ`.
pub fn reduction_system_check(geom: &FrameGeometry, ops: &InvariantOperators, sym: &SpinorSymbols) -> Result<ReductionResiduals, RaritaError> {
    let model = geom.su3.as_ref().ok_or(RaritaError::NoSu3Structure)?;
    let membership = s32_membership_residuals(model, killing(), sym);
    let d = |f: &Form| apply(&ops.d, f);
    let delta = |f: &Form| apply(&ops.delta, f);
    let div_t2 = |e: &Endo6| {
        let t = nalgebra::DVector::from_vec(fiber::endo_to_t2(e));
        Vec6::from_iterator((&ops.t2_divergence * t).iter().copied())
    };
    let dw = d(&sym.w);
    Ok(ReductionResiduals {
        alpha0_sum: sym.alpha0.norm(),
        alpha6_sum: sym.alpha6.norm(),
        s32_trace: membership[0],
        s32_omega: membership[1],
        s32_vector: membership[2],
        divergence_w_plus_h: (one_form_vector(&delta(&sym.w)) + div_t2(&sym.h)).norm(),
        divergence_s: div_t2(&sym.s).norm(),
        star_d_sigma: (hodge(&d(&sym.sigma)) + 2.0 * sym.w).norm(),
        delta_sigma: (delta(&sym.sigma) + 2.0 * sym.phi).norm(),
        star_dw: (hodge(&dw) + d(&sym.phi)).norm(),
        delta_w: delta(&sym.w).norm(),
        delta_phi: delta(&sym.phi).norm(),
        final_laplacian_sigma: apply(&ops.laplacian, &sym.sigma).norm(),
        final_phi: sym.phi.norm(),
        final_w: sym.w.norm(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub metric: String,
    pub space: String,
    /// Smallest eigenvalue of `M†M − N†N − Id` on all sections.
    pub min_eigenvalue: f64,
    /// The same restricted to `S_{3/2}`-valued sections.
    pub min_eigenvalue_s32: f64,
    pub min_singular_value_dirac: f64,
    pub dim_kernel_dirac: usize,
}

/// `|D_TM φ|² ≥ |∇φ|² + |φ|²` as a matrix inequality on one mode.
pub fn round_metric_positivity_check(geom: &FrameGeometry, mode: Mode, rank_tol: f64) -> PositivityReport {
    let st = SectionSpace::new(geom, BundleSpec::SpinorTangent, mode);
    let m = twisted_dirac(&st, false);
    let nab = par::map_range(N, |i| covariant_derivative(&st, i, false));
    let mut q = m.adjoint() * &m - identity(st.dim());
    for n in &nab {
        q -= n.adjoint() * n;
    }
    let (vals, _) = hermitian_eigen(&q);
    let p32 = st.lift(&crate::clifford::standard().s32_projector());
    let basis = crate::linalg::orth(&p32, 1e-10);
    let (vals32, _) = hermitian_eigen(&(basis.adjoint() * &q * &basis));
    let sv = m.clone().svd(false, false).singular_values;
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    PositivityReport {
        metric: geom.kind.label().to_string(),
        space: mode.to_string(),
        min_eigenvalue: vals[0],
        min_eigenvalue_s32: vals32[0],
        min_singular_value_dirac: smin,
        dim_kernel_dirac: nullspace(&m, rank_tol).dim(),
    }
}

fn column_vec(m: &CMat, j: usize) -> CVec {
    m.column(j).into_owned()
}

/// Kernel of the Rarita-Schwinger system on invariant sections and a mode window, or the round-metric
/// non-existence, depending on the geometry.
pub fn rarita_suite(geom: &FrameGeometry, modes: &[Mode], tol: &Tolerances) -> SuiteReport {
    let mut rep = SuiteReport::new("rarita", geom.kind.label());
    let mut all: Vec<Mode> = vec![Mode::INVARIANT];
    all.extend(modes.iter().copied().filter(|m| !m.is_invariant()));
    let kernels = par::map(&all, |&m| solve_rarita(geom, m, tol.rank));
    let nk = geom.su3.is_some();
    for k in &kernels {
        let inv = k.space == Mode::INVARIANT.to_string();
        let (expected, prov) = match (nk, inv) {
            (true, true) => (2, Provenance::Published),
            (false, _) => (0, Provenance::Published),
            (true, false) => (0, Provenance::Derived),
        };
        rep.assert(Assertion::count("dim-kernel", &k.space, k.kernel.dim_kernel, expected, prov));
        rep.observe(Observation::new("kernel-rank", &k.space, &k.kernel));
        if let Some(w) = &k.warning {
            rep.observe(Observation::new("rank-warning", &k.space, w));
        }
        if nk {
            rep.assert(Assertion::count(
                "kernel-without-twistor-adjoint",
                &k.space,
                k.kernel_without_twistor.dim_kernel,
                k.kernel.dim_kernel,
                Provenance::Published,
            ));
        }
        if nk && inv {
            rep.assert(Assertion::at_least("spectral-gap", &k.space, k.kernel.spectral_gap, 1e6, 0.0, Provenance::Derived));
        }
        let worst = k.solutions.iter().map(|s| s.residuals.pi.max(s.residuals.dirac).max(s.residuals.twistor_adjoint)).fold(0.0, f64::max);
        rep.assert(Assertion::residual("solution-residual", &k.space, worst, tol.operator, Provenance::Structural));
    }
    if nk {
        invariant_kernel_checks(geom, &kernels[0], tol, &mut rep);
    } else {
        let pos = par::map(&all, |&m| round_metric_positivity_check(geom, m, tol.rank));
        for p in pos {
            rep.assert(Assertion::at_least("psd-min-eigenvalue", &p.space, p.min_eigenvalue, 0.0, 1e-9, Provenance::Published));
            rep.assert(Assertion::at_least("psd-min-eigenvalue-s32", &p.space, p.min_eigenvalue_s32, 0.0, 1e-9, Provenance::Published));
            rep.assert(Assertion::at_least("dirac-min-singular-value", &p.space, p.min_singular_value_dirac, 1.0, 1e-9, Provenance::Derived));
            rep.assert(Assertion::count("dim-kernel-dirac", &p.space, p.dim_kernel_dirac, 0, Provenance::Published));
        }
    }
    rep
}

fn invariant_kernel_checks(geom: &FrameGeometry, k: &RaritaKernel, tol: &Tolerances, rep: &mut SuiteReport) {
    let model = geom.su3.as_ref().expect("SU(3)-structure");
    let space = k.space.clone();
    let h = harmonic_three_forms(geom, tol.rank);
    rep.assert(Assertion::count("b3", &space, h.kernel.dim_kernel, 2, Provenance::Published));
    rep.assert(Assertion::residual("harmonic-volume-cohomology", &space, h.exactness_residual, tol.operator, Provenance::Derived));
    if let Some(a) = k.alignment_residual {
        rep.assert(Assertion::residual("alignment", &space, a, tol.operator, Provenance::Derived));
    }
    let ops = invariant_operators(geom);
    // Round trip from each computed (unaligned) kernel vector.
    let mut sigmas = Vec::new();
    let mut round_trip: f64 = 0.0;
    let mut reduction_max: Vec<(&'static str, f64)> = Vec::new();
    for j in 0..k.basis.ncols() {
        let v = column_vec(&k.basis, j);
        let sym = match extract_symbols(model, killing(), &v) {
            Ok(s) => s,
            Err(e) => {
                rep.assert(Assertion::residual("symbol-extraction", &space, 1.0, 0.0, Provenance::Structural).with_note(&e.to_string()));
                continue;
            }
        };
        match rs_from_harmonic_3form(geom, &sym.sigma) {
            Ok(sol) => round_trip = round_trip.max(max_abs_vec(&(&sol.section - &v))),
            Err(e) => {
                round_trip = f64::INFINITY;
                rep.observe(Observation::new("round-trip-error", &space, e.to_string()));
            }
        }
        if let Ok(r) = reduction_system_check(geom, &ops, &sym) {
            let entries = r.entries();
            if reduction_max.is_empty() {
                reduction_max = entries;
            } else {
                for (slot, e) in reduction_max.iter_mut().zip(entries) {
                    slot.1 = slot.1.max(e.1);
                }
            }
        }
        sigmas.push(sym.sigma);
    }
    rep.assert(Assertion::residual("round-trip", &space, round_trip, tol.identity, Provenance::Published));
    for (id, v) in reduction_max {
        let note = if id == "system-b-star-dw" { Some("measured sign: *dw = -d phi") } else { None };
        let a = Assertion::residual(id, &space, v, tol.identity, Provenance::Published);
        rep.assert(match note {
            Some(n) => a.with_note(n),
            None => a,
        });
    }
    let sig_mat = CMat::from_fn(64, sigmas.len(), |r, c| C64::new(sigmas[c].coef(r), 0.0));
    let harm = complexify(&fiber::degree_selector(3)) * &h.basis;
    rep.assert(Assertion::residual("harmonic-subspace-angle", &space, subspace_sine(&sig_mat, &harm), tol.operator, Provenance::Derived));
    // Forward direction on the harmonic forms themselves, and the rejections.
    for (t, f) in h.projected_volumes.iter().enumerate() {
        let ok = rs_from_harmonic_3form(geom, f).map(|s| s.residuals.dirac.max(s.residuals.pi).max(s.residuals.twistor_adjoint));
        let v = ok.unwrap_or(f64::INFINITY);
        rep.assert(Assertion::residual(&format!("forward-vol{}", t + 1), &space, v, tol.operator, Provenance::Published));
    }
    let psi_rejected = matches!(rs_from_harmonic_3form(geom, &model.psi_plus), Err(RaritaError::NotHarmonic { .. }));
    rep.assert(Assertion::count("psi-plus-rejected", &space, psi_rejected as usize, 1, Provenance::Derived));
    let zero = rs_from_harmonic_3form(geom, &Form::zero()).map(|s| max_abs_vec(&s.section)).unwrap_or(f64::INFINITY);
    rep.assert(Assertion::residual("zero-form-zero-solution", &space, zero, 0.0, Provenance::Structural));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homogeneous::{build_nk_geometry, build_round_geometry};
    use crate::su3_model::model;

    #[test]
    fn invariant_dimensions() {
        let g = build_nk_geometry(model()).unwrap();
        let k = solve_rarita(&g, Mode::INVARIANT, 1e-8);
        assert_eq!(k.kernel.dim_kernel, 2);
        assert_eq!(k.kernel_without_twistor.dim_kernel, 2);
        assert!(k.alignment_residual.unwrap() < 1e-10);
        let r = build_round_geometry();
        assert_eq!(solve_rarita(&r, Mode::INVARIANT, 1e-8).kernel.dim_kernel, 0);
        assert_eq!(solve_rarita(&g, Mode::new(1, 0), 1e-8).kernel.dim_kernel, 0);
    }

    #[test]
    fn forward_construction_rejections() {
        let g = build_nk_geometry(model()).unwrap();
        assert!(matches!(rs_from_harmonic_3form(&g, &model().psi_plus), Err(RaritaError::NotHarmonic { .. })));
        assert!(matches!(rs_from_harmonic_3form(&g, &model().omega), Err(RaritaError::NotThreeForm)));
        let z = rs_from_harmonic_3form(&g, &Form::zero()).unwrap();
        assert_eq!(max_abs_vec(&z.section), 0.0);
        let r = build_round_geometry();
        assert!(matches!(rs_from_harmonic_3form(&r, &Form::zero()), Err(RaritaError::NoSu3Structure)));
    }

    #[test]
    fn reduction_on_solutions() {
        let g = build_nk_geometry(model()).unwrap();
        let ops = invariant_operators(&g);
        let k = solve_rarita(&g, Mode::INVARIANT, 1e-8);
        for s in &k.solutions {
            let r = reduction_system_check(&g, &ops, s.symbols.as_ref().unwrap()).unwrap();
            assert!(r.max() < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn round_positivity() {
        let r = build_round_geometry();
        let p = round_metric_positivity_check(&r, Mode::INVARIANT, 1e-8);
        assert!(p.min_eigenvalue > -1e-9 && p.min_singular_value_dirac >= 1.0 - 1e-9);
        assert_eq!(p.dim_kernel_dirac, 0);
    }
}
