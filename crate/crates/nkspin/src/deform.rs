//! Infinitesimal deformations of the Killing spinor, compared with the
//! 12-eigenspace of the Laplacian on co-closed primitive (1,1)-forms.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::clifford::{killing, standard};
use crate::exterior::{Form, ALG_DIM, N};
use crate::homogeneous::FrameGeometry;
use crate::linalg::{hermitian_eigen, identity, max_abs, max_abs_vec, nullspace, nullspace_scaled, rel_residual, vstack, CMat, CVec, RankSummary, C64};
use crate::opcalc::{
    codifferential, dirac, exterior_d, fiber, killing_operator, laplacian, t2_divergence, twisted_dirac, BundleSpec, Mode, SectionSpace,
};
use crate::par;
use crate::report::{Assertion, Observation, Provenance, SuiteReport, Tolerances};
use crate::su3_model::Su3Model;

/// Laplace eigenvalue on co-closed primitive (1,1)-forms that produces
/// deformations when scal = 30.
pub const DEFORMATION_EIGENVALUE: f64 = 12.0;
/// `n c` for `n = 6`, `c = ½`.
pub const DEFORMATION_DIRAC_EIGENVALUE: f64 = 3.0;

#[derive(Debug, Error)]
pub enum DeformError {
    #[error("the geometry carries no SU(3)-structure")]
    NoSu3Structure,
    #[error("input is not an eigenform: {what} residual {residual:.3e}")]
    Precondition { what: &'static str, residual: f64 },
    #[error("section length {0} does not match the space")]
    BadLength(usize),
}

/// Orthonormal basis of co-closed sections of `Λ^{(1,1)}_0` in a forms space.
pub fn coclosed_primitive_basis(space: &SectionSpace, rank_tol: f64) -> CMat {
    let model = space.geom.su3.as_ref().expect("SU(3)-structure");
    let el = space.lift(&fiber::lambda11_0(model));
    let de = codifferential(space);
    let k = nullspace(&(&de * &el), rank_tol);
    &el * &k.basis
}

#[derive(Clone, Debug)]
pub struct EigenReport {
    pub eigenvalue: f64,
    pub multiplicity: usize,
    pub space_label: String,
    pub eigenvectors: CMat,
    pub coclosed_dim: usize,
    /// Eigenvalues of the compressed Laplacian nearest to the target.
    pub nearest: Vec<f64>,
    /// `|ΔQ − Q QᴴΔQ|`: how far the constrained space is from invariant.
    pub invariance_residual: f64,
    /// Dimension of `ker (Δ − λ)` on the constrained space.
    pub kernel_multiplicity: usize,
    /// Eigenvalues within tolerance whose eigenvectors failed the residual check.
    pub flagged: usize,
    /// Largest `|δφ|` and distance from `Λ^{(1,1)}_0` among returned vectors.
    pub constraint_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenSummary {
    pub eigenvalue: f64,
    pub multiplicity: usize,
    pub space: String,
    pub coclosed_dim: usize,
    pub nearest: Vec<f64>,
    pub invariance_residual: f64,
    pub kernel_multiplicity: usize,
    pub flagged: usize,
}

impl EigenReport {
    pub fn summary(&self) -> EigenSummary {
        EigenSummary {
            eigenvalue: self.eigenvalue,
            multiplicity: self.multiplicity,
            space: self.space_label.clone(),
            coclosed_dim: self.coclosed_dim,
            nearest: self.nearest.clone(),
            invariance_residual: self.invariance_residual,
            kernel_multiplicity: self.kernel_multiplicity,
            flagged: self.flagged,
        }
    }
}

const NEAREST: usize = 3;

pub fn eigenspace_e(geom: &FrameGeometry, lambda: f64, mode: Mode, tol: &Tolerances) -> Result<EigenReport, DeformError> {
    let model = geom.su3.as_ref().ok_or(DeformError::NoSu3Structure)?;
    let sl = SectionSpace::new(geom, BundleSpec::Forms, mode);
    let q = coclosed_primitive_basis(&sl, tol.rank);
    let lap = laplacian(&sl, false);
    let de = codifferential(&sl);
    let lq = &lap * &q;
    let comp = q.adjoint() * &lq;
    let invariance = max_abs(&(&lq - &q * &comp));
    let (vals, vecs) = if q.ncols() > 0 { hermitian_eigen(&comp) } else { (vec![], CMat::zeros(0, 0)) };
    let scale = vals.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let mut kept = Vec::new();
    let mut flagged = 0;
    for (k, v) in vals.iter().enumerate() {
        if (v - lambda).abs() > tol.eigen * scale {
            continue;
        }
        let phi: CVec = &q * vecs.column(k);
        let r = max_abs_vec(&(&lap * &phi - &phi * C64::new(lambda, 0.0)));
        if r <= tol.operator * scale {
            kept.push(phi);
        } else {
            flagged += 1;
        }
    }
    let mut nearest: Vec<f64> = vals.clone();
    nearest.sort_by(|a, b| (a - lambda).abs().partial_cmp(&(b - lambda).abs()).unwrap().then(a.partial_cmp(b).unwrap()));
    nearest.truncate(NEAREST);
    let shifted = &lq - &q * C64::new(lambda, 0.0);
    let kernel_multiplicity = if q.ncols() > 0 { nullspace_scaled(&shifted, tol.rank, scale).dim() } else { 0 };
    let mut ev = CMat::zeros(sl.dim(), kept.len());
    for (j, v) in kept.iter().enumerate() {
        ev.set_column(j, v);
    }
    let p11 = sl.lift(&{
        let b = fiber::lambda11_0(model);
        &b * b.transpose()
    });
    let constraint_residual = if ev.ncols() > 0 { max_abs(&(&de * &ev)).max(max_abs(&(&ev - &p11 * &ev))) } else { 0.0 };
    Ok(EigenReport {
        eigenvalue: lambda,
        multiplicity: ev.ncols(),
        space_label: mode.to_string(),
        eigenvectors: ev,
        coclosed_dim: q.ncols(),
        nearest,
        invariance_residual: invariance,
        kernel_multiplicity,
        flagged,
        constraint_residual,
    })
}

#[derive(Clone, Debug)]
pub struct KillingSpace {
    pub space: String,
    pub kernel: RankSummary,
    pub basis: CMat,
    /// `max |Dκ + 3κ|` over the basis.
    pub dirac_residual: f64,
}

/// Solutions of `∇_X κ = ½ X·κ` on one mode.
pub fn killing_spinor_space(geom: &FrameGeometry, mode: Mode, rank_tol: f64) -> KillingSpace {
    let s = SectionSpace::new(geom, BundleSpec::Spinor, mode);
    let k = nullspace(&killing_operator(&s, 0.5), rank_tol);
    let d = dirac(&s);
    let dirac_residual = if k.dim() > 0 { max_abs(&(&d * &k.basis + &k.basis * C64::new(3.0, 0.0))) } else { 0.0 };
    KillingSpace { space: mode.to_string(), kernel: k.summary(), basis: k.basis.clone(), dirac_residual }
}

/// Fiber maps used to turn a (1,1)-form into the pair `(h, S)`.
struct DeformFibers {
    s_of_sigma: DMatrix<f64>,
    h_of_phi: DMatrix<f64>,
    type_violation: DMatrix<f64>,
    trace: DMatrix<f64>,
    psi: DMatrix<f64>,
}

fn deform_fibers(model: &Su3Model) -> DeformFibers {
    let three = |k: usize| crate::exterior::degree_of(k) == 3;
    let s_of_sigma = par::assemble_columns(N * N, ALG_DIM, |k| {
        if !three(k) {
            return vec![0.0; N * N];
        }
        fiber::endo_to_t2(&model.split_lambda3(&Form::basis(k)).expect("3-form").s)
    });
    let h_of_phi = par::assemble_columns(N * N, ALG_DIM, |k| {
        if crate::exterior::degree_of(k) != 2 {
            return vec![0.0; N * N];
        }
        fiber::endo_to_t2(&model.h_of_phi(&Form::basis(k)))
    });
    let type_violation = par::assemble_columns(N + 2, ALG_DIM, |k| {
        if !three(k) {
            return vec![0.0; N + 2];
        }
        let sp = model.split_lambda3(&Form::basis(k)).expect("3-form");
        let mut v: Vec<f64> = sp.alpha.iter().copied().collect();
        v.push(sp.a_plus);
        v.push(sp.a_minus);
        v
    });
    let mut trace = DMatrix::zeros(1, N * N);
    for a in 0..N {
        trace[(0, a * N + a)] = 1.0;
    }
    DeformFibers { s_of_sigma, h_of_phi, type_violation, trace, psi: killing().psi_map(standard()) }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeformationResiduals {
    pub trace: f64,
    pub divergence: f64,
    pub dirac: f64,
    /// `δσ + 8φ`.
    pub delta_sigma: f64,
    /// `dφ + (3/2)σ`.
    pub d_phi: f64,
    /// Non-(2,1)+(1,2) part of `dφ`.
    pub d_phi_type: f64,
}

impl DeformationResiduals {
    pub fn max(&self) -> f64 {
        [self.trace, self.divergence, self.dirac, self.delta_sigma, self.d_phi, self.d_phi_type].into_iter().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct KillingDeformation {
    /// `β = h + S` as a 2-tensor section.
    pub beta: CVec,
    pub kappa_part: C64,
    /// `Ψ(X) = (βX)·κ₀` as a spinor-tangent section.
    pub psi: CVec,
    pub residuals: DeformationResiduals,
}

/// `σ = −(2/3)dφ`, `β = h(φ) + S(σ)`, and the checks of the deformation
/// conditions.
pub fn deformation_from_eigenform(geom: &FrameGeometry, mode: Mode, phi: &CVec, tol: &Tolerances) -> Result<KillingDeformation, DeformError> {
    let model = geom.su3.as_ref().ok_or(DeformError::NoSu3Structure)?;
    let sl = SectionSpace::new(geom, BundleSpec::Forms, mode);
    if phi.len() != sl.dim() {
        return Err(DeformError::BadLength(phi.len()));
    }
    let fib = deform_fibers(model);
    let d = exterior_d(&sl);
    let de = codifferential(&sl);
    let lap = laplacian(&sl, false);
    let scale = 1.0_f64.max(max_abs_vec(phi));
    let c = |x: f64| C64::new(x, 0.0);
    let eig = max_abs_vec(&(&lap * phi - phi * c(DEFORMATION_EIGENVALUE))) / scale;
    if eig > tol.operator {
        return Err(DeformError::Precondition { what: "laplacian", residual: eig });
    }
    let cocl = max_abs_vec(&(&de * phi)) / scale;
    if cocl > tol.operator {
        return Err(DeformError::Precondition { what: "co-closed", residual: cocl });
    }
    let b = fiber::lambda11_0(model);
    let prim = max_abs_vec(&(phi - sl.lift(&(&b * b.transpose())) * phi)) / scale;
    if prim > tol.operator {
        return Err(DeformError::Precondition { what: "primitive (1,1)", residual: prim });
    }
    let dphi = &d * phi;
    let sigma = &dphi * c(-2.0 / 3.0);
    let beta = sl.lift(&fib.h_of_phi) * phi + sl.lift(&fib.s_of_sigma) * &sigma;
    let st = SectionSpace::new(geom, BundleSpec::Tensor2, mode);
    let sst = SectionSpace::new(geom, BundleSpec::SpinorTangent, mode);
    let psi = sst.lift(&fib.psi) * &beta;
    let dtm = twisted_dirac(&sst, false);
    let residuals = DeformationResiduals {
        trace: max_abs_vec(&(st.lift(&fib.trace) * &beta)) / scale,
        divergence: max_abs_vec(&(t2_divergence(&st) * &beta)) / scale,
        dirac: max_abs_vec(&(&dtm * &psi - &psi * c(DEFORMATION_DIRAC_EIGENVALUE))) / scale,
        delta_sigma: max_abs_vec(&(&de * &sigma + phi * c(8.0))) / scale,
        d_phi: max_abs_vec(&(&dphi + &sigma * c(1.5))) / scale,
        d_phi_type: max_abs_vec(&(sl.lift(&fib.type_violation) * &dphi)) / scale,
    };
    Ok(KillingDeformation { beta, kappa_part: c(0.0), psi, residuals })
}

#[derive(Clone, Debug, Serialize)]
pub struct DeformationSpace {
    pub space: String,
    pub dim_e12: usize,
    pub dim_kplus: usize,
    /// Symmetric trace-free, divergence-free `β` with `D_TM Ψ = 3Ψ`.
    pub dim_beta: usize,
    /// `dim_beta + dim_kplus`: pairs `(β, κ)` with `κ` a multiple of `κ₀`.
    pub dim_deformations: usize,
    pub beta_rank: RankSummary,
    pub e12: EigenSummary,
    pub pass: bool,
}

/// Both sides of the deformation isomorphism on one mode.
pub fn deformation_space_report(geom: &FrameGeometry, mode: Mode, tol: &Tolerances) -> Result<DeformationSpace, DeformError> {
    let model = geom.su3.as_ref().ok_or(DeformError::NoSu3Structure)?;
    let st = SectionSpace::new(geom, BundleSpec::Tensor2, mode);
    let sst = SectionSpace::new(geom, BundleSpec::SpinorTangent, mode);
    let e0 = st.lift(&fiber::sym_basis(&model.sym0_basis()));
    let psi = sst.lift(&killing().psi_map(standard()));
    let dtm = twisted_dirac(&sst, false) - identity(sst.dim()) * C64::new(DEFORMATION_DIRAC_EIGENVALUE, 0.0);
    let stacked = vstack(&[&(t2_divergence(&st) * &e0), &(dtm * psi * &e0)]);
    let beta = nullspace(&stacked, tol.rank);
    let e12 = eigenspace_e(geom, DEFORMATION_EIGENVALUE, mode, tol)?;
    let kplus = killing_spinor_space(geom, mode, tol.rank);
    let dim_kplus = kplus.kernel.dim_kernel;
    let lhs = beta.dim() + dim_kplus;
    let rhs = e12.multiplicity + dim_kplus;
    Ok(DeformationSpace {
        space: mode.to_string(),
        dim_e12: e12.multiplicity,
        dim_kplus,
        dim_beta: beta.dim(),
        dim_deformations: lhs,
        beta_rank: beta.summary(),
        e12: e12.summary(),
        pass: lhs == rhs,
    })
}

struct ModeChecks {
    assertions: Vec<Assertion>,
    observations: Vec<Observation>,
}

const RANDOM_SECTIONS: usize = 50;

fn nk_mode_checks(geom: &FrameGeometry, mode: Mode, tol: &Tolerances, seed: u64) -> ModeChecks {
    let model = geom.su3.as_ref().expect("SU(3)-structure");
    let space = mode.to_string();
    let mut a = Vec::new();
    let mut o = Vec::new();
    let rep = match deformation_space_report(geom, mode, tol) {
        Ok(r) => r,
        Err(e) => {
            a.push(Assertion::residual("deformation-space", &space, f64::INFINITY, 0.0, Provenance::Structural).with_note(&e.to_string()));
            return ModeChecks { assertions: a, observations: o };
        }
    };
    a.push(Assertion::count("thmB", &space, rep.dim_deformations, rep.dim_e12 + rep.dim_kplus, Provenance::Published));
    let (kp, prov) = if mode.is_invariant() { (1, Provenance::Published) } else { (0, Provenance::Derived) };
    a.push(Assertion::count("kplus-dim", &space, rep.dim_kplus, kp, prov));
    a.push(Assertion::count("e12-kernel-consistency", &space, rep.e12.kernel_multiplicity, rep.dim_e12, Provenance::Structural));
    a.push(Assertion::count("e12-flagged", &space, rep.e12.flagged, 0, Provenance::Structural));
    o.push(Observation::new("e12-multiplicity", &space, rep.dim_e12).with_note("measured, no published value"));
    o.push(Observation::new("deformation-space", &space, &rep));
    let ks = killing_spinor_space(geom, mode, tol.rank);
    a.push(Assertion::residual("killing-dirac", &space, ks.dirac_residual, tol.operator, Provenance::Derived));
    if mode.is_invariant() {
        if let Ok(e0) = eigenspace_e(geom, 0.0, mode, tol) {
            a.push(Assertion::count("harmonic-primitive-11", &space, e0.multiplicity, 0, Provenance::Derived));
        }
    }
    // Equivalence chain on the constrained space.
    let sl = SectionSpace::new(geom, BundleSpec::Forms, mode);
    let q = coclosed_primitive_basis(&sl, tol.rank);
    let d = exterior_d(&sl);
    let de = codifferential(&sl);
    let lap = laplacian(&sl, false);
    let c = |x: f64| C64::new(x, 0.0);
    if q.ncols() > 0 {
        a.push(Assertion::residual("chain-identity", &space, rel_residual(&(&de * &d * &q), &(&lap * &q)), tol.operator, Provenance::Derived));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = CMat::from_fn(q.ncols(), RANDOM_SECTIONS, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let phis = &q * coeffs;
        let sig = &d * &phis * c(-2.0 / 3.0);
        let fib = deform_fibers(model);
        let mut chain: f64 = 0.0;
        let mut fails: f64 = f64::INFINITY;
        let mut typ: f64 = 0.0;
        for j in 0..RANDOM_SECTIONS {
            let phi = phis.column(j).into_owned();
            let s = sig.column(j).into_owned();
            let left = max_abs_vec(&(&de * &s + &phi * c(8.0)));
            let right = max_abs_vec(&(&lap * &phi - &phi * c(DEFORMATION_EIGENVALUE)));
            chain = chain.max((left - 2.0 / 3.0 * right).abs() / 1.0_f64.max(right));
            fails = fails.min(left.min(right));
            let dphi = &d * &phi;
            typ = typ.max(max_abs_vec(&(sl.lift(&fib.type_violation) * &dphi)) / 1.0_f64.max(max_abs_vec(&dphi)));
        }
        a.push(Assertion::residual("chain-equivalence-random", &space, chain, tol.operator, Provenance::Derived));
        if rep.dim_e12 == 0 {
            a.push(Assertion::at_least("chain-both-fail-random", &space, fails, tol.operator, 0.0, Provenance::Derived));
        }
        a.push(Assertion::residual("dphi-type", &space, typ, tol.operator, Provenance::Published));
    }
    // Forward construction on every eigenvector found.
    if let Ok(e12) = eigenspace_e(geom, DEFORMATION_EIGENVALUE, mode, tol) {
        for j in 0..e12.eigenvectors.ncols() {
            let phi = e12.eigenvectors.column(j).into_owned();
            let v = deformation_from_eigenform(geom, mode, &phi, tol).map(|k| k.residuals.max()).unwrap_or(f64::INFINITY);
            a.push(Assertion::residual("deformation-from-eigenform", &space, v, tol.operator, Provenance::Published));
        }
    }
    let zero = CVec::zeros(sl.dim());
    let z = deformation_from_eigenform(geom, mode, &zero, tol).map(|k| max_abs_vec(&k.psi)).unwrap_or(f64::INFINITY);
    a.push(Assertion::residual("trivial-deformation", &space, z, 0.0, Provenance::Structural));
    ModeChecks { assertions: a, observations: o }
}

/// `√(n scal / 4(n−1))` for `n = 6`.
pub fn friedrich_bound(scal: f64) -> f64 {
    (6.0 * scal / 20.0).sqrt()
}

fn round_mode_checks(geom: &FrameGeometry, mode: Mode, tol: &Tolerances) -> ModeChecks {
    let space = mode.to_string();
    let ks = killing_spinor_space(geom, mode, tol.rank);
    let s = SectionSpace::new(geom, BundleSpec::Spinor, mode);
    let (vals, _) = hermitian_eigen(&dirac(&s));
    let min = vals.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let bound = friedrich_bound(geom.scal());
    ModeChecks {
        assertions: vec![
            Assertion::count("kplus-dim", &space, ks.kernel.dim_kernel, 0, Provenance::Derived),
            Assertion::at_least("friedrich-bound", &space, min, bound, tol.eigen, Provenance::Derived),
        ],
        observations: vec![Observation::new("dirac-min-abs-eigenvalue", &space, serde_json::json!({ "value": min, "bound": bound }))],
    }
}

pub fn deform_suite(geom: &FrameGeometry, modes: &[Mode], tol: &Tolerances, seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new("deform", geom.kind.label());
    let mut all: Vec<Mode> = vec![Mode::INVARIANT];
    all.extend(modes.iter().copied().filter(|m| !m.is_invariant()));
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    let jobs: Vec<(Mode, u64)> = all.iter().map(|&m| (m, seeder.random())).collect();
    let nk = geom.su3.is_some();
    let results = par::map(&jobs, |&(m, s)| if nk { nk_mode_checks(geom, m, tol, s) } else { round_mode_checks(geom, m, tol) });
    for r in results {
        rep.extend(r.assertions);
        for o in r.observations {
            rep.observe(o);
        }
    }
    if nk {
        rep.observe(Observation::new("scope", "all", "deformation count checked per mode space in the window only"));
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homogeneous::{build_nk_geometry, build_round_geometry};
    use crate::su3_model::model;

    #[test]
    fn invariant_deformation_space() {
        let g = build_nk_geometry(model()).unwrap();
        let t = Tolerances::default();
        let r = deformation_space_report(&g, Mode::INVARIANT, &t).unwrap();
        assert_eq!(r.dim_kplus, 1);
        assert!(r.pass);
        assert_eq!(r.dim_e12, 0);
        let ks = killing_spinor_space(&g, Mode::INVARIANT, 1e-8);
        assert!(ks.dirac_residual < 1e-12);
        let e = eigenspace_e(&g, 0.0, Mode::INVARIANT, &t).unwrap();
        assert_eq!(e.multiplicity, 0);
        assert_eq!(e.coclosed_dim, 5);
        // the whole invariant co-closed space sits at 36; both counts must see it
        let e = eigenspace_e(&g, 36.0, Mode::INVARIANT, &t).unwrap();
        assert_eq!((e.multiplicity, e.kernel_multiplicity, e.flagged), (5, 5, 0));
        assert!(e.constraint_residual < 1e-10);
    }

    #[test]
    fn deformation_needs_eigenform() {
        let g = build_nk_geometry(model()).unwrap();
        let t = Tolerances::default();
        let sl = SectionSpace::new(&g, BundleSpec::Forms, Mode::INVARIANT);
        let q = coclosed_primitive_basis(&sl, 1e-8);
        let phi = q.column(0).into_owned();
        assert!(matches!(deformation_from_eigenform(&g, Mode::INVARIANT, &phi, &t), Err(DeformError::Precondition { .. })));
        let z = deformation_from_eigenform(&g, Mode::INVARIANT, &CVec::zeros(64), &t).unwrap();
        assert_eq!(max_abs_vec(&z.beta), 0.0);
    }

    #[test]
    fn round_has_no_killing_spinors() {
        let r = build_round_geometry();
        assert_eq!(killing_spinor_space(&r, Mode::INVARIANT, 1e-8).kernel.dim_kernel, 0);
        assert!(deformation_space_report(&r, Mode::INVARIANT, &Tolerances::default()).is_err());
    }
}
