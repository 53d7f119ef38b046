//! Clifford multiplication on 8-dimensional spinors, the Killing spinor and
//! its action dictionary, the contraction Π and the symbol extraction for
//! sections of `S_{1/2} ⊗ TM`.
//!
//! The representation is real: `Cl(0,6) ≅ M₈(ℝ)`, generators are real
//! antisymmetric with square `−1`. Spinors are stored complex so that mode
//! spaces can carry complex coefficients.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exterior::{contract, unit, Endo6, Form, Vec6, ALG_DIM, N};
use crate::linalg::{complexify, CVec, C64};
use crate::su3_model::{random_form, random_vec, IdentityResidual, Su3Model};

pub const SPINOR_DIM: usize = 8;
pub const ST_DIM: usize = N * SPINOR_DIM;

/// Tensor words for the generators; `E` is the real `iσ_y`.
const GENERATOR_WORDS: [&str; N] = ["IIE", "IEX", "XEZ", "ZEZ", "EIZ", "EXX"];

/// Sign relating the Killing spinor with number `+½` to `vol·`: with this
/// representation and orientation `ψ⁻·κ = 4ν κ`, `JX·κ = ν vol·X·κ`.
pub const KILLING_VOL_SIGN: f64 = -1.0;

#[derive(Debug, Error)]
pub enum CliffordError {
    #[error("eigenvalue {eigenvalue} of psi- has multiplicity {dim}, expected 1")]
    KillingEigenspace { eigenvalue: f64, dim: usize },
    #[error("spinor leaves the real image of forms: residual {0:.3e}")]
    OutsideImage(f64),
    #[error("spinor-vector has length {0}, expected 48")]
    BadLength(usize),
}

pub struct Clifford {
    gammas: [DMatrix<f64>; N],
    /// `γ_{i1}⋯γ_{ip}` for every mask, factors in increasing order.
    products: Vec<DMatrix<f64>>,
}

fn pauli(c: char) -> DMatrix<f64> {
    match c {
        'I' => DMatrix::identity(2, 2),
        'X' => DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        'Z' => DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        'E' => DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
        _ => unreachable!("unknown generator letter"),
    }
}

impl Clifford {
    pub fn new() -> Self {
        let gammas: [DMatrix<f64>; N] = std::array::from_fn(|i| {
            let w: Vec<char> = GENERATOR_WORDS[i].chars().collect();
            pauli(w[0]).kronecker(&pauli(w[1])).kronecker(&pauli(w[2]))
        });
        let products = (0..ALG_DIM)
            .map(|m| {
                let mut p = DMatrix::identity(SPINOR_DIM, SPINOR_DIM);
                for (k, g) in gammas.iter().enumerate() {
                    if m >> k & 1 == 1 {
                        p *= g;
                    }
                }
                p
            })
            .collect();
        Clifford { gammas, products }
    }

    pub fn gamma_basis(&self, i: usize) -> &DMatrix<f64> {
        &self.gammas[i]
    }

    pub fn gamma(&self, x: &Vec6) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(SPINOR_DIM, SPINOR_DIM);
        for i in 0..N {
            m += &self.gammas[i] * x[i];
        }
        m
    }

    /// Quantization of a (graded) form.
    pub fn gamma_form(&self, a: &Form) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(SPINOR_DIM, SPINOR_DIM);
        for (mask, v) in a.coefficients().iter().enumerate() {
            if *v != 0.0 {
                m += &self.products[mask] * *v;
            }
        }
        m
    }

    pub fn vol(&self) -> &DMatrix<f64> {
        &self.products[ALG_DIM - 1]
    }

    /// Spin lift of a skew endomorphism: `¼ Σ g(Be_j, e_l) γ_j γ_l`.
    pub fn spin_lift(&self, b: &Endo6) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(SPINOR_DIM, SPINOR_DIM);
        for j in 0..N {
            for l in 0..N {
                if b[(l, j)] != 0.0 {
                    m += &self.products[(1 << j) | (1 << l)] * (0.25 * b[(l, j)] * pair_sign(j, l));
                }
            }
        }
        m
    }

    /// `Π = [γ_1 ⋯ γ_6]`, an 8×48 map; legs are blocks of 8.
    pub fn pi_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(SPINOR_DIM, ST_DIM);
        for i in 0..N {
            m.view_mut((0, i * SPINOR_DIM), (SPINOR_DIM, SPINOR_DIM)).copy_from(&self.gammas[i]);
        }
        m
    }

    /// Embedding `ζ ↦ −⅙ Σ e_k·ζ ⊗ e_k`, a right inverse of Π.
    pub fn iota_matrix(&self) -> DMatrix<f64> {
        self.pi_matrix().transpose() / 6.0
    }

    /// Orthogonal projector onto `ker Π = S_{3/2}`.
    pub fn s32_projector(&self) -> DMatrix<f64> {
        let p = self.pi_matrix();
        DMatrix::identity(ST_DIM, ST_DIM) - p.transpose() * p / 6.0
    }

    pub fn pi_map(&self, v: &CVec) -> CVec {
        complexify(&self.pi_matrix()) * v
    }

    pub fn s32_project(&self, v: &CVec) -> CVec {
        complexify(&self.s32_projector()) * v
    }
}

impl Default for Clifford {
    fn default() -> Self {
        Self::new()
    }
}

/// `γ_j γ_l` in terms of the sorted product for `j ≠ l`; the diagonal gives `−1`.
fn pair_sign(j: usize, l: usize) -> f64 {
    match j.cmp(&l) {
        std::cmp::Ordering::Less => 1.0,
        std::cmp::Ordering::Greater => -1.0,
        std::cmp::Ordering::Equal => 0.0,
    }
}

pub fn standard() -> &'static Clifford {
    static CL: OnceLock<Clifford> = OnceLock::new();
    CL.get_or_init(Clifford::new)
}

/// The unit Killing spinor with number `½` at a point, and the dictionary
/// between forms and spinors it induces.
#[derive(Clone, Debug)]
pub struct KillingSpinor {
    pub kappa: DVector<f64>,
    /// `ν` in `ψ⁻·κ = 4νκ`.
    pub nu: f64,
    /// Dimensions of the `−4`, `0`, `+4` eigenspaces of `ψ⁻·`.
    pub psi_minus_eigen_dims: [usize; 3],
    image: DMatrix<f64>,
}

/// Unit spinor with `ψ⁻·κ = 4ν κ`. Its sign is fixed by making the largest
/// entry positive.
pub fn find_killing_spinor(model: &Su3Model, cl: &Clifford) -> Result<KillingSpinor, CliffordError> {
    let op = cl.gamma_form(&model.psi_minus);
    let sym = (&op + op.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let target = 4.0 * KILLING_VOL_SIGN;
    let count = |t: f64| eig.eigenvalues.iter().filter(|v| (**v - t).abs() < 1e-8).count();
    let dims = [count(-4.0), count(0.0), count(4.0)];
    let idx: Vec<usize> = (0..SPINOR_DIM).filter(|&i| (eig.eigenvalues[i] - target).abs() < 1e-8).collect();
    if idx.len() != 1 {
        return Err(CliffordError::KillingEigenspace { eigenvalue: target, dim: idx.len() });
    }
    let mut kappa: DVector<f64> = eig.eigenvectors.column(idx[0]).into_owned();
    kappa /= kappa.norm();
    let imax = kappa.iamax();
    if kappa[imax] < 0.0 {
        kappa = -kappa;
    }
    let mut image = DMatrix::zeros(SPINOR_DIM, SPINOR_DIM);
    image.set_column(0, &kappa);
    for i in 0..N {
        image.set_column(i + 1, &(cl.gamma_basis(i) * &kappa));
    }
    image.set_column(7, &(cl.vol() * &kappa));
    Ok(KillingSpinor { kappa, nu: KILLING_VOL_SIGN, psi_minus_eigen_dims: dims, image })
}

pub fn killing() -> &'static KillingSpinor {
    static K: OnceLock<KillingSpinor> = OnceLock::new();
    K.get_or_init(|| find_killing_spinor(crate::su3_model::model(), standard()).expect("Killing spinor"))
}

impl KillingSpinor {
    pub fn kappa_c(&self) -> CVec {
        self.kappa.map(|v| C64::new(v, 0.0))
    }

    /// Columns `κ, e_1·κ, …, e_6·κ, vol·κ`: an orthogonal matrix.
    pub fn image_basis(&self) -> &DMatrix<f64> {
        &self.image
    }

    /// `(f₀ + a₁ + f₆ vol)·κ`.
    pub fn spinor_from_forms(&self, f0: f64, a1: &Vec6, f6: f64) -> CVec {
        let mut coef = DVector::zeros(SPINOR_DIM);
        coef[0] = f0;
        for i in 0..N {
            coef[i + 1] = a1[i];
        }
        coef[7] = f6;
        (&self.image * coef).map(|v| C64::new(v, 0.0))
    }

    /// Complex coefficients `(f₀, a₁, f₆)`; always defined since the image
    /// basis spans `ℂ⁸`.
    pub fn spinor_coefficients(&self, s: &CVec) -> CVec {
        complexify(&self.image.transpose()) * s
    }

    pub fn spinor_to_forms(&self, s: &CVec) -> Result<(f64, Vec6, f64), CliffordError> {
        let c = self.spinor_coefficients(s);
        let scale = 1.0_f64.max(s.norm());
        let im = c.iter().fold(0.0, |a: f64, v| a.max(v.im.abs()));
        if im > 1e-9 * scale {
            return Err(CliffordError::OutsideImage(im));
        }
        Ok((c[0].re, Vec6::from_fn(|i, _| c[i + 1].re), c[7].re))
    }

    /// Leg map `T ↦ Σ_i (Σ_a T_ia e_a·κ) ⊗ e_i`, i.e. `X ↦ (βX)·κ` for the
    /// endomorphism `β = Tᵀ`; 48×36 with row-major 2-tensor columns.
    pub fn psi_map(&self, cl: &Clifford) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(ST_DIM, N * N);
        for i in 0..N {
            for a in 0..N {
                let col = cl.gamma_basis(a) * &self.kappa;
                m.view_mut((i * SPINOR_DIM, i * N + a), (SPINOR_DIM, 1)).copy_from(&col);
            }
        }
        m
    }
}

/// Per-leg form data and the symbols built from them.
#[derive(Clone, Debug)]
pub struct SpinorSymbols {
    pub alpha0: Vec6,
    pub alpha6: Vec6,
    /// Column `i` is the 1-form part of leg `i`.
    pub alpha1: Endo6,
    pub w: Form,
    pub big_h: Endo6,
    /// Trace-free part of `H` commuting with J.
    pub h: Endo6,
    pub trace: f64,
    pub s: Endo6,
    pub phi: Form,
    pub sigma: Form,
}

/// Assemble `Σ (α₀ + α₁ + α₆ vol)·κ ⊗ e_i` as a 48-vector.
pub fn assemble_spinor_vector(k: &KillingSpinor, alpha0: &Vec6, alpha1: &Endo6, alpha6: &Vec6) -> CVec {
    let mut v = CVec::zeros(ST_DIM);
    for i in 0..N {
        let leg = k.spinor_from_forms(alpha0[i], &alpha1.column(i).into_owned(), alpha6[i]);
        v.rows_mut(i * SPINOR_DIM, SPINOR_DIM).copy_from(&leg);
    }
    v
}

pub fn extract_symbols(model: &Su3Model, k: &KillingSpinor, v: &CVec) -> Result<SpinorSymbols, CliffordError> {
    if v.len() != ST_DIM {
        return Err(CliffordError::BadLength(v.len()));
    }
    let mut alpha0 = Vec6::zeros();
    let mut alpha6 = Vec6::zeros();
    let mut alpha1 = Endo6::zeros();
    for i in 0..N {
        let leg: CVec = v.rows(i * SPINOR_DIM, SPINOR_DIM).into_owned();
        let (f0, a1, f6) = k.spinor_to_forms(&leg)?;
        alpha0[i] = f0;
        alpha6[i] = f6;
        alpha1.set_column(i, &a1);
    }
    Ok(symbols_from_parts(model, alpha0, alpha1, alpha6))
}

pub fn symbols_from_parts(model: &Su3Model, alpha0: Vec6, alpha1: Endo6, alpha6: Vec6) -> SpinorSymbols {
    let w = crate::exterior::two_form_from_components(&alpha1);
    let big_h = 0.5 * (alpha1 + alpha1.transpose());
    let split = model.sym_split(&big_h).expect("symmetric by construction");
    let phi = model.phi_of_h(&split.h);
    let sigma = model.sigma_of_s(&split.s);
    SpinorSymbols { alpha0, alpha6, alpha1, w, big_h, h: split.h, trace: split.trace, s: split.s, phi, sigma }
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct MembershipConditions {
    /// `α₁^{(i)} ⊙ e_i` trace-free.
    pub sym_trace_free: bool,
    /// `α₁^{(i)} ∧ e_i` has no ω-component.
    pub two_form_no_omega: bool,
    /// `α₀^{(i)} e_i − ν α₆^{(i)} J e_i + A_{e_i} α₁^{(i)} = 0`.
    pub vector_condition: bool,
}

impl MembershipConditions {
    pub fn all(&self) -> bool {
        self.sym_trace_free && self.two_form_no_omega && self.vector_condition
    }
}

/// Residuals of the three membership conditions.
pub fn s32_membership_residuals(model: &Su3Model, k: &KillingSpinor, sym: &SpinorSymbols) -> [f64; 3] {
    let r1 = sym.alpha1.trace().abs();
    let r2 = crate::exterior::inner(&sym.w, &model.omega).abs();
    let mut v = Vec6::zeros();
    for i in 0..N {
        let e = unit(i);
        v += sym.alpha0[i] * e - k.nu * sym.alpha6[i] * (model.j * e) + model.a_endo(&e) * sym.alpha1.column(i);
    }
    [r1, r2, v.amax()]
}

pub fn s32_membership_conditions(model: &Su3Model, k: &KillingSpinor, sym: &SpinorSymbols, tol: f64) -> MembershipConditions {
    let scale = 1.0_f64.max(sym.alpha1.amax()).max(sym.alpha0.amax()).max(sym.alpha6.amax());
    let r = s32_membership_residuals(model, k, sym);
    MembershipConditions {
        sym_trace_free: r[0] <= tol * scale,
        two_form_no_omega: r[1] <= tol * scale,
        vector_condition: r[2] <= tol * scale,
    }
}

/// `η·κ` together with the dictionary prediction `3νλ vol·κ + 2JY·κ`.
pub fn two_form_action(model: &Su3Model, cl: &Clifford, k: &KillingSpinor, eta: &Form) -> (DVector<f64>, DVector<f64>) {
    let direct = cl.gamma_form(eta) * &k.kappa;
    let sp = model.split_lambda2(eta).expect("2-form input");
    let pred = cl.vol() * &k.kappa * (3.0 * k.nu * sp.lambda) + cl.gamma(&(model.j * sp.y)) * &k.kappa * 2.0;
    (direct, pred)
}

/// Residuals of the Killing-spinor dictionary on `n` random instances each.
/// Entries ending in `-literal` evaluate the statements without the `ν` sign.
pub fn dictionary_suite<R: Rng>(model: &Su3Model, cl: &Clifford, k: &KillingSpinor, rng: &mut R, n: usize) -> Vec<IdentityResidual> {
    let kap = &k.kappa;
    let vol = cl.vol();
    let nu = k.nu;
    let run = |id: &str, f: &mut dyn FnMut() -> f64| IdentityResidual {
        id: id.to_string(),
        instances: n,
        max_residual: (0..n).map(|_| f()).fold(0.0, f64::max),
    };
    let mut out = Vec::new();
    for (id, s) in [("eq2.5", nu), ("eq2.5-literal", 1.0)] {
        out.push(run(id, &mut || {
            let x = random_vec(rng);
            let lhs = cl.gamma(&(model.j * x)) * kap;
            let rhs = vol * (cl.gamma(&x) * kap) * s;
            (lhs - rhs).amax() / 1.0_f64.max(x.amax())
        }));
    }
    for (id, s) in [("eq2.6", nu), ("eq2.6-literal", 1.0)] {
        out.push(run(id, &mut || (cl.gamma_form(&model.psi_minus) * kap - kap * (4.0 * s)).amax()));
    }
    for (id, s) in [("eq2.7", nu), ("eq2.7-literal", 1.0)] {
        out.push(run(id, &mut || {
            let eta = random_form(rng, 2);
            let sp = model.split_lambda2(&eta).expect("2-form");
            let lhs = cl.gamma_form(&eta) * kap;
            let rhs = vol * kap * (3.0 * s * sp.lambda) + cl.gamma(&(model.j * sp.y)) * kap * 2.0;
            (lhs - rhs).amax() / 1.0_f64.max(eta.max_abs())
        }));
    }
    for (id, s) in [("eq2.8", nu), ("eq2.8-literal", 1.0)] {
        out.push(run(id, &mut || {
            let (x, y) = (random_vec(rng), random_vec(rng));
            let om = (model.j * x).dot(&y);
            let lhs = cl.gamma(&x) * (cl.gamma(&y) * kap);
            let extra = if id.ends_with("literal") { kap * om } else { vol * kap * (s * om) };
            let rhs = kap * (-x.dot(&y)) + extra + cl.gamma(&(model.a_endo(&x) * y)) * kap;
            (lhs - rhs).amax() / 1.0_f64.max(x.amax() * y.amax())
        }));
    }
    out.push(run("eq2.4-isometry", &mut || {
        let (f0, a1, f6) = (rng.random_range(-1.0..1.0), random_vec(rng), rng.random_range(-1.0..1.0));
        let s = k.spinor_from_forms(f0, &a1, f6);
        (s.norm_squared() - (f0 * f0 + a1.norm_squared() + f6 * f6)).abs()
    }));
    out.push(run("contract-psi-plus", &mut || {
        let y = random_vec(rng);
        let lhs = cl.gamma_form(&contract(&y, &model.psi_plus)) * kap;
        (lhs - cl.gamma(&(model.j * y)) * kap * 2.0).amax() / 1.0_f64.max(y.amax())
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_real;
    use crate::su3_model::model;

    #[test]
    fn clifford_relations() {
        let cl = standard();
        let id = DMatrix::<f64>::identity(8, 8);
        for i in 0..N {
            for j in 0..N {
                let ac = cl.gamma_basis(i) * cl.gamma_basis(j) + cl.gamma_basis(j) * cl.gamma_basis(i);
                let expect = if i == j { -2.0 * &id } else { DMatrix::zeros(8, 8) };
                assert_eq!(ac, expect);
            }
            assert_eq!(cl.gamma_basis(i).transpose(), -cl.gamma_basis(i));
        }
        assert_eq!(cl.vol() * cl.vol(), -id.clone());
        assert_eq!(cl.gamma_form(&Form::one()), id);
        assert_eq!(cl.gamma_form(&Form::e(&[0, 1])), cl.gamma_basis(0) * cl.gamma_basis(1));
    }

    #[test]
    fn omega_squared_spectrum() {
        let cl = standard();
        let w = cl.gamma_form(&model().omega);
        let ww = &w * &w;
        let ev = ((&ww + ww.transpose()) * 0.5).symmetric_eigen().eigenvalues;
        assert_eq!(ev.iter().filter(|v| (**v + 9.0).abs() < 1e-12).count(), 2);
        assert_eq!(ev.iter().filter(|v| (**v + 1.0).abs() < 1e-12).count(), 6);
    }

    #[test]
    fn killing_spinor_eigen() {
        let k = killing();
        assert_eq!(k.psi_minus_eigen_dims, [1, 6, 1]);
        let cl = standard();
        let m = model();
        let r = cl.gamma_form(&m.psi_minus) * &k.kappa + &k.kappa * 4.0;
        assert!(r.amax() < 1e-14);
        let ib = k.image_basis();
        assert!(max_abs_real(&(ib.transpose() * ib - DMatrix::identity(8, 8))) < 1e-14);
    }

    #[test]
    fn forms_round_trip() {
        let k = killing();
        let (f0, a1, f6) = k.spinor_to_forms(&k.kappa_c()).unwrap();
        assert!((f0 - 1.0).abs() < 1e-14 && a1.amax() < 1e-14 && f6.abs() < 1e-14);
        let s = standard().gamma(&unit(0)) * &k.kappa;
        let (f0, a1, f6) = k.spinor_to_forms(&s.map(|v| C64::new(v, 0.0))).unwrap();
        assert!(f0.abs() < 1e-14 && (a1 - unit(0)).amax() < 1e-14 && f6.abs() < 1e-14);
        let iv = k.spinor_from_forms(0.0, &Vec6::zeros(), 1.0);
        assert!(iv.dotc(&k.kappa_c()).norm() < 1e-14);
        assert!(k.spinor_to_forms(&(k.kappa_c() * C64::new(0.0, 1.0))).is_err());
    }

    #[test]
    fn pi_rank_and_projector() {
        let cl = standard();
        let p = cl.pi_matrix();
        assert_eq!(p.clone().svd(false, false).rank(1e-10), 8);
        let pr = cl.s32_projector();
        assert!((pr.trace() - 40.0).abs() < 1e-12);
        assert!(max_abs_real(&(&pr * &pr - &pr)) < 1e-14);
        assert!(max_abs_real(&(&p * cl.iota_matrix() - DMatrix::identity(8, 8))) < 1e-14);
        // legs γ_i κ give Σ γ_i² κ = −6κ
        let k = killing();
        let mut v = CVec::zeros(ST_DIM);
        for i in 0..N {
            let leg = (cl.gamma_basis(i) * &k.kappa).map(|x| C64::new(x, 0.0));
            v.rows_mut(i * 8, 8).copy_from(&leg);
        }
        assert!((cl.pi_map(&v) + k.kappa_c() * C64::new(6.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn extract_symbols_examples() {
        let m = model();
        let k = killing();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
        let s = m.random_sym_minus(&mut rng);
        let v = assemble_spinor_vector(k, &Vec6::zeros(), &s, &Vec6::zeros());
        let sym = extract_symbols(m, k, &v).unwrap();
        assert!(sym.w.max_abs() < 1e-13 && sym.h.amax() < 1e-13 && (sym.s - s).amax() < 1e-13);
        assert!((sym.sigma - m.sigma_of_s(&s)).max_abs() < 1e-12);
        let zero = extract_symbols(m, k, &CVec::zeros(ST_DIM)).unwrap();
        assert!(zero.alpha1.amax() == 0.0 && zero.sigma.max_abs() == 0.0);
        let eta = m.random_lambda11_0(&mut rng);
        let w0 = crate::exterior::two_form_components(&eta);
        let v = assemble_spinor_vector(k, &Vec6::zeros(), &w0, &Vec6::zeros());
        let sym = extract_symbols(m, k, &v).unwrap();
        assert!((sym.w - eta).max_abs() < 1e-13 && sym.big_h.amax() < 1e-13);
    }

    #[test]
    fn membership_examples() {
        let m = model();
        let k = killing();
        let sym = symbols_from_parts(m, Vec6::zeros(), Endo6::identity(), Vec6::zeros());
        assert!(!s32_membership_conditions(m, k, &sym, 1e-9).sym_trace_free);
        let sym = symbols_from_parts(m, unit(0), Endo6::zeros(), Vec6::zeros());
        let c = s32_membership_conditions(m, k, &sym, 1e-9);
        assert!(c.sym_trace_free && c.two_form_no_omega && !c.vector_condition);
    }

    #[test]
    fn two_form_action_examples() {
        let m = model();
        let (cl, k) = (standard(), killing());
        let (d, p) = two_form_action(m, cl, k, &m.omega);
        assert!((&d - &p).amax() < 1e-14);
        assert!((d - cl.vol() * &k.kappa * (3.0 * k.nu)).amax() < 1e-14);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
        let (d, _) = two_form_action(m, cl, k, &m.random_lambda11_0(&mut rng));
        assert!(d.amax() < 1e-14);
    }
}
