//! The SU(3)-structure of the model fiber and its algebra.

use nalgebra::{DVector, Matrix6};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exterior::{
    contract, hodge, induced_action, inner, masks_of_degree, skew_endo_of_two_form, two_form_components,
    two_form_from_components, unit, wedge, Endo6, Form, Vec6, N,
};
use crate::linalg::gram_schmidt;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("expected a form of degree {expected}, got {got:?}")]
    WrongDegree { expected: usize, got: Option<usize> },
    #[error("endomorphism is not symmetric (skew part {0:.3e})")]
    NotSymmetric(f64),
    #[error("closed form mismatch for A_Z A_X Y: residual {0:.3e}")]
    ClosedForm(f64),
    #[error("A-tensor calibration failed: neither sign satisfies the A_A and A_*psi+ identities")]
    Calibration,
    #[error("reassembly residual {0:.3e} exceeds tolerance")]
    Reassembly(f64),
}

const TOL: f64 = 1e-10;

/// `(x∧y)` as a skew endomorphism: `z ↦ g(x,z)y − g(y,z)x`.
pub fn wedge_endo(x: &Vec6, y: &Vec6) -> Endo6 {
    y * x.transpose() - x * y.transpose()
}

#[derive(Clone, Debug)]
pub struct Su3Model {
    pub j: Endo6,
    pub omega: Form,
    pub psi_plus: Form,
    pub psi_minus: Form,
    pub vol: Form,
    a_sign: f64,
    sym_minus: Vec<Endo6>,
    sym_plus0: Vec<Endo6>,
    lambda11_0: Vec<Form>,
    /// Gram inverse of `S_k⋆ψ⁺` over the Sym⁻ basis.
    sigma_gram_inv: nalgebra::DMatrix<f64>,
    sigma_basis: Vec<Form>,
}

#[derive(Clone, Debug)]
pub struct Lambda2Split {
    pub lambda: f64,
    pub y: Vec6,
    pub eta0: Form,
}

#[derive(Clone, Debug)]
pub struct Lambda3Split {
    pub alpha: Vec6,
    pub a_plus: f64,
    pub a_minus: f64,
    pub s: Endo6,
}

#[derive(Clone, Debug)]
pub struct SymSplit {
    /// Trace-free part commuting with J.
    pub h: Endo6,
    pub trace: f64,
    /// Part anticommuting with J.
    pub s: Endo6,
}

fn complex_factor(a: usize) -> (Form, Form) {
    (Form::e(&[a]), Form::e(&[a + 1]))
}

/// Shared instance of [`build_model`].
pub fn model() -> &'static Su3Model {
    static M: std::sync::OnceLock<Su3Model> = std::sync::OnceLock::new();
    M.get_or_init(build_model)
}

/// Build the fixed model and calibrate the sign of A.
pub fn build_model() -> Su3Model {
    let mut j = Endo6::zeros();
    for a in [0, 2, 4] {
        j[(a + 1, a)] = 1.0;
        j[(a, a + 1)] = -1.0;
    }
    let omega = Form::e(&[0, 1]) + Form::e(&[2, 3]) + Form::e(&[4, 5]);
    // (e1+ie2)∧(e3+ie4)∧(e5+ie6), kept as (real, imaginary) pairs
    let mul = |(ar, ai): (Form, Form), (br, bi): (Form, Form)| {
        (wedge(&ar, &br) - wedge(&ai, &bi), wedge(&ar, &bi) + wedge(&ai, &br))
    };
    let om = mul(mul(complex_factor(0), complex_factor(2)), complex_factor(4));
    let mut m = Su3Model {
        j,
        omega,
        psi_plus: om.0,
        psi_minus: om.1,
        vol: Form::vol(),
        a_sign: 1.0,
        sym_minus: vec![],
        sym_plus0: vec![],
        lambda11_0: vec![],
        sigma_gram_inv: nalgebra::DMatrix::zeros(0, 0),
        sigma_basis: vec![],
    };
    m.a_sign = m.calibrate_a_sign().expect("A-tensor calibration");
    m.build_bases();
    m
}

impl Su3Model {
    fn a_endo_signed(&self, x: &Vec6, sign: f64) -> Endo6 {
        let mut a = Endo6::zeros();
        for b in 0..N {
            for c in 0..N {
                let jc = self.j * unit(c);
                a[(c, b)] = -sign * crate::exterior::eval(&self.psi_plus, &[*x, unit(b), jc]);
            }
        }
        a
    }

    fn calibrate_a_sign(&self) -> Result<f64, ModelError> {
        let x = Vec6::from_column_slice(&[0.3, -1.1, 0.7, 0.2, -0.5, 0.9]);
        let y = Vec6::from_column_slice(&[-0.4, 0.6, 0.1, -1.3, 0.8, 0.25]);
        for sign in [1.0, -1.0] {
            let ax = self.a_endo_signed(&x, sign);
            let lhs = self.a_endo_signed(&(ax * y), sign);
            let rhs = wedge_endo(&x, &y) - wedge_endo(&(self.j * x), &(self.j * y));
            let ok16 = (lhs - rhs).amax() < TOL;
            let psi = induced_action(&ax, &self.psi_plus);
            let ok18 = (psi + 2.0 * wedge(&Form::from_vec(&x), &self.omega)).max_abs() < TOL;
            if ok16 && ok18 {
                return Ok(sign);
            }
        }
        Err(ModelError::Calibration)
    }

    fn build_bases(&mut self) {
        let j = self.j;
        let mut syms = Vec::new();
        for a in 0..N {
            for b in a..N {
                let mut e = Endo6::zeros();
                e[(a, b)] = 1.0;
                e[(b, a)] = 1.0;
                syms.push(e);
            }
        }
        let flat = |m: &Endo6| DVector::from_column_slice(m.as_slice());
        let unflat = |v: &DVector<f64>| Endo6::from_column_slice(v.as_slice());
        let minus: Vec<_> = syms.iter().map(|h| flat(&(0.5 * (h + j * h * j)))).collect();
        let plus0: Vec<_> = syms
            .iter()
            .map(|h| {
                let p = 0.5 * (h - j * h * j);
                flat(&(p - Endo6::identity() * (p.trace() / 6.0)))
            })
            .collect();
        self.sym_minus = gram_schmidt(&minus, 1e-9).iter().map(unflat).collect();
        self.sym_plus0 = gram_schmidt(&plus0, 1e-9).iter().map(unflat).collect();
        let two: Vec<_> = masks_of_degree(2)
            .into_iter()
            .map(|m| {
                let f = Form::basis(m);
                let lam = inner(&f, &self.omega) / 3.0;
                let y = Vec6::from_fn(|k, _| inner(&f, &contract(&unit(k), &self.psi_plus)) / 2.0);
                (f - lam * self.omega - self.contract_psi_plus(&y)).to_dvector()
            })
            .collect();
        self.lambda11_0 = gram_schmidt(&two, 1e-9).iter().map(|v| Form::from_slice(v.as_slice())).collect();
        self.sigma_basis = self.sym_minus.iter().map(|s| induced_action(s, &self.psi_plus)).collect();
        let k = self.sigma_basis.len();
        let gram = nalgebra::DMatrix::from_fn(k, k, |a, b| inner(&self.sigma_basis[a], &self.sigma_basis[b]));
        self.sigma_gram_inv = gram.try_inverse().expect("S -> S*psi+ is injective on Sym-");
    }

    /// `+1` when A is defined by `g(A_X Y, Z) = −ψ⁺(X, Y, JZ)` without flip.
    pub fn a_sign(&self) -> f64 {
        self.a_sign
    }

    /// `A_X = J(∇_X J)` in the point model.
    pub fn a_endo(&self, x: &Vec6) -> Endo6 {
        self.a_endo_signed(x, self.a_sign)
    }

    /// `A_Z(A_X Y)`, checked against the closed form.
    pub fn a_z_a_x(&self, z: &Vec6, x: &Vec6, y: &Vec6) -> Result<Vec6, ModelError> {
        let direct = self.a_endo(z) * (self.a_endo(x) * y);
        let closed = self.a_z_a_x_closed(z, x, y);
        let r = (direct - closed).amax();
        let scale = 1.0_f64.max(z.norm() * x.norm() * y.norm());
        if r > 1e-12 * scale {
            return Err(ModelError::ClosedForm(r));
        }
        Ok(direct)
    }

    /// `−g(X,Z)Y + g(Y,Z)X + g(JX,Z)JY − g(JY,Z)JX`.
    pub fn a_z_a_x_closed(&self, z: &Vec6, x: &Vec6, y: &Vec6) -> Vec6 {
        let jx = self.j * x;
        let jy = self.j * y;
        -x.dot(z) * y + y.dot(z) * x + jx.dot(z) * jy - jy.dot(z) * jx
    }

    pub fn contract_psi_plus(&self, y: &Vec6) -> Form {
        contract(y, &self.psi_plus)
    }

    pub fn contract_psi_minus(&self, y: &Vec6) -> Form {
        contract(y, &self.psi_minus)
    }

    /// `φ = g(Jh·,·)`, i.e. `φ_ab = (Jh)_{ba}`.
    pub fn phi_of_h(&self, h: &Endo6) -> Form {
        two_form_from_components(&(self.j * h).transpose())
    }

    /// Inverse of [`Su3Model::phi_of_h`] on endomorphisms commuting with J.
    pub fn h_of_phi(&self, phi: &Form) -> Endo6 {
        -self.j * two_form_components(phi).transpose()
    }

    /// `σ = S⋆ψ⁺`.
    pub fn sigma_of_s(&self, s: &Endo6) -> Form {
        induced_action(s, &self.psi_plus)
    }

    pub fn sym_minus_basis(&self) -> &[Endo6] {
        &self.sym_minus
    }

    pub fn sym_plus0_basis(&self) -> &[Endo6] {
        &self.sym_plus0
    }

    /// Orthonormal basis of trace-free symmetric endomorphisms (20 elements).
    pub fn sym0_basis(&self) -> Vec<Endo6> {
        self.sym_plus0.iter().chain(self.sym_minus.iter()).copied().collect()
    }

    pub fn lambda11_0_basis(&self) -> &[Form] {
        &self.lambda11_0
    }

    pub fn split_lambda2(&self, a: &Form) -> Result<Lambda2Split, ModelError> {
        check_degree(a, 2)?;
        let lambda = inner(a, &self.omega) / 3.0;
        let y = Vec6::from_fn(|k, _| inner(a, &self.contract_psi_plus(&unit(k))) / 2.0);
        let eta0 = *a - lambda * self.omega - self.contract_psi_plus(&y);
        Ok(Lambda2Split { lambda, y, eta0 })
    }

    pub fn split_lambda3(&self, a: &Form) -> Result<Lambda3Split, ModelError> {
        check_degree(a, 3)?;
        let alpha = Vec6::from_fn(|k, _| inner(a, &wedge(&Form::from_vec(&unit(k)), &self.omega)) / 2.0);
        let a_plus = inner(a, &self.psi_plus) / 4.0;
        let a_minus = inner(a, &self.psi_minus) / 4.0;
        let rest = *a - wedge(&Form::from_vec(&alpha), &self.omega) - a_plus * self.psi_plus - a_minus * self.psi_minus;
        let rhs = DVector::from_iterator(self.sigma_basis.len(), self.sigma_basis.iter().map(|b| inner(b, &rest)));
        let coef = &self.sigma_gram_inv * rhs;
        let mut s = Endo6::zeros();
        for (k, b) in self.sym_minus.iter().enumerate() {
            s += b * coef[k];
        }
        let r = (self.sigma_of_s(&s) - rest).max_abs();
        if r > 1e-9 * 1.0_f64.max(a.max_abs()) {
            return Err(ModelError::Reassembly(r));
        }
        Ok(Lambda3Split { alpha, a_plus, a_minus, s })
    }

    pub fn sym_split(&self, h: &Endo6) -> Result<SymSplit, ModelError> {
        let skew = (h - h.transpose()).amax();
        if skew > 1e-12 * 1.0_f64.max(h.amax()) {
            return Err(ModelError::NotSymmetric(skew));
        }
        let j = self.j;
        let s = 0.5 * (h + j * h * j);
        let plus = 0.5 * (h - j * h * j);
        let trace = plus.trace();
        Ok(SymSplit { h: plus - Endo6::identity() * (trace / 6.0), trace, s })
    }

    /// `Ã_X` on a 2-tensor `T = T_ab e_a⊗e_b`: `A_Xα⊗β − α⊗A_Xβ`.
    pub fn tilde_action(&self, x: &Vec6, t: &Matrix6<f64>) -> Matrix6<f64> {
        let a = self.a_endo(x);
        a * t - t * a.transpose()
    }

    /// `A_X⋆` on a 2-tensor: `A_Xα⊗β + α⊗A_Xβ`.
    pub fn a_star_tensor(&self, x: &Vec6, t: &Matrix6<f64>) -> Matrix6<f64> {
        let a = self.a_endo(x);
        a * t + t * a.transpose()
    }

    /// Random element of Λ^{(1,1)}_0.
    pub fn random_lambda11_0<R: Rng>(&self, rng: &mut R) -> Form {
        self.lambda11_0.iter().fold(Form::zero(), |acc, b| acc + rng.random_range(-1.0..1.0) * *b)
    }

    pub fn random_sym_minus<R: Rng>(&self, rng: &mut R) -> Endo6 {
        self.sym_minus.iter().fold(Endo6::zeros(), |acc, b| acc + b * rng.random_range(-1.0..1.0))
    }

    pub fn random_sym_plus0<R: Rng>(&self, rng: &mut R) -> Endo6 {
        self.sym_plus0.iter().fold(Endo6::zeros(), |acc, b| acc + b * rng.random_range(-1.0..1.0))
    }
}

fn check_degree(a: &Form, p: usize) -> Result<(), ModelError> {
    if (*a - a.part(p)).max_abs() > 0.0 {
        return Err(ModelError::WrongDegree { expected: p, got: a.degree() });
    }
    Ok(())
}

pub fn random_vec<R: Rng>(rng: &mut R) -> Vec6 {
    Vec6::from_fn(|_, _| rng.random_range(-1.0..1.0))
}

pub fn random_form<R: Rng>(rng: &mut R, p: usize) -> Form {
    let mut f = Form::zero();
    for m in masks_of_degree(p) {
        f.set(m, rng.random_range(-1.0..1.0));
    }
    f
}

pub fn random_skew<R: Rng>(rng: &mut R) -> Endo6 {
    let m = Endo6::from_fn(|_, _| rng.random_range(-1.0..1.0));
    m - m.transpose()
}

pub fn random_endo<R: Rng>(rng: &mut R) -> Endo6 {
    Endo6::from_fn(|_, _| rng.random_range(-1.0..1.0))
}

/// Worst residual of one identity over a batch of random instances.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityResidual {
    pub id: String,
    pub instances: usize,
    pub max_residual: f64,
}

fn worst<F: FnMut() -> f64>(id: &str, n: usize, mut f: F) -> IdentityResidual {
    let max_residual = (0..n).map(|_| f()).fold(0.0, f64::max);
    IdentityResidual { id: id.to_string(), instances: n, max_residual }
}

fn rel(r: f64, scale: f64) -> f64 {
    r / 1.0_f64.max(scale)
}

/// Pointwise identities of the A-tensor and the SU(3) decompositions,
/// `n` random instances each.
pub fn algebra_identity_suite<R: Rng>(m: &Su3Model, rng: &mut R, n: usize) -> Vec<IdentityResidual> {
    let j = m.j;
    let mut out = Vec::new();
    out.push(worst("AZAX", n, || {
        let (z, x, y) = (random_vec(rng), random_vec(rng), random_vec(rng));
        let d = m.a_endo(&z) * (m.a_endo(&x) * y);
        rel((d - m.a_z_a_x_closed(&z, &x, &y)).amax(), d.amax())
    }));
    out.push(worst("eq2.16", n, || {
        let (x, y) = (random_vec(rng), random_vec(rng));
        let lhs = m.a_endo(&(m.a_endo(&x) * y));
        let rhs = wedge_endo(&x, &y) - wedge_endo(&(j * x), &(j * y));
        rel((lhs - rhs).amax(), lhs.amax())
    }));
    out.push(worst("eq2.17", n, || {
        // B⋆ is the derivation extending B on 1-forms for skew B
        let b = random_skew(rng);
        let (u, v) = (random_form(rng, 1), random_form(rng, 2));
        let one = induced_action(&b, &u) - Form::from_vec(&(b * u.to_vec6()));
        let lhs = induced_action(&b, &wedge(&u, &v));
        let rhs = wedge(&induced_action(&b, &u), &v) + wedge(&u, &induced_action(&b, &v));
        rel(one.max_abs().max((lhs - rhs).max_abs()), lhs.max_abs())
    }));
    out.push(worst("eq2.18", n, || {
        let x = random_vec(rng);
        let lhs = induced_action(&m.a_endo(&x), &m.psi_plus);
        let rhs = -2.0 * wedge(&Form::from_vec(&x), &m.omega);
        rel((lhs - rhs).max_abs(), lhs.max_abs())
    }));
    out.push(worst("Jstar2", n, || {
        // (J⋆)² = −(q−p)² on (p,q)+(q,p) pieces
        let js = |f: &Form| induced_action(&j, f);
        let pieces: [(Form, f64); 4] = [
            (m.omega, 0.0),
            (m.random_lambda11_0(rng), 0.0),
            (m.contract_psi_plus(&random_vec(rng)), 4.0),
            (rng.random_range(-1.0..1.0) * m.psi_plus + rng.random_range(-1.0..1.0) * m.psi_minus, 9.0),
        ];
        pieces.iter().map(|(f, k)| (js(&js(f)) + *k * *f).max_abs()).fold(0.0, f64::max)
    }));
    out.push(worst("eq2.19", n, || {
        let h = m.random_sym_plus0(rng) + Endo6::identity() * rng.random_range(-1.0..1.0);
        let t = h.trace();
        let rp = induced_action(&h, &m.psi_plus) + 0.5 * t * m.psi_plus;
        let rm = induced_action(&h, &m.psi_minus) + 0.5 * t * m.psi_minus;
        rel(rp.max_abs().max(rm.max_abs()), h.amax())
    }));
    out.push(worst("eq2.20", n, || {
        let h = m.random_sym_plus0(rng);
        induced_action(&h, &m.psi_plus).max_abs().max(induced_action(&h, &m.psi_minus).max_abs())
    }));
    out.push(worst("eq2.21", n, || {
        let w = skew_endo_of_two_form(&m.random_lambda11_0(rng));
        induced_action(&w, &m.psi_plus).max_abs().max(induced_action(&w, &m.psi_minus).max_abs())
    }));
    out.push(worst("eq2.22", n, || {
        let s = m.random_sym_minus(rng);
        let lhs = hodge(&induced_action(&s, &m.psi_plus));
        let rhs = -1.0 * induced_action(&s, &m.psi_minus);
        rel((lhs - rhs).max_abs(), lhs.max_abs())
    }));
    out.push(worst("eq2.23", n, || {
        // *γ = −γ∧ω, and e_i⌟(γ∧ω) = (e_i⌟γ)∧ω + Je_i∧γ
        let g = m.random_lambda11_0(rng);
        let mut r = (hodge(&g) + wedge(&g, &m.omega)).max_abs();
        for i in 0..N {
            let e = unit(i);
            let lhs = contract(&e, &wedge(&g, &m.omega));
            let rhs = wedge(&contract(&e, &g), &m.omega) + wedge(&Form::from_vec(&(j * e)), &g);
            r = r.max((lhs - rhs).max_abs());
        }
        r
    }));
    out.push(worst("eq2.23-hodge-chain", n, || {
        // measured sign of the first step: *(e_i∧γ) = +e_i⌟*γ
        let g = m.random_lambda11_0(rng);
        (0..N)
            .map(|i| {
                let e = unit(i);
                (hodge(&wedge(&Form::from_vec(&e), &g)) - contract(&e, &hodge(&g))).max_abs()
            })
            .fold(0.0, f64::max)
    }));
    let sum_a = |f: &dyn Fn(usize, &Endo6) -> Form| (0..N).fold(Form::zero(), |acc, i| acc + f(i, &m.a_endo(&unit(i))));
    out.push(worst("eq2.24", n, || {
        let w = m.random_lambda11_0(rng);
        sum_a(&|i, a| wedge(&Form::from_vec(&unit(i)), &induced_action(a, &w))).max_abs()
    }));
    out.push(worst("eq2.25", n, || {
        let w = m.random_lambda11_0(rng);
        sum_a(&|i, a| contract(&unit(i), &induced_action(a, &w))).max_abs()
    }));
    out.push(worst("eq2.26", n, || {
        let h = m.random_sym_plus0(rng);
        (0..N).fold(Vec6::zeros(), |acc, i| {
            let a = m.a_endo(&unit(i));
            acc + (a * h - h * a) * unit(i)
        })
        .amax()
    }));
    out.push(worst("eq2.27", n, || {
        let s = m.random_sym_minus(rng);
        (0..N).fold(Vec6::zeros(), |acc, i| {
            let a = m.a_endo(&unit(i));
            acc + (a * s - s * a) * unit(i)
        })
        .amax()
    }));
    out.push(worst("eq2.28", n, || {
        let s = m.random_sym_minus(rng);
        let sp = induced_action(&s, &m.psi_minus);
        sum_a(&|i, a| contract(&unit(i), &induced_action(a, &sp))).max_abs()
    }));
    out
}
