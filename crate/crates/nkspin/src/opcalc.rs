//! Differential operators on invariant and Fourier-mode sections as
//! explicit matrices.
//!
//! A mode `(j₁,j₂)` is the irreducible representation `V_{j₁} ⊗ V_{j₂}` of
//! `SU(2)×SU(2)`; sections in that mode are `V ⊗ fiber`, indexed
//! `mode * fiber_dim + fiber`, and a left-invariant vector field `X` acts on
//! the `V` factor by `dπ(X)`. The invariant space is the mode `(0,0)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::clifford::{standard, SPINOR_DIM, ST_DIM};
use crate::exterior::{
    contract, contract_matrix, hodge_matrix, induced_matrix, masks_of_degree, two_form_components,
    wedge, wedge_left_matrix, wedge_right_matrix, Endo6, Form, Vec6, ALG_DIM, N, unit,
};
use crate::homogeneous::{q_of, r_endo, FrameGeometry, T4};
use crate::linalg::{complexify, identity, kron, lift_real, max_abs, nullspace, rel_residual, CMat, C64};
use crate::par;
use crate::report::{Assertion, Observation, Provenance, SuiteReport};
use crate::su3_model::Su3Model;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum BundleSpec {
    Tangent,
    /// The full exterior algebra, all degrees.
    Forms,
    Spinor,
    SpinorTangent,
    /// 2-tensors `T_ab`, index `6a + b`.
    Tensor2,
}

impl BundleSpec {
    pub fn fiber_dim(&self) -> usize {
        match self {
            BundleSpec::Tangent => N,
            BundleSpec::Forms => ALG_DIM,
            BundleSpec::Spinor => SPINOR_DIM,
            BundleSpec::SpinorTangent => ST_DIM,
            BundleSpec::Tensor2 => N * N,
        }
    }

    /// Action of a skew endomorphism on the fiber.
    pub fn fiber_action(&self, b: &Endo6) -> DMatrix<f64> {
        let bd = DMatrix::from_column_slice(N, N, b.as_slice());
        match self {
            BundleSpec::Tangent => bd,
            BundleSpec::Forms => induced_matrix(b),
            BundleSpec::Spinor => standard().spin_lift(b),
            BundleSpec::SpinorTangent => {
                bd.kronecker(&DMatrix::identity(SPINOR_DIM, SPINOR_DIM))
                    + DMatrix::<f64>::identity(N, N).kronecker(&standard().spin_lift(b))
            }
            BundleSpec::Tensor2 => bd.kronecker(&DMatrix::identity(N, N)) + DMatrix::<f64>::identity(N, N).kronecker(&bd),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            BundleSpec::Tangent => "tangent",
            BundleSpec::Forms => "forms",
            BundleSpec::Spinor => "spinor",
            BundleSpec::SpinorTangent => "spinor_tangent",
            BundleSpec::Tensor2 => "tensor2",
        }
    }
}

/// A pair of spins stored doubled, so `(½,0)` is `Mode { j1x2: 1, j2x2: 0 }`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    pub j1x2: u32,
    pub j2x2: u32,
}

impl Mode {
    pub const INVARIANT: Mode = Mode { j1x2: 0, j2x2: 0 };

    pub fn new(j1x2: u32, j2x2: u32) -> Self {
        Mode { j1x2, j2x2 }
    }

    pub fn dim(&self) -> usize {
        ((self.j1x2 + 1) * (self.j2x2 + 1)) as usize
    }

    pub fn is_invariant(&self) -> bool {
        *self == Self::INVARIANT
    }
}

fn half(v: u32) -> String {
    if v.is_multiple_of(2) {
        format!("{}", v / 2)
    } else {
        format!("{v}/2")
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", half(self.j1x2), half(self.j2x2))
    }
}

fn parse_half(s: &str) -> Result<u32, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: u32 = p.trim().parse().map_err(|_| format!("bad spin `{s}`"))?;
        if q.trim() != "2" {
            return Err(format!("spin `{s}` must be a half-integer"));
        }
        return Ok(p);
    }
    let v: f64 = s.parse().map_err(|_| format!("bad spin `{s}`"))?;
    let twice = 2.0 * v;
    if v < 0.0 || (twice - twice.round()).abs() > 1e-12 {
        return Err(format!("spin `{s}` must be a non-negative half-integer"));
    }
    Ok(twice.round() as u32)
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (a, b) = t.split_once(',').ok_or_else(|| format!("mode `{s}` must look like j1,j2"))?;
        Ok(Mode::new(parse_half(a)?, parse_half(b)?))
    }
}

impl Serialize for Mode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Mode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn default_window() -> Vec<Mode> {
    vec![Mode::new(0, 0), Mode::new(1, 0), Mode::new(0, 1), Mode::new(1, 1), Mode::new(2, 0), Mode::new(0, 2)]
}

/// `J_x, J_y, J_z` on the spin-`j` representation, basis `m = j, j−1, …`.
pub fn spin_matrices(jx2: u32) -> [CMat; 3] {
    let d = (jx2 + 1) as usize;
    let j = jx2 as f64 / 2.0;
    let m: Vec<f64> = (0..d).map(|k| j - k as f64).collect();
    let mut jz = CMat::zeros(d, d);
    let mut jp = CMat::zeros(d, d);
    for k in 0..d {
        jz[(k, k)] = C64::new(m[k], 0.0);
        if k > 0 {
            jp[(k - 1, k)] = C64::new((j * (j + 1.0) - m[k] * (m[k] + 1.0)).sqrt(), 0.0);
        }
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * C64::new(0.5, 0.0);
    let jy = (&jp - &jm) * C64::new(0.0, -0.5);
    [jx, jy, jz]
}

/// `dπ` of the Lie basis `E_1,E_2,E_3,F_1,F_2,F_3`; `E_a ↦ −2i J_a`.
pub fn lie_generators(mode: Mode) -> Vec<CMat> {
    let a = spin_matrices(mode.j1x2);
    let b = spin_matrices(mode.j2x2);
    let d1 = (mode.j1x2 + 1) as usize;
    let d2 = (mode.j2x2 + 1) as usize;
    let m2i = C64::new(0.0, -2.0);
    let mut out = Vec::with_capacity(6);
    for x in &a {
        out.push(kron(&(x * m2i), &identity(d2)));
    }
    for x in &b {
        out.push(kron(&identity(d1), &(x * m2i)));
    }
    out
}

pub struct SectionSpace<'a> {
    pub geom: &'a FrameGeometry,
    pub bundle: BundleSpec,
    pub mode: Mode,
    d: usize,
    f: usize,
    dpi: Vec<CMat>,
    act: Vec<DMatrix<f64>>,
    act_bar: Option<Vec<DMatrix<f64>>>,
}

impl<'a> SectionSpace<'a> {
    pub fn new(geom: &'a FrameGeometry, bundle: BundleSpec, mode: Mode) -> Self {
        let gens = lie_generators(mode);
        let d = mode.dim();
        let dpi = (0..N)
            .map(|i| {
                let mut m = CMat::zeros(d, d);
                for (b, g) in gens.iter().enumerate() {
                    let s = geom.frame[(b, i)];
                    if s != 0.0 {
                        m += g * C64::new(s, 0.0);
                    }
                }
                m
            })
            .collect();
        let act = par::map_range(N, |i| bundle.fiber_action(&geom.connection_endo(i)));
        let act_bar = geom.gamma_bar.as_ref().map(|_| par::map_range(N, |i| bundle.fiber_action(&geom.connection_endo_bar(i))));
        SectionSpace { geom, bundle, mode, d, f: bundle.fiber_dim(), dpi, act, act_bar }
    }

    pub fn dim(&self) -> usize {
        self.d * self.f
    }

    pub fn mode_dim(&self) -> usize {
        self.d
    }

    pub fn label(&self) -> String {
        self.mode.to_string()
    }

    pub fn identity(&self) -> CMat {
        identity(self.dim())
    }

    /// `I_mode ⊗ m` for a fiber map (possibly between different fibers).
    pub fn lift(&self, m: &DMatrix<f64>) -> CMat {
        lift_real(self.d, m)
    }

    pub fn lift_c(&self, m: &CMat) -> CMat {
        kron(&identity(self.d), m)
    }

    pub fn dpi(&self, i: usize) -> &CMat {
        &self.dpi[i]
    }

    /// `∇_{e_i}` with a given fiber action of the connection endomorphism.
    pub fn nabla_with(&self, i: usize, fiber: &DMatrix<f64>) -> CMat {
        kron(&self.dpi[i], &identity(self.f)) + self.lift(fiber)
    }

    pub fn nabla(&self, i: usize) -> CMat {
        self.nabla_with(i, &self.act[i])
    }

    pub fn nabla_bar(&self, i: usize) -> CMat {
        self.nabla_with(i, &self.act_bar.as_ref().expect("Hermitian connection needs an SU(3)-structure")[i])
    }

    pub fn nablas(&self, hermitian: bool) -> Vec<CMat> {
        par::map_range(N, |i| covariant_derivative(self, i, hermitian))
    }
}

pub fn covariant_derivative(space: &SectionSpace, i: usize, use_hermitian: bool) -> CMat {
    if use_hermitian {
        space.nabla_bar(i)
    } else {
        space.nabla(i)
    }
}

fn sum_lifted(space: &SectionSpace, fibers: &[DMatrix<f64>], ops: &[CMat]) -> CMat {
    let lifted: Vec<CMat> = par::map(fibers, |m| space.lift(m));
    let pairs: Vec<(&CMat, &CMat)> = lifted.iter().zip(ops.iter()).collect();
    par::sum_products(&pairs)
}

pub fn exterior_d(space: &SectionSpace) -> CMat {
    assert_eq!(space.bundle, BundleSpec::Forms);
    let w: Vec<DMatrix<f64>> = (0..N).map(|i| wedge_left_matrix(&Form::from_vec(&unit(i)))).collect();
    sum_lifted(space, &w, &space.nablas(false))
}

pub fn codifferential(space: &SectionSpace) -> CMat {
    assert_eq!(space.bundle, BundleSpec::Forms);
    let c: Vec<DMatrix<f64>> = (0..N).map(|i| -contract_matrix(&unit(i))).collect();
    sum_lifted(space, &c, &space.nablas(false))
}

pub fn dirac(space: &SectionSpace) -> CMat {
    assert_eq!(space.bundle, BundleSpec::Spinor);
    let g: Vec<DMatrix<f64>> = (0..N).map(|i| standard().gamma_basis(i).clone()).collect();
    sum_lifted(space, &g, &space.nablas(false))
}

fn st_gamma(i: usize) -> DMatrix<f64> {
    DMatrix::<f64>::identity(N, N).kronecker(standard().gamma_basis(i))
}

/// `D_TM = Σ (e_k·⊗Id) ∇_{e_k}`, or its Hermitian version.
pub fn twisted_dirac(space: &SectionSpace, use_hermitian: bool) -> CMat {
    assert_eq!(space.bundle, BundleSpec::SpinorTangent);
    let g: Vec<DMatrix<f64>> = (0..N).map(st_gamma).collect();
    sum_lifted(space, &g, &space.nablas(use_hermitian))
}

/// `Π` on sections: from the spinor-tangent space to spinors of the same mode.
pub fn pi_operator(space: &SectionSpace) -> CMat {
    assert_eq!(space.bundle, BundleSpec::SpinorTangent);
    space.lift(&standard().pi_matrix())
}

pub fn rough_laplacian(space: &SectionSpace, use_hermitian: bool) -> CMat {
    let nab = space.nablas(use_hermitian);
    let div = space.geom.divergence_vector(use_hermitian);
    let pairs: Vec<(&CMat, &CMat)> = nab.iter().map(|n| (n, n)).collect();
    let mut out = -par::sum_products(&pairs);
    for (l, n) in nab.iter().enumerate() {
        if div[l] != 0.0 {
            out += n * C64::new(div[l], 0.0);
        }
    }
    out
}

/// `∇*∇ + q(R)` (or the Hermitian version).
pub fn laplacian(space: &SectionSpace, use_hermitian: bool) -> CMat {
    let r = if use_hermitian { space.geom.hermitian_curvature().expect("SU(3)-structure") } else { space.geom.curvature() };
    rough_laplacian(space, use_hermitian) + space.lift(&q_of(&r, space.bundle))
}

/// Fiber map `T ↦ T(e_i, ·)`, 6×36.
pub fn t2_row(i: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(N, N * N);
    for b in 0..N {
        m[(b, i * N + b)] = 1.0;
    }
    m
}

/// `δT = −Σ (e_i ⌟ ∇_{e_i}T)` from 2-tensors to vectors.
pub fn t2_divergence(space: &SectionSpace) -> CMat {
    assert_eq!(space.bundle, BundleSpec::Tensor2);
    let c: Vec<DMatrix<f64>> = (0..N).map(|i| -t2_row(i)).collect();
    sum_lifted(space, &c, &space.nablas(false))
}

/// Twistor operator `P = pr_{S_{3/2}} ∘ ∇` from spinors to spinor-tangent.
pub fn twistor(spinor_space: &SectionSpace) -> CMat {
    assert_eq!(spinor_space.bundle, BundleSpec::Spinor);
    let emb: Vec<DMatrix<f64>> = (0..N)
        .map(|i| {
            let mut m = DMatrix::zeros(ST_DIM, SPINOR_DIM);
            m.view_mut((i * SPINOR_DIM, 0), (SPINOR_DIM, SPINOR_DIM)).fill_with_identity();
            standard().s32_projector() * m
        })
        .collect();
    sum_lifted(spinor_space, &emb, &spinor_space.nablas(false))
}

/// Stacked `∇_{e_i} − c e_i·` on spinors.
pub fn killing_operator(spinor_space: &SectionSpace, c: f64) -> CMat {
    assert_eq!(spinor_space.bundle, BundleSpec::Spinor);
    let nab = spinor_space.nablas(false);
    let blocks: Vec<CMat> = (0..N).map(|i| &nab[i] - spinor_space.lift(&(standard().gamma_basis(i) * c))).collect();
    let refs: Vec<&CMat> = blocks.iter().collect();
    crate::linalg::vstack(&refs)
}

/// Fiber-level linear maps between forms, vectors and 2-tensors.
pub mod fiber {
    use super::*;

    pub fn vec_to_form() -> DMatrix<f64> {
        let mut m = DMatrix::zeros(ALG_DIM, N);
        for i in 0..N {
            m[(1 << i, i)] = 1.0;
        }
        m
    }

    pub fn form_to_vec() -> DMatrix<f64> {
        vec_to_form().transpose()
    }

    /// Endomorphism of a 2-tensor: `T ↦ Tᵀ` read as a matrix acting on columns.
    pub fn t2_to_endo(t: &[f64]) -> Endo6 {
        Endo6::from_fn(|r, c| t[c * N + r])
    }

    pub fn endo_to_t2(e: &Endo6) -> Vec<f64> {
        let mut t = vec![0.0; N * N];
        for a in 0..N {
            for b in 0..N {
                t[a * N + b] = e[(b, a)];
            }
        }
        t
    }

    fn columns(nrows: usize, ncols: usize, f: impl Fn(usize) -> Vec<f64> + Sync + Send) -> DMatrix<f64> {
        par::assemble_columns(nrows, ncols, f)
    }

    fn unit_t2(k: usize) -> Vec<f64> {
        let mut t = vec![0.0; N * N];
        t[k] = 1.0;
        t
    }

    /// `S ↦ S_⋆ψ⁺`, 64×36.
    pub fn sigma_map(model: &Su3Model) -> DMatrix<f64> {
        columns(ALG_DIM, N * N, |k| model.sigma_of_s(&t2_to_endo(&unit_t2(k))).coefficients().to_vec())
    }

    /// `h ↦ g(Jh·,·)`, 64×36.
    pub fn phi_map(model: &Su3Model) -> DMatrix<f64> {
        columns(ALG_DIM, N * N, |k| model.phi_of_h(&t2_to_endo(&unit_t2(k))).coefficients().to_vec())
    }

    /// A 2-form as the 2-tensor of its components, 36×64.
    pub fn form_to_t2() -> DMatrix<f64> {
        columns(N * N, ALG_DIM, |k| {
            let c = two_form_components(&Form::basis(k).part(2));
            let mut t = vec![0.0; N * N];
            for a in 0..N {
                for b in 0..N {
                    t[a * N + b] = c[(a, b)];
                }
            }
            t
        })
    }

    /// `η ↦ (η as skew endomorphism)∘J`, 36×64.
    pub fn form_endo_j(model: &Su3Model) -> DMatrix<f64> {
        columns(N * N, ALG_DIM, |k| {
            let e = two_form_components(&Form::basis(k).part(2)).transpose();
            endo_to_t2(&(e * model.j))
        })
    }

    /// `Y ↦ Y ⌟ ψ`, applied to the degree-one part, 64×64.
    pub fn contract_into(psi: &Form) -> DMatrix<f64> {
        let psi = *psi;
        columns(ALG_DIM, ALG_DIM, move |k| {
            let y = Form::basis(k).to_vec6();
            contract(&y, &psi).coefficients().to_vec()
        })
    }

    /// `A_⋆` on 2-tensors (derivation).
    pub fn a_on_t2(a: &Endo6) -> DMatrix<f64> {
        let ad = DMatrix::from_column_slice(N, N, a.as_slice());
        ad.kronecker(&DMatrix::identity(N, N)) + DMatrix::<f64>::identity(N, N).kronecker(&ad)
    }

    /// `Ã_⋆` on 2-tensors.
    pub fn a_tilde_on_t2(a: &Endo6) -> DMatrix<f64> {
        let ad = DMatrix::from_column_slice(N, N, a.as_slice());
        ad.kronecker(&DMatrix::identity(N, N)) - DMatrix::<f64>::identity(N, N).kronecker(&ad)
    }

    /// Orthonormal basis of Λ^{(1,1)}_0 as 64×8.
    pub fn lambda11_0(model: &Su3Model) -> DMatrix<f64> {
        let b = model.lambda11_0_basis();
        DMatrix::from_fn(ALG_DIM, b.len(), |r, c| b[c].coef(r))
    }

    pub fn sym_basis(basis: &[Endo6]) -> DMatrix<f64> {
        let cols: Vec<Vec<f64>> = basis.iter().map(endo_to_t2).collect();
        DMatrix::from_fn(N * N, cols.len(), |r, c| cols[c][r])
    }

    /// Selection of degree-`p` coefficients, 64×C(6,p).
    pub fn degree_selector(p: usize) -> DMatrix<f64> {
        let masks = masks_of_degree(p);
        let mut m = DMatrix::zeros(ALG_DIM, masks.len());
        for (c, mask) in masks.iter().enumerate() {
            m[(*mask, c)] = 1.0;
        }
        m
    }
}

fn complex_col(f: &Form) -> CMat {
    CMat::from_fn(ALG_DIM, 1, |r, _| C64::new(f.coef(r), 0.0))
}

/// Residual record for one operator identity on one space.
fn check(id: &str, space: &SectionSpace, lhs: &CMat, rhs: &CMat, tol: f64, prov: Provenance) -> Assertion {
    Assertion::residual(id, &space.label(), rel_residual(lhs, rhs), tol, prov)
}

/// Derivative identities for the A-action on sub-bundle sections.
pub fn hermitian_derivative_suite(geom: &FrameGeometry, modes: &[Mode], tol: f64) -> SuiteReport {
    let mut rep = SuiteReport::new("prop_suite", geom.kind.label());
    let per_mode = par::map(modes, |&m| prop_identities_on(geom, m, tol));
    for (a, o) in per_mode {
        rep.extend(a);
        for x in o {
            rep.observe(x);
        }
    }
    rep
}

fn prop_identities_on(geom: &FrameGeometry, mode: Mode, tol: f64) -> (Vec<Assertion>, Vec<Observation>) {
    let model = geom.su3.as_ref().expect("SU(3)-structure");
    let sl = SectionSpace::new(geom, BundleSpec::Forms, mode);
    let st = SectionSpace::new(geom, BundleSpec::Tensor2, mode);
    let d = exterior_d(&sl);
    let de = codifferential(&sl);
    let nbl = sl.nablas(true);
    let nbt = st.nablas(true);
    let a: Vec<Endo6> = (0..N).map(|i| model.a_endo(&unit(i))).collect();
    let div_t = t2_divergence(&st);
    let lift_l = |m: &DMatrix<f64>| sl.lift(m);
    let lift_t = |m: &DMatrix<f64>| st.lift(m);
    let v2f = lift_l(&fiber::vec_to_form());
    let el = lift_l(&fiber::lambda11_0(model));
    let es = lift_t(&fiber::sym_basis(model.sym_minus_basis()));
    let eh = lift_t(&fiber::sym_basis(model.sym_plus0_basis()));
    let sig = lift_l(&fiber::sigma_map(model)); // T2 → forms
    let phi = lift_l(&fiber::phi_map(model));
    let f2t = lift_t(&fiber::form_to_t2());
    let wom = lift_l(&wedge_right_matrix(&model.omega));
    let hod = lift_l(&hodge_matrix());
    let ctrp = lift_l(&fiber::contract_into(&model.psi_plus));
    let ctrm = lift_l(&fiber::contract_into(&model.psi_minus));
    let jf = lift_l(&(fiber::vec_to_form() * DMatrix::from_column_slice(N, N, model.j.as_slice()) * fiber::form_to_vec()));
    let mej = lift_t(&fiber::form_endo_j(model));
    let a_forms: Vec<DMatrix<f64>> = a.iter().map(induced_matrix).collect();
    let a_t2: Vec<DMatrix<f64>> = a.iter().map(fiber::a_on_t2).collect();
    let at_t2: Vec<DMatrix<f64>> = a.iter().map(fiber::a_tilde_on_t2).collect();
    let a_nab_l = sum_lifted(&sl, &a_forms, &nbl);
    let a_nab_t = sum_lifted(&st, &a_t2, &nbt);
    let at_nab_t = sum_lifted(&st, &at_t2, &nbt);
    let ds = &v2f * (&div_t * &es);
    let dh = &v2f * (&div_t * &eh);
    let sig_s = &sig * &es;
    let c = |x: f64| C64::new(x, 0.0);
    let mut out = Vec::new();
    let mut obs = Vec::new();

    let lhs = &a_nab_l * &el;
    let rhs = -(&ctrp * &jf * &de * &el);
    out.push(check("eq2.12", &sl, &lhs, &rhs, tol, Provenance::Published));

    let lhs = &a_nab_l * &sig_s;
    let rhs = &wom * &ds * c(-2.0);
    out.push(check("eq2.13", &sl, &lhs, &rhs, tol, Provenance::Published));

    let lhs = &sig * &a_nab_t * &eh;
    let rhs = &wom * &dh * c(2.0) - &d * &phi * &eh * c(4.0);
    out.push(check("eq2.14", &sl, &lhs, &rhs, tol, Provenance::Published));

    let lhs = &a_nab_t * &es;
    let rhs = &mej * (&ctrp * &ds + &de * &sig_s);
    out.push(check("eq2.15", &st, &lhs, &rhs, tol, Provenance::Published));

    let lhs = &sig * &at_nab_t * &f2t * &el;
    let two_dw = &wom * &de * &el * c(2.0);
    let star_dw = &hod * &d * &el * c(4.0);
    out.push(
        check("eq2.29", &sl, &lhs, &(&two_dw - &star_dw), tol, Provenance::Derived)
            .with_note("measured sign: 2 delta w ^ omega - 4 *dw"),
    );
    obs.push(
        Observation::new("eq2.29-literal", &sl.label(), rel_residual(&lhs, &(&two_dw + &star_dw)))
            .with_note("residual of the printed +4 *dw form"),
    );

    let lhs = &at_nab_t * &eh;
    let rhs = -(&f2t * &ctrm * &dh);
    out.push(check("eq2.30", &st, &lhs, &rhs, tol, Provenance::Published));

    let lhs = &at_nab_t * &es;
    let rhs = &f2t * (&hod * &d * &sig_s - &ctrm * &ds);
    out.push(check("eq2.31", &st, &lhs, &rhs, tol, Provenance::Published));

    // operator structure on the same spaces
    out.push(check("d-squared", &sl, &(&d * &d), &CMat::zeros(sl.dim(), sl.dim()), tol, Provenance::Structural));
    out.push(check("delta-adjoint", &sl, &de, &d.adjoint(), tol, Provenance::Structural));
    let lap = laplacian(&sl, false);
    out.push(check("hodge-laplacian", &sl, &lap, &(&d * &de + &de * &d), tol, Provenance::Derived));
    let mut hom: f64 = 0.0;
    for i in 0..N {
        for j in 0..N {
            let lhs = sl.dpi(i) * sl.dpi(j) - sl.dpi(j) * sl.dpi(i);
            let mut rhs = CMat::zeros(sl.mode_dim(), sl.mode_dim());
            for k in 0..N {
                rhs += sl.dpi(k) * c(geom.c[i][j][k]);
            }
            hom = hom.max(max_abs(&(lhs - rhs)));
        }
    }
    out.push(Assertion::residual("dpi-homomorphism", &sl.label(), hom, tol, Provenance::Structural));
    if mode.is_invariant() {
        let om = complex_col(&model.omega);
        let nab = sl.nablas(false);
        let mut r_bar: f64 = 0.0;
        let mut r_nab: f64 = 0.0;
        for i in 0..N {
            for f in [&model.omega, &model.psi_plus, &model.psi_minus] {
                r_bar = r_bar.max(max_abs(&(&nbl[i] * complex_col(f))));
            }
            r_nab = r_nab.max(max_abs(&(&nab[i] * &om - complex_col(&contract(&unit(i), &model.psi_plus)))));
        }
        out.push(Assertion::residual("nabla-bar-parallel", &sl.label(), r_bar, tol, Provenance::Published));
        out.push(Assertion::residual("nabla-omega", &sl.label(), r_nab, tol, Provenance::Published));
        let dom = &d * &om - complex_col(&model.psi_plus) * c(3.0);
        out.push(Assertion::residual("d-omega", &sl.label(), max_abs(&dom), tol, Provenance::Derived));
    }
    (out, obs)
}

/// The S_{1/2}⊗TM operator identities comparing `D_TM`, `D̄_TM` and the
/// rough Laplacians.
pub fn weitzenboeck_suite(geom: &FrameGeometry, modes: &[Mode], tol: f64) -> SuiteReport {
    let mut rep = SuiteReport::new("weitzenboeck", geom.kind.label());
    let per_mode = par::map(modes, |&m| weitzenboeck_on(geom, m, tol));
    for (a, o) in per_mode {
        rep.extend(a);
        for x in o {
            rep.observe(x);
        }
    }
    rep
}

fn st_curvature_term(space: &SectionSpace, r: &T4) -> CMat {
    let cl = standard();
    let mut m = DMatrix::zeros(ST_DIM, ST_DIM);
    for j in 0..N {
        for k in 0..N {
            if j == k {
                continue;
            }
            let re = r_endo(r, j, k);
            let red = DMatrix::from_column_slice(N, N, re.as_slice());
            m += red.kronecker(&(cl.gamma_basis(j) * cl.gamma_basis(k))) * 0.5;
        }
    }
    space.lift(&m)
}

fn weitzenboeck_on(geom: &FrameGeometry, mode: Mode, tol: f64) -> (Vec<Assertion>, Vec<Observation>) {
    let cl = standard();
    let s = SectionSpace::new(geom, BundleSpec::SpinorTangent, mode);
    let n = s.dim();
    let id = identity(n);
    let c = |x: f64| C64::new(x, 0.0);
    let d_tm = twisted_dirac(&s, false);
    let r = geom.curvature();
    let rough = rough_laplacian(&s, false);
    let mut out = Vec::new();
    let mut obs = Vec::new();
    let scal = crate::homogeneous::ricci(&r).trace();
    let lich = &rough + &id * c(scal / 4.0) + st_curvature_term(&s, &r);
    out.push(check("lichnerowicz-dtm", &s, &(&d_tm * &d_tm), &lich, tol, Provenance::Derived));
    out.push(check("dtm-self-adjoint", &s, &d_tm, &d_tm.adjoint(), tol, Provenance::Published));
    // block structure against S_{1/2} ⊕ S_{3/2}
    let ss = SectionSpace::new(geom, BundleSpec::Spinor, mode);
    let dd = dirac(&ss);
    let pi = pi_operator(&s);
    let iota = s.lift(&cl.iota_matrix());
    let p32 = s.lift(&cl.s32_projector());
    let p = twistor(&ss);
    let p_star = p.adjoint();
    let ul = &pi * &d_tm * &iota;
    let ur = &pi * &d_tm * &p32;
    let ll = &p32 * &d_tm * &iota;
    let (c_ul, r_ul) = crate::linalg::fit_scalar(&ul, &dd);
    let (c_ur, r_ur) = crate::linalg::fit_scalar(&ur, &p_star);
    let (c_ll, r_ll) = crate::linalg::fit_scalar(&ll, &p);
    out.push(check("block-upper-left", &s, &ul, &(&dd * c(-2.0 / 3.0)), tol, Provenance::Published));
    out.push(check("block-upper-right", &s, &ur, &(&p_star * c(2.0)), tol, Provenance::Published));
    out.push(check("block-lower-left", &s, &ll, &(&p * c(1.0 / 3.0)), tol, Provenance::Published));
    obs.push(Observation::new(
        "block-constants",
        &s.label(),
        serde_json::json!({
            "upper_left": [c_ul.re, r_ul],
            "upper_right": [c_ur.re, r_ur],
            "lower_left": [c_ll.re, r_ll],
        }),
    ));
    let Some(model) = geom.su3.as_ref() else {
        obs.push(Observation::new("lichnerowicz-constant", &s.label(), scal / 4.0));
        return (out, obs);
    };
    let rb = geom.hermitian_curvature().expect("SU(3)-structure");
    let nab = s.nablas(false);
    let nbb = s.nablas(true);
    let db = twisted_dirac(&s, true);
    let lift_st = |m: DMatrix<f64>| s.lift(&m);
    let i6 = DMatrix::<f64>::identity(N, N);
    let psim_s = lift_st(i6.kronecker(&cl.gamma_form(&model.psi_minus)));
    let ww = cl.gamma_form(&model.omega) * cl.gamma_form(&model.omega);
    let wws = lift_st(i6.kronecker(&ww));
    let a: Vec<DMatrix<f64>> = (0..N).map(|i| DMatrix::from_column_slice(N, N, model.a_endo(&unit(i)).as_slice())).collect();
    let mut e_a = DMatrix::zeros(ST_DIM, ST_DIM);
    for i in 0..N {
        e_a += a[i].kronecker(cl.gamma_basis(i));
    }
    let e_a = lift_st(e_a);
    let rhs = &d_tm - &psim_s * c(0.75) - &e_a * c(0.5);
    out.push(check("eq3.1", &s, &db, &rhs, tol, Provenance::Published));
    let cpsi: Vec<DMatrix<f64>> = (0..N).map(|j| i6.kronecker(&cl.gamma_form(&contract(&unit(j), &model.psi_minus)))).collect();
    let ia: Vec<DMatrix<f64>> = a.iter().map(|x| x.kronecker(&DMatrix::identity(SPINOR_DIM, SPINOR_DIM))).collect();
    let cpsi_nbb = sum_lifted(&s, &cpsi, &nbb);
    let ia_nab = sum_lifted(&s, &ia, &nab);
    let rough_b = rough_laplacian(&s, true);
    let lap_b = &rough_b + s.lift(&q_of(&rb, BundleSpec::SpinorTangent));
    let db2 = &db * &db;
    let rhs = &lap_b + &id * c(0.5) + &wws * c(0.5) + &cpsi_nbb;
    out.push(check("eq3.4", &s, &db2, &rhs, tol, Provenance::Published));
    let rhs = &rough + &id * c(5.0 / 8.0) + &wws * c(1.0 / 8.0) + &ia_nab + &cpsi_nbb * c(0.5);
    out.push(check("eq3.6", &s, &rough_b, &rhs, tol, Provenance::Published));
    let curv = st_curvature_term(&s, &rb) - st_curvature_term(&s, &r);
    let rhs = &d_tm * &d_tm + &id * c(17.0 / 8.0) + &wws * c(9.0 / 8.0) + &cpsi_nbb * c(1.5) + &ia_nab + curv;
    out.push(check("eq3.7", &s, &db2, &rhs, tol, Provenance::Published));
    // Δ̄ − Δ on the tangent bundle
    let t = SectionSpace::new(geom, BundleSpec::Tangent, mode);
    let lt = laplacian(&t, false);
    let ltb = laplacian(&t, true);
    let a6: Vec<DMatrix<f64>> = a.clone();
    let rhs = sum_lifted(&t, &a6, &t.nablas(true)) - identity(t.dim()) * c(2.0);
    out.push(check("laplacian-difference-tangent", &t, &(ltb - lt), &rhs, tol, Provenance::Published));
    (out, obs)
}

/// Real matrices of `d`, `δ`, `Δ` on invariant forms and of the 2-tensor
/// divergence on invariant 2-tensors.
pub struct InvariantOperators {
    pub d: DMatrix<f64>,
    pub delta: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
    pub t2_divergence: DMatrix<f64>,
}

pub fn invariant_operators(geom: &FrameGeometry) -> InvariantOperators {
    let re = |m: CMat| m.map(|z| z.re);
    let sl = SectionSpace::new(geom, BundleSpec::Forms, Mode::INVARIANT);
    let st = SectionSpace::new(geom, BundleSpec::Tensor2, Mode::INVARIANT);
    InvariantOperators {
        d: re(exterior_d(&sl)),
        delta: re(codifferential(&sl)),
        laplacian: re(laplacian(&sl, false)),
        t2_divergence: re(t2_divergence(&st)),
    }
}

/// Harmonic invariant 3-forms and their relation to the factor volume forms.
pub struct HarmonicThreeForms {
    /// Orthonormal basis, 20 × dim (degree-3 coefficients).
    pub basis: CMat,
    pub kernel: crate::linalg::RankSummary,
    /// Harmonic projections of the two factor volume forms, as full forms.
    pub projected_volumes: [Form; 2],
    /// Max residual of `vol_i − P_H vol_i ∈ im d`.
    pub exactness_residual: f64,
}

/// Coframe volume forms of the two `S³` factors.
pub fn factor_volume_forms(geom: &FrameGeometry) -> [Form; 2] {
    let theta = |a: usize| Form::from_vec(&Vec6::from_fn(|i, _| geom.frame[(a, i)]));
    let v1 = wedge(&wedge(&theta(0), &theta(1)), &theta(2));
    let v2 = wedge(&wedge(&theta(3), &theta(4)), &theta(5));
    [v1, v2]
}

pub fn harmonic_three_forms(geom: &FrameGeometry, rank_tol: f64) -> HarmonicThreeForms {
    let sl = SectionSpace::new(geom, BundleSpec::Forms, Mode::INVARIANT);
    let d = exterior_d(&sl);
    let de = codifferential(&sl);
    let lap = &d * &de + &de * &d;
    let p3 = complexify(&fiber::degree_selector(3));
    let k = nullspace(&(&lap * &p3), rank_tol);
    // Real basis: the operator is real on invariant forms.
    let basis = realify(&k.basis);
    let full = &p3 * &basis;
    let vols = factor_volume_forms(geom);
    let p2 = complexify(&fiber::degree_selector(2));
    let exact = &d * &p2;
    let mut projected = [Form::zero(); 2];
    let mut ex_res: f64 = 0.0;
    for (t, v) in vols.iter().enumerate() {
        let vc = complex_col(v);
        let ph = &full * (full.adjoint() * &vc);
        projected[t] = Form::from_slice(&ph.column(0).iter().map(|z| z.re).collect::<Vec<_>>());
        let r = &vc - &ph;
        let sol = exact.clone().svd(true, true).solve(&r, 1e-12).expect("least squares");
        ex_res = ex_res.max(max_abs(&(&exact * sol - r)));
    }
    HarmonicThreeForms { basis, kernel: k.summary(), projected_volumes: projected, exactness_residual: ex_res }
}

/// A real orthonormal basis for the span of a kernel of a real matrix.
pub fn realify(b: &CMat) -> CMat {
    if b.ncols() == 0 {
        return b.clone();
    }
    let re = b.map(|z| z.re);
    let im = b.map(|z| z.im);
    let mut cols = Vec::new();
    for j in 0..b.ncols() {
        cols.push(re.column(j).into_owned());
        cols.push(im.column(j).into_owned());
    }
    let q = crate::linalg::gram_schmidt(&cols, 1e-8);
    let q: Vec<_> = q.into_iter().take(b.ncols()).collect();
    CMat::from_fn(b.nrows(), q.len(), |r, c| C64::new(q[c][r], 0.0))
}

/// Form coefficients of a column of a forms-section vector.
pub fn form_of_column(v: &CMat, col: usize) -> Form {
    Form::from_slice(&v.column(col).iter().map(|z| z.re).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::killing;
    use crate::homogeneous::{build_nk_geometry, build_round_geometry};
    use crate::su3_model::model;

    #[test]
    fn mode_parsing() {
        assert_eq!("1/2,0".parse::<Mode>().unwrap(), Mode::new(1, 0));
        assert_eq!("(0.5, 1)".parse::<Mode>().unwrap(), Mode::new(1, 2));
        assert!("1/3,0".parse::<Mode>().is_err());
        assert!("0.3,0".parse::<Mode>().is_err());
        assert_eq!(Mode::new(1, 2).to_string(), "(1/2,1)");
        assert_eq!(Mode::new(1, 1).dim(), 4);
    }

    #[test]
    fn spin_matrices_commutators() {
        for jx2 in 0..4 {
            let [x, y, z] = spin_matrices(jx2);
            let i = C64::new(0.0, 1.0);
            assert!(max_abs(&(&x * &y - &y * &x - &z * i)) < 1e-14);
            let cas = &x * &x + &y * &y + &z * &z;
            let j = jx2 as f64 / 2.0;
            assert!(max_abs(&(cas - identity((jx2 + 1) as usize) * C64::new(j * (j + 1.0), 0.0))) < 1e-13);
        }
    }

    #[test]
    fn killing_spinor_on_invariant_sections() {
        let g = build_nk_geometry(model()).unwrap();
        let s = SectionSpace::new(&g, BundleSpec::Spinor, Mode::INVARIANT);
        let k = killing().kappa_c();
        let kc = CMat::from_column_slice(8, 1, k.as_slice());
        let op = killing_operator(&s, 0.5);
        assert!(max_abs(&(&op * &kc)) < 1e-13);
        let dk = dirac(&s) * &kc;
        assert!(max_abs(&(dk + &kc * C64::new(3.0, 0.0))) < 1e-13);
    }

    #[test]
    fn d_of_constants_and_delta_squared() {
        let g = build_nk_geometry(model()).unwrap();
        let s = SectionSpace::new(&g, BundleSpec::Forms, Mode::new(1, 1));
        let d = exterior_d(&s);
        let de = codifferential(&s);
        assert!(max_abs(&(&de * &de)) < 1e-12);
        let inv = SectionSpace::new(&g, BundleSpec::Forms, Mode::INVARIANT);
        let one = complex_col(&Form::one());
        assert!(max_abs(&(exterior_d(&inv) * &one)) < 1e-14);
        assert!(max_abs(&(laplacian(&inv, false) * &one)) < 1e-13);
        assert_eq!(d.nrows(), 256);
    }

    #[test]
    fn round_has_no_hermitian_data() {
        let g = build_round_geometry();
        let s = SectionSpace::new(&g, BundleSpec::SpinorTangent, Mode::INVARIANT);
        assert_eq!(s.dim(), 48);
        assert!(g.gamma_bar.is_none());
    }
}
