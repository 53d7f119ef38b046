//! `S³×S³ = SU(2)×SU(2)` in a global left-invariant orthonormal frame.
//!
//! All data are constant in the frame: structure constants `c_ijk =
//! g([e_i,e_j], e_k)`, connection coefficients `Γ_ijk = g(∇_{e_i}e_j, e_k)`
//! and curvature `R_ijkl = g(R(e_i,e_j)e_k, e_l)`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clifford::{standard, Clifford};
use crate::exterior::{contract, induced_action, unit, Endo6, Vec6, N};
use crate::opcalc::BundleSpec;
use crate::report::{Assertion, Observation, Provenance, SuiteReport};
use crate::su3_model::{random_vec, Su3Model};

pub type T3 = [[[f64; N]; N]; N];
pub type T4 = [[[[f64; N]; N]; N]; N];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    NearlyKahler,
    RoundProduct,
}

impl MetricKind {
    pub fn label(&self) -> &'static str {
        match self {
            MetricKind::NearlyKahler => "nearly_kahler",
            MetricKind::RoundProduct => "round_product",
        }
    }
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("Ricci tensor is not proportional to the metric (deviation {0:.3e})")]
    NotEinstein(f64),
    #[error("Ricci tensor is not positive (trace {0})")]
    NotPositive(f64),
    #[error("calibration gate `{gate}` failed with residual {residual:.3e}")]
    Gate { gate: &'static str, residual: f64 },
}

#[derive(Clone, Debug)]
pub struct FrameGeometry {
    pub kind: MetricKind,
    pub c: T3,
    pub gamma: T3,
    pub gamma_bar: Option<T3>,
    /// Columns are the frame vectors in the Lie basis `E_1,E_2,E_3,F_1,F_2,F_3`.
    pub frame: Endo6,
    /// Factor by which the uncalibrated frame was divided.
    pub scale: f64,
    pub su3: Option<Su3Model>,
}

fn zero3() -> T3 {
    [[[0.0; N]; N]; N]
}

fn zero4() -> Box<T4> {
    Box::new([[[[0.0; N]; N]; N]; N])
}

fn levi_civita_symbol(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (1, 0, 2) | (2, 1, 0) | (0, 2, 1) => -1.0,
        _ => 0.0,
    }
}

/// `[E_a,E_b] = 2ε_abc E_c` on each factor, no brackets across factors.
pub fn lie_structure_constants() -> T3 {
    let mut c = zero3();
    for a in 0..3 {
        for b in 0..3 {
            for k in 0..3 {
                let e = 2.0 * levi_civita_symbol(a, b, k);
                c[a][b][k] = e;
                c[3 + a][3 + b][3 + k] = e;
            }
        }
    }
    c
}

/// Structure constants in the frame whose vectors are the columns of `f`.
pub fn frame_change(f: &Endo6, c0: &T3) -> T3 {
    let finv = f.try_inverse().expect("frame is invertible");
    let mut c = zero3();
    for i in 0..N {
        for j in 0..N {
            let mut br = [0.0; N];
            for a in 0..N {
                for b in 0..N {
                    let s = f[(a, i)] * f[(b, j)];
                    if s == 0.0 {
                        continue;
                    }
                    for (k, v) in br.iter_mut().enumerate() {
                        *v += s * c0[a][b][k];
                    }
                }
            }
            for k in 0..N {
                c[i][j][k] = (0..N).map(|m| finv[(k, m)] * br[m]).sum();
            }
        }
    }
    c
}

/// Koszul formula for an orthonormal frame with constant metric.
pub fn levi_civita(c: &T3) -> T3 {
    let mut g = zero3();
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                g[i][j][k] = 0.5 * (c[i][j][k] - c[j][k][i] + c[k][i][j]);
            }
        }
    }
    g
}

/// Curvature of the frame-constant connection `Γ`.
pub fn curvature_of(gamma: &T3, c: &T3) -> Box<T4> {
    let mut r = zero4();
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for l in 0..N {
                    let mut v = 0.0;
                    for m in 0..N {
                        v += gamma[j][k][m] * gamma[i][m][l] - gamma[i][k][m] * gamma[j][m][l] - c[i][j][m] * gamma[m][k][l];
                    }
                    r[i][j][k][l] = v;
                }
            }
        }
    }
    r
}

pub fn ricci(r: &T4) -> Endo6 {
    Endo6::from_fn(|j, k| (0..N).map(|i| r[i][j][k][i]).sum())
}

/// `R(e_i,e_j)` as an endomorphism: `e_k ↦ Σ_l R_ijkl e_l`.
pub fn r_endo(r: &T4, i: usize, j: usize) -> Endo6 {
    Endo6::from_fn(|l, k| r[i][j][k][l])
}

/// `R(X,e_j)` for a general vector `X`.
pub fn r_endo_vec(r: &T4, x: &Vec6, j: usize) -> Endo6 {
    (0..N).fold(Endo6::zeros(), |acc, i| acc + r_endo(r, i, j) * x[i])
}

/// Connection endomorphism `B_i`: `∇_{e_i} e_j = B_i e_j`.
pub fn connection_endo(gamma: &T3, i: usize) -> Endo6 {
    Endo6::from_fn(|l, j| gamma[i][j][l])
}

/// The skew endomorphism `e_i ∧ e_j`: `e_i ↦ e_j`, `e_j ↦ −e_i`.
pub fn wedge_basis_endo(i: usize, j: usize) -> Endo6 {
    let mut e = Endo6::zeros();
    if i != j {
        e[(j, i)] = 1.0;
        e[(i, j)] = -1.0;
    }
    e
}

fn uncalibrated_nk_frame() -> Endo6 {
    let s3 = 3f64.sqrt();
    let mut f = Endo6::zeros();
    for a in 0..3 {
        f[(a, 2 * a)] = 1.0;
        f[(3 + a, 2 * a)] = 1.0;
        f[(a, 2 * a + 1)] = -1.0 / s3;
        f[(3 + a, 2 * a + 1)] = 1.0 / s3;
    }
    // rotate the last complex line so that ∇ω is ψ⁺ rather than its J-rotation
    let c4 = f.column(4).into_owned();
    let c5 = f.column(5).into_owned();
    f.set_column(4, &c5);
    f.set_column(5, &(-c4));
    f
}

impl FrameGeometry {
    pub fn connection_endo(&self, i: usize) -> Endo6 {
        connection_endo(&self.gamma, i)
    }

    /// `B̄_i = B_i − ½A_{e_i}`; only for the nearly Kähler geometry.
    pub fn connection_endo_bar(&self, i: usize) -> Endo6 {
        connection_endo(self.gamma_bar.as_ref().expect("Hermitian connection needs an SU(3)-structure"), i)
    }

    pub fn curvature(&self) -> Box<T4> {
        curvature_of(&self.gamma, &self.c)
    }

    pub fn hermitian_curvature(&self) -> Option<Box<T4>> {
        self.gamma_bar.as_ref().map(|gb| curvature_of(gb, &self.c))
    }

    /// `Σ_i Γ_iil`, the coefficients of `∇_{e_i}e_i`.
    pub fn divergence_vector(&self, hermitian: bool) -> Vec6 {
        let g = if hermitian { self.gamma_bar.as_ref().expect("SU(3)-structure") } else { &self.gamma };
        Vec6::from_fn(|l, _| (0..N).map(|i| g[i][i][l]).sum())
    }

    pub fn scal(&self) -> f64 {
        ricci(&self.curvature()).trace()
    }

    pub fn summary(&self) -> GeometrySummary {
        let r = self.curvature();
        let ric = ricci(&r);
        GeometrySummary {
            metric: self.kind.label().to_string(),
            scale: self.scale,
            ricci_diagonal: (0..N).map(|i| ric[(i, i)]).collect(),
            scal: ric.trace(),
            max_connection_coefficient: self.gamma.iter().flatten().flatten().fold(0.0, |a: f64, v| a.max(v.abs())),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometrySummary {
    pub metric: String,
    pub scale: f64,
    pub ricci_diagonal: Vec<f64>,
    pub scal: f64,
    pub max_connection_coefficient: f64,
}

/// Residuals of the calibration gates.
#[derive(Clone, Debug, Serialize)]
pub struct NkGates {
    pub einstein: f64,
    pub nearly_kahler: f64,
    pub nabla_omega: f64,
    pub nabla_bar_j: f64,
    pub a_tensor: f64,
}

const GATE_TOL: f64 = 1e-10;

pub fn nk_gates(geom: &FrameGeometry, model: &Su3Model) -> NkGates {
    let j = model.j;
    let ric = ricci(&geom.curvature());
    let lam = ric.trace() / 6.0;
    let einstein = (ric - Endo6::identity() * lam).amax();
    let b: Vec<Endo6> = (0..N).map(|i| geom.connection_endo(i)).collect();
    // (∇_X J)X = 0 polarized: (∇_{e_i}J)e_j + (∇_{e_j}J)e_i = 0
    let mut nk: f64 = 0.0;
    for i in 0..N {
        for k in 0..N {
            let di = b[i] * j - j * b[i];
            let dk = b[k] * j - j * b[k];
            nk = nk.max((di * unit(k) + dk * unit(i)).amax());
        }
    }
    let mut nab_om: f64 = 0.0;
    let mut a_res: f64 = 0.0;
    for i in 0..N {
        let r = induced_action(&b[i], &model.omega) - contract(&unit(i), &model.psi_plus);
        nab_om = nab_om.max(r.max_abs());
        let a_geo = j * (b[i] * j - j * b[i]);
        a_res = a_res.max((a_geo - model.a_endo(&unit(i))).amax());
    }
    let mut nbj: f64 = 0.0;
    if geom.gamma_bar.is_some() {
        for i in 0..N {
            let bb = geom.connection_endo_bar(i);
            nbj = nbj.max((bb * j - j * bb).amax());
        }
    }
    NkGates { einstein, nearly_kahler: nk, nabla_omega: nab_om, nabla_bar_j: nbj, a_tensor: a_res }
}

/// The homogeneous nearly Kähler metric, scaled to `Ric = 5g`, in a frame
/// where `J, ω, ψ±` are the constants of the model.
pub fn build_nk_geometry(model: &Su3Model) -> Result<FrameGeometry, GeometryError> {
    let f0 = uncalibrated_nk_frame();
    let c0 = frame_change(&f0, &lie_structure_constants());
    let g0 = levi_civita(&c0);
    let ric = ricci(&curvature_of(&g0, &c0));
    let lam = ric.trace() / 6.0;
    let dev = (ric - Endo6::identity() * lam).amax();
    if dev > 1e-9 * lam.abs().max(1.0) {
        return Err(GeometryError::NotEinstein(dev));
    }
    if lam <= 0.0 {
        return Err(GeometryError::NotPositive(ric.trace()));
    }
    let t = (lam / 5.0).sqrt();
    let scale3 = |x: &T3| {
        let mut y = *x;
        y.iter_mut().flatten().flatten().for_each(|v| *v /= t);
        y
    };
    let c = scale3(&c0);
    let gamma = scale3(&g0);
    let mut gamma_bar = gamma;
    for i in 0..N {
        let a = model.a_endo(&unit(i));
        for jj in 0..N {
            for k in 0..N {
                gamma_bar[i][jj][k] -= 0.5 * a[(k, jj)];
            }
        }
    }
    let geom = FrameGeometry {
        kind: MetricKind::NearlyKahler,
        c,
        gamma,
        gamma_bar: Some(gamma_bar),
        frame: f0 / t,
        scale: t,
        su3: Some(model.clone()),
    };
    let g = nk_gates(&geom, model);
    for (gate, residual) in [
        ("einstein", g.einstein),
        ("nearly_kahler", g.nearly_kahler),
        ("nabla_omega", g.nabla_omega),
        ("nabla_bar_j", g.nabla_bar_j),
        ("a_tensor", g.a_tensor),
    ] {
        if residual > GATE_TOL {
            return Err(GeometryError::Gate { gate, residual });
        }
    }
    Ok(geom)
}

/// Product of two unit round 3-spheres, bi-invariant metric.
pub fn build_round_geometry() -> FrameGeometry {
    let c = lie_structure_constants();
    let mut gamma = c;
    gamma.iter_mut().flatten().flatten().for_each(|v| *v *= 0.5);
    FrameGeometry {
        kind: MetricKind::RoundProduct,
        c,
        gamma,
        gamma_bar: None,
        frame: Endo6::identity(),
        scale: 1.0,
        su3: None,
    }
}

pub fn build_geometry(kind: MetricKind) -> Result<FrameGeometry, GeometryError> {
    match kind {
        MetricKind::NearlyKahler => build_nk_geometry(crate::su3_model::model()),
        MetricKind::RoundProduct => Ok(build_round_geometry()),
    }
}

/// Fiber endomorphism `q(R) = ½ Σ (e_i∧e_j)_⋆ R(e_i,e_j)_⋆` on a bundle.
pub fn curvature_endomorphism(geom: &FrameGeometry, bundle: BundleSpec, use_hermitian: bool) -> DMatrix<f64> {
    let r = if use_hermitian { geom.hermitian_curvature().expect("SU(3)-structure") } else { geom.curvature() };
    q_of(&r, bundle)
}

pub fn q_of(r: &T4, bundle: BundleSpec) -> DMatrix<f64> {
    let f = bundle.fiber_dim();
    let mut q = DMatrix::zeros(f, f);
    for i in 0..N {
        for j in 0..N {
            if i == j {
                continue;
            }
            q += bundle.fiber_action(&wedge_basis_endo(i, j)) * bundle.fiber_action(&r_endo(r, i, j)) * 0.5;
        }
    }
    q
}

fn max4(f: impl Fn(usize, usize, usize, usize) -> f64) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for l in 0..N {
                    m = m.max(f(i, j, k, l).abs());
                }
            }
        }
    }
    m
}

/// Residual of the comparison between the Levi-Civita and Hermitian curvatures.
pub fn curvature_comparison_check(geom: &FrameGeometry) -> f64 {
    let model = geom.su3.as_ref().expect("SU(3)-structure");
    let r = geom.curvature();
    let rb = geom.hermitian_curvature().expect("SU(3)-structure");
    let j = model.j;
    let g = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let gj = |a: usize, b: usize| (j * unit(a)).dot(&unit(b));
    // arguments (W,X,Y,Z)
    max4(|w, x, y, z| {
        let rhs = rb[w][x][y][z]
            - 0.25 * (g(y, w) * g(x, z) - g(x, y) * g(z, w) - 3.0 * gj(w, y) * gj(x, z) + 3.0 * gj(x, y) * gj(w, z) + 2.0 * gj(w, x) * gj(y, z));
        r[w][x][y][z] - rhs
    })
}

/// Cyclic sum of `R̄` against `2(g(JX,Y)JZ + g(JY,Z)JX + g(JZ,X)JY)`.
pub fn hermitian_bianchi_check(geom: &FrameGeometry) -> f64 {
    let model = geom.su3.as_ref().expect("SU(3)-structure");
    let rb = geom.hermitian_curvature().expect("SU(3)-structure");
    let j = model.j;
    let mut m: f64 = 0.0;
    for x in 0..N {
        for y in 0..N {
            for z in 0..N {
                let l = r_endo(&rb, x, y) * unit(z) + r_endo(&rb, y, z) * unit(x) + r_endo(&rb, z, x) * unit(y);
                let gj = |a: usize, b: usize| (j * unit(a)).dot(&unit(b));
                let rhs = 2.0 * (gj(x, y) * (j * unit(z)) + gj(y, z) * (j * unit(x)) + gj(z, x) * (j * unit(y)));
                m = m.max((l - rhs).amax());
            }
        }
    }
    m
}

pub fn first_bianchi(r: &T4) -> f64 {
    max4(|i, j, k, l| r[i][j][k][l] + r[j][k][i][l] + r[k][i][j][l])
}

pub fn curvature_symmetries(r: &T4) -> f64 {
    max4(|i, j, k, l| (r[i][j][k][l] + r[j][i][k][l]).abs().max((r[i][j][k][l] + r[i][j][l][k]).abs()).max((r[i][j][k][l] - r[k][l][i][j]).abs()))
}

/// Metric compatibility, torsion-freeness and Jacobi for the frame data.
pub fn frame_consistency(geom: &FrameGeometry) -> [f64; 3] {
    let (c, g) = (&geom.c, &geom.gamma);
    let mut metric: f64 = 0.0;
    let mut torsion: f64 = 0.0;
    let mut jacobi: f64 = 0.0;
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                metric = metric.max((g[i][j][k] + g[i][k][j]).abs());
                torsion = torsion.max((g[i][j][k] - g[j][i][k] - c[i][j][k]).abs());
                for l in 0..N {
                    let v: f64 = (0..N).map(|m| c[i][j][m] * c[m][k][l] + c[j][k][m] * c[m][i][l] + c[k][i][m] * c[m][j][l]).sum();
                    jacobi = jacobi.max(v.abs());
                }
            }
        }
    }
    [metric, torsion, jacobi]
}

/// Orthogonal projectors onto the SU(3)-irreducible pieces of Λ² and Λ³.
pub fn su3_form_projectors(model: &Su3Model) -> Vec<(&'static str, DMatrix<f64>)> {
    use crate::exterior::{wedge, Form};
    use crate::linalg::gram_schmidt;
    let proj = |vs: Vec<Form>| {
        let q = gram_schmidt(&vs.iter().map(|f| f.to_dvector()).collect::<Vec<_>>(), 1e-10);
        let mut p = DMatrix::zeros(64, 64);
        for v in q {
            p += &v * v.transpose();
        }
        p
    };
    vec![
        ("omega", proj(vec![model.omega])),
        ("lambda20", proj((0..N).map(|k| model.contract_psi_plus(&unit(k))).collect())),
        ("lambda11_0", proj(model.lambda11_0_basis().to_vec())),
        ("lambda1_omega", proj((0..N).map(|k| wedge(&Form::from_vec(&unit(k)), &model.omega)).collect())),
        ("psi", proj(vec![model.psi_plus, model.psi_minus])),
        ("lambda21_0", proj(model.sym_minus_basis().iter().map(|s| model.sigma_of_s(s)).collect())),
    ]
}

/// Curvature suite: Ricci normalizations, the curvature comparison,
/// curvature endomorphisms and the spinorial identities built from `R̄`.
pub fn curvature_suite<R: Rng>(geom: &FrameGeometry, rng: &mut R, tol: f64) -> SuiteReport {
    let mut rep = SuiteReport::new("curvature", geom.kind.label());
    let r = geom.curvature();
    let ric = ricci(&r);
    let [metric, torsion, jacobi] = frame_consistency(geom);
    rep.assert(Assertion::residual("frame-metric-compatible", "fiber", metric, tol, Provenance::Structural));
    rep.assert(Assertion::residual("frame-torsion-free", "fiber", torsion, tol, Provenance::Structural));
    rep.assert(Assertion::residual("frame-jacobi", "fiber", jacobi, tol, Provenance::Structural));
    rep.assert(Assertion::residual("bianchi-levi-civita", "fiber", first_bianchi(&r), tol, Provenance::Structural));
    rep.assert(Assertion::residual("curvature-symmetries", "fiber", curvature_symmetries(&r), tol, Provenance::Structural));
    let q_t = q_of(&r, BundleSpec::Tangent);
    match geom.kind {
        MetricKind::NearlyKahler => {
            let model = geom.su3.as_ref().expect("SU(3)-structure");
            let cl = standard();
            let rb = geom.hermitian_curvature().expect("SU(3)-structure");
            let ricb = ricci(&rb);
            rep.assert(Assertion::residual("ric", "fiber", (ric - Endo6::identity() * 5.0).amax(), tol, Provenance::Published));
            rep.assert(Assertion::equals("scal", "fiber", ric.trace(), 30.0, tol, Provenance::Published));
            rep.assert(Assertion::residual("ricbar", "fiber", (ricb - Endo6::identity() * 4.0).amax(), tol, Provenance::Published));
            rep.assert(Assertion::residual("eq2.9", "fiber", curvature_comparison_check(geom), tol, Provenance::Published));
            rep.assert(Assertion::residual("eq2.10", "fiber", hermitian_bianchi_check(geom), tol, Provenance::Published));
            rep.assert(Assertion::residual("ric-trace-consistency", "fiber", (ric - ricb - Endo6::identity()).amax(), tol, Provenance::Derived));
            let torsion_bar = (0..N).map(|i| model.a_endo(&unit(i)).amax()).fold(0.0, f64::max);
            rep.assert(Assertion::at_least("torsion-nonzero", "fiber", torsion_bar, 0.1, 0.0, Provenance::Published));
            let qb_t = q_of(&rb, BundleSpec::Tangent);
            let id6 = DMatrix::<f64>::identity(6, 6);
            rep.assert(Assertion::residual("qR-tangent", "fiber", crate::linalg::max_abs_real(&(&q_t - &id6 * 5.0)), tol, Provenance::Published));
            rep.assert(Assertion::residual("qRbar-tangent", "fiber", crate::linalg::max_abs_real(&(&qb_t - &id6 * 4.0)), tol, Provenance::Published));
            // degree-one block of q on forms
            let q_forms = q_of(&r, BundleSpec::Forms);
            let qb_forms = q_of(&rb, BundleSpec::Forms);
            let mut r1: f64 = 0.0;
            for a in 0..N {
                for b in 0..N {
                    let e = if a == b { 1.0 } else { 0.0 };
                    r1 = r1.max((q_forms[(1 << a, 1 << b)] - 5.0 * e).abs()).max((qb_forms[(1 << a, 1 << b)] - 4.0 * e).abs());
                }
            }
            rep.assert(Assertion::residual("qR-one-forms", "fiber", r1, tol, Provenance::Published));
            let mut comm: f64 = 0.0;
            for (_, p) in su3_form_projectors(model) {
                comm = comm.max(crate::linalg::max_abs_real(&(&qb_forms * &p - &p * &qb_forms)));
            }
            rep.assert(Assertion::residual("qRbar-preserves-su3", "forms", comm, tol, Provenance::Published));
            let ww = cl.gamma_form(&model.omega) * cl.gamma_form(&model.omega);
            let qs = q_of(&rb, BundleSpec::Spinor);
            let id8 = DMatrix::<f64>::identity(8, 8);
            rep.assert(Assertion::residual("qS-Rbar", "fiber", crate::linalg::max_abs_real(&(&qs - (&id8 * 4.5 + &ww * 0.5))), tol, Provenance::Published));
            rep.assert(Assertion::residual("eq3.2", "fiber", spinor_ricci_contraction_residual(&rb, model, cl, rng, 50), tol, Provenance::Published));
            let mut lhs = DMatrix::zeros(8, 8);
            for i in 0..N {
                for jj in 0..N {
                    lhs += cl.gamma_basis(i) * cl.gamma_basis(jj) * cl.spin_lift(&r_endo(&rb, i, jj));
                }
            }
            rep.assert(Assertion::residual("eq3.3", "fiber", crate::linalg::max_abs_real(&(lhs - (&id8 * 18.0 + &ww * 2.0))), tol, Provenance::Published));
            let g = nk_gates(geom, model);
            rep.assert(Assertion::residual("nabla-omega-psi-plus", "fiber", g.nabla_omega, tol, Provenance::Published));
            rep.assert(Assertion::residual("nabla-bar-j", "fiber", g.nabla_bar_j, tol, Provenance::Published));
            rep.assert(Assertion::residual("nearly-kahler-condition", "fiber", g.nearly_kahler, tol, Provenance::Published));
            rep.assert(Assertion::residual("a-tensor-geometric", "fiber", g.a_tensor, tol, Provenance::Derived));
            rep.observe(Observation::new("calibration-scale", "fiber", geom.scale));
        }
        MetricKind::RoundProduct => {
            rep.assert(Assertion::residual("ric", "fiber", (ric - Endo6::identity() * 2.0).amax(), tol, Provenance::Derived));
            let sec = r_endo(&r, 0, 1) * unit(1);
            rep.assert(Assertion::residual("sectional-within-factor", "fiber", (sec - unit(0)).amax(), tol, Provenance::Derived));
            let cross = max4(|i, j, k, l| if (i < 3) != (j < 3) { r[i][j][k][l] } else { 0.0 });
            rep.assert(Assertion::residual("flat-across-factors", "fiber", cross, tol, Provenance::Structural));
            let id6 = DMatrix::<f64>::identity(6, 6);
            rep.assert(Assertion::residual("qR-tangent", "fiber", crate::linalg::max_abs_real(&(&q_t - &id6 * 2.0)), tol, Provenance::Derived));
            rep.observe(Observation::new("lichnerowicz-constant-scal-over-4", "fiber", ric.trace() / 4.0));
        }
    }
    rep
}

/// `Σ_j e_j·R̄_S(X,e_j)ζ = −½R̄ic(X)·ζ − X·ζ + JX·ω·ζ` on random `(X, ζ)`.
pub fn spinor_ricci_contraction_residual<R: Rng>(rb: &T4, model: &Su3Model, cl: &Clifford, rng: &mut R, n: usize) -> f64 {
    let ricb = ricci(rb);
    let w = cl.gamma_form(&model.omega);
    (0..n)
        .map(|_| {
            let x = random_vec(rng);
            let zeta = nalgebra::DVector::from_fn(8, |_, _| rng.random_range(-1.0..1.0));
            let mut lhs = nalgebra::DVector::zeros(8);
            for j in 0..N {
                lhs += cl.gamma_basis(j) * (cl.spin_lift(&r_endo_vec(rb, &x, j)) * &zeta);
            }
            let rhs = cl.gamma(&(ricb * x)) * &zeta * -0.5 - cl.gamma(&x) * &zeta + cl.gamma(&(model.j * x)) * (&w * &zeta);
            (lhs - rhs).amax()
        })
        .fold(0.0, f64::max)
}
