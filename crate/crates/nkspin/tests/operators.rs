use nalgebra::DVector;
use nkspin::exterior::{hodge, inner, wedge, Form};
use nkspin::homogeneous::{build_nk_geometry, build_round_geometry};
use nkspin::opcalc::{fiber, harmonic_three_forms, invariant_operators, Mode};
use nkspin::rarita::{round_metric_positivity_check, solve_rarita};
use nkspin::su3_model::model;

#[test]
fn invariant_harmonic_three_forms_are_primitive_21() {
    let g = build_nk_geometry(model()).unwrap();
    let h = harmonic_three_forms(&g, 1e-8);
    assert_eq!(h.kernel.dim_kernel, 2);
    let m = model();
    for f in &h.projected_volumes {
        assert!(f.max_abs() > 0.1);
        let s = m.split_lambda3(f).unwrap();
        assert!(s.alpha.amax() < 1e-10 && s.a_plus.abs() < 1e-10 && s.a_minus.abs() < 1e-10);
        // primitive: σ ∧ ω = 0
        assert!(wedge(f, &m.omega).max_abs() < 1e-10);
    }
    // the two are independent
    let [a, b] = &h.projected_volumes;
    let c = inner(a, b) / (inner(a, a) * inner(b, b)).sqrt();
    assert!(c.abs() < 1.0 - 1e-6);
}

#[test]
fn psi_plus_is_not_harmonic() {
    let g = build_nk_geometry(model()).unwrap();
    let ops = invariant_operators(&g);
    let m = model();
    let v = DVector::from_column_slice(m.psi_plus.coefficients());
    let lap = &ops.laplacian * &v;
    assert!(lap.amax() > 1.0);
    // dω = 3ψ⁺ and δψ⁺ ∝ ω
    let w = DVector::from_column_slice(m.omega.coefficients());
    assert!((&ops.d * &w - &v * 3.0).amax() < 1e-12);
    let dpsi = Form::from_slice((&ops.delta * &v).as_slice());
    let lam = inner(&dpsi, &m.omega) / 3.0;
    assert!((dpsi - lam * m.omega).max_abs() < 1e-12 && lam.abs() > 0.1);
    assert!((hodge(&m.psi_plus) - m.psi_minus).max_abs() < 1e-14);
}

#[test]
fn divergence_of_constant_sym_plus_sections() {
    let g = build_nk_geometry(model()).unwrap();
    let ops = invariant_operators(&g);
    let m = model();
    let basis = fiber::sym_basis(m.sym_plus0_basis());
    let div = &ops.t2_divergence * &basis;
    // invariant sections need not be divergence free: Γ ≠ 0
    assert!(div.amax() > 1e-3);
}

#[test]
fn kernel_dimensions_by_geometry_and_mode() {
    let nk = build_nk_geometry(model()).unwrap();
    let round = build_round_geometry();
    assert_eq!(solve_rarita(&nk, Mode::INVARIANT, 1e-8).kernel.dim_kernel, 2);
    assert_eq!(solve_rarita(&nk, Mode::new(0, 1), 1e-8).kernel.dim_kernel, 0);
    assert_eq!(solve_rarita(&round, Mode::INVARIANT, 1e-8).kernel.dim_kernel, 0);
    let p = round_metric_positivity_check(&round, Mode::new(1, 0), 1e-8);
    assert!(p.min_eigenvalue > -1e-9);
    assert!(p.min_singular_value_dirac >= 1.0 - 1e-9);
}
