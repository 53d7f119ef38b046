use nalgebra::{DMatrix, Matrix6};
use nkspin::clifford::{assemble_spinor_vector, extract_symbols, killing, s32_membership_conditions, standard, symbols_from_parts};
use nkspin::exterior::{contract, hodge, induced_action, inner, wedge, Endo6, Form, Vec6, ALG_DIM};
use nkspin::linalg::{complexify, max_abs_vec};
use nkspin::opcalc::Mode;
use nkspin::su3_model::model;
use proptest::prelude::*;

fn coeffs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

fn form() -> impl Strategy<Value = Form> {
    coeffs(ALG_DIM).prop_map(|v| Form::from_slice(&v))
}

fn homogeneous(p: usize) -> impl Strategy<Value = Form> {
    form().prop_map(move |f| f.part(p))
}

fn vec6() -> impl Strategy<Value = Vec6> {
    coeffs(6).prop_map(|v| Vec6::from_column_slice(&v))
}

fn endo() -> impl Strategy<Value = Endo6> {
    coeffs(36).prop_map(|v| Matrix6::from_column_slice(&v))
}

fn close(a: &Form, b: &Form, tol: f64) -> bool {
    (*a - *b).max_abs() <= tol * 1.0_f64.max(a.max_abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn contract_is_antiderivation(x in vec6(), p in 0usize..=6, a in form(), b in form()) {
        let a = a.part(p);
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        let lhs = contract(&x, &wedge(&a, &b));
        let rhs = wedge(&contract(&x, &a), &b) + sign * wedge(&a, &contract(&x, &b));
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn hodge_is_isometry(p in 0usize..=6, a in form(), b in form()) {
        let (a, b) = (a.part(p), b.part(p));
        prop_assert!((inner(&hodge(&a), &hodge(&b)) - inner(&a, &b)).abs() < 1e-12);
        let sign = if (p * (6 - p)) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(close(&hodge(&hodge(&a)), &(sign * a), 1e-12));
    }

    #[test]
    fn induced_action_is_derivation(bm in endo(), a in form(), b in form()) {
        let lhs = induced_action(&bm, &wedge(&a, &b));
        let rhs = wedge(&induced_action(&bm, &a), &b) + wedge(&a, &induced_action(&bm, &b));
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn a_endo_skew_and_j_anti(x in vec6()) {
        let m = model();
        let a = m.a_endo(&x);
        prop_assert!((a + a.transpose()).amax() < 1e-13);
        prop_assert!((a * m.j + m.j * a).amax() < 1e-13);
    }

    #[test]
    fn a_z_a_x_closed_matches(z in vec6(), x in vec6(), y in vec6()) {
        let m = model();
        let d = m.a_endo(&z) * (m.a_endo(&x) * y);
        prop_assert!((d - m.a_z_a_x_closed(&z, &x, &y)).amax() < 1e-12);
    }

    #[test]
    fn lambda2_split_reassembles_orthogonally(a in homogeneous(2)) {
        let m = model();
        let s = m.split_lambda2(&a).unwrap();
        let parts = [s.lambda * m.omega, m.contract_psi_plus(&s.y), s.eta0];
        let sum = parts.iter().cloned().fold(Form::zero(), |x, y| x + y);
        prop_assert!(close(&sum, &a, 1e-12));
        for i in 0..3 {
            for j in 0..i {
                prop_assert!(inner(&parts[i], &parts[j]).abs() < 1e-12);
            }
            let again = m.split_lambda2(&parts[i]).unwrap();
            let re = [again.lambda * m.omega, m.contract_psi_plus(&again.y), again.eta0];
            prop_assert!(close(&re[i], &parts[i], 1e-12));
        }
    }

    #[test]
    fn lambda3_split_is_idempotent(a in homogeneous(3)) {
        let m = model();
        let s = m.split_lambda3(&a).unwrap();
        let sigma = m.sigma_of_s(&s.s);
        let again = m.split_lambda3(&sigma).unwrap();
        prop_assert!(again.alpha.amax() < 1e-12 && again.a_plus.abs() < 1e-12 && again.a_minus.abs() < 1e-12);
        prop_assert!((again.s - s.s).amax() < 1e-12);
        let rest = a - sigma;
        prop_assert!(inner(&rest, &sigma).abs() < 1e-12);
    }

    #[test]
    fn clifford_relation_and_vol_parity(x in vec6(), y in vec6()) {
        let cl = standard();
        let (gx, gy) = (cl.gamma(&x), cl.gamma(&y));
        let anti = &gx * &gy + &gy * &gx + DMatrix::identity(8, 8) * (2.0 * x.dot(&y));
        prop_assert!(anti.amax() < 1e-13);
        let vol = cl.vol();
        prop_assert!((vol * &gx + &gx * vol).amax() < 1e-13);
        let even = &gx * &gy;
        prop_assert!((vol * &even - &even * vol).amax() < 1e-13);
    }

    #[test]
    fn membership_iff_pi_kernel(a0 in vec6(), a1 in endo(), a6 in vec6()) {
        let (m, cl, k) = (model(), standard(), killing());
        let v = assemble_spinor_vector(k, &a0, &a1, &a6);
        let in_kernel = max_abs_vec(&cl.pi_map(&v)) < 1e-9;
        let sym = symbols_from_parts(m, a0, a1, a6);
        prop_assert_eq!(s32_membership_conditions(m, k, &sym, 1e-9).all(), in_kernel);
        let p = cl.s32_project(&v);
        let sym = extract_symbols(m, k, &p).unwrap();
        prop_assert!(s32_membership_conditions(m, k, &sym, 1e-9).all());
        prop_assert!(max_abs_vec(&cl.pi_map(&p)) < 1e-12);
    }

    #[test]
    fn mode_text_round_trip(a in 0u32..12, b in 0u32..12) {
        let m = Mode::new(a, b);
        let back: Mode = m.to_string().parse().unwrap();
        prop_assert_eq!(back, m);
        let json = serde_json::to_string(&m).unwrap();
        prop_assert_eq!(serde_json::from_str::<Mode>(&json).unwrap(), m);
        prop_assert_eq!(m.dim() as u32, (a + 1) * (b + 1));
    }
}

#[test]
fn vol_has_unit_norm() {
    assert_eq!(inner(&Form::vol(), &Form::vol()), 1.0);
}

#[test]
fn s32_projector_splits_48() {
    let cl = standard();
    let p = cl.s32_projector();
    let comp = DMatrix::identity(48, 48) - &p;
    assert!((&p * &p - &p).amax() < 1e-13);
    assert!((p.trace() - 40.0).abs() < 1e-12);
    assert!((comp.trace() - 8.0).abs() < 1e-12);
    let pi = complexify(&cl.pi_matrix());
    assert!((pi * complexify(&p)).iter().all(|z| z.norm() < 1e-13));
}
