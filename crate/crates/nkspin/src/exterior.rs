//! Exterior algebra of the oriented Euclidean 6-space.
//!
//! A form is a dense vector of 64 coefficients indexed by bitmask: bit `i`
//! set means `e^i` is a factor, factors in increasing order. Mixed degrees
//! are allowed, so one type covers both homogeneous and graded elements.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, Matrix6, Vector6};

use crate::par;

pub type Vec6 = Vector6<f64>;
pub type Endo6 = Matrix6<f64>;

pub const N: usize = 6;
pub const ALG_DIM: usize = 64;
pub const VOL_MASK: usize = 63;

pub fn degree_of(mask: usize) -> usize {
    mask.count_ones() as usize
}

/// Masks of degree `p` in increasing numeric order.
pub fn masks_of_degree(p: usize) -> Vec<usize> {
    (0..ALG_DIM).filter(|m| degree_of(*m) == p).collect()
}

pub fn unit(i: usize) -> Vec6 {
    let mut v = Vec6::zeros();
    v[i] = 1.0;
    v
}

/// Sign of `e_a ∧ e_b` relative to the sorted basis element, zero on overlap.
pub fn wedge_sign(a: usize, b: usize) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    let mut swaps = 0;
    for i in 0..N {
        if a >> i & 1 == 1 {
            swaps += (b & ((1 << i) - 1)).count_ones();
        }
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Form {
    c: [f64; ALG_DIM],
}

impl Default for Form {
    fn default() -> Self {
        Self::zero()
    }
}

impl Form {
    pub fn zero() -> Self {
        Form { c: [0.0; ALG_DIM] }
    }

    pub fn one() -> Self {
        Self::basis(0)
    }

    pub fn basis(mask: usize) -> Self {
        let mut f = Self::zero();
        f.c[mask] = 1.0;
        f
    }

    /// `e^{i1} ∧ … ∧ e^{ip}` in the given order (zero-based indices).
    pub fn e(idx: &[usize]) -> Self {
        let mut mask = 0usize;
        let mut sign = 1.0;
        for &i in idx {
            sign *= wedge_sign(mask, 1 << i);
            mask |= 1 << i;
        }
        let mut f = Self::zero();
        f.c[mask] = sign;
        f
    }

    pub fn vol() -> Self {
        Self::basis(VOL_MASK)
    }

    /// The 1-form metrically dual to `v`.
    pub fn from_vec(v: &Vec6) -> Self {
        let mut f = Self::zero();
        for i in 0..N {
            f.c[1 << i] = v[i];
        }
        f
    }

    /// Degree-one part read back as a vector.
    pub fn to_vec6(&self) -> Vec6 {
        Vec6::from_fn(|i, _| self.c[1 << i])
    }

    pub fn coef(&self, mask: usize) -> f64 {
        self.c[mask]
    }

    pub fn set(&mut self, mask: usize, v: f64) {
        self.c[mask] = v;
    }

    pub fn coefficients(&self) -> &[f64; ALG_DIM] {
        &self.c
    }

    pub fn from_slice(s: &[f64]) -> Self {
        assert_eq!(s.len(), ALG_DIM, "form needs 64 coefficients");
        let mut f = Self::zero();
        f.c.copy_from_slice(s);
        f
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.c)
    }

    /// Homogeneous part of degree `p`.
    pub fn part(&self, p: usize) -> Self {
        let mut f = Self::zero();
        for m in 0..ALG_DIM {
            if degree_of(m) == p {
                f.c[m] = self.c[m];
            }
        }
        f
    }

    /// The single degree carrying nonzero coefficients, if any.
    pub fn degree(&self) -> Option<usize> {
        let mut d = None;
        for m in 0..ALG_DIM {
            if self.c[m] != 0.0 {
                match d {
                    None => d = Some(degree_of(m)),
                    Some(p) if p != degree_of(m) => return None,
                    _ => {}
                }
            }
        }
        d
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn norm(&self) -> f64 {
        inner(self, self).sqrt()
    }
}

impl Add for Form {
    type Output = Form;
    fn add(mut self, o: Form) -> Form {
        self += o;
        self
    }
}

impl AddAssign for Form {
    fn add_assign(&mut self, o: Form) {
        for (a, b) in self.c.iter_mut().zip(o.c.iter()) {
            *a += b;
        }
    }
}

impl Sub for Form {
    type Output = Form;
    fn sub(self, o: Form) -> Form {
        self + (-o)
    }
}

impl Neg for Form {
    type Output = Form;
    fn neg(mut self) -> Form {
        self.c.iter_mut().for_each(|v| *v = -*v);
        self
    }
}

impl Mul<Form> for f64 {
    type Output = Form;
    fn mul(self, mut f: Form) -> Form {
        f.c.iter_mut().for_each(|v| *v *= self);
        f
    }
}

pub fn wedge(a: &Form, b: &Form) -> Form {
    let mut r = Form::zero();
    for ma in 0..ALG_DIM {
        let x = a.c[ma];
        if x == 0.0 {
            continue;
        }
        for mb in 0..ALG_DIM {
            let y = b.c[mb];
            if y == 0.0 || ma & mb != 0 {
                continue;
            }
            r.c[ma | mb] += wedge_sign(ma, mb) * x * y;
        }
    }
    r
}

/// Interior product `x ⌟ a`.
pub fn contract(x: &Vec6, a: &Form) -> Form {
    let mut r = Form::zero();
    for m in 1..ALG_DIM {
        let v = a.c[m];
        if v == 0.0 {
            continue;
        }
        for k in 0..N {
            if m >> k & 1 == 0 || x[k] == 0.0 {
                continue;
            }
            let below = (m & ((1 << k) - 1)).count_ones();
            let s = if below % 2 == 0 { 1.0 } else { -1.0 };
            r.c[m & !(1 << k)] += s * x[k] * v;
        }
    }
    r
}

/// Hodge star for the orientation `e^1 ∧ … ∧ e^6`.
pub fn hodge(a: &Form) -> Form {
    let mut r = Form::zero();
    for m in 0..ALG_DIM {
        if a.c[m] != 0.0 {
            let cm = VOL_MASK & !m;
            r.c[cm] += wedge_sign(m, cm) * a.c[m];
        }
    }
    r
}

/// Gram inner product; the monomial basis is orthonormal.
pub fn inner(a: &Form, b: &Form) -> f64 {
    a.c.iter().zip(b.c.iter()).map(|(x, y)| x * y).sum()
}

/// `a(v_1, …, v_p)` for a p-form.
pub fn eval(a: &Form, vs: &[Vec6]) -> f64 {
    let mut f = *a;
    for v in vs {
        f = contract(v, &f);
    }
    f.c[0]
}

/// Extension of an endomorphism to forms: `B⋆u = −Bᵀ(e_i) ∧ (e_i ⌟ u)`.
///
/// Endomorphisms act on columns: `B e_j = Σ_l B[l,j] e_l`.
pub fn induced_action(b: &Endo6, a: &Form) -> Form {
    let mut r = Form::zero();
    for i in 0..N {
        let ci = contract(&unit(i), a);
        if ci.is_zero(0.0) {
            continue;
        }
        let bt = b.transpose() * unit(i);
        r = r - wedge(&Form::from_vec(&bt), &ci);
    }
    r
}

fn linear_map_matrix<F>(f: F) -> DMatrix<f64>
where
    F: Fn(&Form) -> Form + Sync + Send,
{
    par::assemble_columns(ALG_DIM, ALG_DIM, |j| f(&Form::basis(j)).c.to_vec())
}

pub fn induced_matrix(b: &Endo6) -> DMatrix<f64> {
    let b = *b;
    linear_map_matrix(move |u| induced_action(&b, u))
}

/// Matrix of `u ↦ a ∧ u`.
pub fn wedge_left_matrix(a: &Form) -> DMatrix<f64> {
    let a = *a;
    linear_map_matrix(move |u| wedge(&a, u))
}

/// Matrix of `u ↦ u ∧ a`.
pub fn wedge_right_matrix(a: &Form) -> DMatrix<f64> {
    let a = *a;
    linear_map_matrix(move |u| wedge(u, &a))
}

pub fn contract_matrix(x: &Vec6) -> DMatrix<f64> {
    let x = *x;
    linear_map_matrix(move |u| contract(&x, u))
}

pub fn hodge_matrix() -> DMatrix<f64> {
    linear_map_matrix(hodge)
}

/// Components `η_ab = η(e_a, e_b)` of the 2-form part.
pub fn two_form_components(a: &Form) -> Matrix6<f64> {
    let mut m = Matrix6::zeros();
    for i in 0..N {
        for j in (i + 1)..N {
            let v = a.c[(1 << i) | (1 << j)];
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

/// 2-form with components given by the skew part of `m`.
pub fn two_form_from_components(m: &Matrix6<f64>) -> Form {
    let mut f = Form::zero();
    for i in 0..N {
        for j in (i + 1)..N {
            f.c[(1 << i) | (1 << j)] = 0.5 * (m[(i, j)] - m[(j, i)]);
        }
    }
    f
}

/// The skew endomorphism `E` with `E e_a = Σ_b η_ab e_b`; this is the
/// convention `(X∧Y)Z = g(X,Z)Y − g(Y,Z)X`.
pub fn skew_endo_of_two_form(a: &Form) -> Endo6 {
    two_form_components(a).transpose()
}

pub fn two_form_of_skew_endo(e: &Endo6) -> Form {
    two_form_from_components(&e.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega() -> Form {
        Form::e(&[0, 1]) + Form::e(&[2, 3]) + Form::e(&[4, 5])
    }

    #[test]
    fn basis_wedge() {
        let w = wedge(&Form::e(&[0]), &Form::e(&[1]));
        assert_eq!(w, Form::basis(0b11));
        let w = wedge(&Form::e(&[1]), &Form::e(&[0]));
        assert_eq!(w.coef(0b11), -1.0);
    }

    #[test]
    fn omega_cubed_is_six_vol() {
        // brute force: ω³ = Σ over ordered triples of distinct blocks, 3! = 6 terms
        let om = omega();
        let w3 = wedge(&wedge(&om, &om), &om);
        let mut brute = Form::zero();
        let blocks = [[0, 1], [2, 3], [4, 5]];
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    if a == b || b == c || a == c {
                        continue;
                    }
                    let idx = [blocks[a][0], blocks[a][1], blocks[b][0], blocks[b][1], blocks[c][0], blocks[c][1]];
                    brute += Form::e(&idx);
                }
            }
        }
        assert_eq!(w3, brute);
        assert_eq!(w3, 6.0 * Form::vol());
    }

    #[test]
    fn contract_basis_cases() {
        assert_eq!(contract(&unit(0), &Form::e(&[0, 1])), Form::e(&[1]));
        assert_eq!(contract(&unit(0), &omega()), Form::e(&[1]));
        assert_eq!(contract(&unit(1), &omega()), -1.0 * Form::e(&[0]));
        assert!(contract(&unit(3), &Form::one()).is_zero(0.0));
    }

    #[test]
    fn hodge_of_one_is_vol() {
        assert_eq!(hodge(&Form::one()), Form::vol());
        assert_eq!(hodge(&Form::vol()), Form::one());
    }

    #[test]
    fn induced_identity_is_minus_degree() {
        let a = Form::e(&[0, 2, 5]) + 2.0 * Form::e(&[1, 4]);
        let r = induced_action(&Endo6::identity(), &a);
        let expect = -3.0 * Form::e(&[0, 2, 5]) + -4.0 * Form::e(&[1, 4]);
        assert!((r - expect).is_zero(1e-15));
    }

    #[test]
    fn skew_endo_round_trip_and_convention() {
        // (e1∧e2) e1 = e2 under (X∧Y)Z = g(X,Z)Y − g(Y,Z)X
        let e = skew_endo_of_two_form(&Form::e(&[0, 1]));
        assert_eq!(e * unit(0), unit(1));
        assert_eq!(e * unit(1), -unit(0));
        assert_eq!(two_form_of_skew_endo(&e), Form::e(&[0, 1]));
    }

    #[test]
    fn eval_matches_components() {
        let a = Form::e(&[0, 1, 2]);
        assert_eq!(eval(&a, &[unit(0), unit(1), unit(2)]), 1.0);
        assert_eq!(eval(&a, &[unit(1), unit(0), unit(2)]), -1.0);
    }
}
