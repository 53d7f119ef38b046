//! Dense linear algebra glue: complex matrices, Kronecker products, SVD null
//! spaces with explicit rank decisions, Hermitian eigensolves.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn complexify(m: &DMatrix<f64>) -> CMat {
    m.map(c)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == c(0.0) {
                continue;
            }
            let mut blk = out.view_mut((i * br, j * bc), (br, bc));
            blk.zip_apply(b, |o, v| *o = s * v);
        }
    }
    out
}

/// `I_d ⊗ m` for a real fiber matrix, the lift of a pointwise map.
pub fn lift_real(d: usize, m: &DMatrix<f64>) -> CMat {
    let (r, k) = m.shape();
    let mut out = CMat::zeros(d * r, d * k);
    for blk in 0..d {
        out.view_mut((blk * r, blk * k), (r, k))
            .zip_apply(m, |o, v| *o = c(v));
    }
    out
}

pub fn vstack(blocks: &[&CMat]) -> CMat {
    let cols = blocks[0].ncols();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(*b);
        r += b.nrows();
    }
    out
}

pub fn hstack(blocks: &[&CMat]) -> CMat {
    let rows = blocks[0].nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut k = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, k), (rows, b.ncols())).copy_from(*b);
        k += b.ncols();
    }
    out
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

pub fn max_abs_vec(v: &CVec) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_real(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Max entry of `a - b` divided by `max(1, max|a|, max|b|)`.
pub fn rel_residual(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "residual shape mismatch");
    let scale = 1.0_f64.max(max_abs(a)).max(max_abs(b));
    max_abs(&(a - b)) / scale
}

/// Largest singular value of a product of orthonormal projectors, etc.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Null space with the rank decision recorded.
#[derive(Clone, Debug)]
pub struct Kernel {
    /// Orthonormal columns spanning the numerical kernel.
    pub basis: CMat,
    /// All singular values, descending (padded with zeros for wide inputs).
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// σ_rank / σ_{rank+1}; infinite when the kernel is empty or exactly zero.
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RankSummary {
    pub dim_kernel: usize,
    pub rank: usize,
    pub sigma_max: f64,
    pub smallest_nonzero: f64,
    pub largest_zero: f64,
    pub spectral_gap: f64,
}

impl Kernel {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn summary(&self) -> RankSummary {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        let nz = if self.rank > 0 { self.singular_values[self.rank - 1] } else { 0.0 };
        let z = self.singular_values.get(self.rank).copied().unwrap_or(0.0);
        RankSummary {
            dim_kernel: self.dim(),
            rank: self.rank,
            sigma_max: smax,
            smallest_nonzero: nz,
            largest_zero: z,
            spectral_gap: finite_gap(self.gap),
        }
    }
}

/// Gaps are serialized as finite numbers; an exact zero singular value is
/// reported against the double-precision floor.
pub fn finite_gap(g: f64) -> f64 {
    if g.is_finite() {
        g
    } else {
        1e300
    }
}

/// Kernel of `m`: singular values below `rel_tol · σ_max` count as zero.
pub fn nullspace(m: &CMat, rel_tol: f64) -> Kernel {
    nullspace_scaled(m, rel_tol, 0.0)
}

/// Like [`nullspace`], with the cutoff relative to `max(σ_max, scale)`. Needed
/// when `m` is a difference whose entries may all cancel.
pub fn nullspace_scaled(m: &CMat, rel_tol: f64, scale: f64) -> Kernel {
    let (r, n) = m.shape();
    if n == 0 {
        return Kernel { basis: CMat::zeros(0, 0), singular_values: vec![], rank: 0, gap: f64::INFINITY };
    }
    // Pad wide inputs so that V is square.
    let work = if r < n {
        let mut p = CMat::zeros(n, n);
        p.view_mut((0, 0), (r, n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|a, b| sv[*b].partial_cmp(&sv[*a]).unwrap().then(a.cmp(b)));
    let sorted: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
    let smax = sorted.first().copied().unwrap_or(0.0);
    let thresh = rel_tol * smax.max(scale).max(f64::MIN_POSITIVE);
    let rank = sorted.iter().filter(|&&s| s > thresh).count();
    let mut basis = CMat::zeros(n, n - rank);
    for (k, &idx) in order[rank..].iter().enumerate() {
        let row = vt.row(idx);
        for j in 0..n {
            basis[(j, k)] = row[j].conj();
        }
    }
    let gap = if rank == 0 || rank == n {
        f64::INFINITY
    } else {
        let z = sorted[rank];
        if z == 0.0 {
            f64::INFINITY
        } else {
            sorted[rank - 1] / z
        }
    };
    Kernel { basis: canonical_phase(basis), singular_values: sorted, rank, gap }
}

/// Fix the phase of each column so that its largest entry is real positive.
/// Keeps kernel bases reproducible across runs.
pub fn canonical_phase(mut b: CMat) -> CMat {
    for mut col in b.column_iter_mut() {
        let mut best = c(0.0);
        let mut bn = 0.0;
        for v in col.iter() {
            if v.norm() > bn + 1e-12 {
                bn = v.norm();
                best = *v;
            }
        }
        if bn > 0.0 {
            let ph = best.conj() / bn;
            col.iter_mut().for_each(|v| *v *= ph);
        }
    }
    b
}

/// Orthonormal basis of the column span, dropping directions below `rel_tol`.
pub fn orth(m: &CMat, rel_tol: f64) -> CMat {
    if m.ncols() == 0 {
        return m.clone();
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let sv = svd.singular_values;
    let smax = sv.max();
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > rel_tol * smax.max(f64::MIN_POSITIVE)).collect();
    let mut out = CMat::zeros(m.nrows(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &u.column(i));
    }
    canonical_phase(out)
}

/// Sine of the largest principal angle between two column spans.
pub fn subspace_sine(a: &CMat, b: &CMat) -> f64 {
    let qa = orth(a, 1e-12);
    let qb = orth(b, 1e-12);
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    let resid = &qa - &qb * (qb.adjoint() * &qa);
    spectral_norm(&resid)
}

/// Hermitian eigendecomposition, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let herm = (m + m.adjoint()) * c(0.5);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].partial_cmp(&eig.eigenvalues[*b]).unwrap().then(a.cmp(b)));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(m.nrows(), order.len());
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, canonical_phase(vecs))
}

/// Least-squares coefficient `t` minimizing ‖a − t b‖ (Frobenius) and the
/// relative residual of the fit.
pub fn fit_scalar(a: &CMat, b: &CMat) -> (C64, f64) {
    let bb: f64 = b.iter().map(|v| v.norm_sqr()).sum();
    if bb == 0.0 {
        return (c(0.0), max_abs(a));
    }
    let ab: C64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let t = ab / bb;
    let r = rel_residual(a, &(b * t));
    (t, r)
}

pub fn to_cvec(v: &[f64]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|x| c(*x)))
}

/// Gram-Schmidt on real vectors, dropping near-dependent inputs.
pub fn gram_schmidt(vs: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let p = q.dot(&w);
                w.axpy(-p, q, 1.0);
            }
        }
        let n = w.norm();
        if n > tol {
            out.push(w / n);
        }
    }
    out
}
