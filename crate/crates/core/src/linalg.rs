//! Dense complex helpers shared by the algebra and module layers.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5)
}

/// Eigen-decomposition of the Hermitian part of `m`, ascending eigenvalues
/// with matching eigenvector columns.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let se = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let vals = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &se.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Smallest eigenvalue of the Hermitian part together with a unit eigenvector.
pub fn min_eig(m: &CMat) -> Option<(f64, CVec)> {
    let (vals, vecs) = eigh(m);
    vals.first().map(|&v| (v, vecs.column(0).into_owned()))
}

pub fn max_eig(m: &CMat) -> Option<f64> {
    eigh(m).0.last().copied()
}

/// Eigenvalues of a general square matrix via complex Schur form.
pub fn eigenvalues(m: &CMat) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let t = Schur::new(m.clone()).unpack().1;
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Moore–Penrose inverse with singular values `<= rtol * sigma_max` dropped.
pub fn pinv(m: &CMat, rtol: f64) -> CMat {
    let (r, cdim) = m.shape();
    if r == 0 || cdim == 0 {
        return CMat::zeros(cdim, r);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = rtol * smax;
    let mut out = CMat::zeros(cdim, r);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cut && s > 0.0 {
            let vk = vt.row(k).adjoint();
            let uk = u.column(k).adjoint();
            out += (vk * uk) * c(1.0 / s);
        }
    }
    out
}

/// Orthonormal basis of the column space (singular values above `rtol * sigma_max`).
pub fn range_basis(m: &CMat, rtol: f64) -> CMat {
    let (r, cdim) = m.shape();
    if r == 0 || cdim == 0 {
        return CMat::zeros(r, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("svd u");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > rtol * smax && svd.singular_values[k] > 0.0)
        .collect();
    let mut b = CMat::zeros(r, keep.len());
    for (dst, &k) in keep.iter().enumerate() {
        b.set_column(dst, &u.column(k));
    }
    b
}

/// `f(H)` for Hermitian `H` through its eigendecomposition.
pub fn hermitian_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let n = vals.len();
    let mut d = CMat::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        d[(i, i)] = c(f(v));
    }
    &vecs * d * vecs.adjoint()
}

/// Unitary factor `U V^*` of the SVD `m = U Σ V^*`.
pub fn polar_unitary(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    svd.u.expect("svd u") * svd.v_t.expect("svd v_t")
}

pub fn psd_sqrt(m: &CMat) -> CMat {
    hermitian_fn(m, |v| v.max(0.0).sqrt())
}

/// Relative PSD test: Hermitian defect and most negative eigenvalue both
/// within `tol * max(1, ||m||)`. Returns the verdict, the smallest eigenvalue
/// and the scale used.
pub fn psd_check(m: &CMat, tol: f64) -> (bool, f64, f64) {
    if m.nrows() == 0 {
        return (true, 0.0, 1.0);
    }
    let scale = spectral_norm(m).max(1.0);
    let herm = spectral_norm(&(m - m.adjoint()));
    let lo = min_eig(m).map(|(v, _)| v).unwrap_or(0.0);
    (herm <= tol * scale && lo >= -tol * scale, lo, scale)
}
