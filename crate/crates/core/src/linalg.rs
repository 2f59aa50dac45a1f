//! Dense real/complex matrix helpers shared by the numerical modules.

use alloc::vec::Vec;
use libm::{hypot, log2, sqrt};
use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<C64>;
pub type RVec = DVector<f64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn sq(x: f64) -> f64 {
    x * x
}

/// xᵏ by repeated multiplication.
pub fn powu(x: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |a, _| a * x)
}

#[inline]
pub fn cabs(z: C64) -> f64 {
    hypot(z.re, z.im)
}

pub fn to_complex(a: &RMat) -> CMat {
    a.map(|x| c(x, 0.0))
}

pub fn re_part(a: &CMat) -> RMat {
    a.map(|z| z.re)
}

pub fn im_part(a: &CMat) -> RMat {
    a.map(|z| z.im)
}

/// Largest entry modulus.
pub fn max_abs(a: &RMat) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_abs_c(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(cabs(*z)))
}

/// Operator norm (largest singular value).
pub fn op_norm(a: &RMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.max()
}

pub fn op_norm_c(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.max()
}

/// Smallest singular value.
pub fn sigma_min_c(a: &CMat) -> f64 {
    a.clone().svd(false, false).singular_values.min()
}

pub fn sigma_min(a: &RMat) -> f64 {
    a.clone().svd(false, false).singular_values.min()
}

pub fn asymmetry(a: &RMat) -> f64 {
    max_abs(&(a - a.transpose()))
}

pub fn symmetrize(a: &RMat) -> RMat {
    (a + a.transpose()) * 0.5
}

pub fn hermitize(a: &CMat) -> CMat {
    (a + a.adjoint()) * c(0.5, 0.0)
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn sym_eig(a: &RMat) -> (RVec, RMat) {
    let e = SymmetricEigen::new(a.clone());
    let n = a.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let vals = RVec::from_fn(n, |k, _| e.eigenvalues[idx[k]]);
    let vecs = RMat::from_fn(n, n, |r, k| e.eigenvectors[(r, idx[k])]);
    (vals, vecs)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn herm_eig(a: &CMat) -> (RVec, CMat) {
    let e = SymmetricEigen::new(a.clone());
    let n = a.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let vals = RVec::from_fn(n, |k, _| e.eigenvalues[idx[k]]);
    let vecs = CMat::from_fn(n, n, |r, k| e.eigenvectors[(r, idx[k])]);
    (vals, vecs)
}

pub fn sym_eigvals(a: &RMat) -> RVec {
    sym_eig(a).0
}

pub fn herm_eigvals(a: &CMat) -> RVec {
    let mut v: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    RVec::from_vec(v)
}

/// f(A) for real symmetric A through its spectral decomposition.
pub fn sym_fn(a: &RMat, f: impl Fn(f64) -> f64) -> RMat {
    let (w, u) = sym_eig(a);
    let fw = RMat::from_diagonal(&w.map(f));
    &u * fw * u.transpose()
}

/// f(A) for Hermitian A through its spectral decomposition.
pub fn herm_fn(a: &CMat, f: impl Fn(f64) -> C64) -> CMat {
    let (w, u) = herm_eig(a);
    let fw = CMat::from_diagonal(&DVector::from_iterator(w.len(), w.iter().map(|&x| f(x))));
    &u * fw * u.adjoint()
}

pub fn inverse_c(a: &CMat) -> Option<CMat> {
    a.clone().try_inverse()
}

pub fn det_c(a: &CMat) -> C64 {
    a.clone().lu().determinant()
}

/// Drops the imaginary part of `a` if it is at most `rel_tol * (1 + ||Re a||max)`.
pub fn realify(a: &CMat, rel_tol: f64, op: &'static str) -> Result<RMat> {
    let re = re_part(a);
    let im = max_abs(&im_part(a));
    if !im.is_finite() || im > rel_tol * (1.0 + max_abs(&re)) {
        return Err(Error::NumericalBreakdown { op, detail: "imaginary residue after realification", value: im });
    }
    Ok(re)
}

fn norm1_c(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| cabs(*z)).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm_c(a: &CMat) -> CMat {
    let n = a.nrows();
    let nrm = norm1_c(a);
    let s = if nrm > 0.5 { (libm::ceil(log2(nrm / 0.5)) as i32).max(0) } else { 0 };
    let scale = libm::pow(2.0, -(s as f64));
    let x = a * c(scale, 0.0);
    let mut term = CMat::identity(n, n);
    let mut sum = CMat::identity(n, n);
    for k in 1..40 {
        term = &term * &x * c(1.0 / k as f64, 0.0);
        sum += &term;
        if norm1_c(&term) <= 1e-18 * norm1_c(&sum) {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

pub fn expm(a: &RMat) -> RMat {
    re_part(&expm_c(&to_complex(a)))
}

/// Principal square root by the Denman-Beavers iteration.
fn sqrtm_db(a: &CMat) -> Option<CMat> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = CMat::identity(n, n);
    for _ in 0..100 {
        let yi = inverse_c(&y)?;
        let zi = inverse_c(&z)?;
        let y1 = (&y + zi) * c(0.5, 0.0);
        let z1 = (&z + yi) * c(0.5, 0.0);
        let delta = norm1_c(&(&y1 - &y)) / norm1_c(&y1).max(f64::MIN_POSITIVE);
        y = y1;
        z = z1;
        if delta < 1e-15 {
            return Some(y);
        }
    }
    None
}

/// Principal matrix logarithm by inverse scaling and squaring.
/// Requires the spectrum of `a` to avoid the closed negative real axis.
pub fn logm_c(a: &CMat) -> Option<CMat> {
    let n = a.nrows();
    let id = CMat::identity(n, n);
    let mut x = a.clone();
    let mut k = 0;
    while norm1_c(&(&x - &id)) > 0.2 {
        x = sqrtm_db(&x)?;
        k += 1;
        if k > 60 {
            return None;
        }
    }
    // log(X) = 2 atanh(W), W = (X - I)(X + I)^{-1}
    let w = (&x - &id) * inverse_c(&(&x + &id))?;
    let w2 = &w * &w;
    let mut pow = w.clone();
    let mut sum = w.clone();
    for j in 1..60 {
        pow = &pow * &w2;
        let t = &pow * c(1.0 / (2 * j + 1) as f64, 0.0);
        let tn = norm1_c(&t);
        sum += t;
        if tn <= 1e-18 * norm1_c(&sum) {
            break;
        }
    }
    Some(sum * c(2.0 * libm::pow(2.0, k as f64), 0.0))
}

/// Square root of a symmetric positive semidefinite matrix.
pub fn sqrt_psd(a: &RMat) -> RMat {
    sym_fn(a, |x| sqrt(x.max(0.0)))
}
