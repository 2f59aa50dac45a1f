//! Symplectic form, Williamson normal form and the associated singular-value bounds.

use alloc::vec::Vec;
use libm::{exp, sqrt};
use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, c, sq, herm_eig, max_abs, op_norm, sym_eig, CMat, RMat, I};

/// Quadrature layout: mode `i` owns rows `2i` (X) and `2i+1` (P).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadIndexing {
    pub m: usize,
}

impl QuadIndexing {
    pub fn new(m: usize) -> Self {
        Self { m }
    }

    pub fn dim(&self) -> usize {
        2 * self.m
    }

    #[inline]
    pub fn x(i: usize) -> usize {
        2 * i
    }

    #[inline]
    pub fn p(i: usize) -> usize {
        2 * i + 1
    }

    /// Row indices owned by the given modes, in order.
    pub fn rows_of(modes: &[usize]) -> Vec<usize> {
        modes.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect()
    }

    /// Mode count of a square matrix of side `n`, if `n` is even.
    pub fn modes_of(n: usize) -> Option<usize> {
        (n.is_multiple_of(2) && n > 0).then_some(n / 2)
    }
}

/// Numerical tolerances shared by all modules.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct Tolerances {
    pub sym_tol: f64,
    pub pd_tol: f64,
    /// Relative reconstruction tolerance, scaled by the input norm.
    pub recon_tol: f64,
    pub symplectic_tol: f64,
    pub purity_tol: f64,
    pub realify_tol: f64,
    pub det_tol: f64,
    pub log_tol: f64,
    pub eig_cond_max: f64,
    pub zero_tol: f64,
    pub proj_tol: f64,
    pub proj_max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sym_tol: 1e-10,
            pd_tol: 1e-12,
            recon_tol: 1e-8,
            symplectic_tol: 1e-10,
            purity_tol: 1e-6,
            realify_tol: 1e-8,
            det_tol: 1e-300,
            log_tol: 1e-12,
            eig_cond_max: 1e12,
            zero_tol: 1e-12,
            proj_tol: 1e-9,
            proj_max_iter: 10_000,
        }
    }
}

/// Ω = ⊕ [[0,1],[-1,0]].
pub fn omega(m: usize) -> RMat {
    let mut w = RMat::zeros(2 * m, 2 * m);
    for i in 0..m {
        w[(2 * i, 2 * i + 1)] = 1.0;
        w[(2 * i + 1, 2 * i)] = -1.0;
    }
    w
}

/// iΩ, which is Hermitian and squares to the identity.
pub fn i_omega(m: usize) -> CMat {
    omega(m).map(|x| c(0.0, x))
}

/// H = S⁻ᵀ D S⁻¹ with S symplectic and D = ⊕ dᵢ I₂.
#[derive(Debug, Clone, PartialEq)]
pub struct WilliamsonForm {
    pub s: RMat,
    pub d: Vec<f64>,
    pub d_min: f64,
    pub d_max: f64,
}

impl WilliamsonForm {
    /// Builds a form from a symplectic matrix and symplectic eigenvalues (sorted here).
    pub fn from_parts(s: RMat, mut d: Vec<f64>) -> Self {
        let m = d.len();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        let s = permute_modes(&s, &order);
        d = order.iter().map(|&k| d[k]).collect();
        let d_min = d.first().copied().unwrap_or(0.0);
        let d_max = d.last().copied().unwrap_or(0.0);
        Self { s, d, d_min, d_max }
    }

    pub fn m(&self) -> usize {
        self.d.len()
    }

    /// ‖S‖ (largest singular value).
    pub fn s_norm(&self) -> f64 {
        op_norm(&self.s)
    }

    /// S⁻¹ = -Ω Sᵀ Ω.
    pub fn s_inv(&self) -> RMat {
        let w = omega(self.m());
        -(&w * self.s.transpose() * &w)
    }

    /// D = ⊕ dᵢ I₂.
    pub fn diag(&self) -> RMat {
        diag_pairs(&self.d, |x| x)
    }

    /// S⁻ᵀ D S⁻¹.
    pub fn reconstruct(&self) -> RMat {
        let si = self.s_inv();
        si.transpose() * self.diag() * si
    }
}

/// ⊕ f(dᵢ) I₂.
pub fn diag_pairs(d: &[f64], f: impl Fn(f64) -> f64) -> RMat {
    RMat::from_diagonal(&DVector::from_iterator(2 * d.len(), d.iter().flat_map(|&x| [f(x), f(x)])))
}

fn permute_modes(s: &RMat, order: &[usize]) -> RMat {
    RMat::from_fn(s.nrows(), s.ncols(), |r, col| s[(r, 2 * order[col / 2] + col % 2)])
}

fn check_square_even(a: &RMat, op: &'static str) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { op, expected: a.nrows(), got: a.ncols() });
    }
    QuadIndexing::modes_of(a.nrows()).ok_or(Error::DimensionMismatch { op, expected: a.nrows() + 1, got: a.nrows() })
}

pub(crate) fn check_symmetric(a: &RMat, tol: &Tolerances, op: &'static str) -> Result<()> {
    let asym = linalg::asymmetry(a);
    if !(asym <= tol.sym_tol * (1.0 + max_abs(a))) {
        return Err(Error::NotSymmetric { op, asym });
    }
    Ok(())
}

/// Returns `Some(d)` when `h` is exactly ⊕ dᵢ I₂.
fn scalar_blocks(h: &RMat, m: usize) -> Option<Vec<f64>> {
    for r in 0..2 * m {
        for col in 0..2 * m {
            if r != col && h[(r, col)] != 0.0 {
                return None;
            }
        }
    }
    let d: Vec<f64> = (0..m).map(|i| h[(2 * i, 2 * i)]).collect();
    (0..m).all(|i| h[(2 * i + 1, 2 * i + 1)] == d[i]).then_some(d)
}

/// Williamson normal form of a symmetric positive-definite matrix.
///
/// With A = H^{-1/2} Ω H^{-1/2}, the eigenvectors x + iy of the Hermitian iA for
/// eigenvalue 1/dⱼ > 0 give the real orthonormal pairs (√2 y, √2 x); then
/// S = H^{-1/2} O D^{1/2} satisfies Sᵀ H S = D and Sᵀ Ω S = Ω.
pub fn williamson(h: &RMat, tol: &Tolerances) -> Result<WilliamsonForm> {
    const OP: &str = "symplectic_core::williamson";
    let m = check_square_even(h, OP)?;
    check_symmetric(h, tol, OP)?;
    let h = linalg::symmetrize(h);
    let (lam, q) = sym_eig(&h);
    if !(lam[0] > tol.pd_tol) {
        return Err(Error::NotPositiveDefinite { op: OP, min_eig: lam[0] });
    }
    if let Some(d) = scalar_blocks(&h, m) {
        return Ok(WilliamsonForm::from_parts(RMat::identity(2 * m, 2 * m), d));
    }
    let n = 2 * m;
    let h_isqrt = &q * RMat::from_diagonal(&lam.map(|x| 1.0 / sqrt(x))) * q.transpose();
    let a = &h_isqrt * omega(m) * &h_isqrt;
    let ia = linalg::to_complex(&a) * I;
    let (mu, v) = herm_eig(&linalg::hermitize(&ia));
    // The m largest eigenvalues are +1/dⱼ, ascending dⱼ means descending μ.
    let mut o = RMat::zeros(n, n);
    let mut d = Vec::with_capacity(m);
    for j in 0..m {
        let k = n - 1 - j;
        if !(mu[k] > 0.0) {
            return Err(Error::NumericalBreakdown { op: OP, detail: "non-positive symplectic spectrum", value: mu[k] });
        }
        d.push(1.0 / mu[k]);
        for r in 0..n {
            o[(r, 2 * j)] = core::f64::consts::SQRT_2 * v[(r, k)].im;
            o[(r, 2 * j + 1)] = core::f64::consts::SQRT_2 * v[(r, k)].re;
        }
    }
    let s = h_isqrt * o * diag_pairs(&d, sqrt);
    let form = WilliamsonForm::from_parts(s, d);
    verify_form(&form, &h, tol, OP)?;
    Ok(form)
}

fn verify_form(form: &WilliamsonForm, h: &RMat, tol: &Tolerances, op: &'static str) -> Result<()> {
    let m = form.m();
    let w = omega(m);
    let sym_err = max_abs(&(&form.s * &w * form.s.transpose() - &w));
    let scale = 1.0 + sq(form.s_norm());
    if !(sym_err <= tol.symplectic_tol * scale) {
        return Err(Error::NumericalBreakdown { op, detail: "symplectic condition", value: sym_err });
    }
    let s_inv = form.s.clone().try_inverse().ok_or(Error::NumericalBreakdown { op, detail: "singular S", value: 0.0 })?;
    let rec = s_inv.transpose() * form.diag() * s_inv;
    let rec_err = op_norm(&(rec - h));
    if !(rec_err <= tol.recon_tol * op_norm(h)) {
        return Err(Error::NumericalBreakdown { op, detail: "reconstruction", value: rec_err });
    }
    Ok(())
}

/// Symplectic eigenvalues, ascending.
pub fn symplectic_eigenvalues(a: &RMat, tol: &Tolerances) -> Result<Vec<f64>> {
    Ok(williamson(a, tol)?.d)
}

/// Right-hand sides of the three singular-value bounds on 2iΩV + ((t-1)/(t+1))I.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SingularValueBounds {
    /// Upper bound on ‖2iΩV + ((t-1)/(t+1))I‖.
    pub norm_bound: f64,
    /// Lower bound on σ_min(2iΩV + ((t-1)/(t+1))I).
    pub minsing_bound_1: f64,
    /// Lower bound on σ_min((t/(t+1))(2iΩV+I)(2iΩV-I)⁻¹ + 1/(t+1)).
    pub minsing_bound_2: f64,
}

pub fn singular_value_bounds(form: &WilliamsonForm, _t: f64) -> SingularValueBounds {
    let s2 = sq(form.s_norm());
    singular_value_bounds_from(s2, form.d_min, form.d_max)
}

pub(crate) fn singular_value_bounds_from(s2: f64, d_min: f64, d_max: f64) -> SingularValueBounds {
    let emax = exp(-2.0 * d_max);
    SingularValueBounds {
        norm_bound: s2 * 2.0 / (1.0 - exp(-2.0 * d_min)),
        minsing_bound_1: 2.0 / s2 * emax / (1.0 - emax),
        minsing_bound_2: emax / s2,
    }
}

/// Random symplectic matrix exp(ΩK) with K symmetric, rescaled so that ‖S‖ ≤ `max_norm`.
pub fn random_symplectic<R: Rng + ?Sized>(m: usize, max_norm: f64, rng: &mut R) -> RMat {
    let n = 2 * m;
    let mut k = RMat::zeros(n, n);
    for r in 0..n {
        for col in r..n {
            let x = rng.random_range(-1.0..1.0);
            k[(r, col)] = x;
            k[(col, r)] = x;
        }
    }
    let w = omega(m);
    let gen = &w * &k;
    // ‖exp(θΩK)‖ ≤ exp(θ‖ΩK‖); pick θ so the bound stays below max_norm.
    let g = op_norm(&gen).max(1e-300);
    let theta = libm::log(max_norm.max(1.0)) / g * rng.random::<f64>();
    linalg::expm(&(gen * theta))
}

/// Williamson form with random S (‖S‖ ≤ `max_norm`) and d uniform on [`d_lo`, `d_hi`].
pub fn random_form<R: Rng + ?Sized>(m: usize, max_norm: f64, d_lo: f64, d_hi: f64, rng: &mut R) -> WilliamsonForm {
    let s = random_symplectic(m, max_norm, rng);
    let d = (0..m).map(|_| d_lo + (d_hi - d_lo) * rng.random::<f64>()).collect();
    WilliamsonForm::from_parts(s, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn known(m: usize, seed: u64) -> (RMat, RMat, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s0 = random_symplectic(m, 3.0, &mut rng);
        let d0: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..2.0)).collect();
        let si = s0.clone().try_inverse().unwrap();
        let h = si.transpose() * diag_pairs(&d0, |x| x) * si;
        (linalg::symmetrize(&h), s0, d0)
    }

    #[test]
    fn omega_squares_to_minus_identity() {
        for m in 1..5 {
            let w = omega(m);
            assert_eq!(&w * &w, -RMat::identity(2 * m, 2 * m));
            assert_eq!(w.transpose(), -&w);
        }
        assert_eq!(omega(1), RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
    }

    #[test]
    fn scalar_block_gauge() {
        let h = RMat::identity(2, 2) * 0.7;
        let f = williamson(&h, &Tolerances::default()).unwrap();
        assert_eq!(f.s, RMat::identity(2, 2));
        assert_eq!(f.d, [0.7]);
        let f = symplectic_eigenvalues(&RMat::identity(4, 4), &Tolerances::default()).unwrap();
        assert_eq!(f, [1.0, 1.0]);
    }

    #[test]
    fn recovers_constructed_eigenvalues() {
        let tol = Tolerances::default();
        for seed in 0..40 {
            let m = 1 + (seed as usize % 6);
            let (h, _, mut d0) = known(m, seed);
            d0.sort_by(f64::total_cmp);
            let f = williamson(&h, &tol).unwrap();
            for (a, b) in f.d.iter().zip(&d0) {
                assert!((a - b).abs() <= 1e-9 * (1.0 + b), "{a} vs {b}");
            }
            let w = omega(m);
            assert!(max_abs(&(&f.s * &w * f.s.transpose() - &w)) <= 1e-10);
            assert!(max_abs(&(f.reconstruct() - &h)) <= 1e-9);
        }
    }

    #[test]
    fn matches_spectrum_of_i_omega_h() {
        // Independent oracle: real Schur eigenvalues of ΩH are ±i dⱼ.
        let tol = Tolerances::default();
        for seed in 100..120 {
            let m = 1 + (seed as usize % 5);
            let (h, _, _) = known(m, seed);
            let d = symplectic_eigenvalues(&h, &tol).unwrap();
            let mut ev: Vec<f64> = (omega(m) * &h).complex_eigenvalues().iter().map(|z| z.im.abs()).collect();
            ev.sort_by(f64::total_cmp);
            for j in 0..m {
                assert!((ev[2 * j] - d[j]).abs() < 1e-10 && (ev[2 * j + 1] - d[j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_spectrum_is_handled() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s0 = random_symplectic(3, 2.0, &mut rng);
        let si = s0.clone().try_inverse().unwrap();
        let h = linalg::symmetrize(&(si.transpose() * si * 0.9));
        let f = williamson(&h, &Tolerances::default()).unwrap();
        for d in &f.d {
            assert!((d - 0.9).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let h = RMat::from_diagonal(&DVector::from_vec(alloc::vec![1.0, -1.0]));
        assert!(matches!(williamson(&h, &Tolerances::default()), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn singular_value_bounds_identity_fixture() {
        let f = WilliamsonForm::from_parts(RMat::identity(2, 2), alloc::vec![0.4]);
        let b = singular_value_bounds(&f, 1.0);
        assert!((b.norm_bound - 2.0 / (1.0 - exp(-0.8))).abs() < 1e-15);
        assert!((b.minsing_bound_1 - 2.0 * exp(-0.8) / (1.0 - exp(-0.8))).abs() < 1e-15);
    }
}
