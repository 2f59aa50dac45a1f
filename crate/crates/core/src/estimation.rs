//! Empirical moments, sample-size formulas and the two feasibility projections.

use libm::{ceil, log, sqrt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::InteractionGraph;
use crate::linalg::{self, c, max_abs, powu, sq, CMat, RMat, RVec};
use crate::sampling::SampleBatch;
use crate::symplectic::{i_omega, Tolerances};

/// Moment estimates from one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub t_hat: RVec,
    /// Covariance estimate before projection; need not be bona fide.
    pub v_hat_raw: RMat,
    pub v_tilde: Option<RMat>,
    pub eps_used: Option<f64>,
    pub n_used: usize,
}

/// Row mean t̂ and V̂ = (1/N) Σ (Z - t̂)(Z - t̂)ᵀ - I/2.
pub fn empirical_estimates(batch: &SampleBatch) -> Result<EstimationResult> {
    const OP: &str = "estimation::empirical_estimates";
    let n = batch.n();
    if n == 0 {
        return Err(Error::EmptyBatch { op: OP });
    }
    let dim = batch.data.ncols();
    let inv_n = 1.0 / n as f64;
    let t_hat = RVec::from_iterator(dim, (0..dim).map(|j| batch.data.column(j).sum() * inv_n));
    let mut centered = batch.data.clone();
    for j in 0..dim {
        centered.column_mut(j).add_scalar_mut(-t_hat[j]);
    }
    let mut v = centered.tr_mul(&centered) * inv_n;
    v = linalg::symmetrize(&v);
    for k in 0..dim {
        v[(k, k)] -= 0.5;
    }
    Ok(EstimationResult { t_hat, v_hat_raw: v, v_tilde: None, eps_used: None, n_used: n })
}

fn check_eps_delta(eps: f64, delta: f64, op: &'static str) -> Result<()> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidRange { op, detail: "eps must lie in (0, 1/2)" });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidRange { op, detail: "delta must lie in (0, 1)" });
    }
    Ok(())
}

/// C = 2(√(2v+1) + t)².
pub fn moment_constant(v_diag_bound: f64, t_max: f64) -> f64 {
    2.0 * sq(sqrt(2.0 * v_diag_bound + 1.0) + t_max)
}

/// 2⁸ C² (1+t)² ln((4m+1)/δ) / ε², before rounding up.
pub fn sample_size_real(v_diag_bound: f64, t_max: f64, eps: f64, delta: f64, m: usize) -> Result<f64> {
    const OP: &str = "estimation::sample_size";
    check_eps_delta(eps, delta, OP)?;
    if !(v_diag_bound >= 0.0 && t_max >= 0.0) || m == 0 {
        return Err(Error::InvalidRange { op: OP, detail: "require v_diag_bound >= 0, t_max >= 0, m >= 1" });
    }
    let cc = moment_constant(v_diag_bound, t_max);
    Ok(256.0 * sq(cc) * sq(1.0 + t_max) / sq(eps) * log((4 * m + 1) as f64 / delta))
}

/// Samples sufficient for entrywise precision `eps` on t̂ and V̂ with probability 1 - δ.
pub fn sample_size(v_diag_bound: f64, t_max: f64, eps: f64, delta: f64, m: usize) -> Result<u64> {
    Ok(ceil(sample_size_real(v_diag_bound, t_max, eps, delta, m)?) as u64)
}

/// Entrywise precision guaranteed by `n` samples; inverse of [`sample_size_real`].
pub fn entrywise_precision(n: usize, v_diag_bound: f64, t_max: f64, delta: f64, m: usize) -> Result<f64> {
    const OP: &str = "estimation::entrywise_precision";
    if n == 0 {
        return Err(Error::EmptyBatch { op: OP });
    }
    if !(delta > 0.0 && delta < 1.0) || m == 0 {
        return Err(Error::InvalidRange { op: OP, detail: "delta must lie in (0, 1) and m >= 1" });
    }
    let cc = moment_constant(v_diag_bound, t_max);
    Ok(sqrt(256.0 * sq(cc) * sq(1.0 + t_max) * log((4 * m + 1) as f64 / delta) / n as f64))
}

/// 2¹⁴ (s²/(1-e^{-2β_min}) + t²)² (1+t)² ln((4m+1)/δ) / ζ², before rounding up.
pub fn sample_size_theorem_real(s: f64, beta_min: f64, t_max: f64, zeta: f64, delta: f64, m: usize) -> Result<f64> {
    const OP: &str = "estimation::sample_size_theorem";
    if !(zeta > 0.0) || !(delta > 0.0 && delta < 1.0) || !(beta_min > 0.0) || !(s > 0.0) || !(t_max >= 0.0) || m == 0 {
        return Err(Error::InvalidRange { op: OP, detail: "require zeta > 0, delta in (0, 1), beta_min > 0, s > 0, t_max >= 0, m >= 1" });
    }
    let a = sq(s) / (1.0 - libm::exp(-2.0 * beta_min)) + sq(t_max);
    Ok(powu(2.0, 14) * sq(a) * sq(1.0 + t_max) / sq(zeta) * log((4 * m + 1) as f64 / delta))
}

/// Rounded-up [`sample_size_theorem_real`]; saturates at `u64::MAX`.
pub fn sample_size_theorem(s: f64, beta_min: f64, t_max: f64, zeta: f64, delta: f64, m: usize) -> Result<u64> {
    let x = ceil(sample_size_theorem_real(s, beta_min, t_max, zeta, delta, m)?);
    Ok(if x >= u64::MAX as f64 { u64::MAX } else { x as u64 })
}

/// A feasible point and the number of sweeps spent finding it.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub value: RMat,
    pub iterations: usize,
}

/// Finds feasible points of the covariance and Hamiltonian programs.
pub trait FeasibilitySolver {
    /// Ṽ with |Ṽ - V̂| ≤ eps entrywise and Ṽ + iΩ/2 ⪰ 0.
    fn project_covariance(&self, v_hat: &RMat, eps: f64, tol: &Tolerances) -> Result<Projection>;

    /// H̃ with |H̃ - Ĥ| ≤ eps entrywise, H̃ ⪰ τI and zero blocks off `graph`.
    fn project_hamiltonian(&self, h_hat: &RMat, eps: f64, tau: f64, graph: Option<&InteractionGraph>, tol: &Tolerances) -> Result<Projection>;
}

/// Dykstra's alternating projections between the entrywise box and the spectral cone.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Dykstra;

fn clip_eigs(z: &CMat, floor: f64) -> CMat {
    linalg::herm_fn(z, |x| c(if x < floor { floor } else { x }, 0.0))
}

fn dykstra(
    x0: CMat,
    proj_box: impl Fn(&CMat) -> CMat,
    floor: f64,
    ptol: f64,
    max_iter: usize,
    op: &'static str,
) -> Result<(CMat, usize)> {
    let mut x = x0;
    let mut p = CMat::zeros(x.nrows(), x.ncols());
    let mut q = p.clone();
    let mut violation = f64::INFINITY;
    for it in 1..=max_iter {
        let y = proj_box(&(&x + &p));
        p = &x + &p - &y;
        violation = floor - linalg::herm_eigvals(&linalg::hermitize(&y))[0];
        if violation <= ptol {
            return Ok((y, it));
        }
        let w = &y + &q;
        x = clip_eigs(&w, floor);
        q = w - &x;
    }
    Err(Error::Infeasible { op, violation, iterations: max_iter })
}

fn check_square_even(a: &RMat, op: &'static str) -> Result<usize> {
    if a.nrows() != a.ncols() || !a.nrows().is_multiple_of(2) {
        return Err(Error::DimensionMismatch { op, expected: a.nrows(), got: a.ncols() });
    }
    Ok(a.nrows() / 2)
}

impl FeasibilitySolver for Dykstra {
    fn project_covariance(&self, v_hat: &RMat, eps: f64, tol: &Tolerances) -> Result<Projection> {
        const OP: &str = "estimation::project_covariance";
        let m = check_square_even(v_hat, OP)?;
        if !(eps > 0.0) {
            return Err(Error::InvalidRange { op: OP, detail: "eps must be positive" });
        }
        let v_hat = linalg::symmetrize(v_hat);
        let ptol = tol.proj_tol * (1.0 + max_abs(&v_hat));
        let half_iw = i_omega(m) * c(0.5, 0.0);
        let z0 = linalg::to_complex(&v_hat) + &half_iw;
        if linalg::herm_eigvals(&linalg::hermitize(&z0))[0] >= -ptol {
            return Ok(Projection { value: v_hat, iterations: 0 });
        }
        let proj_box = |z: &CMat| {
            let re = linalg::symmetrize(&linalg::re_part(z));
            let clipped = RMat::from_fn(re.nrows(), re.ncols(), |i, j| re[(i, j)].clamp(v_hat[(i, j)] - eps, v_hat[(i, j)] + eps));
            linalg::to_complex(&clipped) + &half_iw
        };
        let (z, iterations) = dykstra(z0, proj_box, 0.0, ptol, tol.proj_max_iter, OP)?;
        Ok(Projection { value: linalg::symmetrize(&linalg::re_part(&z)), iterations })
    }

    fn project_hamiltonian(&self, h_hat: &RMat, eps: f64, tau: f64, graph: Option<&InteractionGraph>, tol: &Tolerances) -> Result<Projection> {
        const OP: &str = "estimation::project_hamiltonian";
        let m = check_square_even(h_hat, OP)?;
        if !(eps > 0.0 && tau > 0.0) {
            return Err(Error::InvalidRange { op: OP, detail: "eps and tau must be positive" });
        }
        if let Some(g) = graph {
            if g.m != m {
                return Err(Error::DimensionMismatch { op: OP, expected: m, got: g.m });
            }
        }
        let h_hat = linalg::symmetrize(h_hat);
        let ptol = tol.proj_tol * (1.0 + max_abs(&h_hat));
        let dim = 2 * m;
        let mut pinned = alloc::vec![false; dim * dim];
        if let Some(g) = graph {
            for i in 0..dim {
                for j in 0..dim {
                    let (a, b) = (i / 2, j / 2);
                    if a != b && !g.has_edge(a, b) {
                        pinned[i * dim + j] = true;
                        let excess = h_hat[(i, j)].abs() - eps;
                        if excess > ptol {
                            return Err(Error::Infeasible { op: OP, violation: excess, iterations: 0 });
                        }
                    }
                }
            }
        }
        let box_of = |a: &RMat| RMat::from_fn(dim, dim, |i, j| if pinned[i * dim + j] { 0.0 } else { a[(i, j)].clamp(h_hat[(i, j)] - eps, h_hat[(i, j)] + eps) });
        let start = box_of(&h_hat);
        if start == h_hat && linalg::sym_eigvals(&h_hat)[0] >= tau - ptol {
            return Ok(Projection { value: h_hat, iterations: 0 });
        }
        let proj_box = |z: &CMat| linalg::to_complex(&box_of(&linalg::symmetrize(&linalg::re_part(z))));
        let (z, iterations) = dykstra(linalg::to_complex(&start), proj_box, tau, ptol, tol.proj_max_iter, OP)?;
        Ok(Projection { value: linalg::symmetrize(&linalg::re_part(&z)), iterations })
    }
}

/// [`FeasibilitySolver::project_covariance`] with the default solver.
pub fn project_covariance(v_hat: &RMat, eps: f64, tol: &Tolerances) -> Result<Projection> {
    Dykstra.project_covariance(v_hat, eps, tol)
}

/// [`FeasibilitySolver::project_hamiltonian`] with the default solver.
pub fn project_hamiltonian(h_hat: &RMat, eps: f64, tau: f64, graph: Option<&InteractionGraph>, tol: &Tolerances) -> Result<Projection> {
    Dykstra.project_hamiltonian(h_hat, eps, tau, graph, tol)
}

/// Shape of injected entrywise noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum NoiseKind {
    /// Uniform on [-ζ, ζ].
    Uniform,
    /// ±ζ with random signs.
    Extremal,
}

/// Symmetric perturbation E with |E_ij| ≤ ζ, deterministic in `seed`.
pub fn noise_matrix(dim: usize, zeta: f64, kind: NoiseKind, seed: u64) -> RMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = RMat::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let x = match kind {
                NoiseKind::Uniform => zeta * rng.random_range(-1.0..=1.0),
                NoiseKind::Extremal => {
                    if rng.random::<bool>() {
                        zeta
                    } else {
                        -zeta
                    }
                }
            };
            e[(i, j)] = x;
            e[(j, i)] = x;
        }
    }
    e
}

/// `v` plus [`noise_matrix`].
pub fn inject_noise(v: &RMat, zeta: f64, kind: NoiseKind, seed: u64) -> RMat {
    v + noise_matrix(v.nrows(), zeta, kind, seed)
}

/// Max entrywise error of each estimate against a known state.
pub fn max_entry_errors(est: &EstimationResult, t: &RVec, v: &RMat) -> (f64, f64) {
    let dt = (&est.t_hat - t).amax();
    let dv = max_abs(&(&est.v_hat_raw - v));
    (dt, dv)
}
