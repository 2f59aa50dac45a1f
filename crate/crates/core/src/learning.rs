//! End-to-end pipelines: trace-distance learning, Hamiltonian learning on a
//! known graph, and graph recovery by neighborhood search.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use libm::{cos, exp, floor, log, sqrt};
use nalgebra::Cholesky;

use crate::bounds;
use crate::error::{Error, Result};
use crate::estimation::{self, EstimationResult};
use crate::gaussian::{self, block_max, GaussianState, StateBounds};
use crate::graph::{l_neighborhoods, InteractionGraph, NeighborhoodStructure};
use crate::linalg::{self, c, max_abs, op_norm, powu, sq, to_complex, CMat, RMat, RVec};
use crate::locality::{local_inverse, principal_inverse};
use crate::sampling::SampleBatch;
use crate::symplectic::{i_omega, Tolerances};

/// How the learning parameters were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ParamMode {
    Theorem,
    Override,
}

/// A derived constant together with its defining formula.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NamedConstant {
    pub name: String,
    pub formula: String,
    pub value: f64,
}

fn named(name: &str, formula: &str, value: f64) -> NamedConstant {
    NamedConstant { name: String::from(name), formula: String::from(formula), value }
}

/// Truncation radius, precisions and thresholds for the learning pipelines.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HamLearnParams {
    pub mode: ParamMode,
    /// Truncation radius.
    pub l: usize,
    /// Entrywise covariance precision.
    pub zeta: f64,
    /// Intermediate operator-norm budget ε′ (ε₁ for polynomial growth).
    pub eps_prime: f64,
    /// Graph-search threshold.
    pub eta: Option<f64>,
    /// Neighborhood cardinality used by the graph search.
    pub xi: Option<usize>,
    pub constants: Vec<NamedConstant>,
}

impl HamLearnParams {
    /// User-chosen parameters; `eps_prime` is left at 0.
    pub fn with_override(l: usize, zeta: f64, eta: Option<f64>, xi: Option<usize>) -> Result<Self> {
        if l == 0 || !(zeta >= 0.0) || eta.is_some_and(|e| !(e > 0.0)) || xi == Some(0) {
            return Err(Error::InvalidRange { op: "learning::HamLearnParams", detail: "require l >= 1, zeta >= 0, eta > 0, xi >= 1" });
        }
        Ok(Self { mode: ParamMode::Override, l, zeta, eps_prime: 0.0, eta, xi, constants: Vec::new() })
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|k| k.name == name).map(|k| k.value)
    }
}

/// Treatment of the imaginary part left by a stitched local inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum RealPart {
    /// Fail with `NumericalBreakdown` if the imaginary part exceeds `realify_tol`.
    Strict,
    /// Keep the real symmetric part. Its distance to any real symmetric target is at most
    /// that of the complex estimate.
    Project,
}

/// ½ ln(I + 2·LI·iΩ) iΩ and the norm of the discarded imaginary part.
pub fn h_from_local_inverse_with(li: &CMat, policy: RealPart, tol: &Tolerances) -> Result<(RMat, f64)> {
    const OP: &str = "learning::h_from_local_inverse";
    let n = li.nrows();
    if n != li.ncols() || !n.is_multiple_of(2) {
        return Err(Error::DimensionMismatch { op: OP, expected: n, got: li.ncols() });
    }
    let io = i_omega(n / 2);
    let li_h = linalg::hermitize(li);
    let log_k = match Cholesky::new(li_h.clone()) {
        // I + 2LL†iΩ = L (I + 2L†iΩL) L⁻¹ with L†iΩL Hermitian.
        Some(ch) => {
            let l = ch.l();
            let y = linalg::hermitize(&(l.adjoint() * &io * &l));
            let (lam, u) = linalg::herm_eig(&y);
            let lo = lam.iter().fold(f64::INFINITY, |a, &x| a.min(1.0 + 2.0 * x));
            if !(lo > tol.log_tol) {
                return Err(Error::LogBranchFailure { op: OP, value: lo });
            }
            let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, lam.iter().map(|&x| c(log(1.0 + 2.0 * x), 0.0))));
            let l_inv = l.clone().try_inverse().ok_or(Error::SingularBlock { op: OP })?;
            &l * u.clone() * d * u.adjoint() * l_inv
        }
        None => {
            let a = CMat::identity(n, n) + &li_h * &io * c(2.0, 0.0);
            linalg::logm_c(&a).ok_or(Error::LogBranchFailure { op: OP, value: linalg::sigma_min_c(&a) })?
        }
    };
    let h = log_k * io * c(0.5, 0.0);
    let residue = op_norm(&linalg::im_part(&h));
    let re = match policy {
        RealPart::Strict => linalg::realify(&h, tol.realify_tol, OP)?,
        RealPart::Project => linalg::re_part(&h),
    };
    Ok((linalg::symmetrize(&re), residue))
}

/// Ĥ from a local inverse, requiring a real result within `realify_tol`.
pub fn h_from_local_inverse(li: &CMat, tol: &Tolerances) -> Result<RMat> {
    Ok(h_from_local_inverse_with(li, RealPart::Strict, tol)?.0)
}

/// Gauss–Legendre nodes and weights on [0, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let mut x = cos(core::f64::consts::PI * (k as f64 - 0.25) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Ĥ = LI iΩ ∫₀^∞ (I + t/(t+1)·2LI iΩ)⁻¹ dt/(t+1)² iΩ by composite Gauss–Legendre in
/// u = t/(t+1), doubling panels until successive estimates agree to `rel_tol`.
pub fn h_from_local_inverse_quadrature(li: &CMat, rel_tol: f64) -> Result<CMat> {
    const OP: &str = "learning::h_from_local_inverse_quadrature";
    let n = li.nrows();
    let io = i_omega(n / 2);
    let k = li * &io * c(2.0, 0.0);
    let id = CMat::identity(n, n);
    let rule = gauss_legendre(16);
    let integrate = |panels: usize| -> Result<CMat> {
        let mut acc = CMat::zeros(n, n);
        let w = 1.0 / panels as f64;
        for p in 0..panels {
            for &(x, wt) in &rule {
                let u = (p as f64 + x) * w;
                let inv = linalg::inverse_c(&(&id + &k * c(u, 0.0))).ok_or(Error::LogBranchFailure { op: OP, value: u })?;
                acc += inv * c(wt * w, 0.0);
            }
        }
        Ok(acc)
    };
    let mut panels = 1;
    let mut prev = integrate(panels)?;
    loop {
        panels *= 2;
        let next = integrate(panels)?;
        let diff = linalg::max_abs_c(&(&next - &prev));
        prev = next;
        if diff <= rel_tol * linalg::max_abs_c(&prev) || panels >= 1 << 12 {
            break;
        }
    }
    Ok(li * &io * prev * io)
}

fn check_eps(eps: f64, op: &'static str) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidRange { op, detail: "eps must lie in (0, 1)" });
    }
    Ok(())
}

/// ε·e^{-2d}s⁻²/(8(1 + e^{4d}s⁴(1 - e^{-2d}))).
fn eps_prime_base(eps: f64, s: f64, d: f64) -> f64 {
    eps * exp(-2.0 * d) / sq(s) / (8.0 * (1.0 + exp(4.0 * d) * powu(s, 4) * (1.0 - exp(-2.0 * d))))
}

fn m_cap(l: f64, m: usize) -> usize {
    if !(l < m as f64) {
        m
    } else {
        (l as usize).max(1)
    }
}

/// Parameters for bounded-degree Hamiltonian learning at operator-norm accuracy `eps`.
pub fn select_params_bounded_degree(eps: f64, b: &StateBounds, m: usize) -> Result<HamLearnParams> {
    const OP: &str = "learning::select_params_bounded_degree";
    check_eps(eps, OP)?;
    b.validate()?;
    let (s, d, dmin) = (b.s, b.beta_max, b.beta_min);
    let delta = b.delta_deg.max(1) as f64;
    let ep = eps_prime_base(eps, s, d);
    let cc = 2.0 * powu(s, 6) * exp(4.0 * d) * (1.0 - exp(-2.0 * d)) / (1.0 - exp(-2.0 * dmin));
    let cp = 2.0 * powu(s, 4) * exp(4.0 * d) * sq(1.0 - exp(-2.0 * d));
    let e = core::f64::consts::E;
    let l_raw = floor(4.0 * delta * d * e * e + log(e * cc / ep) / core::f64::consts::LN_2);
    let l = m_cap(l_raw, m);
    let dl = powu(delta, l as u32);
    let zeta = (ep / (cp * dl * dl)).min(exp(-2.0 * d) / (2.0 * dl * sq(s)));
    Ok(HamLearnParams {
        mode: ParamMode::Theorem,
        l,
        zeta,
        eps_prime: ep,
        eta: None,
        xi: None,
        constants: vec![
            named("C", "2 s^6 e^{4 beta_max} (1 - e^{-2 beta_max}) / (1 - e^{-2 beta_min})", cc),
            named("C'", "2 s^4 e^{4 beta_max} (1 - e^{-2 beta_max})^2", cp),
            named("l_uncapped", "floor(4 Delta beta_max e^2 + ln(e C / eps') / ln 2)", l_raw),
        ],
    })
}

/// Parameters for Hamiltonian learning when ξ(l) ≤ g·lʳ.
pub fn select_params_poly_growth(eps: f64, g: f64, r: f64, b: &StateBounds, m: usize) -> Result<HamLearnParams> {
    const OP: &str = "learning::select_params_poly_growth";
    check_eps(eps, OP)?;
    b.validate()?;
    if !(g >= 1.0 && r >= 1.0) {
        return Err(Error::InvalidRange { op: OP, detail: "require g >= 1 and r >= 1" });
    }
    let (s, d, dmin) = (b.s, b.beta_max, b.beta_min);
    let (emax, emin) = (exp(-2.0 * d), exp(-2.0 * dmin));
    let c1 = exp(4.0 * d) * powu(s, 6) / 2.0 * (1.0 - emax) / (1.0 - emin);
    let c2 = exp(2.0 * d) * sq(s) / 2.0;
    let c3 = 2.0 * powu(s, 4) * exp(4.0 * d) * sq(1.0 - emax);
    let denom = 8.0 * (1.0 + exp(4.0 * d) * powu(s, 4) * (1.0 - emax));
    let c4 = c1 * emax / sq(s) / denom;
    let eps1 = eps_prime_base(eps, s, d).min(emax / sq(s) / 8.0);
    let sqrt_2pi = sqrt(2.0 * core::f64::consts::PI);
    let l_real = 2.0 * g * (r + 2.0 * core::f64::consts::E * d + log(c1 / (sqrt_2pi * eps1)));
    let l = m_cap(libm::ceil(l_real), m);
    let xi = (g * libm::pow(l as f64, r)).min(m as f64);
    let zeta = eps1 / (c3 * xi * xi);
    Ok(HamLearnParams {
        mode: ParamMode::Theorem,
        l,
        zeta,
        eps_prime: eps1,
        eta: None,
        xi: None,
        constants: vec![
            named("C1", "e^{4 beta_max} s^6 / 2 (1 - e^{-2 beta_max}) / (1 - e^{-2 beta_min})", c1),
            named("C2", "e^{2 beta_max} s^2 / 2", c2),
            named("C3", "2 s^4 e^{4 beta_max} (1 - e^{-2 beta_max})^2", c3),
            named("C4", "C1 e^{-2 beta_max} s^{-2} / (8 (1 + e^{4 beta_max} s^4 (1 - e^{-2 beta_max})))", c4),
            named("l_real", "2 g (r + 2 e beta_max + ln(C1 / (sqrt(2 pi) eps1)))", l_real),
            named("xi_bound", "min(g l^r, m)", xi),
        ],
    })
}

/// Σ_{k=0}^{l} Δᵏ capped at m: vertices within distance l of any vertex.
pub fn neighborhood_size_bound(delta: usize, l: usize, m: usize) -> usize {
    let mut total: usize = 0;
    let mut term: usize = 1;
    for _ in 0..=l {
        total = total.saturating_add(term);
        if total >= m {
            return m;
        }
        term = term.saturating_mul(delta);
    }
    total.min(m)
}

/// Parameters for graph recovery with interaction floor `kappa`.
pub fn select_params_graph(kappa: f64, b: &StateBounds, m: usize) -> Result<HamLearnParams> {
    const OP: &str = "learning::select_params_graph";
    if !(kappa > 0.0) {
        return Err(Error::InvalidRange { op: OP, detail: "kappa must be positive" });
    }
    b.validate()?;
    let (s, d, dmin) = (b.s, b.beta_max, b.beta_min);
    let (emax, emin) = (exp(-2.0 * d), exp(-2.0 * dmin));
    let delta = b.delta_deg.max(1) as f64;
    let ratio = (1.0 - emin) / (1.0 - emax);
    let ep = (kappa * emax / sq(s) / (16.0 * (1.0 + exp(4.0 * d) * powu(s, 4) * (1.0 - emax)))).min(emax / sq(s) / 8.0);
    let cc = 18.0 * powu(s, 10) * exp(6.0 * d) * sq((1.0 - emax) / (1.0 - emin));
    let cp = 2.0 * powu(s, 4) * exp(4.0 * d);
    let e = core::f64::consts::E;
    let l_raw = floor(4.0 * delta * delta * d * e * e + log(cc / ep));
    let l = m_cap(l_raw, m);
    let dl = powu(delta, l as u32);
    let zeta = (ep / (cp * dl * dl)).min(ep * exp(-4.0 * d) / (72.0 * dl * dl * dl * powu(s, 6)) * ratio);
    let eta = ep / (exp(2.0 * d) * 36.0 * dl * dl * powu(s, 4)) * ratio;
    if !(eta <= 1.0) {
        return Err(Error::HypothesisViolated { op: OP, detail: "eta <= 1", value: eta, limit: 1.0 });
    }
    Ok(HamLearnParams {
        mode: ParamMode::Theorem,
        l,
        zeta,
        eps_prime: ep,
        eta: Some(eta),
        xi: Some(neighborhood_size_bound(b.delta_deg, l, m)),
        constants: vec![
            named("C", "18 s^10 e^{6 beta_max} ((1 - e^{-2 beta_max}) / (1 - e^{-2 beta_min}))^2", cc),
            named("C'", "2 s^4 e^{4 beta_max}", cp),
            named("l_uncapped", "floor(4 Delta^2 beta_max e^2 + ln(C / eps'))", l_raw),
        ],
    })
}

/// A known state used to score a pipeline's output.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub state: GaussianState,
    pub h: RMat,
    pub graph: Option<InteractionGraph>,
}

/// Errors of an estimate against ground truth.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Diagnostics {
    pub h_error_op: Option<f64>,
    pub h_error_max: Option<f64>,
    pub v_error_max: Option<f64>,
    pub t_error_max: Option<f64>,
    /// √(2D(ρ‖ρ̂) + 2D(ρ̂‖ρ)) for the learned state.
    pub pinsker_trace_bound: Option<f64>,
    pub edges_exact: Option<bool>,
    pub missing_edges: Option<usize>,
    pub extra_edges: Option<usize>,
}

/// Trace-distance certificate carried by [`learn_trace_distance`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceCertificate {
    /// Entrywise precision of t̂ and V̂ at confidence 1 - δ.
    pub eps_entry: f64,
    pub hypothesis_ok: bool,
    /// mε√(12m…) at ε = 2·eps_entry.
    pub bound_formula: f64,
    /// mε√(32m…) at ε = 2·eps_entry.
    pub bound_certified: f64,
    /// hypothesis_ok and bound_certified ≤ target.
    pub certified: bool,
}

/// Graph-search bookkeeping.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchStats {
    /// Local inversions performed.
    pub evaluations: u64,
    /// Candidate neighborhoods examined.
    pub candidates: u64,
    /// m·C(m-ξ, k)·C(m, ξ) with k the enlargement size.
    pub predicted: f64,
    pub neighborhoods: Vec<Vec<usize>>,
}

/// Output of a learning pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnReport {
    pub task: &'static str,
    pub h_hat: Option<RMat>,
    pub v_hat: Option<RMat>,
    pub t_hat: Option<RVec>,
    pub edges: Option<Vec<(usize, usize)>>,
    pub n_samples: Option<usize>,
    pub params: Option<HamLearnParams>,
    pub trace: Option<TraceCertificate>,
    pub search: Option<SearchStats>,
    /// Operator norm of the imaginary part discarded when forming Ĥ.
    pub imag_residue: Option<f64>,
    pub diagnostics: Option<Diagnostics>,
}

impl LearnReport {
    fn new(task: &'static str) -> Self {
        Self {
            task,
            h_hat: None,
            v_hat: None,
            t_hat: None,
            edges: None,
            n_samples: None,
            params: None,
            trace: None,
            search: None,
            imag_residue: None,
            diagnostics: None,
        }
    }
}

/// Covariance data fed to Hamiltonian learning.
#[derive(Debug, Clone, Copy)]
pub enum CovarianceSource<'a> {
    Samples(&'a SampleBatch),
    /// An estimate promised to be entrywise within `zeta` of the true covariance.
    Noisy { v_hat: &'a RMat, t_hat: Option<&'a RVec>, zeta: f64 },
}

/// Optional final projection onto {H ⪰ τI, graph support, within eps of Ĥ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianProjection {
    pub eps: f64,
    pub tau: f64,
}

/// 2V̂ - iΩ.
pub fn kernel_matrix(v_hat: &RMat) -> CMat {
    let m = v_hat.nrows() / 2;
    to_complex(&(v_hat * 2.0)) - i_omega(m)
}

fn score_h(h_hat: &RMat, truth: &GroundTruth) -> Diagnostics {
    let diff = h_hat - &truth.h;
    Diagnostics { h_error_op: Some(op_norm(&diff)), h_error_max: Some(max_abs(&diff)), ..Diagnostics::default() }
}

/// Ĥ on a known interaction graph from a covariance estimate and l-neighborhoods.
pub fn learn_hamiltonian(
    source: CovarianceSource<'_>,
    graph: &InteractionGraph,
    params: &HamLearnParams,
    projection: Option<HamiltonianProjection>,
    truth: Option<&GroundTruth>,
    tol: &Tolerances,
) -> Result<LearnReport> {
    const OP: &str = "learning::learn_hamiltonian";
    let mut report = LearnReport::new("learn-hamiltonian");
    let (v_hat, t_hat) = match source {
        CovarianceSource::Samples(batch) => {
            let est = estimation::empirical_estimates(batch)?;
            report.n_samples = Some(est.n_used);
            (est.v_hat_raw, Some(est.t_hat))
        }
        CovarianceSource::Noisy { v_hat, t_hat, zeta } => {
            if !(zeta <= params.zeta) {
                return Err(Error::HypothesisViolated { op: OP, detail: "covariance precision zeta", value: zeta, limit: params.zeta });
            }
            (v_hat.clone(), t_hat.cloned())
        }
    };
    let m = v_hat.nrows() / 2;
    if graph.m != m {
        return Err(Error::DimensionMismatch { op: OP, expected: m, got: graph.m });
    }
    let nbhd = l_neighborhoods(graph, params.l);
    let li = local_inverse(&kernel_matrix(&v_hat), &nbhd, tol.pd_tol)?;
    let (mut h_hat, residue) = h_from_local_inverse_with(&li, RealPart::Project, tol)?;
    if let Some(p) = projection {
        h_hat = estimation::project_hamiltonian(&h_hat, p.eps, p.tau, Some(graph), tol)?.value;
    }
    if let Some(tr) = truth {
        let mut d = score_h(&h_hat, tr);
        d.v_error_max = Some(max_abs(&(&v_hat - &tr.state.v)));
        d.t_error_max = t_hat.as_ref().map(|t| (t - &tr.state.t).amax());
        report.diagnostics = Some(d);
    }
    report.h_hat = Some(h_hat);
    report.v_hat = Some(v_hat);
    report.t_hat = t_hat;
    report.imag_residue = Some(residue);
    report.params = Some(params.clone());
    Ok(report)
}

/// Lexicographic k-subsets of `pool` (sorted input gives sorted output).
struct Subsets<'a> {
    pool: &'a [usize],
    idx: Vec<usize>,
    done: bool,
}

impl<'a> Subsets<'a> {
    fn new(pool: &'a [usize], k: usize) -> Self {
        Self { pool, idx: (0..k).collect(), done: k > pool.len() }
    }
}

impl Iterator for Subsets<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out: Vec<usize> = self.idx.iter().map(|&i| self.pool[i]).collect();
        let (n, k) = (self.pool.len(), self.idx.len());
        let mut p = k;
        loop {
            if p == 0 {
                self.done = true;
                break;
            }
            p -= 1;
            if self.idx[p] < n - k + p {
                self.idx[p] += 1;
                for q in p + 1..k {
                    self.idx[q] = self.idx[q - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// C(n, k) as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Options for [`learn_graph`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphSearchOptions {
    /// Largest admissible C(m, ξ).
    pub budget: f64,
    /// Evaluate every candidate and enlargement, even after a rejection or an acceptance.
    pub exhaustive: bool,
}

impl Default for GraphSearchOptions {
    fn default() -> Self {
        Self { budget: 1e6, exhaustive: false }
    }
}

/// Edge set of the interaction graph from a covariance estimate.
///
/// For each vertex i, candidate neighborhoods are the ξ-subsets containing i in
/// lexicographic order. A candidate 𝒩 is accepted when, for every enlargement 𝒩̄ of
/// min(ξ, m-ξ) vertices outside 𝒩, the rows of i in the inverse of N̂ restricted to
/// 𝒩 ∪ 𝒩̄ have all entries in columns 𝒩̄ of modulus at most 3η. The first accepted
/// candidate wins. Neighborhoods are then made symmetric by elimination, Ĥ is formed
/// from LI over them, and (i, j) is reported when the block max of Ĥ is at least κ/2.
pub fn learn_graph(
    v_hat: &RMat,
    xi: usize,
    eta: f64,
    kappa: f64,
    options: &GraphSearchOptions,
    truth: Option<&GroundTruth>,
    tol: &Tolerances,
) -> Result<LearnReport> {
    const OP: &str = "learning::learn_graph";
    let m = v_hat.nrows() / 2;
    if v_hat.nrows() != v_hat.ncols() || !v_hat.nrows().is_multiple_of(2) {
        return Err(Error::DimensionMismatch { op: OP, expected: v_hat.nrows(), got: v_hat.ncols() });
    }
    if xi == 0 || xi > m || !(eta > 0.0) || !(kappa > 0.0) {
        return Err(Error::InvalidRange { op: OP, detail: "require 1 <= xi <= m, eta > 0, kappa > 0" });
    }
    let candidates = binomial(m, xi);
    if candidates > options.budget {
        return Err(Error::SearchBudgetExceeded { op: OP, candidates, budget: options.budget });
    }
    let n_hat = kernel_matrix(v_hat);
    let k_enl = xi.min(m - xi);
    let thr = 3.0 * eta;
    let mut stats = SearchStats { predicted: m as f64 * binomial(m - xi, k_enl) * candidates, ..SearchStats::default() };
    let mut chosen: Vec<Vec<usize>> = Vec::with_capacity(m);
    for i in 0..m {
        let others: Vec<usize> = (0..m).filter(|&j| j != i).collect();
        let mut accepted: Option<Vec<usize>> = None;
        for rest in Subsets::new(&others, xi - 1) {
            if accepted.is_some() && !options.exhaustive {
                break;
            }
            stats.candidates += 1;
            let mut cand = rest;
            cand.push(i);
            cand.sort_unstable();
            let outside: Vec<usize> = (0..m).filter(|j| cand.binary_search(j).is_err()).collect();
            let mut worst: f64 = 0.0;
            for enl in Subsets::new(&outside, k_enl) {
                let mut set = cand.clone();
                set.extend_from_slice(&enl);
                set.sort_unstable();
                let inv = principal_inverse(&n_hat, &set, tol.pd_tol)?;
                stats.evaluations += 1;
                let pos = |v: usize| 2 * set.binary_search(&v).expect("vertex in set");
                let pi = pos(i);
                for &j in &enl {
                    let pj = pos(j);
                    for d1 in 0..2 {
                        for d2 in 0..2 {
                            worst = worst.max(linalg::cabs(inv[(pi + d1, pj + d2)]));
                        }
                    }
                }
                if worst > thr && !options.exhaustive {
                    break;
                }
            }
            if worst <= thr && accepted.is_none() {
                accepted = Some(cand);
            }
        }
        chosen.push(accepted.ok_or(Error::NoNeighborhoodAccepted { op: OP, vertex: i })?);
    }
    let sets: Vec<Vec<usize>> = (0..m).map(|i| chosen[i].iter().copied().filter(|&j| chosen[j].binary_search(&i).is_ok()).collect()).collect();
    let nbhd = NeighborhoodStructure::new(sets)?;
    let li = local_inverse(&n_hat, &nbhd, tol.pd_tol)?;
    let (h_hat, residue) = h_from_local_inverse_with(&li, RealPart::Project, tol)?;
    let mut edges = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            if block_max(&h_hat, i, j) >= kappa / 2.0 {
                edges.push((i, j));
            }
        }
    }
    stats.neighborhoods = nbhd.sets.clone();
    let mut report = LearnReport::new("learn-graph");
    if let Some(tr) = truth {
        let mut d = score_h(&h_hat, tr);
        if let Some(g) = &tr.graph {
            let true_edges = g.edges();
            let missing = true_edges.iter().filter(|e| !edges.contains(e)).count();
            let extra = edges.iter().filter(|e| !true_edges.contains(e)).count();
            d.edges_exact = Some(missing == 0 && extra == 0);
            d.missing_edges = Some(missing);
            d.extra_edges = Some(extra);
        }
        report.diagnostics = Some(d);
    }
    report.edges = Some(edges);
    report.h_hat = Some(h_hat);
    report.imag_residue = Some(residue);
    report.search = Some(stats);
    Ok(report)
}

/// Largest diagonal covariance entry in the class: s² coth(β_min)/2.
pub fn covariance_diag_bound(b: &StateBounds) -> f64 {
    sq(b.s) * gaussian::half_coth(b.beta_min)
}

/// Ṽ, t̂ and Ĥ from heterodyne samples, with a trace-distance certificate for target `eps`.
pub fn learn_trace_distance(
    batch: &SampleBatch,
    eps: f64,
    delta: f64,
    b: &StateBounds,
    truth: Option<&GroundTruth>,
    tol: &Tolerances,
) -> Result<LearnReport> {
    const OP: &str = "learning::learn_trace_distance";
    if !(eps > 0.0) {
        return Err(Error::InvalidRange { op: OP, detail: "eps must be positive" });
    }
    b.validate()?;
    let m = batch.m;
    let est: EstimationResult = estimation::empirical_estimates(batch)?;
    let eps_n = estimation::entrywise_precision(est.n_used, covariance_diag_bound(b), b.t_max, delta, m)?;
    let v_tilde = estimation::project_covariance(&est.v_hat_raw, eps_n, tol)?.value;
    let h_hat = gaussian::h_from_v(&v_tilde, tol)?;
    let e2 = 2.0 * eps_n;
    let hypothesis_ok = e2 <= 1.0 && bounds::trace_distance_hypothesis(m, e2, b.s, b.beta_max);
    let bound_formula = bounds::trace_distance_formula(m, e2, b.s, b.beta_max);
    let bound_certified = bounds::trace_distance_certified(m, e2, b.s, b.beta_max);
    let mut report = LearnReport::new("learn-trace");
    if let Some(tr) = truth {
        let learned = GaussianState { t: est.t_hat.clone(), v: v_tilde.clone() };
        let fwd = gaussian::relative_entropy(&tr.state, &tr.h, &learned, &h_hat, tol)?;
        let bwd = gaussian::relative_entropy(&learned, &h_hat, &tr.state, &tr.h, tol)?;
        let mut d = score_h(&h_hat, tr);
        d.v_error_max = Some(max_abs(&(&v_tilde - &tr.state.v)));
        d.t_error_max = Some((&est.t_hat - &tr.state.t).amax());
        d.pinsker_trace_bound = Some(sqrt((2.0 * fwd + 2.0 * bwd).max(0.0)));
        report.diagnostics = Some(d);
    }
    report.trace = Some(TraceCertificate { eps_entry: eps_n, hypothesis_ok, bound_formula, bound_certified, certified: hypothesis_ok && bound_certified <= eps });
    report.n_samples = Some(est.n_used);
    report.h_hat = Some(h_hat);
    report.v_hat = Some(v_tilde);
    report.t_hat = Some(est.t_hat);
    Ok(report)
}
