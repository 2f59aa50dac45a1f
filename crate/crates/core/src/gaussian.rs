//! Gaussian states: validity, Hamiltonian/covariance conversion, normalization,
//! relative entropy and seeded instance generation.

use alloc::vec::Vec;
use libm::{exp, log, sqrt, tanh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::InteractionGraph;
use crate::linalg::{self, c, herm_eig, max_abs, op_norm, to_complex, CMat, RMat, RVec};
use crate::symplectic::{self, check_symmetric, i_omega, omega, williamson, Tolerances, WilliamsonForm};

/// Mean vector and covariance matrix of a Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub t: RVec,
    pub v: RMat,
}

impl GaussianState {
    /// Validates symmetry and the uncertainty relation V + iΩ/2 ⪰ 0.
    pub fn new(t: RVec, v: RMat, tol: &Tolerances) -> Result<Self> {
        const OP: &str = "gaussian_model::GaussianState";
        if v.nrows() != t.len() || v.ncols() != t.len() || !t.len().is_multiple_of(2) || t.is_empty() {
            return Err(Error::DimensionMismatch { op: OP, expected: t.len(), got: v.nrows() });
        }
        if !is_bona_fide(&v, tol.pd_tol, tol)? {
            return Err(Error::InvalidRange { op: OP, detail: "covariance violates the uncertainty relation" });
        }
        Ok(Self { t, v: linalg::symmetrize(&v) })
    }

    pub fn m(&self) -> usize {
        self.t.len() / 2
    }

    /// True when min eig(V + iΩ/2) exceeds `purity_tol`.
    pub fn is_nondegenerate(&self, tol: &Tolerances) -> bool {
        uncertainty_min_eig(&self.v) > tol.purity_tol
    }
}

/// Symmetric positive-definite Gibbs exponent, optionally with its Williamson form.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub h: RMat,
    pub form: Option<WilliamsonForm>,
}

impl HamiltonianMatrix {
    pub fn new(h: RMat, tol: &Tolerances) -> Result<Self> {
        const OP: &str = "gaussian_model::HamiltonianMatrix";
        check_symmetric(&h, tol, OP)?;
        let h = linalg::symmetrize(&h);
        let min = linalg::sym_eigvals(&h)[0];
        if !(min > tol.pd_tol) {
            return Err(Error::NotPositiveDefinite { op: OP, min_eig: min });
        }
        Ok(Self { h, form: None })
    }

    /// Attaches (computing if needed) the Williamson form.
    pub fn with_form(mut self, tol: &Tolerances) -> Result<Self> {
        if self.form.is_none() {
            self.form = Some(williamson(&self.h, tol)?);
        }
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.h.nrows() / 2
    }
}

/// Promised bounds on the state class.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StateBounds {
    /// Bound on ‖S‖.
    pub s: f64,
    pub beta_max: f64,
    pub beta_min: f64,
    pub t_max: f64,
    /// Degree bound Δ.
    pub delta_deg: usize,
    /// Interaction floor κ.
    pub kappa: f64,
}

impl StateBounds {
    pub fn validate(&self) -> Result<()> {
        const OP: &str = "gaussian_model::StateBounds";
        let ok = self.s >= 1.0 && self.beta_min > 0.0 && self.beta_max >= self.beta_min && self.t_max >= 0.0 && self.kappa >= 0.0;
        if !ok || !(self.s.is_finite() && self.beta_max.is_finite() && self.t_max.is_finite()) {
            return Err(Error::InvalidRange { op: OP, detail: "require s >= 1, beta_max >= beta_min > 0, t_max >= 0, kappa >= 0" });
        }
        Ok(())
    }
}

/// Smallest eigenvalue of the Hermitian matrix V + iΩ/2.
pub fn uncertainty_min_eig(v: &RMat) -> f64 {
    let m = v.nrows() / 2;
    let a = to_complex(v) + i_omega(m) * c(0.5, 0.0);
    linalg::herm_eigvals(&linalg::hermitize(&a))[0]
}

/// V + iΩ/2 ⪰ -tol (equivalently V - iΩ/2, by transposition).
pub fn is_bona_fide(v: &RMat, tol_psd: f64, tol: &Tolerances) -> Result<bool> {
    const OP: &str = "gaussian_model::is_bona_fide";
    if v.nrows() != v.ncols() || !v.nrows().is_multiple_of(2) {
        return Err(Error::DimensionMismatch { op: OP, expected: v.nrows(), got: v.ncols() });
    }
    check_symmetric(v, tol, OP)?;
    Ok(uncertainty_min_eig(v) >= -tol_psd)
}

/// f(x) = coth(x)/2.
pub fn half_coth(x: f64) -> f64 {
    0.5 / tanh(x)
}

/// arccoth(2ν) = ½ ln((2ν+1)/(2ν-1)).
pub fn arccoth_two(nu: f64) -> f64 {
    0.5 * log((2.0 * nu + 1.0) / (2.0 * nu - 1.0))
}

/// V = S f(D) Sᵀ through the Williamson form of H.
pub fn v_from_h(h: &RMat, tol: &Tolerances) -> Result<RMat> {
    let form = williamson(h, tol)?;
    Ok(v_from_form(&form))
}

pub fn v_from_form(form: &WilliamsonForm) -> RMat {
    let v = &form.s * symplectic::diag_pairs(&form.d, half_coth) * form.s.transpose();
    linalg::symmetrize(&v)
}

/// Dense route: (2V - iΩ)⁻¹ = ½(exp(2HiΩ) - I)iΩ, inverted.
pub fn v_from_h_exponential(h: &RMat, tol: &Tolerances) -> Result<RMat> {
    const OP: &str = "gaussian_model::v_from_h_exponential";
    let m = h.nrows() / 2;
    let io = i_omega(m);
    let n = 2 * m;
    let e = linalg::expm_c(&(to_complex(h) * &io * c(2.0, 0.0)));
    let minv = (e - CMat::identity(n, n)) * &io * c(0.5, 0.0);
    let inv = linalg::inverse_c(&minv).ok_or(Error::NumericalBreakdown { op: OP, detail: "singular kernel", value: 0.0 })?;
    let v = (inv + io) * c(0.5, 0.0);
    Ok(linalg::symmetrize(&linalg::realify(&v, tol.realify_tol, OP)?))
}

/// H = ½ ln((2iΩV+I)/(2iΩV-I)) iΩ through the Williamson form of V.
pub fn h_from_v(v: &RMat, tol: &Tolerances) -> Result<RMat> {
    const OP: &str = "gaussian_model::h_from_v";
    check_symmetric(v, tol, OP)?;
    let gap = uncertainty_min_eig(v);
    if !(gap > tol.purity_tol) {
        return Err(Error::TooPure { op: OP, gap });
    }
    let fv = williamson(v, tol)?;
    let gap = fv.d_min - 0.5;
    if !(gap > tol.purity_tol) {
        return Err(Error::TooPure { op: OP, gap });
    }
    let cond = linalg::sq(fv.s_norm());
    if !(cond <= tol.eig_cond_max) {
        return Err(Error::NumericalBreakdown { op: OP, detail: "eigenbasis condition number", value: cond });
    }
    // V = S_V⁻ᵀ N S_V⁻¹ = S f(D) Sᵀ with S = S_V⁻ᵀ, hence H = S⁻ᵀ D S⁻¹ = S_V D S_Vᵀ.
    let h = &fv.s * symplectic::diag_pairs(&fv.d, arccoth_two) * fv.s.transpose();
    Ok(linalg::symmetrize(&h))
}

/// Williamson form of H = h_from_v(V), read off from the form of V.
pub fn hamiltonian_form_from_v(v: &RMat, tol: &Tolerances) -> Result<WilliamsonForm> {
    let fv = williamson(v, tol)?;
    let w = omega(fv.m());
    let s = -(&w * &fv.s * &w);
    let d: Vec<f64> = fv.d.iter().map(|&nu| arccoth_two(nu)).collect();
    Ok(WilliamsonForm::from_parts(s, d))
}

/// H from V through the eigenbasis of 2iΩV = W⁻¹ (W iΩ W) W with W = (2V)^{1/2}.
pub fn h_from_v_spectral(v: &RMat, tol: &Tolerances) -> Result<RMat> {
    const OP: &str = "gaussian_model::h_from_v_spectral";
    check_symmetric(v, tol, OP)?;
    let m = v.nrows() / 2;
    let gap = uncertainty_min_eig(v);
    if !(gap > tol.purity_tol) {
        return Err(Error::TooPure { op: OP, gap });
    }
    let (lam, q) = linalg::sym_eig(&(linalg::symmetrize(v) * 2.0));
    let w = &q * RMat::from_diagonal(&lam.map(sqrt)) * q.transpose();
    let w_inv = &q * RMat::from_diagonal(&lam.map(|x| 1.0 / sqrt(x))) * q.transpose();
    let x = to_complex(&w) * i_omega(m) * to_complex(&w);
    let (mu, u) = herm_eig(&linalg::hermitize(&x));
    let min_abs = mu.iter().fold(f64::INFINITY, |a, &x| a.min(x.abs()));
    if !(min_abs - 1.0 > 2.0 * tol.purity_tol) {
        return Err(Error::TooPure { op: OP, gap: 0.5 * (min_abs - 1.0) });
    }
    let g = CMat::from_diagonal(&nalgebra::DVector::from_iterator(mu.len(), mu.iter().map(|&x| c(0.5 * log((x + 1.0) / (x - 1.0)), 0.0))));
    let f = to_complex(&w_inv) * &u * g * u.adjoint() * to_complex(&w);
    let h = f * i_omega(m);
    Ok(linalg::symmetrize(&linalg::realify(&h, tol.realify_tol, OP)?))
}

/// √det(V + iΩ/2).
pub fn normalization(v: &RMat, tol: &Tolerances) -> Result<f64> {
    Ok(exp(0.5 * log_det_uncertainty(v, tol)?))
}

/// ln det(V + iΩ/2) = Σⱼ 2 ln(νⱼ² - 1/4)/2, computed from the dense determinant.
pub fn log_det_uncertainty(v: &RMat, tol: &Tolerances) -> Result<f64> {
    const OP: &str = "gaussian_model::normalization";
    let m = v.nrows() / 2;
    let a = to_complex(v) + i_omega(m) * c(0.5, 0.0);
    let lu = a.lu();
    let mut logdet = 0.0;
    let mut phase = c(1.0, 0.0);
    let u = lu.u();
    for k in 0..u.nrows() {
        let z = u[(k, k)];
        let r = linalg::cabs(z);
        if !(r > 0.0) {
            return Err(Error::TooPure { op: OP, gap: 0.0 });
        }
        logdet += log(r);
        phase *= z / r;
    }
    // Row swaps contribute a sign which, with the phase, must be +1 for a bona fide V.
    let sign = if lu.p().determinant::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let phase = phase * sign;
    if !(logdet > log(tol.det_tol)) || linalg::cabs(phase - c(1.0, 0.0)) > 1e-8 {
        return Err(Error::TooPure { op: OP, gap: exp(logdet.min(0.0)) * phase.re });
    }
    Ok(logdet)
}

/// von Neumann entropy Σⱼ g(νⱼ - 1/2), g(x) = (x+1)ln(x+1) - x ln x.
pub fn entropy(v: &RMat, tol: &Tolerances) -> Result<f64> {
    let nu = williamson(v, tol)?.d;
    Ok(nu
        .iter()
        .map(|&n| {
            let x = n - 0.5;
            let xl = if x > 0.0 { x * log(x) } else { 0.0 };
            (x + 1.0) * log(x + 1.0) - xl
        })
        .sum())
}

/// D(a‖b) = Σ[H_b(V_a + δtδtᵀ) - H_a V_a] + ½ ln(det(V_b+iΩ/2)/det(V_a+iΩ/2)).
pub fn relative_entropy(a: &GaussianState, h_a: &RMat, b: &GaussianState, h_b: &RMat, tol: &Tolerances) -> Result<f64> {
    const OP: &str = "gaussian_model::relative_entropy";
    if a.v.shape() != b.v.shape() || h_a.shape() != a.v.shape() || h_b.shape() != b.v.shape() {
        return Err(Error::DimensionMismatch { op: OP, expected: a.v.nrows(), got: b.v.nrows() });
    }
    let dt = &a.t - &b.t;
    let tt = &dt * dt.transpose();
    let quad = h_b.component_mul(&(&a.v + tt)).sum() - h_a.component_mul(&a.v).sum();
    let ld = log_det_uncertainty(&b.v, tol)? - log_det_uncertainty(&a.v, tol)?;
    Ok(quad + 0.5 * ld)
}

/// Output of [`random_state`].
#[derive(Debug, Clone)]
pub struct GeneratedState {
    pub state: GaussianState,
    pub h: HamiltonianMatrix,
    pub form: WilliamsonForm,
}

/// Maximum rejection-loop attempts of [`random_state`].
pub const MAX_REJECTIONS: usize = 500;

/// Seeded graph-supported state with ‖S‖ ≤ s, β_min ≤ dᵢ ≤ β_max, |tᵢ| ≤ t_max and,
/// when κ > 0, every edge block's largest entry at least κ.
pub fn random_state(graph: &InteractionGraph, bounds: &StateBounds, seed: u64, tol: &Tolerances) -> Result<GeneratedState> {
    const OP: &str = "gaussian_model::random_state";
    bounds.validate()?;
    let m = graph.m;
    if m == 0 {
        return Err(Error::InvalidRange { op: OP, detail: "empty graph" });
    }
    if graph.degree() > bounds.delta_deg {
        return Err(Error::InvalidRange { op: OP, detail: "graph degree exceeds bound" });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta = graph.degree().max(1) as f64;
    let ratio = bounds.beta_max / bounds.beta_min;
    // Edge-block norms stay below diagonal dominance; a positive κ asks for the strong end.
    let coupling = if bounds.kappa > 0.0 { 0.95 / delta } else { 0.999 / (2.0 * delta) };
    for attempt in 0..MAX_REJECTIONS {
        // Anisotropy and coupling budget shrink as attempts are rejected.
        let shrink = 1.0 / (1.0 + attempt as f64 / 20.0);
        let aniso_max = (linalg::sq(linalg::sq(bounds.s)) - 1.0).max(0.0).min(ratio - 1.0).min(4.0) * 0.5 * shrink;
        let mut h = RMat::zeros(2 * m, 2 * m);
        for i in 0..m {
            let a = rng.random::<f64>() * aniso_max;
            let th = rng.random::<f64>() * core::f64::consts::PI;
            let (u0, u1) = (libm::cos(th), libm::sin(th));
            h[(2 * i, 2 * i)] = 1.0 + a * u0 * u0;
            h[(2 * i + 1, 2 * i + 1)] = 1.0 + a * u1 * u1;
            h[(2 * i, 2 * i + 1)] = a * u0 * u1;
            h[(2 * i + 1, 2 * i)] = a * u0 * u1;
        }
        for (i, j) in graph.edges() {
            let mut b = RMat::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
            let nb = op_norm(&b).max(1e-12);
            let target = rng.random_range(0.6..1.0) * coupling;
            b *= target / nb;
            for (r, cc) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                h[(2 * i + r, 2 * j + cc)] = b[(r, cc)];
                h[(2 * j + cc, 2 * i + r)] = b[(r, cc)];
            }
        }
        let Ok(form) = williamson(&h, tol) else { continue };
        if form.s_norm() > bounds.s || form.d_max / form.d_min > ratio {
            continue;
        }
        let lo = bounds.beta_min / form.d_min;
        let hi = bounds.beta_max / form.d_max;
        let scale = if bounds.kappa > 0.0 { hi } else { lo + (hi - lo) * rng.random::<f64>() };
        let h = h * scale;
        if bounds.kappa > 0.0 && graph.edges().iter().any(|&(i, j)| block_max(&h, i, j) < bounds.kappa) {
            continue;
        }
        let form = WilliamsonForm::from_parts(form.s.clone(), form.d.iter().map(|d| d * scale).collect());
        let v = v_from_form(&form);
        let t = RVec::from_fn(2 * m, |_, _| rng.random_range(-1.0..=1.0) * bounds.t_max);
        let state = GaussianState { t, v };
        let h = HamiltonianMatrix { h, form: Some(form.clone()) };
        return Ok(GeneratedState { state, h, form });
    }
    Err(Error::GenerationFailed { op: OP, attempts: MAX_REJECTIONS })
}

/// Largest entry modulus of the 2×2 block (i, j).
pub fn block_max(a: &RMat, i: usize, j: usize) -> f64 {
    max_abs(&a.view((2 * i, 2 * j), (2, 2)).into_owned())
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::InteractionGraph;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn bounds() -> StateBounds {
        StateBounds { s: 2.0, beta_max: 1.5, beta_min: 0.3, t_max: 1.0, delta_deg: 3, kappa: 0.0 }
    }

    #[test]
    fn scalar_identities() {
        let h = RMat::identity(2, 2) * (0.5 * log(3.0));
        let v = v_from_h(&h, &tol()).unwrap();
        assert!(max_abs(&(v - RMat::identity(2, 2))) < 1e-14);
        let h2 = h_from_v(&RMat::identity(2, 2), &tol()).unwrap();
        assert!(max_abs(&(h2 - h)) < 1e-14);
        assert!(matches!(h_from_v(&(RMat::identity(2, 2) * 0.5), &tol()), Err(Error::TooPure { .. })));
    }

    #[test]
    fn bona_fide_examples() {
        let t = tol();
        assert!(is_bona_fide(&RMat::identity(2, 2), 0.0, &t).unwrap());
        assert!(!is_bona_fide(&(RMat::identity(2, 2) * 0.25), 0.0, &t).unwrap());
        let vac = RMat::identity(2, 2) * 0.5;
        assert!(is_bona_fide(&vac, 1e-12, &t).unwrap());
        let s = GaussianState::new(RVec::zeros(2), vac, &t).unwrap();
        assert!(!s.is_nondegenerate(&t));
    }

    #[test]
    fn thermal_monotone() {
        let mut prev = f64::INFINITY;
        for k in 1..40 {
            let v = v_from_h(&(RMat::identity(2, 2) * (0.1 * k as f64)), &tol()).unwrap()[(0, 0)];
            assert!(v < prev && v > 0.5);
            prev = v;
        }
    }

    #[test]
    fn normalization_fixtures() {
        assert!((normalization(&RMat::identity(2, 2), &tol()).unwrap() - sqrt(0.75)).abs() < 1e-15);
        assert!((normalization(&RMat::identity(4, 4), &tol()).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn round_trip_and_independent_routes() {
        let t = tol();
        for seed in 0..30u64 {
            let m = 1 + (seed as usize % 5);
            let g = InteractionGraph::path(m);
            let gen = random_state(&g, &bounds(), seed, &t).unwrap();
            let h = &gen.h.h;
            let v = v_from_h(h, &t).unwrap();
            let back = h_from_v(&v, &t).unwrap();
            assert!(max_abs(&(&back - h)) <= 1e-8 * (1.0 + max_abs(h)));
            // Dense exponential route for V.
            let v2 = v_from_h_exponential(h, &t).unwrap();
            assert!(max_abs(&(&v2 - &v)) < 1e-9);
            // Spectral route for H.
            let h2 = h_from_v_spectral(&v, &t).unwrap();
            assert!(max_abs(&(&h2 - h)) < 1e-8);
            // Brute-force general complex logarithm.
            let x = i_omega(m) * to_complex(&v) * c(2.0, 0.0);
            let id = CMat::identity(2 * m, 2 * m);
            let k = (&x + &id) * linalg::inverse_c(&(&x - &id)).unwrap();
            let h3 = linalg::logm_c(&k).unwrap() * i_omega(m) * c(0.5, 0.0);
            assert!(max_abs(&(linalg::re_part(&h3) - h)) < 1e-8);
            assert!(max_abs(&linalg::im_part(&h3)) < 1e-8);
        }
    }

    #[test]
    fn entropy_consistent_with_normalization() {
        // S(ρ) = Σ Hᵢⱼ Vᵢⱼ + ln √det(V + iΩ/2).
        let t = tol();
        for seed in 0..20u64 {
            let g = InteractionGraph::cycle(4);
            let gen = random_state(&g, &bounds(), seed, &t).unwrap();
            let v = &gen.state.v;
            let lhs = entropy(v, &t).unwrap();
            let rhs = gen.h.h.component_mul(v).sum() + log(normalization(v, &t).unwrap());
            assert!((lhs - rhs).abs() < 1e-9, "{lhs} {rhs}");
        }
    }

    #[test]
    fn relative_entropy_thermal_fixture() {
        // Fock-basis closed form for thermal states, q = e^{-2d}:
        // D = ln((1-q_a)/(1-q_b)) + n_a ln(q_a/q_b), n_a = q_a/(1-q_a).
        let t = tol();
        for &(da, db) in &[(0.5, 1.0), (1.2, 0.3), (0.7, 0.7)] {
            let state = |d: f64| {
                let h = RMat::identity(2, 2) * d;
                let v = v_from_h(&h, &t).unwrap();
                (GaussianState::new(RVec::zeros(2), v, &t).unwrap(), h)
            };
            let (a, ha) = state(da);
            let (b, hb) = state(db);
            let (qa, qb) = (exp(-2.0 * da), exp(-2.0 * db));
            let na = qa / (1.0 - qa);
            let want = log((1.0 - qa) / (1.0 - qb)) + na * log(qa / qb);
            let got = relative_entropy(&a, &ha, &b, &hb, &t).unwrap();
            assert!((got - want).abs() < 1e-13, "{got} {want}");
        }
    }

    #[test]
    fn generator_contract() {
        let t = tol();
        let b = bounds();
        for seed in 0..100u64 {
            let m = 1 + (seed as usize % 6);
            let g = if seed % 2 == 0 { InteractionGraph::path(m) } else { InteractionGraph::edgeless(m) };
            let gen = random_state(&g, &b, seed, &t).unwrap();
            assert!(is_bona_fide(&gen.state.v, 1e-12, &t).unwrap());
            let f = williamson(&gen.h.h, &t).unwrap();
            assert!(f.s_norm() <= b.s + 1e-9);
            assert!(f.d_min >= b.beta_min - 1e-9 && f.d_max <= b.beta_max + 1e-9);
            assert!(gen.state.t.iter().all(|x| x.abs() <= b.t_max));
            for i in 0..m {
                for j in 0..m {
                    if i != j {
                        assert_eq!(block_max(&gen.h.h, i, j) > 0.0, g.has_edge(i, j));
                    }
                }
            }
        }
        let again = random_state(&InteractionGraph::path(3), &b, 5, &t).unwrap();
        let once = random_state(&InteractionGraph::path(3), &b, 5, &t).unwrap();
        assert_eq!(again.h.h, once.h.h);
    }
}
