//! Seeded certificate sweeps over random Williamson forms.

use gausslearn_core::bounds::{self, BoundCertificate};
use gausslearn_core::gaussian::{self, GaussianState};
use gausslearn_core::linalg::{op_norm, op_norm_c, sq, symmetrize, RMat, RVec};
use gausslearn_core::symplectic::{random_form, Tolerances};
use gausslearn_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Range of the random forms: ‖S‖ ≤ s, dᵢ uniform on [d_lo, d_hi], modes cycled from `modes`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormRange<'a> {
    pub s: f64,
    pub d_lo: f64,
    pub d_hi: f64,
    pub modes: &'a [usize],
}

fn direction(n: usize, rng: &mut ChaCha8Rng) -> RMat {
    let e = symmetrize(&RMat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)));
    let k = op_norm(&e).max(1e-300);
    e / k
}

/// Certificates of the three continuity bounds on perturbed pairs.
///
/// Each instance draws a form and three perturbations sized inside the respective
/// hypothesis radius (covariance steps that leave the bona fide set are skipped).
pub fn continuity_sweep(seed: u64, instances: usize, range: &FormRange<'_>, tol: &Tolerances) -> Result<Vec<BoundCertificate>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(3 * instances);
    for k in 0..instances {
        let m = range.modes[k % range.modes.len()];
        let f = random_form(m, range.s, range.d_lo, range.d_hi, &mut rng);
        let (s, n) = (f.s_norm(), 2 * m);
        let v1 = gaussian::v_from_form(&f);
        let h1 = symmetrize(&f.reconstruct());
        let v2 = &v1 + direction(n, &mut rng) * (bounds::hv_radius(s, f.d_max) * rng.random_range(0.05..0.95));
        if gaussian::uncertainty_min_eig(&v2) > 1e-6 {
            out.push(bounds::bound_h_from_v(&v1, &v2, &f, tol)?);
        }
        // ‖ΔK‖ ≤ ‖K₁‖‖K₂‖‖ΔV‖ sizes the step for the K hypothesis.
        let kk = op_norm_c(&bounds::kernel_k(&v1)?);
        let lim_k = (-2.0 * f.d_max).exp() / sq(s);
        let v3 = &v1 + direction(n, &mut rng) * (lim_k / (1.5 * kk * kk) * rng.random_range(0.05..1.0));
        if gaussian::uncertainty_min_eig(&v3) > 1e-6 {
            out.push(bounds::bound_h_from_k(&v1, &v3, &f, tol)?);
        }
        let lim = bounds::v_from_h_limit(s, f.d_min, f.d_max);
        let h2 = &h1 + direction(n, &mut rng) * (lim * rng.random_range(0.05..1.0));
        out.push(bounds::bound_v_from_h(&h1, &h2, &f, tol)?);
    }
    Ok(out)
}

/// Bracket against 2D(a‖b) + 2D(b‖a) on one random pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketCheck {
    pub bracket: f64,
    pub symmetric_entropy: f64,
    pub abs_error: f64,
}

pub fn bracket_sweep(seed: u64, pairs: usize, range: &FormRange<'_>, tol: &Tolerances) -> Result<Vec<BracketCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(pairs);
    for k in 0..pairs {
        let m = range.modes[k % range.modes.len()];
        let fa = random_form(m, range.s, range.d_lo, range.d_hi, &mut rng);
        let fb = random_form(m, range.s, range.d_lo, range.d_hi, &mut rng);
        let ta = RVec::from_fn(2 * m, |_, _| rng.random_range(-1.0..1.0));
        let tb = RVec::from_fn(2 * m, |_, _| rng.random_range(-1.0..1.0));
        let a = GaussianState::new(ta, gaussian::v_from_form(&fa), tol)?;
        let b = GaussianState::new(tb, gaussian::v_from_form(&fb), tol)?;
        let (ha, hb) = (symmetrize(&fa.reconstruct()), symmetrize(&fb.reconstruct()));
        let bracket = bounds::trace_bracket(&a, &ha, &b, &hb)?;
        let symmetric_entropy = 2.0 * gaussian::relative_entropy(&a, &ha, &b, &hb, tol)? + 2.0 * gaussian::relative_entropy(&b, &hb, &a, &ha, tol)?;
        out.push(BracketCheck { bracket, symmetric_entropy, abs_error: (bracket - symmetric_entropy).abs() });
    }
    Ok(out)
}

/// Per-bound counts of a certificate list.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CertificateTally {
    pub bound_name: String,
    pub checked: usize,
    pub hypothesis_ok: usize,
    pub violations: usize,
    /// Smallest (rhs - lhs)/(1 + rhs) among hypothesis-satisfying certificates.
    pub worst_relative_margin: f64,
}

pub fn tally(certs: &[BoundCertificate]) -> Vec<CertificateTally> {
    let mut names: Vec<&str> = certs.iter().map(|c| c.bound_name.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    names
        .into_iter()
        .map(|name| {
            let of: Vec<&BoundCertificate> = certs.iter().filter(|c| c.bound_name == name).collect();
            let ok: Vec<&&BoundCertificate> = of.iter().filter(|c| c.hypothesis_ok).collect();
            CertificateTally {
                bound_name: name.into(),
                checked: of.len(),
                hypothesis_ok: ok.len(),
                violations: of.iter().filter(|c| c.is_violation()).count(),
                worst_relative_margin: ok.iter().map(|c| c.margin / (1.0 + c.rhs)).fold(f64::INFINITY, f64::min),
            }
        })
        .collect()
}
