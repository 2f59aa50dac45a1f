//! Continuity and trace-distance bounds, each paired with a directly measured left-hand side.

use alloc::string::String;
use libm::{exp, sqrt};

use crate::error::{Error, Result};
use crate::gaussian::{self, GaussianState};
use crate::linalg::{self, c, op_norm, op_norm_c, powu, sq, to_complex, CMat, RMat};
use crate::symplectic::{i_omega, Tolerances, WilliamsonForm};

/// A bound evaluated on one instance.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundCertificate {
    pub bound_name: String,
    /// Whether the bound's hypothesis held; the margin is informative only when it did.
    pub hypothesis_ok: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl BoundCertificate {
    pub fn new(name: &str, hypothesis_ok: bool, lhs: f64, rhs: f64) -> Self {
        Self { bound_name: String::from(name), hypothesis_ok, lhs, rhs, margin: rhs - lhs }
    }

    /// lhs > rhs(1 + 1e-12) + 1e-14 while the hypothesis held. The slack absorbs rounding
    /// in cases where the bound is attained with equality.
    pub fn is_violation(&self) -> bool {
        self.hypothesis_ok && self.lhs > self.rhs * (1.0 + 1e-12) + 1e-14
    }
}

/// a = e^{-2d}/(1 - e^{-2d}) s⁻², the singular-value floor of 2iΩV + ((t-1)/(t+1))I.
pub fn hv_radius(s: f64, d_max: f64) -> f64 {
    let e = exp(-2.0 * d_max);
    e / (1.0 - e) / sq(s)
}

/// 2(2a)⁻¹(2a - 2x)⁻¹ x, valid for x < a.
pub fn h_from_v_rhs(x: f64, s: f64, d_max: f64) -> f64 {
    let a = hv_radius(s, d_max);
    2.0 * x / (2.0 * a * (2.0 * a - 2.0 * x))
}

/// ½e^{2d}s² x (1 + (e^{2d}s²(1 - e^{-2d}) + x)/(e^{-2d}s⁻² - x)), valid for x < e^{-2d}s⁻².
pub fn h_from_k_rhs(x: f64, s: f64, d_max: f64) -> f64 {
    let (s2, ep, em) = (sq(s), exp(2.0 * d_max), exp(-2.0 * d_max));
    0.5 * ep * s2 * x * (1.0 + (ep * s2 * (1.0 - em) + x) / (em / s2 - x))
}

/// e^{-2d_max-1}(1 - e^{-2d_min})/(4s⁶).
pub fn v_from_h_limit(s: f64, d_min: f64, d_max: f64) -> f64 {
    exp(-2.0 * d_max - 1.0) * (1.0 - exp(-2.0 * d_min)) / (4.0 * powu(s, 6))
}

/// 4s⁸e^{2d_max+1} x/(1 - e^{-2d_min})².
pub fn v_from_h_rhs(x: f64, s: f64, d_min: f64, d_max: f64) -> f64 {
    4.0 * powu(s, 8) * exp(2.0 * d_max + 1.0) * x / sq(1.0 - exp(-2.0 * d_min))
}

/// K = 2(2iΩV - I)⁻¹.
pub fn kernel_k(v: &RMat) -> Result<CMat> {
    const OP: &str = "bounds::kernel_k";
    let m = v.nrows() / 2;
    let n = 2 * m;
    let a = i_omega(m) * to_complex(v) * c(2.0, 0.0) - CMat::identity(n, n);
    let inv = linalg::inverse_c(&a).ok_or(Error::TooPure { op: OP, gap: 0.0 })?;
    Ok(inv * c(2.0, 0.0))
}

/// ‖H₁ - H₂‖ against the V-continuity bound; `form1` is the Williamson form of H₁.
pub fn bound_h_from_v(v1: &RMat, v2: &RMat, form1: &WilliamsonForm, tol: &Tolerances) -> Result<BoundCertificate> {
    let x = op_norm(&(v1 - v2));
    let (s, d) = (form1.s_norm(), form1.d_max);
    let ok = x < hv_radius(s, d);
    let rhs = if ok { h_from_v_rhs(x, s, d) } else { f64::INFINITY };
    let h1 = gaussian::h_from_v_spectral(v1, tol)?;
    let h2 = gaussian::h_from_v_spectral(v2, tol)?;
    Ok(BoundCertificate::new("h_from_v", ok, op_norm(&(h1 - h2)), rhs))
}

/// ‖H₁ - H₂‖ against the K-continuity bound, K = 2(2iΩV - I)⁻¹.
pub fn bound_h_from_k(v1: &RMat, v2: &RMat, form1: &WilliamsonForm, tol: &Tolerances) -> Result<BoundCertificate> {
    let x = op_norm_c(&(kernel_k(v1)? - kernel_k(v2)?));
    let (s, d) = (form1.s_norm(), form1.d_max);
    let ok = x < exp(-2.0 * d) / sq(s);
    let rhs = if ok { h_from_k_rhs(x, s, d) } else { f64::INFINITY };
    let h1 = gaussian::h_from_v_spectral(v1, tol)?;
    let h2 = gaussian::h_from_v_spectral(v2, tol)?;
    Ok(BoundCertificate::new("h_from_k", ok, op_norm(&(h1 - h2)), rhs))
}

/// ‖V₁ - V₂‖ against the H-continuity bound; `form1` is the Williamson form of H₁.
pub fn bound_v_from_h(h1: &RMat, h2: &RMat, form1: &WilliamsonForm, tol: &Tolerances) -> Result<BoundCertificate> {
    const OP: &str = "bounds::bound_v_from_h";
    for h in [h1, h2] {
        let min_eig = linalg::sym_eigvals(&linalg::symmetrize(h))[0];
        if !(min_eig > tol.pd_tol) {
            return Err(Error::NotPositiveDefinite { op: OP, min_eig });
        }
    }
    let x = op_norm(&(h1 - h2));
    let (s, dmin, dmax) = (form1.s_norm(), form1.d_min, form1.d_max);
    let ok = x <= v_from_h_limit(s, dmin, dmax);
    let rhs = v_from_h_rhs(x, s, dmin, dmax);
    let v1 = gaussian::v_from_h_exponential(h1, tol)?;
    let v2 = gaussian::v_from_h_exponential(h2, tol)?;
    Ok(BoundCertificate::new("v_from_h", ok, op_norm(&(v1 - v2)), rhs))
}

/// 2Σ(Ĥ - H)(V - V̂) + 2ΣT(H + Ĥ) with T = (t - t̂)(t - t̂)ᵀ; equals 2D(a‖b) + 2D(b‖a).
pub fn trace_bracket(a: &GaussianState, h_a: &RMat, b: &GaussianState, h_b: &RMat) -> Result<f64> {
    const OP: &str = "bounds::trace_bound";
    if a.v.shape() != b.v.shape() || h_a.shape() != a.v.shape() || h_b.shape() != b.v.shape() {
        return Err(Error::DimensionMismatch { op: OP, expected: a.v.nrows(), got: b.v.nrows() });
    }
    let dt = &a.t - &b.t;
    let t = &dt * dt.transpose();
    let first = (h_b - h_a).component_mul(&(&a.v - &b.v)).sum();
    let second = t.component_mul(&(h_a + h_b)).sum();
    Ok(2.0 * first + 2.0 * second)
}

/// √bracket, an upper bound on ‖ρ_a - ρ_b‖₁. A bracket below -1e-10(1 + scale) means the
/// inputs are inconsistent and is reported as a breakdown; smaller negatives clip to 0.
pub fn trace_bound(a: &GaussianState, h_a: &RMat, b: &GaussianState, h_b: &RMat) -> Result<f64> {
    const OP: &str = "bounds::trace_bound";
    let x = trace_bracket(a, h_a, b, h_b)?;
    let scale = linalg::max_abs(h_a) + linalg::max_abs(h_b);
    if x < -1e-10 * (1.0 + scale) {
        return Err(Error::NumericalBreakdown { op: OP, detail: "negative symmetric relative entropy", value: x });
    }
    Ok(sqrt(x.max(0.0)))
}

/// mε√(12m(e^{2d}-1)²s⁴ + 16s²d): trace distance from entrywise accuracy ε, with the
/// constant as usually stated.
pub fn trace_distance_formula(m: usize, eps: f64, s: f64, d_max: f64) -> f64 {
    let mf = m as f64;
    mf * eps * sqrt(12.0 * mf * sq(exp(2.0 * d_max) - 1.0) * powu(s, 4) + 16.0 * sq(s) * d_max)
}

/// mε√(32m(e^{2d}-1)²s⁴ + 16s²d): the same estimate with the constant that the
/// entrywise-to-operator-norm step and the bracket actually produce (ε ≤ 1).
pub fn trace_distance_certified(m: usize, eps: f64, s: f64, d_max: f64) -> f64 {
    let mf = m as f64;
    mf * eps * sqrt(32.0 * mf * sq(exp(2.0 * d_max) - 1.0) * powu(s, 4) + 16.0 * sq(s) * d_max)
}

/// Precondition of both trace-distance estimates: 2·2mε < a.
pub fn trace_distance_hypothesis(m: usize, eps: f64, s: f64, d_max: f64) -> bool {
    4.0 * m as f64 * eps < hv_radius(s, d_max)
}

/// ‖H - Ĥ‖ implied by ‖M - LI‖ ≤ b through the K-continuity bound (K = 2·LI·iΩ).
pub fn chained_hamiltonian_bound(b: f64, s: f64, d_max: f64) -> Result<f64> {
    const OP: &str = "bounds::chained_hamiltonian_bound";
    let limit = exp(-2.0 * d_max) / sq(s);
    if !(2.0 * b < limit) {
        return Err(Error::HypothesisViolated { op: OP, detail: "2b < e^{-2d_max} s^{-2}", value: 2.0 * b, limit });
    }
    Ok(h_from_k_rhs(2.0 * b, s, d_max))
}
