//! Localization, local inversion, Taylor truncation of (2V-iΩ)⁻¹ and the
//! associated error bounds.

use alloc::vec::Vec;
use libm::exp;
use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::gaussian::block_max;
pub use crate::graph::{l_neighborhoods, InteractionGraph, NeighborhoodStructure};
use crate::linalg::{self, c, cabs, op_norm_c, powu, sq, to_complex, CMat, RMat};
use crate::symplectic::{i_omega, QuadIndexing};

/// Edge (i, j) iff the largest entry modulus of block (i, j) exceeds `zero_tol`.
pub fn graph_of_hamiltonian(h: &RMat, zero_tol: f64) -> InteractionGraph {
    let m = h.nrows() / 2;
    let mut g = InteractionGraph::edgeless(m);
    for i in 0..m {
        for j in i + 1..m {
            if block_max(h, i, j).max(block_max(h, j, i)) > zero_tol {
                g.add_edge(i, j);
            }
        }
    }
    g
}

fn check_dims(a: &CMat, nbhd: &NeighborhoodStructure, op: &'static str) -> Result<()> {
    if a.nrows() != a.ncols() || a.nrows() != 2 * nbhd.m() {
        return Err(Error::DimensionMismatch { op, expected: 2 * nbhd.m(), got: a.nrows() });
    }
    Ok(())
}

/// Keeps block (i, j) iff j ∈ 𝒩ᵢ.
pub fn loc(a: &CMat, nbhd: &NeighborhoodStructure) -> Result<CMat> {
    check_dims(a, nbhd, "locality::loc")?;
    let n = a.nrows();
    Ok(CMat::from_fn(n, n, |r, col| if nbhd.contains(r / 2, col / 2) { a[(r, col)] } else { c(0.0, 0.0) }))
}

fn principal(a: &CMat, rows: &[usize]) -> CMat {
    CMat::from_fn(rows.len(), rows.len(), |r, col| a[(rows[r], rows[col])])
}

/// Inverse of the principal submatrix on the given (sorted) modes.
pub fn principal_inverse(a: &CMat, modes: &[usize], pd_tol: f64) -> Result<CMat> {
    const OP: &str = "locality::local_inverse";
    let sub = linalg::hermitize(&principal(a, &QuadIndexing::rows_of(modes)));
    let min_eig = linalg::herm_eigvals(&sub)[0];
    if !(min_eig > pd_tol) {
        return Err(Error::NotPositiveDefinite { op: OP, min_eig });
    }
    let ch = Cholesky::new(sub).ok_or(Error::NotPositiveDefinite { op: OP, min_eig })?;
    Ok(ch.inverse())
}

/// LI_𝒩(N): per-vertex inverses of principal submatrices, stitched by symmetrized averaging.
pub fn local_inverse(n_mat: &CMat, nbhd: &NeighborhoodStructure, pd_tol: f64) -> Result<CMat> {
    check_dims(n_mat, nbhd, "locality::local_inverse")?;
    let m = nbhd.m();
    let invs: Vec<CMat> = nbhd.sets.iter().map(|s| principal_inverse(n_mat, s, pd_tol)).collect::<Result<_>>()?;
    let pos = |i: usize, j: usize| 2 * nbhd.sets[i].binary_search(&j).expect("j in neighborhood of i");
    let mut out = CMat::zeros(2 * m, 2 * m);
    for i in 0..m {
        for &j in &nbhd.sets[i] {
            let (pii, pij) = (pos(i, i), pos(i, j));
            let (pjj, pji) = (pos(j, j), pos(j, i));
            for d1 in 0..2 {
                for d2 in 0..2 {
                    let a = invs[i][(pii + d1, pij + d2)];
                    let b = invs[j][(pjj + d2, pji + d1)].conj();
                    out[(2 * i + d1, 2 * j + d2)] = (a + b) * 0.5;
                }
            }
        }
    }
    Ok(out)
}

/// ½ Σ_{n=1}^{l} (2HiΩ)ⁿ/n! (iΩ).
pub fn taylor_partial_sum(h: &RMat, l: usize) -> CMat {
    let m = h.nrows() / 2;
    let io = i_omega(m);
    let x = to_complex(h) * &io * c(2.0, 0.0);
    let mut term = CMat::identity(2 * m, 2 * m);
    let mut sum = CMat::zeros(2 * m, 2 * m);
    for n in 1..=l {
        term = &term * &x * c(1.0 / n as f64, 0.0);
        sum += &term;
    }
    sum * io * c(0.5, 0.0)
}

/// (2d)^{k}/k!.
fn pow_over_factorial(x: f64, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * x / j as f64)
}

/// (s²/2)(2d_max)^{l+1} e^{2d_max}/(l+1)!.
pub fn truncation_bound(s_norm: f64, d_max: f64, l: usize) -> f64 {
    0.5 * sq(s_norm) * pow_over_factorial(2.0 * d_max, l + 1) * exp(2.0 * d_max)
}

struct Blocks {
    b_row_norm: f64,
    dinv_c: f64,
}

fn split_blocks(a: &CMat, m1: usize, row: usize) -> Result<Blocks> {
    const OP: &str = "locality::block_inverse_row_bound";
    let n = a.nrows();
    if m1 == 0 || m1 > n || row >= m1 {
        return Err(Error::InvalidRange { op: OP, detail: "partition must satisfy row < m1 <= n" });
    }
    if m1 == n {
        return Ok(Blocks { b_row_norm: 0.0, dinv_c: 0.0 });
    }
    let aa = a.view((0, 0), (m1, m1)).into_owned();
    let b = a.view((0, m1), (m1, n - m1)).into_owned();
    let cc = a.view((m1, 0), (n - m1, m1)).into_owned();
    let d = a.view((m1, m1), (n - m1, n - m1)).into_owned();
    let dinv = linalg::inverse_c(&d).ok_or(Error::SingularBlock { op: OP })?;
    let dinv_c = &dinv * &cc;
    if linalg::inverse_c(&(aa - &b * &dinv_c)).is_none() {
        return Err(Error::SingularBlock { op: OP });
    }
    let b_row_norm = libm::sqrt(b.row(row).iter().map(|z| z.norm_sqr()).sum());
    Ok(Blocks { b_row_norm, dinv_c: op_norm_c(&dinv_c) })
}

/// ‖B - B̃‖ ‖M⁻¹‖ ‖M‖ for the partition of `a` into a leading `m1 × m1` block,
/// B̃ being B with row `row` zeroed.
pub fn block_inverse_row_bound(a: &CMat, m1: usize, row: usize) -> Result<f64> {
    let blocks = split_blocks(a, m1, row)?;
    if blocks.b_row_norm == 0.0 {
        return Ok(0.0);
    }
    let inv = linalg::inverse_c(a).ok_or(Error::SingularBlock { op: "locality::block_inverse_row_bound" })?;
    Ok(blocks.b_row_norm * op_norm_c(&inv) * op_norm_c(a))
}

/// Alternative diagnostic ‖B - B̃‖ ‖D⁻¹C‖.
pub fn block_inverse_row_bound_schur(a: &CMat, m1: usize, row: usize) -> Result<f64> {
    let blocks = split_blocks(a, m1, row)?;
    Ok(blocks.b_row_norm * blocks.dinv_c)
}

/// Largest entrywise noise ζ on V̂ admitted by [`local_inversion_error_bound`].
pub fn local_inversion_zeta_limit(s: f64, d_max: f64, xi: usize) -> f64 {
    let e = exp(-2.0 * d_max);
    e / (2.0 * xi as f64 * sq(s) * (1.0 - e))
}

/// Three-term bound on ‖(2V-iΩ)⁻¹ - LI_{𝒩(l)}(2V̂-iΩ)‖ for |V̂ - V| ≤ ζ entrywise.
pub fn local_inversion_error_bound(s: f64, d_max: f64, d_min: f64, xi: usize, l: usize, zeta: f64) -> Result<f64> {
    const OP: &str = "locality::local_inversion_error_bound";
    if !(s >= 1.0 && d_max >= d_min && d_min > 0.0 && xi >= 1 && zeta >= 0.0) {
        return Err(Error::InvalidRange { op: OP, detail: "require s >= 1, d_max >= d_min > 0, xi >= 1, zeta >= 0" });
    }
    let limit = local_inversion_zeta_limit(s, d_max, xi);
    if !(zeta < limit) {
        return Err(Error::HypothesisViolated { op: OP, detail: "zeta", value: zeta, limit });
    }
    let xi = xi as f64;
    let (emax, emin) = (exp(-2.0 * d_max), exp(-2.0 * d_min));
    let tail = pow_over_factorial(2.0 * d_max, l + 1);
    let t1 = xi * powu(s, 6) / 2.0 * tail * exp(4.0 * d_max) * (1.0 - emax) / (1.0 - emin);
    let t2 = (2.0 * xi + 1.0) * sq(s) / 2.0 * tail * exp(2.0 * d_max);
    let t3 = 2.0 * sq(sq(s)) * exp(4.0 * d_max) * sq(1.0 - emax) * xi * xi * zeta;
    Ok(t1 + t2 + t3)
}

/// Constants (C, C′) of the simplified bound C(2Δd_max)^{l+1}/(l+1)! + C′Δ^{2l}ζ.
pub fn simplified_li_constants(s: f64, d_min: f64, d_max: f64) -> (f64, f64) {
    let (emax, emin) = (exp(-2.0 * d_max), exp(-2.0 * d_min));
    let cc = 2.0 * powu(s, 6) * exp(4.0 * d_max) * (1.0 - emax) / (1.0 - emin);
    let cp = 2.0 * sq(sq(s)) * exp(4.0 * d_max) * sq(1.0 - emax);
    (cc, cp)
}

/// C(2Δd_max)^{l+1}/(l+1)! + C′Δ^{2l}ζ.
pub fn simplified_li_bound(s: f64, d_min: f64, d_max: f64, delta: usize, l: usize, zeta: f64) -> f64 {
    let (cc, cp) = simplified_li_constants(s, d_min, d_max);
    let dl = powu(delta as f64, l as u32);
    cc * pow_over_factorial(2.0 * delta as f64 * d_max, l + 1) + cp * dl * dl * zeta
}

/// Instance-level bound on ‖M - LI_𝒩̂(N̂)‖ with M the exact inverse, E = M - (truncated part
/// supported on `truth`), `zeta_n` the entrywise error of N̂ and 𝒩̂ = `hat`.
/// Terms: 2ξ̂ max row-norm(B) cond(M) + (2ξ̂+1)‖E‖ + missing-neighbor sum + 8‖M‖²ξ̂²ζ.
pub fn local_inversion_instance_bound(
    m_exact: &CMat,
    e: &CMat,
    hat: &NeighborhoodStructure,
    truth: &NeighborhoodStructure,
    zeta_n: f64,
) -> Result<f64> {
    const OP: &str = "locality::local_inversion_instance_bound";
    check_dims(m_exact, hat, OP)?;
    let m = hat.m();
    let m_norm = op_norm_c(m_exact);
    let xi = hat.xi() as f64;
    let limit = 1.0 / (4.0 * xi * m_norm);
    if !(zeta_n <= limit) {
        return Err(Error::HypothesisViolated { op: OP, detail: "zeta", value: zeta_n, limit });
    }
    let inv = linalg::inverse_c(m_exact).ok_or(Error::SingularBlock { op: OP })?;
    let cond = op_norm_c(&inv) * m_norm;
    let mut row_max: f64 = 0.0;
    let mut missing_max: f64 = 0.0;
    let me = m_exact - e;
    for i in 0..m {
        for d1 in 0..2 {
            let r = 2 * i + d1;
            let outside: f64 = (0..2 * m).filter(|&k| !hat.contains(i, k / 2)).map(|k| m_exact[(r, k)].norm_sqr()).sum();
            row_max = row_max.max(libm::sqrt(outside));
        }
        let miss: f64 = truth.sets[i]
            .iter()
            .filter(|&&j| !hat.contains(i, j))
            .map(|&j| (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| cabs(me[(2 * i + a, 2 * j + b)])).sum::<f64>())
            .sum();
        missing_max = missing_max.max(miss);
    }
    Ok(2.0 * xi * row_max * cond + (2.0 * xi + 1.0) * op_norm_c(e) + missing_max + 8.0 * sq(m_norm) * xi * xi * zeta_n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{random_state, StateBounds};
    use crate::linalg::max_abs_c;
    use crate::symplectic::Tolerances;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bounds(delta: usize) -> StateBounds {
        StateBounds { s: 2.0, beta_max: 1.5, beta_min: 0.3, t_max: 0.0, delta_deg: delta, kappa: 0.0 }
    }

    fn kernel(v: &RMat) -> CMat {
        to_complex(&(v * 2.0)) - i_omega(v.nrows() / 2)
    }

    fn noisy(v: &RMat, zeta: f64, rng: &mut ChaCha8Rng) -> RMat {
        let n = v.nrows();
        let mut out = v.clone();
        for r in 0..n {
            for col in r..n {
                let e = if rng.random::<bool>() { zeta } else { -zeta } * rng.random_range(0.5..=1.0);
                out[(r, col)] += e;
                if r != col {
                    out[(col, r)] += e;
                }
            }
        }
        out
    }

    #[test]
    fn loc_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = linalg::hermitize(&CMat::from_fn(6, 6, |_, _| c(rng.random(), rng.random())));
        assert_eq!(loc(&a, &NeighborhoodStructure::full(3)).unwrap(), a);
        let s = loc(&a, &NeighborhoodStructure::singletons(3)).unwrap();
        assert_eq!(s[(0, 2)], c(0.0, 0.0));
        assert_eq!(s[(1, 0)], a[(1, 0)]);
        let n = l_neighborhoods(&InteractionGraph::path(3), 1);
        let once = loc(&a, &n).unwrap();
        assert_eq!(loc(&once, &n).unwrap(), once);
        assert!(max_abs_c(&(&once - once.adjoint())) == 0.0);
    }

    #[test]
    fn full_local_inverse_is_exact_inverse() {
        let t = Tolerances::default();
        for seed in 0..10 {
            let g = InteractionGraph::cycle(5);
            let st = random_state(&g, &bounds(2), seed, &t).unwrap();
            let n = kernel(&st.state.v);
            let li = local_inverse(&n, &NeighborhoodStructure::full(5), 1e-12).unwrap();
            let inv = linalg::inverse_c(&n).unwrap();
            assert!(op_norm_c(&(&li - &inv)) <= 1e-10 * op_norm_c(&inv));
            let part = local_inverse(&n, &l_neighborhoods(&g, 1), 1e-12).unwrap();
            assert!(max_abs_c(&(&part - part.adjoint())) <= 1e-12 * (1.0 + max_abs_c(&part)));
        }
        // Block-diagonal input with singleton neighborhoods.
        let st = random_state(&InteractionGraph::edgeless(3), &bounds(0), 3, &t).unwrap();
        let n = kernel(&st.state.v);
        let li = local_inverse(&n, &NeighborhoodStructure::singletons(3), 1e-12).unwrap();
        assert!(max_abs_c(&(li - linalg::inverse_c(&n).unwrap())) < 1e-12);
    }

    #[test]
    fn taylor_support_and_convergence() {
        let t = Tolerances::default();
        let g = InteractionGraph::path(5);
        let b = StateBounds { s: 1.5, beta_max: 0.4, beta_min: 0.2, t_max: 0.0, delta_deg: 2, kappa: 0.0 };
        let st = random_state(&g, &b, 4, &t).unwrap();
        for l in 1..5 {
            let p = taylor_partial_sum(&st.h.h, l);
            for i in 0..5usize {
                for j in 0..5usize {
                    if i.abs_diff(j) > l {
                        for (a, bb) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                            assert_eq!(p[(2 * i + a, 2 * j + bb)], c(0.0, 0.0));
                        }
                    }
                }
            }
        }
        let exact = linalg::inverse_c(&kernel(&st.state.v)).unwrap();
        assert!(op_norm_c(&(taylor_partial_sum(&st.h.h, 60) - exact)) < 1e-10);
        // Scalar mode, l = 1: ½(2d iΩ)(iΩ) = d I.
        let d = 0.3;
        let p1 = taylor_partial_sum(&(RMat::identity(2, 2) * d), 1);
        assert!(max_abs_c(&(p1 - CMat::identity(2, 2) * c(d, 0.0))) < 1e-15);
    }

    #[test]
    fn truncation_bound_fixture() {
        let e1 = core::f64::consts::E;
        assert!((truncation_bound(1.0, 0.5, 3) - e1 / 48.0).abs() < 1e-15);
        let r = truncation_bound(1.3, 0.7, 5) / truncation_bound(1.3, 0.7, 4);
        assert!((r - 1.4 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn block_inverse_row_bound_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let x = CMat::from_fn(8, 8, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let a = &x * x.adjoint() + CMat::identity(8, 8) * c(0.5, 0.0);
            let inv = linalg::inverse_c(&a).unwrap();
            for m1 in 1..8 {
                let nmat = inv.view((0, 0), (m1, m1)).into_owned();
                let ninv = linalg::inverse_c(&nmat).unwrap();
                for row in 0..m1 {
                    let bound = block_inverse_row_bound(&a, m1, row).unwrap();
                    let schur = block_inverse_row_bound_schur(&a, m1, row).unwrap();
                    for j in 0..m1 {
                        let dev = cabs(ninv[(row, j)] - a[(row, j)]);
                        assert!(dev <= bound * (1.0 + 1e-12) + 1e-13);
                        assert!(dev <= schur * (1.0 + 1e-12) + 1e-13);
                    }
                }
            }
        }
        let a = CMat::identity(4, 4);
        assert_eq!(block_inverse_row_bound(&a, 2, 0).unwrap(), 0.0);
    }

    #[test]
    fn local_inversion_bound_holds_near_hypothesis_limit() {
        let t = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut worst: f64 = 0.0;
        for seed in 0..60u64 {
            let m = 3 + (seed as usize % 6);
            let g = match seed % 3 {
                0 => InteractionGraph::path(m),
                1 => InteractionGraph::cycle(m),
                _ => InteractionGraph::random_tree(m, 3, &mut rng),
            };
            let st = random_state(&g, &bounds(3), seed, &t).unwrap();
            let f = &st.form;
            let s = f.s_norm();
            for l in 1..4 {
                let nb = l_neighborhoods(&g, l);
                let xi = nb.xi();
                let limit = local_inversion_zeta_limit(s, f.d_max, xi);
                for frac in [0.0, 0.5, 0.99] {
                    let zeta = frac * limit;
                    let vh = noisy(&st.state.v, zeta, &mut rng);
                    let li = local_inverse(&kernel(&vh), &nb, 1e-14).unwrap();
                    let err = op_norm_c(&(linalg::inverse_c(&kernel(&st.state.v)).unwrap() - li));
                    let bound = local_inversion_error_bound(s, f.d_max, f.d_min, xi, l, zeta).unwrap();
                    worst = worst.max(err / bound);
                    assert!(err <= bound, "m={m} l={l} frac={frac}: {err} > {bound}");
                }
            }
        }
        assert!(worst < 1.0);
    }

    #[test]
    fn simplified_bound_dominates_for_power_xi() {
        for &(s, dmin, dmax) in &[(1.0, 0.5, 0.5), (1.7, 0.3, 1.4), (2.0, 0.2, 0.9)] {
            for delta in 2..4usize {
                for l in 1..6usize {
                    let xi = powu(delta as f64, l as u32) as usize;
                    let zeta = 0.5 * local_inversion_zeta_limit(s, dmax, xi);
                    let full = local_inversion_error_bound(s, dmax, dmin, xi, l, zeta).unwrap();
                    let simple = simplified_li_bound(s, dmin, dmax, delta, l, zeta);
                    assert!(simple >= full * (1.0 - 1e-14));
                }
            }
        }
    }

    #[test]
    fn wrong_neighborhoods_obey_extended_bound() {
        let t = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for seed in 0..30u64 {
            let m = 4 + (seed as usize % 4);
            let g = InteractionGraph::random_bounded_degree(m, 3, 0.7, &mut rng);
            let st = random_state(&g, &bounds(3), seed, &t).unwrap();
            let l = 1 + (seed as usize % 2);
            let truth = l_neighborhoods(&g, l);
            // Drop a random true neighbor symmetrically, add a random non-neighbor.
            let mut sets = truth.sets.clone();
            let i = rng.random_range(0..m);
            if let Some(&j) = sets[i].iter().find(|&&j| j != i) {
                sets[i].retain(|&x| x != j);
                sets[j].retain(|&x| x != i);
            }
            let k = rng.random_range(0..m);
            let k2 = (k + 2) % m;
            if !sets[k].contains(&k2) {
                sets[k].push(k2);
                sets[k2].push(k);
            }
            let hat = NeighborhoodStructure::new(sets).unwrap();
            let exact = linalg::inverse_c(&kernel(&st.state.v)).unwrap();
            let e = &exact - taylor_partial_sum(&st.h.h, l);
            let limit = 1.0 / (4.0 * hat.xi() as f64 * op_norm_c(&exact));
            let zeta_v = 0.45 * limit;
            let vh = noisy(&st.state.v, zeta_v, &mut rng);
            let li = local_inverse(&kernel(&vh), &hat, 1e-14).unwrap();
            let err = op_norm_c(&(&exact - li));
            let bound = local_inversion_instance_bound(&exact, &e, &hat, &truth, 2.0 * zeta_v).unwrap();
            assert!(err <= bound, "{err} > {bound}");
        }
    }

    #[test]
    fn graph_recovered_from_generated_hamiltonian() {
        let t = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..20 {
            let g = InteractionGraph::random_bounded_degree(6, 2, 0.8, &mut rng);
            let st = random_state(&g, &bounds(2), seed, &t).unwrap();
            assert_eq!(graph_of_hamiltonian(&st.h.h, 1e-12), g);
        }
    }
}
