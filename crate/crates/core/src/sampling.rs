//! Heterodyne sampling: i.i.d. draws from N(t, V + I/2).

use nalgebra::Cholesky;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::linalg::RMat;

/// N heterodyne outcomes of an m-mode state, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub m: usize,
    /// N × 2m matrix of outcomes.
    pub data: RMat,
    pub seed: u64,
    pub stream_id: u64,
}

impl SampleBatch {
    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    /// Row-wise concatenation of batches with the same mode count.
    pub fn concat(parts: &[SampleBatch]) -> Result<SampleBatch> {
        const OP: &str = "sampling::SampleBatch::concat";
        let first = parts.first().ok_or(Error::EmptyBatch { op: OP })?;
        let total: usize = parts.iter().map(SampleBatch::n).sum();
        let cols = 2 * first.m;
        let mut data = RMat::zeros(total, cols);
        let mut r0 = 0;
        for p in parts {
            if p.m != first.m {
                return Err(Error::DimensionMismatch { op: OP, expected: first.m, got: p.m });
            }
            data.view_mut((r0, 0), (p.n(), cols)).copy_from(&p.data);
            r0 += p.n();
        }
        Ok(SampleBatch { m: first.m, data, seed: first.seed, stream_id: first.stream_id })
    }
}

/// Lower Cholesky factor of Σ = V + I/2, rejecting pivots below 1e-12·tr Σ.
pub fn heterodyne_factor(v: &RMat) -> Result<RMat> {
    const OP: &str = "sampling::heterodyne_sample";
    let n = v.nrows();
    let sigma = crate::linalg::symmetrize(v) + RMat::identity(n, n) * 0.5;
    let floor = 1e-12 * sigma.trace();
    let l = Cholesky::new(sigma).ok_or(Error::FactorizationFailed { op: OP, pivot: f64::NAN })?.unpack();
    let pivot = (0..n).map(|k| l[(k, k)] * l[(k, k)]).fold(f64::INFINITY, f64::min);
    if !(pivot > floor) {
        return Err(Error::FactorizationFailed { op: OP, pivot });
    }
    Ok(l)
}

/// Draws `n` rows t + L z with z standard normal from ChaCha8 seeded by (`seed`, `stream_id`).
pub fn heterodyne_sample(state: &GaussianState, n: usize, seed: u64, stream_id: u64) -> Result<SampleBatch> {
    const OP: &str = "sampling::heterodyne_sample";
    if n == 0 {
        return Err(Error::EmptyBatch { op: OP });
    }
    let dim = state.t.len();
    let l = heterodyne_factor(&state.v)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    let mut data = RMat::zeros(n, dim);
    let mut z = alloc::vec![0.0f64; dim];
    for k in 0..n {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        for r in 0..dim {
            let mut acc = 0.0;
            for q in 0..=r {
                acc += l[(r, q)] * z[q];
            }
            data[(k, r)] = acc + state.t[r];
        }
    }
    Ok(SampleBatch { m: dim / 2, data, seed, stream_id })
}

/// `chunks` batches of `per_chunk` rows on stream ids 0..chunks, concatenated.
pub fn heterodyne_sample_chunked(state: &GaussianState, per_chunk: usize, chunks: u64, seed: u64) -> Result<SampleBatch> {
    let parts: alloc::vec::Vec<SampleBatch> = (0..chunks).map(|s| heterodyne_sample(state, per_chunk, seed, s)).collect::<Result<_>>()?;
    SampleBatch::concat(&parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RVec;
    use crate::symplectic::Tolerances;

    fn state() -> GaussianState {
        let v = RMat::from_row_slice(4, 4, &[1.0, 0.2, 0.1, 0.0, 0.2, 0.8, 0.0, -0.1, 0.1, 0.0, 0.9, 0.3, 0.0, -0.1, 0.3, 1.2]);
        GaussianState::new(RVec::from_vec(alloc::vec![0.5, -1.0, 0.0, 2.0]), v, &Tolerances::default()).unwrap()
    }

    #[test]
    fn same_seed_and_stream_reproduce_bits() {
        let s = state();
        let a = heterodyne_sample(&s, 50, 7, 3).unwrap();
        let b = heterodyne_sample(&s, 50, 7, 3).unwrap();
        assert_eq!(a.data, b.data);
        let c = heterodyne_sample(&s, 50, 7, 4).unwrap();
        assert_ne!(a.data, c.data);
        let d = heterodyne_sample(&s, 50, 8, 3).unwrap();
        assert_ne!(a.data, d.data);
    }

    #[test]
    fn prefix_of_longer_draw_is_shorter_draw() {
        let s = state();
        let a = heterodyne_sample(&s, 20, 1, 0).unwrap();
        let b = heterodyne_sample(&s, 40, 1, 0).unwrap();
        assert_eq!(a.data, b.data.rows(0, 20).into_owned());
    }

    #[test]
    fn moments_follow_shifted_covariance() {
        let s = state();
        let batch = heterodyne_sample_chunked(&s, 50_000, 4, 11).unwrap();
        assert_eq!(batch.n(), 200_000);
        let n = batch.n() as f64;
        for j in 0..4 {
            let mean = batch.data.column(j).sum() / n;
            assert!((mean - s.t[j]).abs() < 0.02, "mean {j}");
        }
        let centered = RMat::from_fn(batch.n(), 4, |r, j| batch.data[(r, j)] - s.t[j]);
        let cov = centered.tr_mul(&centered) / n;
        let target = &s.v + RMat::identity(4, 4) * 0.5;
        assert!(crate::linalg::max_abs(&(cov - target)) < 0.03);
    }

    #[test]
    fn rejects_empty_and_unphysical() {
        let s = state();
        assert!(matches!(heterodyne_sample(&s, 0, 0, 0), Err(Error::EmptyBatch { .. })));
        let bad = GaussianState { t: RVec::zeros(2), v: RMat::identity(2, 2) * -0.5 };
        assert!(matches!(heterodyne_sample(&bad, 3, 0, 0), Err(Error::FactorizationFailed { .. })));
    }
}
