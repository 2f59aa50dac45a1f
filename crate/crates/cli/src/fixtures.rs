//! Tridiagonal precision family with a closed-form integer inverse.

/// H_m (1 in the top-left corner, 2 elsewhere on the diagonal, -1 off-diagonal), its
/// inverse (m + 1 - max(i, j)) with 1-based indices, and ‖H_m‖∞‖H_m⁻¹‖∞ in the
/// induced (max row sum) norm.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalFamily {
    pub h: Vec<Vec<i64>>,
    pub h_inv: Vec<Vec<i64>>,
    pub condition_estimate: f64,
}

pub fn tridiagonal_family(m: usize) -> TridiagonalFamily {
    assert!(m >= 1, "m must be positive");
    let mut h = vec![vec![0i64; m]; m];
    for i in 0..m {
        h[i][i] = if i == 0 { 1 } else { 2 };
        if i + 1 < m {
            h[i][i + 1] = -1;
            h[i + 1][i] = -1;
        }
    }
    let h_inv: Vec<Vec<i64>> = (0..m).map(|i| (0..m).map(|j| (m - i.max(j)) as i64).collect()).collect();
    let condition_estimate = (row_sum_norm(&h) * row_sum_norm(&h_inv)) as f64;
    TridiagonalFamily { h, h_inv, condition_estimate }
}

pub fn row_sum_norm(a: &[Vec<i64>]) -> i64 {
    a.iter().map(|r| r.iter().map(|x| x.abs()).sum()).max().unwrap_or(0)
}

pub fn int_matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let (n, k, p) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    (0..n).map(|i| (0..p).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect()).collect()
}

pub fn is_identity(a: &[Vec<i64>]) -> bool {
    a.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, &x)| x == i64::from(i == j)))
}

/// Least-squares slope of ln y against ln x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
