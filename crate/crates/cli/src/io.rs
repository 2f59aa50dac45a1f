//! JSON matrix/state schema and CSV sample files.

use std::path::Path;

use anyhow::{bail, Context, Result};
use gausslearn_core::gaussian::GaussianState;
use gausslearn_core::learning::LearnReport;
use gausslearn_core::linalg::{CMat, RMat, RVec};
use gausslearn_core::sampling::SampleBatch;
use serde::{Deserialize, Serialize};

pub const ROW_MAJOR: &str = "row-major";

/// Real matrix as {rows, cols, layout, data}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub layout: String,
    pub data: Vec<f64>,
}

impl MatrixJson {
    pub fn from_mat(a: &RMat) -> Self {
        let data = (0..a.nrows()).flat_map(|r| (0..a.ncols()).map(move |c| a[(r, c)])).collect();
        Self { rows: a.nrows(), cols: a.ncols(), layout: ROW_MAJOR.into(), data }
    }

    pub fn to_mat(&self) -> Result<RMat> {
        if self.layout != ROW_MAJOR {
            bail!("unsupported matrix layout {:?}", self.layout);
        }
        if self.data.len() != self.rows * self.cols {
            bail!("matrix data has {} entries, expected {}x{}", self.data.len(), self.rows, self.cols);
        }
        Ok(RMat::from_row_slice(self.rows, self.cols, &self.data))
    }
}

/// Complex matrix as {rows, cols, layout, re, im}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub layout: String,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexMatrixJson {
    pub fn from_mat(a: &CMat) -> Self {
        let idx = || (0..a.nrows()).flat_map(|r| (0..a.ncols()).map(move |c| (r, c)));
        Self {
            rows: a.nrows(),
            cols: a.ncols(),
            layout: ROW_MAJOR.into(),
            re: idx().map(|k| a[k].re).collect(),
            im: idx().map(|k| a[k].im).collect(),
        }
    }

    pub fn to_mat(&self) -> Result<CMat> {
        let n = self.rows * self.cols;
        if self.layout != ROW_MAJOR || self.re.len() != n || self.im.len() != n {
            bail!("malformed complex matrix");
        }
        Ok(CMat::from_fn(self.rows, self.cols, |r, c| gausslearn_core::linalg::c(self.re[r * self.cols + c], self.im[r * self.cols + c])))
    }
}

/// State as {m, t, V (row-major), optional H}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub m: usize,
    pub t: Vec<f64>,
    #[serde(rename = "V")]
    pub v: Vec<f64>,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
}

impl StateFile {
    pub fn from_state(state: &GaussianState, h: Option<&RMat>) -> Self {
        let flat = |a: &RMat| MatrixJson::from_mat(a).data;
        Self { m: state.m(), t: state.t.iter().copied().collect(), v: flat(&state.v), h: h.map(flat) }
    }

    /// (t, V, H) with dimensions checked.
    pub fn parts(&self) -> Result<(RVec, RMat, Option<RMat>)> {
        let n = 2 * self.m;
        if self.m == 0 || self.t.len() != n || self.v.len() != n * n || self.h.as_ref().is_some_and(|h| h.len() != n * n) {
            bail!("state file dimensions do not match m = {}", self.m);
        }
        let h = self.h.as_ref().map(|h| RMat::from_row_slice(n, n, h));
        Ok((RVec::from_column_slice(&self.t), RMat::from_row_slice(n, n, &self.v), h))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading state file {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing state file {}", path.display()))
    }
}

/// Serializable view of a [`LearnReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearnReportJson {
    pub task: String,
    pub h_hat: Option<MatrixJson>,
    pub v_hat: Option<MatrixJson>,
    pub t_hat: Option<Vec<f64>>,
    pub edges: Option<Vec<(usize, usize)>>,
    pub n_samples: Option<usize>,
    pub params: Option<gausslearn_core::learning::HamLearnParams>,
    pub trace: Option<gausslearn_core::learning::TraceCertificate>,
    pub search: Option<gausslearn_core::learning::SearchStats>,
    pub imag_residue: Option<f64>,
    pub diagnostics: Option<gausslearn_core::learning::Diagnostics>,
}

impl From<&LearnReport> for LearnReportJson {
    fn from(r: &LearnReport) -> Self {
        Self {
            task: r.task.into(),
            h_hat: r.h_hat.as_ref().map(MatrixJson::from_mat),
            v_hat: r.v_hat.as_ref().map(MatrixJson::from_mat),
            t_hat: r.t_hat.as_ref().map(|t| t.iter().copied().collect()),
            edges: r.edges.clone(),
            n_samples: r.n_samples,
            params: r.params.clone(),
            trace: r.trace.clone(),
            search: r.search.clone(),
            imag_residue: r.imag_residue,
            diagnostics: r.diagnostics.clone(),
        }
    }
}

fn header(m: usize) -> Vec<String> {
    (0..m).flat_map(|i| [format!("x{i}"), format!("p{i}")]).collect()
}

/// Writes one sample per row with 17 significant digits.
pub fn write_samples_csv(path: &Path, batch: &SampleBatch) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header(batch.m))?;
    for r in 0..batch.n() {
        w.write_record(batch.data.row(r).iter().map(|x| format!("{x:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a sample file written by [`write_samples_csv`].
pub fn read_samples_csv(path: &Path, seed: u64, stream_id: u64) -> Result<SampleBatch> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let cols = r.headers()?.len();
    if cols == 0 || cols % 2 != 0 {
        bail!("sample file must have an even, nonzero number of columns");
    }
    let mut flat = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        for field in rec.iter() {
            flat.push(field.trim().parse::<f64>().with_context(|| format!("bad number {field:?}"))?);
        }
    }
    let n = flat.len() / cols;
    Ok(SampleBatch { m: cols / 2, data: RMat::from_row_slice(n, cols, &flat), seed, stream_id })
}
