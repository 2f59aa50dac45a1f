//! Experiment orchestration: per-seed pipelines, reports and exit status.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Context, Result};
use gausslearn_core::bounds::BoundCertificate;
use gausslearn_core::estimation::{self, inject_noise};
use gausslearn_core::gaussian::{self, block_max, random_state, GaussianState, StateBounds};
use gausslearn_core::graph::InteractionGraph;
use gausslearn_core::learning::{
    self, covariance_diag_bound, CovarianceSource, GraphSearchOptions, GroundTruth, HamLearnParams, HamiltonianProjection, ParamMode,
};
use gausslearn_core::linalg::{max_abs, RMat};
use gausslearn_core::locality::graph_of_hamiltonian;
use gausslearn_core::sampling::heterodyne_sample;
use gausslearn_core::Error as CoreError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ConfigError, ExperimentConfig, GraphSpec, Overrides, StateSpec, Task};
use crate::fixtures::loglog_slope;
use crate::io::{read_samples_csv, write_samples_csv, LearnReportJson, MatrixJson, StateFile};
use crate::sweeps::{self, FormRange};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PIPELINE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const METADATA_FILE: &str = "metadata.json";
pub const OUT_ENV: &str = "GAUSSLEARN_OUT";

const NOISE_SALT: u64 = 0x6e6f_6973_6500_0000;
const HARNESS_OP: &str = "harness::run_experiment";

/// A failure with the module::operation that raised it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorJson {
    pub origin: String,
    pub kind: String,
    pub message: String,
}

impl ErrorJson {
    fn from_anyhow(e: &anyhow::Error) -> Self {
        match e.downcast_ref::<CoreError>() {
            Some(c) => Self { origin: c.origin().into(), kind: c.kind().into(), message: c.to_string() },
            None => Self { origin: HARNESS_OP.into(), kind: "Io".into(), message: format!("{e:#}") },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Property {
    pub name: String,
    pub held: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

/// Outcome of one seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub status: String,
    pub error: Option<ErrorJson>,
    pub properties: Vec<Property>,
    pub metrics: Vec<Metric>,
    pub result: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub runs: usize,
    pub failed_runs: usize,
    pub failed_properties: usize,
    pub exit_code: i32,
}

/// Deterministic report: no timestamps, paths or thread counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub task: String,
    pub config: ExperimentConfig,
    pub runs: Vec<RunReport>,
    pub aggregate: Value,
    pub aggregate_properties: Vec<Property>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub dir: PathBuf,
    pub report: ExperimentReport,
}

#[derive(Default)]
struct RunOutput {
    properties: Vec<Property>,
    metrics: Vec<Metric>,
    result: Value,
}

impl RunOutput {
    fn property(&mut self, name: &str, held: bool) {
        self.properties.push(Property { name: name.into(), held });
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.push(Metric { name: name.into(), value });
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    state_file: Option<StateFile>,
    dir: &'a Path,
}

struct Instance {
    state: GaussianState,
    h: RMat,
    graph: InteractionGraph,
}

impl Instance {
    fn truth(&self) -> GroundTruth {
        GroundTruth { state: self.state.clone(), h: self.h.clone(), graph: Some(self.graph.clone()) }
    }
}

/// `--out`, then the config, then `GAUSSLEARN_OUT`, then `gausslearn-out`.
pub fn resolve_output_dir(flag: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("gausslearn-out"))
}

fn build_graph(spec: &GraphSpec, seed: u64) -> Result<InteractionGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match spec {
        GraphSpec::Edgeless { m } => InteractionGraph::edgeless(*m),
        GraphSpec::Path { m } => InteractionGraph::path(*m),
        GraphSpec::Cycle { m } => InteractionGraph::cycle(*m),
        GraphSpec::Tree { m, max_deg } => InteractionGraph::random_tree(*m, *max_deg, &mut rng),
        GraphSpec::BoundedDegree { m, max_deg, p } => InteractionGraph::random_bounded_degree(*m, *max_deg, *p, &mut rng),
        GraphSpec::Edges { m, edges } => InteractionGraph::from_edges(*m, edges)?,
    })
}

fn instance(ctx: &Ctx<'_>, seed: u64, bounds: &StateBounds) -> Result<Instance> {
    let tol = &ctx.cfg.tolerances;
    match (&ctx.cfg.state, &ctx.state_file) {
        (StateSpec::Random { graph }, _) => {
            let graph = build_graph(graph, seed)?;
            let st = random_state(&graph, bounds, seed, tol)?;
            Ok(Instance { state: st.state, h: st.h.h, graph })
        }
        (_, Some(file)) => {
            let (t, v, h) = file.parts()?;
            let state = GaussianState::new(t, v, tol)?;
            let h = match h {
                Some(h) => h,
                None => gaussian::h_from_v(&state.v, tol)?,
            };
            let graph = graph_of_hamiltonian(&h, tol.zero_tol);
            Ok(Instance { state, h, graph })
        }
        _ => Err(anyhow!("state file was not resolved")),
    }
}

fn apply_overrides(p: &mut HamLearnParams, o: &Overrides, delta_deg: usize, m: usize) {
    if !o.any() {
        return;
    }
    p.mode = ParamMode::Override;
    if let Some(l) = o.l {
        p.l = l;
        if p.xi.is_some() {
            p.xi = Some(learning::neighborhood_size_bound(delta_deg, l, m));
        }
    }
    if let Some(z) = o.zeta {
        p.zeta = z;
    }
    if let Some(e) = o.eta {
        p.eta = Some(e);
    }
    if let Some(x) = o.xi {
        p.xi = Some(x);
    }
}

fn bit_identical(a: &RMat, b: &RMat) -> bool {
    a.shape() == b.shape() && a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn run_sample(ctx: &Ctx<'_>, seed: u64) -> Result<RunOutput> {
    let cfg = ctx.cfg;
    let inst = instance(ctx, seed, &cfg.bounds)?;
    let batch = heterodyne_sample(&inst.state, cfg.samples, seed, 0)?;
    let name = format!("samples_seed{seed}.csv");
    let path = ctx.dir.join(&name);
    write_samples_csv(&path, &batch)?;
    let back = read_samples_csv(&path, seed, 0)?;
    let mut out = RunOutput::default();
    out.property("reload_bit_exact", bit_identical(&back.data, &batch.data) && back.m == batch.m);
    out.metric("n", batch.n() as f64);
    out.result = json!({
        "file": name,
        "n": batch.n(),
        "m": batch.m,
        "seed": batch.seed,
        "stream_id": batch.stream_id,
        "state": StateFile::from_state(&inst.state, Some(&inst.h)),
    });
    Ok(out)
}

fn run_estimate(ctx: &Ctx<'_>, seed: u64) -> Result<RunOutput> {
    let cfg = ctx.cfg;
    let tol = &cfg.tolerances;
    let inst = instance(ctx, seed, &cfg.bounds)?;
    let batch = heterodyne_sample(&inst.state, cfg.samples, seed, 0)?;
    let est = estimation::empirical_estimates(&batch)?;
    let m = inst.state.m();
    let eps_n = estimation::entrywise_precision(est.n_used, covariance_diag_bound(&cfg.bounds), cfg.bounds.t_max, cfg.delta, m)?;
    let proj = estimation::project_covariance(&est.v_hat_raw, eps_n, tol)?;
    let (dt, dv_raw) = estimation::max_entry_errors(&est, &inst.state.t, &inst.state.v);
    let dv = max_abs(&(&proj.value - &inst.state.v));
    let mut out = RunOutput::default();
    let shift = max_abs(&(&proj.value - &est.v_hat_raw));
    out.property("projection_within_eps", shift <= eps_n * (1.0 + 1e-9) + 1e-12);
    let floor = -10.0 * tol.proj_tol * (1.0 + max_abs(&est.v_hat_raw));
    out.property("projection_bona_fide", gaussian::uncertainty_min_eig(&proj.value) >= floor);
    out.metric("eps_entry", eps_n);
    out.metric("t_error_max", dt);
    out.metric("v_error_max_raw", dv_raw);
    out.metric("v_error_max", dv);
    out.result = json!({
        "n": est.n_used,
        "eps_entry": eps_n,
        "t_hat": est.t_hat.iter().copied().collect::<Vec<f64>>(),
        "v_hat_raw": MatrixJson::from_mat(&est.v_hat_raw),
        "v_tilde": MatrixJson::from_mat(&proj.value),
        "projection_iterations": proj.iterations,
        "within_eps": dt <= eps_n && dv <= 2.0 * eps_n,
    });
    Ok(out)
}

/// Learning parameters with any overrides applied.
pub fn hamiltonian_params(cfg: &ExperimentConfig, m: usize) -> gausslearn_core::Result<HamLearnParams> {
    let mut p = learning::select_params_bounded_degree(cfg.eps, &cfg.bounds, m)?;
    apply_overrides(&mut p, &cfg.overrides, cfg.bounds.delta_deg, m);
    Ok(p)
}

pub fn graph_params(cfg: &ExperimentConfig, m: usize) -> gausslearn_core::Result<HamLearnParams> {
    let bounds = StateBounds { kappa: cfg.kappa(), ..cfg.bounds };
    let mut p = learning::select_params_graph(cfg.kappa(), &bounds, m)?;
    apply_overrides(&mut p, &cfg.overrides, cfg.bounds.delta_deg, m);
    Ok(p)
}

fn run_learn_hamiltonian(ctx: &Ctx<'_>, seed: u64) -> Result<RunOutput> {
    let cfg = ctx.cfg;
    let tol = &cfg.tolerances;
    let inst = instance(ctx, seed, &cfg.bounds)?;
    let m = inst.state.m();
    let params = hamiltonian_params(cfg, m)?;
    let projection = cfg.project_tau.map(|tau| HamiltonianProjection { eps: cfg.eps, tau });
    let truth = inst.truth();
    let mut out = RunOutput::default();
    let (report, zeta_used) = match cfg.noise {
        Some(ns) => {
            let zeta = ns.zeta.unwrap_or(params.zeta);
            let v_hat = inject_noise(&inst.state.v, zeta, ns.kind, seed ^ NOISE_SALT);
            let src = CovarianceSource::Noisy { v_hat: &v_hat, t_hat: None, zeta };
            (learning::learn_hamiltonian(src, &inst.graph, &params, projection, Some(&truth), tol)?, zeta)
        }
        None => {
            let batch = heterodyne_sample(&inst.state, cfg.samples, seed, 0)?;
            let r = learning::learn_hamiltonian(CovarianceSource::Samples(&batch), &inst.graph, &params, projection, Some(&truth), tol)?;
            (r, f64::NAN)
        }
    };
    let diag = report.diagnostics.clone().unwrap_or_default();
    let err = diag.h_error_max.unwrap_or(f64::NAN);
    if cfg.noise.is_some() {
        out.property("h_error_within_eps", err <= cfg.eps);
    }
    let b = &cfg.bounds;
    let n_required = estimation::sample_size_theorem(b.s, b.beta_min, b.t_max, params.zeta, cfg.delta, m)?;
    out.metric("h_error_max", err);
    out.metric("h_error_op", diag.h_error_op.unwrap_or(f64::NAN));
    out.metric("l", params.l as f64);
    out.metric("zeta", params.zeta);
    out.result = json!({
        "noise_mode": cfg.noise.is_some(),
        "zeta_injected": zeta_used,
        "n_required": n_required,
        "report": LearnReportJson::from(&report),
    });
    Ok(out)
}

fn run_learn_graph(ctx: &Ctx<'_>, seed: u64) -> Result<RunOutput> {
    let cfg = ctx.cfg;
    let tol = &cfg.tolerances;
    let kappa = cfg.kappa();
    let bounds = StateBounds { kappa, ..cfg.bounds };
    let inst = instance(ctx, seed, &bounds)?;
    let m = inst.state.m();
    let params = graph_params(cfg, m)?;
    let (xi, eta) = (params.xi.unwrap_or(m), params.eta.unwrap_or(f64::NAN));
    let v_hat = match cfg.noise {
        Some(ns) => inject_noise(&inst.state.v, ns.zeta.unwrap_or(params.zeta), ns.kind, seed ^ NOISE_SALT),
        None => estimation::empirical_estimates(&heterodyne_sample(&inst.state, cfg.samples, seed, 0)?)?.v_hat_raw,
    };
    let options = GraphSearchOptions { budget: cfg.search_budget, exhaustive: false };
    let mut report = learning::learn_graph(&v_hat, xi, eta, kappa, &options, Some(&inst.truth()), tol)?;
    report.params = Some(params);
    let h_hat = report.h_hat.as_ref().expect("graph report carries h_hat");
    let edges = report.edges.clone().unwrap_or_default();
    let mut out = RunOutput::default();
    out.property("soundness", edges.iter().all(|&(i, j)| block_max(h_hat, i, j) >= kappa / 2.0));
    let diag = report.diagnostics.clone().unwrap_or_default();
    let search = report.search.clone().unwrap_or_default();
    out.metric("edges_exact", f64::from(u8::from(diag.edges_exact.unwrap_or(false))));
    out.metric("missing_edges", diag.missing_edges.unwrap_or(0) as f64);
    out.metric("extra_edges", diag.extra_edges.unwrap_or(0) as f64);
    out.metric("evaluations", search.evaluations as f64);
    out.metric("predicted_evaluations", search.predicted);
    out.result = json!({ "true_edges": inst.graph.edges(), "report": LearnReportJson::from(&report) });
    Ok(out)
}

fn run_learn_trace(ctx: &Ctx<'_>, seed: u64) -> Result<RunOutput> {
    let cfg = ctx.cfg;
    let inst = instance(ctx, seed, &cfg.bounds)?;
    let batch = heterodyne_sample(&inst.state, cfg.samples, seed, 0)?;
    let report = learning::learn_trace_distance(&batch, cfg.eps, cfg.delta, &cfg.bounds, Some(&inst.truth()), &cfg.tolerances)?;
    let mut out = RunOutput::default();
    let trace = report.trace.clone().expect("trace report carries a certificate");
    let diag = report.diagnostics.clone().unwrap_or_default();
    out.metric("eps_entry", trace.eps_entry);
    out.metric("bound_certified", trace.bound_certified);
    out.metric("pinsker_trace_bound", diag.pinsker_trace_bound.unwrap_or(f64::NAN));
    out.result = json!({ "report": LearnReportJson::from(&report) });
    Ok(out)
}

fn run_verify_bounds(ctx: &Ctx<'_>, seed: u64) -> Result<RunOutput> {
    let cfg = ctx.cfg;
    let tol = &cfg.tolerances;
    let b = &cfg.bounds;
    let range = FormRange { s: b.s, d_lo: b.beta_min, d_hi: b.beta_max, modes: &[1, 2, 3, 4] };
    let certs: Vec<BoundCertificate> = sweeps::continuity_sweep(seed, cfg.instances, &range, tol)?;
    let brackets = sweeps::bracket_sweep(seed ^ NOISE_SALT, cfg.instances, &range, tol)?;
    let name = format!("certificates_seed{seed}.jsonl");
    let mut lines = String::new();
    for c in &certs {
        lines.push_str(&serde_json::to_string(c)?);
        lines.push('\n');
    }
    std::fs::write(ctx.dir.join(&name), lines).with_context(|| format!("writing {name}"))?;
    let tallies = sweeps::tally(&certs);
    let worst_bracket = brackets.iter().map(|x| x.abs_error / (1.0 + x.symmetric_entropy.abs())).fold(0.0, f64::max);
    let mut out = RunOutput::default();
    out.property("zero_violations", certs.iter().all(|c| !c.is_violation()));
    out.property("bracket_identity", worst_bracket <= 1e-8);
    for t in &tallies {
        out.metric(&format!("{}_hypothesis_ok", t.bound_name), t.hypothesis_ok as f64);
        out.metric(&format!("{}_violations", t.bound_name), t.violations as f64);
    }
    out.metric("bracket_worst_relative_error", worst_bracket);
    out.result = json!({ "file": name, "tallies": tallies, "bracket_pairs": brackets.len(), "bracket_worst_relative_error": worst_bracket });
    Ok(out)
}

fn run_benchmark(ctx: &Ctx<'_>, seed: u64) -> Result<RunOutput> {
    let cfg = ctx.cfg;
    let inst = instance(ctx, seed, &cfg.bounds)?;
    let mut out = RunOutput::default();
    let mut errors = Vec::with_capacity(cfg.n_grid.len());
    for (k, &n) in cfg.n_grid.iter().enumerate() {
        let mut reps = Vec::with_capacity(cfg.replicates);
        for r in 0..cfg.replicates {
            let batch = heterodyne_sample(&inst.state, n, seed, (k * cfg.replicates + r) as u64)?;
            let est = estimation::empirical_estimates(&batch)?;
            reps.push(estimation::max_entry_errors(&est, &inst.state.t, &inst.state.v).1);
        }
        let dv = median(&mut reps);
        out.metric(&format!("v_error_max_n{n}"), dv);
        errors.push(dv);
    }
    out.result = json!({ "n_grid": cfg.n_grid, "v_error_max": errors });
    Ok(out)
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn benchmark_aggregate(cfg: &ExperimentConfig, runs: &[RunReport], dir: &Path) -> Result<(Value, Vec<Property>)> {
    let mut w = csv::Writer::from_path(dir.join("benchmark.csv"))?;
    w.write_record(["n", "median_error", "min_error", "max_error", "seeds"])?;
    let mut medians = Vec::with_capacity(cfg.n_grid.len());
    for (k, &n) in cfg.n_grid.iter().enumerate() {
        let mut errs: Vec<f64> = runs.iter().filter(|r| r.error.is_none()).map(|r| r.metrics[k].value).collect();
        if errs.is_empty() {
            continue;
        }
        let (lo, hi) = (errs.iter().copied().fold(f64::INFINITY, f64::min), errs.iter().copied().fold(0.0, f64::max));
        let med = median(&mut errs);
        w.write_record([n.to_string(), format!("{med:.16e}"), format!("{lo:.16e}"), format!("{hi:.16e}"), errs.len().to_string()])?;
        medians.push(med);
    }
    w.flush()?;
    let monotone = medians.len() == cfg.n_grid.len() && medians.windows(2).all(|p| p[1] <= p[0]);
    let ns: Vec<f64> = cfg.n_grid.iter().map(|&n| n as f64).collect();
    let slope = if medians.len() >= 2 && medians.len() == ns.len() { loglog_slope(&ns, &medians) } else { f64::NAN };
    let props = vec![Property { name: "monotone_median".into(), held: monotone }];
    Ok((json!({ "file": "benchmark.csv", "median_error": medians, "loglog_slope": slope }), props))
}

fn run_seed(ctx: &Ctx<'_>, seed: u64) -> RunReport {
    let res = match ctx.cfg.task {
        Task::Sample => run_sample(ctx, seed),
        Task::Estimate => run_estimate(ctx, seed),
        Task::LearnHamiltonian => run_learn_hamiltonian(ctx, seed),
        Task::LearnGraph => run_learn_graph(ctx, seed),
        Task::LearnTrace => run_learn_trace(ctx, seed),
        Task::VerifyBounds => run_verify_bounds(ctx, seed),
        Task::Benchmark => run_benchmark(ctx, seed),
    };
    match res {
        Ok(o) => RunReport { seed, status: "ok".into(), error: None, properties: o.properties, metrics: o.metrics, result: o.result },
        Err(e) => RunReport {
            seed,
            status: "error".into(),
            error: Some(ErrorJson::from_anyhow(&e)),
            properties: Vec::new(),
            metrics: Vec::new(),
            result: Value::Null,
        },
    }
}

fn write_summary(path: &Path, runs: &[RunReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["seed", "status", "metric", "value"])?;
    for r in runs {
        match &r.error {
            Some(e) => w.write_record([r.seed.to_string(), r.status.clone(), e.kind.clone(), String::new()])?,
            None => {
                for m in &r.metrics {
                    w.write_record([r.seed.to_string(), r.status.clone(), m.name.clone(), format!("{:.16e}", m.value)])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Validates the config, runs every seed (in parallel, at most `threads` workers) and
/// writes `report.json`, `summary.csv`, `metadata.json` and task artifacts to `dir`.
/// Config errors come back as [`ConfigError`] inside the `anyhow` error.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome> {
    let started = SystemTime::now();
    let clock = Instant::now();
    cfg.validate()?;
    let mut seen = cfg.seeds.clone();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != cfg.seeds.len() {
        return Err(ConfigError::new("seeds must be distinct".into()).into());
    }
    let state_file = match &cfg.state {
        StateSpec::Inline(s) => Some(s.clone()),
        StateSpec::File { path } => Some(StateFile::load(path).map_err(|e| ConfigError::new(format!("{e:#}")))?),
        StateSpec::Random { .. } => None,
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let threads = cfg.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let ctx = Ctx { cfg, state_file, dir };
    let timed: Vec<(RunReport, f64)> = pool.install(|| {
        cfg.seeds
            .par_iter()
            .map(|&seed| {
                let t = Instant::now();
                let r = run_seed(&ctx, seed);
                (r, t.elapsed().as_secs_f64())
            })
            .collect()
    });
    let (runs, secs): (Vec<RunReport>, Vec<f64>) = timed.into_iter().unzip();
    let (aggregate, aggregate_properties) = match cfg.task {
        Task::Benchmark => benchmark_aggregate(cfg, &runs, dir)?,
        _ => (Value::Null, Vec::new()),
    };
    let failed_runs = runs.iter().filter(|r| r.error.is_some()).count();
    let failed_properties = runs.iter().flat_map(|r| &r.properties).chain(&aggregate_properties).filter(|p| !p.held).count();
    let exit_code = if failed_runs + failed_properties == 0 { EXIT_OK } else { EXIT_PIPELINE };
    let mut echo = cfg.clone();
    echo.output_dir = None;
    echo.threads = None;
    let report = ExperimentReport {
        task: cfg.task.name().into(),
        config: echo,
        runs,
        aggregate,
        aggregate_properties,
        summary: Summary { runs: cfg.seeds.len(), failed_runs, failed_properties, exit_code },
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(dir.join(REPORT_FILE), text).context("writing report")?;
    write_summary(&dir.join(SUMMARY_FILE), &report.runs)?;
    let metadata = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "task": cfg.task.name(),
        "threads": threads,
        "output_dir": dir.display().to_string(),
        "started_unix_s": started.duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64()),
        "total_seconds": clock.elapsed().as_secs_f64(),
        "run_seconds": cfg.seeds.iter().zip(&secs).map(|(s, t)| json!({ "seed": s, "seconds": t })).collect::<Vec<_>>(),
    });
    std::fs::write(dir.join(METADATA_FILE), serde_json::to_string_pretty(&metadata)? + "\n").context("writing metadata")?;
    Ok(Outcome { exit_code, dir: dir.to_path_buf(), report })
}

/// Exit status for an error returned by [`run_experiment`].
pub fn exit_code_for(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<ConfigError>().is_some() {
        EXIT_CONFIG
    } else {
        EXIT_PIPELINE
    }
}
