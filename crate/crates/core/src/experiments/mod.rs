//! Reproducible benchmarks: replicated MSE comparisons between estimators,
//! the contraction diagnostic over growing `n`, and the image
//! reconstruction pipeline.
//!
//! Every random quantity is seeded through [`derive_seed`] from the master
//! seed, the replication index and a task tag, so results do not depend on
//! how replications are scheduled across worker threads.

mod image;

pub use image::{reconstruct_image, ImageGrid, Reconstruction};

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{lattice4_adjacency, random_regular_edges, scaled_adjacency, CouplingMatrix};
use crate::error::{param_err, Result};
use crate::model::{ModelParams, SpinConfiguration};
use crate::pmle::{pmle_fit, PmleConfig};
use crate::rng::derive_seed;
use crate::sampler::{mh_sample, MhConfig};
use crate::vb::{bbvi_fit, sample_q, BbviConfig, Family, VariationalParams};

/// Desk-scale Metropolis chain length.
pub const DESK_ITERATIONS: u64 = 200_000;
/// Desk-scale number of replications.
pub const DESK_REPLICATIONS: usize = 50;
/// Replications used by the full-scale setting.
pub const FULL_REPLICATIONS: usize = 100;

const TAG_GRAPH: u64 = 0;
const TAG_DATA: u64 = 1;
const TAG_QDRAWS: u64 = 2;
/// Method `k` of a configuration uses tag `TAG_METHOD0 + k`.
const TAG_METHOD0: u64 = 3;
const TAG_CELL: u64 = 63;
const MAX_METHODS: usize = (TAG_CELL - TAG_METHOD0) as usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GraphSpec {
    /// Scaled adjacency of a random `d`-regular graph on `n` vertices.
    Regular { n: usize, d: usize },
    /// Scaled adjacency of a `rows x cols` four-neighbour lattice.
    Lattice { rows: usize, cols: usize },
}

impl GraphSpec {
    pub fn n(&self) -> usize {
        match *self {
            GraphSpec::Regular { n, .. } => n,
            GraphSpec::Lattice { rows, cols } => rows * cols,
        }
    }

    /// Builds the coupling matrix; `seed` only matters for random graphs.
    pub fn build(&self, seed: u64) -> Result<CouplingMatrix> {
        match *self {
            GraphSpec::Regular { n, d } => scaled_adjacency(&random_regular_edges(n, d, seed)?),
            GraphSpec::Lattice { rows, cols } => lattice4_adjacency(rows, cols),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum MethodSpec {
    Pmle,
    Mf { s: usize },
    Bn { s: usize },
}

impl MethodSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Pmle => "pmle",
            MethodSpec::Mf { .. } | MethodSpec::Bn { .. } => "vb",
        }
    }

    pub fn family(&self) -> Option<Family> {
        match self {
            MethodSpec::Pmle => None,
            MethodSpec::Mf { .. } => Some(Family::Mf),
            MethodSpec::Bn { .. } => Some(Family::Bn),
        }
    }

    pub fn mc_samples(&self) -> Option<usize> {
        match *self {
            MethodSpec::Pmle => None,
            MethodSpec::Mf { s } | MethodSpec::Bn { s } => Some(s),
        }
    }
}

/// Chain settings shared by every replication; each replication derives its
/// own seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerSettings {
    pub iterations: u64,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            iterations: DESK_ITERATIONS,
        }
    }
}

/// One cell of an MSE benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub theta0: ModelParams,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub sampler: SamplerSettings,
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub master_seed: u64,
    /// Template for VB fits; family, sample size and seed are set per method.
    #[serde(default)]
    pub bbvi: BbviConfig,
    #[serde(default)]
    pub pmle: PmleConfig,
    /// Worker threads; `None` uses all available cores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn default_replications() -> usize {
    DESK_REPLICATIONS
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(param_err("replications must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(param_err("at least one method is required"));
        }
        if self.methods.len() > MAX_METHODS {
            return Err(param_err(format!("at most {MAX_METHODS} methods per cell")));
        }
        if self.methods.iter().any(|m| m.mc_samples().is_some_and(|s| s < 2)) {
            return Err(param_err("VB methods need at least 2 Monte Carlo samples"));
        }
        if self.sampler.iterations == 0 {
            return Err(param_err("sampler iterations must be positive"));
        }
        ModelParams::new(self.theta0.beta, self.theta0.b_field)?;
        self.bbvi.validate()
    }

    /// Replications and chain length of the full-scale runs.
    pub fn full_scale(mut self) -> Self {
        self.replications = FULL_REPLICATIONS;
        self.sampler.iterations = MhConfig::FULL_ITERATIONS;
        self
    }
}

/// Outcome of one method on one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub estimate: std::result::Result<ModelParams, String>,
    pub wall_time: f64,
}

/// Summary of one method over all replications of a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub method: String,
    pub family: String,
    pub s: Option<usize>,
    pub n: usize,
    pub d: usize,
    pub beta0: f64,
    pub b0: f64,
    pub replications: usize,
    pub failures: usize,
    pub mse: f64,
    pub se_mse: f64,
    pub mean_beta_hat: f64,
    pub mean_b_hat: f64,
    pub wall_time_total: f64,
}

pub const MSE_CSV_HEADER: &str =
    "method,family,s,n,d,beta0,b0,replications,failures,mse,se_mse,mean_beta_hat,mean_b_hat,wall_time_total";

impl MseRow {
    fn sort_key(&self) -> (usize, usize, String, String, Option<usize>) {
        (self.n, self.d, self.method.clone(), self.family.clone(), self.s)
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.method,
            self.family,
            self.s.map(|s| s.to_string()).unwrap_or_default(),
            self.n,
            self.d,
            self.beta0,
            self.b0,
            self.replications,
            self.failures,
            self.mse,
            self.se_mse,
            self.mean_beta_hat,
            self.mean_b_hat,
            self.wall_time_total
        )
    }
}

pub fn write_mse_csv<W: Write>(rows: &[MseRow], mut out: W) -> Result<()> {
    writeln!(out, "{MSE_CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

/// Mean of per-replicate squared errors.
pub fn mse(estimates: &[ModelParams], truth: &ModelParams) -> f64 {
    estimates.iter().map(|e| e.squared_error(truth)).sum::<f64>() / estimates.len() as f64
}

/// Jackknife standard error of the sample mean of `xs`; zero for fewer than two values.
pub fn jackknife_se(xs: &[f64]) -> f64 {
    let k = xs.len();
    if k < 2 {
        return 0.0;
    }
    let kf = k as f64;
    let total: f64 = xs.iter().sum();
    let loo: Vec<f64> = xs.iter().map(|x| (total - x) / (kf - 1.0)).collect();
    let loo_mean = loo.iter().sum::<f64>() / kf;
    let ss: f64 = loo.iter().map(|v| (v - loo_mean).powi(2)).sum();
    ((kf - 1.0) / kf * ss).sqrt()
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| param_err(format!("cannot start worker pool: {e}")))
}

/// Fits every configured method to one observed configuration.
pub fn run_replication(
    a: &CouplingMatrix,
    x: &SpinConfiguration,
    cfg: &ExperimentConfig,
    rep: usize,
) -> Vec<MethodOutcome> {
    cfg.methods
        .iter()
        .enumerate()
        .map(|(k, method)| {
            let start = Instant::now();
            let estimate = match method {
                MethodSpec::Pmle => pmle_fit(a, x, &cfg.pmle).map(|r| r.theta),
                MethodSpec::Mf { s } | MethodSpec::Bn { s } => {
                    let fit_cfg = BbviConfig {
                        family: method.family().unwrap_or(Family::Mf),
                        mc_samples: *s,
                        seed: derive_seed(cfg.master_seed, rep as u64, TAG_METHOD0 + k as u64),
                        ..cfg.bbvi.clone()
                    };
                    bbvi_fit(a, x, &fit_cfg).map(|f| f.theta_hat.mc)
                }
            };
            MethodOutcome {
                estimate: estimate.map_err(|e| e.to_string()),
                wall_time: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

/// Aggregates the outcomes of one method; failed replications are counted
/// and excluded from the error statistics.
pub fn summarise(method: &MethodSpec, graph: &GraphSpec, a: &CouplingMatrix, theta0: &ModelParams, outcomes: &[&MethodOutcome]) -> MseRow {
    let ok: Vec<ModelParams> = outcomes.iter().filter_map(|o| o.estimate.clone().ok()).collect();
    let errs: Vec<f64> = ok.iter().map(|e| e.squared_error(theta0)).collect();
    let k = ok.len() as f64;
    let (mse, mean_beta_hat, mean_b_hat) = if ok.is_empty() {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        (
            errs.iter().sum::<f64>() / k,
            ok.iter().map(|e| e.beta).sum::<f64>() / k,
            ok.iter().map(|e| e.b_field).sum::<f64>() / k,
        )
    };
    let d = match *graph {
        GraphSpec::Regular { d, .. } => d,
        GraphSpec::Lattice { .. } => a.max_degree(),
    };
    MseRow {
        method: method.name().to_string(),
        family: method.family().map(|f| f.name().to_string()).unwrap_or_default(),
        s: method.mc_samples(),
        n: graph.n(),
        d,
        beta0: theta0.beta,
        b0: theta0.b_field,
        replications: outcomes.len(),
        failures: outcomes.len() - ok.len(),
        mse,
        se_mse: jackknife_se(&errs),
        mean_beta_hat,
        mean_b_hat,
        wall_time_total: outcomes.iter().map(|o| o.wall_time).sum(),
    }
}

/// Runs one benchmark cell: `R` fresh Metropolis draws at `theta0`, every
/// method fitted to each draw, and one [`MseRow`] per method.
pub fn run_mse_experiment(cfg: &ExperimentConfig) -> Result<Vec<MseRow>> {
    cfg.validate()?;
    let a = cfg.graph.build(derive_seed(cfg.master_seed, 0, TAG_GRAPH))?;
    let pool = pool(cfg.workers)?;
    let per_rep: Vec<Result<Vec<MethodOutcome>>> = pool.install(|| {
        (0..cfg.replications)
            .into_par_iter()
            .map(|rep| {
                let mh = MhConfig::new(cfg.sampler.iterations, derive_seed(cfg.master_seed, rep as u64, TAG_DATA));
                let x = mh_sample(&cfg.theta0, &a, &mh)?;
                Ok(run_replication(&a, &x, cfg, rep))
            })
            .collect()
    });
    let per_rep = per_rep.into_iter().collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<MseRow> = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let outcomes: Vec<&MethodOutcome> = per_rep.iter().map(|r| &r[k]).collect();
            summarise(m, &cfg.graph, &a, &cfg.theta0, &outcomes)
        })
        .collect();
    rows.sort_by_key(MseRow::sort_key);
    Ok(rows)
}

/// Runs several cells, each under its own master seed, and returns all rows
/// in a stable order.
pub fn run_mse_grid(cells: &[ExperimentConfig]) -> Result<Vec<MseRow>> {
    let mut rows = Vec::new();
    for cfg in cells {
        rows.extend(run_mse_experiment(cfg)?);
    }
    rows.sort_by(|a, b| {
        a.sort_key()
            .cmp(&b.sort_key())
            .then(a.beta0.total_cmp(&b.beta0))
            .then(a.b0.total_cmp(&b.b0))
    });
    Ok(rows)
}

/// Settings for [`contraction_diagnostic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionConfig {
    pub ns: Vec<usize>,
    pub d: usize,
    pub theta0: ModelParams,
    #[serde(default = "default_contraction_reps")]
    pub replications: usize,
    #[serde(default)]
    pub sampler: SamplerSettings,
    #[serde(default = "default_family")]
    pub family: Family,
    #[serde(default)]
    pub bbvi: BbviConfig,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    /// Draws from each fitted `q` used for the ball masses and mean distance.
    #[serde(default = "default_q_draws")]
    pub q_draws: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn default_contraction_reps() -> usize {
    30
}

fn default_family() -> Family {
    Family::Mf
}

fn default_radii() -> Vec<f64> {
    vec![0.1, 0.2, 0.4]
}

fn default_q_draws() -> usize {
    2000
}

impl ContractionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ns.len() < 2 {
            return Err(param_err("need at least two values of n"));
        }
        if self.replications == 0 || self.q_draws == 0 {
            return Err(param_err("replications and q_draws must be positive"));
        }
        if self.radii.is_empty() || self.radii.iter().any(|r| !(*r > 0.0)) {
            return Err(param_err("radii must be positive"));
        }
        ModelParams::new(self.theta0.beta, self.theta0.b_field)?;
        self.bbvi.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionRow {
    pub n: usize,
    pub d: usize,
    pub replications: usize,
    pub failures: usize,
    /// Mean over replications of `E_q ||theta - theta0||`.
    pub mean_distance: f64,
    pub se_distance: f64,
    /// Mean over replications of `Q(||theta - theta0|| > r)`, one per radius.
    pub outside: Vec<f64>,
    pub wall_time_total: f64,
}

/// Mass outside each ball around `theta0` and the mean distance to
/// `theta0`, both estimated from `draws` samples of `q`.
pub fn ball_masses(
    nu: &VariationalParams,
    theta0: &ModelParams,
    radii: &[f64],
    draws: usize,
    seed: u64,
) -> (Vec<f64>, f64) {
    let sample = sample_q(nu, draws, seed);
    let dist: Vec<f64> = sample.iter().map(|t| t.distance(theta0)).collect();
    let k = draws as f64;
    let outside = radii
        .iter()
        .map(|&r| dist.iter().filter(|&&v| v > r).count() as f64 / k)
        .collect();
    (outside, dist.iter().sum::<f64>() / k)
}

/// Fits `q*` on `replications` fresh draws for every `n` and reports how
/// its mass concentrates around `theta0`.
pub fn contraction_diagnostic(cfg: &ContractionConfig) -> Result<Vec<ContractionRow>> {
    cfg.validate()?;
    let pool = pool(cfg.workers)?;
    let mut rows = Vec::with_capacity(cfg.ns.len());
    for (cell, &n) in cfg.ns.iter().enumerate() {
        let master = derive_seed(cfg.master_seed, cell as u64, TAG_CELL);
        let a = GraphSpec::Regular { n, d: cfg.d }.build(derive_seed(master, 0, TAG_GRAPH))?;
        type Outcome = (std::result::Result<(Vec<f64>, f64), String>, f64);
        let per_rep: Vec<Result<Outcome>> = pool.install(|| {
            (0..cfg.replications)
                .into_par_iter()
                .map(|rep| {
                    let r = rep as u64;
                    let mh = MhConfig::new(cfg.sampler.iterations, derive_seed(master, r, TAG_DATA));
                    let x = mh_sample(&cfg.theta0, &a, &mh)?;
                    let start = Instant::now();
                    let fit_cfg = BbviConfig {
                        family: cfg.family,
                        seed: derive_seed(master, r, TAG_METHOD0),
                        ..cfg.bbvi.clone()
                    };
                    let res = bbvi_fit(&a, &x, &fit_cfg)
                        .map(|f| {
                            let seed = derive_seed(master, r, TAG_QDRAWS);
                            ball_masses(&f.nu_star, &cfg.theta0, &cfg.radii, cfg.q_draws, seed)
                        })
                        .map_err(|e| e.to_string());
                    Ok((res, start.elapsed().as_secs_f64()))
                })
                .collect()
        });
        let per_rep = per_rep.into_iter().collect::<Result<Vec<_>>>()?;
        let ok: Vec<&(Vec<f64>, f64)> = per_rep.iter().filter_map(|(r, _)| r.as_ref().ok()).collect();
        let k = ok.len() as f64;
        let dists: Vec<f64> = ok.iter().map(|o| o.1).collect();
        let outside = (0..cfg.radii.len())
            .map(|j| ok.iter().map(|o| o.0[j]).sum::<f64>() / k)
            .collect();
        rows.push(ContractionRow {
            n,
            d: cfg.d,
            replications: cfg.replications,
            failures: cfg.replications - ok.len(),
            mean_distance: dists.iter().sum::<f64>() / k,
            se_distance: jackknife_se(&dists),
            outside,
            wall_time_total: per_rep.iter().map(|(_, t)| t).sum(),
        });
    }
    Ok(rows)
}

pub fn write_contraction_csv<W: Write>(rows: &[ContractionRow], radii: &[f64], mut out: W) -> Result<()> {
    let radius_cols: Vec<String> = radii.iter().map(|r| format!("outside_{r}")).collect();
    writeln!(
        out,
        "n,d,replications,failures,mean_distance,se_distance,{},wall_time_total",
        radius_cols.join(",")
    )?;
    for r in rows {
        let masses: Vec<String> = r.outside.iter().map(|m| m.to_string()).collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n,
            r.d,
            r.replications,
            r.failures,
            r.mean_distance,
            r.se_distance,
            masses.join(","),
            r.wall_time_total
        )?;
    }
    Ok(())
}
