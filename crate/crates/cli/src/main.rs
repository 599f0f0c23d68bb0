use std::error::Error as StdError;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use isingvb::coupling::{assumption_report, lattice4_adjacency, random_regular_edges, scaled_adjacency};
use isingvb::experiments::{
    contraction_diagnostic, reconstruct_image, run_mse_grid, write_contraction_csv, write_mse_csv,
    ContractionConfig, ExperimentConfig, ImageGrid,
};
use isingvb::pmle::{pmle_fit, PmleConfig};
use isingvb::sampler::{mh_sample, MhConfig};
use isingvb::vb::{bbvi_fit, BbviConfig, ElboPoint, Family, PointEstimate, StopReason, VariationalParams};
use isingvb::{CouplingMatrix, ModelParams, SpinConfiguration};

type CliResult<T> = Result<T, Box<dyn StdError>>;

/// Bayesian estimation of two-parameter Ising models from one observed configuration.
#[derive(Parser, Debug)]
#[command(name = "isingvb", version, about)]
struct Cli {
    /// Write 0 for every wall-clock field so that outputs are byte-reproducible.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate or inspect coupling matrices.
    #[command(subcommand)]
    Coupling(CouplingCommand),
    /// Draw one configuration with a Metropolis chain.
    Sample(SampleArgs),
    /// Fit a variational approximation to the pseudo-posterior.
    Fit(FitArgs),
    /// Pseudo-maximum-likelihood estimate.
    Pmle(PmleArgs),
    /// Replicated MSE benchmark; writes `mse.csv`.
    Bench(BenchArgs),
    /// Concentration of the fitted posterior as n grows; writes `contraction.csv`.
    Contraction(ConfigArgs),
    /// Fit an image on the lattice and regenerate it from the estimate.
    Reconstruct(ConfigArgs),
}

#[derive(Subcommand, Debug)]
enum CouplingCommand {
    /// Scaled adjacency of a random d-regular graph.
    GenRegular {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Scaled adjacency of a four-neighbour lattice.
    GenLattice {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the assumption diagnostics of a coupling matrix as JSON.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    coupling: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long = "b", allow_hyphen_values = true)]
    b_field: f64,
    #[arg(long, default_value_t = MhConfig::FULL_ITERATIONS)]
    iters: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    coupling: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "mf")]
    family: Family,
    #[arg(long, default_value_t = 200)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_iters: Option<usize>,
    /// JSON file with further `BbviConfig` fields; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    elbo_trace: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PmleArgs {
    #[arg(long)]
    coupling: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Override the worker count of the config.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// 100 replications with 10^6-step chains instead of the desk-scale defaults.
    #[arg(long)]
    full_scale: bool,
}

#[derive(Serialize)]
struct FitReport<'a> {
    family: Family,
    nu_star: &'a VariationalParams,
    theta_hat: PointEstimate,
    iterations: usize,
    stop_reason: StopReason,
    final_elbo: Option<f64>,
    wall_time: f64,
}

#[derive(Serialize)]
struct PmleReport {
    theta: ModelParams,
    iterations: usize,
    score_norm: f64,
    boundary: bool,
    log_lik: f64,
}

/// A benchmark config file holds one cell or a list of cells.
#[derive(Deserialize)]
#[serde(untagged)]
enum BenchConfig {
    One(Box<ExperimentConfig>),
    Many(Vec<ExperimentConfig>),
}

#[derive(Deserialize)]
struct ReconstructConfig {
    /// PBM image; relative paths resolve against the config file.
    input: PathBuf,
    #[serde(default = "default_reconstruct_fit")]
    fit: BbviConfig,
    sampler: MhConfig,
}

fn default_reconstruct_fit() -> BbviConfig {
    BbviConfig {
        family: Family::Bn,
        ..BbviConfig::default()
    }
}

#[derive(Serialize)]
struct ReconstructReport<'a> {
    rows: usize,
    cols: usize,
    theta_hat: ModelParams,
    nu_star: &'a VariationalParams,
    iterations: usize,
    input_mean: f64,
    output_mean: f64,
    wall_time: f64,
}

fn with_path<E: StdError + 'static>(path: &Path) -> impl FnOnce(E) -> Box<dyn StdError> + '_ {
    move |e| format!("{}: {e}", path.display()).into()
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(with_path(path))?))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(with_path(parent))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(with_path(path))?))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    serde_json::from_reader(open(path)?).map_err(with_path(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn read_coupling(path: &Path) -> CliResult<CouplingMatrix> {
    CouplingMatrix::read_text(open(path)?).map_err(with_path(path))
}

fn read_spins(path: &Path) -> CliResult<SpinConfiguration> {
    SpinConfiguration::read_text(open(path)?).map_err(with_path(path))
}

fn write_coupling(a: &CouplingMatrix, path: &Path) -> CliResult<()> {
    let mut out = create(path)?;
    a.write_text(&mut out)?;
    out.flush()?;
    Ok(())
}

fn timing(no_timing: bool, seconds: f64) -> f64 {
    if no_timing {
        0.0
    } else {
        seconds
    }
}

fn run_coupling(cmd: CouplingCommand) -> CliResult<()> {
    match cmd {
        CouplingCommand::GenRegular { n, d, seed, out } => {
            write_coupling(&scaled_adjacency(&random_regular_edges(n, d, seed)?)?, &out)
        }
        CouplingCommand::GenLattice { rows, cols, out } => write_coupling(&lattice4_adjacency(rows, cols)?, &out),
        CouplingCommand::Report { input, out } => {
            let report = assumption_report(&read_coupling(&input)?);
            match out {
                Some(path) => write_json(&path, &report),
                None => {
                    println!("{}", serde_json::to_string_pretty(&report)?);
                    Ok(())
                }
            }
        }
    }
}

fn run_sample(args: SampleArgs) -> CliResult<()> {
    let a = read_coupling(&args.coupling)?;
    let theta = ModelParams::new(args.beta, args.b_field)?;
    let x = mh_sample(&theta, &a, &MhConfig::new(args.iters, args.seed))?;
    let mut out = create(&args.out)?;
    x.write_text(&mut out)?;
    out.flush()?;
    Ok(())
}

fn run_fit(args: FitArgs, no_timing: bool) -> CliResult<()> {
    let a = read_coupling(&args.coupling)?;
    let x = read_spins(&args.data)?;
    let mut cfg: BbviConfig = match &args.config {
        Some(path) => read_json(path)?,
        None => BbviConfig::default(),
    };
    cfg.family = args.family;
    cfg.mc_samples = args.mc_samples;
    cfg.seed = args.seed;
    if let Some(m) = args.max_iters {
        cfg.max_iters = m;
    }
    let fit = bbvi_fit(&a, &x, &cfg)?;
    if let Some(path) = &args.elbo_trace {
        let mut out = create(path)?;
        write_elbo_trace(&fit.elbo_trace, &mut out)?;
        out.flush()?;
    }
    write_json(
        &args.out,
        &FitReport {
            family: cfg.family,
            nu_star: &fit.nu_star,
            theta_hat: fit.theta_hat,
            iterations: fit.iterations_run,
            stop_reason: fit.stop_reason,
            final_elbo: fit.elbo_trace.last().map(|p| p.elbo),
            wall_time: timing(no_timing, fit.wall_time),
        },
    )
}

fn write_elbo_trace<W: Write>(trace: &[ElboPoint], mut out: W) -> CliResult<()> {
    writeln!(out, "iter,elbo,elbo_se")?;
    for p in trace {
        writeln!(out, "{},{},{}", p.iter, p.elbo, p.elbo_se)?;
    }
    Ok(())
}

fn run_pmle(args: PmleArgs) -> CliResult<()> {
    let a = read_coupling(&args.coupling)?;
    let x = read_spins(&args.data)?;
    let r = pmle_fit(&a, &x, &PmleConfig::default())?;
    write_json(
        &args.out,
        &PmleReport {
            theta: r.theta,
            iterations: r.iterations,
            score_norm: r.score_norm,
            boundary: r.boundary,
            log_lik: r.log_lik,
        },
    )
}

fn run_bench(args: BenchArgs, no_timing: bool) -> CliResult<()> {
    let mut cells = match read_json::<BenchConfig>(&args.common.config)? {
        BenchConfig::One(c) => vec![*c],
        BenchConfig::Many(cs) => cs,
    };
    for c in &mut cells {
        if args.full_scale {
            *c = c.clone().full_scale();
        }
        if args.common.workers.is_some() {
            c.workers = args.common.workers;
        }
    }
    let mut rows = run_mse_grid(&cells)?;
    for r in &mut rows {
        r.wall_time_total = timing(no_timing, r.wall_time_total);
    }
    let path = args.common.out_dir.join("mse.csv");
    let mut out = create(&path)?;
    write_mse_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn run_contraction(args: ConfigArgs, no_timing: bool) -> CliResult<()> {
    let mut cfg: ContractionConfig = read_json(&args.config)?;
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    let mut rows = contraction_diagnostic(&cfg)?;
    for r in &mut rows {
        r.wall_time_total = timing(no_timing, r.wall_time_total);
    }
    let path = args.out_dir.join("contraction.csv");
    let mut out = create(&path)?;
    write_contraction_csv(&rows, &cfg.radii, &mut out)?;
    out.flush()?;
    Ok(())
}

fn run_reconstruct(args: ConfigArgs, no_timing: bool) -> CliResult<()> {
    let cfg: ReconstructConfig = read_json(&args.config)?;
    let input = match args.config.parent() {
        Some(dir) if cfg.input.is_relative() => dir.join(&cfg.input),
        _ => cfg.input.clone(),
    };
    let img = ImageGrid::read_pbm(open(&input)?).map_err(with_path(&input))?;
    let rec = reconstruct_image(&img, &cfg.fit, &cfg.sampler)?;

    let pbm = args.out_dir.join("reconstructed.pbm");
    let mut out = create(&pbm)?;
    rec.image.write_pbm(&mut out)?;
    out.flush()?;

    let mut out = create(&args.out_dir.join("elbo_trace.csv"))?;
    write_elbo_trace(&rec.fit.elbo_trace, &mut out)?;
    out.flush()?;

    write_json(
        &args.out_dir.join("reconstruct.json"),
        &ReconstructReport {
            rows: img.rows(),
            cols: img.cols(),
            theta_hat: rec.theta_hat,
            nu_star: &rec.fit.nu_star,
            iterations: rec.fit.iterations_run,
            input_mean: img.mean(),
            output_mean: rec.image.mean(),
            wall_time: timing(no_timing, rec.fit.wall_time),
        },
    )
}

fn run(cli: Cli) -> CliResult<()> {
    let no_timing = cli.no_timing;
    match cli.command {
        Command::Coupling(cmd) => run_coupling(cmd),
        Command::Sample(args) => run_sample(args),
        Command::Fit(args) => run_fit(args, no_timing),
        Command::Pmle(args) => run_pmle(args),
        Command::Bench(args) => run_bench(args, no_timing),
        Command::Contraction(args) => run_contraction(args, no_timing),
        Command::Reconstruct(args) => run_reconstruct(args, no_timing),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
