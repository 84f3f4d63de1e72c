use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tenrec_cli::{
    emit_csv_file, emit_figure_data, read_csv_file, run_grid, write_figure_series, ExperimentGrid,
    Instance,
};
use tenrec_core::io::write_tensor_file;
use tenrec_core::solver::{rc_admm_solve, wtspn_admm_solve, RcSolverConfig, WtspnSolverConfig};
use tenrec_core::synth::{recovery_error, ObservationSpec, TuckerSpec};
use tenrec_core::weighting::{scheme_weights, WeightScheme};

#[derive(Parser)]
#[command(name = "tenrec", about = "Low-rank tensor completion harness", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance and write it to disk.
    Gen(GenArgs),
    /// Run one solver on a stored instance.
    Solve(SolveArgs),
    /// Run a full experiment grid from a JSON config.
    Sweep(SweepArgs),
    /// Reshape a records CSV into per-panel plot series.
    Figdata(FigdataArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Tensor dimensions, e.g. 16,16,16,16
    #[arg(long, value_delimiter = ',', required = true)]
    shape: Vec<usize>,
    /// Per-mode Tucker ranks, e.g. 3,3,3,3
    #[arg(long, value_delimiter = ',', required = true)]
    ranks: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    missing_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma_n: f64,
    /// Seed for the mask/noise streams; defaults to --seed.
    #[arg(long)]
    obs_seed: Option<u64>,
    /// Base path; writes <out>.xorg.tnr, <out>.y.tnr, <out>.mask.tnr, <out>.json
    #[arg(long, required = true)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Base path of a generated instance.
    #[arg(long, required = true)]
    instance: PathBuf,
    /// ideal | observation | uniform | rc
    #[arg(long, required = true)]
    scheme: String,
    /// Weight exponent for ideal/observation schemes.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Schatten exponent; accepts decimals or the fractions 1/2 and 2/3.
    #[arg(long, default_value = "1", value_parser = parse_p)]
    p: f64,
    /// Per-mode rank bounds for the rc scheme, e.g. 2,2,2
    #[arg(long, value_delimiter = ',')]
    rc_ranks: Option<Vec<usize>>,
    #[arg(long, default_value_t = 100.0)]
    lambda0: f64,
    #[arg(long, default_value_t = 0.99)]
    decay: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-7)]
    rel_tol: f64,
    /// Ball radius noise level; defaults to the instance's sigma_n.
    #[arg(long)]
    sigma_n: Option<f64>,
    /// Write the recovered tensor here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a per-iteration trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Grid config JSON; omit to run the built-in paper grid.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, required = true)]
    out: PathBuf,
    /// Worker threads (the TENREC_WORKERS env var overrides this).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct FigdataArgs {
    #[arg(long, required = true)]
    records: PathBuf,
    /// Panel as missing_rate,sigma_n — e.g. 0.4,0
    #[arg(long, required = true)]
    panel: String,
    #[arg(long, required = true)]
    out_dir: PathBuf,
}

fn parse_p(s: &str) -> std::result::Result<f64, String> {
    let p = match s.trim() {
        "1/2" => 0.5,
        "2/3" => 2.0 / 3.0,
        other => other.parse::<f64>().map_err(|e| e.to_string())?,
    };
    if p > 0.0 && p <= 1.0 {
        Ok(p)
    } else {
        Err(format!("p must lie in (0, 1], got {p}"))
    }
}

fn main() {
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(args) => gen(args),
        Command::Solve(args) => solve(args),
        Command::Sweep(args) => sweep(args),
        Command::Figdata(args) => figdata(args),
    }
}

fn gen(args: GenArgs) -> Result<()> {
    let tucker = TuckerSpec { shape: args.shape, ranks: args.ranks, seed: args.seed };
    let observation = ObservationSpec {
        missing_rate: args.missing_rate,
        sigma_n: args.sigma_n,
        seed: args.obs_seed.unwrap_or(args.seed),
    };
    let instance = Instance::generate(&tucker, &observation).context("generating instance")?;
    instance.write(&args.out).context("writing instance files")?;
    println!(
        "wrote instance {} ({} observed of {} entries)",
        args.out.display(),
        instance.mask.count(),
        instance.y.len()
    );
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let instance = Instance::read(&args.instance).context("reading instance")?;
    let sigma_n = args.sigma_n.unwrap_or(instance.observation.sigma_n);
    let started = Instant::now();

    let result = match args.scheme.as_str() {
        "rc" => {
            let Some(ranks) = args.rc_ranks.clone() else {
                bail!("--scheme rc requires --rc-ranks");
            };
            let mut config = RcSolverConfig::new(ranks);
            config.lambda0 = args.lambda0;
            config.decay = args.decay;
            config.max_iter = args.max_iter;
            config.rel_tol = args.rel_tol;
            config.trace = args.trace.is_some();
            rc_admm_solve(&instance.y, &instance.mask, &config)?
        }
        name => {
            let scheme = match name {
                "ideal" => WeightScheme::Ideal { alpha: args.alpha },
                "observation" => WeightScheme::Observation { alpha: args.alpha },
                "uniform" => WeightScheme::Uniform,
                other => bail!("unknown scheme {other:?} (expected ideal, observation, uniform, or rc)"),
            };
            let weights = scheme_weights(scheme, Some(&instance.x_org), &instance.y, &instance.mask)?
                .into_uniform_gamma_spec(args.p)?;
            let mut config = WtspnSolverConfig::new(weights);
            config.lambda0 = args.lambda0;
            config.decay = args.decay;
            config.max_iter = args.max_iter;
            config.rel_tol = args.rel_tol;
            config.sigma_n = sigma_n;
            config.trace = args.trace.is_some();
            wtspn_admm_solve(&instance.y, &instance.mask, &config)?
        }
    };
    let wall = started.elapsed();

    let error = recovery_error(&result.x_hat, &instance.x_org)?;
    println!(
        "scheme {} error {error:e} iterations {} converged {} ball_residual {:e} wall_ms {}",
        args.scheme,
        result.iterations,
        result.converged,
        result.ball_residual,
        wall.as_millis()
    );
    if let Some(path) = &args.out {
        write_tensor_file(path, &result.x_hat)?;
    }
    if let Some(path) = &args.trace {
        let file = std::fs::File::create(path)?;
        result.write_trace_csv(std::io::BufWriter::new(file))?;
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let grid: ExperimentGrid = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text).context("parsing grid config")?
        }
        None => ExperimentGrid::paper_default(),
    };

    let workers = std::env::var("TENREC_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .or(args.workers);
    let records = match workers {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building worker pool")?
            .install(|| run_grid(&grid)),
        _ => run_grid(&grid),
    }?;

    emit_csv_file(&records, &args.out)?;
    println!("wrote {} records to {}", records.len(), args.out.display());
    Ok(())
}

fn figdata(args: FigdataArgs) -> Result<()> {
    let (missing, sigma) = args
        .panel
        .split_once(',')
        .context("panel must be missing_rate,sigma_n")?;
    let missing: f64 = missing.trim().parse().context("bad missing rate")?;
    let sigma: f64 = sigma.trim().parse().context("bad sigma")?;
    let records = read_csv_file(&args.records)?;
    let series = emit_figure_data(&records, missing, sigma)?;
    write_figure_series(&series, &args.out_dir)?;
    println!(
        "wrote {} series to {} for panel missing={missing}, sigma={sigma}",
        series.len(),
        args.out_dir.display()
    );
    Ok(())
}
