//! covqual — covariance-selection quality experiments from the command line.
//!
//! Subcommands reproduce the experiment sweeps as CSV (`sweep-order`,
//! `sweep-proportional`, `divergence-map`) or analyze a single model
//! (`analyze`). Exit codes: 0 success, 2 invalid arguments, 3 numerical
//! failure, 4 I/O failure; every error is one machine-parsable line
//! `ERROR <code>: <detail>` on stderr.

mod config;
mod csvout;
mod run;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use covqual::detect::DetectError;
use covqual::models::ModelError;

use config::RawOpts;
use run::{
    divergence_grid, order_grid, parse_f64_list, parse_families, parse_usize_list,
    proportional_grid, render_analyze, render_sweep, AucPlan, MethodChoice, DEFAULT_SAMPLES,
    DEFAULT_SEED, MIN_SAMPLES,
};

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // stays on one line for the `ERROR <code>: <detail>` contract
        let detail = match self {
            CliError::Invalid(s) | CliError::Numerical(s) | CliError::Io(s) => s,
        };
        f.write_str(&detail.replace('\n', " "))
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Numeric(inner) => CliError::Numerical(inner.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<DetectError> for CliError {
    fn from(e: DetectError) -> Self {
        match e {
            DetectError::InvalidKappa { .. } => CliError::Invalid(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "covqual",
    version,
    about = "Covariance-selection quality: KL divergences and detection AUC for star/chain models of an equicorrelated source"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report divergences and AUC for a single (n, p, rho, family)
    Analyze(CommonArgs),
    /// CSV sweep over n for fixed orders p (one row per family, p, n, rho)
    SweepOrder(CommonArgs),
    /// CSV sweep over n with p = ceil(n/kappa)
    SweepProportional(CommonArgs),
    /// CSV map of (kl, reverse_kl, auc) per family and order at fixed n
    DivergenceMap(CommonArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Model family: star, chain, or both (analyze: star or chain)
    #[arg(long)]
    family: Option<String>,
    /// Dimension n: comma list and `lo:hi[:step]` ranges (analyze: one value)
    #[arg(long)]
    n: Option<String>,
    /// Model order p: comma list (analyze: one value)
    #[arg(long)]
    p: Option<String>,
    /// Correlation coefficient rho: comma list (analyze: one value)
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
    /// Proportionality constant for sweep-proportional: p = ceil(n/kappa)
    #[arg(long)]
    kappa: Option<String>,
    /// AUC method: auto (quadrature for n <= 64, else mc), mc, quadrature
    #[arg(long = "auc-method")]
    auc_method: Option<String>,
    /// Monte Carlo sample count, at least 1000
    #[arg(long)]
    samples: Option<String>,
    /// Monte Carlo seed
    #[arg(long)]
    seed: Option<String>,
    /// Output CSV path
    #[arg(long)]
    out: Option<String>,
    /// Flat key=value config file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            let detail = e.to_string();
            let first = detail.lines().find(|l| !l.trim().is_empty()).unwrap_or("bad arguments");
            eprintln!("ERROR 2: {}", first.trim_start_matches("error: "));
            std::process::exit(2);
        }
    };
    if let Err(e) = dispatch(cli.command) {
        eprintln!("ERROR {}: {e}", e.exit_code());
        std::process::exit(e.exit_code());
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::SweepOrder(args) => cmd_sweep_order(args),
        Command::SweepProportional(args) => cmd_sweep_proportional(args),
        Command::DivergenceMap(args) => cmd_divergence_map(args),
    }
}

fn collect_opts(args: CommonArgs) -> Result<RawOpts, CliError> {
    let mut raw = RawOpts {
        family: args.family,
        n: args.n,
        p: args.p,
        rho: args.rho,
        kappa: args.kappa,
        auc_method: args.auc_method,
        samples: args.samples,
        seed: args.seed,
        out: args.out,
    };
    if let Some(path) = &args.config {
        raw.fill_from(config::load_config(path)?);
    }
    Ok(raw)
}

fn reject(slot: &Option<String>, flag: &str, command: &str) -> Result<(), CliError> {
    if slot.is_some() {
        return Err(CliError::Invalid(format!("--{flag} is not used by {command}")));
    }
    Ok(())
}

fn required<'a>(slot: &'a Option<String>, flag: &str) -> Result<&'a str, CliError> {
    slot.as_deref().ok_or_else(|| CliError::Invalid(format!("--{flag} is required")))
}

fn single_usize(value: &str, flag: &str) -> Result<usize, CliError> {
    let list = parse_usize_list(value)?;
    if list.len() != 1 {
        return Err(CliError::Invalid(format!("--{flag} must be a single value")));
    }
    Ok(list[0])
}

fn single_f64(value: &str, flag: &str) -> Result<f64, CliError> {
    let list = parse_f64_list(value)?;
    if list.len() != 1 {
        return Err(CliError::Invalid(format!("--{flag} must be a single value")));
    }
    Ok(list[0])
}

fn parse_plan(raw: &RawOpts) -> Result<AucPlan, CliError> {
    let method = match raw.auc_method.as_deref() {
        Some(s) => MethodChoice::parse(s)?,
        None => MethodChoice::Auto,
    };
    let samples = match raw.samples.as_deref() {
        Some(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Invalid(format!("bad --samples '{s}'")))?,
        None => DEFAULT_SAMPLES,
    };
    if samples < MIN_SAMPLES {
        return Err(CliError::Invalid(format!(
            "--samples must be at least {MIN_SAMPLES}, got {samples}"
        )));
    }
    let seed = match raw.seed.as_deref() {
        Some(s) => {
            s.trim().parse::<u64>().map_err(|_| CliError::Invalid(format!("bad --seed '{s}'")))?
        }
        None => DEFAULT_SEED,
    };
    Ok(AucPlan { method, samples, seed })
}

fn write_output(path: &str, csv: &str) -> Result<(), CliError> {
    std::fs::write(path, csv).map_err(|e| CliError::Io(format!("cannot write {path}: {e}")))?;
    eprintln!("wrote {path} ({} rows)", csv.lines().count().saturating_sub(1));
    Ok(())
}

fn cmd_analyze(args: CommonArgs) -> Result<(), CliError> {
    let raw = collect_opts(args)?;
    reject(&raw.kappa, "kappa", "analyze")?;
    reject(&raw.out, "out", "analyze")?;
    let families = parse_families(required(&raw.family, "family")?)?;
    if families.len() != 1 {
        return Err(CliError::Invalid("analyze needs one family: star or chain".into()));
    }
    let n = single_usize(required(&raw.n, "n")?, "n")?;
    let p = single_usize(required(&raw.p, "p")?, "p")?;
    let rho = single_f64(required(&raw.rho, "rho")?, "rho")?;
    let plan = parse_plan(&raw)?;
    let report = render_analyze(families[0], n, p, rho, plan.samples, plan.seed)?;
    print!("{report}");
    Ok(())
}

fn cmd_sweep_order(args: CommonArgs) -> Result<(), CliError> {
    let raw = collect_opts(args)?;
    reject(&raw.kappa, "kappa", "sweep-order")?;
    let families = parse_families(raw.family.as_deref().unwrap_or("both"))?;
    let n_values = parse_usize_list(raw.n.as_deref().unwrap_or("10:50:5"))?;
    let p_values = parse_usize_list(raw.p.as_deref().unwrap_or("1,3,5,7"))?;
    let rho_values = parse_f64_list(raw.rho.as_deref().unwrap_or("0.9"))?;
    let plan = parse_plan(&raw)?;
    let points = order_grid(&families, &n_values, &p_values, &rho_values)?;
    let csv = render_sweep(&points, &plan, None)?;
    write_output(raw.out.as_deref().unwrap_or("sweep_order.csv"), &csv)
}

fn cmd_sweep_proportional(args: CommonArgs) -> Result<(), CliError> {
    let raw = collect_opts(args)?;
    reject(&raw.p, "p", "sweep-proportional (use --kappa)")?;
    let families = parse_families(raw.family.as_deref().unwrap_or("both"))?;
    let n_values = parse_usize_list(raw.n.as_deref().unwrap_or("20:200:10"))?;
    let rho_values = parse_f64_list(raw.rho.as_deref().unwrap_or("0.1,0.9"))?;
    let kappa = match raw.kappa.as_deref() {
        Some(s) => single_f64(s, "kappa")?,
        None => 10.0,
    };
    let plan = parse_plan(&raw)?;
    let points = proportional_grid(&families, &n_values, &rho_values, kappa)?;
    let bound = covqual::detect::asymptotic_kl_bound(kappa)?;
    let csv = render_sweep(&points, &plan, Some(bound))?;
    write_output(raw.out.as_deref().unwrap_or("sweep_proportional.csv"), &csv)
}

fn cmd_divergence_map(args: CommonArgs) -> Result<(), CliError> {
    let raw = collect_opts(args)?;
    reject(&raw.kappa, "kappa", "divergence-map")?;
    let families = parse_families(raw.family.as_deref().unwrap_or("both"))?;
    let n = single_usize(raw.n.as_deref().unwrap_or("15"), "n")?;
    let p_values = parse_usize_list(raw.p.as_deref().unwrap_or("1,3"))?;
    let rho = single_f64(raw.rho.as_deref().unwrap_or("0.9"), "rho")?;
    let plan = parse_plan(&raw)?;
    let points = divergence_grid(&families, n, &p_values, rho)?;
    let csv = render_sweep(&points, &plan, None)?;
    write_output(raw.out.as_deref().unwrap_or("divergence_map.csv"), &csv)
}
