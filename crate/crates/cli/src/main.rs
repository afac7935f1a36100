use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sphdeconv::config::load_fixture;
use sphdeconv::export::{EstimateFile, LossExport};
use sphdeconv::runner::{estimate, run_kappa, run_study, run_tau};
use sphdeconv::selftest;
use sphdeconv::tables::{export_field, write_atomic, write_field, write_results, write_summary};
use sphdeconv_core::calibrate::TauKind;
use sphdeconv_core::estimators::{Method, ThresholdConfig};
use sphdeconv_core::metrics::eval_grid;
use sphdeconv_core::study::{table3_cells, NoiseCell, Study, StudyConfig};

/// Blind spherical deconvolution with needlets.
#[derive(Debug, Parser)]
#[command(name = "sphdeconv", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the built-in invariant checks.
    Selftest,
    /// Calibrate κ, τ_sig or τ_op on a null benchmark and print the count matrix as CSV.
    Calibrate(CalibrateArgs),
    /// Estimate the density of one fixture and write the estimate as JSON.
    Estimate(EstimateArgs),
    /// Monte Carlo error study over a grid of noise levels.
    Simulate(SimulateArgs),
    /// Evaluate an exported estimate on the evaluation grid.
    ExportField(ExportFieldArgs),
}

/// Thresholding constants shared by `estimate` and `simulate`.
#[derive(Debug, Args)]
struct Constants {
    /// Operator threshold constant κ.
    #[arg(long, default_value_t = 0.8)]
    kappa: f64,
    /// Signal-noise part of the needlet threshold.
    #[arg(long, default_value_t = 0.9)]
    tau_sig: f64,
    /// Operator-noise part of the needlet threshold.
    #[arg(long, default_value_t = 0.2)]
    tau_op: f64,
    /// Scale λ in the maximal level.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Upper bound on the maximal needlet level.
    #[arg(long, default_value_t = 8)]
    level_cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Param {
    Kappa,
    TauSig,
    TauOp,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Constant to calibrate.
    #[arg(long, value_enum, default_value_t = Param::Kappa)]
    param: Param,
    /// Operator noise level (default: 1e-3 for κ and τ_op, 1e-4 for τ_sig).
    #[arg(long)]
    delta: Option<f64>,
    /// Signal noise level for τ calibration (default: 1e-3 for τ_sig, 1e-4 for τ_op).
    #[arg(long)]
    eps: Option<f64>,
    /// Ascending candidate values, comma separated (default: 0.3..0.8 for κ,
    /// 0.5..0.9 for τ_sig, 0.1,0.2 for τ_op).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    grid: Vec<f64>,
    /// κ used while calibrating τ.
    #[arg(long, default_value_t = 0.8)]
    kappa: f64,
    /// Draws averaged per grid value.
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// TOML fixture file (keys delta, eps, seed, alpha, nu, lmax, target).
    #[arg(long)]
    fixture: PathBuf,
    #[arg(long, value_parser = parse_method, default_value = "bnd")]
    method: Method,
    #[command(flatten)]
    constants: Constants,
    /// Fixed maximal level, required when both noise levels are zero.
    #[arg(long)]
    level: Option<usize>,
    /// Points of the evaluation grid used for the reported losses.
    #[arg(long, default_value_t = 4096)]
    grid_size: usize,
    /// Output JSON (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Use the six (δ, ε) cells of the reference error table.
    #[arg(long, conflicts_with_all = ["delta", "eps"])]
    table3: bool,
    /// Operator noise levels, crossed with --eps.
    #[arg(long, value_delimiter = ',', num_args = 1.., requires = "eps")]
    delta: Vec<f64>,
    /// Signal noise levels, crossed with --delta.
    #[arg(long, value_delimiter = ',', num_args = 1.., requires = "delta")]
    eps: Vec<f64>,
    /// Replicates per cell.
    #[arg(long = "N", visible_alias = "replicates", default_value_t = 20)]
    n: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Methods, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "bbd,bnd")]
    methods: Vec<Method>,
    #[command(flatten)]
    constants: Constants,
    /// Points of the evaluation grid.
    #[arg(long, default_value_t = 4096)]
    grid_size: usize,
    /// Per-replicate results CSV.
    #[arg(long)]
    out: PathBuf,
    /// Optional per-cell summary CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExportFieldArgs {
    /// Estimate JSON written by `estimate`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Field CSV (x,y,z,value).
    #[arg(long)]
    out: PathBuf,
    /// Points of the evaluation grid.
    #[arg(long, default_value_t = 4096)]
    grid_size: usize,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: sphdeconv_core::Error| e.to_string())
}

fn fmt_value(v: f64) -> String {
    format!("{v}")
}

fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => write_atomic(path, |w| Ok(w.write_all(text.as_bytes())?)),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn calibrate(args: CalibrateArgs) -> anyhow::Result<()> {
    let mut csv = String::new();
    match args.param {
        Param::Kappa => {
            let delta = args.delta.unwrap_or(1e-3);
            let grid = if args.grid.is_empty() {
                vec![0.3, 0.4, 0.5, 0.6, 0.7, 0.8]
            } else {
                args.grid
            };
            let cal = run_kappa(delta, args.runs, &grid, args.seed)?;
            csv.push_str("kappa");
            for v in &cal.grid {
                csv.push_str(&format!(",{}", fmt_value(*v)));
            }
            csv.push_str("\nnr_op");
            for c in &cal.counts {
                csv.push_str(&format!(",{c}"));
            }
            csv.push('\n');
            report_choice("kappa", cal.kappa, cal.exhausted);
        }
        Param::TauSig | Param::TauOp => {
            let kind = if args.param == Param::TauSig { TauKind::Sig } else { TauKind::Op };
            let (eps0, delta0) = kind.default_noise();
            let grid = if !args.grid.is_empty() {
                args.grid
            } else if kind == TauKind::Sig {
                vec![0.5, 0.6, 0.7, 0.8, 0.9]
            } else {
                vec![0.1, 0.2]
            };
            let cal = run_tau(
                kind,
                args.eps.unwrap_or(eps0),
                args.delta.unwrap_or(delta0),
                args.kappa,
                &grid,
                args.runs,
                args.seed,
            )?;
            csv.push_str(&format!("j\\tau_{}", kind.as_str()));
            for v in &cal.grid {
                csv.push_str(&format!(",{}", fmt_value(*v)));
            }
            csv.push('\n');
            for j in 0..cal.counts[0].len() {
                csv.push_str(&j.to_string());
                for c in &cal.counts {
                    csv.push_str(&format!(",{}", c[j]));
                }
                csv.push('\n');
            }
            report_choice(&format!("tau_{}", kind.as_str()), cal.tau, cal.exhausted);
        }
    }
    write_output(args.out.as_deref(), &csv)
}

fn report_choice(name: &str, value: f64, exhausted: bool) {
    if exhausted {
        eprintln!("warning: no grid value removed every count; {name} = {value} (grid maximum)");
    } else {
        eprintln!("{name} = {value}");
    }
}

fn threshold_config(c: &Constants, level: Option<usize>) -> ThresholdConfig {
    ThresholdConfig {
        kappa: c.kappa,
        tau_sig: c.tau_sig,
        tau_op: c.tau_op,
        lambda: c.lambda,
        level_override: level,
        level_cap: Some(c.level_cap),
        ..ThresholdConfig::default()
    }
}

fn run_estimate(args: EstimateArgs) -> anyhow::Result<()> {
    let fixture = load_fixture(&args.fixture)?;
    let cfg = threshold_config(&args.constants, args.level);
    let out = estimate(&fixture, args.method, &cfg, args.grid_size)?;
    let cfg = ThresholdConfig {
        eps: fixture.eps,
        delta: fixture.delta,
        ..cfg
    };
    let mut file = EstimateFile::new(&out.result).with_fixture(&fixture, &cfg);
    file.loss = Some(LossExport {
        l2: out.l2,
        linf: out.linf,
        grid_size: args.grid_size,
    });
    let mut json = file.to_json();
    json.push('\n');
    write_output(args.out.as_deref(), &json)?;
    eprintln!(
        "{} J={} l2={:.4} linf={:.4}",
        args.method, out.result.max_level, out.l2, out.linf
    );
    Ok(())
}

fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let cells = if args.table3 {
        table3_cells()
    } else if !args.delta.is_empty() {
        args.delta
            .iter()
            .flat_map(|&delta| args.eps.iter().map(move |&eps| NoiseCell { delta, eps }))
            .collect()
    } else {
        bail!("give --table3 or both --delta and --eps");
    };
    anyhow::ensure!(args.n > 0, "--N must be at least 1");
    let c = &args.constants;
    let config = StudyConfig {
        cells,
        replicates: args.n,
        master_seed: args.seed,
        methods: args.methods,
        kappa: c.kappa,
        tau_sig: c.tau_sig,
        tau_op: c.tau_op,
        lambda: c.lambda,
        level_cap: c.level_cap,
        grid_size: args.grid_size,
        ..StudyConfig::default()
    };
    let study = Study::new(config)?;
    let report = run_study(&study);
    write_atomic(&args.out, |w| write_results(w, &report))?;
    if let Some(path) = &args.summary {
        write_atomic(path, |w| write_summary(w, &report))?;
    }
    println!("delta,eps,method,n,mean_l2,se_l2,mean_linf,se_linf");
    for s in report.summaries() {
        println!(
            "{},{},{},{},{:.4},{:.4},{:.4},{:.4}",
            s.delta, s.eps, s.method, s.count, s.mean_l2, s.stderr_l2, s.mean_linf, s.stderr_linf
        );
    }
    for f in &report.failures {
        eprintln!(
            "warning: delta={} eps={} {} replicate {} failed: {}",
            f.delta, f.eps, f.method, f.replicate, f.message
        );
    }
    Ok(())
}

fn export(args: ExportFieldArgs) -> anyhow::Result<()> {
    let file = EstimateFile::load(&args.input)?;
    let grid = eval_grid(args.grid_size)?;
    let records = export_field(&file.coefficients()?, &grid);
    write_atomic(&args.out, |w| write_field(w, &records))
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Selftest => {
            let checks = selftest::run_all();
            for c in &checks {
                println!("{c}");
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
        Command::Calibrate(a) => calibrate(a)?,
        Command::Estimate(a) => run_estimate(a)?,
        Command::Simulate(a) => simulate(a)?,
        Command::ExportField(a) => export(a)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
