use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use fbm_power::error::{Error, Result};
use fbm_power::gaussianize::{self, IncrementSeries, DEFAULT_MAX_ITER, DEFAULT_RATIO_TOL};
use fbm_power::hurst_estimate::{default_q_constant, estimate_hurst, HurstGrid, Selection};
use fbm_power::hypothesis_test::{classify, test_hypothesis, HypothesisConfig};
use fbm_power::pipeline::{
    analyze_all, load_csv, load_values, render_report, AnalysisConfig, GapPolicy, Quantity,
    ReportFormat, SCHEMA_VERSION,
};
use fbm_power::{simulate_fbm, HurstExponent, Method};

#[derive(Parser)]
#[command(name = "fbm-power", version, about = "fBm analysis of power-consumption time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full analysis on a long-format CSV (timestamp,building,quantity,value).
    Analyze(AnalyzeArgs),
    /// Simulate an fBm path on the grid k/n and write it as CSV (t,value).
    Simulate(SimulateArgs),
    /// Fit the power transform to a series of increments.
    Gaussianize(GaussianizeArgs),
    /// Estimate the Hurst exponent of Gaussianized increments.
    Estimate(EstimateArgs),
    /// Test the fBm-increment hypothesis for a given Hurst exponent.
    Test(TestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantityArg {
    #[value(name = "P")]
    P,
    #[value(name = "S")]
    S,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Md,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Cholesky,
    Circulant,
}

#[derive(Clone, Copy, ValueEnum)]
enum GapArg {
    Drop,
    InterpolateLinear,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectionArg {
    NontrivialRoot,
    Argmin,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 0.05)]
    grid_start: f64,
    #[arg(long, default_value_t = 0.95)]
    grid_stop: f64,
    #[arg(long, default_value_t = 0.05)]
    grid_step: f64,
    /// Constant in the numerator of Q (0.8 reproduces the original rounding).
    #[arg(long)]
    q_constant: Option<f64>,
    /// Rule for picking Ĥ from the Q curve.
    #[arg(long, value_enum, default_value = "nontrivial-root")]
    selection: SelectionArg,
}

impl GridArgs {
    fn grid(&self) -> HurstGrid {
        HurstGrid {
            start: self.grid_start,
            stop: self.grid_stop,
            step: self.grid_step,
        }
    }

    fn selection(&self) -> Selection {
        match self.selection {
            SelectionArg::NontrivialRoot => Selection::NontrivialRoot,
            SelectionArg::Argmin => Selection::Argmin,
        }
    }
}

#[derive(Args)]
struct TestFlags {
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    beta0: f64,
    /// Use the published threshold coefficients 4.95 and 4.08.
    #[arg(long)]
    paper_constants: bool,
    /// Require δ < β₀ on the persistent branch too.
    #[arg(long)]
    require_delta_persistent: bool,
}

impl TestFlags {
    fn config(&self) -> HypothesisConfig {
        HypothesisConfig {
            beta0: self.beta0,
            alpha: self.alpha,
            paper_constants: self.paper_constants,
            require_delta_persistent: self.require_delta_persistent,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    quantity: QuantityArg,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    test: TestFlags,
    #[arg(long, default_value_t = DEFAULT_RATIO_TOL)]
    ratio_tolerance: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long, value_enum, default_value = "drop")]
    gap_policy: GapArg,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    hurst: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to cholesky for n ≤ 4096 and circulant above.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GaussianizeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Input holds levels; take first differences before fitting.
    #[arg(long)]
    levels: bool,
    #[arg(long, default_value_t = DEFAULT_RATIO_TOL)]
    ratio_tolerance: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    hurst: f64,
    #[command(flatten)]
    flags: TestFlags,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<()> {
    let cfg = AnalysisConfig {
        grid: a.grid.grid(),
        selection: a.grid.selection(),
        q_constant: a.grid.q_constant.unwrap_or_else(default_q_constant),
        ratio_tolerance: a.ratio_tolerance,
        max_iter: a.max_iter,
        hypothesis: a.test.config(),
        gap_policy: match a.gap_policy {
            GapArg::Drop => GapPolicy::Drop,
            GapArg::InterpolateLinear => GapPolicy::InterpolateLinear,
        },
    };
    cfg.validate()?;
    let data = load_csv(&a.input, cfg.gap_policy)?;
    let series: Vec<_> = data
        .series
        .into_iter()
        .filter(|s| match a.quantity {
            QuantityArg::P => s.quantity == Quantity::P,
            QuantityArg::S => s.quantity == Quantity::S,
            QuantityArg::Both => true,
        })
        .collect();
    let reports = analyze_all(&series, &cfg);
    let format = match a.format {
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Md => ReportFormat::Md,
    };
    emit(a.output.as_ref(), &render_report(&reports, format))
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let h = HurstExponent::new(a.hurst)?;
    let method = match a.method {
        Some(MethodArg::Cholesky) => Method::Cholesky,
        Some(MethodArg::Circulant) => Method::Circulant,
        None => Method::default_for(a.n),
    };
    let path = simulate_fbm(h, a.n, a.seed, method)?;
    let mut s = String::from("t,value\n");
    for (t, v) in path.times().zip(&path.values) {
        s.push_str(&format!("{t},{v}\n"));
    }
    emit(a.out.as_ref(), &s)
}

fn cmd_gaussianize(a: GaussianizeArgs) -> Result<()> {
    let raw = load_values(&a.input)?;
    let y = if a.levels {
        gaussianize::increments(&raw)?
    } else {
        IncrementSeries::new(raw)?
    };
    let z = gaussianize::gaussianize(&y, a.ratio_tolerance, a.max_iter)?;
    let mut s = format!(
        "# lambda={}\n# achieved_ratio={}\n# tolerance={}\n# m={}\nz\n",
        z.lambda,
        z.achieved_ratio.unwrap_or(f64::NAN),
        a.ratio_tolerance,
        z.m()
    );
    for v in &z.values {
        s.push_str(&format!("{v}\n"));
    }
    emit(a.output.as_ref(), &s)
}

fn cmd_estimate(a: EstimateArgs) -> Result<()> {
    let z = load_values(&a.input)?;
    let q = a.grid.q_constant.unwrap_or_else(default_q_constant);
    if !(q > 0.0) {
        return Err(Error::Config(format!("q_constant must be positive, got {q}")));
    }
    let est = estimate_hurst(&z, &a.grid.grid(), q, a.grid.selection())?;
    let doc = json!({ "schema_version": SCHEMA_VERSION, "estimate": est });
    emit(a.output.as_ref(), &to_json(&doc))
}

fn cmd_test(a: TestArgs) -> Result<()> {
    let z = load_values(&a.input)?;
    let h = HurstExponent::new(a.hurst)?;
    let stats = test_hypothesis(&z, h.value(), &a.flags.config())?;
    let class = classify(h.value(), stats.verdict);
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "stats": stats,
        "classification": class,
    });
    emit(a.output.as_ref(), &to_json(&doc))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(3),
            };
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Gaussianize(a) => cmd_gaussianize(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Test(a) => cmd_test(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
