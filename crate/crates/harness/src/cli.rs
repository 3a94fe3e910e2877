use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use shampoo_core::schedule::{derive, ScheduleInput, ScheduleOutput};
use shampoo_core::{Exponent, ExponentPair};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::{create_dir, run_experiment, run_sweep, write_json, write_metadata};
use crate::repro::{self, ReproOptions};
use crate::verify::run_verify;

#[derive(Debug, Parser)]
#[command(
    name = "shampoo-lab",
    version,
    about = "Runs, sweeps and checks for the Shampoo optimizer with decoupled weight decay"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One experiment from a config file
    Run(RunArgs),
    /// Weight-decay sweep, one run per λ in parallel
    Sweep(RunArgs),
    /// All property suites; prints a JSON report
    Verify(VerifyArgs),
    /// Hyperparameters derived from problem constants
    Schedule(ScheduleArgs),
    /// Weight-decay threshold sweep on the 2×2 toy problem
    #[command(name = "repro-fig5")]
    ReproFig5(ReproArgs),
}

#[derive(Debug, Args)]
pub struct ExponentArgs {
    /// Left exponent p (a number ≥ 1 or "inf")
    #[arg(long)]
    pub p: Option<Exponent>,
    /// Right exponent q (a number ≥ 1 or "inf"); defaults to the conjugate of p
    #[arg(long)]
    pub q: Option<Exponent>,
}

impl ExponentArgs {
    /// The pair when either exponent was given; a missing one is the
    /// conjugate of the other.
    pub fn pair(&self) -> Result<Option<ExponentPair>> {
        let conj = |e: Exponent| match e {
            Exponent::Infinite => Exponent::Finite(1.0),
            Exponent::Finite(1.0) => Exponent::Infinite,
            Exponent::Finite(v) => Exponent::Finite(v / (v - 1.0)),
        };
        let (p, q) = match (self.p, self.q) {
            (None, None) => return Ok(None),
            (Some(p), None) => (p, conj(p)),
            (None, Some(q)) => (conj(q), q),
            (Some(p), Some(q)) => (p, q),
        };
        ExponentPair::new(p, q)
            .map(Some)
            .map_err(|e| HarnessError::Config(e.to_string()))
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config step count; accepts 1e6
    #[arg(long, value_parser = parse_count)]
    pub steps: Option<u64>,
    /// Weight decay values, replacing the config sweep (repeatable)
    #[arg(long = "lambda")]
    pub lambdas: Vec<f64>,
    /// Output directory; overrides the config
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub exponents: ExponentArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trials per matrix-inequality suite
    #[arg(long, default_value_t = 500, value_parser = parse_count)]
    pub trials: u64,
    /// Also write the report to DIR/verify.json
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    /// Step count K; accepts 1e6
    #[arg(long = "K", value_parser = parse_count)]
    pub steps: u64,
    /// Gradient Lipschitz constant
    #[arg(long = "L")]
    pub smoothness: f64,
    /// f(X₁) − f*
    #[arg(long)]
    pub gap: f64,
    /// Gradient noise bound σ²
    #[arg(long)]
    pub sigma2: f64,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long)]
    pub eps_hat: Option<f64>,
    /// Weight decay; defaults to the largest admissible value
    #[arg(long)]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub exponents: ExponentArgs,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Step count; accepts 1e6
    #[arg(long, value_parser = parse_count, conflicts_with = "full")]
    pub steps: Option<u64>,
    /// Run 10⁹ steps
    #[arg(long)]
    pub full: bool,
    /// Weight decay values (repeatable); defaults to 1e-1, 1e-2, 1e-3, 1e-4, 0
    #[arg(long = "lambda")]
    pub lambdas: Vec<f64>,
    #[arg(long, default_value = "out/repro-fig5")]
    pub out: PathBuf,
    #[command(flatten)]
    pub exponents: ExponentArgs,
}

/// A nonnegative integer, also written as `1e6` or `1000000.0`.
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a count: {s}"))?;
    if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(format!("not a nonnegative integer: {s}"))
    }
}

/// Plain decimal in `[1e-3, 1e4)`, scientific otherwise.
fn num(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn render_schedule(out: &ScheduleOutput) -> String {
    let h = &out.hyper;
    let rows = [
        ("eta", num(h.eta)),
        ("theta", num(h.theta)),
        ("beta", num(h.beta)),
        ("eps", num(h.eps)),
        ("eps_hat", num(out.eps_hat)),
        ("lambda", num(h.lambda)),
        ("lambda_max", num(out.lambda_max)),
        ("sigma_hat_sq", num(out.sigma_hat_sq)),
        ("nu", num(out.nu)),
        ("x1_op_bound", num(out.x1_op_bound)),
        ("rate_bound", num(out.rate_bound)),
        ("p", h.pq.p().to_string()),
        ("q", h.pq.q().to_string()),
        ("rate_regime", out.rate_regime.to_string()),
    ];
    rows.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(steps) = args.steps {
        cfg.steps = steps;
    }
    if !args.lambdas.is_empty() {
        cfg.sweep = Some(args.lambdas.clone());
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if let Some(pq) = args.exponents.pair()? {
        cfg.set_pq(pq);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = load_config(&args)?;
            let report = run_experiment(&cfg, &cfg.out_dir)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            match &report.error {
                Some(e) => Err(HarnessError::Failed(format!(
                    "run stopped at step {}: {e}",
                    report.steps_completed
                ))),
                None => Ok(()),
            }
        }
        Command::Sweep(args) => {
            let cfg = load_config(&args)?;
            let summary = run_sweep(&cfg, &cfg.out_dir)?;
            println!("{}", serde_json::to_string_pretty(&summary).expect("serializable"));
            match summary.all_complete() {
                true => Ok(()),
                false => Err(HarnessError::Failed(format!(
                    "sweep incomplete; see {}",
                    cfg.out_dir.join("summary.json").display()
                ))),
            }
        }
        Command::Verify(args) => {
            let report = run_verify(args.trials, args.seed);
            let text = serde_json::to_string_pretty(&report).expect("serializable");
            println!("{text}");
            if let Some(dir) = &args.out {
                create_dir(dir)?;
                write_json(&report, &dir.join("verify.json"))?;
                write_metadata(dir, "verify", args.seed)?;
            }
            match report.passed {
                true => Ok(()),
                false => Err(HarnessError::Failed(format!(
                    "{} property violations",
                    report.total_violations
                ))),
            }
        }
        Command::Schedule(args) => {
            let mut input = ScheduleInput::new(args.steps, args.smoothness, args.gap, args.sigma2, args.m, args.n);
            input.gamma = args.gamma;
            input.tau = args.tau;
            input.eps_hat = args.eps_hat;
            input.lambda = args.lambda;
            if let Some(pq) = args.exponents.pair()? {
                input.pq = pq;
            }
            let out = derive(&input)?;
            print!("{}", render_schedule(&out));
            Ok(())
        }
        Command::ReproFig5(args) => {
            let mut opts = ReproOptions {
                seed: args.seed,
                ..ReproOptions::default()
            };
            if args.full {
                opts.steps = repro::FULL_STEPS;
            }
            if let Some(steps) = args.steps {
                opts.steps = steps;
            }
            if !args.lambdas.is_empty() {
                opts.lambdas = args.lambdas.clone();
            }
            if let Some(pq) = args.exponents.pair()? {
                opts.pq = pq;
            }
            let report = repro::repro_fig5(&opts, &args.out)?;
            print!("{}", repro::render(&report));
            match report.passed() {
                true => Ok(()),
                false => Err(HarnessError::Failed("reproduction criteria not met".into())),
            }
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code: 0 on
/// success, 1 on a violated property, unmet criterion or infeasible
/// schedule, 2 on usage, configuration or I/O errors.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("250"), Ok(250));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn exponent_flags() {
        let args = |p: Option<&str>, q: Option<&str>| ExponentArgs {
            p: p.map(|s| s.parse().unwrap()),
            q: q.map(|s| s.parse().unwrap()),
        };
        assert_eq!(args(None, None).pair().unwrap(), None);
        assert_eq!(args(Some("1"), None).pair().unwrap(), Some(ExponentPair::left_only()));
        assert_eq!(args(None, Some("1")).pair().unwrap(), Some(ExponentPair::right_only()));
        assert_eq!(
            args(Some("inf"), None).pair().unwrap(),
            Some(ExponentPair::right_only())
        );
        assert_eq!(
            args(Some("4"), None).pair().unwrap(),
            Some(ExponentPair::two_sided(4.0).unwrap())
        );
        assert!(args(Some("2"), Some("3")).pair().is_err());
    }

    #[test]
    fn number_rendering() {
        assert_eq!(num(2.5e-4), "2.5e-4");
        assert_eq!(num(0.999), "0.999");
        assert_eq!(num(0.25), "0.25");
        assert_eq!(num(500.0), "500");
    }
}
