//! Command-line front end: `eval`, `sweep` and `compare`.
//!
//! Exit codes: 0 on success, 1 on numeric or tolerance failure, 2 on usage
//! or validation errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{evar, ConfidenceLevel, EvarResult, Minimizer};
use crate::distributions::DistributionSpec;
use crate::error::EvarError;
use crate::oracle::{evar_monte_carlo, evar_numeric, OracleOptions};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NUMERIC: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Fixed CSV header of `eval` and `sweep`.
pub const CSV_HEADER: &str = "distribution,alpha,method,evar,t_star,branch";

/// Fixed CSV header of `compare`.
pub const COMPARE_HEADER: &str = "distribution,alpha,analytic,numeric,mc,abs_diff,rel_diff,mc_abs_diff";

#[derive(Debug, Parser)]
#[command(name = "evar", version, about = "Entropic Value-at-Risk in closed form and by numerical minimisation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate EVaR at one confidence level.
    Eval {
        #[command(flatten)]
        dist: DistArgs,
        /// Confidence level in [0, 1).
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate EVaR on a uniform grid of confidence levels.
    Sweep {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, allow_hyphen_values = true)]
        alpha_from: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha_to: f64,
        #[arg(long)]
        alpha_steps: usize,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare the closed form against the numerical (and optionally Monte-Carlo) estimate.
    Compare {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        /// Monte-Carlo sample size; the mc column is empty without it.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest accepted |analytic - numeric| / (1 + |analytic|).
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Debug, Args)]
struct DistArgs {
    /// Distribution tag, e.g. `poisson`, `gamma`, `nig`.
    #[arg(long)]
    dist: String,
    /// Distribution parameter `name=value`; repeat for each parameter.
    #[arg(long = "param", value_parser = parse_param, allow_hyphen_values = true)]
    params: Vec<(String, f64)>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value_t = Method::Analytic)]
    method: Method,
    /// Monte-Carlo sample size.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Add the objective at t* and the intermediate quantities.
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Numeric,
    Mc,
}

impl Method {
    fn as_str(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Numeric => "numeric",
            Method::Mc => "mc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let value: f64 = value.trim().parse().map_err(|_| format!("`{value}` is not a number"))?;
    Ok((name.trim().to_string(), value))
}

/// One output row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    pub distribution: String,
    pub params: BTreeMap<String, f64>,
    pub alpha: f64,
    pub method: Method,
    pub evar: f64,
    pub t_star: Option<f64>,
    pub branch: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceColumns>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceColumns {
    pub objective_at_t_star: f64,
    pub intermediates: BTreeMap<String, f64>,
}

impl OutputRecord {
    fn new(dist: &DistributionSpec, alpha: f64, method: Method, r: &EvarResult, trace: bool) -> Self {
        let t_star = match r.trace.t_star {
            Minimizer::At(t) => Some(t),
            Minimizer::ZeroLimit => Some(0.0),
            Minimizer::InfinityLimit => None,
        };
        Self {
            distribution: dist.tag().to_string(),
            params: dist.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            alpha,
            method,
            evar: r.value,
            t_star,
            branch: r.trace.branch_used.map(|b| b.as_str().to_string()),
            trace: trace.then(|| TraceColumns {
                objective_at_t_star: r.trace.objective_at_t_star,
                intermediates: r.trace.intermediates.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            }),
        }
    }

    fn csv_row(&self) -> String {
        let mut cols = vec![
            self.distribution.clone(),
            format_sig(self.alpha),
            self.method.as_str().to_string(),
            format_sig(self.evar),
            self.t_star.map(format_sig).unwrap_or_default(),
            self.branch.clone().unwrap_or_default(),
        ];
        if let Some(t) = &self.trace {
            cols.push(format_sig(t.objective_at_t_star));
            cols.extend(t.intermediates.values().map(|&v| format_sig(v)));
        }
        cols.join(",")
    }

    fn csv_header(&self) -> String {
        match &self.trace {
            None => CSV_HEADER.to_string(),
            Some(t) => {
                let mut h = format!("{CSV_HEADER},objective_at_t_star");
                for k in t.intermediates.keys() {
                    h.push(',');
                    h.push_str(k);
                }
                h
            }
        }
    }
}

/// Formats `x` with 12 significant digits, in the style of C's `%.12g`.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..DIGITS).contains(&exp) {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<EvarError> for Failure {
    fn from(e: EvarError) -> Self {
        let code = match e {
            EvarError::Parameter(_) | EvarError::Unsupported(_) => EXIT_USAGE,
            EvarError::Domain(_) | EvarError::Singularity(_) | EvarError::Convergence(_) => EXIT_NUMERIC,
        };
        Failure { code, message: e.to_string() }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure { code: EXIT_NUMERIC, message: format!("write failed: {e}") }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(command: Command, out: &mut impl Write) -> Result<u8, Failure> {
    match command {
        Command::Eval { dist, alpha, run, output } => {
            let spec = DistributionSpec::from_named(&dist.dist, &dist.params)?;
            let level = ConfidenceLevel::new(alpha)?;
            let r = compute(&spec, level, &run)?;
            let rec = OutputRecord::new(&spec, alpha, run.method, &r, output.trace);
            emit(out, output.format, &[rec]).map_err(io_failure)?;
            Ok(EXIT_OK)
        }
        Command::Sweep { dist, alpha_from, alpha_to, alpha_steps, run, output } => {
            let spec = DistributionSpec::from_named(&dist.dist, &dist.params)?;
            let grid = alpha_grid(alpha_from, alpha_to, alpha_steps)?;
            let results: Vec<_> = grid
                .par_iter()
                .map(|&a| compute(&spec, ConfidenceLevel::new(a)?, &run).map(|r| (a, r)))
                .collect();
            let mut records = Vec::with_capacity(results.len());
            for res in results {
                let (a, r) = res?;
                records.push(OutputRecord::new(&spec, a, run.method, &r, output.trace));
            }
            emit(out, output.format, &records).map_err(io_failure)?;
            Ok(EXIT_OK)
        }
        Command::Compare { dist, alpha, samples, seed, tol, format } => {
            let spec = DistributionSpec::from_named(&dist.dist, &dist.params)?;
            let level = ConfidenceLevel::new(alpha)?;
            if !(tol >= 0.0) {
                return Err(EvarError::Parameter(format!("tol must be non-negative, got {tol}")).into());
            }
            let opts = OracleOptions::default();
            let analytic = evar(&spec, level)?.value;
            let numeric = evar_numeric(&spec, level, &opts)?.value;
            let mc = samples
                .map(|n| evar_monte_carlo(&spec, level, n, seed, &opts).map(|r| r.value))
                .transpose()?;
            let report = CompareReport::new(&spec, alpha, analytic, numeric, mc);
            report.write(out, format).map_err(io_failure)?;
            Ok(if report.rel_diff > tol { EXIT_NUMERIC } else { EXIT_OK })
        }
    }
}

fn compute(spec: &DistributionSpec, level: ConfidenceLevel, run: &RunArgs) -> Result<EvarResult, EvarError> {
    let opts = OracleOptions::default();
    match run.method {
        Method::Analytic => evar(spec, level),
        Method::Numeric => evar_numeric(spec, level, &opts),
        Method::Mc => evar_monte_carlo(spec, level, run.samples, run.seed, &opts),
    }
}

fn alpha_grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, EvarError> {
    ConfidenceLevel::new(from)?;
    ConfidenceLevel::new(to)?;
    if !(from < to) {
        return Err(EvarError::Parameter(format!("--alpha-from ({from}) must be below --alpha-to ({to})")));
    }
    if steps < 2 {
        return Err(EvarError::Parameter(format!("--alpha-steps must be at least 2, got {steps}")));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { to } else { from + (to - from) * i as f64 / last })
        .collect())
}

fn emit(out: &mut impl Write, format: Format, records: &[OutputRecord]) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            let header = records.first().map_or_else(|| CSV_HEADER.to_string(), OutputRecord::csv_header);
            writeln!(out, "{header}")?;
            for r in records {
                writeln!(out, "{}", r.csv_row())?;
            }
        }
        Format::Json => {
            for r in records {
                writeln!(out, "{}", serde_json::to_string(r).expect("record serialises"))?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct CompareReport {
    distribution: String,
    params: BTreeMap<String, f64>,
    alpha: f64,
    analytic: f64,
    numeric: f64,
    mc: Option<f64>,
    abs_diff: f64,
    rel_diff: f64,
    mc_abs_diff: Option<f64>,
}

impl CompareReport {
    fn new(spec: &DistributionSpec, alpha: f64, analytic: f64, numeric: f64, mc: Option<f64>) -> Self {
        let abs_diff = (analytic - numeric).abs();
        Self {
            distribution: spec.tag().to_string(),
            params: spec.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            alpha,
            analytic,
            numeric,
            mc,
            abs_diff,
            rel_diff: abs_diff / (1.0 + analytic.abs()),
            mc_abs_diff: mc.map(|m| (m - analytic).abs()),
        }
    }

    fn write(&self, out: &mut impl Write, format: Format) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                let opt = |v: Option<f64>| v.map(format_sig).unwrap_or_default();
                writeln!(out, "{COMPARE_HEADER}")?;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    self.distribution,
                    format_sig(self.alpha),
                    format_sig(self.analytic),
                    format_sig(self.numeric),
                    opt(self.mc),
                    format_sig(self.abs_diff),
                    format_sig(self.rel_diff),
                    opt(self.mc_abs_diff),
                )
            }
            Format::Json => writeln!(out, "{}", serde_json::to_string(self).expect("report serialises")),
        }
    }
}
