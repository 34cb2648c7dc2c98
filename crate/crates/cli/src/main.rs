//! `bernoulli`: command-line front end to the computational core.
//!
//! Exit codes: 0 success, 1 other failure, 2 syntax or degenerate input,
//! 3 reducible polynomial, 4 precision exhausted, 5 budget exceeded,
//! 6 not monic or not Salem, 7 square-root reduction did not terminate.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use bernoulli_core::algebraic::{classify, sqrt_tower_reduce, AlgebraicNumber};
use bernoulli_core::measure::{branching_growth_with, density_profile, local_dimension_profile_with};
use bernoulli_core::powersum::{gap_reduction_check, gap_series_with, garsia_entropy_with, growth_report_with};
use bernoulli_core::spectra::{power_traces, trace_residual_report, unit_circle_partial_sums};
use bernoulli_core::{Enclosed, Error, FieldElem};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use config::{Format, RunConfig};
use output::Output;

#[derive(Parser)]
#[command(name = "bernoulli", version, about = "Exact computations for Bernoulli convolutions with algebraic parameter")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Starting working precision in bits (≥ 64)
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    /// Maximum number of digit strings per enumeration (≥ 1024)
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Worker threads (results do not depend on this)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for cached level sets
    #[arg(long, global = true, env = "BCONV_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Configuration file with key=value lines; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Emit JSON lines
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV rows on stdout and the JSON envelope on stderr
    #[arg(long, global = true)]
    csv: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Irreducibility, θ and its classification
    Classify { poly: String },
    /// Distinct power-sum counts d_n and growth bounds
    Dn {
        poly: String,
        #[arg(long, default_value_t = 16)]
        nmax: usize,
    },
    /// Minimal and maximal gaps of the signed power-sum sets
    Gaps {
        poly: String,
        #[arg(long, default_value_t = 12)]
        nmax: usize,
    },
    /// Garsia entropy H_n and the dimension estimate
    Entropy {
        poly: String,
        #[arg(long, default_value_t = 16)]
        n: usize,
    },
    /// Measure bounds and local-dimension ratios over the gaps of a level
    Measure {
        poly: String,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        depth: usize,
    },
    /// Branching counts β_n for seeded random points
    Branching {
        poly: String,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Digits of each sampled point
        #[arg(long = "N", default_value_t = 28)]
        big_n: usize,
        #[arg(long, default_value_t = 20)]
        nmax: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Traces tr(θ^n) and residuals against the dominant conjugates
    Traces {
        poly: String,
        #[arg(long = "N", default_value_t = 100)]
        big_n: usize,
    },
    /// Partial sums of Re θ_j^k over the unit-circle conjugates of a Salem number
    SalemSums {
        poly: String,
        #[arg(long = "N", default_value_t = 200)]
        big_n: usize,
    },
    /// Two-sided density estimates at exact points
    Density {
        poly: String,
        /// Comma-separated points: rationals `p/q`, or `rT` for r·1/(θ−1)
        #[arg(long, default_value = "0,1/2T")]
        points: String,
        /// Comma-separated radius exponents m (radius θ^{−m})
        #[arg(long, default_value = "2,4,6,8")]
        m: String,
    },
    /// Extract square roots while the minimal polynomial is even
    SqrtReduce {
        poly: String,
        /// Also compare gap series of θ and √θ up to this level
        #[arg(long)]
        gap_nmax: Option<usize>,
    },
}

enum Failure {
    Core(Error),
    Usage(String),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Syntax { .. } | Error::ZeroPolynomial | Error::DegreeZero => 2,
        Error::Reducible { .. } => 3,
        Error::PrecisionExhausted { .. } => 4,
        Error::BudgetExceeded { .. } => 5,
        Error::NotMonic | Error::NotSalem => 6,
        Error::ReductionDidNotTerminate { .. } => 7,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn resolve(g: &Global) -> Result<RunConfig, String> {
    let mut c = RunConfig::default();
    if let Some(path) = &g.config {
        c.load_file(path)?;
    }
    if let Some(b) = g.precision_bits {
        c.settings.precision_bits = b;
    }
    if let Some(b) = g.budget {
        c.settings.budget = b;
    }
    if let Some(t) = g.threads {
        c.threads = Some(t);
    }
    if let Some(d) = &g.cache_dir {
        c.settings.cache_dir = Some(d.clone());
    }
    if g.json {
        c.format = Format::Json;
    } else if g.csv {
        c.format = Format::Csv;
    }
    c.validate()?;
    Ok(c)
}

struct Run {
    config: RunConfig,
    start: Instant,
}

impl Run {
    fn number(&self, poly: &str) -> Result<AlgebraicNumber, Error> {
        AlgebraicNumber::parse(poly, &self.config.settings)
    }

    fn envelope(&self, command: &str, a: &AlgebraicNumber, parameters: Value, payload: Value) -> Result<Value, Failure> {
        Ok(json!({
            "type": "envelope",
            "tool": "bernoulli",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "minpoly": a.minpoly().to_string(),
            "theta": Enclosed::from(&a.theta(128)),
            "classification": classify(a)?,
            "parameters": parameters,
            "payload": payload,
            "wall_time_ms": self.start.elapsed().as_secs_f64() * 1e3,
        }))
    }

    fn settings_json(&self) -> Value {
        let s = &self.config.settings;
        json!({ "precision_bits": s.precision_bits, "budget": s.budget, "guard": s.guard })
    }
}

fn to_value(v: &impl Serialize) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::Io(e.into()))
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, Failure> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| Failure::Usage(format!("invalid {what} {s:?}"))))
        .collect()
}

/// `p/q`, or `rT` meaning `r/(θ−1)`.
fn parse_point(a: &AlgebraicNumber, text: &str) -> Result<FieldElem, Failure> {
    let text = text.trim();
    let (r, scaled) = match text.strip_suffix('T') {
        Some("") => ("1", true),
        Some(r) => (r, true),
        None => (text, false),
    };
    let bad = || Failure::Usage(format!("invalid point {text:?}"));
    let q = match r.split_once('/') {
        Some((p, q)) => {
            let (p, q): (BigInt, BigInt) = (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?);
            if q == BigInt::from(0) {
                return Err(bad());
            }
            BigRational::new(p, q)
        }
        None => BigRational::from_integer(r.parse().map_err(|_| bad())?),
    };
    let f = a.field();
    let x = f.from_rational(&q);
    Ok(if scaled { f.mul(&x, &f.support_constant()) } else { x })
}

#[derive(Serialize)]
struct BranchingRow<'a> {
    sample: usize,
    x: &'a str,
    n: usize,
    beta: u64,
    growth: Option<f64>,
}

#[derive(Serialize)]
struct PartialSumRow {
    conjugate: usize,
    arg: f64,
    n: usize,
    p: Enclosed,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = resolve(&cli.global).map_err(Failure::Usage)?;
    if let Some(t) = config.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let format = config.format;
    let run = Run { config, start: Instant::now() };
    match cli.command {
        Command::Classify { poly } => {
            let a = run.number(&poly)?;
            let out = Output::new(format, "classify");
            let payload = to_value(&classify(&a)?)?;
            out.finish(&run.envelope("classify", &a, json!({ "settings": run.settings_json() }), payload)?)?;
        }
        Command::Dn { poly, nmax } => {
            let a = run.number(&poly)?;
            let mut out = Output::new(format, "dn");
            let report = growth_report_with(&a, nmax, |r| out.push(r))?;
            let params = json!({ "nmax": nmax, "settings": run.settings_json() });
            out.finish(&run.envelope("dn", &a, params, to_value(&report)?)?)?;
        }
        Command::Gaps { poly, nmax } => {
            let a = run.number(&poly)?;
            let mut out = Output::new(format, "gaps");
            let report = gap_series_with(&a, nmax, |r| out.push(r))?;
            let params = json!({ "nmax": nmax, "alphabet": "-1,0,1", "settings": run.settings_json() });
            out.finish(&run.envelope("gaps", &a, params, to_value(&report)?)?)?;
        }
        Command::Entropy { poly, n } => {
            let a = run.number(&poly)?;
            let mut out = Output::new(format, "entropy");
            let report = garsia_entropy_with(&a, n, |r| out.push(r))?;
            let params = json!({ "n": n, "settings": run.settings_json() });
            out.finish(&run.envelope("entropy", &a, params, to_value(&report)?)?)?;
        }
        Command::Measure { poly, n, depth } => {
            let a = run.number(&poly)?;
            let mut out = Output::new(format, "measure");
            let profile = local_dimension_profile_with(&a, n, depth, |r| out.push(r))?;
            let params = json!({ "n": n, "depth": depth, "settings": run.settings_json() });
            out.finish(&run.envelope("measure", &a, params, to_value(&profile.summary)?)?)?;
        }
        Command::Branching { poly, samples, big_n, nmax, seed } => {
            let a = run.number(&poly)?;
            let seed = seed.unwrap_or(run.config.seed);
            let mut out = Output::new(format, "branching");
            let report = branching_growth_with(&a, samples, big_n, nmax, seed, |i, r| {
                let x: String = r.digits.iter().map(|d| char::from(b'0' + d)).collect();
                for (n, &beta) in r.beta.iter().enumerate().skip(1) {
                    let row = BranchingRow { sample: i, x: &x, n, beta, growth: r.growth.get(n - 1).copied() };
                    out.push(&row);
                }
            })?;
            let params = json!({ "samples": samples, "N": big_n, "nmax": nmax, "seed": seed, "settings": run.settings_json() });
            out.finish(&run.envelope("branching", &a, params, to_value(&report)?)?)?;
        }
        Command::Traces { poly, big_n } => {
            let a = run.number(&poly)?;
            power_traces(a.minpoly(), big_n, a.settings().trace_cap)?;
            let report = trace_residual_report(&a, big_n)?;
            let mut out = Output::new(format, "traces");
            for r in &report.rows {
                out.row(r)?;
            }
            let payload = json!({ "s": report.s, "max_normalized": report.max_normalized, "max_abs_real": report.max_abs_real });
            let params = json!({ "N": big_n, "settings": run.settings_json() });
            out.finish(&run.envelope("traces", &a, params, payload)?)?;
        }
        Command::SalemSums { poly, big_n } => {
            let a = run.number(&poly)?;
            let series = unit_circle_partial_sums(&a, big_n)?;
            let mut out = Output::new(format, "salem-sums");
            for s in &series.series {
                for (k, (&v, &e)) in s.sums.iter().zip(&s.errors).enumerate() {
                    out.row(&PartialSumRow { conjugate: s.conjugate, arg: s.arg, n: k + 1, p: Enclosed { value: v, err: e } })?;
                }
            }
            let summary: Vec<Value> = series
                .series
                .iter()
                .map(|s| json!({ "conjugate": s.conjugate, "arg": s.arg, "bound": s.bound, "sup_abs": s.sup_abs, "exponent": s.exponent }))
                .collect();
            let params = json!({ "N": big_n, "settings": run.settings_json() });
            out.finish(&run.envelope("salem-sums", &a, params, json!({ "conjugates": summary }))?)?;
        }
        Command::Density { poly, points, m } => {
            let a = run.number(&poly)?;
            let xs = points.split(',').map(|p| parse_point(&a, p)).collect::<Result<Vec<_>, _>>()?;
            let ms: Vec<usize> = parse_list(&m, "depth")?;
            let rows = density_profile(&a, &xs, &ms)?;
            let mut out = Output::new(format, "density");
            for r in &rows {
                out.row(r)?;
            }
            let params = json!({ "points": points, "m": ms, "settings": run.settings_json() });
            out.finish(&run.envelope("density", &a, params, json!({ "rows": rows.len() }))?)?;
        }
        Command::SqrtReduce { poly, gap_nmax } => {
            let a = run.number(&poly)?;
            let red = sqrt_tower_reduce(&a, a.settings().max_reduction_steps)?;
            let gaps = match gap_nmax {
                Some(n) => Some(to_value(&gap_reduction_check(&a, n)?)?),
                None => None,
            };
            let payload = json!({
                "steps": red.steps,
                "alpha_minpoly": red.alpha.minpoly().to_string(),
                "alpha": Enclosed::from(&red.alpha.theta(128)),
                "gap_check": gaps,
            });
            let out = Output::new(format, "sqrt-reduce");
            let params = json!({ "gap_nmax": gap_nmax, "settings": run.settings_json() });
            out.finish(&run.envelope("sqrt-reduce", &a, params, payload)?)?;
        }
    }
    Ok(())
}
