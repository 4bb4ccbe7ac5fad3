//! Command-line front end. The `pconvex` binary is a thin wrapper around [`run`].
//!
//! Exit codes: 0 when nothing was violated, 2 when a bound was violated (or a
//! certificate found a counterexample), 1 on usage, configuration or runtime errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{full_report, ReportOptions, TheoremId};
use crate::convexity::{certify, ConvexityClass, Resolution, DEFAULT_TOLERANCE};
use crate::dsl::{FunctionSpec, Interval};
use crate::quadrature::{
    build_rule, integrate_direct, integrate_gauss_jacobi, integrate_reference, IntegralResult,
    WeightedProblem,
};
use crate::report::{emit_report, sig17, to_json_pretty, write_records_csv, Format};
use crate::sweep::{run_sweep, SweepConfig, SweepRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "pconvex",
    version,
    about = "Weighted integrals, Gauss-Jacobi rules and convexity bounds"
)]
pub struct Cli {
    /// Output format for documents and tables.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate ∫_a^b (x−a)^p (b−x)^q f(x) dx.
    Integrate {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Reference)]
        method: MethodArg,
        /// Node count for the Gauss-Jacobi method.
        #[arg(long, default_value_t = 20)]
        m: usize,
        #[arg(long, default_value_t = 1e-12)]
        rel_tol: f64,
    },
    /// Evaluate one bound together with its hypothesis certificate.
    Bound {
        #[arg(long)]
        theorem: TheoremId,
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "l")]
        k: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        l: Option<f64>,
        /// Accept l = 1 for P_POWER.
        #[arg(long)]
        allow_unit_power: bool,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long, default_value_t = 1e-12)]
        rel_tol: f64,
        #[arg(long, default_value_t = 1e-9)]
        slack_tolerance: f64,
    },
    /// Search for a counterexample to a convexity class.
    Certify {
        #[arg(long = "f", allow_hyphen_values = true)]
        f: FunctionSpec,
        #[command(flatten)]
        interval: IntervalArgs,
        #[arg(long)]
        class: ConvexityClass,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// Print Gauss-Jacobi nodes and weights for (x−a)^p (b−x)^q.
    QuadRule {
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
        #[arg(long, allow_hyphen_values = true)]
        q: f64,
        #[command(flatten)]
        interval: IntervalArgs,
        #[arg(long)]
        m: usize,
    },
    /// Run a sweep described by a TOML file.
    Verify {
        config: PathBuf,
        /// Directory for summary.json and the record file (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Reference,
    Direct,
    GaussJacobi,
}

#[derive(Debug, Args)]
pub struct IntervalArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    /// Permit a < 0.
    #[arg(long)]
    pub allow_negative_a: bool,
}

impl IntervalArgs {
    fn interval(&self) -> Result<Interval, String> {
        Interval::with_override(self.a, self.b, self.allow_negative_a).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[arg(long = "f", allow_hyphen_values = true)]
    pub f: FunctionSpec,
    #[command(flatten)]
    pub interval: IntervalArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub q: f64,
}

impl ProblemArgs {
    fn problem(&self) -> Result<WeightedProblem, String> {
        WeightedProblem::new(self.interval.interval()?, self.p, self.q, self.f.clone())
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = Resolution::default().xy_divisions)]
    pub xy_divisions: u32,
    #[arg(long, default_value_t = Resolution::default().t_divisions)]
    pub t_divisions: u32,
    #[arg(long, default_value_t = Resolution::default().random_trials)]
    pub random_trials: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub certify_tolerance: f64,
}

impl SamplingArgs {
    fn resolution(&self) -> Resolution {
        Resolution {
            xy_divisions: self.xy_divisions,
            t_divisions: self.t_divisions,
            random_trials: self.random_trials,
            seed: self.seed,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli, out, err),
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            if e.use_stderr() {
                EXIT_ERROR
            } else {
                EXIT_OK
            }
        }
    }
}

/// Runs an already parsed command line.
pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let format = cli.format;
    let doc_format = format.unwrap_or_default();
    match cli.command {
        Command::Integrate {
            problem,
            method,
            m,
            rel_tol,
        } => {
            let problem = problem.problem()?;
            let result = match method {
                MethodArg::Reference => integrate_reference(&problem, rel_tol),
                MethodArg::Direct => integrate_direct(&problem, rel_tol),
                MethodArg::GaussJacobi => integrate_gauss_jacobi(&problem, m),
            }
            .map_err(|e| e.to_string())?;
            match doc_format {
                Format::Json => print_json(out, &result)?,
                Format::Csv => print_table(out, &INTEGRAL_HEADER, [integral_row(&result)])?,
            }
            Ok(EXIT_OK)
        }
        Command::Bound {
            theorem,
            problem,
            k,
            l,
            allow_unit_power,
            sampling,
            rel_tol,
            slack_tolerance,
        } => {
            let problem = problem.problem()?;
            let param = k.or(l);
            if theorem == TheoremId::PPower && param == Some(1.0) && allow_unit_power {
                let _ = writeln!(
                    err,
                    "warning: P_POWER is stated for l > 1; evaluating the continuous extension at l = 1"
                );
            }
            let options = ReportOptions {
                resolution: sampling.resolution(),
                certify_tolerance: sampling.certify_tolerance,
                integrate_rel_tol: rel_tol,
                slack_tolerance,
                allow_unit_power,
            };
            let report =
                full_report(&problem, theorem, param, &options).map_err(|e| e.to_string())?;
            match doc_format {
                Format::Json => print_json(out, &report)?,
                Format::Csv => {
                    let record = SweepRecord::from_report(0, &problem, &report);
                    let mut buf = Vec::new();
                    write_records_csv(&mut buf, &[record]).map_err(|e| e.to_string())?;
                    out.write_all(&buf).map_err(|e| e.to_string())?;
                }
            }
            if report.violation {
                let _ = writeln!(
                    err,
                    "violation: {} bound {} is below the integral {} (slack {})",
                    theorem,
                    sig17(report.bound),
                    sig17(report.integral.value),
                    sig17(report.slack)
                );
                return Ok(EXIT_VIOLATION);
            }
            Ok(EXIT_OK)
        }
        Command::Certify {
            f,
            interval,
            class,
            sampling,
        } => {
            let cert = certify(
                &f,
                interval.interval()?,
                class,
                &sampling.resolution(),
                sampling.certify_tolerance,
            )
            .map_err(|e| e.to_string())?;
            match doc_format {
                Format::Json => print_json(out, &cert)?,
                Format::Csv => {
                    let w = cert.witness;
                    let row = vec![
                        cert.class.name().to_string(),
                        match cert.verdict {
                            crate::convexity::Verdict::NoCounterexample => "no_counterexample",
                            crate::convexity::Verdict::Counterexample => "counterexample",
                        }
                        .to_string(),
                        opt(w.map(|w| w.x)),
                        opt(w.map(|w| w.y)),
                        opt(w.map(|w| w.t)),
                        opt(w.map(|w| w.violation)),
                        cert.violations.to_string(),
                        cert.samples.to_string(),
                    ];
                    print_table(out, &CERTIFICATE_HEADER, [row])?;
                }
            }
            Ok(if cert.holds() {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }
        Command::QuadRule { p, q, interval, m } => {
            let rule = build_rule(p, q, interval.interval()?, m).map_err(|e| e.to_string())?;
            match doc_format {
                Format::Json => print_json(out, &rule)?,
                Format::Csv => {
                    let rows = rule
                        .nodes
                        .iter()
                        .zip(&rule.weights)
                        .enumerate()
                        .map(|(i, (x, w))| vec![i.to_string(), sig17(*x), sig17(*w)]);
                    print_table(out, &["index", "node", "weight"], rows)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Verify { config, out: dir } => {
            let mut config = SweepConfig::from_path(&config).map_err(|e| e.to_string())?;
            if let Some(f) = format {
                config.format = f;
            }
            let outcome = run_sweep(&config).map_err(|e| e.to_string())?;
            let summary = &outcome.summary;
            match dir.or(config.output_dir.clone()) {
                Some(dir) => {
                    let files = emit_report(summary, &outcome.records, &dir, config.format)
                        .map_err(|e| e.to_string())?;
                    let _ = writeln!(
                        err,
                        "wrote {} and {}",
                        files.summary.display(),
                        files.records.display()
                    );
                }
                None => {
                    let _ = writeln!(err, "no output directory given; records not written");
                }
            }
            print_json(out, summary)?;
            let _ = writeln!(
                err,
                "{} cases, {} hypothesis-satisfied, {} errored, {} violations in {:.1} s",
                summary.total_cases,
                summary.hypothesis_satisfied,
                summary.errored_cases,
                summary.violations,
                summary.runtime.as_secs_f64()
            );
            for r in outcome.records.iter().filter(|r| r.violation == Some(true)) {
                let _ = writeln!(
                    err,
                    "violation: case {} {} param={} f={} [{}, {}] p={} q={} bound={} integral={}",
                    r.case,
                    r.theorem,
                    opt(r.param),
                    r.function,
                    sig17(r.a),
                    sig17(r.b),
                    sig17(r.p),
                    sig17(r.q),
                    opt(r.bound),
                    opt(r.integral),
                );
            }
            Ok(if summary.violations > 0 {
                EXIT_VIOLATION
            } else {
                EXIT_OK
            })
        }
    }
}

const INTEGRAL_HEADER: [&str; 4] = ["value", "method", "error_estimate", "evaluations"];
const CERTIFICATE_HEADER: [&str; 8] = [
    "class",
    "verdict",
    "x",
    "y",
    "t",
    "violation",
    "violations",
    "samples",
];

fn opt(v: Option<f64>) -> String {
    v.map(sig17).unwrap_or_default()
}

fn integral_row(r: &IntegralResult) -> Vec<String> {
    let method = serde_json::to_value(r.method)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    vec![
        sig17(r.value),
        method,
        opt(r.error_estimate),
        r.evaluations.to_string(),
    ]
}

fn print_json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> Result<(), String> {
    writeln!(out, "{}", to_json_pretty(value)).map_err(|e| e.to_string())
}

fn print_table<R>(out: &mut dyn Write, header: &[&str], rows: R) -> Result<(), String>
where
    R: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(|e| e.to_string())?;
    for row in rows {
        w.write_record(&row).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}
