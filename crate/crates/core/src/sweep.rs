//! Batch verification over function corpora and parameter grids.
//!
//! Configuration is TOML. Keys:
//!
//! | key                 | type                 | default                |
//! |---------------------|----------------------|------------------------|
//! | `functions`         | list of expressions  | required               |
//! | `intervals`         | list of `[a, b]`     | required               |
//! | `p_grid`, `q_grid`  | lists of reals > 0   | required               |
//! | `k_grid`            | list of reals > 1    | `[]`                   |
//! | `l_grid`            | list of reals >= 1   | `[]`                   |
//! | `theorems`          | list of theorem ids  | all six                |
//! | `seed`              | integer              | `0`                    |
//! | `xy_divisions`      | integer              | `64`                   |
//! | `t_divisions`       | integer              | `32`                   |
//! | `random_trials`     | integer              | `10000`                |
//! | `certify_tolerance` | real                 | `1e-9`                 |
//! | `integrate_rel_tol` | real                 | `1e-12`                |
//! | `slack_tolerance`   | real                 | `1e-9`                 |
//! | `allow_unit_power`  | bool                 | `false`                |
//! | `allow_negative_a`  | bool                 | `false`                |
//! | `output_dir`        | path                 | none                   |
//! | `format`            | `"json"` or `"csv"`  | `"json"`               |
//!
//! Cases are enumerated function-major: function, interval, p, q, theorem
//! (in the listed order), then k or l. Record order follows this
//! enumeration regardless of how the work is scheduled.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{
    assemble_report, check_param, hypothesis_function, BoundReport, ParamKind, ReportOptions,
    TheoremId,
};
use crate::convexity::{certify, ConvexityCertificate, ConvexityClass, Resolution, Verdict};
use crate::dsl::{FunctionSpec, Interval};
use crate::quadrature::{integrate_reference, IntegralResult, WeightedProblem};
use crate::report::Format;

const BUNDLED: &str = include_str!("../configs/default_sweep.toml");

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

fn all_theorems() -> Vec<TheoremId> {
    TheoremId::ALL.to_vec()
}

fn default_xy() -> u32 {
    Resolution::default().xy_divisions
}

fn default_t() -> u32 {
    Resolution::default().t_divisions
}

fn default_trials() -> u32 {
    Resolution::default().random_trials
}

fn default_certify_tol() -> f64 {
    ReportOptions::default().certify_tolerance
}

fn default_rel_tol() -> f64 {
    ReportOptions::default().integrate_rel_tol
}

fn default_slack_tol() -> f64 {
    ReportOptions::default().slack_tolerance
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub functions: Vec<String>,
    pub intervals: Vec<[f64; 2]>,
    pub p_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    #[serde(default)]
    pub k_grid: Vec<f64>,
    #[serde(default)]
    pub l_grid: Vec<f64>,
    #[serde(default = "all_theorems")]
    pub theorems: Vec<TheoremId>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_xy")]
    pub xy_divisions: u32,
    #[serde(default = "default_t")]
    pub t_divisions: u32,
    #[serde(default = "default_trials")]
    pub random_trials: u32,
    #[serde(default = "default_certify_tol")]
    pub certify_tolerance: f64,
    #[serde(default = "default_rel_tol")]
    pub integrate_rel_tol: f64,
    #[serde(default = "default_slack_tol")]
    pub slack_tolerance: f64,
    #[serde(default)]
    pub allow_unit_power: bool,
    #[serde(default)]
    pub allow_negative_a: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// The bundled default corpus (`configs/default_sweep.toml`).
    pub fn bundled() -> Self {
        Self::from_toml_str(BUNDLED).expect("bundled sweep configuration parses")
    }

    /// A minimal configuration over the given functions and intervals.
    pub fn new(functions: &[&str], intervals: &[[f64; 2]], p_grid: &[f64], q_grid: &[f64]) -> Self {
        Self {
            functions: functions.iter().map(|s| s.to_string()).collect(),
            intervals: intervals.to_vec(),
            p_grid: p_grid.to_vec(),
            q_grid: q_grid.to_vec(),
            k_grid: Vec::new(),
            l_grid: Vec::new(),
            theorems: all_theorems(),
            seed: 0,
            xy_divisions: default_xy(),
            t_divisions: default_t(),
            random_trials: default_trials(),
            certify_tolerance: default_certify_tol(),
            integrate_rel_tol: default_rel_tol(),
            slack_tolerance: default_slack_tol(),
            allow_unit_power: false,
            allow_negative_a: false,
            output_dir: None,
            format: Format::Json,
        }
    }

    pub fn report_options(&self) -> ReportOptions {
        ReportOptions {
            resolution: Resolution {
                xy_divisions: self.xy_divisions,
                t_divisions: self.t_divisions,
                random_trials: self.random_trials,
                seed: self.seed,
            },
            certify_tolerance: self.certify_tolerance,
            integrate_rel_tol: self.integrate_rel_tol,
            slack_tolerance: self.slack_tolerance,
            allow_unit_power: self.allow_unit_power,
        }
    }

    fn validate(&self) -> Result<Plan, ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if self.functions.is_empty() {
            return invalid("`functions` is empty".into());
        }
        if self.intervals.is_empty() {
            return invalid("`intervals` is empty".into());
        }
        if self.theorems.is_empty() {
            return invalid("`theorems` is empty".into());
        }
        for (name, grid) in [("p_grid", &self.p_grid), ("q_grid", &self.q_grid)] {
            if grid.is_empty() {
                return invalid(format!("`{name}` is empty"));
            }
            if let Some(v) = grid.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return invalid(format!("`{name}` entries must be positive, got {v}"));
            }
        }
        let needs = |kind: ParamKind| self.theorems.iter().any(|t| t.param_kind() == kind);
        if needs(ParamKind::K) && self.k_grid.is_empty() {
            return invalid("`k_grid` is empty but a k-parameterized theorem is selected".into());
        }
        if needs(ParamKind::L) && self.l_grid.is_empty() {
            return invalid("`l_grid` is empty but an l-parameterized theorem is selected".into());
        }
        if let Some(k) = self.k_grid.iter().find(|&&k| !(k > 1.0 && k.is_finite())) {
            return invalid(format!("`k_grid` entries must exceed 1, got {k}"));
        }
        if let Some(l) = self.l_grid.iter().find(|&&l| !(l >= 1.0 && l.is_finite())) {
            return invalid(format!("`l_grid` entries must be at least 1, got {l}"));
        }
        let options = self.report_options();
        for &theorem in &self.theorems {
            for param in self.params_for(theorem) {
                check_param(theorem, param, options.allow_unit_power)
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            }
        }
        if !(options.certify_tolerance.is_finite() && options.certify_tolerance > 0.0) {
            return invalid("`certify_tolerance` must be positive".into());
        }
        if !(options.integrate_rel_tol > 1e-14 && options.integrate_rel_tol < 1e-2) {
            return invalid("`integrate_rel_tol` must lie in (1e-14, 1e-2)".into());
        }
        if !(options.slack_tolerance.is_finite() && options.slack_tolerance >= 0.0) {
            return invalid("`slack_tolerance` must be nonnegative".into());
        }
        if self.xy_divisions == 0 || self.t_divisions == 0 {
            return invalid("grid divisions must be at least 1".into());
        }

        let functions = self
            .functions
            .iter()
            .map(|src| {
                FunctionSpec::parse(src)
                    .map_err(|e| ConfigError::Invalid(format!("function `{src}`: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let intervals = self
            .intervals
            .iter()
            .map(|&[a, b]| {
                Interval::with_override(a, b, self.allow_negative_a)
                    .map_err(|e| ConfigError::Invalid(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut cases = Vec::new();
        for fi in 0..functions.len() {
            for ii in 0..intervals.len() {
                for pi in 0..self.p_grid.len() {
                    for qi in 0..self.q_grid.len() {
                        for &theorem in &self.theorems {
                            for param in self.params_for(theorem) {
                                cases.push(CaseSpec {
                                    function: fi,
                                    interval: ii,
                                    p: pi,
                                    q: qi,
                                    theorem,
                                    param,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(Plan {
            functions,
            intervals,
            cases,
            options,
        })
    }

    fn params_for(&self, theorem: TheoremId) -> Vec<Option<f64>> {
        match theorem.param_kind() {
            ParamKind::None => vec![None],
            ParamKind::K => self.k_grid.iter().copied().map(Some).collect(),
            ParamKind::L => self.l_grid.iter().copied().map(Some).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct CaseSpec {
    function: usize,
    interval: usize,
    p: usize,
    q: usize,
    theorem: TheoremId,
    param: Option<f64>,
}

impl CaseSpec {
    fn certificate_key(&self) -> CertificateKey {
        CertificateKey {
            function: self.function,
            interval: self.interval,
            class: self.theorem.class(),
            exponent: self
                .theorem
                .hypothesis_exponent(self.param)
                .map(f64::to_bits),
        }
    }

    fn integral_key(&self) -> (usize, usize, usize, usize) {
        (self.function, self.interval, self.p, self.q)
    }
}

/// Certificates depend on the hypothesis function and class only, not on p or q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct CertificateKey {
    function: usize,
    interval: usize,
    class: ConvexityClass,
    exponent: Option<u64>,
}

struct Plan {
    functions: Vec<FunctionSpec>,
    intervals: Vec<Interval>,
    cases: Vec<CaseSpec>,
    options: ReportOptions,
}

/// One line of the record stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub case: usize,
    pub theorem: TheoremId,
    pub param: Option<f64>,
    pub function: String,
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub q: f64,
    pub hypothesis_function: Option<String>,
    pub hypothesis_verdict: Option<Verdict>,
    pub hypothesis_violation: Option<f64>,
    pub f_a: Option<f64>,
    pub f_b: Option<f64>,
    pub bound: Option<f64>,
    pub integral: Option<f64>,
    pub integral_error: Option<f64>,
    pub slack: Option<f64>,
    pub tightness: Option<f64>,
    pub holds: Option<bool>,
    pub holds_for_abs_integral: Option<bool>,
    pub violation: Option<bool>,
    pub error: Option<String>,
}

impl SweepRecord {
    fn blank(
        case: usize,
        problem: &WeightedProblem,
        theorem: TheoremId,
        param: Option<f64>,
    ) -> Self {
        Self {
            case,
            theorem,
            param,
            function: problem.f.source().to_string(),
            a: problem.a(),
            b: problem.b(),
            p: problem.p,
            q: problem.q,
            hypothesis_function: None,
            hypothesis_verdict: None,
            hypothesis_violation: None,
            f_a: None,
            f_b: None,
            bound: None,
            integral: None,
            integral_error: None,
            slack: None,
            tightness: None,
            holds: None,
            holds_for_abs_integral: None,
            violation: None,
            error: None,
        }
    }

    pub fn from_report(case: usize, problem: &WeightedProblem, report: &BoundReport) -> Self {
        let cert = &report.hypothesis_certificate;
        Self {
            hypothesis_function: Some(report.hypothesis_function.clone()),
            hypothesis_verdict: Some(cert.verdict),
            hypothesis_violation: cert.witness.map(|w| w.violation),
            f_a: Some(report.endpoint_values.f_a),
            f_b: Some(report.endpoint_values.f_b),
            bound: Some(report.bound),
            integral: Some(report.integral.value),
            integral_error: report.integral.error_estimate,
            slack: Some(report.slack),
            tightness: report.tightness,
            holds: Some(report.holds),
            holds_for_abs_integral: Some(report.holds_for_abs_integral),
            violation: Some(report.violation),
            ..Self::blank(case, problem, report.theorem, report.param)
        }
    }

    fn failed(
        case: usize,
        problem: &WeightedProblem,
        theorem: TheoremId,
        param: Option<f64>,
        error: String,
    ) -> Self {
        Self {
            error: Some(error),
            ..Self::blank(case, problem, theorem, param)
        }
    }

    pub fn hypothesis_satisfied(&self) -> bool {
        self.error.is_none() && self.hypothesis_verdict == Some(Verdict::NoCounterexample)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub mean: f64,
}

impl Distribution {
    fn of(values: &mut [f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        values.sort_by(f64::total_cmp);
        let n = values.len();
        let median = if n % 2 == 1 {
            values[n / 2]
        } else {
            0.5 * (values[n / 2 - 1] + values[n / 2])
        };
        Some(Self {
            min: values[0],
            median,
            max: values[n - 1],
            mean: values.iter().sum::<f64>() / n as f64,
        })
    }
}

/// Statistics over the hypothesis-satisfied cases of one theorem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremSummary {
    pub theorem: TheoremId,
    pub cases: usize,
    pub errored: usize,
    pub hypothesis_satisfied: usize,
    pub violations: usize,
    pub abs_integral_failures: usize,
    pub min_slack: Option<f64>,
    pub median_slack: Option<f64>,
    /// `integral / bound` over cases with a nonzero bound.
    pub tightness: Option<Distribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub total_cases: usize,
    pub errored_cases: usize,
    pub hypothesis_satisfied: usize,
    pub violations: usize,
    /// Case ids of every violation; the records hold the full reproduction data.
    pub violation_cases: Vec<usize>,
    pub per_theorem: Vec<TheoremSummary>,
    /// Wall-clock time; kept out of the emitted files so they stay reproducible.
    #[serde(skip)]
    pub runtime: Duration,
}

/// Recomputes the summary from a record stream.
pub fn summarize(records: &[SweepRecord]) -> SweepSummary {
    let mut theorems: Vec<TheoremId> = records.iter().map(|r| r.theorem).collect();
    theorems.sort();
    theorems.dedup();
    let per_theorem = theorems
        .into_iter()
        .map(|theorem| {
            let mine: Vec<&SweepRecord> = records.iter().filter(|r| r.theorem == theorem).collect();
            let satisfied: Vec<&SweepRecord> = mine
                .iter()
                .copied()
                .filter(|r| r.hypothesis_satisfied())
                .collect();
            let mut slacks: Vec<f64> = satisfied.iter().filter_map(|r| r.slack).collect();
            let slack_dist = Distribution::of(&mut slacks);
            let mut ratios: Vec<f64> = satisfied.iter().filter_map(|r| r.tightness).collect();
            TheoremSummary {
                theorem,
                cases: mine.len(),
                errored: mine.iter().filter(|r| r.error.is_some()).count(),
                hypothesis_satisfied: satisfied.len(),
                violations: satisfied
                    .iter()
                    .filter(|r| r.violation == Some(true))
                    .count(),
                abs_integral_failures: satisfied
                    .iter()
                    .filter(|r| r.holds_for_abs_integral == Some(false))
                    .count(),
                min_slack: slack_dist.as_ref().map(|d| d.min),
                median_slack: slack_dist.as_ref().map(|d| d.median),
                tightness: Distribution::of(&mut ratios),
            }
        })
        .collect();
    let violation_cases: Vec<usize> = records
        .iter()
        .filter(|r| r.violation == Some(true))
        .map(|r| r.case)
        .collect();
    SweepSummary {
        total_cases: records.len(),
        errored_cases: records.iter().filter(|r| r.error.is_some()).count(),
        hypothesis_satisfied: records.iter().filter(|r| r.hypothesis_satisfied()).count(),
        violations: violation_cases.len(),
        violation_cases,
        per_theorem,
        runtime: Duration::ZERO,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub summary: SweepSummary,
    pub records: Vec<SweepRecord>,
}

/// Runs every case of `config`. Per-case failures become error records.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutcome, ConfigError> {
    let start = Instant::now();
    let plan = config.validate()?;
    let opts = plan.options;

    let mut cert_keys: Vec<(CertificateKey, CaseSpec)> = Vec::new();
    let mut seen = HashMap::new();
    for case in &plan.cases {
        let key = case.certificate_key();
        if seen.insert(key, ()).is_none() {
            cert_keys.push((key, *case));
        }
    }
    let certificates: HashMap<CertificateKey, Result<ConvexityCertificate, String>> = cert_keys
        .par_iter()
        .map(|(key, case)| {
            let f = &plan.functions[case.function];
            let result = hypothesis_function(f, case.theorem, case.param)
                .map_err(|e| e.to_string())
                .and_then(|h| {
                    certify(
                        &h,
                        plan.intervals[case.interval],
                        case.theorem.class(),
                        &opts.resolution,
                        opts.certify_tolerance,
                    )
                    .map_err(|e| format!("hypothesis certification failed: {e}"))
                });
            (*key, result)
        })
        .collect();

    let problem_for = |case: &CaseSpec| WeightedProblem {
        interval: plan.intervals[case.interval],
        p: config.p_grid[case.p],
        q: config.q_grid[case.q],
        f: plan.functions[case.function].clone(),
    };

    let mut integral_keys = Vec::new();
    let mut seen = HashMap::new();
    for case in &plan.cases {
        if seen.insert(case.integral_key(), ()).is_none() {
            integral_keys.push(*case);
        }
    }
    let integrals: HashMap<(usize, usize, usize, usize), Result<IntegralResult, String>> =
        integral_keys
            .par_iter()
            .map(|case| {
                let result = integrate_reference(&problem_for(case), opts.integrate_rel_tol)
                    .map_err(|e| format!("integration failed: {e}"));
                (case.integral_key(), result)
            })
            .collect();

    let records: Vec<SweepRecord> = plan
        .cases
        .par_iter()
        .enumerate()
        .map(|(id, case)| {
            let problem = problem_for(case);
            let cert = &certificates[&case.certificate_key()];
            let integral = &integrals[&case.integral_key()];
            let fail =
                |msg: String| SweepRecord::failed(id, &problem, case.theorem, case.param, msg);
            match (cert, integral) {
                (Err(e), _) | (_, Err(e)) => fail(e.clone()),
                (Ok(cert), Ok(integral)) => {
                    match assemble_report(
                        &problem,
                        case.theorem,
                        case.param,
                        cert.clone(),
                        *integral,
                        &opts,
                    ) {
                        Ok(report) => SweepRecord::from_report(id, &problem, &report),
                        Err(e) => fail(e.to_string()),
                    }
                }
            }
        })
        .collect();

    let mut summary = summarize(&records);
    summary.runtime = start.elapsed();
    Ok(SweepOutcome { summary, records })
}
