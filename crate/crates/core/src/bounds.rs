//! Closed-form upper bounds for the weighted integral.
//!
//! Every bound has the shape `(b−a)^{p+q+1} · B · E`, where `B` is a Beta
//! factor and `E` combines the endpoint values `f(a)`, `f(b)`:
//!
//! | theorem    | hypothesis                      | `B`                         | `E`                                   |
//! |------------|---------------------------------|-----------------------------|---------------------------------------|
//! | `Q_PLAIN`  | `f` quasi-convex                | `β(p+1, q+1)`               | `max{f(a), f(b)}`                     |
//! | `Q_HOLDER` | `|f|^{k/(k−1)}` quasi-convex    | `β(kp+1, kq+1)^{1/k}`       | `max{|f(a)|^r, |f(b)|^r}^{1/r}`       |
//! | `Q_POWER`  | `|f|^l` quasi-convex            | `β(p+1, q+1)`               | `max{|f(a)|^l, |f(b)|^l}^{1/l}`       |
//! | `P_PLAIN`  | `|f|` P-convex                  | `β(p+1, q+1)`               | `|f(a)| + |f(b)|`                     |
//! | `P_HOLDER` | `|f|^{k/(k−1)}` P-convex        | `β(kp+1, kq+1)^{1/k}`       | `(|f(a)|^r + |f(b)|^r)^{1/r}`         |
//! | `P_POWER`  | `|f|^l` P-convex                | `β(p+1, q+1)`               | `(|f(a)|^l + |f(b)|^l)^{1/l}`         |
//!
//! with `r = k/(k−1)`. [`full_report`] certifies the hypothesis by sampling,
//! integrates, and assembles both sides. A failed hypothesis is reported,
//! not raised.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convexity::{certify, CertifyError, ConvexityCertificate, ConvexityClass, Resolution};
use crate::dsl::{EvalError, ExponentError, FunctionSpec};
use crate::quadrature::{integrate_reference, IntegralResult, QuadratureError, WeightedProblem};
use crate::special::{ln_beta_checked, DomainError};

pub const MAX_HOLDER_K: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TheoremId {
    QPlain,
    QHolder,
    QPower,
    PPlain,
    PHolder,
    PPower,
}

/// Which extra parameter a theorem takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    None,
    K,
    L,
}

impl TheoremId {
    pub const ALL: [TheoremId; 6] = [
        Self::QPlain,
        Self::QHolder,
        Self::QPower,
        Self::PPlain,
        Self::PHolder,
        Self::PPower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::QPlain => "Q_PLAIN",
            Self::QHolder => "Q_HOLDER",
            Self::QPower => "Q_POWER",
            Self::PPlain => "P_PLAIN",
            Self::PHolder => "P_HOLDER",
            Self::PPower => "P_POWER",
        }
    }

    pub fn param_kind(self) -> ParamKind {
        match self {
            Self::QPlain | Self::PPlain => ParamKind::None,
            Self::QHolder | Self::PHolder => ParamKind::K,
            Self::QPower | Self::PPower => ParamKind::L,
        }
    }

    pub fn class(self) -> ConvexityClass {
        match self {
            Self::QPlain | Self::QHolder | Self::QPower => ConvexityClass::QuasiConvex,
            Self::PPlain | Self::PHolder | Self::PPower => ConvexityClass::PConvex,
        }
    }

    /// Exponent `s` of the hypothesis function `|f|^s`; `None` means `f` itself.
    pub fn hypothesis_exponent(self, param: Option<f64>) -> Option<f64> {
        match (self, param) {
            (Self::QPlain, _) => None,
            (Self::PPlain, _) => Some(1.0),
            (Self::QHolder | Self::PHolder, Some(k)) => Some(k / (k - 1.0)),
            (Self::QPower | Self::PPower, Some(l)) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TheoremId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                format!(
                    "unknown theorem `{s}` (expected one of {})",
                    Self::ALL.map(|t| t.name()).join(", ")
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("{theorem} requires {what}, got {value}")]
    Parameter {
        theorem: TheoremId,
        what: &'static str,
        value: f64,
    },
    #[error("{theorem} takes no extra parameter")]
    UnexpectedParameter { theorem: TheoremId },
    #[error("{theorem} requires a {name} parameter")]
    MissingParameter {
        theorem: TheoremId,
        name: &'static str,
    },
    #[error("endpoint evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error("hypothesis certification failed: {0}")]
    Certify(#[from] CertifyError),
    #[error("integration failed: {0}")]
    Quadrature(#[from] QuadratureError),
}

fn endpoints(problem: &WeightedProblem) -> Result<(f64, f64), EvalError> {
    Ok((problem.f.eval(problem.a())?, problem.f.eval(problem.b())?))
}

/// `(b−a)^{p+q+1} β(p+1, q+1)`
fn plain_factor(problem: &WeightedProblem) -> Result<f64, DomainError> {
    let ln_b = ln_beta_checked(problem.p + 1.0, problem.q + 1.0)?;
    Ok(problem.scale() * ln_b.exp())
}

/// `(b−a)^{p+q+1} β(kp+1, kq+1)^{1/k}`, with the root taken in log space.
fn holder_factor(problem: &WeightedProblem, k: f64) -> Result<f64, DomainError> {
    let ln_b = ln_beta_checked(k * problem.p + 1.0, k * problem.q + 1.0)?;
    Ok(problem.scale() * (ln_b / k).exp())
}

/// `max{u^s, v^s}^{1/s}` for `u, v >= 0`, scaled by the larger argument like
/// [`sum_power_mean`] so that the two means compare exactly.
fn max_power_mean(u: f64, v: f64, s: f64) -> f64 {
    let m = u.max(v);
    if m == 0.0 {
        return 0.0;
    }
    m * (u / m).powf(s).max((v / m).powf(s)).powf(1.0 / s)
}

/// `(u^s + v^s)^{1/s}` for `u, v >= 0`, scaled by the larger argument.
fn sum_power_mean(u: f64, v: f64, s: f64) -> f64 {
    let m = u.max(v);
    if m == 0.0 {
        return 0.0;
    }
    m * ((u / m).powf(s) + (v / m).powf(s)).powf(1.0 / s)
}

fn check_k(theorem: TheoremId, k: f64) -> Result<(), BoundError> {
    if !(k > 1.0 && k <= MAX_HOLDER_K) {
        return Err(BoundError::Parameter {
            theorem,
            what: "k in (1, 1000]",
            value: k,
        });
    }
    Ok(())
}

fn check_l(theorem: TheoremId, l: f64, allow_unit: bool) -> Result<(), BoundError> {
    let ok = match theorem {
        TheoremId::PPower if !allow_unit => l > 1.0,
        _ => l >= 1.0,
    };
    if !(ok && l.is_finite()) {
        let what = if theorem == TheoremId::PPower && !allow_unit {
            "l > 1"
        } else {
            "l >= 1"
        };
        return Err(BoundError::Parameter {
            theorem,
            what,
            value: l,
        });
    }
    Ok(())
}

/// Quasi-convex `f`: `(b−a)^{p+q+1} β(p+1, q+1) max{f(a), f(b)}`.
pub fn bound_q_plain(problem: &WeightedProblem) -> Result<f64, BoundError> {
    let (fa, fb) = endpoints(problem)?;
    Ok(plain_factor(problem)? * fa.max(fb))
}

/// Quasi-convex `|f|^{k/(k−1)}`.
pub fn bound_q_holder(problem: &WeightedProblem, k: f64) -> Result<f64, BoundError> {
    check_k(TheoremId::QHolder, k)?;
    let (fa, fb) = endpoints(problem)?;
    let r = k / (k - 1.0);
    Ok(holder_factor(problem, k)? * max_power_mean(fa.abs(), fb.abs(), r))
}

/// Quasi-convex `|f|^l`. The endpoint term equals `max{|f(a)|, |f(b)|}` for every `l`.
pub fn bound_q_power(problem: &WeightedProblem, l: f64) -> Result<f64, BoundError> {
    check_l(TheoremId::QPower, l, true)?;
    let (fa, fb) = endpoints(problem)?;
    Ok(plain_factor(problem)? * max_power_mean(fa.abs(), fb.abs(), l))
}

/// P-convex `|f|`: `(b−a)^{p+q+1} β(p+1, q+1) (|f(a)| + |f(b)|)`.
pub fn bound_p_plain(problem: &WeightedProblem) -> Result<f64, BoundError> {
    let (fa, fb) = endpoints(problem)?;
    Ok(plain_factor(problem)? * (fa.abs() + fb.abs()))
}

/// P-convex `|f|^{k/(k−1)}`.
pub fn bound_p_holder(problem: &WeightedProblem, k: f64) -> Result<f64, BoundError> {
    check_k(TheoremId::PHolder, k)?;
    let (fa, fb) = endpoints(problem)?;
    let r = k / (k - 1.0);
    Ok(holder_factor(problem, k)? * sum_power_mean(fa.abs(), fb.abs(), r))
}

/// P-convex `|f|^l`, `l > 1`.
pub fn bound_p_power(problem: &WeightedProblem, l: f64) -> Result<f64, BoundError> {
    bound_p_power_relaxed(problem, l, false)
}

/// [`bound_p_power`], optionally admitting `l = 1`.
pub fn bound_p_power_relaxed(
    problem: &WeightedProblem,
    l: f64,
    allow_unit: bool,
) -> Result<f64, BoundError> {
    check_l(TheoremId::PPower, l, allow_unit)?;
    let (fa, fb) = endpoints(problem)?;
    Ok(plain_factor(problem)? * sum_power_mean(fa.abs(), fb.abs(), l))
}

fn require(theorem: TheoremId, param: Option<f64>) -> Result<Option<f64>, BoundError> {
    match (theorem.param_kind(), param) {
        (ParamKind::None, None) => Ok(None),
        (ParamKind::None, Some(_)) => Err(BoundError::UnexpectedParameter { theorem }),
        (ParamKind::K, None) => Err(BoundError::MissingParameter { theorem, name: "k" }),
        (ParamKind::L, None) => Err(BoundError::MissingParameter { theorem, name: "l" }),
        (_, Some(v)) => Ok(Some(v)),
    }
}

/// Evaluates the right-hand side of `theorem`.
pub fn bound(
    problem: &WeightedProblem,
    theorem: TheoremId,
    param: Option<f64>,
    allow_unit_power: bool,
) -> Result<f64, BoundError> {
    let param = require(theorem, param)?;
    match (theorem, param) {
        (TheoremId::QPlain, _) => bound_q_plain(problem),
        (TheoremId::PPlain, _) => bound_p_plain(problem),
        (TheoremId::QHolder, Some(k)) => bound_q_holder(problem, k),
        (TheoremId::PHolder, Some(k)) => bound_p_holder(problem, k),
        (TheoremId::QPower, Some(l)) => bound_q_power(problem, l),
        (TheoremId::PPower, Some(l)) => bound_p_power_relaxed(problem, l, allow_unit_power),
        _ => unreachable!("parameter presence checked above"),
    }
}

/// Validates the theorem parameter without evaluating anything.
pub fn check_param(
    theorem: TheoremId,
    param: Option<f64>,
    allow_unit_power: bool,
) -> Result<(), BoundError> {
    match (theorem, require(theorem, param)?) {
        (TheoremId::QHolder | TheoremId::PHolder, Some(k)) => check_k(theorem, k),
        (TheoremId::QPower | TheoremId::PPower, Some(l)) => check_l(theorem, l, allow_unit_power),
        _ => Ok(()),
    }
}

/// The function whose membership in `theorem.class()` the theorem assumes.
pub fn hypothesis_function(
    f: &FunctionSpec,
    theorem: TheoremId,
    param: Option<f64>,
) -> Result<FunctionSpec, BoundError> {
    match theorem.hypothesis_exponent(param) {
        None => Ok(f.clone()),
        Some(s) => Ok(f.power_transform(s)?),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub resolution: Resolution,
    pub certify_tolerance: f64,
    pub integrate_rel_tol: f64,
    /// A case violates its theorem when `slack < −slack_tolerance · max(1, |bound|)`.
    pub slack_tolerance: f64,
    pub allow_unit_power: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            resolution: Resolution::default(),
            certify_tolerance: crate::convexity::DEFAULT_TOLERANCE,
            integrate_rel_tol: 1e-12,
            slack_tolerance: 1e-9,
            allow_unit_power: false,
        }
    }
}

impl ReportOptions {
    pub fn slack_threshold(&self, bound: f64) -> f64 {
        -self.slack_tolerance * bound.abs().max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointValues {
    pub f_a: f64,
    pub f_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: TheoremId,
    pub param: Option<f64>,
    pub hypothesis_function: String,
    pub hypothesis_certificate: ConvexityCertificate,
    pub bound: f64,
    pub integral: IntegralResult,
    pub slack: f64,
    /// `integral / bound`, absent when the bound is zero.
    pub tightness: Option<f64>,
    pub endpoint_values: EndpointValues,
    /// `slack >= −tol`.
    pub holds: bool,
    /// `|integral| <= bound + tol`, the stronger form the proofs actually establish.
    pub holds_for_abs_integral: bool,
    /// Hypothesis not falsified but the inequality failed.
    pub violation: bool,
}

/// Combines already computed pieces into a report.
pub fn assemble_report(
    problem: &WeightedProblem,
    theorem: TheoremId,
    param: Option<f64>,
    certificate: ConvexityCertificate,
    integral: IntegralResult,
    options: &ReportOptions,
) -> Result<BoundReport, BoundError> {
    let bound = bound(problem, theorem, param, options.allow_unit_power)?;
    let (f_a, f_b) = endpoints(problem)?;
    let slack = bound - integral.value;
    let threshold = options.slack_threshold(bound);
    let holds = slack >= threshold;
    let holds_for_abs_integral = bound - integral.value.abs() >= threshold;
    let violation = certificate.holds() && !holds;
    Ok(BoundReport {
        theorem,
        param,
        hypothesis_function: hypothesis_function(&problem.f, theorem, param)?
            .source()
            .to_string(),
        hypothesis_certificate: certificate,
        bound,
        integral,
        slack,
        tightness: (bound != 0.0).then(|| integral.value / bound),
        endpoint_values: EndpointValues { f_a, f_b },
        holds,
        holds_for_abs_integral,
        violation,
    })
}

/// Certifies the hypothesis of `theorem`, integrates, and evaluates the bound.
pub fn full_report(
    problem: &WeightedProblem,
    theorem: TheoremId,
    param: Option<f64>,
    options: &ReportOptions,
) -> Result<BoundReport, BoundError> {
    check_param(theorem, param, options.allow_unit_power)?;
    let hypothesis = hypothesis_function(&problem.f, theorem, param)?;
    let certificate = certify(
        &hypothesis,
        problem.interval,
        theorem.class(),
        &options.resolution,
        options.certify_tolerance,
    )?;
    let integral = integrate_reference(problem, options.integrate_rel_tol)?;
    assemble_report(problem, theorem, param, certificate, integral, options)
}
