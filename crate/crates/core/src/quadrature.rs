//! The weighted integral `∫_a^b (x−a)^p (b−x)^q f(x) dx`.
//!
//! Two independent evaluation routes are provided:
//!
//! * [`integrate_reference`] maps the problem onto `[0, 1]` with
//!   `x = t a + (1 − t) b`, where the integrand becomes
//!   `(b−a)^{p+q+1} (1−t)^p t^q f(t a + (1−t) b)`, and integrates that
//!   adaptively with a Gauss-Kronrod 7/15 pair.
//! * [`build_rule`] / [`apply_rule`] construct an m-point Gauss-Jacobi rule
//!   for the weight by the Golub-Welsch method.
//!
//! [`integrate_direct`] is a third route used to cross-check the first one:
//! it integrates the original integrand on `[a, b]` under a smoothing
//! substitution, without ever forming the `[0, 1]` normal form.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{EvalError, FunctionSpec, Interval};
use crate::special::{beta_checked, DomainError};
use crate::tridiag::{symmetric_tridiagonal_eigen, NoConvergence};

pub const MAX_NODES: usize = 200;
pub const EVALUATION_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("rule construction failed: {0}")]
    Construction(#[from] NoConvergence),
    #[error(
        "evaluation budget exhausted after {evaluations} evaluations: \
         best value {value}, error estimate {estimate}"
    )]
    BudgetExceeded {
        value: f64,
        estimate: f64,
        evaluations: u64,
    },
}

impl From<DomainError> for QuadratureError {
    fn from(e: DomainError) -> Self {
        QuadratureError::Parameter(e.to_string())
    }
}

/// The data `(a, b, p, q, f)` of one weighted integral.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedProblem {
    pub interval: Interval,
    pub p: f64,
    pub q: f64,
    pub f: FunctionSpec,
}

impl WeightedProblem {
    pub fn new(
        interval: Interval,
        p: f64,
        q: f64,
        f: FunctionSpec,
    ) -> Result<Self, QuadratureError> {
        check_exponents(p, q)?;
        Ok(Self { interval, p, q, f })
    }

    pub fn a(&self) -> f64 {
        self.interval.a()
    }

    pub fn b(&self) -> f64 {
        self.interval.b()
    }

    /// `(b − a)^{p+q+1}`
    pub fn scale(&self) -> f64 {
        self.interval.width().powf(self.p + self.q + 1.0)
    }
}

fn check_exponents(p: f64, q: f64) -> Result<(), QuadratureError> {
    if !(p.is_finite() && p > 0.0 && q.is_finite() && q > 0.0) {
        return Err(QuadratureError::Parameter(format!(
            "exponents must be finite and positive, got p = {p}, q = {q}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Reference,
    Direct,
    GaussJacobi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub method: Method,
    /// `None` when no error estimate is available (a lone Gauss-Jacobi rule).
    pub error_estimate: Option<f64>,
    pub evaluations: u64,
}

/// The integrand after the substitution `x = t a + (1 − t) b`.
#[derive(Debug, Clone, Copy)]
pub struct Substituted<'a> {
    problem: &'a WeightedProblem,
    scale: f64,
}

impl Substituted<'_> {
    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        let WeightedProblem { p, q, .. } = *self.problem;
        let x = t * self.problem.a() + (1.0 - t) * self.problem.b();
        let fx = self.problem.f.eval(x)?;
        Ok(self.scale * (1.0 - t).powf(p) * t.powf(q) * fx)
    }
}

pub fn substitute(problem: &WeightedProblem) -> Substituted<'_> {
    Substituted {
        problem,
        scale: problem.scale(),
    }
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn kronrod15<F>(f: &mut F, lo: f64, hi: f64) -> Result<Segment, EvalError>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Segment {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        abs_value: abs_sum * half.abs(),
    })
}

/// Outcome of [`adaptive_integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptive {
    pub value: f64,
    pub error: f64,
    pub evaluations: u64,
}

/// Globally adaptive Gauss-Kronrod 7/15 integration of `f` over `[lo, hi]`.
///
/// Stops once the summed error estimate is at most `rel_tol · |value|`, or
/// falls below the roundoff floor `100 ε ∫|f|`.
pub fn adaptive_integrate<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    budget: u64,
) -> Result<Adaptive, QuadratureError>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    let mut evaluations = 15;
    let first = kronrod15(&mut f, lo, hi)?;
    let mut heap = BinaryHeap::new();
    let mut settled: Vec<Segment> = Vec::new();
    // running sums drive the stopping test; the reported value is re-summed in order
    let (mut value, mut error, mut abs_value) = (first.value, first.error, first.abs_value);
    heap.push(first);
    loop {
        let floor = 100.0 * f64::EPSILON * abs_value;
        if error <= rel_tol * value.abs() || error <= floor {
            let (value, error, _) = totals(heap.iter().chain(settled.iter()));
            return Ok(Adaptive {
                value,
                error,
                evaluations,
            });
        }
        let Some(worst) = heap.pop() else {
            let (value, error, _) = totals(settled.iter());
            return Err(QuadratureError::BudgetExceeded {
                value,
                estimate: error,
                evaluations,
            });
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(worst.lo < mid && mid < worst.hi) {
            settled.push(worst);
            continue;
        }
        if evaluations + 30 > budget {
            heap.push(worst);
            let (value, error, _) = totals(heap.iter().chain(settled.iter()));
            return Err(QuadratureError::BudgetExceeded {
                value,
                estimate: error,
                evaluations,
            });
        }
        let left = kronrod15(&mut f, worst.lo, mid)?;
        let right = kronrod15(&mut f, mid, worst.hi)?;
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        abs_value += left.abs_value + right.abs_value - worst.abs_value;
        heap.push(left);
        heap.push(right);
    }
}

/// Sums segments in left-to-right order so the result does not depend on heap layout.
fn totals<'a>(segments: impl Iterator<Item = &'a Segment>) -> (f64, f64, f64) {
    let mut all: Vec<&Segment> = segments.collect();
    all.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    all.iter().fold((0.0, 0.0, 0.0), |(v, e, a), s| {
        (v + s.value, e + s.error, a + s.abs_value)
    })
}

fn check_rel_tol(rel_tol: f64) -> Result<(), QuadratureError> {
    if !(rel_tol > 1e-14 && rel_tol < 1e-2) {
        return Err(QuadratureError::Parameter(format!(
            "relative tolerance must lie in (1e-14, 1e-2), got {rel_tol}"
        )));
    }
    Ok(())
}

/// Adaptive integration of the substituted form on `[0, 1]`.
pub fn integrate_reference(
    problem: &WeightedProblem,
    rel_tol: f64,
) -> Result<IntegralResult, QuadratureError> {
    check_rel_tol(rel_tol)?;
    let g = substitute(problem);
    let out = adaptive_integrate(|t| g.eval(t), 0.0, 1.0, rel_tol, EVALUATION_BUDGET)?;
    Ok(IntegralResult {
        value: out.value,
        method: Method::Reference,
        error_estimate: Some(out.error),
        evaluations: out.evaluations,
    })
}

/// Integrates `(x−a)^p (b−x)^q f(x)` on `[a, b]` through `x = a + (b−a) s(u)`
/// with `s(u) = u²(3 − 2u)`, which flattens both endpoints.
pub fn integrate_direct(
    problem: &WeightedProblem,
    rel_tol: f64,
) -> Result<IntegralResult, QuadratureError> {
    check_rel_tol(rel_tol)?;
    let (a, b) = (problem.a(), problem.b());
    let width = b - a;
    let (p, q) = (problem.p, problem.q);
    let integrand = |u: f64| -> Result<f64, EvalError> {
        let s = u * u * (3.0 - 2.0 * u);
        let one_minus_s = (1.0 - u) * (1.0 - u) * (1.0 + 2.0 * u);
        let x = a + width * s;
        let fx = problem.f.eval(x)?;
        let jacobian = width * 6.0 * u * (1.0 - u);
        Ok((width * s).powf(p) * (width * one_minus_s).powf(q) * fx * jacobian)
    };
    let out = adaptive_integrate(integrand, 0.0, 1.0, rel_tol, EVALUATION_BUDGET)?;
    Ok(IntegralResult {
        value: out.value,
        method: Method::Direct,
        error_estimate: Some(out.error),
        evaluations: out.evaluations,
    })
}

/// Nodes and weights for `∫_a^b (x−a)^p (b−x)^q f(x) dx ≈ Σ w_k f(x_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub m: usize,
    pub p: f64,
    pub q: f64,
    pub interval: Interval,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss rule for the weight `(1−t)^p t^q` on `[0, 1]`: ascending nodes and weights.
pub fn unit_rule(p: f64, q: f64, m: usize) -> Result<(Vec<f64>, Vec<f64>), QuadratureError> {
    check_exponents(p, q)?;
    if m == 0 || m > MAX_NODES + 1 {
        return Err(QuadratureError::Parameter(format!(
            "node count must lie in 1..={MAX_NODES}, got {m}"
        )));
    }
    // Jacobi recurrence on [-1, 1] for (1−s)^α (1+s)^β, with t = (1 + s)/2.
    let (alpha, beta) = (p, q);
    let ab = alpha + beta;
    let mut diagonal = Vec::with_capacity(m);
    let mut off_diagonal = Vec::with_capacity(m.saturating_sub(1));
    for n in 0..m {
        let nf = n as f64;
        let a_n = if n == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            let s = 2.0 * nf + ab;
            (beta - alpha) * (beta + alpha) / (s * (s + 2.0))
        };
        diagonal.push(0.5 * (1.0 + a_n));
        if n + 1 < m {
            let k = nf + 1.0;
            let s = 2.0 * k + ab;
            let b_k =
                4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
            off_diagonal.push(0.5 * b_k.sqrt());
        }
    }
    let eig = symmetric_tridiagonal_eigen(&diagonal, &off_diagonal)?;
    let moment = beta_checked(q + 1.0, p + 1.0)?;
    let weights = eig
        .first_components
        .iter()
        .map(|v| moment * v * v)
        .collect();
    Ok((eig.values, weights))
}

/// m-point Gauss-Jacobi rule for `(x−a)^p (b−x)^q` on `interval`.
pub fn build_rule(
    p: f64,
    q: f64,
    interval: Interval,
    m: usize,
) -> Result<QuadratureRule, QuadratureError> {
    if m > MAX_NODES {
        return Err(QuadratureError::Parameter(format!(
            "node count must lie in 1..={MAX_NODES}, got {m}"
        )));
    }
    build_rule_uncapped(p, q, interval, m)
}

fn build_rule_uncapped(
    p: f64,
    q: f64,
    interval: Interval,
    m: usize,
) -> Result<QuadratureRule, QuadratureError> {
    let (t_nodes, t_weights) = unit_rule(p, q, m)?;
    let (a, b) = (interval.a(), interval.b());
    let scale = interval.width().powf(p + q + 1.0);
    // x = t a + (1 − t) b reverses the order
    let nodes = t_nodes
        .iter()
        .rev()
        .map(|&t| t * a + (1.0 - t) * b)
        .collect();
    let weights = t_weights.iter().rev().map(|&w| scale * w).collect();
    Ok(QuadratureRule {
        m,
        p,
        q,
        interval,
        nodes,
        weights,
    })
}

impl QuadratureRule {
    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn apply_with<F>(&self, mut f: F) -> Result<f64, EvalError>
    where
        F: FnMut(f64) -> Result<f64, EvalError>,
    {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(x)?;
        }
        Ok(acc)
    }
}

/// `Σ_k B_{m,k} f(γ_k)`; carries no error estimate on its own.
pub fn apply_rule(rule: &QuadratureRule, f: &FunctionSpec) -> Result<IntegralResult, EvalError> {
    Ok(IntegralResult {
        value: rule.apply_with(|x| f.eval(x))?,
        method: Method::GaussJacobi,
        error_estimate: None,
        evaluations: rule.m as u64,
    })
}

/// Applies the m-point rule and estimates its error against the (m+1)-point companion.
pub fn integrate_gauss_jacobi(
    problem: &WeightedProblem,
    m: usize,
) -> Result<IntegralResult, QuadratureError> {
    let rule = build_rule(problem.p, problem.q, problem.interval, m)?;
    let companion = build_rule_uncapped(problem.p, problem.q, problem.interval, m + 1)?;
    let value = rule.apply_with(|x| problem.f.eval(x))?;
    let next = companion.apply_with(|x| problem.f.eval(x))?;
    Ok(IntegralResult {
        value,
        method: Method::GaussJacobi,
        error_estimate: Some((value - next).abs()),
        evaluations: (2 * m + 1) as u64,
    })
}

/// Empirical rest term: reference integral minus the m-point rule.
pub fn rest_term(problem: &WeightedProblem, m: usize) -> Result<f64, QuadratureError> {
    let reference = integrate_reference(problem, 1e-12)?;
    let rule = build_rule(problem.p, problem.q, problem.interval, m)?;
    let approx = apply_rule(&rule, &problem.f)?;
    Ok(reference.value - approx.value)
}
