//! Sampled falsification of convexity-type inequalities.
//!
//! A certificate never proves membership. `NoCounterexample` only says that
//! none of the sampled triples `(x, y, t)` violated the defining inequality
//! by more than the tolerance.
//!
//! Sampling consists of a uniform grid with `xy_divisions + 1` points on
//! `[a, b]`, every unordered pair of grid points crossed with a uniform
//! `t`-grid of `t_divisions + 1` points on `[0, 1]`, followed by
//! `random_trials` triples drawn from a ChaCha stream seeded by `seed`.
//! Doubling a division count keeps every old grid point, and raising
//! `random_trials` only appends to the random stream, so a counterexample
//! found at one resolution persists at every refinement of it.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{EvalError, FunctionSpec, Interval};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityClass {
    Convex,
    QuasiConvex,
    PConvex,
}

impl ConvexityClass {
    pub const ALL: [ConvexityClass; 3] = [Self::Convex, Self::QuasiConvex, Self::PConvex];

    pub fn name(self) -> &'static str {
        match self {
            Self::Convex => "convex",
            Self::QuasiConvex => "quasi_convex",
            Self::PConvex => "p_convex",
        }
    }

    /// Amount by which `f(z)` exceeds the class's right-hand side.
    pub fn excess(self, fx: f64, fy: f64, fz: f64, t: f64) -> f64 {
        match self {
            Self::Convex => fz - (t * fx + (1.0 - t) * fy),
            Self::QuasiConvex => fz - fx.max(fy),
            Self::PConvex => fz - (fx + fy),
        }
    }
}

impl fmt::Display for ConvexityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ConvexityClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "convex" => Ok(Self::Convex),
            "quasi_convex" | "quasi-convex" => Ok(Self::QuasiConvex),
            "p_convex" | "p-convex" => Ok(Self::PConvex),
            other => Err(format!(
                "unknown convexity class `{other}` (expected convex, quasi_convex or p_convex)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Resolution {
    pub xy_divisions: u32,
    pub t_divisions: u32,
    pub random_trials: u32,
    pub seed: u64,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            xy_divisions: 64,
            t_divisions: 32,
            random_trials: 10_000,
            seed: 0,
        }
    }
}

impl Resolution {
    /// Doubles both grids and the random trial count, keeping the seed.
    pub fn refined(self) -> Self {
        Self {
            xy_divisions: self.xy_divisions * 2,
            t_divisions: self.t_divisions * 2,
            random_trials: self.random_trials * 2,
            seed: self.seed,
        }
    }

    fn grid(divisions: u32, lo: f64, hi: f64) -> Vec<f64> {
        let n = divisions as f64;
        (0..=divisions)
            .map(|i| lo + (hi - lo) * (i as f64 / n))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NoCounterexample,
    Counterexample,
}

/// A triple violating the defining inequality, and by how much.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub violation: f64,
}

impl Witness {
    /// `true` if `self` is a worse violation than `other`.
    fn beats(&self, other: &Witness) -> bool {
        match self.violation.total_cmp(&other.violation) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => (self.x, self.y, self.t)
                .partial_cmp(&(other.x, other.y, other.t))
                .is_some_and(Ordering::is_lt),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityCertificate {
    pub class: ConvexityClass,
    pub verdict: Verdict,
    /// Worst violation found.
    pub witness: Option<Witness>,
    /// First violation in sampling order.
    pub first_witness: Option<Witness>,
    pub violations: u64,
    pub samples: u64,
    pub resolution: Resolution,
    pub tolerance: f64,
}

impl ConvexityCertificate {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::NoCounterexample
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error("tolerance must be finite and positive, got {0}")]
    Tolerance(f64),
    #[error("grid divisions must be at least 1")]
    Resolution,
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

/// The point `t x + (1 − t) y`, clamped to the segment between `x` and `y`.
pub fn combination(x: f64, y: f64, t: f64) -> f64 {
    (t * x + (1.0 - t) * y).clamp(x.min(y), x.max(y))
}

/// Evaluates the class inequality at one triple and returns the excess.
///
/// A P-convex nonnegativity failure at `x` is reported as the triple
/// `(x, x, 1)`, where the inequality reduces to `f(x) <= 2 f(x)`.
pub fn defining_excess(
    f: &FunctionSpec,
    class: ConvexityClass,
    x: f64,
    y: f64,
    t: f64,
) -> Result<f64, EvalError> {
    let fx = f.eval(x)?;
    let fy = f.eval(y)?;
    let fz = f.eval(combination(x, y, t))?;
    Ok(class.excess(fx, fy, fz, t))
}

#[derive(Default)]
struct Tally {
    first: Option<Witness>,
    worst: Option<Witness>,
    count: u64,
    samples: u64,
}

impl Tally {
    fn record(&mut self, x: f64, y: f64, t: f64, excess: f64, tolerance: f64) {
        self.samples += 1;
        if excess > tolerance {
            let w = Witness {
                x,
                y,
                t,
                violation: excess,
            };
            self.count += 1;
            if self.first.is_none() {
                self.first = Some(w);
            }
            if self.worst.as_ref().is_none_or(|cur| w.beats(cur)) {
                self.worst = Some(w);
            }
        }
    }

    /// Folds a later tally into this one, preserving sampling order.
    fn merge(&mut self, later: Tally) {
        self.count += later.count;
        self.samples += later.samples;
        if self.first.is_none() {
            self.first = later.first;
        }
        if let Some(w) = later.worst {
            if self.worst.as_ref().is_none_or(|cur| w.beats(cur)) {
                self.worst = Some(w);
            }
        }
    }
}

/// Searches for a violation of `class` on `interval`.
pub fn certify(
    f: &FunctionSpec,
    interval: Interval,
    class: ConvexityClass,
    resolution: &Resolution,
    tolerance: f64,
) -> Result<ConvexityCertificate, CertifyError> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(CertifyError::Tolerance(tolerance));
    }
    if resolution.xy_divisions == 0 || resolution.t_divisions == 0 {
        return Err(CertifyError::Resolution);
    }
    let xs = Resolution::grid(resolution.xy_divisions, interval.a(), interval.b());
    let ts = Resolution::grid(resolution.t_divisions, 0.0, 1.0);
    let values: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect::<Result<_, _>>()?;

    let mut tally = Tally::default();
    if class == ConvexityClass::PConvex {
        for (&x, &fx) in xs.iter().zip(&values) {
            tally.record(x, x, 1.0, -fx, tolerance);
        }
    }

    let rows: Vec<Result<Tally, EvalError>> = (0..xs.len())
        .into_par_iter()
        .map(|i| {
            let mut row = Tally::default();
            for j in i + 1..xs.len() {
                for &t in &ts {
                    let z = combination(xs[i], xs[j], t);
                    let fz = f.eval(z)?;
                    let excess = class.excess(values[i], values[j], fz, t);
                    row.record(xs[i], xs[j], t, excess, tolerance);
                }
            }
            Ok(row)
        })
        .collect();
    for row in rows {
        tally.merge(row?);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(resolution.seed);
    let (a, width) = (interval.a(), interval.width());
    for _ in 0..resolution.random_trials {
        let x = (a + width * rng.random::<f64>()).min(interval.b());
        let y = (a + width * rng.random::<f64>()).min(interval.b());
        let t: f64 = rng.random();
        let fx = f.eval(x)?;
        let fy = f.eval(y)?;
        if class == ConvexityClass::PConvex {
            tally.record(x, x, 1.0, -fx, tolerance);
            tally.record(y, y, 1.0, -fy, tolerance);
        }
        let fz = f.eval(combination(x, y, t))?;
        tally.record(x, y, t, class.excess(fx, fy, fz, t), tolerance);
    }

    let verdict = if tally.worst.is_some() {
        Verdict::Counterexample
    } else {
        Verdict::NoCounterexample
    };
    Ok(ConvexityCertificate {
        class,
        verdict,
        witness: tally.worst,
        first_witness: tally.first,
        violations: tally.count,
        samples: tally.samples,
        resolution: *resolution,
        tolerance,
    })
}

/// Smallest value of `f` over the same points `certify` samples, with its location.
pub fn sampled_minimum(
    f: &FunctionSpec,
    interval: Interval,
    resolution: &Resolution,
) -> Result<(f64, f64), EvalError> {
    let mut best = (f64::NAN, f64::INFINITY);
    let mut visit = |x: f64| -> Result<(), EvalError> {
        let v = f.eval(x)?;
        if v < best.1 {
            best = (x, v);
        }
        Ok(())
    };
    for x in Resolution::grid(resolution.xy_divisions.max(1), interval.a(), interval.b()) {
        visit(x)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(resolution.seed);
    let (a, width) = (interval.a(), interval.width());
    for _ in 0..resolution.random_trials {
        let x = (a + width * rng.random::<f64>()).min(interval.b());
        let y = (a + width * rng.random::<f64>()).min(interval.b());
        let t: f64 = rng.random();
        visit(x)?;
        visit(y)?;
        visit(combination(x, y, t))?;
    }
    Ok(best)
}
