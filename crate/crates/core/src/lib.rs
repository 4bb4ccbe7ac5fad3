//! Weighted integrals `∫_a^b (x−a)^p (b−x)^q f(x) dx`, Gauss-Jacobi rules for them,
//! closed-form upper bounds under quasi-convexity and P-convexity hypotheses, a
//! sampled convexity certifier, and a sweep driver that checks the bounds en masse.
//!
//! ```
//! use pconvex::bounds::{full_report, ReportOptions, TheoremId};
//! use pconvex::dsl::{FunctionSpec, Interval};
//! use pconvex::quadrature::WeightedProblem;
//!
//! let f = FunctionSpec::parse("exp(x)").unwrap();
//! let problem = WeightedProblem::new(Interval::new(0.0, 1.0).unwrap(), 1.0, 2.0, f).unwrap();
//! let report = full_report(&problem, TheoremId::QPlain, None, &ReportOptions::default()).unwrap();
//! assert!(report.hypothesis_certificate.holds());
//! assert!(report.slack > 0.0);
//! ```

pub mod bounds;
pub mod cli;
pub mod convexity;
pub mod dsl;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod sweep;
pub mod tridiag;

pub use bounds::{full_report, BoundReport, ReportOptions, TheoremId};
pub use convexity::{certify, ConvexityCertificate, ConvexityClass, Resolution};
pub use dsl::{FunctionSpec, Interval};
pub use quadrature::{
    build_rule, integrate_reference, IntegralResult, QuadratureRule, WeightedProblem,
};
pub use sweep::{run_sweep, SweepConfig, SweepRecord, SweepSummary};
