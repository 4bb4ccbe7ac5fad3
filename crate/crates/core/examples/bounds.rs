//! All six bounds for one problem, each with its hypothesis verdict.

use pconvex::bounds::{full_report, ReportOptions, TheoremId};
use pconvex::dsl::{FunctionSpec, Interval};
use pconvex::quadrature::WeightedProblem;

fn main() {
    let f = FunctionSpec::parse("abs(x - 0.3) + 0.1").unwrap();
    let problem = WeightedProblem::new(Interval::new(0.0, 1.0).unwrap(), 1.0, 2.0, f).unwrap();
    let options = ReportOptions::default();
    println!(
        "{:<9} {:>6} {:>22} {:>22} {:>10}  hypothesis",
        "theorem", "param", "bound", "integral", "ratio"
    );
    for theorem in TheoremId::ALL {
        let param = match theorem.param_kind() {
            pconvex::bounds::ParamKind::None => None,
            _ => Some(2.0),
        };
        let r = full_report(&problem, theorem, param, &options).unwrap();
        println!(
            "{:<9} {:>6} {:>22.15e} {:>22.15e} {:>10.6}  {}",
            theorem.name(),
            param.map(|v| v.to_string()).unwrap_or_default(),
            r.bound,
            r.integral.value,
            r.tightness.unwrap_or(f64::NAN),
            if r.hypothesis_certificate.holds() {
                "not falsified"
            } else {
                "falsified"
            },
        );
    }
}
