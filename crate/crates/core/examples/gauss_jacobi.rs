//! Gauss-Jacobi rules for (x−a)^p (b−x)^q and their convergence on a smooth integrand.

use pconvex::dsl::{FunctionSpec, Interval};
use pconvex::quadrature::{build_rule, integrate_reference, rest_term, WeightedProblem};

fn main() {
    let interval = Interval::new(1.0, 3.0).unwrap();
    let rule = build_rule(0.5, 2.0, interval, 5).unwrap();
    println!("5-point rule, p = 0.5, q = 2 on [1, 3]");
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        println!("  {x:.17e}  {w:.17e}");
    }
    println!("  weight sum {:.17e}", rule.weight_sum());

    let f = FunctionSpec::parse("exp(x)").unwrap();
    let problem = WeightedProblem::new(interval, 0.5, 2.0, f).unwrap();
    let reference = integrate_reference(&problem, 1e-13).unwrap();
    println!("reference value {:.17e}", reference.value);
    for m in [1, 2, 3, 5, 8] {
        println!(
            "  m = {m:>2}  rest term {:+.3e}",
            rest_term(&problem, m).unwrap()
        );
    }
}
