//! Parsing, printing and evaluating function expressions.

use pconvex::dsl::FunctionSpec;

fn main() {
    let f: FunctionSpec = "max(1 - x, 0.5 * x) + exp(-(x - 2)^2)".parse().unwrap();
    println!("parsed:   {}", f.expr());
    for x in [0.0, 0.5, 1.0, 2.0] {
        println!("f({x}) = {}", f.eval(x).unwrap());
    }

    let g = f.power_transform(1.5).unwrap();
    println!("|f|^1.5:  {}", g.source());

    for bad in ["x +", "2 * y", "sin x"] {
        println!("{bad:?}: {}", FunctionSpec::parse(bad).unwrap_err());
    }
    let ln = FunctionSpec::parse("ln(x)").unwrap();
    println!("ln(0): {}", ln.eval(0.0).unwrap_err());
}
