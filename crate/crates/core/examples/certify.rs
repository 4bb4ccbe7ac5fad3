//! Sampled falsification of convexity, quasi-convexity and P-convexity.

use pconvex::convexity::{certify, ConvexityClass, Resolution, DEFAULT_TOLERANCE};
use pconvex::dsl::{FunctionSpec, Interval};

fn main() {
    let unit = Interval::new(0.0, 1.0).unwrap();
    let cases = [
        ("x^2", unit),
        ("abs(x - 0.3) + 0.1", unit),
        (
            "exp(-8 * (x - 0.7)^2) + exp(-8 * (x - 2)^2)",
            Interval::new(0.0, 3.0).unwrap(),
        ),
        ("sin(x)", Interval::new(0.0, std::f64::consts::TAU).unwrap()),
    ];
    let resolution = Resolution::default();
    for (src, interval) in cases {
        let f = FunctionSpec::parse(src).unwrap();
        println!("{src} on [{}, {}]", interval.a(), interval.b());
        for class in ConvexityClass::ALL {
            let cert = certify(&f, interval, class, &resolution, DEFAULT_TOLERANCE).unwrap();
            match cert.witness {
                Some(w) => println!(
                    "  {:<13} counterexample x={:.4} y={:.4} t={:.4} excess={:.3e}",
                    class.name(),
                    w.x,
                    w.y,
                    w.t,
                    w.violation
                ),
                None => println!(
                    "  {:<13} no counterexample in {} samples",
                    class.name(),
                    cert.samples
                ),
            }
        }
    }
}
