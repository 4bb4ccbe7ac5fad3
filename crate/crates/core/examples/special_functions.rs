//! Log-gamma and beta over a few regimes.

use pconvex::special::{beta_checked, ln_beta_checked, log_gamma_checked};

fn main() {
    for x in [1e-10, 0.5, 1.0, 2.5, 10.0, 171.5, 1e6] {
        println!("lnΓ({x:e}) = {:.17e}", log_gamma_checked(x).unwrap());
    }
    for (x, y) in [(0.5, 0.5), (2.0, 3.0), (3.5, 10.0)] {
        println!("β({x}, {y}) = {:.17e}", beta_checked(x, y).unwrap());
    }
    // far past the overflow point of Γ itself
    println!(
        "ln β(1e4, 1e4) = {:.17e}",
        ln_beta_checked(1e4, 1e4).unwrap()
    );
    println!("β(-1, 2) -> {}", beta_checked(-1.0, 2.0).unwrap_err());
}
