//! The principal branch of Lambert W on a log grid, including the
//! exponential-argument form used for very large inputs.
//!
//! cargo run --release --example lambert_w

use graphflow::oracles::{lambert_w, lambert_w_exp};

fn main() {
    println!("{:>10} {:>22} {:>10}", "x", "W(x)", "residual");
    for k in -6..=12 {
        let x = 10f64.powi(k);
        let w = lambert_w(x);
        println!(
            "{x:>10.0e} {w:>22.16} {:>10.1e}",
            (w * w.exp() - x).abs() / x.max(1.0)
        );
    }
    for z in [1e3, 1e5, 1e8] {
        let w = lambert_w_exp(z);
        println!(
            "W(e^{z:.0e}) = {w:.12}  (w + ln w - z = {:.1e})",
            w + w.ln() - z
        );
    }
}
