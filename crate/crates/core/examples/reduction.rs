//! Lyapunov-Schmidt reduction at the double point of l_1 and l_2: the reduced
//! Jacobian and the Brouwer degree of the reduced map on either side of the
//! critical slope interval.
//!
//! Run with `cargo run --release --example reduction`.

use std::f64::consts::PI;

use winkler::model::{double_point, reduced_jacobian_closed_form};
use winkler::reduction::{determinant, probe, reduced_jacobian_numeric, ReductionContext, DEFAULT_JACOBIAN_STEP};
use winkler::Grid;

fn main() -> winkler::Result<()> {
    let dp = double_point(1, 2, PI)?;
    let ctx = ReductionContext::with_defaults(dp, 1.0, Grid::new(201, PI)?)?;
    println!("double point ({}, {})", dp.alpha0, dp.beta0);

    let (alpha, beta) = (dp.alpha0 + 0.1, dp.beta0 + 0.03);
    let numeric = reduced_jacobian_numeric(alpha, beta, &ctx, DEFAULT_JACOBIAN_STEP)?;
    let closed = reduced_jacobian_closed_form(alpha, beta, 1, 2, PI)?;
    println!("reduced Jacobian at ({alpha}, {beta}):");
    println!("  numeric  [[{:+.5e}, {:+.1e}], [{:+.1e}, {:+.5e}]]", numeric[0][0], numeric[0][1], numeric[1][0], numeric[1][1]);
    println!("  closed   diag [{:+.5e}, {:+.5e}]", closed.diagonal[0], closed.diagonal[1]);
    println!("  det {:+.4e} vs {:+.4e}", determinant(&numeric), closed.det);

    // Negative degree for slopes inside (1/16, 9/16), positive outside.
    println!("slope     det (closed)   winding   status");
    for slope in [-0.2, 0.0, 0.3, 0.5625, 1.0] {
        let rep = probe(&ctx, slope, 0.1, 1e-3, 256)?;
        let winding = rep.winding.map_or("-".to_string(), |w| format!("{w:+}"));
        println!("{slope:+7.4}   {:+.4e}    {winding:>7}   {}", rep.det_closed_form, rep.status);
    }
    Ok(())
}
