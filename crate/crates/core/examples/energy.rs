//! The energy functional: its gradient against the residual, the order of
//! the quartic truncation, and the transversality coefficients of a simple
//! eigenvalue.
//!
//! Run with `cargo run --release --example energy`.

use std::f64::consts::PI;

use winkler::energy::{crandall_rabinowitz_coefficients, exact_total_energy, gradient_pairing_check, total_energy, PhysicalParams};
use winkler::{Grid, Mode, Params, SampledFunction};

fn main() -> winkler::Result<()> {
    let grid = Grid::new(201, PI)?;
    let p = Params::new(1.0, 0.2, 1.0, PI)?;
    let e1 = SampledFunction::eigenfunction(grid, &Mode::new(1, PI)?);
    let e2 = SampledFunction::eigenfunction(grid, &Mode::new(2, PI)?);

    let gap = gradient_pairing_check(&e1.scaled(0.05), &e2, &p, 1e-5)?;
    println!("|dE(x; h) - <F(x), h>| = {gap:.3e}");

    // The truncated energy is per unit bending stiffness and averaged over the rod.
    let ei = 2.0;
    let q = PhysicalParams::from_params(&p, ei)?;
    println!("amplitude   truncated E     exact E         difference");
    for a in [0.02, 0.04, 0.08, 0.16] {
        let x = e1.scaled(a);
        let (e, exact) = (total_energy(&x, &p), exact_total_energy(&x, &q)? / (2.0 * PI * ei));
        println!("{a:9.2}   {e:+.6e}   {exact:+.6e}   {:.3e}", (e - exact).abs());
    }

    let on_ray = Params::new(1.0, 0.05859375, 1.0, PI)?;
    let cr = crandall_rabinowitz_coefficients(1, &on_ray, &grid)?;
    println!("transversality at (1, 0.05859375): d_alpha = {:.6}, d_beta = {:.6}", cr.d_alpha, cr.d_beta);
    Ok(())
}
