//! Spectral rays of the linearized rod equation and where they cross.
//!
//! Run with `cargo run --example rays`.

use std::f64::consts::PI;

use winkler::model::{classify_rays_through, double_point, Mode};

fn main() -> winkler::Result<()> {
    let r = PI;
    println!("rays l_m: beta = -c_m alpha - c_m^2 (r = pi)");
    for m in 1..=4 {
        let mode = Mode::new(m, r)?;
        println!(
            "  m = {m}: c = {:+.6}, beta(alpha = 1) = {:+.6}, enters beta > 0 at alpha = {:.6}",
            mode.c,
            mode.ray_beta(1.0),
            mode.ray_alpha(0.0)
        );
    }

    println!("double points:");
    for m1 in 1..=3 {
        for m2 in m1 + 1..=4 {
            let dp = double_point(m1, m2, r)?;
            println!("  l_{m1} and l_{m2} meet at ({:.8}, {:.8})", dp.alpha0, dp.beta0);
        }
    }

    for (alpha, beta) in [(1.0, 0.2), (1.0, 0.05859375), (0.625, 0.03515625)] {
        let hits = classify_rays_through(alpha, beta, r, 10, 1e-12)?;
        println!("({alpha}, {beta}) lies on rays {hits:?}");
    }
    Ok(())
}
