//! Numerical kernel of the discretized linearization at three parameter
//! points: off every ray, on one ray, and at a double point.
//!
//! Run with `cargo run --release --example kernel`.

use std::f64::consts::PI;

use winkler::linear::kernel_analysis;
use winkler::Grid;

fn main() -> winkler::Result<()> {
    let grid = Grid::new(201, PI)?;
    for (alpha, beta) in [(1.0, 0.2), (1.0, 0.05859375), (0.625, 0.03515625)] {
        let k = kernel_analysis(alpha, beta, &grid, None)?;
        let smallest: Vec<String> = k.singular_values.iter().take(3).map(|s| format!("{s:.3e}")).collect();
        println!(
            "({alpha}, {beta}): dim {}, modes {:?}, smallest singular values [{}], gap {:.1}",
            k.dim,
            k.matched_modes,
            smallest.join(", "),
            k.gap_factor
        );
    }
    Ok(())
}
