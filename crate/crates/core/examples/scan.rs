//! Coarse picture of the bifurcation set: scans the positive quadrant and
//! draws the cells where some eigenvalue of the linearization changes sign.
//!
//! Run with `cargo run --release --example scan`.

use std::f64::consts::PI;

use winkler::linear::scan_bifurcation_set;
use winkler::Grid;

fn main() -> winkler::Result<()> {
    let grid = Grid::new(61, PI)?;
    let res = 48;
    let scan = scan_bifurcation_set((0.1, 3.0), (0.01, 1.0), res, &grid)?;

    // Cells are stored row by row with alpha varying fastest.
    println!("beta ^");
    for j in (0..res).rev() {
        let row: String = (0..res)
            .map(|i| match scan.cells[j * res + i].dim {
                0 => '.',
                1 => '1',
                _ => '2',
            })
            .collect();
        println!("     | {row}");
    }
    println!("     +-{}> alpha", "-".repeat(res));
    println!("{} of {} cells flagged", scan.flagged().count(), scan.cells.len());
    Ok(())
}
