//! Finds the first bifurcation along a horizontal path through parameter
//! space, switches onto the nontrivial branch and follows it in amplitude.
//!
//! Run with `cargo run --release --example branch`.

use std::f64::consts::PI;

use winkler::continuation::{
    branch_switch, continue_branch, detect_bifurcation_on_trivial_branch, pitchfork_exponent, FreeParameter, ParameterPath,
};
use winkler::Grid;

fn main() -> winkler::Result<()> {
    let grid = Grid::new(201, PI)?;
    let path = ParameterPath::new((0.5, 0.05859375), (1.5, 0.05859375));
    let found = detect_bifurcation_on_trivial_branch(&path, &grid, 64)?;
    for b in &found {
        println!("mode {} bifurcates at alpha = {:.8} (similarity {:.6})", b.mode, b.alpha, b.similarity);
    }
    let bif = found.iter().find(|b| b.mode == 1).expect("the path crosses l_1");

    for direction in [1, -1] {
        let seed = branch_switch(bif, direction, 0.01, FreeParameter::Alpha, 1.0, &grid)?;
        let branch = continue_branch(seed, 19, 0.005)?;
        let tip = branch.last();
        println!(
            "direction {direction:+}: {} points, alpha(t = {:.3}) = {:.8}, max |x| = {:.4}, exponent {:.3}",
            branch.points.len(),
            tip.t,
            tip.param,
            tip.x.sup_norm(),
            pitchfork_exponent(&branch)
        );
    }
    Ok(())
}
