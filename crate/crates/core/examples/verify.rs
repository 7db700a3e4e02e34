//! Runs the built-in numerical self-checks at the quick level.
//!
//! Run with `cargo run --release --example verify`.

use winkler::verify::{run_all, Level};

fn main() {
    let outcomes = run_all(Level::Quick);
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} checks passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
