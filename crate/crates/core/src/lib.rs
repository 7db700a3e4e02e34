//! Bifurcation analysis of an elastic rod resting on a nonlinear Winkler
//! foundation.
//!
//! The rod's equilibrium forms solve the fourth-order boundary value problem
//!
//! ```text
//! x'''' + alpha x'' + beta x - f(x, x', ..., x'''') = 0   on [-r, r]
//! x'(-r) = x'''(-r) = 0,   x(r) = x''(r) = 0
//! ```
//!
//! with `f = gamma x^3 + 3 x''^3 + 12 x' x'' x''' + 3 x'^2 (x'''' - alpha x''/2)`.
//! The crate provides:
//!
//! - [`model`]: closed-form spectral data (rays `l_m`, eigenfunctions,
//!   double points, the reduced Jacobian and its sign table);
//! - [`discretization`]: finite differences with ghost-node boundary
//!   conditions, the nonlinear residual and its Jacobian;
//! - [`energy`]: the truncated and exact energy functionals and the
//!   transversality coefficients at simple bifurcation points;
//! - [`linear`]: kernel analysis of the linearization and parameter-plane scans;
//! - [`reduction`]: numerical Lyapunov–Schmidt reduction at a double point and
//!   the Brouwer degree of the reduced map as a winding number;
//! - [`continuation`]: bifurcation detection along the trivial branch and
//!   continuation of the pitchfork branches.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod continuation;
pub mod discretization;
pub mod energy;
pub mod error;
pub mod linear;
pub mod model;
pub mod newton;
pub mod output;
pub mod reduction;
pub mod verify;

pub use discretization::{inner_product, Grid, SampledFunction};
pub use error::{Error, Result};
pub use model::{DoublePoint, Mode, Params};
