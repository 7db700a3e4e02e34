//! Dense Newton iteration shared by the reduction and continuation solvers.

use nalgebra::{DMatrix, DVector};

use crate::discretization::SampledFunction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonConfig {
    /// Sup-norm tolerance on the residual.
    pub residual_tol: f64,
    /// Maximum number of Newton steps.
    pub max_iter: usize,
    /// Starting point; each solver documents its own default.
    pub initial_guess: Option<SampledFunction>,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            max_iter: 25,
            initial_guess: None,
        }
    }
}

impl NewtonConfig {
    pub fn with_tol(residual_tol: f64) -> Self {
        Self {
            residual_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0) {
            return Err(Error::Config(format!(
                "residual tolerance must be positive, got {}",
                self.residual_tol
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::Config("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: DVector<f64>,
    pub residual_norm: f64,
    /// Number of residual evaluations, including the one that met the tolerance.
    pub iterations: usize,
    pub history: Vec<f64>,
}

pub fn sup_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `residual(x) = 0` from `x0`, stopping once the sup norm of the
/// residual is at most `cfg.residual_tol`.
pub fn solve<R, J>(x0: DVector<f64>, mut residual: R, mut jacobian: J, cfg: &NewtonConfig) -> Result<NewtonOutcome>
where
    R: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
    J: FnMut(&DVector<f64>) -> Result<DMatrix<f64>>,
{
    cfg.validate()?;
    let mut x = x0;
    let mut history = Vec::new();
    loop {
        let r = residual(&x)?;
        let norm = sup_norm(&r);
        history.push(norm);
        if norm <= cfg.residual_tol {
            return Ok(NewtonOutcome {
                x,
                residual_norm: norm,
                iterations: history.len(),
                history,
            });
        }
        if !norm.is_finite() || history.len() > cfg.max_iter {
            return Err(Error::NewtonFailed {
                iterations: history.len() - 1,
                history,
            });
        }
        let step = jacobian(&x)?
            .lu()
            .solve(&(-r))
            .ok_or_else(|| Error::SingularSystem(format!("newton step {}", history.len())))?;
        x += step;
    }
}
