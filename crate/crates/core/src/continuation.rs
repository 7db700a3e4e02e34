//! Bifurcation detection along the trivial branch `x = 0` and continuation of
//! the pitchfork branches that leave it at simple eigenvalues.
//!
//! Branches are parametrized by the amplitude `t = <x, e_m>`: each point
//! solves the augmented system
//!
//! ```text
//! F(x, p) = 0,   <x, e_m> = direction * t
//! ```
//!
//! for the free unknowns of `x` and the free parameter `p` (`alpha` or `beta`).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::discretization::{
    inner_product, jacobian, residual, residual_alpha_derivative, residual_beta_derivative, Grid,
    SampledFunction,
};
use crate::error::{Error, Result};
use crate::linear::{discrete_mode_coefficient, eigenvalues, smallest_eigenpairs};
use crate::model::{Mode, Params, DEFAULT_M_MAX};
use crate::newton::{self, NewtonConfig};
use crate::output::to_json;

/// Path-parameter tolerance of the crossing bisection.
pub const BISECTION_TOL: f64 = 1e-8;
/// Residual tolerance of the augmented Newton solves.
pub const CONTINUATION_TOL: f64 = 1e-9;
/// Largest amplitude a branch is continued to.
pub const MAX_AMPLITUDE: f64 = 0.25;

/// Straight segment `s -> start + s (end - start)`, `s` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParameterPath {
    pub start: (f64, f64),
    pub end: (f64, f64),
}

impl ParameterPath {
    pub fn new(start: (f64, f64), end: (f64, f64)) -> Self {
        Self { start, end }
    }

    pub fn at(&self, s: f64) -> (f64, f64) {
        (
            self.start.0 + s * (self.end.0 - self.start.0),
            self.start.1 + s * (self.end.1 - self.start.1),
        )
    }
}

/// A zero crossing of an eigenvalue of `F'_x(0, alpha, beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BifurcationPoint {
    /// Position on the path.
    pub s: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Mode whose sampled eigenfunction best matches the kernel vector.
    pub mode: u32,
    /// Cosine similarity of that match.
    pub similarity: f64,
}

fn negative_count(alpha: f64, beta: f64, grid: &Grid) -> usize {
    eigenvalues(alpha, beta, grid).iter().filter(|v| **v < 0.0).count()
}

/// Best-matching analytic mode for a kernel vector.
pub fn guess_mode(v: &SampledFunction) -> Result<(u32, f64)> {
    let grid = *v.grid();
    let norm = v.norm();
    let mut best = (0, -1.0);
    for m in 1..=DEFAULT_M_MAX {
        let e = SampledFunction::eigenfunction(grid, &Mode::new(m, grid.r())?);
        let similarity = inner_product(v, &e)?.abs() / norm;
        if similarity > best.1 {
            best = (m, similarity);
        }
    }
    Ok(best)
}

/// Locates sign changes of the discrete spectrum along `path`.
///
/// The path is sampled at `steps + 1` points; every interval across which
/// the number of negative eigenvalues changes is bisected down to
/// [`BISECTION_TOL`].
pub fn detect_bifurcation_on_trivial_branch(
    path: &ParameterPath,
    grid: &Grid,
    steps: usize,
) -> Result<Vec<BifurcationPoint>> {
    if steps < 8 {
        return Err(Error::Config(format!("detection needs at least 8 steps, got {steps}")));
    }
    for (a, b) in [path.start, path.end] {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Config(format!(
                "path must lie in the open positive quadrant, got endpoint ({a}, {b})"
            )));
        }
    }
    let count = |s: f64| {
        let (a, b) = path.at(s);
        negative_count(a, b, grid)
    };
    let mut crossings = Vec::new();
    let mut prev = (0.0, count(0.0));
    for k in 1..=steps {
        let s = k as f64 / steps as f64;
        let cur = (s, count(s));
        bisect(prev, cur, &count, &mut crossings);
        prev = cur;
    }
    crossings
        .into_iter()
        .map(|s| {
            let (alpha, beta) = path.at(s);
            let (_, v) = smallest_eigenpairs(alpha, beta, grid, 1).remove(0);
            let (mode, similarity) = guess_mode(&v)?;
            Ok(BifurcationPoint {
                s,
                alpha,
                beta,
                mode,
                similarity,
            })
        })
        .collect()
}

fn bisect(lo: (f64, usize), hi: (f64, usize), count: &impl Fn(f64) -> usize, out: &mut Vec<f64>) {
    if lo.1 == hi.1 {
        return;
    }
    if hi.0 - lo.0 <= BISECTION_TOL {
        out.push(0.5 * (lo.0 + hi.0));
        return;
    }
    let s = 0.5 * (lo.0 + hi.0);
    let mid = (s, count(s));
    bisect(lo, mid, count, out);
    bisect(mid, hi, count, out);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FreeParameter {
    Alpha,
    Beta,
}

impl FreeParameter {
    pub fn name(&self) -> &'static str {
        match self {
            FreeParameter::Alpha => "alpha",
            FreeParameter::Beta => "beta",
        }
    }

    pub fn get(&self, p: &Params) -> f64 {
        match self {
            FreeParameter::Alpha => p.alpha,
            FreeParameter::Beta => p.beta,
        }
    }

    pub fn set(&self, p: &Params, value: f64) -> Params {
        match self {
            FreeParameter::Alpha => p.with_alpha(value),
            FreeParameter::Beta => p.with_beta(value),
        }
    }
}

impl fmt::Display for FreeParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FreeParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(FreeParameter::Alpha),
            "beta" => Ok(FreeParameter::Beta),
            other => Err(Error::Config(format!("free parameter must be alpha or beta, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    /// Amplitude `|<x, e_m>|`.
    pub t: f64,
    /// Value of the free parameter.
    pub param: f64,
    pub x: SampledFunction,
    pub residual_norm: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "lowercase")]
pub enum BranchStatus {
    Complete,
    /// Continuation ended before the requested number of steps.
    Stopped(String),
}

#[derive(Debug, Clone)]
pub struct Branch {
    /// Starts with the bifurcation point (`t = 0`, `x = 0`).
    pub points: Vec<BranchPoint>,
    pub free: FreeParameter,
    /// Parameters at the bifurcation point.
    pub fixed: Params,
    pub mode: Mode,
    pub direction: i32,
    pub grid: Grid,
    pub newton: NewtonConfig,
    pub status: BranchStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchRecord<'a> {
    pub t: f64,
    pub param_name: &'static str,
    pub param_value: f64,
    pub residual_norm: f64,
    pub x: &'a [f64],
}

impl Branch {
    pub fn last(&self) -> &BranchPoint {
        self.points.last().expect("a branch always holds its bifurcation point")
    }

    /// One JSON object per point; `stride > 1` keeps every `stride`-th sample of `x`.
    pub fn to_json_lines(&self, stride: usize) -> String {
        let stride = stride.max(1);
        let mut out = String::new();
        for p in &self.points {
            let x: Vec<f64> = p.x.values().iter().step_by(stride).copied().collect();
            let record = BranchRecord {
                t: p.t,
                param_name: self.free.name(),
                param_value: p.param,
                residual_norm: p.residual_norm,
                x: &x,
            };
            out.push_str(&to_json(&record).expect("plain record"));
            out.push('\n');
        }
        out
    }
}

/// Newton solve of the augmented system at amplitude `t`.
fn solve_augmented(
    guess: &SampledFunction,
    param_guess: f64,
    t: f64,
    branch: &Branch,
) -> Result<BranchPoint> {
    let grid = branch.grid;
    let m = grid.free_len();
    let e = SampledFunction::eigenfunction(grid, &branch.mode).free();
    let scale = 1.0 / (2.0 * grid.r());
    let we = DVector::from_iterator(m, grid.simpson_weights()[..m].iter().zip(e.iter()).map(|(w, v)| w * v * scale));
    let target = branch.direction as f64 * t;
    let free = branch.free;
    let base = branch.fixed;
    let split = |z: &DVector<f64>| -> Result<(SampledFunction, Params)> {
        let x = SampledFunction::from_free(grid, &z.rows(0, m).into_owned());
        let p = free.set(&base, z[m]);
        p.validate()?;
        Ok((x, p))
    };

    let mut z0 = DVector::zeros(m + 1);
    z0.rows_mut(0, m).copy_from(&guess.free());
    z0[m] = param_guess;
    let out = newton::solve(
        z0,
        |z| {
            let (x, p) = split(z)?;
            let mut r = DVector::zeros(m + 1);
            r.rows_mut(0, m).copy_from(&residual(&x, &p, &grid)?.free());
            r[m] = we.dot(&z.rows(0, m)) - target;
            Ok(r)
        },
        |z| {
            let (x, p) = split(z)?;
            let mut j = DMatrix::zeros(m + 1, m + 1);
            j.view_mut((0, 0), (m, m)).copy_from(jacobian(&x, &p, &grid)?.matrix());
            let dp = match free {
                FreeParameter::Alpha => residual_alpha_derivative(&x),
                FreeParameter::Beta => residual_beta_derivative(&x),
            };
            j.view_mut((0, m), (m, 1)).copy_from(&dp.free());
            j.view_mut((m, 0), (1, m)).copy_from(&we.transpose());
            Ok(j)
        },
        &branch.newton,
    )?;
    let (x, p) = split(&out.x)?;
    Ok(BranchPoint {
        t,
        param: free.get(&p),
        x,
        residual_norm: out.residual_norm,
        iterations: out.iterations,
    })
}

/// Leaves the trivial branch at a simple bifurcation point along `direction * e_m`.
///
/// The free parameter is first moved to the discrete bifurcation value, where
/// the sampled eigenfunction lies exactly in the kernel of the discrete
/// linearization; the fixed parameter is taken from `bif`. The returned branch
/// holds the bifurcation point and the seed at amplitude `t0`.
pub fn branch_switch(
    bif: &BifurcationPoint,
    direction: i32,
    t0: f64,
    free: FreeParameter,
    gamma: f64,
    grid: &Grid,
) -> Result<Branch> {
    if !(t0 > 0.0 && t0 <= 0.1) {
        return Err(Error::Config(format!("seed amplitude must lie in (0, 0.1], got {t0}")));
    }
    if direction != 1 && direction != -1 {
        return Err(Error::Config(format!("direction must be +1 or -1, got {direction}")));
    }
    let mode = Mode::new(bif.mode, grid.r())?;
    let d = discrete_mode_coefficient(&mode, grid);
    let fixed = match free {
        FreeParameter::Alpha => Params::new(-(d * d + bif.beta) / d, bif.beta, gamma, grid.r())?,
        FreeParameter::Beta => Params::new(bif.alpha, -d * d - bif.alpha * d, gamma, grid.r())?,
    };
    let mut branch = Branch {
        points: vec![BranchPoint {
            t: 0.0,
            param: free.get(&fixed),
            x: SampledFunction::zeros(*grid),
            residual_norm: 0.0,
            iterations: 0,
        }],
        free,
        fixed,
        mode,
        direction,
        grid: *grid,
        newton: NewtonConfig::with_tol(CONTINUATION_TOL),
        status: BranchStatus::Complete,
    };
    let guess = SampledFunction::eigenfunction(*grid, &mode).scaled(direction as f64 * t0);
    let seed = solve_augmented(&guess, free.get(&fixed), t0, &branch)?;
    branch.points.push(seed);
    Ok(branch)
}

/// Advances a seeded branch by `n_steps` amplitude increments of `dt`.
///
/// Stops early, with [`BranchStatus::Stopped`], on a Newton failure or when
/// the next amplitude would exceed [`MAX_AMPLITUDE`].
pub fn continue_branch(seed: Branch, n_steps: usize, dt: f64) -> Result<Branch> {
    if !(dt > 0.0 && dt <= 0.05) {
        return Err(Error::Config(format!("amplitude step must lie in (0, 0.05], got {dt}")));
    }
    if seed.points.len() < 2 {
        return Err(Error::Config("continuation needs a converged seed".into()));
    }
    let mut branch = seed;
    for _ in 0..n_steps {
        let k = branch.points.len();
        let (prev, last) = (&branch.points[k - 2], &branch.points[k - 1]);
        let t = last.t + dt;
        if t > MAX_AMPLITUDE * (1.0 + 1e-12) {
            branch.status = BranchStatus::Stopped(format!("amplitude {t} exceeds the cap {MAX_AMPLITUDE}"));
            break;
        }
        let slope = if prev.t > 0.0 {
            (last.param - prev.param) / (last.t - prev.t)
        } else {
            0.0
        };
        let guess = last.x.scaled(t / last.t);
        match solve_augmented(&guess, last.param + slope * dt, t, &branch) {
            Ok(point) => branch.points.push(point),
            Err(err) => {
                branch.status = BranchStatus::Stopped(format!("at t = {t}: {err}"));
                break;
            }
        }
    }
    Ok(branch)
}

/// Least-squares slope of `log |param(t) - param(0)|` against `log t` over
/// the points with `t > 0`.
pub fn pitchfork_exponent(branch: &Branch) -> f64 {
    let p0 = branch.points[0].param;
    let pts: Vec<(f64, f64)> = branch
        .points
        .iter()
        .filter(|p| p.t > 0.0)
        .map(|p| (p.t.ln(), (p.param - p0).abs().ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
