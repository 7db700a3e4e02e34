//! Lyapunov–Schmidt reduction at a double point `(alpha0, beta0)` of rays
//! `l_{m1}` and `l_{m2}`.
//!
//! For kernel coordinates `xi = (xi1, xi2)` the auxiliary equation
//!
//! ```text
//! G(x) = F(x, alpha, beta, gamma0) + sum_i (xi_i - <x, e_i>) e_i = 0
//! ```
//!
//! has a unique small solution `x~(xi, alpha, beta)`. The reduced map is
//! `phi_i = xi_i - <x~, e_i>`; its zeros are the solutions of `F = 0` near the
//! origin, and its Brouwer degree on a small disc is measured here as a
//! winding number.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::discretization::{inner_product, jacobian, residual, Grid, SampledFunction};
use crate::error::{Error, Result};
use crate::model::{degree_sign_classification, reduced_jacobian_closed_form, DegreeSign, DoublePoint, Params};
use crate::newton::{self, NewtonConfig};

/// Default bound on `|xi|`.
pub const DEFAULT_XI_RADIUS: f64 = 0.1;
/// Default half-width of the admissible parameter box around the double point.
pub const DEFAULT_PARAM_BOX: f64 = 0.25;
/// Default central-difference step for the numeric reduced Jacobian.
pub const DEFAULT_JACOBIAN_STEP: f64 = 1e-4;
/// Default radius and sample count of the winding circle.
pub const DEFAULT_WINDING_RADIUS: f64 = 1e-3;
pub const DEFAULT_WINDING_SAMPLES: usize = 256;
const MAX_WINDING_SAMPLES: usize = 1 << 14;

#[derive(Debug, Clone)]
pub struct ReductionContext {
    pub double_point: DoublePoint,
    pub gamma0: f64,
    pub grid: Grid,
    pub newton: NewtonConfig,
    /// Sampled `e_{m1}`, `e_{m2}`.
    pub basis: [SampledFunction; 2],
    pub xi_radius: f64,
    pub param_box: f64,
    /// Simpson weights scaled by `1/(2r)` on the free nodes.
    weights: Vec<f64>,
}

impl ReductionContext {
    pub fn new(double_point: DoublePoint, gamma0: f64, grid: Grid, newton: NewtonConfig) -> Result<Self> {
        if !(gamma0 >= 0.0 && gamma0.is_finite()) {
            return Err(Error::Domain(format!("gamma0 must be >= 0, got {gamma0}")));
        }
        if (grid.r() - double_point.r).abs() > 1e-12 * double_point.r {
            return Err(Error::Shape(format!(
                "grid half-length {} differs from the double point's {}",
                grid.r(),
                double_point.r
            )));
        }
        newton.validate()?;
        let (a, b) = double_point.modes();
        let basis = [SampledFunction::eigenfunction(grid, &a), SampledFunction::eigenfunction(grid, &b)];
        let scale = 1.0 / (2.0 * grid.r());
        let weights = grid.simpson_weights()[..grid.free_len()].iter().map(|w| w * scale).collect();
        Ok(Self {
            double_point,
            gamma0,
            grid,
            newton,
            basis,
            xi_radius: DEFAULT_XI_RADIUS,
            param_box: DEFAULT_PARAM_BOX,
            weights,
        })
    }

    /// Context with default Newton settings.
    pub fn with_defaults(double_point: DoublePoint, gamma0: f64, grid: Grid) -> Result<Self> {
        Self::new(double_point, gamma0, grid, NewtonConfig::default())
    }

    fn params(&self, alpha: f64, beta: f64) -> Result<Params> {
        let dp = &self.double_point;
        if !((alpha - dp.alpha0).abs() <= self.param_box && (beta - dp.beta0).abs() <= self.param_box) {
            return Err(Error::Domain(format!(
                "({alpha}, {beta}) lies outside the box of half-width {} around ({}, {})",
                self.param_box, dp.alpha0, dp.beta0
            )));
        }
        Params::new(alpha, beta, self.gamma0, dp.r)
    }

    fn project(&self, x: &SampledFunction) -> [f64; 2] {
        // Same grid by construction.
        [
            inner_product(x, &self.basis[0]).expect("context grid"),
            inner_product(x, &self.basis[1]).expect("context grid"),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct ReducedPoint {
    pub xi: [f64; 2],
    pub alpha: f64,
    pub beta: f64,
    pub xtilde: SampledFunction,
    pub phi: [f64; 2],
    pub iterations: usize,
    pub residual_norm: f64,
}

/// Solves `G(x) = 0` for `x~(xi, alpha, beta)` by Newton's method.
pub fn solve_xtilde(xi: [f64; 2], alpha: f64, beta: f64, ctx: &ReductionContext) -> Result<ReducedPoint> {
    let p = ctx.params(alpha, beta)?;
    let radius = xi[0].hypot(xi[1]);
    if !(radius <= ctx.xi_radius) {
        return Err(Error::Domain(format!("|xi| = {radius} exceeds the radius {}", ctx.xi_radius)));
    }
    let grid = ctx.grid;
    let e: [DVector<f64>; 2] = [ctx.basis[0].free(), ctx.basis[1].free()];
    let we: [DVector<f64>; 2] = [0, 1].map(|i| e[i].component_mul(&DVector::from_column_slice(&ctx.weights)));

    let x0 = match &ctx.newton.initial_guess {
        Some(guess) => guess.free(),
        None => &e[0] * xi[0] + &e[1] * xi[1],
    };
    let out = newton::solve(
        x0,
        |v| {
            let x = SampledFunction::from_free(grid, v);
            let mut g = residual(&x, &p, &grid)?.free();
            for i in 0..2 {
                g.axpy(xi[i] - we[i].dot(v), &e[i], 1.0);
            }
            Ok(g)
        },
        |v| {
            let x = SampledFunction::from_free(grid, v);
            let mut j: DMatrix<f64> = jacobian(&x, &p, &grid)?.into_matrix();
            for i in 0..2 {
                j.ger(-1.0, &e[i], &we[i], 1.0);
            }
            Ok(j)
        },
        &ctx.newton,
    )?;
    let xtilde = SampledFunction::from_free(grid, &out.x);
    let proj = ctx.project(&xtilde);
    Ok(ReducedPoint {
        xi,
        alpha,
        beta,
        phi: [xi[0] - proj[0], xi[1] - proj[1]],
        xtilde,
        iterations: out.iterations,
        residual_norm: out.residual_norm,
    })
}

pub fn reduced_map(xi: [f64; 2], alpha: f64, beta: f64, ctx: &ReductionContext) -> Result<[f64; 2]> {
    Ok(solve_xtilde(xi, alpha, beta, ctx)?.phi)
}

/// Central-difference Jacobian `d phi / d xi` at `xi = 0`, row-major.
pub fn reduced_jacobian_numeric(alpha: f64, beta: f64, ctx: &ReductionContext, step: f64) -> Result<[[f64; 2]; 2]> {
    if !(step > 0.0 && step <= ctx.xi_radius) {
        return Err(Error::Config(format!("difference step must lie in (0, {}], got {step}", ctx.xi_radius)));
    }
    let mut jac = [[0.0; 2]; 2];
    for j in 0..2 {
        let mut xi = [0.0; 2];
        xi[j] = step;
        let plus = reduced_map(xi, alpha, beta, ctx)?;
        xi[j] = -step;
        let minus = reduced_map(xi, alpha, beta, ctx)?;
        for i in 0..2 {
            jac[i][j] = (plus[i] - minus[i]) / (2.0 * step);
        }
    }
    Ok(jac)
}

pub fn determinant(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Winding number of `theta -> phi(radius (cos theta, sin theta), alpha, beta)`
/// around the origin.
///
/// Angle increments are unwrapped into `(-pi, pi]`; if any exceeds `pi/2`
/// in magnitude the circle is resampled with twice as many points.
pub fn winding_degree(alpha: f64, beta: f64, ctx: &ReductionContext, radius: f64, samples: usize) -> Result<i32> {
    if samples < 64 {
        return Err(Error::Config(format!("winding needs at least 64 samples, got {samples}")));
    }
    if !(radius > 0.0 && radius <= ctx.xi_radius) {
        return Err(Error::Config(format!("winding radius must lie in (0, {}], got {radius}", ctx.xi_radius)));
    }
    let floor = 10.0 * ctx.newton.residual_tol;
    let mut n = samples;
    loop {
        let mut angles = Vec::with_capacity(n);
        for k in 0..n {
            let theta = 2.0 * PI * k as f64 / n as f64;
            let phi = reduced_map([radius * theta.cos(), radius * theta.sin()], alpha, beta, ctx)?;
            let size = phi[0].hypot(phi[1]);
            if size < floor {
                return Err(Error::IndeterminateDegree(format!(
                    "|phi| = {size:e} at theta = {theta} is below the noise floor {floor:e}"
                )));
            }
            angles.push(phi[1].atan2(phi[0]));
        }
        let mut total = 0.0;
        let mut coarse = false;
        for k in 0..n {
            let mut d = angles[(k + 1) % n] - angles[k];
            if d > PI {
                d -= 2.0 * PI;
            } else if d <= -PI {
                d += 2.0 * PI;
            }
            coarse |= d.abs() > PI / 2.0;
            total += d;
        }
        if !coarse {
            return Ok((total / (2.0 * PI)).round() as i32);
        }
        if 2 * n > MAX_WINDING_SAMPLES {
            return Err(Error::IndeterminateDegree(format!(
                "angle increments stay above pi/2 with {n} samples"
            )));
        }
        n *= 2;
    }
}

/// Outcome of one probe near the double point, as exported to JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub alpha: f64,
    pub beta: f64,
    pub slope: f64,
    pub det_closed_form: f64,
    pub det_numeric: Option<f64>,
    pub winding: Option<i32>,
    /// `ok`, `mismatch`, `boundary`, `indeterminate` or `solver_failure`.
    pub status: String,
}

impl ProbeReport {
    pub fn failed(&self) -> bool {
        matches!(self.status.as_str(), "indeterminate" | "solver_failure")
    }
}

/// Probes the point `(alpha0 + offset, beta0 + slope * offset)`: compares the
/// closed-form determinant, the numeric determinant and the winding number.
pub fn probe(ctx: &ReductionContext, slope: f64, offset: f64, radius: f64, samples: usize) -> Result<ProbeReport> {
    let dp = ctx.double_point;
    let (alpha, beta) = (dp.alpha0 + offset, dp.beta0 + slope * offset);
    let det_closed_form = reduced_jacobian_closed_form(alpha, beta, dp.m1, dp.m2, dp.r)?.det;
    let mut report = ProbeReport {
        alpha,
        beta,
        slope,
        det_closed_form,
        det_numeric: None,
        winding: None,
        status: String::new(),
    };
    let expected = match degree_sign_classification(slope, dp.m1, dp.m2, dp.r)? {
        DegreeSign::Boundary => {
            report.status = "boundary".into();
            return Ok(report);
        }
        sign => sign.as_int(),
    };
    ctx.params(alpha, beta)?;
    let outcome = reduced_jacobian_numeric(alpha, beta, ctx, DEFAULT_JACOBIAN_STEP)
        .map(|j| report.det_numeric = Some(determinant(&j)))
        .and_then(|_| winding_degree(alpha, beta, ctx, radius, samples));
    report.status = match outcome {
        Ok(w) => {
            report.winding = Some(w);
            if Some(w) == expected { "ok" } else { "mismatch" }.into()
        }
        Err(Error::IndeterminateDegree(_)) => "indeterminate".into(),
        Err(Error::NewtonFailed { .. }) | Err(Error::SingularSystem(_)) => "solver_failure".into(),
        Err(other) => return Err(other),
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::discrete_mode_coefficient;
    use crate::model::double_point;

    fn ctx(n: usize, gamma0: f64) -> ReductionContext {
        let dp = double_point(1, 2, PI).unwrap();
        ReductionContext::with_defaults(dp, gamma0, Grid::new(n, PI).unwrap()).unwrap()
    }

    #[test]
    fn basis_is_orthonormal() {
        let c = ctx(201, 1.0);
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((inner_product(&c.basis[i], &c.basis[j]).unwrap() - expected).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn zero_xi_gives_trivial_solution() {
        let c = ctx(101, 1.0);
        let pt = solve_xtilde([0.0, 0.0], 0.7, 0.1, &c).unwrap();
        assert_eq!(pt.iterations, 1);
        assert_eq!(pt.phi, [0.0, 0.0]);
        assert_eq!(pt.xtilde.sup_norm(), 0.0);
    }

    #[test]
    fn rejects_out_of_domain_arguments() {
        let c = ctx(51, 1.0);
        assert!(matches!(solve_xtilde([10.0, 0.0], 0.625, 0.035, &c), Err(Error::Domain(_))));
        assert!(matches!(solve_xtilde([0.0, 0.0], 2.0, 0.035, &c), Err(Error::Domain(_))));
        assert!(matches!(winding_degree(0.7, 0.06, &c, 1e-3, 32), Err(Error::Config(_))));
    }

    #[test]
    fn residual_meets_tolerance() {
        let c = ctx(101, 1.0);
        let pt = solve_xtilde([2e-3, -1e-3], 0.7, 0.06, &c).unwrap();
        assert!(pt.residual_norm <= c.newton.residual_tol);
        assert!(pt.iterations <= 7);
    }

    #[test]
    fn reduced_map_is_odd() {
        let c = ctx(101, 1.0);
        let a = reduced_map([3e-3, 1e-3], 0.7, 0.06, &c).unwrap();
        let b = reduced_map([-3e-3, -1e-3], 0.7, 0.06, &c).unwrap();
        assert!((a[0] + b[0]).abs() < 1e-9 && (a[1] + b[1]).abs() < 1e-9);
    }

    #[test]
    fn small_xi_follows_closed_form_diagonal() {
        let c = ctx(201, 1.0);
        let xi = 1e-3;
        let phi = reduced_map([xi, 0.0], 0.625, 0.03515625, &c).unwrap();
        // Both diagonal entries vanish at the double point, leaving the cubic remainder.
        assert!(phi[0].abs() < 1e-4 * xi && phi[1].abs() < 1e-4 * xi, "{phi:?}");
        let closed = reduced_jacobian_closed_form(0.725, 0.06515625, 1, 2, PI).unwrap();
        let phi = reduced_map([xi, 0.0], 0.725, 0.06515625, &c).unwrap();
        assert!((phi[0] / xi - closed.diagonal[0]).abs() < 0.02 * closed.diagonal[0].abs());
        assert!(phi[1].abs() < 1e-4 * xi);
    }

    #[test]
    fn xtilde_deviates_cubically_at_discrete_double_point() {
        // The sampled eigenfunctions are exact discrete eigenvectors, so the
        // linear part of x~ cancels exactly at the discrete double point.
        let g = Grid::new(201, PI).unwrap();
        let dp = double_point(1, 2, PI).unwrap();
        let (m1, m2) = dp.modes();
        let (d1, d2) = (discrete_mode_coefficient(&m1, &g), discrete_mode_coefficient(&m2, &g));
        let (alpha, beta) = (-(d1 + d2), d1 * d2);
        let c = ReductionContext::new(dp, 1.0, g, NewtonConfig::with_tol(1e-11)).unwrap();
        let dev: Vec<f64> = [1e-3, 2e-3, 4e-3]
            .iter()
            .map(|&s| {
                let xi = [s * 0.6, s * 0.8];
                let pt = solve_xtilde(xi, alpha, beta, &c).unwrap();
                let lin = c.basis[0].scaled(xi[0]).axpy(xi[1], &c.basis[1]).unwrap();
                pt.xtilde.axpy(-1.0, &lin).unwrap().norm()
            })
            .collect();
        let order = (dev[2] / dev[0]).log2() / 2.0;
        assert!(order >= 2.5, "{dev:?} order {order}");
    }

    #[test]
    fn numeric_jacobian_matches_closed_form() {
        let c = ctx(201, 1.0);
        for (alpha, beta) in [(0.725, 0.06515625), (0.725, 0.13515625)] {
            let num = reduced_jacobian_numeric(alpha, beta, &c, 1e-4).unwrap();
            let closed = reduced_jacobian_closed_form(alpha, beta, 1, 2, PI).unwrap();
            for i in 0..2 {
                let rel = (num[i][i] - closed.diagonal[i]).abs() / closed.diagonal[i].abs();
                assert!(rel < 0.02, "{num:?} vs {closed:?}");
            }
            assert!(num[0][1].abs() <= 1e-4 && num[1][0].abs() <= 1e-4);
        }
        let at_dp = reduced_jacobian_numeric(0.625, 0.03515625, &c, 1e-4).unwrap();
        assert!(at_dp[0][0].abs() <= 1e-4 && at_dp[1][1].abs() <= 1e-4);
    }

    #[test]
    fn winding_flips_across_sign_table() {
        let c = ctx(101, 1.0);
        assert_eq!(winding_degree(0.725, 0.06515625, &c, 1e-3, 64).unwrap(), -1);
        assert_eq!(winding_degree(0.725, 0.13515625, &c, 1e-3, 64).unwrap(), 1);
    }

    #[test]
    fn winding_near_zero_is_indeterminate() {
        let c = ctx(51, 1.0);
        assert!(matches!(
            winding_degree(0.725, 0.06515625, &c, 1e-9, 64),
            Err(Error::IndeterminateDegree(_))
        ));
    }

    #[test]
    fn boundary_probe_skips_winding() {
        let c = ctx(51, 1.0);
        let rep = probe(&c, 0.0625, 0.1, 1e-3, 64).unwrap();
        assert_eq!(rep.status, "boundary");
        assert_eq!(rep.winding, None);
        assert_eq!(rep.det_numeric, None);
    }

    #[test]
    fn probe_reports_agree() {
        let c = ctx(101, 0.0);
        let rep = probe(&c, 0.3, 1e-2, 1e-3, 64).unwrap();
        assert_eq!(rep.status, "ok");
        assert_eq!(rep.winding, Some(-1));
        assert!(rep.det_numeric.unwrap() < 0.0 && rep.det_closed_form < 0.0);
    }
}
