//! Energy functionals of the rod-foundation system.
//!
//! [`total_energy`] is the quartic truncation whose variational gradient is
//! the residual `F`; [`exact_total_energy`] keeps the curvature and the
//! end-shortening work in closed form and is used to check the truncation
//! order.

use serde::Serialize;

use crate::discretization::{inner_product, residual, Derivatives, Grid, SampledFunction};
use crate::error::{Error, Result};
use crate::model::{Mode, Params};

/// Physical parameters before rescaling by the bending stiffness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams {
    /// Compressive force.
    pub lambda: f64,
    /// Linear foundation stiffness.
    pub mu: f64,
    /// Quartic foundation coefficient.
    pub nu: f64,
    /// Young's modulus times the moment of inertia of the cross section.
    pub youngs_times_inertia: f64,
}

impl PhysicalParams {
    pub fn from_params(p: &Params, youngs_times_inertia: f64) -> Result<Self> {
        if !(youngs_times_inertia > 0.0) {
            return Err(Error::Domain(format!(
                "bending stiffness must be positive, got {youngs_times_inertia}"
            )));
        }
        Ok(Self {
            lambda: p.alpha * youngs_times_inertia,
            mu: p.beta * youngs_times_inertia,
            nu: p.gamma * youngs_times_inertia,
            youngs_times_inertia,
        })
    }

    pub fn to_params(&self, r: f64) -> Params {
        let ei = self.youngs_times_inertia;
        Params {
            alpha: self.lambda / ei,
            beta: self.mu / ei,
            gamma: self.nu / ei,
            r,
        }
    }
}

fn simpson_sum(grid: &Grid, integrand: impl Fn(usize) -> f64) -> f64 {
    grid.simpson_weights()
        .iter()
        .enumerate()
        .map(|(i, w)| w * integrand(i))
        .sum()
}

/// Truncated energy
/// `(1/4r) \int x''^2 - 3x'^2 x''^2 - alpha x'^2 - (alpha/4) x'^4 + beta x^2 - (gamma/2) x^4`.
pub fn total_energy(x: &SampledFunction, p: &Params) -> f64 {
    let grid = *x.grid();
    let Derivatives { d } = x.derivatives();
    let integral = simpson_sum(&grid, |i| {
        let (x0, x1, x2) = (d[0][i], d[1][i], d[2][i]);
        let (x0sq, x1sq, x2sq) = (x0 * x0, x1 * x1, x2 * x2);
        x2sq - 3.0 * x1sq * x2sq - p.alpha * x1sq - 0.25 * p.alpha * x1sq * x1sq + p.beta * x0sq
            - 0.5 * p.gamma * x0sq * x0sq
    });
    integral / (4.0 * grid.r())
}

/// Untruncated energy `E1 - E2 + E3` in physical units.
///
/// The foundation potential is `mu x^2/2 - nu x^4/4` with no higher-order
/// remainder.
pub fn exact_total_energy(x: &SampledFunction, q: &PhysicalParams) -> Result<f64> {
    let grid = *x.grid();
    let Derivatives { d } = x.derivatives();
    if let Some((node, slope)) = d[1].iter().enumerate().find(|(_, v)| v.abs() >= 1.0) {
        return Err(Error::Domain(format!(
            "|x'| = {} >= 1 at node {node} (s = {}): the work term is undefined",
            slope.abs(),
            grid.node(node)
        )));
    }
    let bending = simpson_sum(&grid, |i| {
        let curvature = d[2][i] / (1.0 + d[1][i] * d[1][i]).powf(1.5);
        0.5 * curvature * curvature
    });
    // 1 - sqrt(1 - u) written without cancellation.
    let shortening = simpson_sum(&grid, |i| {
        let u = d[1][i] * d[1][i];
        u / (1.0 + (1.0 - u).sqrt())
    });
    let foundation = simpson_sum(&grid, |i| {
        let x2 = d[0][i] * d[0][i];
        0.5 * q.mu * x2 - 0.25 * q.nu * x2 * x2
    });
    Ok(q.youngs_times_inertia * bending - q.lambda * shortening + foundation)
}

/// `|(E(x + eps h) - E(x - eps h))/(2 eps) - <F(x), h>|`.
pub fn gradient_pairing_check(x: &SampledFunction, h: &SampledFunction, p: &Params, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let grid = *x.grid();
    let plus = total_energy(&x.axpy(eps, h)?, p);
    let minus = total_energy(&x.axpy(-eps, h)?, p);
    let directional = (plus - minus) / (2.0 * eps);
    let pairing = inner_product(&residual(x, p, &grid)?, h)?;
    Ok((directional - pairing).abs())
}

/// Mixed third derivatives `E'''_{x x alpha}(0)(e, e, 1)` and
/// `E'''_{x x beta}(0)(e, e, 1)` at the normalized eigenfunction of mode `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransversalityCoefficients {
    pub d_alpha: f64,
    pub d_beta: f64,
}

const AMPLITUDE_STEP: f64 = 1e-3;
const PARAMETER_STEP: f64 = 1e-4;

/// Nested central differences: second order in the amplitude of the
/// eigenfunction, first order in one parameter.
pub fn crandall_rabinowitz_coefficients(m: u32, p: &Params, grid: &Grid) -> Result<TransversalityCoefficients> {
    let mode = Mode::new(m, p.r)?;
    let e = SampledFunction::eigenfunction(*grid, &mode);
    let t = AMPLITUDE_STEP * e.norm();
    let (plus, minus) = (e.scaled(t), e.scaled(-t));
    let zero = SampledFunction::zeros(*grid);
    let second = |q: &Params| {
        (total_energy(&plus, q) - 2.0 * total_energy(&zero, q) + total_energy(&minus, q)) / (t * t)
    };
    let step = PARAMETER_STEP;
    let d_alpha = (second(&p.with_alpha(p.alpha + step)) - second(&p.with_alpha(p.alpha - step))) / (2.0 * step);
    let d_beta = (second(&p.with_beta(p.beta + step)) - second(&p.with_beta(p.beta - step))) / (2.0 * step);
    Ok(TransversalityCoefficients { d_alpha, d_beta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ray_beta;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::new(n, PI).unwrap()
    }

    fn e(m: u32, g: Grid) -> SampledFunction {
        SampledFunction::eigenfunction(g, &Mode::new(m, PI).unwrap())
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let g = grid(51);
        let p = Params::new(1.0, 0.2, 1.0, PI).unwrap();
        assert_eq!(total_energy(&SampledFunction::zeros(g), &p), 0.0);
        let q = PhysicalParams::from_params(&p, 3.0).unwrap();
        assert_eq!(exact_total_energy(&SampledFunction::zeros(g), &q).unwrap(), 0.0);
    }

    #[test]
    fn physical_round_trip() {
        let p = Params::new(0.7, 0.05, 2.5, PI).unwrap();
        let q = PhysicalParams::from_params(&p, 4.0).unwrap();
        let back = q.to_params(PI);
        assert!((back.alpha - p.alpha).abs() < 1e-15);
        assert!((back.beta - p.beta).abs() < 1e-15);
        assert!((back.gamma - p.gamma).abs() < 1e-15);
        assert!(PhysicalParams::from_params(&p, 0.0).is_err());
    }

    #[test]
    fn energy_is_even() {
        let g = grid(51);
        let p = Params::new(1.0, 0.2, 1.0, PI).unwrap();
        let x = SampledFunction::from_fn(g, |s| 0.1 * (0.25 * (s + PI)).cos() + 0.02 * s.sin() * (s - PI));
        assert_eq!(total_energy(&x, &p), total_energy(&x.scaled(-1.0), &p));
    }

    #[test]
    fn quadratic_part_on_and_off_ray() {
        let g = grid(201);
        let e1 = e(1, g);
        let on = Params::new(1.0, ray_beta(1, 1.0, PI).unwrap(), 1.0, PI).unwrap();
        let off = on.with_beta(0.2);
        for t in [1e-2, 2e-2] {
            let x = e1.scaled(t);
            // Quartic part stays below ~t^4 for these amplitudes.
            assert!(total_energy(&x, &on).abs() < 2.0 * t.powi(4));
            let expected = 0.070703125 * t * t;
            assert!((total_energy(&x, &off) - expected).abs() < 2.0 * t.powi(4) + 1e-7 * t * t);
        }
    }

    #[test]
    fn exact_energy_rejects_steep_profiles() {
        let g = grid(51);
        let q = PhysicalParams::from_params(&Params::new(1.0, 0.2, 1.0, PI).unwrap(), 1.0).unwrap();
        // Slope 1.2 at s = 0.
        let x = SampledFunction::from_fn(g, |s| -2.4 * (0.5 * (s + PI)).cos());
        match exact_total_energy(&x, &q) {
            Err(Error::Domain(msg)) => assert!(msg.contains("node")),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn truncation_error_is_sixth_order() {
        let g = grid(201);
        let e1 = e(1, g);
        let p = Params::new(1.0, 0.2, 1.0, PI).unwrap();
        let ei = 2.0;
        let q = PhysicalParams::from_params(&p, ei).unwrap();
        let gap = |t: f64| {
            let x = e1.scaled(t);
            (exact_total_energy(&x, &q).unwrap() / (2.0 * PI * ei) - total_energy(&x, &p)).abs()
        };
        let amplitudes = [0.02, 0.04, 0.08];
        let slope = fit_slope(&amplitudes, &amplitudes.map(gap));
        assert!(slope >= 5.5, "slope {slope}");
    }

    fn fit_slope(t: &[f64], y: &[f64]) -> f64 {
        let lx: Vec<f64> = t.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
        let n = lx.len() as f64;
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
        let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
        num / den
    }

    #[test]
    fn gradient_pairing_at_zero() {
        let g = grid(201);
        let p = Params::new(1.0, 0.2, 1.0, PI).unwrap();
        let d = gradient_pairing_check(&SampledFunction::zeros(g), &e(2, g), &p, 1e-5).unwrap();
        assert!(d <= 1e-10, "{d:e}");
        assert!(gradient_pairing_check(&SampledFunction::zeros(g), &e(2, g), &p, 0.0).is_err());
    }

    #[test]
    fn gradient_pairing_refines() {
        let p = Params::new(1.0, 0.2, 1.0, PI).unwrap();
        let check = |n: usize| {
            let g = grid(n);
            gradient_pairing_check(&e(1, g).scaled(0.05), &e(2, g), &p, 1e-5).unwrap()
        };
        let (coarse, fine) = (check(201), check(401));
        assert!(coarse <= 1e-6, "{coarse:e}");
        assert!(fine < coarse / 3.0, "{coarse:e} -> {fine:e}");
    }

    #[test]
    fn transversality_coefficients() {
        let g = grid(201);
        let p = Params::new(1.0, ray_beta(1, 1.0, PI).unwrap(), 1.0, PI).unwrap();
        let k = crandall_rabinowitz_coefficients(1, &p, &g).unwrap();
        assert!((k.d_alpha / -0.0625 - 1.0).abs() < 0.01, "{k:?}");
        assert!((k.d_beta - 1.0).abs() < 0.01, "{k:?}");

        let p2 = Params::new(1.0, ray_beta(2, 1.0, PI).unwrap(), 1.0, PI).unwrap();
        let k2 = crandall_rabinowitz_coefficients(2, &p2, &g).unwrap();
        assert!((k2.d_alpha / -0.5625 - 1.0).abs() < 0.01, "{k2:?}");
        assert!(k2.d_alpha < 0.0 && k2.d_beta > 0.0);
    }

    #[test]
    fn transversality_ignores_gamma() {
        let g = grid(201);
        let base = Params::new(1.0, ray_beta(1, 1.0, PI).unwrap(), 0.0, PI).unwrap();
        let reference = crandall_rabinowitz_coefficients(1, &base, &g).unwrap();
        for gamma in [1.0, 10.0] {
            let k = crandall_rabinowitz_coefficients(1, &base.with_gamma(gamma), &g).unwrap();
            assert!((k.d_alpha - reference.d_alpha).abs() <= 1e-10);
            assert!((k.d_beta - reference.d_beta).abs() <= 1e-10);
        }
    }
}
