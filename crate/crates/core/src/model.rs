//! Closed-form mathematics of the rod model.
//!
//! Everything here is independent of any discretization: the parameter
//! space, the spectral rays `l_m` of the linearization, its eigenfunctions,
//! the pointwise nonlinearity and the closed form of the reduced Jacobian at
//! a double point together with the sign of its determinant.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::error::{Error, Result};

/// Number of rays enumerated when no explicit bound is given.
pub const DEFAULT_M_MAX: u32 = 10;

/// Dimensionless parameters: compressive force `alpha`, linear foundation
/// stiffness `beta`, quartic foundation coefficient `gamma` and the
/// half-length `r` of the rod.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub r: f64,
}

impl Params {
    pub fn new(alpha: f64, beta: f64, gamma: f64, r: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            gamma,
            r,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Domain(format!("beta must be > 0, got {}", self.beta)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Domain(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        check_half_length(self.r)
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    pub fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }
}

pub(crate) fn check_half_length(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("half-length r must be > 0, got {r}")))
    }
}

/// A spectral mode of the linearization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub m: u32,
    /// Ray coefficient `c_m < 0`.
    pub c: f64,
    pub r: f64,
}

impl Mode {
    pub fn new(m: u32, r: f64) -> Result<Self> {
        Ok(Self {
            m,
            c: mode_coefficient(m, r)?,
            r,
        })
    }

    /// Wave number `sqrt(-c_m)` of the eigenfunction.
    pub fn wave_number(&self) -> f64 {
        (-self.c).sqrt()
    }

    /// `beta` on the ray `l_m` at abscissa `alpha`.
    pub fn ray_beta(&self, alpha: f64) -> f64 {
        -self.c * alpha - self.c * self.c
    }

    /// `alpha` on the ray `l_m` at ordinate `beta`.
    pub fn ray_alpha(&self, beta: f64) -> f64 {
        -(beta + self.c * self.c) / self.c
    }

    /// Symbol of the linearization on this mode: `c^2 + alpha c + beta`.
    pub fn symbol(&self, alpha: f64, beta: f64) -> f64 {
        self.c * self.c + alpha * self.c + beta
    }

    /// Derivative of order `order` (0..=4) of the normalized eigenfunction
    /// `sqrt(2) cos(sqrt(-c_m)(s + r))`, without a domain check.
    pub fn eigenfunction_derivative(&self, order: u32, s: f64) -> f64 {
        let k = self.wave_number();
        let theta = k * (s + self.r);
        let (sin, cos) = theta.sin_cos();
        let scale = SQRT_2 * k.powi(order as i32);
        match order % 4 {
            0 => scale * cos,
            1 => -scale * sin,
            2 => -scale * cos,
            _ => scale * sin,
        }
    }
}

/// Ray coefficient `c_m = -(pi/r)^2 ((2m-1)/4)^2`.
pub fn mode_coefficient(m: u32, r: f64) -> Result<f64> {
    if m < 1 {
        return Err(Error::Domain("mode index must be >= 1".into()));
    }
    check_half_length(r)?;
    let q = (2.0 * f64::from(m) - 1.0) / 4.0;
    Ok(-(PI / r).powi(2) * q * q)
}

/// `beta = -c_m alpha - c_m^2`; may be non-positive outside the physical quadrant.
pub fn ray_beta(m: u32, alpha: f64, r: f64) -> Result<f64> {
    Ok(Mode::new(m, r)?.ray_beta(alpha))
}

/// Intersection of the rays `l_{m1}` and `l_{m2}`; the modes are stored in
/// ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoublePoint {
    pub m1: u32,
    pub m2: u32,
    pub alpha0: f64,
    pub beta0: f64,
    pub r: f64,
}

impl DoublePoint {
    pub fn modes(&self) -> (Mode, Mode) {
        // Both indices were validated on construction.
        let c1 = mode_coefficient(self.m1, self.r).expect("validated mode");
        let c2 = mode_coefficient(self.m2, self.r).expect("validated mode");
        (
            Mode { m: self.m1, c: c1, r: self.r },
            Mode { m: self.m2, c: c2, r: self.r },
        )
    }
}

pub fn double_point(m1: u32, m2: u32, r: f64) -> Result<DoublePoint> {
    if m1 == m2 {
        return Err(Error::Degenerate(format!(
            "a double point needs two distinct modes, got m1 = m2 = {m1}"
        )));
    }
    let (m1, m2) = (m1.min(m2), m1.max(m2));
    let c1 = mode_coefficient(m1, r)?;
    let c2 = mode_coefficient(m2, r)?;
    Ok(DoublePoint {
        m1,
        m2,
        alpha0: -(c1 + c2),
        beta0: c1 * c2,
        r,
    })
}

/// Normalized eigenfunction `sqrt(2) cos(sqrt(-c_m)(s + r))` with `<e, e> = 1`.
pub fn eigenfunction(m: u32, r: f64, s: f64) -> Result<f64> {
    let mode = Mode::new(m, r)?;
    let slack = 1e-12 * r.max(1.0);
    if !(s >= -r - slack && s <= r + slack) {
        return Err(Error::Domain(format!("s = {s} lies outside [-{r}, {r}]")));
    }
    Ok(mode.eigenfunction_derivative(0, s))
}

/// Modes `m <= m_max` whose ray passes within `tol` (in `beta`) of the point.
pub fn classify_rays_through(alpha: f64, beta: f64, r: f64, m_max: u32, tol: f64) -> Result<Vec<u32>> {
    check_half_length(r)?;
    let mut hits = Vec::new();
    for m in 1..=m_max {
        let mode = Mode::new(m, r)?;
        if mode.symbol(alpha, beta).abs() <= tol {
            hits.push(m);
        }
    }
    Ok(hits)
}

/// `f = gamma x^3 + 3 x''^3 + 12 x' x'' x''' + 3 x'^2 (x'''' - (alpha/2) x'')`.
pub fn nonlinearity_pointwise(x: f64, d1: f64, d2: f64, d3: f64, d4: f64, alpha: f64, gamma: f64) -> f64 {
    gamma * x * x * x + 3.0 * d2 * d2 * d2 + 12.0 * d1 * d2 * d3 + 3.0 * d1 * d1 * (d4 - 0.5 * alpha * d2)
}

/// Diagonal reduced Jacobian at `xi = 0` and its determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedJacobian {
    pub diagonal: [f64; 2],
    pub det: f64,
}

pub fn reduced_jacobian_closed_form(alpha: f64, beta: f64, m1: u32, m2: u32, r: f64) -> Result<ReducedJacobian> {
    let mut diagonal = [0.0; 2];
    for (slot, m) in diagonal.iter_mut().zip([m1, m2]) {
        let symbol = Mode::new(m, r)?.symbol(alpha, beta);
        let denominator = symbol - 1.0;
        if denominator == 0.0 {
            return Err(Error::Singular {
                mode: m,
                detail: format!("c^2 + alpha c + beta - 1 vanishes at ({alpha}, {beta})"),
            });
        }
        *slot = symbol / denominator;
    }
    Ok(ReducedJacobian {
        diagonal,
        det: diagonal[0] * diagonal[1],
    })
}

/// Sign of the reduced Jacobian determinant along a straight approach to a
/// double point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeSign {
    Plus,
    Minus,
    Boundary,
}

impl DegreeSign {
    pub fn as_int(&self) -> Option<i32> {
        match self {
            DegreeSign::Plus => Some(1),
            DegreeSign::Minus => Some(-1),
            DegreeSign::Boundary => None,
        }
    }
}

/// Classifies `slope = (beta - beta0)/(alpha - alpha0)` against the interval
/// `(-c_{m1}, -c_{m2})`, inside which the determinant is negative.
pub fn degree_sign_classification(slope: f64, m1: u32, m2: u32, r: f64) -> Result<DegreeSign> {
    if m1 >= m2 {
        return Err(Error::Domain(format!("expected m1 < m2, got m1 = {m1}, m2 = {m2}")));
    }
    let lower = -mode_coefficient(m1, r)?;
    let upper = -mode_coefficient(m2, r)?;
    let on = |edge: f64| (slope - edge).abs() <= 1e-12 * edge.abs().max(1.0);
    Ok(if on(lower) || on(upper) {
        DegreeSign::Boundary
    } else if slope > lower && slope < upper {
        DegreeSign::Minus
    } else {
        DegreeSign::Plus
    })
}
