//! Uniform-grid finite differences on `[-r, r]`.
//!
//! The boundary conditions `x'(-r) = x'''(-r) = 0` and `x(r) = x''(r) = 0`
//! are imposed through ghost nodes: the sampled function is extended evenly
//! across the left end and oddly across the right end, where the last node
//! is pinned to zero. The free unknowns are therefore the nodes
//! `0..n-1` (all but the right endpoint), and every operator below is square
//! on that set.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{check_half_length, nonlinearity_pointwise, Mode, Params};

pub const DEFAULT_NODES: usize = 201;

/// Uniform grid `s_i = -r + i h`, `h = 2r/(n-1)`, with an odd node count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    r: f64,
    h: f64,
}

impl Grid {
    pub fn new(n: usize, r: f64) -> Result<Self> {
        if n < 11 || n % 2 == 0 {
            return Err(Error::Config(format!("node count must be odd and >= 11, got {n}")));
        }
        check_half_length(r)?;
        Ok(Self {
            n,
            r,
            h: 2.0 * r / (n - 1) as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of unknowns left after pinning `x(r) = 0`.
    pub fn free_len(&self) -> usize {
        self.n - 1
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n - 1 {
            self.r
        } else {
            -self.r + i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.node(i))
    }

    /// Composite Simpson weights (including the factor `h/3`).
    pub fn simpson_weights(&self) -> Vec<f64> {
        let third = self.h / 3.0;
        (0..self.n)
            .map(|i| {
                if i == 0 || i == self.n - 1 {
                    third
                } else if i % 2 == 1 {
                    4.0 * third
                } else {
                    2.0 * third
                }
            })
            .collect()
    }

    /// Maps a (possibly ghost) node index to a free unknown and a sign;
    /// `None` for the pinned right endpoint.
    fn reflect(&self, j: isize) -> Option<(usize, f64)> {
        let last = (self.n - 1) as isize;
        if j < 0 {
            Some(((-j) as usize, 1.0))
        } else if j > last {
            Some(((2 * last - j) as usize, -1.0))
        } else if j == last {
            None
        } else {
            Some((j as usize, 1.0))
        }
    }
}

/// Central-difference stencils of orders 0..=4 as (offset, weight) pairs
/// with unit spacing.
const STENCILS: [&[(isize, f64)]; 5] = [
    &[(0, 1.0)],
    &[(-1, -0.5), (1, 0.5)],
    &[(-1, 1.0), (0, -2.0), (1, 1.0)],
    &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
    &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
];

/// Function values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::Shape(format!(
                "expected {} samples, got {}",
                grid.n(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.nodes().map(f).collect(),
        }
    }

    /// The normalized eigenfunction of `mode` sampled on `grid`.
    pub fn eigenfunction(grid: Grid, mode: &Mode) -> Self {
        Self::from_fn(grid, |s| mode.eigenfunction_derivative(0, s))
    }

    /// Rebuilds a function from free unknowns, pinning the right endpoint to zero.
    pub fn from_free(grid: Grid, free: &DVector<f64>) -> Self {
        let mut values: Vec<f64> = free.iter().copied().collect();
        values.push(0.0);
        Self { grid, values }
    }

    pub fn free(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.values[..self.grid.free_len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &Self) -> Result<Self> {
        same_grid(self, other)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + factor * b).collect(),
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Norm induced by [`inner_product`].
    pub fn norm(&self) -> f64 {
        inner_product(self, self).expect("same grid").sqrt()
    }

    /// Central-difference derivatives of orders 0..=4 at every node.
    pub fn derivatives(&self) -> Derivatives {
        Derivatives::of(self)
    }
}

fn same_grid(a: &SampledFunction, b: &SampledFunction) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::Shape(format!(
            "grids differ: (n = {}, r = {}) vs (n = {}, r = {})",
            a.grid.n, a.grid.r, b.grid.n, b.grid.r
        )));
    }
    Ok(())
}

/// `<g, h> = (1/2r) \int g h ds` by composite Simpson quadrature.
pub fn inner_product(g: &SampledFunction, h: &SampledFunction) -> Result<f64> {
    same_grid(g, h)?;
    let grid = g.grid;
    let sum: f64 = grid
        .simpson_weights()
        .iter()
        .zip(g.values.iter().zip(&h.values))
        .map(|(w, (a, b))| w * a * b)
        .sum();
    Ok(sum / (2.0 * grid.r))
}

/// Nodal derivatives `x, x', x'', x''', x''''` of a sampled function.
///
/// Higher differences are formed by nesting second differences, which keeps
/// the rounding error proportional to the differences themselves rather than
/// to the function values.
#[derive(Debug, Clone)]
pub struct Derivatives {
    pub d: [Vec<f64>; 5],
}

impl Derivatives {
    pub fn of(x: &SampledFunction) -> Self {
        let grid = x.grid;
        let n = grid.n;
        let h = grid.h;
        // ext[k] holds node k - 2.
        let ext: Vec<f64> = (-2..n as isize + 2)
            .map(|j| match grid.reflect(j) {
                Some((i, sign)) => sign * x.values[i],
                None => 0.0,
            })
            .collect();
        let mut second = vec![0.0; n + 4];
        for k in 1..n + 3 {
            second[k] = (ext[k + 1] - ext[k]) - (ext[k] - ext[k - 1]);
        }
        let mut d: [Vec<f64>; 5] = Default::default();
        for slot in d.iter_mut() {
            *slot = Vec::with_capacity(n);
        }
        let (h2, h3, h4) = (h * h, h * h * h, h * h * h * h);
        for i in 0..n {
            let k = i + 2;
            d[0].push(ext[k]);
            d[1].push((ext[k + 1] - ext[k - 1]) / (2.0 * h));
            d[2].push(second[k] / h2);
            d[3].push((second[k + 1] - second[k - 1]) / (2.0 * h3));
            d[4].push(((second[k + 1] - second[k]) - (second[k] - second[k - 1])) / h4);
        }
        Self { d }
    }
}

/// A square matrix acting on the free unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    grid: Grid,
    matrix: DMatrix<f64>,
}

impl DiscreteOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// Matrix-vector product; the result is zero at the pinned endpoint.
    pub fn apply(&self, x: &SampledFunction) -> Result<SampledFunction> {
        if *x.grid() != self.grid {
            return Err(Error::Shape("operator and function live on different grids".into()));
        }
        Ok(SampledFunction::from_free(self.grid, &(&self.matrix * x.free())))
    }
}

/// Assembles `sum_k diag(coef[k]) D_k` on the free unknowns, `D_k` being the
/// order-k difference matrix with boundary conditions folded in.
fn combine_stencils(grid: &Grid, coef: &[Vec<f64>; 5]) -> DMatrix<f64> {
    let m = grid.free_len();
    let mut matrix = DMatrix::zeros(m, m);
    for i in 0..m {
        for (order, stencil) in STENCILS.iter().enumerate() {
            let scale = coef[order][i] / grid.h.powi(order as i32);
            for &(offset, weight) in stencil.iter() {
                if let Some((col, sign)) = grid.reflect(i as isize + offset) {
                    matrix[(i, col)] += scale * weight * sign;
                }
            }
        }
    }
    matrix
}

/// Linearization at the trivial solution: `h'''' + alpha h'' + beta h`.
pub fn assemble_linearized(alpha: f64, beta: f64, grid: &Grid) -> DiscreteOperator {
    let m = grid.free_len();
    let coef = [vec![beta; m], vec![0.0; m], vec![alpha; m], vec![0.0; m], vec![1.0; m]];
    DiscreteOperator {
        grid: *grid,
        matrix: combine_stencils(grid, &coef),
    }
}

/// `F(x) = x'''' + alpha x'' + beta x - f(x, ..., x'''')` on the free nodes.
pub fn residual(x: &SampledFunction, p: &Params, grid: &Grid) -> Result<SampledFunction> {
    if x.grid() != grid {
        return Err(Error::Shape("function and grid disagree".into()));
    }
    let Derivatives { d } = x.derivatives();
    let mut values: Vec<f64> = (0..grid.free_len())
        .map(|i| {
            let linear = d[4][i] + p.alpha * d[2][i] + p.beta * d[0][i];
            linear - nonlinearity_pointwise(d[0][i], d[1][i], d[2][i], d[3][i], d[4][i], p.alpha, p.gamma)
        })
        .collect();
    values.push(0.0);
    SampledFunction::new(*grid, values)
}

/// Exact Jacobian of [`residual`] with respect to the free unknowns.
pub fn jacobian(x: &SampledFunction, p: &Params, grid: &Grid) -> Result<DiscreteOperator> {
    if x.grid() != grid {
        return Err(Error::Shape("function and grid disagree".into()));
    }
    let Derivatives { d } = x.derivatives();
    let m = grid.free_len();
    let (alpha, gamma) = (p.alpha, p.gamma);
    let mut coef: [Vec<f64>; 5] = Default::default();
    for slot in coef.iter_mut() {
        *slot = Vec::with_capacity(m);
    }
    for i in 0..m {
        let (x0, x1, x2, x3, x4) = (d[0][i], d[1][i], d[2][i], d[3][i], d[4][i]);
        coef[0].push(p.beta - 3.0 * gamma * x0 * x0);
        coef[1].push(-(12.0 * x2 * x3 + 6.0 * x1 * (x4 - 0.5 * alpha * x2)));
        coef[2].push(alpha - (9.0 * x2 * x2 + 12.0 * x1 * x3 - 1.5 * alpha * x1 * x1));
        coef[3].push(-(12.0 * x1 * x2));
        coef[4].push(1.0 - 3.0 * x1 * x1);
    }
    Ok(DiscreteOperator {
        grid: *grid,
        matrix: combine_stencils(grid, &coef),
    })
}

/// Partial derivative of `F` with respect to `alpha`: `x'' + (3/2) x'^2 x''`.
pub fn residual_alpha_derivative(x: &SampledFunction) -> SampledFunction {
    let Derivatives { d } = x.derivatives();
    let grid = *x.grid();
    let mut values: Vec<f64> = (0..grid.free_len())
        .map(|i| d[2][i] + 1.5 * d[1][i] * d[1][i] * d[2][i])
        .collect();
    values.push(0.0);
    SampledFunction { grid, values }
}

/// Partial derivative of `F` with respect to `beta`: `x`.
pub fn residual_beta_derivative(x: &SampledFunction) -> SampledFunction {
    let mut out = x.clone();
    let last = out.values.len() - 1;
    out.values[last] = 0.0;
    out
}

/// Applies the linearization through nested differences; more accurate than
/// [`DiscreteOperator::apply`] on fine grids.
pub fn apply_linearized(x: &SampledFunction, alpha: f64, beta: f64) -> SampledFunction {
    let Derivatives { d } = x.derivatives();
    let grid = *x.grid();
    let mut values: Vec<f64> = (0..grid.free_len())
        .map(|i| d[4][i] + alpha * d[2][i] + beta * d[0][i])
        .collect();
    values.push(0.0);
    SampledFunction { grid, values }
}
