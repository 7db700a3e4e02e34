//! Kernel analysis of the discretized linearization `h'''' + alpha h'' + beta h`.
//!
//! The assembled operator `L` is self-adjoint with respect to the trapezoid
//! weights `W = diag(1/2, 1, ..., 1)` of the free nodes (the ghost-node
//! reflections make `W L` symmetric). All spectral work is done on the
//! similar symmetric matrix `W^{1/2} L W^{-1/2}`, whose singular values are
//! the moduli of the eigenvalues of `L`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::discretization::{assemble_linearized, inner_product, Grid, SampledFunction};
use crate::error::{Error, Result};
use crate::model::{Mode, DEFAULT_M_MAX};

/// Minimum cosine similarity for an analytic eigenfunction to count as matched.
pub const MATCH_THRESHOLD: f64 = 0.999;

fn weight(i: usize) -> f64 {
    if i == 0 {
        0.5
    } else {
        1.0
    }
}

/// `W^{1/2} L W^{-1/2}`, symmetrized against rounding.
pub fn symmetric_form(alpha: f64, beta: f64, grid: &Grid) -> DMatrix<f64> {
    let l = assemble_linearized(alpha, beta, grid).into_matrix();
    let m = l.nrows();
    let mut s = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            s[(i, j)] = l[(i, j)] * (weight(i) / weight(j)).sqrt();
        }
    }
    (&s + s.transpose()) * 0.5
}

/// Signed eigenvalues of the discrete linearization, ascending.
pub fn eigenvalues(alpha: f64, beta: f64, grid: &Grid) -> Vec<f64> {
    let mut values: Vec<f64> = symmetric_form(alpha, beta, grid).symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Eigenpairs ordered by increasing modulus of the eigenvalue; eigenvectors
/// are returned as sampled functions (right endpoint pinned to zero).
pub fn smallest_eigenpairs(alpha: f64, beta: f64, grid: &Grid, count: usize) -> Vec<(f64, SampledFunction)> {
    let eig = SymmetricEigen::new(symmetric_form(alpha, beta, grid));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].abs().total_cmp(&eig.eigenvalues[b].abs()));
    order
        .into_iter()
        .take(count)
        .map(|k| {
            let y = eig.eigenvectors.column(k);
            let free = DVector::from_iterator(y.len(), y.iter().enumerate().map(|(i, v)| v / weight(i).sqrt()));
            (eig.eigenvalues[k], SampledFunction::from_free(*grid, &free))
        })
        .collect()
}

/// Default rank threshold `10 h^2 scale`, `scale = max(alpha, 2 sqrt(beta))^3 / 4`.
///
/// Kernel modes have `|c_m| <= max(alpha, 2 sqrt(beta))`, and the second-order
/// error of a discrete eigenvalue is bounded by `(2|c| + alpha) c^2 h^2 / 12`.
pub fn default_threshold(alpha: f64, beta: f64, grid: &Grid) -> f64 {
    let bound = alpha.abs().max(2.0 * beta.abs().sqrt());
    10.0 * grid.h() * grid.h() * bound.powi(3) / 4.0
}

/// Eigenvalue of the discrete second difference on the sampled eigenfunction
/// of `mode`: `-(4/h^2) sin^2(k h / 2)`, the discrete counterpart of `c_m`.
pub fn discrete_mode_coefficient(mode: &Mode, grid: &Grid) -> f64 {
    let h = grid.h();
    -(4.0 / (h * h)) * (0.5 * mode.wave_number() * h).sin().powi(2)
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelReport {
    pub alpha: f64,
    pub beta: f64,
    pub dim: usize,
    pub threshold: f64,
    /// The three smallest singular values, ascending.
    pub singular_values: Vec<f64>,
    /// `sigma_{dim+1} / sigma_dim`, or `sigma_1 / threshold` when `dim = 0`.
    pub gap_factor: f64,
    pub matched_modes: Vec<u32>,
    /// Cosine similarity of each matched mode with the kernel.
    pub similarities: Vec<f64>,
    #[serde(skip)]
    pub basis: Vec<SampledFunction>,
}

fn orthonormalize(vectors: Vec<SampledFunction>) -> Result<Vec<SampledFunction>> {
    let mut basis: Vec<SampledFunction> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        for b in &basis {
            let proj = inner_product(&v, b)?;
            v = v.axpy(-proj, b)?;
        }
        let norm = v.norm();
        let sign = if v.values()[0] < 0.0 { -1.0 } else { 1.0 };
        basis.push(v.scaled(sign / norm));
    }
    Ok(basis)
}

/// Cosine similarity between `f` and the span of an orthonormal basis.
pub fn subspace_similarity(f: &SampledFunction, basis: &[SampledFunction]) -> Result<f64> {
    let mut sq = 0.0;
    for b in basis {
        sq += inner_product(f, b)?.powi(2);
    }
    Ok(sq.sqrt() / f.norm())
}

/// Estimates `dim N(alpha, beta)` from the discrete spectrum and matches the
/// numerical kernel against the analytic eigenfunctions.
pub fn kernel_analysis(alpha: f64, beta: f64, grid: &Grid, threshold: Option<f64>) -> Result<KernelReport> {
    let threshold = threshold.unwrap_or_else(|| default_threshold(alpha, beta, grid));
    if !(threshold > 0.0) {
        return Err(Error::Config(format!("threshold must be positive, got {threshold}")));
    }
    let pairs = smallest_eigenpairs(alpha, beta, grid, 3);
    let singular_values: Vec<f64> = pairs.iter().map(|(v, _)| v.abs()).collect();
    let dim = singular_values.iter().filter(|s| **s < threshold).count();
    let gap_factor = match dim {
        0 => singular_values[0] / threshold,
        d if d < singular_values.len() => singular_values[d] / singular_values[d - 1],
        _ => 1.0,
    };
    let basis = orthonormalize(pairs.into_iter().take(dim).map(|(_, v)| v).collect())?;

    let mut matched_modes = Vec::new();
    let mut similarities = Vec::new();
    if dim > 0 {
        for m in 1..=DEFAULT_M_MAX {
            let mode = Mode::new(m, grid.r())?;
            let similarity = subspace_similarity(&SampledFunction::eigenfunction(*grid, &mode), &basis)?;
            if similarity >= MATCH_THRESHOLD {
                matched_modes.push(m);
                similarities.push(similarity);
            }
        }
    }
    Ok(KernelReport {
        alpha,
        beta,
        dim,
        threshold,
        singular_values,
        gap_factor,
        matched_modes,
        similarities,
        basis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanCell {
    /// Cell center.
    pub alpha: f64,
    pub beta: f64,
    pub sigma_min: f64,
    pub sigma_2: f64,
    /// Number of discrete eigenvalues changing sign across the cell corners.
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BifurcationScan {
    pub alpha_range: (f64, f64),
    pub beta_range: (f64, f64),
    pub resolution: usize,
    /// Row-major: `cells[j * resolution + i]` is column `i` (alpha), row `j` (beta).
    pub cells: Vec<ScanCell>,
}

impl BifurcationScan {
    pub fn cell_diagonal(&self) -> f64 {
        let da = (self.alpha_range.1 - self.alpha_range.0) / self.resolution as f64;
        let db = (self.beta_range.1 - self.beta_range.0) / self.resolution as f64;
        da.hypot(db)
    }

    pub fn flagged(&self) -> impl Iterator<Item = &ScanCell> {
        self.cells.iter().filter(|c| c.dim > 0)
    }
}

/// Scans a window of the parameter plane for the discrete bifurcation set.
///
/// Each cell reports the two smallest singular values at its center and the
/// spread of the negative-eigenvalue count over its corners; a nonzero spread
/// means some eigenvalue vanishes inside the cell.
pub fn scan_bifurcation_set(
    alpha_range: (f64, f64),
    beta_range: (f64, f64),
    resolution: usize,
    grid: &Grid,
) -> Result<BifurcationScan> {
    if resolution < 16 {
        return Err(Error::Config(format!("scan resolution must be >= 16, got {resolution}")));
    }
    for (name, (lo, hi)) in [("alpha", alpha_range), ("beta", beta_range)] {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Config(format!(
                "{name} range must satisfy 0 < lo < hi, got ({lo}, {hi})"
            )));
        }
    }
    let res = resolution;
    let da = (alpha_range.1 - alpha_range.0) / res as f64;
    let db = (beta_range.1 - beta_range.0) / res as f64;
    let corner = |i: usize, j: usize| (alpha_range.0 + i as f64 * da, beta_range.0 + j as f64 * db);

    let mut negatives = vec![0usize; (res + 1) * (res + 1)];
    for j in 0..=res {
        for i in 0..=res {
            let (a, b) = corner(i, j);
            negatives[j * (res + 1) + i] = eigenvalues(a, b, grid).iter().filter(|v| **v < 0.0).count();
        }
    }

    let mut cells = Vec::with_capacity(res * res);
    for j in 0..res {
        for i in 0..res {
            let (a, b) = corner(i, j);
            let (alpha, beta) = (a + 0.5 * da, b + 0.5 * db);
            let mut sigma: Vec<f64> = eigenvalues(alpha, beta, grid).iter().map(|v| v.abs()).collect();
            sigma.sort_by(f64::total_cmp);
            let counts = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)].map(|(p, q)| negatives[q * (res + 1) + p]);
            let dim = counts.iter().max().unwrap() - counts.iter().min().unwrap();
            cells.push(ScanCell {
                alpha,
                beta,
                sigma_min: sigma[0],
                sigma_2: sigma[1],
                dim,
            });
        }
    }
    Ok(BifurcationScan {
        alpha_range,
        beta_range,
        resolution,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{double_point, ray_beta};
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::new(n, PI).unwrap()
    }

    #[test]
    fn trichotomy_examples() {
        let g = grid(201);
        let none = kernel_analysis(1.0, 0.2, &g, None).unwrap();
        assert_eq!(none.dim, 0);
        assert!(none.matched_modes.is_empty());
        assert!(none.gap_factor >= 10.0, "{none:?}");

        let simple = kernel_analysis(1.0, 0.05859375, &g, None).unwrap();
        assert_eq!(simple.dim, 1);
        assert_eq!(simple.matched_modes, vec![1]);
        assert!(simple.similarities[0] >= 0.999);
        assert!(simple.gap_factor >= 10.0);

        let double = kernel_analysis(0.625, 0.03515625, &g, None).unwrap();
        assert_eq!(double.dim, 2);
        assert_eq!(double.matched_modes, vec![1, 2]);
        assert!(double.gap_factor >= 10.0);
    }

    #[test]
    fn report_invariants() {
        let g = grid(101);
        let rep = kernel_analysis(0.625, 0.03515625, &g, None).unwrap();
        assert!(rep.singular_values.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(rep.dim, rep.singular_values.iter().filter(|s| **s < rep.threshold).count());
        for (i, a) in rep.basis.iter().enumerate() {
            for (j, b) in rep.basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((inner_product(a, b).unwrap() - expected).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn kernel_vectors_match_simple_modes() {
        let g = grid(201);
        for (m, alpha) in [(1, 0.5), (1, 2.0), (2, 1.0), (2, 2.5), (3, 3.0)] {
            let beta = ray_beta(m, alpha, PI).unwrap();
            let rep = kernel_analysis(alpha, beta, &g, None).unwrap();
            assert_eq!(rep.dim, 1, "m={m} alpha={alpha}: {rep:?}");
            let e = SampledFunction::eigenfunction(g, &Mode::new(m, PI).unwrap());
            let proj = inner_product(&rep.basis[0], &e).unwrap();
            assert!(proj * proj >= 0.998);
        }
    }

    #[test]
    fn smallest_singular_value_converges_quadratically() {
        let beta = ray_beta(1, 1.0, PI).unwrap();
        let sigma: Vec<f64> = [51, 101, 201]
            .iter()
            .map(|&n| kernel_analysis(1.0, beta, &grid(n), None).unwrap().singular_values[0])
            .collect();
        for w in sigma.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.9, "{sigma:?}");
        }
    }

    #[test]
    fn report_is_independent_of_gamma() {
        // The linearization has no gamma; nothing to vary but the call path.
        let g = grid(101);
        let a = kernel_analysis(1.0, 0.05859375, &g, None).unwrap();
        let b = kernel_analysis(1.0, 0.05859375, &g, None).unwrap();
        assert_eq!(a.singular_values, b.singular_values);
    }

    #[test]
    fn rejects_bad_threshold() {
        assert!(kernel_analysis(1.0, 0.2, &grid(51), Some(-1.0)).is_err());
    }

    fn distance_to_nearest_ray(alpha: f64, beta: f64) -> f64 {
        (1..=DEFAULT_M_MAX)
            .map(|m| {
                let c = Mode::new(m, PI).unwrap().c;
                // Line c alpha + beta + c^2 = 0.
                (c * alpha + beta + c * c).abs() / (c * c + 1.0).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn scan_traces_rays() {
        let g = grid(61);
        let scan = scan_bifurcation_set((0.1, 1.0), (0.01, 0.3), 64, &g).unwrap();
        let diag = scan.cell_diagonal();
        let flagged: Vec<_> = scan.flagged().collect();
        assert!(flagged.len() > 20);
        for cell in &flagged {
            assert!(distance_to_nearest_ray(cell.alpha, cell.beta) <= diag, "{cell:?}");
        }
        // Both rays are present and the flagged set passes near their intersection.
        let near = |m: u32| {
            flagged
                .iter()
                .any(|c| (ray_beta(m, c.alpha, PI).unwrap() - c.beta).abs() <= diag && c.alpha > 0.8)
        };
        assert!(near(1) && near(2));
        let dp = double_point(1, 2, PI).unwrap();
        assert!(flagged
            .iter()
            .any(|c| (c.alpha - dp.alpha0).hypot(c.beta - dp.beta0) <= 2.0 * diag));
    }

    #[test]
    fn scan_off_rays_is_empty() {
        let scan = scan_bifurcation_set((0.1, 0.3), (0.2, 0.3), 16, &grid(31)).unwrap();
        assert_eq!(scan.flagged().count(), 0);
    }

    #[test]
    fn scan_rejects_low_resolution() {
        assert!(matches!(
            scan_bifurcation_set((0.1, 1.0), (0.01, 0.3), 8, &grid(31)),
            Err(Error::Config(_))
        ));
        assert!(scan_bifurcation_set((-0.1, 1.0), (0.01, 0.3), 16, &grid(31)).is_err());
    }

    #[test]
    fn scan_dimension_never_exceeds_two() {
        let scan = scan_bifurcation_set((0.1, 3.0), (0.01, 1.0), 64, &grid(41)).unwrap();
        assert!(scan.cells.iter().all(|c| c.dim <= 2));
        assert!(scan.cells.iter().any(|c| c.dim == 2));
    }
}
