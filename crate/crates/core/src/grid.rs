//! Graded radial grids on `[0, R_max]` and radially weighted discrete calculus.
//!
//! A radial profile `f(r)` stands for the function `x -> f(|x|)` on the ball
//! `B_{R_max}(0)` of `R^N`, so every integral carries the weight
//! `omega_{N-1} r^{N-1}`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{binomial, powf, powi, unit_sphere_area};

/// Smallest node count accepted by [`RadialGrid::build`].
pub const MIN_NODES: usize = 16;

/// Node distribution of a radial grid.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum Grading {
    /// Equal spacing.
    Uniform,
    /// Spacing grows by `ratio` from one cell to the next, so cells are
    /// smallest at the origin.
    Geometric { ratio: f64 },
    /// `r_k = R_max (k / n)^exponent`; refines algebraically toward the origin
    /// and stays a nested family under node doubling.
    Power { exponent: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: usize,
    r_max: f64,
    nodes: Vec<f64>,
    grading: Grading,
    sphere: f64,
    // exact measure of each shell [r_k, r_{k+1}]
    cell_measure: Vec<f64>,
    // exact integral of each piecewise-linear hat function
    hat_mass: Vec<f64>,
}

impl RadialGrid {
    /// Build a grid with `n` nodes on `[0, r_max]` in dimension `dim`.
    pub fn build(dim: usize, r_max: f64, n: usize, grading: Grading) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::Grid(format!("need at least {MIN_NODES} nodes, got {n}")));
        }
        Self::build_any(dim, r_max, n, grading)
    }

    /// Same as [`RadialGrid::build`] without the minimum node guard.
    pub fn build_unguarded(dim: usize, r_max: f64, n: usize, grading: Grading) -> Result<Self> {
        if n < 2 {
            return Err(Error::Grid(format!("need at least 2 nodes, got {n}")));
        }
        Self::build_any(dim, r_max, n, grading)
    }

    fn build_any(dim: usize, r_max: f64, n: usize, grading: Grading) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::Grid(format!("r_max must be positive, got {r_max}")));
        }
        if dim < 1 {
            return Err(Error::Grid(format!("dimension must be positive, got {dim}")));
        }
        let cells = n - 1;
        let mut nodes = Vec::with_capacity(n);
        match grading {
            Grading::Uniform => {
                let h = r_max / cells as f64;
                nodes.extend((0..n).map(|k| k as f64 * h));
            }
            Grading::Geometric { ratio } => {
                if !(ratio > 0.0) || !ratio.is_finite() {
                    return Err(Error::Grid(format!("geometric ratio must be positive, got {ratio}")));
                }
                let h0 = if ratio == 1.0 {
                    r_max / cells as f64
                } else {
                    r_max * (ratio - 1.0) / (powi(ratio, cells) - 1.0)
                };
                let mut r = 0.0;
                let mut h = h0;
                nodes.push(0.0);
                for _ in 0..cells {
                    r += h;
                    nodes.push(r);
                    h *= ratio;
                }
            }
            Grading::Power { exponent } => {
                if !(exponent >= 1.0) || !exponent.is_finite() {
                    return Err(Error::Grid(format!("power grading exponent must be >= 1, got {exponent}")));
                }
                nodes.extend((0..n).map(|k| r_max * powf(k as f64 / cells as f64, exponent)));
            }
        }
        // pin the end point against accumulated round-off
        nodes[cells] = r_max;
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("nodes are not strictly increasing".into()));
        }
        Ok(Self::from_nodes_unchecked(dim, nodes, grading))
    }

    fn from_nodes_unchecked(dim: usize, nodes: Vec<f64>, grading: Grading) -> Self {
        let n = nodes.len();
        let sphere = unit_sphere_area(dim);
        let mut cell_measure = Vec::with_capacity(n - 1);
        let mut hat_mass = alloc::vec![0.0; n];
        for k in 0..n - 1 {
            let m = shell_moments(dim, nodes[k], nodes[k + 1]);
            cell_measure.push(sphere * m.full);
            hat_mass[k] += sphere * m.falling;
            hat_mass[k + 1] += sphere * m.rising;
        }
        Self { dim, r_max: nodes[n - 1], nodes, grading, sphere, cell_measure, hat_mass }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    /// `omega_{N-1}`, area of the unit sphere in `R^N`.
    pub fn sphere_area(&self) -> f64 {
        self.sphere
    }

    /// Exact `R^N` measure of shell `k`, i.e. `{r_k <= |x| <= r_{k+1}}`.
    pub fn cell_measure(&self) -> &[f64] {
        &self.cell_measure
    }

    /// Exact `R^N` integral of the piecewise-linear hat function of each node.
    pub fn hat_mass(&self) -> &[f64] {
        &self.hat_mass
    }

    pub fn spacing(&self, k: usize) -> f64 {
        self.nodes[k + 1] - self.nodes[k]
    }
}

/// Moments of `r^{N-1}` over one shell `[a, b]`:
/// `full = int r^{N-1}`, `falling = int (b-r)/(b-a) r^{N-1}`,
/// `rising = int (r-a)/(b-a) r^{N-1}`.
struct ShellMoments {
    full: f64,
    falling: f64,
    rising: f64,
}

fn shell_moments(dim: usize, a: f64, b: f64) -> ShellMoments {
    // r = a + h t expands into a sum of positive terms, which stays
    // accurate for thin shells far from the origin.
    let h = b - a;
    let e = dim - 1;
    let (mut full, mut falling, mut rising) = (0.0, 0.0, 0.0);
    for i in 0..=e {
        let term = binomial(e, i) * powi(a, e - i) * powi(h, i);
        let (fi1, fi2) = (i as f64 + 1.0, i as f64 + 2.0);
        full += term / fi1;
        rising += term / fi2;
        falling += term / (fi1 * fi2);
    }
    ShellMoments { full: h * full, falling: h * falling, rising: h * rising }
}

/// Nodal values of a radial profile on a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = alloc::vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn constant(grid: Arc<RadialGrid>, c: f64) -> Self {
        let values = alloc::vec![c; grid.len()];
        Self { grid, values }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    pub(crate) fn from_values_unchecked(grid: Arc<RadialGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_values_unchecked(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Nodewise combination with another field on the same grid.
    pub fn zip_with(&self, other: &RadialField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_values_unchecked(self.grid.clone(), values))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest `|self - other|` over the nodes.
    pub fn max_abs_diff(&self, other: &RadialField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }

    pub(crate) fn check_same_grid(&self, other: &RadialField) -> Result<()> {
        if self.values.len() != other.values.len()
            || !(Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid)
        {
            return Err(Error::ShapeMismatch { expected: self.values.len(), got: other.values.len() });
        }
        Ok(())
    }

    /// Composite trapezoid value of `omega_{N-1} int_0^{R_max} f(r) r^{N-1} dr`.
    pub fn integrate(&self) -> f64 {
        let g = &self.grid;
        let e = g.dim - 1;
        let r = g.nodes();
        let mut acc = 0.0;
        for k in 0..r.len() - 1 {
            let left = self.values[k] * powi(r[k], e);
            let right = self.values[k + 1] * powi(r[k + 1], e);
            acc += 0.5 * (r[k + 1] - r[k]) * (left + right);
        }
        g.sphere * acc
    }

    /// `L^q(B_{R_max})` norm, `q >= 1`.
    pub fn lq_norm(&self, q: f64) -> Result<f64> {
        if !(q >= 1.0) {
            return Err(Error::InvalidArgument(format!("L^q norm needs q >= 1, got {q}")));
        }
        let integral = self.map(|v| powf(v.abs(), q)).integrate();
        Ok(powf(integral, 1.0 / q))
    }

    /// `q`-th power of the `L^q` norm, without the final root.
    pub fn lq_norm_pow(&self, q: f64) -> f64 {
        self.map(|v| powf(v.abs(), q)).integrate()
    }

    /// Slope on each cell, `(f_{k+1} - f_k) / (r_{k+1} - r_k)`.
    pub fn cell_gradient(&self) -> Vec<f64> {
        let r = self.grid.nodes();
        self.values.windows(2).zip(r.windows(2)).map(|(f, r)| (f[1] - f[0]) / (r[1] - r[0])).collect()
    }

    /// `||grad f||_{L^p}` from cellwise difference quotients, each weighted by
    /// the exact measure of its shell.
    pub fn grad_seminorm(&self, p: f64) -> Result<f64> {
        if !(p > 1.0) {
            return Err(Error::InvalidArgument(format!("gradient seminorm needs p > 1, got {p}")));
        }
        let mu = self.grid.cell_measure();
        let acc: f64 = self.cell_gradient().iter().zip(mu).map(|(d, m)| m * powf(d.abs(), p)).sum();
        Ok(powf(acc, 1.0 / p))
    }

    /// Measure of `{x : f(|x|) > k}` with crossing radii found by linear
    /// interpolation between nodes.
    pub fn superlevel_measure(&self, k: f64) -> f64 {
        let g = &self.grid;
        let r = g.nodes();
        let n = g.dim;
        let mut acc = 0.0;
        for c in 0..r.len() - 1 {
            let (a, b) = (r[c], r[c + 1]);
            let (fa, fb) = (self.values[c], self.values[c + 1]);
            let (lo, hi) = match (fa > k, fb > k) {
                (true, true) => (a, b),
                (false, false) => continue,
                (true, false) => (a, a + (fa - k) / (fa - fb) * (b - a)),
                (false, true) => (b - (fb - k) / (fb - fa) * (b - a), b),
            };
            acc += powi(hi, n) - powi(lo, n);
        }
        g.sphere / n as f64 * acc
    }
}
