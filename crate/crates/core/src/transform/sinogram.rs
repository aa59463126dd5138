use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::grid::{Grid, Sample};
use crate::geometry::{fibonacci_sphere, AngularSet, Direction};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DirectionKind {
    /// φ_k = 2πk/N on S¹.
    UniformCircle,
    /// Fibonacci spiral points on S².
    FibonacciSphere,
    /// Explicit list supplied by the caller.
    Custom,
}

/// Ordered directions with quadrature weights for ∫ dω.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    kind: DirectionKind,
    dirs: Vec<Direction>,
    weights: Vec<f64>,
}

impl DirectionSet {
    /// `n` equispaced angles on [0, 2π) with weight 2π/n.
    pub fn uniform_circle(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("direction count must be positive".into()));
        }
        let dirs = (0..n).map(|k| Direction::from_angle(TAU * k as f64 / n as f64)).collect();
        Ok(Self { kind: DirectionKind::UniformCircle, dirs, weights: vec![TAU / n as f64; n] })
    }

    /// `n` Fibonacci points on S² with equal weights 4π/n.
    pub fn fibonacci_sphere(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("direction count must be positive".into()));
        }
        Ok(Self {
            kind: DirectionKind::FibonacciSphere,
            dirs: fibonacci_sphere(n),
            weights: vec![4.0 * PI / n as f64; n],
        })
    }

    /// Default full set for a dimension.
    pub fn full(dim: usize, n: usize) -> Result<Self> {
        match dim {
            2 => Self::uniform_circle(n),
            3 => Self::fibonacci_sphere(n),
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    pub fn custom(dirs: Vec<Direction>, weights: Vec<f64>) -> Result<Self> {
        if dirs.is_empty() || dirs.len() != weights.len() {
            return Err(Error::InvalidGrid("custom directions need one weight each".into()));
        }
        let d = dirs[0].dim();
        if dirs.iter().any(|w| w.dim() != d) {
            return Err(Error::InvalidGrid("mixed dimensions in direction set".into()));
        }
        Ok(Self { kind: DirectionKind::Custom, dirs, weights })
    }

    pub fn kind(&self) -> DirectionKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dirs[0].dim()
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.dirs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Uniform offset samples s_j = start + j·spacing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OffsetGrid {
    pub count: usize,
    pub spacing: f64,
    pub start: f64,
}

impl OffsetGrid {
    pub fn new(count: usize, spacing: f64, start: f64) -> Result<Self> {
        if count < 2 || !(spacing > 0.0) || !spacing.is_finite() || !start.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "offset grid needs count ≥ 2 and positive spacing (count {count}, spacing {spacing})"
            )));
        }
        Ok(Self { count, spacing, start })
    }

    /// Odd number of samples symmetric about s = 0 covering `[-radius, radius]`.
    pub fn symmetric(radius: f64, spacing: f64) -> Result<Self> {
        let half = (radius / spacing).ceil().max(1.0) as usize;
        let count = 2 * half + 1;
        Self::new(count, spacing, -(half as f64) * spacing)
    }

    /// Symmetric grid with spacing equal to the finest image spacing that
    /// covers the circumscribed radius of `grid` plus two samples.
    pub fn covering(grid: &Grid) -> Result<Self> {
        let h = grid.min_spacing();
        Self::symmetric(grid.circumradius() + 2.0 * h, h)
    }

    pub fn value(&self, j: usize) -> f64 {
        self.start + j as f64 * self.spacing
    }

    pub fn end(&self) -> f64 {
        self.value(self.count - 1)
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.start <= lo && self.end() >= hi
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.value(j)).collect()
    }
}

/// Samples of g(ω, s) on a direction × offset grid. Row `k` holds direction
/// `k`, offsets vary fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Sinogram<T: Sample = f64> {
    pub directions: DirectionSet,
    pub offsets: OffsetGrid,
    pub support: AngularSet,
    pub values: Vec<T>,
}

impl<T: Sample> Sinogram<T> {
    pub fn zeros(directions: &DirectionSet, offsets: &OffsetGrid) -> Self {
        Sinogram {
            directions: directions.clone(),
            offsets: *offsets,
            support: AngularSet::full(directions.dim()),
            values: vec![T::default(); directions.len() * offsets.count],
        }
    }

    pub fn from_values(directions: &DirectionSet, offsets: &OffsetGrid, support: AngularSet, values: Vec<T>) -> Result<Self> {
        if values.len() != directions.len() * offsets.count {
            return Err(Error::GridMismatch(format!(
                "{} values for {} directions × {} offsets",
                values.len(),
                directions.len(),
                offsets.count
            )));
        }
        if support.dim() != directions.dim() {
            return Err(Error::DimensionMismatch { expected: directions.dim(), found: support.dim() });
        }
        Ok(Sinogram { directions: directions.clone(), offsets: *offsets, support, values })
    }

    pub fn dim(&self) -> usize {
        self.directions.dim()
    }

    pub fn row(&self, k: usize) -> &[T] {
        let n = self.offsets.count;
        &self.values[k * n..(k + 1) * n]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [T] {
        let n = self.offsets.count;
        &mut self.values[k * n..(k + 1) * n]
    }

    pub fn get(&self, k: usize, j: usize) -> T {
        self.values[k * self.offsets.count + j]
    }

    /// Linear interpolation in s along row `k`; `None` outside the offset range.
    pub fn interpolate_row(&self, k: usize, s: f64) -> Option<T> {
        let u = (s - self.offsets.start) / self.offsets.spacing;
        let n = self.offsets.count;
        if !(u >= 0.0) || u > (n - 1) as f64 {
            return None;
        }
        let j = (u.floor() as usize).min(n - 2);
        let f = u - j as f64;
        let r = self.row(k);
        Some(r[j] * (1.0 - f) + r[j + 1] * f)
    }

    pub fn map<U: Sample>(&self, f: impl Fn(T) -> U) -> Sinogram<U> {
        Sinogram {
            directions: self.directions.clone(),
            offsets: self.offsets,
            support: self.support.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn to_complex(&self) -> Sinogram<Complex64> {
        self.map(|v| v.to_complex())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs_sqr().sqrt()).fold(0.0, f64::max)
    }

    /// Weighted L² inner product Σ_k w_k Σ_j Δs · a·conj(b) on Ξ.
    pub fn inner(&self, o: &Sinogram<T>) -> Result<Complex64> {
        if self.directions != o.directions || self.offsets != o.offsets {
            return Err(Error::GridMismatch("sinogram grids differ".into()));
        }
        let n = self.offsets.count;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, w) in self.directions.weights().iter().enumerate() {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..n {
                row += self.get(k, j).to_complex() * o.get(k, j).to_complex().conj();
            }
            acc += row * (*w * self.offsets.spacing);
        }
        Ok(acc)
    }
}

impl Sinogram<Complex64> {
    pub fn real_part(&self) -> Sinogram<f64> {
        self.map(|v| v.re)
    }
}
