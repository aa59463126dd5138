use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::geometry::{check_dim, VecN};
use crate::{Error, Result};

/// Scalar type stored in images and sinograms.
pub trait Sample:
    Copy
    + Default
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
    + 'static
{
    const COMPLEX: bool;
    fn from_real(v: f64) -> Self;
    fn to_complex(self) -> Complex64;
    /// Real part for `f64` storage.
    fn from_complex(c: Complex64) -> Self;
    fn abs_sqr(self) -> f64;
}

impl Sample for f64 {
    const COMPLEX: bool = false;
    fn from_real(v: f64) -> Self {
        v
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_complex(c: Complex64) -> Self {
        c.re
    }
    fn abs_sqr(self) -> f64 {
        self * self
    }
}

impl Sample for Complex64 {
    const COMPLEX: bool = true;
    fn from_real(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn from_complex(c: Complex64) -> Self {
        c
    }
    fn abs_sqr(self) -> f64 {
        self.norm_sqr()
    }
}

/// Geometry of a regular grid: sample counts, spacing and the world
/// coordinate of the first sample. Axis 0 varies fastest in memory.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    dims: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
}

impl Grid {
    pub fn new(dims: &[usize], spacing: &[f64], origin: &[f64]) -> Result<Self> {
        check_dim(dims.len())?;
        let dim = dims.len();
        if spacing.len() != dim || origin.len() != dim {
            return Err(Error::InvalidGrid("dims, spacing and origin must have equal length".into()));
        }
        if dims.iter().any(|&d| d < 8) {
            return Err(Error::InvalidGrid(format!("every axis needs at least 8 samples, got {dims:?}")));
        }
        if spacing.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing:?}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        let mut g = Grid { dim, dims: [1; 3], spacing: [1.0; 3], origin: [0.0; 3] };
        g.dims[..dim].copy_from_slice(dims);
        g.spacing[..dim].copy_from_slice(spacing);
        g.origin[..dim].copy_from_slice(origin);
        Ok(g)
    }

    /// `n` samples per axis with cell centers covering `[-half_width, half_width]^dim`.
    pub fn centered(dim: usize, n: usize, half_width: f64) -> Result<Self> {
        let h = 2.0 * half_width / n as f64;
        let o = -half_width + 0.5 * h;
        Grid::new(&vec![n; dim], &vec![h; dim], &vec![o; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn len(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    /// Linear index of a multi-index.
    pub fn index(&self, idx: &[usize]) -> usize {
        let mut k = 0;
        for a in (0..self.dim).rev() {
            k = k * self.dims[a] + idx[a];
        }
        k
    }

    pub fn multi_index(&self, mut k: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for a in 0..self.dim {
            out[a] = k % self.dims[a];
            k /= self.dims[a];
        }
        out
    }

    /// World coordinate of the sample with linear index `k`.
    pub fn point(&self, k: usize) -> VecN {
        let m = self.multi_index(k);
        self.point_at(&m[..self.dim])
    }

    pub fn point_at(&self, idx: &[usize]) -> VecN {
        let mut c = [0.0; 3];
        for a in 0..self.dim {
            c[a] = self.origin[a] + idx[a] as f64 * self.spacing[a];
        }
        VecN::new(&c[..self.dim]).expect("valid dimension")
    }

    /// Center of the sample box.
    pub fn center(&self) -> VecN {
        let mut c = [0.0; 3];
        for a in 0..self.dim {
            c[a] = self.origin[a] + 0.5 * (self.dims[a] - 1) as f64 * self.spacing[a];
        }
        VecN::new(&c[..self.dim]).expect("valid dimension")
    }

    /// Box enclosing every point where interpolation can be nonzero: the
    /// sample box grown by one spacing on each side.
    pub fn support_box(&self) -> (VecN, VecN) {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for a in 0..self.dim {
            lo[a] = self.origin[a] - self.spacing[a];
            hi[a] = self.origin[a] + self.dims[a] as f64 * self.spacing[a];
        }
        (VecN::new(&lo[..self.dim]).unwrap(), VecN::new(&hi[..self.dim]).unwrap())
    }

    /// Largest distance from the world origin to a sample point.
    pub fn circumradius(&self) -> f64 {
        let mut r2 = 0.0;
        for a in 0..self.dim {
            let lo = self.origin[a];
            let hi = self.origin[a] + (self.dims[a] - 1) as f64 * self.spacing[a];
            r2 += lo.abs().max(hi.abs()).powi(2);
        }
        r2.sqrt()
    }

    /// Bilinear (2-D) or trilinear (3-D) interpolation; zero outside the samples.
    pub fn interpolate<T: Sample>(&self, values: &[T], p: &VecN) -> T {
        let mut base = [0isize; 3];
        let mut frac = [0.0; 3];
        for a in 0..self.dim {
            let u = (p[a] - self.origin[a]) / self.spacing[a];
            let f = u.floor();
            if !(f >= -1.0 && f <= self.dims[a] as f64 - 1.0) {
                return T::default();
            }
            base[a] = f as isize;
            frac[a] = u - f;
        }
        let corners = 1usize << self.dim;
        let mut acc = T::default();
        for c in 0..corners {
            let mut w = 1.0;
            let mut k = 0usize;
            let mut inside = true;
            for a in (0..self.dim).rev() {
                let bit = (c >> a) & 1;
                let i = base[a] + bit as isize;
                if i < 0 || i >= self.dims[a] as isize {
                    inside = false;
                    break;
                }
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                k = k * self.dims[a] + i as usize;
            }
            if inside && w != 0.0 {
                acc += values[k] * w;
            }
        }
        acc
    }
}

/// A sampled function on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Image<T: Sample = f64> {
    pub grid: Grid,
    pub values: Vec<T>,
}

impl<T: Sample> Image<T> {
    pub fn zeros(grid: &Grid) -> Self {
        Image { grid: grid.clone(), values: vec![T::default(); grid.len()] }
    }

    pub fn from_values(grid: &Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values for {} samples", values.len(), grid.len())));
        }
        Ok(Image { grid: grid.clone(), values })
    }

    /// Evaluate `f` at every sample point in parallel.
    pub fn from_fn(grid: &Grid, f: impl Fn(&VecN) -> T + Sync) -> Self {
        let values = (0..grid.len()).into_par_iter().map(|k| f(&grid.point(k))).collect();
        Image { grid: grid.clone(), values }
    }

    pub fn map<U: Sample>(&self, f: impl Fn(T) -> U + Sync) -> Image<U> {
        Image { grid: self.grid.clone(), values: self.values.par_iter().map(|&v| f(v)).collect() }
    }

    pub fn to_complex(&self) -> Image<Complex64> {
        self.map(|v| v.to_complex())
    }

    pub fn at(&self, idx: &[usize]) -> T {
        self.values[self.grid.index(idx)]
    }

    pub fn interpolate(&self, p: &VecN) -> T {
        self.grid.interpolate(&self.values, p)
    }

    /// Discrete L² norm including the cell volume.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.abs_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs_sqr().sqrt()).fold(0.0, f64::max)
    }

    pub fn sub(&self, o: &Image<T>) -> Result<Image<T>> {
        self.check_same_grid(o)?;
        let values = self.values.iter().zip(&o.values).map(|(&a, &b)| a - b).collect();
        Ok(Image { grid: self.grid.clone(), values })
    }

    pub fn check_same_grid(&self, o: &Image<T>) -> Result<()> {
        if self.grid != o.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, o.grid)));
        }
        Ok(())
    }
}

impl Image<Complex64> {
    pub fn real_part(&self) -> Image<f64> {
        self.map(|v| v.re)
    }

    pub fn imag_part(&self) -> Image<f64> {
        self.map(|v| v.im)
    }
}
