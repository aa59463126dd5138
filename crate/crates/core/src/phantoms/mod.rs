//! Analytic test objects with exactly known singularities, and weight fields.

mod wavefront;
mod weights;

pub use wavefront::{analytic_wavefront, analytic_wavefront_aligned, AnalyticWavefront, SampleKind, VertexCone, WfSample};
pub use weights::WeightField;

use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use crate::geometry::{check_dim, Direction, VecN};
use crate::transform::{Grid, Image};
use crate::{Error, Result};

/// Small dense matrix for covariances and rotations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat {
    pub dim: usize,
    pub m: [[f64; 3]; 3],
}

impl Mat {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        let mut m = [[0.0; 3]; 3];
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::InvalidPhantom("matrix must be square".into()));
            }
            m[i][..dim].copy_from_slice(r);
        }
        Ok(Mat { dim, m })
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate().take(dim) {
            row[i] = 1.0;
        }
        Mat { dim, m }
    }

    /// Rotation by `angle` in the (x₁, x₂) plane; about the x₃ axis in 3-D.
    pub fn rotation(dim: usize, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let mut r = Mat::identity(dim);
        r.m[0][0] = c;
        r.m[0][1] = -s;
        r.m[1][0] = s;
        r.m[1][1] = c;
        r
    }

    pub fn apply(&self, v: &VecN) -> VecN {
        let mut c = [0.0; 3];
        for (i, ci) in c.iter_mut().enumerate().take(self.dim) {
            *ci = (0..self.dim).map(|j| self.m[i][j] * v[j]).sum();
        }
        VecN::new(&c[..self.dim]).expect("valid dimension")
    }

    pub fn transpose(&self) -> Self {
        let mut t = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.m[i][j] = self.m[j][i];
            }
        }
        t
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        let mut r = Mat { dim: self.dim, m: [[0.0; 3]; 3] };
        for i in 0..self.dim {
            for j in 0..self.dim {
                r.m[i][j] = (0..self.dim).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        r
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        if self.dim == 2 {
            m[0][0] * m[1][1] - m[0][1] * m[1][0]
        } else {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
    }

    pub fn inverse(&self) -> Option<Mat> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let m = &self.m;
        let mut r = Mat { dim: self.dim, m: [[0.0; 3]; 3] };
        if self.dim == 2 {
            r.m[0][0] = m[1][1] / d;
            r.m[0][1] = -m[0][1] / d;
            r.m[1][0] = -m[1][0] / d;
            r.m[1][1] = m[0][0] / d;
        } else {
            for i in 0..3 {
                for j in 0..3 {
                    let (a, b) = ((j + 1) % 3, (j + 2) % 3);
                    let (c, e) = ((i + 1) % 3, (i + 2) % 3);
                    r.m[i][j] = (m[a][c] * m[b][e] - m[a][e] * m[b][c]) / d;
                }
            }
        }
        Some(r)
    }

    pub fn quad(&self, v: &VecN) -> f64 {
        v.dot(&self.apply(v))
    }

    fn is_positive_definite(&self) -> bool {
        let sym = (0..self.dim).all(|i| (0..self.dim).all(|j| (self.m[i][j] - self.m[j][i]).abs() <= 1e-12 * (1.0 + self.m[i][j].abs())));
        let m = &self.m;
        let d1 = m[0][0];
        let d2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        sym && d1 > 0.0 && d2 > 0.0 && (self.dim == 2 || self.det() > 0.0)
    }
}

/// A primitive of a phantom. Densities are real.
#[derive(Clone, Debug, PartialEq)]
pub enum Primitive {
    /// Ellipse (2-D) or ellipsoid (3-D) with semi-axes along the rotated
    /// coordinate axes; rotation is in the (x₁, x₂) plane.
    Ellipse { center: VecN, axes: VecN, rotation: f64, density: f64 },
    /// Convex polygon with counter-clockwise vertices (2-D only).
    Polygon { vertices: Vec<VecN>, density: f64 },
    /// amplitude · exp(−½ (x−c)ᵀ Σ⁻¹ (x−c)).
    Gaussian { center: VecN, covariance: Mat, amplitude: f64 },
}

impl Primitive {
    pub fn ellipse(center: VecN, axes: VecN, rotation: f64, density: f64) -> Result<Self> {
        if center.dim() != axes.dim() {
            return Err(Error::DimensionMismatch { expected: center.dim(), found: axes.dim() });
        }
        if axes.as_slice().iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidPhantom(format!("semi-axes must be positive, got {axes:?}")));
        }
        Ok(Primitive::Ellipse { center, axes, rotation, density })
    }

    pub fn disk(center: VecN, radius: f64, density: f64) -> Result<Self> {
        let axes = VecN::new(&vec![radius; center.dim()])?;
        Self::ellipse(center, axes, 0.0, density)
    }

    /// Vertices are reordered counter-clockwise when given clockwise.
    pub fn polygon(vertices: Vec<VecN>, density: f64) -> Result<Self> {
        if vertices.len() < 3 || vertices.iter().any(|v| v.dim() != 2) {
            return Err(Error::InvalidPhantom("a polygon needs at least 3 planar vertices".into()));
        }
        let n = vertices.len();
        let area: f64 = (0..n)
            .map(|i| {
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
            / 2.0;
        let mut v = vertices;
        if area < 0.0 {
            v.reverse();
        }
        let scale = v.iter().map(|p| p.norm()).fold(1e-300, f64::max);
        for i in 0..n {
            let (a, b, c) = (v[i], v[(i + 1) % n], v[(i + 2) % n]);
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if cross <= 1e-12 * scale * scale {
                return Err(Error::InvalidPhantom("polygon must be strictly convex and nondegenerate".into()));
            }
        }
        Ok(Primitive::Polygon { vertices: v, density })
    }

    pub fn gaussian(center: VecN, covariance: Mat, amplitude: f64) -> Result<Self> {
        if covariance.dim != center.dim() || !covariance.is_positive_definite() {
            return Err(Error::InvalidPhantom("covariance must be symmetric positive definite".into()));
        }
        Ok(Primitive::Gaussian { center, covariance, amplitude })
    }

    pub fn dim(&self) -> usize {
        match self {
            Primitive::Ellipse { center, .. } | Primitive::Gaussian { center, .. } => center.dim(),
            Primitive::Polygon { .. } => 2,
        }
    }

    pub fn is_singular(&self) -> bool {
        !matches!(self, Primitive::Gaussian { .. })
    }

    /// Matrix M = R diag(a²) Rᵀ whose inverse defines the ellipse quadric.
    pub(crate) fn ellipse_shape(center: &VecN, axes: &VecN, rotation: f64) -> (Mat, Mat) {
        let r = Mat::rotation(center.dim(), rotation);
        let mut d = Mat::identity(center.dim());
        for i in 0..center.dim() {
            d.m[i][i] = axes[i] * axes[i];
        }
        let m = r.mul(&d).mul(&r.transpose());
        let inv = m.inverse().expect("positive semi-axes");
        (m, inv)
    }

    pub fn value_at(&self, x: &VecN) -> f64 {
        match self {
            Primitive::Ellipse { center, axes, rotation, density } => {
                let u = Mat::rotation(center.dim(), -rotation).apply(&(*x - *center));
                let q: f64 = (0..u.dim()).map(|i| (u[i] / axes[i]).powi(2)).sum();
                if q <= 1.0 {
                    *density
                } else {
                    0.0
                }
            }
            Primitive::Polygon { vertices, density } => {
                let n = vertices.len();
                let inside = (0..n).all(|i| {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]) >= 0.0
                });
                if inside {
                    *density
                } else {
                    0.0
                }
            }
            Primitive::Gaussian { center, covariance, amplitude } => {
                let inv = covariance.inverse().expect("positive definite");
                amplitude * (-0.5 * inv.quad(&(*x - *center))).exp()
            }
        }
    }

    fn rotated(&self, angle: f64) -> Primitive {
        let r = Mat::rotation(self.dim(), angle);
        match self {
            Primitive::Ellipse { center, axes, rotation, density } => Primitive::Ellipse {
                center: r.apply(center),
                axes: *axes,
                rotation: rotation + angle,
                density: *density,
            },
            Primitive::Polygon { vertices, density } => Primitive::Polygon {
                vertices: vertices.iter().map(|v| r.apply(v)).collect(),
                density: *density,
            },
            Primitive::Gaussian { center, covariance, amplitude } => Primitive::Gaussian {
                center: r.apply(center),
                covariance: r.mul(covariance).mul(&r.transpose()),
                amplitude: *amplitude,
            },
        }
    }

    fn line_integral(&self, omega: &Direction, s: f64) -> Result<f64> {
        let w = omega.vector();
        match self {
            Primitive::Ellipse { center, axes, rotation, density } => {
                if center.dim() != 2 {
                    return Err(Error::Unsupported("closed-form line integrals are two-dimensional".into()));
                }
                let wl = Mat::rotation(2, -rotation).apply(&w);
                let (a, b) = (axes[0], axes[1]);
                let r2 = (a * wl[0]).powi(2) + (b * wl[1]).powi(2);
                let sp = s - center.dot(&w);
                if sp * sp >= r2 {
                    Ok(0.0)
                } else {
                    Ok(density * 2.0 * a * b * (r2 - sp * sp).sqrt() / r2)
                }
            }
            Primitive::Gaussian { center, covariance, amplitude } => {
                if center.dim() != 2 {
                    return Err(Error::Unsupported("closed-form line integrals are two-dimensional".into()));
                }
                let var = covariance.quad(&w);
                let sp = s - center.dot(&w);
                let total = amplitude * std::f64::consts::TAU * covariance.det().sqrt();
                Ok(total / (std::f64::consts::TAU * var).sqrt() * (-sp * sp / (2.0 * var)).exp())
            }
            Primitive::Polygon { .. } => {
                Err(Error::Unsupported("no closed-form line integral oracle for polygons".into()))
            }
        }
    }
}

/// A sum of primitives in ℝ² or ℝ³.
#[derive(Clone, Debug, PartialEq)]
pub struct Phantom {
    dim: usize,
    primitives: Vec<Primitive>,
}

impl Phantom {
    pub fn new(dim: usize, primitives: Vec<Primitive>) -> Result<Self> {
        check_dim(dim)?;
        if let Some(p) = primitives.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
        Ok(Phantom { dim, primitives })
    }

    /// Disk of radius `r` and density 1 centered at the origin.
    pub fn disk(r: f64) -> Self {
        Phantom { dim: 2, primitives: vec![Primitive::disk(VecN::xy(0.0, 0.0), r, 1.0).expect("positive radius")] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn value_at(&self, x: &VecN) -> f64 {
        self.primitives.iter().map(|p| p.value_at(x)).sum()
    }

    /// The phantom rotated by `angle` about the origin in the (x₁, x₂) plane.
    pub fn rotated(&self, angle: f64) -> Phantom {
        Phantom { dim: self.dim, primitives: self.primitives.iter().map(|p| p.rotated(angle)).collect() }
    }

    /// Parse the TOML phantom format (see the repository README).
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: PhantomFile = toml::from_str(text).map_err(|e| Error::InvalidPhantom(e.to_string()))?;
        file.build()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| Error::InvalidPhantom(format!("{}: {e}", path.display())))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PhantomFile {
    dim: usize,
    #[serde(default)]
    ellipse: Vec<EllipseEntry>,
    #[serde(default)]
    polygon: Vec<PolygonEntry>,
    #[serde(default)]
    gaussian: Vec<GaussianEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EllipseEntry {
    center: Vec<f64>,
    axes: Vec<f64>,
    #[serde(default)]
    rotation: f64,
    #[serde(default = "unit")]
    density: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolygonEntry {
    vertices: Vec<[f64; 2]>,
    #[serde(default = "unit")]
    density: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianEntry {
    center: Vec<f64>,
    covariance: Vec<Vec<f64>>,
    #[serde(default = "unit")]
    amplitude: f64,
}

fn unit() -> f64 {
    1.0
}

impl PhantomFile {
    fn build(self) -> Result<Phantom> {
        let mut prims = Vec::new();
        for e in self.ellipse {
            prims.push(Primitive::ellipse(VecN::new(&e.center)?, VecN::new(&e.axes)?, e.rotation, e.density)?);
        }
        for p in self.polygon {
            prims.push(Primitive::polygon(p.vertices.iter().map(|v| VecN::xy(v[0], v[1])).collect(), p.density)?);
        }
        for g in self.gaussian {
            prims.push(Primitive::gaussian(VecN::new(&g.center)?, Mat::from_rows(&g.covariance)?, g.amplitude)?);
        }
        Phantom::new(self.dim, prims)
    }
}

/// Sample a phantom at grid points. With `supersample` the indicator
/// primitives are averaged over 2 sub-samples per axis (4 in 2-D, 8 in 3-D);
/// Gaussians are always evaluated exactly at the sample point.
pub fn rasterize(phantom: &Phantom, grid: &Grid, supersample: bool) -> Result<Image<f64>> {
    if phantom.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), found: phantom.dim() });
    }
    let dim = grid.dim();
    let offsets: Vec<VecN> = if supersample {
        (0..1usize << dim)
            .map(|c| {
                let mut v = [0.0; 3];
                for (a, va) in v.iter_mut().enumerate().take(dim) {
                    let sign = if (c >> a) & 1 == 1 { 0.25 } else { -0.25 };
                    *va = sign * grid.spacing()[a];
                }
                VecN::new(&v[..dim]).unwrap()
            })
            .collect()
    } else {
        vec![VecN::zeros(dim)]
    };
    let weight = 1.0 / offsets.len() as f64;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let x = grid.point(k);
            phantom
                .primitives
                .iter()
                .map(|p| match p {
                    Primitive::Gaussian { .. } => p.value_at(&x),
                    _ => offsets.iter().map(|o| p.value_at(&(x + *o))).sum::<f64>() * weight,
                })
                .sum()
        })
        .collect();
    Image::from_values(grid, values)
}

/// Closed-form ∫_{x·ω = s} f dx for a planar phantom of ellipses and Gaussians.
pub fn exact_sinogram_constant_weight(phantom: &Phantom, omega: &Direction, s: f64) -> Result<f64> {
    if phantom.dim() != 2 || omega.dim() != 2 {
        return Err(Error::Unsupported("closed-form line integrals are two-dimensional".into()));
    }
    phantom.primitives.iter().map(|p| p.line_integral(omega, s)).sum()
}
