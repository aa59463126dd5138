//! Points, directions, hyperplanes, angular sets and covectors in two and
//! three dimensions.

mod angular;
mod covector;

pub use angular::{fibonacci_sphere, AngularSet, AngularSpec, Arc, BoundaryConormals, Cap, Membership};
pub use covector::{Covector, DataCovector};

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use crate::{Error, Result};

/// Tolerance for unit-norm checks and exact-representation queries.
pub const UNIT_TOL: f64 = 1e-12;

/// A vector in ℝ² or ℝ³ stored inline.
#[derive(Clone, Copy, PartialEq)]
pub struct VecN {
    dim: usize,
    c: [f64; 3],
}

impl fmt::Debug for VecN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl VecN {
    pub fn new(coords: &[f64]) -> Result<Self> {
        check_dim(coords.len())?;
        let mut c = [0.0; 3];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Self { dim: coords.len(), c })
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Self { dim: 2, c: [x, y, 0.0] }
    }

    pub fn xyz(x: f64, y: f64, z: f64) -> Self {
        Self { dim: 3, c: [x, y, z] }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "dimension must be 2 or 3");
        Self { dim, c: [0.0; 3] }
    }

    /// Unit vector along axis `k`.
    pub fn axis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.c[k] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.c[..self.dim]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.as_slice().to_vec()
    }

    pub fn dot(&self, o: &VecN) -> f64 {
        debug_assert_eq!(self.dim, o.dim);
        self.c[0] * o.c[0] + self.c[1] * o.c[1] + self.c[2] * o.c[2]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn cross(&self, o: &VecN) -> VecN {
        let (a, b) = (self.c, o.c);
        VecN::xyz(
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        )
    }

    pub fn normalized(&self) -> Result<VecN> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(*self * (1.0 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }

    pub fn distance(&self, o: &VecN) -> f64 {
        (*self - *o).norm()
    }
}

impl Index<usize> for VecN {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl Add for VecN {
    type Output = VecN;
    fn add(self, o: VecN) -> VecN {
        debug_assert_eq!(self.dim, o.dim);
        VecN { dim: self.dim, c: [self.c[0] + o.c[0], self.c[1] + o.c[1], self.c[2] + o.c[2]] }
    }
}

impl Sub for VecN {
    type Output = VecN;
    fn sub(self, o: VecN) -> VecN {
        debug_assert_eq!(self.dim, o.dim);
        VecN { dim: self.dim, c: [self.c[0] - o.c[0], self.c[1] - o.c[1], self.c[2] - o.c[2]] }
    }
}

impl Neg for VecN {
    type Output = VecN;
    fn neg(self) -> VecN {
        VecN { dim: self.dim, c: [-self.c[0], -self.c[1], -self.c[2]] }
    }
}

impl Mul<f64> for VecN {
    type Output = VecN;
    fn mul(self, k: f64) -> VecN {
        VecN { dim: self.dim, c: [self.c[0] * k, self.c[1] * k, self.c[2] * k] }
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let a = phi.rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// A unit vector on S¹ or S². In two dimensions the polar angle in `[0, 2π)`
/// is carried alongside the coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    v: VecN,
    angle: Option<f64>,
}

impl Direction {
    /// θ(φ) = (cos φ, sin φ).
    pub fn from_angle(phi: f64) -> Self {
        let a = wrap_angle(phi);
        Self { v: VecN::xy(a.cos(), a.sin()), angle: Some(a) }
    }

    /// Normalise a nonzero vector.
    pub fn new(v: VecN) -> Result<Self> {
        let u = v.normalized()?;
        Ok(Self::from_normalized(u))
    }

    /// Accept a vector that is already unit length within [`UNIT_TOL`].
    pub fn from_unit(v: VecN) -> Result<Self> {
        if (v.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::ZeroVector);
        }
        Ok(Self::from_normalized(v))
    }

    fn from_normalized(u: VecN) -> Self {
        let angle = (u.dim() == 2).then(|| wrap_angle(u[1].atan2(u[0])));
        Self { v: u, angle }
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }

    pub fn vector(&self) -> VecN {
        self.v
    }

    /// Polar angle in `[0, 2π)` for two-dimensional directions.
    pub fn angle(&self) -> Option<f64> {
        self.angle
    }

    /// The antipodal direction −ω. The vector is negated exactly.
    pub fn opposite(&self) -> Self {
        Self { v: -self.v, angle: self.angle.map(|a| wrap_angle(a + std::f64::consts::PI)) }
    }

    /// θ⊥ = (−sin φ, cos φ), the positive generator of T_ω S¹.
    pub fn perp(&self) -> VecN {
        assert_eq!(self.dim(), 2, "perp is defined for planar directions");
        VecN::xy(-self.v[1], self.v[0])
    }

    /// Geodesic distance on the sphere, in radians.
    pub fn angle_to(&self, o: &Direction) -> f64 {
        angle_between(&self.v, &o.v)
    }

    /// Orthonormal basis of H(ω, 0). In two dimensions this is `[θ⊥]`.
    pub fn hyperplane_basis(&self) -> Vec<VecN> {
        if self.dim() == 2 {
            return vec![self.perp()];
        }
        let w = self.v;
        let k = (0..3)
            .min_by(|&a, &b| w[a].abs().total_cmp(&w[b].abs()))
            .unwrap_or(0);
        let a = VecN::axis(3, k);
        let e1 = (a - w * a.dot(&w)).normalized().expect("axis not parallel to ω");
        let e2 = w.cross(&e1);
        vec![e1, e2]
    }
}

/// Angle between two vectors computed with `atan2`, accurate near 0 and π.
pub fn angle_between(a: &VecN, b: &VecN) -> f64 {
    let cos = a.dot(b);
    let sin = if a.dim() == 2 {
        (a[0] * b[1] - a[1] * b[0]).abs()
    } else {
        a.cross(b).norm()
    };
    sin.atan2(cos)
}

/// The hyperplane H(ω, s) = {x : x·ω = s}. H(ω, s) and H(−ω, −s) are the same
/// point set but are kept distinct because weights may differ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperplane {
    pub omega: Direction,
    pub s: f64,
}

impl Hyperplane {
    pub fn new(omega: Direction, s: f64) -> Self {
        Self { omega, s }
    }

    pub fn contains(&self, x: &VecN, tol: f64) -> bool {
        (x.dot(&self.omega.vector()) - self.s).abs() <= tol
    }

    /// The same point set parameterised by (−ω, −s).
    pub fn reversed(&self) -> Self {
        Self { omega: self.omega.opposite(), s: -self.s }
    }
}

/// π_ω(x) = x − (x·ω)ω.
pub fn project_onto_hyperplane(x: &VecN, omega: &Direction) -> VecN {
    let w = omega.vector();
    *x - w * x.dot(&w)
}
