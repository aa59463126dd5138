use super::{project_onto_hyperplane, Direction, VecN};
use crate::{Error, Result};

/// A cotangent vector (x, ξ dx) with ξ stored as a unit codirection ω(ξ) and a
/// magnitude ‖ξ‖ > 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Covector {
    pub x: VecN,
    pub omega: Direction,
    pub magnitude: f64,
}

impl Covector {
    pub fn new(x: VecN, xi: VecN) -> Result<Self> {
        if x.dim() != xi.dim() {
            return Err(Error::DimensionMismatch { expected: x.dim(), found: xi.dim() });
        }
        let m = xi.norm();
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::ZeroCovector);
        }
        Ok(Self { x, omega: Direction::new(xi)?, magnitude: m })
    }

    pub fn from_direction(x: VecN, omega: Direction, magnitude: f64) -> Result<Self> {
        if !(magnitude > 0.0) || !magnitude.is_finite() {
            return Err(Error::ZeroCovector);
        }
        if x.dim() != omega.dim() {
            return Err(Error::DimensionMismatch { expected: x.dim(), found: omega.dim() });
        }
        Ok(Self { x, omega, magnitude })
    }

    pub fn xi(&self) -> VecN {
        self.omega.vector() * self.magnitude
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// The same base point with codirection −ω(ξ).
    pub fn negated(&self) -> Self {
        Self { x: self.x, omega: self.omega.opposite(), magnitude: self.magnitude }
    }
}

/// A covector on the data space Ξ = S^{n−1} × ℝ at (ω, s), written
/// η_ω dω + η_s ds with η_ω ∈ H(ω, 0). When η_s = α ≠ 0 it equals
/// α[−z dω + ds] with z = −η_ω / α.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DataCovector {
    pub omega: Direction,
    pub s: f64,
    pub eta_omega: VecN,
    pub eta_s: f64,
    /// Marks samples standing for a whole fiber H(ω, 0) \ {0}.
    pub full_fiber: bool,
}

impl DataCovector {
    /// `eta_omega` is projected onto H(ω, 0).
    pub fn new(omega: Direction, s: f64, eta_omega: VecN, eta_s: f64) -> Result<Self> {
        if eta_omega.dim() != omega.dim() {
            return Err(Error::DimensionMismatch { expected: omega.dim(), found: eta_omega.dim() });
        }
        let eta_omega = project_onto_hyperplane(&eta_omega, &omega);
        if eta_s == 0.0 && eta_omega.norm() == 0.0 {
            return Err(Error::ZeroCovector);
        }
        Ok(Self { omega, s, eta_omega, eta_s, full_fiber: false })
    }

    /// (ω, s, α[−z dω + ds]).
    pub fn from_alpha_z(omega: Direction, s: f64, alpha: f64, z: VecN) -> Result<Self> {
        Self::new(omega, s, z * -alpha, alpha)
    }

    /// A pure dω covector (ω, s, y dω + 0 ds).
    pub fn pure_domega(omega: Direction, s: f64, y: VecN) -> Result<Self> {
        Self::new(omega, s, y, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.eta_s
    }

    /// z = −η_ω / α, or `None` for pure dω covectors.
    pub fn z(&self) -> Option<VecN> {
        (self.eta_s != 0.0).then(|| self.eta_omega * (-1.0 / self.eta_s))
    }

    /// Scalar dφ-coefficient in two dimensions: η_ω · θ⊥.
    pub fn dphi(&self) -> f64 {
        self.eta_omega.dot(&self.omega.perp())
    }

    /// The antipodal parameterisation (−ω, −s, −η).
    pub fn antipodal(&self) -> Self {
        Self {
            omega: self.omega.opposite(),
            s: -self.s,
            eta_omega: -self.eta_omega,
            eta_s: -self.eta_s,
            full_fiber: self.full_fiber,
        }
    }

    pub fn negated(&self) -> Self {
        Self { eta_omega: -self.eta_omega, eta_s: -self.eta_s, ..*self }
    }
}
