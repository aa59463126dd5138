use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{AngularSet, Direction};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WindowProfile {
    /// ½(1 − cos πu): C¹ at both ends of the ramp.
    #[default]
    RaisedCosine,
    /// e(u)/(e(u) + e(1−u)) with e(t) = exp(−1/t): C^∞.
    Bump,
}

impl WindowProfile {
    /// Ramp from 0 at u ≤ 0 to 1 at u ≥ 1.
    pub fn ramp(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        match self {
            WindowProfile::RaisedCosine => 0.5 * (1.0 - (PI * u).cos()),
            WindowProfile::Bump => {
                let a = (-1.0 / u).exp();
                let b = (-1.0 / (1.0 - u)).exp();
                a / (a + b)
            }
        }
    }
}

/// Smooth angular cutoff φ supported in A that rises from 0 on bd(A) to 1 at
/// geodesic depth τ.
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffWindow {
    support: AngularSet,
    tau: f64,
    profile: WindowProfile,
    even: bool,
}

/// Build a window. τ must be positive and below half the smallest arc
/// length or cap diameter; `even` requires A = (−1)A.
pub fn make_window(a: &AngularSet, tau: f64, profile: WindowProfile, even: bool) -> Result<CutoffWindow> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidWindow(format!("transition width must be positive, got {tau}")));
    }
    let half = 0.5 * a.min_width();
    if tau >= half {
        return Err(Error::InvalidWindow(format!(
            "transition width {tau} must be below half the narrowest component ({half})"
        )));
    }
    if even && !a.is_symmetric() {
        return Err(Error::InvalidWindow("an even window needs a symmetric angular set".into()));
    }
    Ok(CutoffWindow { support: a.clone(), tau, profile, even })
}

impl CutoffWindow {
    /// φ ≡ 1 on the full sphere.
    pub fn constant(dim: usize) -> Self {
        CutoffWindow { support: AngularSet::full(dim), tau: 0.0, profile: WindowProfile::RaisedCosine, even: true }
    }

    pub fn support(&self) -> &AngularSet {
        &self.support
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn profile(&self) -> WindowProfile {
        self.profile
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    /// φ(ω) = 1 − Π_i (1 − r(d_i/τ)) with d_i the depth of ω in component i.
    pub fn eval(&self, omega: &Direction) -> f64 {
        let ramps: Vec<f64> = match &self.support {
            AngularSet::Full { .. } => return 1.0,
            AngularSet::Arcs(arcs) => {
                let phi = omega.angle().expect("planar direction");
                arcs.iter().filter_map(|a| a.depth(phi)).map(|d| self.profile.ramp(d / self.tau)).collect()
            }
            AngularSet::Caps(caps) => caps
                .iter()
                .map(|c| c.depth(omega))
                .filter(|d| *d > 0.0)
                .map(|d| self.profile.ramp(d / self.tau))
                .collect(),
        };
        match ramps.len() {
            0 => 0.0,
            1 => ramps[0],
            _ => 1.0 - ramps.iter().map(|r| 1.0 - r).product::<f64>(),
        }
    }
}
