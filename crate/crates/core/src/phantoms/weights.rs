use serde::{Deserialize, Serialize};

use crate::geometry::{Direction, VecN};
use crate::{Error, Result};

/// A weight w(ω, x) for the forward map (μ) or the backprojection (ν).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightField {
    /// w ≡ value.
    Constant { value: f64 },
    /// w = exp(λ ω·x), the usual attenuation-style weight.
    Exponential { lambda: f64 },
    /// w = (c0 + ℓ·x + q‖x‖²)(1 + m ω₁).
    Polynomial {
        c0: f64,
        #[serde(default)]
        linear: Vec<f64>,
        #[serde(default)]
        quadratic: f64,
        #[serde(default)]
        modulation: f64,
    },
    /// w = 1 / inner.
    Reciprocal { of: Box<WeightField> },
}

impl Default for WeightField {
    fn default() -> Self {
        WeightField::one()
    }
}

impl WeightField {
    pub fn one() -> Self {
        WeightField::Constant { value: 1.0 }
    }

    pub fn exponential(lambda: f64) -> Self {
        WeightField::Exponential { lambda }
    }

    pub fn reciprocal(of: WeightField) -> Self {
        WeightField::Reciprocal { of: Box::new(of) }
    }

    pub fn eval(&self, omega: &Direction, x: &VecN) -> f64 {
        match self {
            WeightField::Constant { value } => *value,
            WeightField::Exponential { lambda } => (lambda * omega.vector().dot(x)).exp(),
            WeightField::Polynomial { c0, linear, quadratic, modulation } => {
                let lin: f64 = linear.iter().zip(x.as_slice()).map(|(a, b)| a * b).sum();
                (c0 + lin + quadratic * x.norm_sqr()) * (1.0 + modulation * omega.vector()[0])
            }
            WeightField::Reciprocal { of } => 1.0 / of.eval(omega, x),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            WeightField::Constant { .. } => "constant",
            WeightField::Exponential { .. } => "exponential",
            WeightField::Polynomial { .. } => "polynomial",
            WeightField::Reciprocal { .. } => "reciprocal",
        }
    }

    /// The value of a constant field.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            WeightField::Constant { value } => Some(*value),
            WeightField::Reciprocal { of } => of.as_constant().map(|v| 1.0 / v),
            _ => None,
        }
    }

    /// Minimum over a 64-point-per-axis grid on `[-radius, radius]^n`
    /// (16 per axis in three dimensions) times 64 directions. Errors if any
    /// sample is not strictly positive and finite.
    pub fn check_positive(&self, dim: usize, radius: f64) -> Result<f64> {
        if let Some(v) = self.as_constant() {
            return if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonPositiveWeight { value: v, direction: vec![], point: vec![] })
            };
        }
        let dirs: Vec<Direction> = match dim {
            2 => (0..64).map(|k| Direction::from_angle(std::f64::consts::TAU * k as f64 / 64.0)).collect(),
            _ => crate::geometry::fibonacci_sphere(64),
        };
        let m: usize = if dim == 2 { 64 } else { 16 };
        let coord = |i: usize| -radius + 2.0 * radius * i as f64 / (m - 1) as f64;
        let mut min = f64::INFINITY;
        let total = m.pow(dim as u32);
        for k in 0..total {
            let mut c = [0.0; 3];
            let mut r = k;
            for a in c.iter_mut().take(dim) {
                *a = coord(r % m);
                r /= m;
            }
            let x = VecN::new(&c[..dim])?;
            for d in &dirs {
                let v = self.eval(d, &x);
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::NonPositiveWeight {
                        value: v,
                        direction: d.vector().to_vec(),
                        point: x.to_vec(),
                    });
                }
                min = min.min(v);
            }
        }
        Ok(min)
    }
}
