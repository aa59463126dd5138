use std::f64::consts::TAU;

use num_complex::Complex64;

use super::calculus::{compose_ct, lambdas};
use super::sets::{DataWavefrontSet, Tolerance};
use crate::filters::{symbol_on_data_covector, FilterSpec};
use crate::geometry::{AngularSet, Covector, DataCovector, Direction, Membership, VecN};
use crate::phantoms::WeightField;
use crate::transform::Cutoff;
use crate::{Error, Result};

/// The bracketed sum of the symbol of L_φ at (x, ξ):
/// φ(ω)p(λ₀)ν(ω,x)μ(ω,x) + φ(−ω)p(λ₁)ν(−ω,x)μ(−ω,x).
fn bracket(c: &Covector, mu: &WeightField, nu: &WeightField, p: &FilterSpec, phi: &Cutoff) -> Result<Complex64> {
    let (l0, l1) = lambdas(c)?;
    let (w, wm) = (c.omega, c.omega.opposite());
    let t0 = symbol_on_data_covector(p, &l0) * (phi.weight(&w) * nu.eval(&w, &c.x) * mu.eval(&w, &c.x));
    let t1 = symbol_on_data_covector(p, &l1) * (phi.weight(&wm) * nu.eval(&wm, &c.x) * mu.eval(&wm, &c.x));
    Ok(t0 + t1)
}

/// Top-order symbol of L_φ = R*_ν K_φ P R_μ at (x, ξ dx).
pub fn symbol_l_phi(
    x: &VecN,
    xi: &VecN,
    mu: &WeightField,
    nu: &WeightField,
    p: &FilterSpec,
    phi: &Cutoff,
) -> Result<Complex64> {
    let c = Covector::new(*x, *xi)?;
    let n = x.dim() as i32;
    let scale = TAU.powi(n - 1) / c.magnitude.powi(n - 1);
    Ok(bracket(&c, mu, nu, p, phi)? * scale)
}

/// The sufficient condition that certified ellipticity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// A ∩ (−1)A = ∅.
    NonSymmetric,
    /// p real and of one sign on V_A^R.
    SameSign,
    None,
}

impl Condition {
    pub fn label(&self) -> &'static str {
        match self {
            Condition::NonSymmetric => "i",
            Condition::SameSign => "ii",
            Condition::None => "none",
        }
    }
}

/// A sampled covector with its symbol value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witness {
    pub covector: Covector,
    pub value: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EllipticityReport {
    pub elliptic: bool,
    pub condition: Condition,
    pub non_symmetric: bool,
    pub same_sign: bool,
    /// p does not vanish on the sampled V_A^R.
    pub p_nonvanishing: bool,
    /// min |σ(L_φ)|·‖ξ‖^{n−1} over the sampled 𝒱_{int(A)}.
    pub margin: f64,
    /// The sample attaining the margin when ellipticity is not certified.
    pub witness: Option<Witness>,
}

/// Sampling density for [`check_ellipticity`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticityOptions {
    /// Fiber patch bound for z and bound on the sampled base points x.
    pub radius: f64,
    pub directions: usize,
    /// Samples per fiber axis.
    pub fiber: usize,
    pub imag_tol: f64,
}

impl Default for EllipticityOptions {
    fn default() -> Self {
        Self { radius: 1.5, directions: 64, fiber: 7, imag_tol: 1e-9 }
    }
}

fn lattice(dim: usize, count: usize, radius: f64) -> Vec<VecN> {
    let m = count.max(2);
    let v = |k: usize| -radius + 2.0 * radius * k as f64 / (m - 1) as f64;
    let mut out = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if dim == 2 {
                out.push(VecN::xy(v(i), v(j)));
            } else {
                for k in 0..m {
                    out.push(VecN::xyz(v(i), v(j), v(k)));
                }
            }
        }
    }
    out.retain(|p| p.norm() <= radius * (1.0 + 1e-12));
    out
}

/// Ellipticity of L_φ on 𝒱_{int(A)} through the two sufficient conditions:
/// (i) A ∩ (−1)A = ∅, or (ii) p real with constant sign on V_A^R. In either
/// case p must not vanish on V_A^R. The cutoff supplies φ; `Cutoff::None`
/// is read as χ_A.
pub fn check_ellipticity(
    mu: &WeightField,
    nu: &WeightField,
    p: &FilterSpec,
    a: &AngularSet,
    phi: &Cutoff,
    opts: &EllipticityOptions,
) -> Result<EllipticityReport> {
    let dim = a.dim();
    if p.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
    }
    let chi;
    let phi = match phi {
        Cutoff::None => {
            chi = Cutoff::Hard(a.clone());
            &chi
        }
        other => other,
    };
    let radius = opts.radius;
    mu.check_positive(dim, radius)?;
    nu.check_positive(dim, radius)?;

    // V_A^R: ω over A, s and z over the fiber patch, α = ±1.
    let dirs = a.sample_directions(opts.directions);
    let m = opts.fiber.max(2);
    let line: Vec<f64> = (0..m).map(|k| -radius + 2.0 * radius * k as f64 / (m - 1) as f64).collect();
    let mut pmin = f64::INFINITY;
    let mut pmax = 0.0f64;
    let (mut pos, mut neg, mut complex) = (false, false, false);
    let mut p_witness = None;
    for w in &dirs {
        let basis = w.hyperplane_basis();
        let zs: Vec<VecN> = if dim == 2 {
            line.iter().map(|&c| basis[0] * c).collect()
        } else {
            line.iter().flat_map(|&c1| line.iter().map(move |&c2| (c1, c2))).map(|(c1, c2)| basis[0] * c1 + basis[1] * c2).collect()
        };
        for &s in &line {
            for z in &zs {
                for alpha in [1.0, -1.0] {
                    let d = DataCovector::from_alpha_z(*w, s, alpha, *z)?;
                    let v = symbol_on_data_covector(p, &d);
                    let mag = v.norm();
                    pmax = pmax.max(mag);
                    if mag < pmin {
                        pmin = mag;
                        p_witness = Some((d, v));
                    }
                    if v.im.abs() > opts.imag_tol * mag.max(1.0) {
                        complex = true;
                    }
                    if v.re > 0.0 {
                        pos = true;
                    } else if v.re < 0.0 {
                        neg = true;
                    } else {
                        pos = true;
                        neg = true;
                    }
                }
            }
        }
    }
    let vanish_tol = 1e-12 * pmax.max(1e-300);
    let p_nonvanishing = pmin > vanish_tol;
    let non_symmetric = !a.intersects_reflection();
    let same_sign = !complex && (pos != neg);
    let condition = if same_sign {
        Condition::SameSign
    } else if non_symmetric {
        Condition::NonSymmetric
    } else {
        Condition::None
    };

    // 𝒱_{int(A)}: x over a disk or ball, ω(ξ) = ±ω with ω ∈ int(A), ‖ξ‖ = 1.
    let interior: Vec<Direction> = dirs.iter().filter(|w| a.membership(w) == Membership::Interior).copied().collect();
    let xs = lattice(dim, 5, radius);
    let scale = TAU.powi(dim as i32 - 1);
    let mut margin = f64::INFINITY;
    let mut worst = None;
    for w in &interior {
        for sign in [1.0, -1.0] {
            for x in &xs {
                let c = Covector::from_direction(*x, if sign > 0.0 { *w } else { w.opposite() }, 1.0)?;
                let v = bracket(&c, mu, nu, p, phi)? * scale;
                if v.norm() < margin {
                    margin = v.norm();
                    worst = Some(Witness { covector: c, value: v });
                }
            }
        }
    }
    if interior.is_empty() {
        margin = 0.0;
    }
    let certified = condition != Condition::None && p_nonvanishing;
    let elliptic = certified && margin > vanish_tol * scale;
    let witness = if elliptic {
        None
    } else if !p_nonvanishing {
        p_witness.map(|(d, v)| {
            let covector = compose_ct(&DataWavefrontSet::new(vec![d], Tolerance::default())).wf.samples[0];
            Witness { covector, value: v }
        })
    } else {
        worst
    };
    Ok(EllipticityReport { elliptic, condition, non_symmetric, same_sign, p_nonvanishing, margin, witness })
}
